"""Ladder curves: best EI and EMD to the capacity-achieving input per level.

Writes one CSV per system into --outdir and prints a summary table. The
EMD column should fall (or stay flat) as the ladder climbs.

Usage: python3 scripts/ladder_curve.py [--outdir ladder_out] [--random 20]
"""

import argparse
from pathlib import Path

import numpy as np

from emergence_lab import fixtures
from emergence_lab.search import ladder_csv, ladder_report
from emergence_lab.tpm import validate_tpm

SYSTEMS = ("absorbing8", "hetero8", "exogenous8", "coding4", "m2", "and2")


def random_tpm(rng: np.random.Generator, n: int) -> np.ndarray:
    rows = rng.random((n, n)) * (rng.random((n, n)) > 0.5)
    rows[rows.sum(axis=1) == 0, 0] = 1.0
    return rows / rows.sum(axis=1, keepdims=True)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--outdir", default="ladder_out")
    ap.add_argument("--random", type=int, default=0, help="also run this many random 6-state TPMs")
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)

    systems = [(name, getattr(fixtures, name)()) for name in SYSTEMS]
    rng = np.random.default_rng(args.seed)
    systems += [(f"random{k:03d}", validate_tpm(random_tpm(rng, 6))) for k in range(args.random)]

    print(f"{'system':<12s} {'level':>5s} {'ei_max':>9s} {'capacity':>9s} {'emd':>7s}")
    flat = 0
    for name, system in systems:
        rows = ladder_report(system)
        (out / f"{name}.csv").write_text(ladder_csv(rows))
        emds = [r.emd for r in rows]
        flat += all(b <= a + 1e-9 for a, b in zip(emds, emds[1:]))
        for r in rows:
            print(f"{name:<12s} {r.level:>5d} {r.ei_max:>9.4f} {r.capacity:>9.4f} {r.emd:>7.4f}")
    print(f"EMD nonincreasing on {flat}/{len(systems)} systems")


if __name__ == "__main__":
    main()
