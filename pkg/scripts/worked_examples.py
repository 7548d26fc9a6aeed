"""Recompute the headline numbers for every named example system.

Usage: python3 scripts/worked_examples.py [--seed 42]
"""

import argparse

from emergence_lab import fixtures
from emergence_lab.capacity import blahut_arimoto, exact_symbol_error, random_message, simulate_coding
from emergence_lab.gates import ElementChoice, apply_element_choice, compile_tpm
from emergence_lab.measures import conditional_entropy_xy, full_report
from emergence_lab.model_space import ModelChoice, Partition, generalized_case, macro_ei
from emergence_lab.search import anneal_search, exhaustive_search


def line(label: str, value: float) -> None:
    print(f"  {label:<34s} {value:.6f}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    print("Markov chains M1-M3")
    for name in ("m1", "m2", "m3"):
        line(f"ei({name})", full_report(getattr(fixtures, name)()).ei)

    for name in ("absorbing8", "hetero8"):
        t = getattr(fixtures, name)()
        r = full_report(t)
        best = exhaustive_search(t, 1)
        print(f"{name}: best grouping {best.best_choice.partition.blocks()}")
        line("micro ei", r.ei)
        line("micro eff", r.effectiveness)
        line("macro ei", best.best_ei)
        line("emergence", best.best_ei - r.ei)

    t = fixtures.coding4()
    print("coding4")
    line("micro ei", full_report(t).ei)
    line("H(X|Y)", conditional_entropy_xy(t))
    line("capacity", blahut_arimoto(t).capacity)
    macro = ModelChoice.coarse([[0, 1, 2], [3]], 4)
    msg = random_message(20_000, seed=args.seed)
    line("macro code error rate", simulate_coding(t, macro, msg, seed=args.seed).symbol_error_rate)
    line("micro code error rate", simulate_coding(t, None, msg, seed=args.seed).symbol_error_rate)
    line("micro code exact error", exact_symbol_error(t))

    t = fixtures.exogenous8()
    print("exogenous8")
    line("micro ei", full_report(t).ei)
    line("endogenous {7,8} ei", macro_ei(t, ModelChoice((6, 7), Partition((0, 1)))).ei)
    best = exhaustive_search(t, 2)
    print(f"  level-2 optimum: endogenous {list(best.best_choice.endogenous)}, "
          f"blocks {best.best_choice.partition.blocks()}")
    line("level-2 ei", best.best_ei)

    print("generalized case")
    for n in (3, 8, 16, 32, 64):
        t, choice = generalized_case(n)
        print(f"  n={n:<3d} micro {full_report(t).ei:.6f}  macro {macro_ei(t, choice).ei:.6f}")

    for name in ("and2", "six_and"):
        g = getattr(fixtures, name)()
        r = full_report(compile_tpm(g))
        print(name)
        line("micro ei", r.ei)
        line("micro eff", r.effectiveness)
        line("micro degeneracy", r.degeneracy)
        line("macro ei (annealed)", anneal_search(g, 1, seed=args.seed).best_ei)
    g = fixtures.and2()
    line("and2 frozen B=1 ei", full_report(apply_element_choice(g, ElementChoice((0,), {1: 1}))[0]).ei)
    line("and2 black-boxed B ei", full_report(apply_element_choice(g, ElementChoice((0,), blackboxed=(1,)))[0]).ei)


if __name__ == "__main__":
    main()
