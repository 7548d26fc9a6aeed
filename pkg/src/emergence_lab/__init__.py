"""Effective information, causal emergence and causal capacity of discrete systems."""

from .capacity import (
    CapacityResult,
    CodingResult,
    blahut_arimoto,
    capacity_random_search,
    causal_capacity,
    emergence_gap,
    is_weakly_symmetric,
    simulate_coding,
)
from .gates import ElementChoice, GateNetwork, and_network, apply_element_choice, compile_tpm
from .measures import CausalReport, degeneracy, determinism, effect_distribution, effect_information, ei, full_report
from .model_space import ModelChoice, Partition, generalized_case, macro_ei, macro_tpm, warped_intervention
from .search import (
    AnnealSchedule,
    LadderLevel,
    SearchResult,
    anneal_search,
    enumerate_partitions,
    exhaustive_search,
    ladder_report,
)
from .tpm import Tpm, emd, entropy, kl_divergence, uniform, validate_tpm

__version__ = "0.1.0"
