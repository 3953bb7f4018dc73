"""Simulation of GHZ-state preparation and Mermin-inequality tests."""
from .bounds import BoundReport, classify, classify_nmin, lhv_bound, npartite_bound
from .cavity import CavityGateSpec, PipelineSchedule, StarkSpec, build_ghz_cavity, cavity_ghz, collisional_gate
from .fock import MzSchedule, TwoModeFock, bec_ghz, canonicalize_phase, mott_map, mz_prepare
from .lhv import DeterministicStrategy, StrategyMixture, brute_force_max, mixture_f, strategy_f
from .measurement import MeasurementSetting, Realization, TermEstimate, estimate_f, measure_term
from .mermin import MerminVariant, TermPattern, enumerate_terms, f_exact_sum, f_fast, term_expectation
from .nmin import NumberDistribution, estimate_f_nmin
from .noise import NoiseSpec, estimate_f_noisy, noisy_measure_term, threshold_sweep
from .qstate import AtomChainState, QubitRegister, StateError, fidelity, ghz, ghz_plus

__version__ = "0.1.0"

__all__ = [
    "AtomChainState", "BoundReport", "CavityGateSpec", "DeterministicStrategy", "MeasurementSetting",
    "MerminVariant", "MzSchedule", "NoiseSpec", "NumberDistribution", "PipelineSchedule", "QubitRegister",
    "Realization", "StarkSpec", "StateError", "StrategyMixture", "TermEstimate", "TermPattern", "TwoModeFock",
    "bec_ghz", "brute_force_max", "build_ghz_cavity", "canonicalize_phase", "cavity_ghz", "classify",
    "classify_nmin", "collisional_gate", "enumerate_terms", "estimate_f", "estimate_f_nmin", "estimate_f_noisy",
    "f_exact_sum", "f_fast", "fidelity", "ghz", "ghz_plus", "lhv_bound", "measure_term", "mixture_f",
    "mott_map", "mz_prepare", "noisy_measure_term", "npartite_bound", "strategy_f", "term_expectation",
    "threshold_sweep",
]
