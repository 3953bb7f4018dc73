"""Depolarizing trajectories, readout flips and detector loss.

Depolarizing noise uses ``rho -> (1 - p) rho + p I/2`` per site, unraveled as
identity with probability ``1 - 3p/4`` and each of X, Y, Z with ``p/4``. Every
single-site Pauli expectation then shrinks by exactly ``1 - p``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import classify, lhv_bound
from .mermin import MerminVariant, TermPattern, enumerate_terms, ghz_value
from .measurement import (
    FEstimate,
    MeasurementSetting,
    Realization,
    TermEstimate,
    combine_terms,
    parity_products,
    rotated_probabilities,
    run_terms,
)
from .qstate import QubitRegister, StateError, apply_single_site, ghz, ghz_plus, sample_indices
from .seeding import child_rng, child_seed

# noise level quoted in the literature as the tolerable per-particle noise; drawn, not derived
REFERENCE_NOISE_LEVEL = 0.14

PAULIS = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class AllShotsDiscardedError(RuntimeError):
    """Every shot lost at least one detection, so no estimate exists."""


@dataclass(frozen=True)
class NoiseSpec:
    depolarizing_p: float = 0.0
    readout_flip_m: float = 0.0
    detector_efficiency_eta: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.depolarizing_p <= 1.0:
            raise ValueError(f"depolarizing_p must lie in [0, 1], got {self.depolarizing_p}")
        if not 0.0 <= self.readout_flip_m <= 1.0:
            raise ValueError(f"readout_flip_m must lie in [0, 1], got {self.readout_flip_m}")
        if not 0.0 < self.detector_efficiency_eta <= 1.0:
            raise ValueError(f"detector_efficiency_eta must lie in (0, 1], got {self.detector_efficiency_eta}")

    @property
    def is_ideal(self) -> bool:
        return self.depolarizing_p == 0 and self.readout_flip_m == 0 and self.detector_efficiency_eta == 1


def _draw_paulis(p: float, size, rng: np.random.Generator) -> np.ndarray:
    # [0, 1-3p/4) -> I, then three p/4 slots for X, Y, Z
    q = p / 4
    edges = np.array([1 - 3 * q, 1 - 2 * q, 1 - q])
    return np.searchsorted(edges, rng.random(size), side="right").astype(np.int64)


def apply_paulis(state: QubitRegister, codes) -> QubitRegister:
    for j, c in enumerate(codes):
        if c:
            state = apply_single_site(state, j, PAULIS[int(c)])
    return state


def apply_depolarizing_trajectory(state: QubitRegister, spec: NoiseSpec, rng_seed: int) -> QubitRegister:
    """One stochastic unraveling of the depolarizing channel on every site."""
    codes = _draw_paulis(spec.depolarizing_p, state.n_sites, np.random.default_rng(rng_seed))
    return apply_paulis(state, codes)


def _trajectory_detections(state: QubitRegister, setting: MeasurementSetting, p: float,
                           n_shots: int, rng_seed: int) -> np.ndarray:
    """One detection index per shot, each shot on its own Pauli trajectory.

    Shots sharing a trajectory are sampled together from that trajectory's state.
    """
    n = state.n_sites
    if p == 0:
        probs = rotated_probabilities(state, setting)
        return sample_indices(probs, n_shots, child_rng(rng_seed, "trajectory", 0))
    paulis = _draw_paulis(p, (n_shots, n), child_rng(rng_seed, "depolarize"))
    codes = paulis @ (4 ** np.arange(n, dtype=np.int64))
    out = np.empty(n_shots, dtype=np.int64)
    for code in np.unique(codes):
        where = np.flatnonzero(codes == code)
        traj = apply_paulis(state, paulis[where[0]])
        probs = rotated_probabilities(traj, setting)
        out[where] = sample_indices(probs, len(where), child_rng(rng_seed, "trajectory", int(code)))
    return out


def noisy_measure_term(state: QubitRegister, pattern: TermPattern, spec: NoiseSpec,
                       n_shots: int = 10_000, rng_seed: int = 0,
                       realization=Realization.BEC) -> TermEstimate:
    """Term estimate with depolarizing trajectories, readout flips and site loss.

    A shot is kept only if every site was detected; the mean runs over kept shots.
    """
    if pattern.n_sites != state.n_sites:
        raise StateError(f"pattern has {pattern.n_sites} sites, state has {state.n_sites}")
    if n_shots < 1:
        raise ValueError("need at least one shot")
    n = state.n_sites
    setting = MeasurementSetting.from_pattern(pattern, realization)
    idx = _trajectory_detections(state, setting, spec.depolarizing_p, n_shots, rng_seed)
    products = parity_products(idx)
    if spec.readout_flip_m > 0:
        flips = child_rng(rng_seed, "flip").random((n_shots, n)) < spec.readout_flip_m
        products = products * (1 - 2 * (flips.sum(axis=1) & 1))
    if spec.detector_efficiency_eta < 1:
        detected = child_rng(rng_seed, "loss").random((n_shots, n)) < spec.detector_efficiency_eta
        products = products[detected.all(axis=1)]
    if len(products) == 0:
        raise AllShotsDiscardedError(f"all {n_shots} shots lost a detection (eta={spec.detector_efficiency_eta})")
    return TermEstimate.from_products(products, n_attempted=n_shots)


def estimate_f_noisy(state: QubitRegister, variant: MerminVariant, spec: NoiseSpec,
                     shots_per_term: int = 10_000, rng_seed: int = 0,
                     realization=Realization.BEC, threads: int = 1) -> FEstimate:
    terms = enumerate_terms(state.n_sites, MerminVariant.parse(variant))
    ests = run_terms(
        lambda t, s: noisy_measure_term(state, t, spec, shots_per_term, s, realization),
        terms, rng_seed, threads,
    )
    return combine_terms(list(zip(terms, ests)))


NOISE_AXES = ("depolarizing_p", "readout_flip_m")


def scaling_factor(n: int, axis: str, level: float) -> float:
    """Multiplier on every ideal term value: ``(1-p)^N`` or ``(1-2m)^N``."""
    if axis == "depolarizing_p":
        return (1.0 - level) ** n
    if axis == "readout_flip_m":
        return (1.0 - 2.0 * level) ** n
    raise ValueError(f"unknown noise axis {axis!r}; use one of {NOISE_AXES}")


def analytic_crossover(n: int, axis: str) -> float | None:
    """Noise level where the GHZ correlator falls to the local-realist bound.

    ``None`` when the noiseless GHZ value does not exceed the bound.
    """
    ratio = lhv_bound(n) / ghz_value(n)
    if ratio >= 1:
        return None
    root = 1.0 - ratio ** (1.0 / n)
    if axis == "depolarizing_p":
        return root
    if axis == "readout_flip_m":
        return root / 2
    raise ValueError(f"unknown noise axis {axis!r}; use one of {NOISE_AXES}")


def ideal_ghz(n: int, variant: MerminVariant) -> QubitRegister:
    """The GHZ form whose correlator is ``2^(N-1)`` for the given variant."""
    return ghz(n) if MerminVariant.parse(variant) is MerminVariant.ODD_Y else ghz_plus(n)


@dataclass(frozen=True)
class SweepRow:
    noise_value: float
    f_hat: float
    stderr: float
    f_analytic: float
    lhv_bound: float
    violated: bool
    retained_fraction: float


@dataclass
class SweepResult:
    n: int
    variant: MerminVariant
    noise_axis: str
    rows: list[SweepRow]
    analytic_crossover: float | None
    reference_level: float = REFERENCE_NOISE_LEVEL
    base: NoiseSpec = field(default_factory=NoiseSpec)

    def crossover_bracket(self) -> tuple[float, float] | None:
        """Grid interval where the violation verdict first turns from true to false."""
        for a, b in zip(self.rows, self.rows[1:]):
            if a.violated and not b.violated:
                return (a.noise_value, b.noise_value)
        return None


def threshold_sweep(n: int, variant: MerminVariant, noise_axis: str, grid, shots: int = 10_000,
                    rng_seed: int = 0, base: NoiseSpec = NoiseSpec(),
                    realization=Realization.BEC, threads: int = 1) -> SweepResult:
    """Sampled correlator of the ideal GHZ along one noise axis, sorted by noise level."""
    variant = MerminVariant.parse(variant)
    if noise_axis not in NOISE_AXES:
        raise ValueError(f"unknown noise axis {noise_axis!r}; use one of {NOISE_AXES}")
    levels = sorted(float(g) for g in grid)
    specs = [NoiseSpec(**{**base.__dict__, noise_axis: v}) for v in levels]
    state = ideal_ghz(n, variant)
    rows = []
    for k, (level, spec) in enumerate(zip(levels, specs)):
        est = estimate_f_noisy(state, variant, spec, shots, child_seed(rng_seed, "sweep", k),
                               realization, threads)
        report = classify(n, est.value, est.stderr)
        kept = sum(e.n_shots for _, e in est.terms) / sum(e.n_attempted for _, e in est.terms)
        rows.append(SweepRow(level, est.value, est.stderr,
                             ghz_value(n) * scaling_factor(n, noise_axis, level),
                             report.lhv_bound, report.violates_lhv, kept))
    return SweepResult(n, variant, noise_axis, rows, analytic_crossover(n, noise_axis), base=base)


def retained_fraction_expected(n: int, eta: float) -> float:
    return eta**n


def binomial_stderr(p: float, trials: int) -> float:
    return math.sqrt(p * (1 - p) / trials)
