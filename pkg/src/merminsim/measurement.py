"""Shot-level simulation of sigma_x / sigma_y correlation measurements.

Each site is rotated so that the +1 eigenstate of the chosen Pauli lands on
bit 0 (up / excited) and the -1 eigenstate on bit 1, then the register is
sampled in the computational basis. A shot's outcome is the parity
``(-1)^(number of down detections)``.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .mermin import MerminVariant, TermPattern, enumerate_terms, popcount
from .qstate import QubitRegister, StateError, _check_normalized, apply_single_site, sample_indices
from .seeding import child_rng, child_seed

SHOT_BLOCK = 1 << 16

_S2 = 1 / math.sqrt(2)
M_X = _S2 * np.array([[1, 1], [1, -1]], dtype=complex)
M_Y = _S2 * np.array([[1, -1j], [1, 1j]], dtype=complex)
# 50:50 splitter: |up> -> (|up> + i|down>)/sqrt2, |down> -> (i|up> + |down>)/sqrt2
SPLITTER = _S2 * np.array([[1, 1j], [1j, 1]], dtype=complex)


class Realization(enum.Enum):
    BEC = "bec"
    CAVITY = "cavity"

    @classmethod
    def parse(cls, value) -> "Realization":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown realization {value!r} (use bec or cavity)") from None


def _basis(b: str) -> str:
    b = str(b).upper()
    if b not in ("X", "Y"):
        raise ValueError(f"measurement basis must be X or Y, got {b!r}")
    return b


def upper_phase(phi: float) -> np.ndarray:
    return np.diag([np.exp(1j * phi), 1.0])


def stark_phase(theta_t: float) -> np.ndarray:
    return np.diag([np.exp(-1j * theta_t), 1.0])


def y_rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def measurement_factors(basis: str, realization: Realization) -> list[tuple[str, np.ndarray]]:
    """Physical steps, in the order they act, that realize the readout map.

    BEC: phase imprint on the upper site, the 50:50 splitter, and a final
    lower-site phase that only fixes the detection frame (number counting is
    blind to it). CAVITY: a Stark z-rotation followed by a pi/2 y-rotation.
    """
    basis = _basis(basis)
    realization = Realization.parse(realization)
    if realization is Realization.BEC:
        pre = math.pi / 2 if basis == "X" else math.pi
        return [
            (f"imprint {pre:.6g} rad on upper site", upper_phase(pre)),
            ("50:50 splitter", SPLITTER),
            ("readout frame -pi/2 on lower site", np.diag([1.0, -1j])),
        ]
    theta = math.pi if basis == "X" else math.pi / 2
    return [
        (f"Stark z-rotation theta_t={theta:.6g}", stark_phase(theta)),
        ("y-rotation pi/2", y_rotation(math.pi / 2)),
    ]


def compose(factors: list[tuple[str, np.ndarray]]) -> np.ndarray:
    u = np.eye(2, dtype=complex)
    for _, m in factors:
        u = m @ u
    return u


def measurement_unitary(basis: str, realization: Realization = Realization.BEC) -> np.ndarray:
    """Readout map sending ``|basis,+>`` to up and ``|basis,->`` to down."""
    Realization.parse(realization)
    return (M_X if _basis(basis) == "X" else M_Y).copy()


def phase_aligned_distance(a: np.ndarray, b: np.ndarray) -> float:
    """``min_phi ||a - e^{i phi} b||`` (max-abs norm after aligning the global phase)."""
    k = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    phase = a[k] / b[k]
    phase /= abs(phase)
    return float(np.max(np.abs(a - phase * b)))


@dataclass(frozen=True)
class MeasurementSetting:
    bases: tuple[str, ...]
    realization: Realization = Realization.BEC

    def __post_init__(self):
        object.__setattr__(self, "bases", tuple(_basis(b) for b in self.bases))
        object.__setattr__(self, "realization", Realization.parse(self.realization))

    @classmethod
    def from_pattern(cls, pattern: TermPattern, realization=Realization.BEC) -> "MeasurementSetting":
        return cls(tuple(pattern.basis_choices()), realization)


@dataclass(frozen=True)
class ShotRecord:
    outcomes: tuple[int, ...]
    product: int
    n_down: int

    @classmethod
    def from_index(cls, index: int, n_sites: int) -> "ShotRecord":
        outcomes = tuple(-1 if (index >> j) & 1 else 1 for j in range(n_sites))
        n_down = outcomes.count(-1)
        return cls(outcomes, -1 if n_down % 2 else 1, n_down)


@dataclass(frozen=True)
class TermEstimate:
    mean: float
    stderr: float
    n_shots: int
    n_attempted: int | None = None

    @classmethod
    def from_products(cls, products: np.ndarray, n_attempted: int | None = None) -> "TermEstimate":
        m = len(products)
        if m == 0:
            raise ValueError("no shots to estimate from")
        mean = float(np.mean(products))
        # single-shot estimate carries no spread information
        sd = float(np.std(products, ddof=1)) if m > 1 else 0.0
        return cls(mean, sd / math.sqrt(m), m, n_attempted)


def rotated_probabilities(state: QubitRegister, setting: MeasurementSetting) -> np.ndarray:
    """Detection probabilities after every site's readout rotation."""
    if len(setting.bases) != state.n_sites:
        raise StateError(f"setting has {len(setting.bases)} sites, state has {state.n_sites}")
    _check_normalized(state)
    maps = {}
    for j, b in enumerate(setting.bases):
        if b not in maps:
            maps[b] = compose(measurement_factors(b, setting.realization))
        state = apply_single_site(state, j, maps[b])
    return state.probabilities()


def sample_detections(probs: np.ndarray, n_shots: int, rng_seed: int) -> np.ndarray:
    """Detection indices drawn in fixed-size blocks, each with its own child stream."""
    if n_shots < 1:
        raise ValueError("need at least one shot")
    out = []
    for b, start in enumerate(range(0, n_shots, SHOT_BLOCK)):
        size = min(SHOT_BLOCK, n_shots - start)
        out.append(sample_indices(probs, size, child_rng(rng_seed, "shots", b)))
    return np.concatenate(out)


def parity_products(indices: np.ndarray) -> np.ndarray:
    """``(-1)^(number of down detections)`` per shot."""
    return 1 - 2 * (popcount(indices) & 1)


def sample_shots(state: QubitRegister, setting: MeasurementSetting, n_shots: int,
                 rng_seed: int) -> list[ShotRecord]:
    idx = sample_detections(rotated_probabilities(state, setting), n_shots, rng_seed)
    return [ShotRecord.from_index(int(i), state.n_sites) for i in idx]


def measure_term(state: QubitRegister, pattern: TermPattern, realization=Realization.BEC,
                 n_shots: int = 10_000, rng_seed: int = 0) -> TermEstimate:
    if pattern.n_sites != state.n_sites:
        raise StateError(f"pattern has {pattern.n_sites} sites, state has {state.n_sites}")
    probs = rotated_probabilities(state, MeasurementSetting.from_pattern(pattern, realization))
    return TermEstimate.from_products(parity_products(sample_detections(probs, n_shots, rng_seed)))


@dataclass
class FEstimate:
    value: float
    stderr: float
    terms: list[tuple[TermPattern, TermEstimate]]


def combine_terms(terms: list[tuple[TermPattern, TermEstimate]]) -> FEstimate:
    """Signed sum of term means; errors add in quadrature (separate runs per term)."""
    value = sum(t.sign * e.mean for t, e in terms)
    stderr = math.sqrt(sum(e.stderr**2 for _, e in terms))
    return FEstimate(float(value), stderr, terms)


def run_terms(fn, terms: list[TermPattern], rng_seed: int, threads: int = 1):
    """Call ``fn(pattern, seed)`` for every term with per-term child seeds."""
    seeds = [child_seed(rng_seed, "term", k) for k in range(len(terms))]
    if threads <= 1:
        return [fn(t, s) for t, s in zip(terms, seeds)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, terms, seeds))


def estimate_f(state: QubitRegister, variant: MerminVariant, realization=Realization.BEC,
               shots_per_term: int = 10_000, rng_seed: int = 0, threads: int = 1) -> FEstimate:
    """Sampled correlator; identical for any ``threads`` given the same seed."""
    terms = enumerate_terms(state.n_sites, MerminVariant.parse(variant))
    ests = run_terms(lambda t, s: measure_term(state, t, realization, shots_per_term, s),
                     terms, rng_seed, threads)
    return combine_terms(list(zip(terms, ests)))
