"""Two-mode Fock-space Mach-Zehnder with a Kerr phase on the upper arm.

``TwoModeFock.amps[n]`` is the amplitude of ``|n_up = n, n_down = N - n>``.
The beam splitter evolves under ``exp(+i theta (a^dag b + a b^dag))`` so that a
single atom maps ``|up> -> (|up> + i|down>)/sqrt(2)`` at ``theta = pi/4``.

The collisional term ``chi n(n-1)`` alone leaves the arms at a relative phase
of +-pi/2, where a symmetric Mach-Zehnder does not route all atoms to one port.
The schedule therefore carries a linear upper-arm phase (``arm_phase``, default
pi/2) which turns the total phase into ``(pi/2) n^2`` and makes the output a
two-branch state for every N.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .qstate import QubitRegister, StateError

LEAKAGE_TOL = 1e-10
WEIGHT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TwoModeFock:
    n_atoms: int
    amps: np.ndarray

    def __post_init__(self):
        if self.n_atoms < 1:
            raise StateError("n_atoms must be positive")
        arr = np.array(self.amps, dtype=complex).reshape(-1)
        if arr.shape[0] != self.n_atoms + 1:
            raise StateError(f"expected {self.n_atoms + 1} amplitudes, got {arr.shape[0]}")
        object.__setattr__(self, "amps", arr)

    @classmethod
    def all_up(cls, n_atoms: int) -> "TwoModeFock":
        amps = np.zeros(n_atoms + 1, dtype=complex)
        amps[n_atoms] = 1.0
        return cls(n_atoms, amps)

    def norm(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def two_branch_weight(self) -> float:
        """Probability on ``|N,0>`` and ``|0,N>`` together."""
        p = np.abs(self.amps) ** 2
        return float(p[0] + p[-1])


@dataclass(frozen=True)
class MzSchedule:
    bs_angle: float = math.pi / 4
    kerr_phase: float = math.pi / 2
    arm_phase: float = math.pi / 2

    def __post_init__(self):
        for v in (self.bs_angle, self.kerr_phase, self.arm_phase):
            if not math.isfinite(v):
                raise ValueError("schedule angles must be finite")


def tunneling_matrix(n_atoms: int) -> np.ndarray:
    """``a^dag b + a b^dag`` in the ``|n, N-n>`` basis (real symmetric tridiagonal)."""
    n = np.arange(n_atoms)
    off = np.sqrt((n + 1.0) * (n_atoms - n))
    return np.diag(off, -1) + np.diag(off, 1)


@lru_cache(maxsize=64)
def _tunneling_eigh(n_atoms: int) -> tuple[np.ndarray, np.ndarray]:
    vals, vecs = np.linalg.eigh(tunneling_matrix(n_atoms))
    vals.setflags(write=False)
    vecs.setflags(write=False)
    return vals, vecs


def _check_finite(x: float, what: str) -> None:
    if not math.isfinite(x):
        raise ValueError(f"{what} must be finite, got {x}")


def fock_beam_splitter(state: TwoModeFock, angle: float) -> TwoModeFock:
    _check_finite(angle, "beam-splitter angle")
    vals, vecs = _tunneling_eigh(state.n_atoms)
    out = vecs @ (np.exp(1j * angle * vals) * (vecs.T @ state.amps))
    return TwoModeFock(state.n_atoms, out)


def kerr_evolution(state: TwoModeFock, phase: float) -> TwoModeFock:
    """Multiply the ``n``-atom component by ``exp(-i phase n(n-1))``."""
    _check_finite(phase, "Kerr phase")
    n = np.arange(state.n_atoms + 1)
    return TwoModeFock(state.n_atoms, state.amps * np.exp(-1j * phase * n * (n - 1)))


def arm_phase_shift(state: TwoModeFock, phase: float) -> TwoModeFock:
    """Single-particle phase on the upper arm: ``exp(-i phase n)``."""
    _check_finite(phase, "arm phase")
    n = np.arange(state.n_atoms + 1)
    return TwoModeFock(state.n_atoms, state.amps * np.exp(-1j * phase * n))


def mz_prepare(n_atoms: int, schedule: MzSchedule = MzSchedule()) -> TwoModeFock:
    """Splitter, Kerr and arm phase on the upper arm, splitter, starting from ``|N, 0>``."""
    if n_atoms < 1:
        raise ValueError(f"need at least one atom, got {n_atoms}")
    s = TwoModeFock.all_up(n_atoms)
    s = fock_beam_splitter(s, schedule.bs_angle)
    s = kerr_evolution(s, schedule.kerr_phase)
    s = arm_phase_shift(s, schedule.arm_phase)
    return fock_beam_splitter(s, schedule.bs_angle)


def mott_map(state: TwoModeFock, tol: float = LEAKAGE_TOL) -> QubitRegister:
    """Relabel ``c_N|N,0> + c_0|0,N>`` as ``c_N|up...up> + c_0|down...down>``."""
    leak = 1.0 - state.two_branch_weight()
    if leak > tol:
        raise StateError(f"state leaks {leak:.3e} outside |N,0> and |0,N>; not a two-branch state")
    n = state.n_atoms
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = state.amps[n]
    amps[-1] = state.amps[0]
    return QubitRegister(n, amps)


@dataclass(frozen=True)
class PhaseCorrection:
    """Global phase and the relative phase put on the down/ground branch of site 0."""

    global_phase: float
    relative_phase: float


def _wrap(angle: float) -> float:
    a = math.fmod(angle, 2 * math.pi)
    if a < 0:
        a += 2 * math.pi
    if abs(a) < 1e-14 or abs(a - 2 * math.pi) < 1e-14:
        return 0.0
    return a


def canonicalize_phase(state: QubitRegister, relative_phase: float = math.pi / 2
                       ) -> tuple[QubitRegister, PhaseCorrection]:
    """Map a balanced two-branch register to ``(|0..0> + e^{i phi}|1..1>)/sqrt(2)``.

    The default ``phi = pi/2`` gives the ``+i`` GHZ form. Only a global phase and a
    single-site phase on site 0 are used, so measurement statistics of local
    phase-insensitive observables are untouched.
    """
    a, b = state.amps[0], state.amps[-1]
    off = state.norm() - abs(a) ** 2 - abs(b) ** 2
    if off > WEIGHT_TOL:
        raise StateError(f"state has weight {off:.3e} outside the two GHZ branches")
    if abs(abs(a) ** 2 - 0.5) > WEIGHT_TOL or abs(abs(b) ** 2 - 0.5) > WEIGHT_TOL:
        raise StateError(f"branch weights {abs(a) ** 2:.12f}/{abs(b) ** 2:.12f} are not 1/2 each")
    g = _wrap(-float(np.angle(a)))
    r = _wrap(relative_phase - float(np.angle(b)) - g)
    corr = PhaseCorrection(g, r)
    return apply_phase_correction(state, corr), corr


def apply_phase_correction(state: QubitRegister, corr: PhaseCorrection) -> QubitRegister:
    """Apply a recorded correction to an arbitrary register (site 0 carries the relative phase)."""
    idx = np.arange(2**state.n_sites)
    phases = np.where(idx & 1, np.exp(1j * corr.relative_phase), 1.0) * np.exp(1j * corr.global_phase)
    return QubitRegister(state.n_sites, state.amps * phases)


def bec_ghz(n_atoms: int, schedule: MzSchedule = MzSchedule()
            ) -> tuple[QubitRegister, PhaseCorrection, TwoModeFock]:
    """Full BEC pipeline: interferometer, Mott relabeling, phase canonicalization."""
    fock = mz_prepare(n_atoms, schedule)
    reg, corr = canonicalize_phase(mott_map(fock))
    return reg, corr, fock

