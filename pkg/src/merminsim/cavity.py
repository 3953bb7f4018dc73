"""Rydberg-atom GHZ preparation through a line of detuned cavities.

Atoms carry three levels ``e, g, i`` (digits 0, 1, 2). Atom 0 is the one that
crosses every cavity; it meets atom ``k`` in cavity ``k``. The cavity field is
eliminated in the zero-photon dispersive limit, so each passage is a fixed
two-atom unitary parameterized by ``gamma_t = (g^2 / Delta) t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fock import PhaseCorrection, canonicalize_phase
from .qstate import (
    LEVEL_E,
    LEVEL_G,
    LEVEL_I,
    AtomChainState,
    QubitRegister,
    Register,
    StateError,
    apply_diagonal,
    apply_single_site,
    apply_two_site,
)

I_LEAK_TOL = 1e-10
EE_TOL = 1e-12


@dataclass(frozen=True)
class CavityGateSpec:
    # gamma * t = pi reproduces the collisional phase-gate truth table exactly
    gamma_t: float = math.pi

    def __post_init__(self):
        if not math.isfinite(self.gamma_t):
            raise ValueError("gamma_t must be finite")


@dataclass(frozen=True)
class StarkSpec:
    """Accumulated Stark phase ``theta_t`` put on the excited level."""

    theta_t: float

    def __post_init__(self):
        if not math.isfinite(self.theta_t):
            raise ValueError("theta_t must be finite")

    @classmethod
    def from_field(cls, epsilon: float, alpha_g: float, alpha_e: float,
                   field_amplitude: float, duration: float = 1.0) -> "StarkSpec":
        """``theta_t = epsilon (alpha_g - alpha_e) E^2 t``."""
        return cls(epsilon * (alpha_g - alpha_e) * field_amplitude**2 * duration)


def rotation_matrix(angle: float) -> np.ndarray:
    """Resonant e<->g drive for ``Omega t = angle``; leaves ``i`` alone."""
    c, s = math.cos(angle), math.sin(angle)
    u = np.eye(3, dtype=complex)
    u[LEVEL_G, LEVEL_G] = c
    u[LEVEL_E, LEVEL_E] = c
    u[LEVEL_G, LEVEL_E] = -1j * s
    u[LEVEL_E, LEVEL_G] = -1j * s
    return u


_SWAP_EI = np.eye(3, dtype=complex)[[LEVEL_I, LEVEL_G, LEVEL_E]]


def rotate_ge(state: AtomChainState, atom: int, angle: float) -> AtomChainState:
    return apply_single_site(state, atom, rotation_matrix(angle))


def swap_ei(state: AtomChainState, atom: int) -> AtomChainState:
    """Full population transfer ``e <-> i`` on one atom."""
    return apply_single_site(state, atom, _SWAP_EI)


def collisional_matrix(spec: CavityGateSpec) -> np.ndarray:
    """Two-atom map, index ``3 * level_a + level_b``, atom ``a`` first.

    The g/e exchange block and the single-excitation phases follow the dispersive
    Tavis-Cummings solution. ``|e,e>`` gets the two-excitation phase
    ``exp(-2i gamma t)``; an atom in ``i`` is a spectator.
    """
    gt = spec.gamma_t
    ph = np.exp(-1j * gt)
    u = np.eye(9, dtype=complex)

    def k(a, b):
        return 3 * a + b

    ge, eg = k(LEVEL_G, LEVEL_E), k(LEVEL_E, LEVEL_G)
    u[ge, ge] = u[eg, eg] = ph * math.cos(gt)
    u[eg, ge] = u[ge, eg] = -1j * ph * math.sin(gt)
    u[k(LEVEL_E, LEVEL_E), k(LEVEL_E, LEVEL_E)] = ph * ph
    u[k(LEVEL_I, LEVEL_E), k(LEVEL_I, LEVEL_E)] = ph
    u[k(LEVEL_E, LEVEL_I), k(LEVEL_E, LEVEL_I)] = ph
    return u


def collisional_gate(state: AtomChainState, atom_a: int, atom_b: int,
                     spec: CavityGateSpec = CavityGateSpec()) -> AtomChainState:
    if atom_a == atom_b:
        raise StateError("collisional gate needs two distinct atoms")
    return apply_two_site(state, atom_a, atom_b, collisional_matrix(spec))


def stark_z(state: Register, atom: int, spec: StarkSpec) -> Register:
    """Multiply the excited-level amplitude of one atom by ``exp(-i theta_t)``."""
    n, d = state.n_sites, state.dim
    if not 0 <= atom < n:
        raise StateError(f"atom {atom} out of range for {n} atoms")
    digit = (np.arange(d**n) // d**atom) % d
    return apply_diagonal(state, np.where(digit == LEVEL_E, np.exp(-1j * spec.theta_t), 1.0))


@dataclass(frozen=True)
class Step:
    kind: str  # "rotate" | "swap" | "gate" | "stark"
    atoms: tuple[int, ...]
    angle: float = 0.0


@dataclass(frozen=True)
class PipelineSchedule:
    n_atoms: int
    steps: tuple[Step, ...]
    gate: CavityGateSpec = field(default_factory=CavityGateSpec)

    def __post_init__(self):
        if self.n_atoms < 2:
            raise ValueError(f"cavity pipeline needs at least 2 atoms, got {self.n_atoms}")
        gates = [s.atoms for s in self.steps if s.kind == "gate"]
        expected = [(0, k) for k in range(1, self.n_atoms)]
        if sorted(gates) != expected:
            raise ValueError(f"schedule must pair atom 0 once with each of atoms 1..{self.n_atoms - 1}")
        for s in self.steps:
            if s.kind not in ("rotate", "swap", "gate", "stark"):
                raise ValueError(f"unknown step kind {s.kind!r}")
            if any(not 0 <= a < self.n_atoms for a in s.atoms):
                raise ValueError(f"step {s} addresses an atom outside 0..{self.n_atoms - 1}")

    @classmethod
    def standard(cls, n_atoms: int, gate: CavityGateSpec = CavityGateSpec()) -> "PipelineSchedule":
        """Zones a, b, (cavity k, zone c) for k = 1..N-1, then b again."""
        quarter = math.pi / 4
        steps = [Step("rotate", (j,), quarter) for j in range(n_atoms)]
        steps.append(Step("swap", (0,)))
        for k in range(1, n_atoms):
            steps.append(Step("gate", (0, k)))
            steps.append(Step("rotate", (k,), quarter))
        steps.append(Step("swap", (0,)))
        return cls(n_atoms, tuple(steps), gate)


@dataclass
class CavityRun:
    state: AtomChainState
    gate_input_ee: list[float]

    @property
    def max_gate_input_ee(self) -> float:
        return max(self.gate_input_ee, default=0.0)


def _pair_population(state: AtomChainState, a: int, b: int, la: int, lb: int) -> float:
    n = state.n_atoms
    idx = np.arange(3**n)
    mask = ((idx // 3**a) % 3 == la) & ((idx // 3**b) % 3 == lb)
    return float(np.sum(np.abs(state.amps[mask]) ** 2))


def run_schedule(schedule: PipelineSchedule, initial: AtomChainState | None = None) -> CavityRun:
    """Execute every step in order; records the ``|e,e>`` weight entering each cavity."""
    n = schedule.n_atoms
    state = initial if initial is not None else AtomChainState.from_levels("e" * n)
    if state.n_atoms != n:
        raise ValueError("initial state size does not match the schedule")
    ee = []
    for s in schedule.steps:
        if s.kind == "rotate":
            state = rotate_ge(state, s.atoms[0], s.angle)
        elif s.kind == "swap":
            state = swap_ei(state, s.atoms[0])
        elif s.kind == "stark":
            state = stark_z(state, s.atoms[0], StarkSpec(s.angle))
        else:
            ee.append(_pair_population(state, *s.atoms, LEVEL_E, LEVEL_E))
            state = collisional_gate(state, *s.atoms, schedule.gate)
    return CavityRun(state, ee)


def build_ghz_cavity(n_atoms: int, schedule: PipelineSchedule | None = None) -> AtomChainState:
    if schedule is None:
        schedule = PipelineSchedule.standard(n_atoms)
    if schedule.n_atoms != n_atoms:
        raise ValueError(f"schedule is for {schedule.n_atoms} atoms, asked for {n_atoms}")
    return run_schedule(schedule).state


def _qubit_to_trit_index(n: int) -> np.ndarray:
    q = np.arange(2**n)
    return sum(((q >> j) & 1) * 3**j for j in range(n))


def project_to_qubits(state: AtomChainState, tol: float = I_LEAK_TOL) -> QubitRegister:
    """Drop the ``i`` level (e -> bit 0, g -> bit 1) and renormalize."""
    leak = state.i_population()
    if leak > tol:
        raise StateError(f"auxiliary-level population {leak:.3e} exceeds {tol:g}")
    amps = state.amps[_qubit_to_trit_index(state.n_atoms)]
    norm = np.linalg.norm(amps)
    if norm == 0:
        raise StateError("state has no weight in the e/g subspace")
    return QubitRegister(state.n_atoms, amps / norm)


def embed_qubits(reg: QubitRegister) -> AtomChainState:
    """Inverse of :func:`project_to_qubits` for states without ``i`` population."""
    amps = np.zeros(3**reg.n_sites, dtype=complex)
    amps[_qubit_to_trit_index(reg.n_sites)] = reg.amps
    return AtomChainState(reg.n_sites, amps)


def cavity_ghz(n_atoms: int, schedule: PipelineSchedule | None = None
               ) -> tuple[QubitRegister, PhaseCorrection, AtomChainState]:
    """Run the pipeline, project out ``i`` and fix local phases to the real-``+`` GHZ form."""
    chain = build_ghz_cavity(n_atoms, schedule)
    reg, corr = canonicalize_phase(project_to_qubits(chain), relative_phase=0.0)
    return reg, corr, chain


def schmidt_coefficients(reg: QubitRegister, n_left: int = 1) -> np.ndarray:
    """Schmidt coefficients across the cut between sites ``< n_left`` and the rest."""
    m = reg.amps.reshape(2 ** (reg.n_sites - n_left), 2**n_left)
    return np.linalg.svd(m, compute_uv=False)
