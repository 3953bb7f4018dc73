"""Dense state vectors for qubit and three-level registers.

Basis indices are little-endian in the site label: site 0 is the
least-significant binary (or ternary) digit. For qubits, digit 0 means
up / excited (``e``) and digit 1 means down / ground (``g``). For
three-level atoms the digits are ``e=0, g=1, i=2`` so that dropping the
``i`` level leaves the qubit convention unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

NORM_TOL = 1e-12
SAMPLE_NORM_TOL = 1e-10

LEVEL_E, LEVEL_G, LEVEL_I = 0, 1, 2


class StateError(ValueError):
    """Raised for malformed registers or out-of-range site operations."""


def _as_amps(amps, length: int) -> np.ndarray:
    arr = np.array(amps, dtype=complex).reshape(-1)
    if arr.shape[0] != length:
        raise StateError(f"expected {length} amplitudes, got {arr.shape[0]}")
    return arr


@dataclass(frozen=True, eq=False)
class QubitRegister:
    n_sites: int
    amps: np.ndarray

    def __post_init__(self):
        if self.n_sites < 1:
            raise StateError("n_sites must be positive")
        object.__setattr__(self, "amps", _as_amps(self.amps, 2**self.n_sites))

    dim = 2

    @classmethod
    def basis(cls, n_sites: int, index: int = 0) -> "QubitRegister":
        amps = np.zeros(2**n_sites, dtype=complex)
        amps[index] = 1.0
        return cls(n_sites, amps)

    @classmethod
    def from_bits(cls, bits) -> "QubitRegister":
        """Basis state with ``bits[j]`` on site ``j``."""
        bits = list(bits)
        return cls.basis(len(bits), sum(int(b) << j for j, b in enumerate(bits)))

    def norm(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def kron(self, other: "QubitRegister") -> "QubitRegister":
        """Tensor product with ``other`` placed on the higher site labels."""
        return QubitRegister(self.n_sites + other.n_sites, np.kron(other.amps, self.amps))


@dataclass(frozen=True, eq=False)
class AtomChainState:
    n_atoms: int
    amps: np.ndarray

    def __post_init__(self):
        if self.n_atoms < 1:
            raise StateError("n_atoms must be positive")
        object.__setattr__(self, "amps", _as_amps(self.amps, 3**self.n_atoms))

    dim = 3

    @property
    def n_sites(self) -> int:
        return self.n_atoms

    @classmethod
    def from_levels(cls, levels) -> "AtomChainState":
        """Product basis state; ``levels`` is a sequence of ``'e'``, ``'g'``, ``'i'`` or digits."""
        digits = [_level_digit(lv) for lv in levels]
        amps = np.zeros(3 ** len(digits), dtype=complex)
        amps[sum(d * 3**j for j, d in enumerate(digits))] = 1.0
        return cls(len(digits), amps)

    def norm(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def level_population(self, atom: int, level: int = LEVEL_I) -> float:
        _check_site(atom, self.n_atoms)
        t = self.amps.reshape(3 ** (self.n_atoms - 1 - atom), 3, 3**atom)
        return float(np.sum(np.abs(t[:, level, :]) ** 2))

    def i_population(self, atom: int | None = None) -> float:
        """Population of the auxiliary level on one atom, or summed over all atoms."""
        if atom is not None:
            return self.level_population(atom, LEVEL_I)
        return sum(self.level_population(a, LEVEL_I) for a in range(self.n_atoms))


def _level_digit(level) -> int:
    if isinstance(level, str):
        try:
            return {"e": LEVEL_E, "g": LEVEL_G, "i": LEVEL_I}[level]
        except KeyError:
            raise StateError(f"unknown level {level!r}") from None
    if level not in (0, 1, 2):
        raise StateError(f"unknown level {level!r}")
    return int(level)


Register = Union[QubitRegister, AtomChainState]


def _check_site(site: int, n: int) -> None:
    if not 0 <= site < n:
        raise StateError(f"site {site} out of range for {n} sites")


def check_unitary(u: np.ndarray, tol: float = NORM_TOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise StateError(f"expected a square matrix, got shape {u.shape}")
    if not np.allclose(u.conj().T @ u, np.eye(u.shape[0]), rtol=0, atol=tol):
        raise StateError("matrix is not unitary")
    return u


def _rebuild(state: Register, amps: np.ndarray) -> Register:
    return type(state)(state.n_sites, amps)


def apply_single_site(state: Register, site: int, u) -> Register:
    """Apply a ``dim x dim`` unitary to one site. Returns a new state."""
    d = state.dim
    u = check_unitary(u)
    if u.shape != (d, d):
        raise StateError(f"{u.shape} matrix does not act on a {d}-level site")
    n = state.n_sites
    _check_site(site, n)
    t = state.amps.reshape(d ** (n - 1 - site), d, d**site)
    out = np.einsum("ab,xbz->xaz", u, t)
    return _rebuild(state, out.reshape(-1))


def apply_two_site(state: Register, site_a: int, site_b: int, u) -> Register:
    """Apply a ``d^2 x d^2`` unitary to an ordered pair of sites.

    Row/column index of ``u`` is ``digit_a * d + digit_b``.
    """
    d = state.dim
    n = state.n_sites
    _check_site(site_a, n)
    _check_site(site_b, n)
    if site_a == site_b:
        raise StateError("two-site operation needs distinct sites")
    u = check_unitary(u)
    if u.shape != (d * d, d * d):
        raise StateError(f"{u.shape} matrix does not act on two {d}-level sites")
    t = state.amps.reshape([d] * n)
    ax_a, ax_b = n - 1 - site_a, n - 1 - site_b
    t = np.moveaxis(t, (ax_a, ax_b), (0, 1))
    shape = t.shape
    t = (u @ t.reshape(d * d, -1)).reshape(shape)
    t = np.moveaxis(t, (0, 1), (ax_a, ax_b))
    return _rebuild(state, t.reshape(-1))


def apply_diagonal(state: Register, phases: np.ndarray) -> Register:
    """Multiply amplitudes element-wise by ``phases`` (a diagonal operator)."""
    return _rebuild(state, state.amps * np.asarray(phases))


def inner(a: QubitRegister, b: QubitRegister) -> complex:
    if a.n_sites != b.n_sites:
        raise StateError(f"size mismatch: {a.n_sites} vs {b.n_sites} sites")
    return complex(np.vdot(a.amps, b.amps))


def fidelity(a: QubitRegister, b: QubitRegister) -> float:
    """Squared overlap ``|<a|b>|^2``."""
    return float(abs(inner(a, b)) ** 2)


def _check_normalized(state: Register, tol: float = SAMPLE_NORM_TOL) -> None:
    if abs(state.norm() - 1.0) > tol:
        raise StateError(f"state is not normalized (norm {state.norm():.3e})")


def sample_indices(probs: np.ndarray, n_shots: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n_shots`` basis indices from a probability vector by inverse CDF."""
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, rng.random(n_shots), side="right")
    return np.minimum(idx, len(probs) - 1)


def born_samples(state: Register, n_shots: int, rng: np.random.Generator) -> np.ndarray:
    _check_normalized(state)
    return sample_indices(np.abs(state.amps) ** 2, n_shots, rng)


def born_sample(state: Register, rng_seed: int) -> int:
    """One Born-rule draw; the same seed always gives the same index."""
    return int(born_samples(state, 1, np.random.default_rng(rng_seed))[0])


def ghz(n_sites: int, relative_phase: float = np.pi / 2) -> QubitRegister:
    """``(|0...0> + e^{i phi}|1...1>)/sqrt(2)``; the default phase gives the ``+i`` form."""
    amps = np.zeros(2**n_sites, dtype=complex)
    amps[0] = 1 / np.sqrt(2)
    # exact values for the two conventional forms, avoids 1e-17 residue from exp()
    exact = {0.0: 1.0, np.pi / 2: 1j}
    amps[-1] = exact.get(float(relative_phase), np.exp(1j * relative_phase)) / np.sqrt(2)
    return QubitRegister(n_sites, amps)


def ghz_plus(n_sites: int) -> QubitRegister:
    """GHZ with a real ``+`` between branches (the ``(|gg..g> + |ee..e>)`` form)."""
    return ghz(n_sites, 0.0)


def x_plus() -> QubitRegister:
    return QubitRegister(1, np.array([1, 1]) / np.sqrt(2))


def product_up(n_sites: int) -> QubitRegister:
    return QubitRegister.basis(n_sites, 0)
