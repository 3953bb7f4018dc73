"""Mermin operator expansion and exact correlator evaluation.

Both operator variants are sums of ``2^(N-1)`` products of sigma_x and
sigma_y, one per site. A term is encoded by the bitmask of its sigma_y
sites. Every such product flips all ``N`` bits of a basis index, which
gives an ``O(2^N)`` pairing pass per term.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .qstate import QubitRegister, StateError

IMAG_TOL = 1e-8


class MerminVariant(enum.Enum):
    """``ODD_Y``: ``(P+ - P-)/2i`` with odd sigma_y counts; ``EVEN_Y``: ``(P+ + P-)/2``."""

    ODD_Y = "odd-y"
    EVEN_Y = "even-y"

    @classmethod
    def parse(cls, value) -> "MerminVariant":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        for v in cls:
            if key in (v.value, v.name.lower().replace("_", "-")):
                return v
        raise ValueError(f"unknown Mermin variant {value!r} (use odd-y or even-y)")


class CorrelatorError(ValueError):
    pass


def popcount(x) -> np.ndarray:
    return np.bitwise_count(np.asarray(x, dtype=np.uint64)).astype(np.int64)


@dataclass(frozen=True)
class TermPattern:
    n_sites: int
    y_mask: int
    sign: int

    @property
    def n_y(self) -> int:
        return int(self.y_mask).bit_count()

    def label(self) -> str:
        """Operator string, site 0 first, e.g. ``'yxx'``."""
        return "".join("y" if (self.y_mask >> j) & 1 else "x" for j in range(self.n_sites))

    def basis_choices(self) -> list[str]:
        return [c.upper() for c in self.label()]

    def extended(self, n_sites: int) -> "TermPattern":
        """The same pattern padded with sigma_x on sites ``n_sites..``."""
        if n_sites < self.n_sites:
            raise ValueError("cannot shrink a pattern")
        return TermPattern(n_sites, self.y_mask, self.sign)


def term_sign(n_y: int, variant: MerminVariant) -> int:
    """Coefficient of a term with ``n_y`` sigma_y factors in the operator expansion."""
    if variant is MerminVariant.ODD_Y:
        if n_y % 2 != 1:
            raise ValueError("ODD_Y terms have an odd number of sigma_y")
        return -1 if (n_y // 2) % 2 else 1
    if n_y % 2 != 0:
        raise ValueError("EVEN_Y terms have an even number of sigma_y")
    return -1 if (n_y // 2) % 2 else 1


def enumerate_terms(n_sites: int, variant: MerminVariant) -> list[TermPattern]:
    """All ``2^(N-1)`` terms in ascending ``y_mask`` order."""
    variant = MerminVariant.parse(variant)
    if n_sites < 1:
        raise ValueError("need at least one site")
    want = 1 if variant is MerminVariant.ODD_Y else 0
    return [
        TermPattern(n_sites, mask, term_sign(mask.bit_count(), variant))
        for mask in range(2**n_sites)
        if mask.bit_count() % 2 == want
    ]


def _check_size(state: QubitRegister, n_sites: int) -> None:
    if state.n_sites != n_sites:
        raise StateError(f"pattern has {n_sites} sites, state has {state.n_sites}")


def _popcounts(n_sites: int) -> np.ndarray:
    return popcount(np.arange(2**n_sites))


def _term_value(amps: np.ndarray, flipped_conj: np.ndarray, counts: np.ndarray,
                index: np.ndarray, y_mask: int) -> complex:
    n_y = int(y_mask).bit_count()
    # sigma_y|0> = i|1>, sigma_y|1> = -i|0>: phase = i^n_y * (-1)^(#y sites holding bit 1)
    odd = counts[index & y_mask] & 1
    s = np.sum(np.where(odd, -flipped_conj, flipped_conj) * amps)
    return complex((1j) ** (n_y % 4) * s)


def term_expectation(state: QubitRegister, pattern: TermPattern) -> float:
    """``<psi| prod_j sigma_j |psi>`` for the pattern's sigma_x/sigma_y product."""
    _check_size(state, pattern.n_sites)
    amps = state.amps
    idx = np.arange(amps.shape[0])
    val = _term_value(amps, np.conj(amps[::-1]), _popcounts(pattern.n_sites), idx, pattern.y_mask)
    if abs(val.imag) > IMAG_TOL:
        raise CorrelatorError(f"non-real term value {val} for pattern {pattern.label()}")
    return float(val.real)


def term_table(state: QubitRegister, variant: MerminVariant) -> list[tuple[TermPattern, float]]:
    variant = MerminVariant.parse(variant)
    terms = enumerate_terms(state.n_sites, variant)
    amps = state.amps
    flipped = np.conj(amps[::-1])
    counts = _popcounts(state.n_sites)
    idx = np.arange(amps.shape[0])
    out = []
    for t in terms:
        val = _term_value(amps, flipped, counts, idx, t.y_mask)
        if abs(val.imag) > IMAG_TOL:
            raise CorrelatorError(f"non-real term value {val} for pattern {t.label()}")
        out.append((t, float(val.real)))
    return out


def f_exact_sum(state: QubitRegister, variant: MerminVariant) -> float:
    """Correlator as the signed sum of every term expectation."""
    return float(sum(t.sign * v for t, v in term_table(state, variant)))


def f_fast(state: QubitRegister, variant: MerminVariant) -> float:
    """Correlator from the coherence between the all-0 and all-1 branches.

    ``prod(sigma_x + i sigma_y) = 2^N |0..0><1..1|``, so the operator only sees
    ``conj(a) * b`` with ``a``, ``b`` the two extreme amplitudes.
    """
    variant = MerminVariant.parse(variant)
    c = np.conj(state.amps[0]) * state.amps[-1]
    scale = float(2**state.n_sites)
    return scale * float(c.imag if variant is MerminVariant.ODD_Y else c.real)


def ghz_value(n_sites: int) -> float:
    return float(2 ** (n_sites - 1))
