"""Exhaustive search over deterministic local hidden-variable strategies.

A deterministic strategy fixes outcomes ``m_x(j), m_y(j)`` in {+1, -1} for
every particle. Strategies are encoded as ``2N``-bit integers: bit ``j`` set
means ``m_x(j) = -1`` and bit ``N + j`` set means ``m_y(j) = -1``.

The correlator is linear in the outcome distribution, so its maximum over all
local models is attained at one of these ``4^N`` vertices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mermin import MerminVariant, enumerate_terms, popcount

MAX_ENUMERATION_N = 12
CONVEX_TOL = 1e-12


@dataclass(frozen=True)
class DeterministicStrategy:
    m_x: tuple[int, ...]
    m_y: tuple[int, ...]

    def __post_init__(self):
        if len(self.m_x) != len(self.m_y) or not self.m_x:
            raise ValueError("m_x and m_y must be non-empty and equally long")
        for v in (*self.m_x, *self.m_y):
            if v not in (1, -1):
                raise ValueError(f"outcomes must be +1 or -1, got {v}")

    @property
    def n(self) -> int:
        return len(self.m_x)

    @classmethod
    def from_index(cls, index: int, n: int) -> "DeterministicStrategy":
        mx = tuple(-1 if (index >> j) & 1 else 1 for j in range(n))
        my = tuple(-1 if (index >> (n + j)) & 1 else 1 for j in range(n))
        return cls(mx, my)

    def to_index(self) -> int:
        idx = sum(1 << j for j, v in enumerate(self.m_x) if v < 0)
        return idx + sum(1 << (self.n + j) for j, v in enumerate(self.m_y) if v < 0)

    def negated(self) -> "DeterministicStrategy":
        return DeterministicStrategy(tuple(-v for v in self.m_x), tuple(-v for v in self.m_y))


def strategy_f(strategy: DeterministicStrategy, variant: MerminVariant, n: int | None = None) -> float:
    """Signed term sum with every expectation replaced by the product of assigned outcomes."""
    if n is not None and n != strategy.n:
        raise ValueError(f"strategy has {strategy.n} particles, expected {n}")
    total = 0
    for t in enumerate_terms(strategy.n, variant):
        prod = 1
        for j in range(strategy.n):
            prod *= strategy.m_y[j] if (t.y_mask >> j) & 1 else strategy.m_x[j]
        total += t.sign * prod
    return float(total)


_CHOICES = ((0, 0), (1, 0), (0, 1), (1, 1))


def _gaussian_products(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``prod_j (m_x(j) + i m_y(j))`` for every strategy, in exact integers.

    Expanding the product gives the term sum with coefficients ``i^k``, so the
    ODD_Y correlator is its imaginary part and EVEN_Y its real part.
    Returns ``(strategy_index, real, imag)`` arrays in build order.
    """
    idx = np.zeros(1, dtype=np.int64)
    re = np.ones(1, dtype=np.int64)
    im = np.zeros(1, dtype=np.int64)
    for j in range(n):
        parts_idx, parts_re, parts_im = [], [], []
        for bx, by in _CHOICES:
            a, b = 1 - 2 * bx, 1 - 2 * by
            parts_idx.append(idx + (bx << j) + (by << (n + j)))
            parts_re.append(re * a - im * b)
            parts_im.append(re * b + im * a)
        idx = np.concatenate(parts_idx)
        re = np.concatenate(parts_re)
        im = np.concatenate(parts_im)
    return idx, re, im


def all_strategy_values(n: int, variant: MerminVariant) -> np.ndarray:
    """Correlator of every deterministic strategy, indexed by the ``2N``-bit encoding."""
    variant = MerminVariant.parse(variant)
    if not 1 <= n <= MAX_ENUMERATION_N:
        raise ValueError(f"enumeration supports 1 <= N <= {MAX_ENUMERATION_N}, got {n}")
    idx, re, im = _gaussian_products(n)
    out = np.empty(4**n, dtype=np.int64)
    out[idx] = im if variant is MerminVariant.ODD_Y else re
    return out


def all_strategy_values_termwise(n: int, variant: MerminVariant) -> np.ndarray:
    """Same table built term by term; slow, kept as an independent check."""
    variant = MerminVariant.parse(variant)
    idx = np.arange(4**n, dtype=np.int64)
    xbits = idx & ((1 << n) - 1)
    ybits = idx >> n
    total = np.zeros(4**n, dtype=np.int64)
    for t in enumerate_terms(n, variant):
        flips = popcount((xbits & ~t.y_mask) | (ybits & t.y_mask)) & 1
        total += t.sign * (1 - 2 * flips)
    return total


def brute_force_max(n: int, variant: MerminVariant = MerminVariant.ODD_Y) -> tuple[float, np.ndarray]:
    """Maximum correlator over all ``4^N`` deterministic strategies.

    Also returns every maximizing strategy index in ascending order.
    """
    vals = all_strategy_values(n, variant)
    best = int(vals.max())
    return float(best), np.flatnonzero(vals == best)


@dataclass
class StrategyMixture:
    components: list[tuple[float, DeterministicStrategy]]

    def __post_init__(self):
        if not self.components:
            raise ValueError("mixture needs at least one component")
        weights = np.array([w for w, _ in self.components], dtype=float)
        if np.any(weights < -CONVEX_TOL) or abs(weights.sum() - 1.0) > CONVEX_TOL:
            raise ValueError("mixture weights must be non-negative and sum to 1")
        if len({s.n for _, s in self.components}) != 1:
            raise ValueError("all strategies in a mixture need the same particle count")

    @property
    def n(self) -> int:
        return self.components[0][1].n


def mixture_f(mix: StrategyMixture, variant: MerminVariant) -> float:
    return float(sum(w * strategy_f(s, variant) for w, s in mix.components))
