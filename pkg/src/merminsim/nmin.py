"""Correlator estimation when the atom number changes from run to run.

Only the first ``n_min`` sites (``n_min`` = smallest atom number that can occur)
carry sigma_y measurements; every later site is measured in sigma_x and
still enters the recorded parity. On a GHZ state the extended term has the
same expectation as the ``n_min``-site term, so a full ``2^(n_min - 1)``-term
correlator can be assembled from runs of mixed size.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bounds import BoundReport, classify_nmin
from .measurement import (
    MeasurementSetting,
    Realization,
    TermEstimate,
    combine_terms,
    parity_products,
    rotated_probabilities,
    run_terms,
)
from .mermin import MerminVariant, TermPattern, enumerate_terms, popcount, term_expectation
from .noise import ideal_ghz
from .qstate import sample_indices
from .seeding import child_rng

PROB_TOL = 1e-12
MODES = ("constructive", "rejection")


@dataclass(frozen=True)
class NumberDistribution:
    support: tuple[tuple[int, float], ...]

    def __post_init__(self):
        support = tuple(sorted((int(n), float(p)) for n, p in self.support))
        if not support:
            raise ValueError("number distribution needs a non-empty support")
        ns = [n for n, _ in support]
        if len(set(ns)) != len(ns):
            raise ValueError("atom numbers in the support must be distinct")
        if min(ns) < 2:
            raise ValueError("every atom number must be at least 2")
        ps = np.array([p for _, p in support])
        if np.any(ps < 0) or abs(ps.sum() - 1.0) > PROB_TOL:
            raise ValueError("probabilities must be non-negative and sum to 1")
        object.__setattr__(self, "support", support)

    @classmethod
    def from_weights(cls, weights: dict[int, float]) -> "NumberDistribution":
        total = float(sum(weights.values()))
        if total <= 0:
            raise ValueError("weights must have a positive sum")
        return cls(tuple((n, w / total) for n, w in weights.items()))

    @classmethod
    def uniform(cls, ns) -> "NumberDistribution":
        return cls.from_weights({int(n): 1.0 for n in ns})

    @classmethod
    def point(cls, n: int) -> "NumberDistribution":
        return cls(((n, 1.0),))

    @property
    def n_min(self) -> int:
        return self.support[0][0]

    @property
    def n_max(self) -> int:
        return self.support[-1][0]

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        ns = np.array([n for n, _ in self.support])
        ps = np.array([p for _, p in self.support])
        return ns[sample_indices(ps, size, rng)]


@dataclass(frozen=True)
class RunRecord:
    n_drawn: int
    pattern_assigned: TermPattern
    retained: bool
    product: int


@lru_cache(maxsize=256)
def _extended_probs(n: int, y_mask: int, variant: MerminVariant, realization: Realization) -> np.ndarray:
    bases = tuple("Y" if (y_mask >> j) & 1 else "X" for j in range(n))
    probs = rotated_probabilities(ideal_ghz(n, variant), MeasurementSetting(bases, realization))
    probs.setflags(write=False)
    return probs


def extended_expectation(pattern: TermPattern, n: int, variant=MerminVariant.ODD_Y) -> float:
    """Exact value of ``pattern`` padded with sigma_x up to ``n`` sites, on the ``n``-site GHZ."""
    return term_expectation(ideal_ghz(n, MerminVariant.parse(variant)), pattern.extended(n))


def simulate_run(dist: NumberDistribution, pattern: TermPattern, realization=Realization.BEC,
                 rng_seed: int = 0, variant=MerminVariant.ODD_Y) -> RunRecord:
    """One run: draw N, prepare the N-atom GHZ, measure the padded pattern once."""
    if pattern.n_sites != dist.n_min:
        raise ValueError(f"pattern covers {pattern.n_sites} sites, n_min is {dist.n_min}")
    variant = MerminVariant.parse(variant)
    n = int(dist.draw(child_rng(rng_seed, "draw-n"), 1)[0])
    probs = _extended_probs(n, pattern.y_mask, variant, Realization.parse(realization))
    idx = sample_indices(probs, 1, child_rng(rng_seed, "shot"))
    return RunRecord(n, pattern, True, int(parity_products(idx)[0]))


def _constructive_term(dist, pattern, variant, realization, runs, seed) -> TermEstimate:
    ns = dist.draw(child_rng(seed, "draw-n"), runs)
    products = np.empty(runs, dtype=np.int64)
    for n in np.unique(ns):
        where = np.flatnonzero(ns == n)
        probs = _extended_probs(int(n), pattern.y_mask, variant, realization)
        idx = sample_indices(probs, len(where), child_rng(seed, "shots", int(n)))
        products[where] = parity_products(idx)
    return TermEstimate.from_products(products, n_attempted=runs)


def _rejection_runs(dist, variant, realization, attempts, seed):
    """Random x/y settings over all N sites; keep runs whose y sites all lie in the first n_min."""
    rng = child_rng(seed, "rejection")
    ns = dist.draw(rng, attempts)
    masks = rng.integers(0, 2**ns)
    want = 1 if variant is MerminVariant.ODD_Y else 0
    inside = (masks >> dist.n_min) == 0
    parity_ok = (popcount(masks) & 1) == want
    keep = inside & parity_ok
    products = np.zeros(attempts, dtype=np.int64)
    for n, m in sorted(set(zip(ns[keep].tolist(), masks[keep].tolist()))):
        where = np.flatnonzero(keep & (ns == n) & (masks == m))
        probs = _extended_probs(n, m, variant, realization)
        idx = sample_indices(probs, len(where), child_rng(seed, "shots", n, m))
        products[where] = parity_products(idx)
    return ns, masks, keep, products


@dataclass
class NminEstimate:
    value: float
    stderr: float
    terms: list[tuple[TermPattern, TermEstimate]]
    report: BoundReport
    n_min: int
    mode: str
    attempted_runs: int
    retained_runs: int


def estimate_f_nmin(dist: NumberDistribution, variant=MerminVariant.ODD_Y, runs_per_term: int = 10_000,
                    rng_seed: int = 0, realization=Realization.BEC, mode: str = "constructive",
                    threads: int = 1) -> NminEstimate:
    """Correlator over the first ``n_min`` sites from runs with fluctuating atom number.

    ``constructive`` assigns each term's pattern before the run, so every run is
    kept. ``rejection`` draws x/y settings over all sites and post-selects;
    there ``runs_per_term * 2^(n_min-1)`` runs are attempted in total.
    """
    variant = MerminVariant.parse(variant)
    realization = Realization.parse(realization)
    if runs_per_term < 1:
        raise ValueError("runs_per_term must be at least 1")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; use one of {MODES}")
    terms = enumerate_terms(dist.n_min, variant)
    if mode == "constructive":
        ests = run_terms(
            lambda t, s: _constructive_term(dist, t, variant, realization, runs_per_term, s),
            terms, rng_seed, threads,
        )
        attempted = runs_per_term * len(terms)
        retained = attempted
    else:
        attempted = runs_per_term * len(terms)
        _, masks, keep, products = _rejection_runs(dist, variant, realization, attempted, rng_seed)
        ests = []
        for t in terms:
            sel = keep & (masks == t.y_mask)
            if not sel.any():
                raise ValueError(f"no retained runs for pattern {t.label()}; raise runs_per_term")
            ests.append(TermEstimate.from_products(products[sel], n_attempted=None))
        retained = int(keep.sum())
    f = combine_terms(list(zip(terms, ests)))
    return NminEstimate(f.value, f.stderr, f.terms, classify_nmin(dist.n_min, f.value, f.stderr),
                        dist.n_min, mode, attempted, retained)


def expected_retention(dist: NumberDistribution) -> float:
    """Probability that a uniformly random x/y setting passes the rejection rule."""
    return sum(p * 2.0 ** (dist.n_min - 1) / 2.0**n for n, p in dist.support)

