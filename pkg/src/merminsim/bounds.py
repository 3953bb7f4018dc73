"""Local-realist and N-partite bounds on the Mermin correlator."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass


def lhv_bound(n: int) -> float:
    """Largest correlator reachable by a local hidden-variable model: ``2^floor(N/2)``."""
    return float(2 ** (n // 2))


def npartite_bound(n: int) -> float:
    """Largest correlator reachable with at most ``(N-1)``-partite entanglement."""
    return float(2.0 ** (n - 2))


@dataclass(frozen=True)
class BoundReport:
    n: int
    f_value: float
    lhv_bound: float
    npartite_bound: float
    violates_lhv: bool
    certifies_npartite: bool
    at_lhv_boundary: bool = False
    at_npartite_boundary: bool = False
    stderr: float | None = None
    uses_n_min: bool = False

    @property
    def verdicts(self) -> dict:
        return {"violates_lhv": self.violates_lhv, "certifies_npartite": self.certifies_npartite}

    def sigma_above(self, bound: float) -> float | None:
        """``(F - bound)/stderr`` when the value came from sampling."""
        if not self.stderr:
            return None
        return (self.f_value - bound) / self.stderr

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sigma_above_lhv"] = self.sigma_above(self.lhv_bound)
        d["sigma_above_npartite"] = self.sigma_above(self.npartite_bound)
        return d

    def describe(self) -> str:
        label = "N_min" if self.uses_n_min else "N"
        parts = [f"{label}={self.n} F={self.f_value:.6g}"]
        for name, bound, hit, edge in (
            ("LHV", self.lhv_bound, self.violates_lhv, self.at_lhv_boundary),
            ("N-partite", self.npartite_bound, self.certifies_npartite, self.at_npartite_boundary),
        ):
            state = "violated" if hit else ("at boundary, not violated" if edge else "not violated")
            s = f"{name} bound {bound:g}: {state}"
            sig = self.sigma_above(bound)
            if sig is not None:
                s += f" ({sig:+.2f} sigma)"
            parts.append(s)
        return "; ".join(parts)


def _report(n: int, f_value: float, stderr: float | None, uses_n_min: bool) -> BoundReport:
    if n < 2:
        raise ValueError(f"bounds need at least 2 particles, got {n}")
    if not math.isfinite(f_value):
        raise ValueError("correlator value must be finite")
    lhv, npb = lhv_bound(n), npartite_bound(n)
    return BoundReport(
        n=n,
        f_value=float(f_value),
        lhv_bound=lhv,
        npartite_bound=npb,
        violates_lhv=f_value > lhv,
        certifies_npartite=f_value > npb,
        at_lhv_boundary=f_value == lhv,
        at_npartite_boundary=f_value == npb,
        stderr=stderr,
        uses_n_min=uses_n_min,
    )


def classify(n: int, f_value: float, stderr: float | None = None) -> BoundReport:
    return _report(n, f_value, stderr, uses_n_min=False)


def classify_nmin(n_min: int, f_value: float, stderr: float | None = None) -> BoundReport:
    """Same bounds evaluated at the smallest atom number seen across runs."""
    return _report(n_min, f_value, stderr, uses_n_min=True)
