import pytest
from hypothesis import given, strategies as st

from merminsim.bounds import classify, classify_nmin, lhv_bound, npartite_bound


def test_three_particles_ghz_value():
    r = classify(3, 4.0)
    assert (r.lhv_bound, r.npartite_bound) == (2.0, 2.0)
    assert r.violates_lhv and r.certifies_npartite


def test_equality_is_not_violation():
    r = classify(4, 4.0)
    assert (r.lhv_bound, r.npartite_bound) == (4.0, 4.0)
    assert not r.violates_lhv and not r.certifies_npartite
    assert r.at_lhv_boundary and r.at_npartite_boundary
    assert "at boundary" in r.describe()


def test_ten_particles_exponential_ratio():
    r = classify(10, 2.0**9)
    assert r.violates_lhv and r.certifies_npartite
    assert r.f_value / r.lhv_bound == 2**4


@pytest.mark.parametrize("n_min,f,lhv,npb,verdict", [
    (3, 4.0, 2.0, 2.0, True),
    (2, 2.0, 2.0, 1.0, False),
    (5, 16.0, 4.0, 8.0, True),
])
def test_nmin_examples(n_min, f, lhv, npb, verdict):
    r = classify_nmin(n_min, f)
    assert (r.lhv_bound, r.npartite_bound) == (lhv, npb)
    assert r.violates_lhv is verdict
    assert r.uses_n_min


def test_two_particles_allowed_and_one_rejected():
    assert classify(2, 1.5).npartite_bound == 1.0
    with pytest.raises(ValueError):
        classify(1, 1.0)
    with pytest.raises(ValueError):
        classify_nmin(1, 1.0)
    with pytest.raises(ValueError):
        classify(3, float("nan"))


@pytest.mark.parametrize("n", range(1, 21))
def test_bound_formulas(n):
    assert lhv_bound(n) == (2.0 ** (n / 2) if n % 2 == 0 else 2.0 ** ((n - 1) / 2))
    assert npartite_bound(n) == 2.0 ** (n - 2)


@pytest.mark.parametrize("n", range(2, 21))
def test_bound_ordering_and_ghz_exceeds(n):
    assert npartite_bound(n) >= lhv_bound(n) / 2
    if n >= 3:
        r = classify(n, 2.0 ** (n - 1))
        assert r.violates_lhv and r.certifies_npartite


@given(n=st.integers(2, 20), f=st.floats(-1e6, 1e6), df=st.floats(0, 1e6))
def test_verdicts_monotone_in_value(n, f, df):
    lo, hi = classify(n, f), classify(n, f + df)
    assert hi.violates_lhv or not lo.violates_lhv
    assert hi.certifies_npartite or not lo.certifies_npartite


def test_sigma_above_needs_stderr():
    assert classify(3, 4.0).sigma_above(2.0) is None
    r = classify(3, 3.0, stderr=0.5)
    assert r.sigma_above(2.0) == pytest.approx(2.0)
    d = r.to_dict()
    assert d["sigma_above_lhv"] == pytest.approx(2.0) and d["stderr"] == 0.5
