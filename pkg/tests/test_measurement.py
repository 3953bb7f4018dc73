import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from merminsim.measurement import (
    M_X,
    M_Y,
    MeasurementSetting,
    Realization,
    ShotRecord,
    TermEstimate,
    compose,
    estimate_f,
    measure_term,
    measurement_factors,
    measurement_unitary,
    parity_products,
    phase_aligned_distance,
    rotated_probabilities,
    sample_shots,
)
from merminsim.mermin import MerminVariant, TermPattern, enumerate_terms, term_expectation
from merminsim.qstate import QubitRegister, StateError, ghz, ghz_plus, product_up

from oracles import random_state

S2 = 1 / math.sqrt(2)
X_PLUS, X_MINUS = np.array([S2, S2]), np.array([S2, -S2])
Y_PLUS, Y_MINUS = np.array([S2, 1j * S2]), np.array([S2, -1j * S2])
UP, DOWN = np.array([1, 0]), np.array([0, 1])


@pytest.mark.parametrize("realization", list(Realization))
def test_readout_maps_send_eigenstates_to_detectors(realization):
    for basis, plus, minus in (("X", X_PLUS, X_MINUS), ("Y", Y_PLUS, Y_MINUS)):
        m = measurement_unitary(basis, realization)
        np.testing.assert_allclose(m @ plus, UP, atol=1e-15)
        np.testing.assert_allclose(m @ minus, DOWN, atol=1e-15)


def test_x_map_is_an_involution():
    np.testing.assert_allclose(M_X @ M_X, np.eye(2), atol=1e-15)


@pytest.mark.parametrize("realization", list(Realization))
@pytest.mark.parametrize("basis", ["X", "Y"])
def test_factorizations_multiply_out_to_readout_map(realization, basis):
    u = compose(measurement_factors(basis, realization))
    target = M_X if basis == "X" else M_Y
    assert phase_aligned_distance(u, target) <= 1e-12


@pytest.mark.parametrize("basis", ["X", "Y"])
def test_realizations_agree_up_to_global_phase(basis):
    a = compose(measurement_factors(basis, Realization.BEC))
    b = compose(measurement_factors(basis, Realization.CAVITY))
    assert phase_aligned_distance(a, b) <= 1e-12


def test_realizations_give_identical_statistics():
    s = QubitRegister(3, random_state(np.random.default_rng(0), 3))
    t = TermPattern(3, 0b011, 1)
    a = measure_term(s, t, Realization.BEC, 5000, rng_seed=11)
    b = measure_term(s, t, Realization.CAVITY, 5000, rng_seed=11)
    assert a == b


def test_bad_basis_rejected():
    with pytest.raises(ValueError):
        measurement_unitary("Z")
    with pytest.raises(ValueError):
        Realization.parse("ion-trap")


def test_ghz_term_sampled():
    est = measure_term(ghz(3), TermPattern(3, 0b001, 1), n_shots=100_000, rng_seed=3)
    assert abs(est.mean - 1.0) <= 5 * est.stderr + 1e-12
    assert est.stderr < 0.01


def test_y_eigenstate_is_deterministic():
    est = measure_term(QubitRegister(1, Y_PLUS), TermPattern(1, 1, 1), n_shots=777, rng_seed=0)
    assert est.mean == 1.0 and est.stderr == 0.0 and est.n_shots == 777


def test_product_state_term_averages_to_zero():
    est = measure_term(product_up(3), TermPattern(3, 0b010, 1), n_shots=100_000, rng_seed=5)
    assert abs(est.mean) <= 5 * est.stderr


def test_size_mismatch():
    with pytest.raises(StateError):
        measure_term(ghz(3), TermPattern(2, 1, 1), n_shots=10)


@pytest.mark.parametrize("n,mask", [(2, 0b01), (3, 0b101), (4, 0b1110)])
def test_coverage_over_twenty_seeds(n, mask):
    s = QubitRegister(n, random_state(np.random.default_rng(n), n))
    t = TermPattern(n, mask, 1)
    exact = term_expectation(s, t)
    hits = 0
    for seed in range(20):
        est = measure_term(s, t, n_shots=10_000, rng_seed=seed)
        hits += abs(est.mean - exact) <= 5 * est.stderr
    assert hits >= 19


def test_estimate_f_ghz3():
    f = estimate_f(ghz(3), MerminVariant.ODD_Y, shots_per_term=100_000, rng_seed=1)
    assert abs(f.value - 4) <= 5 * f.stderr + 1e-12
    assert f.stderr < 0.02


def test_estimate_f_even_variant_two_sites():
    f = estimate_f(ghz_plus(2), MerminVariant.EVEN_Y, shots_per_term=100_000, rng_seed=2)
    assert abs(f.value - 2) <= 5 * f.stderr + 1e-12


def test_single_shot_gives_integer_correlator():
    s = QubitRegister(4, random_state(np.random.default_rng(8), 4))
    for seed in range(10):
        f = estimate_f(s, MerminVariant.ODD_Y, shots_per_term=1, rng_seed=seed)
        assert f.value == int(f.value) and abs(f.value) <= 8
        assert (f.value - 8) % 2 == 0


def test_estimate_reproducible_across_threads():
    s = QubitRegister(4, random_state(np.random.default_rng(1), 4))
    a = estimate_f(s, MerminVariant.ODD_Y, shots_per_term=20_000, rng_seed=99, threads=1)
    b = estimate_f(s, MerminVariant.ODD_Y, shots_per_term=20_000, rng_seed=99, threads=8)
    assert a.value == b.value and a.stderr == b.stderr
    assert [e for _, e in a.terms] == [e for _, e in b.terms]


def test_large_shot_counts_span_several_blocks():
    s = QubitRegister(2, random_state(np.random.default_rng(4), 2))
    est = measure_term(s, TermPattern(2, 0b01, 1), n_shots=150_000, rng_seed=6)
    assert est.n_shots == 150_000
    assert abs(est.mean - term_expectation(s, TermPattern(2, 0b01, 1))) <= 5 * est.stderr


def test_stderr_definition():
    products = np.array([1, -1, 1, 1, -1, 1, 1])
    est = TermEstimate.from_products(products)
    assert est.stderr == pytest.approx(np.std(products, ddof=1) / math.sqrt(7))
    assert abs(est.mean) <= 1


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_shot_product_equals_outcome_product(n, seed):
    s = QubitRegister(n, random_state(np.random.default_rng(seed), n))
    setting = MeasurementSetting(tuple("XY"[(seed >> j) & 1] for j in range(n)))
    for shot in sample_shots(s, setting, 30, seed):
        assert shot.product == int(np.prod(shot.outcomes))
        assert shot.product == (-1) ** shot.n_down


def test_rotated_probabilities_against_dense_rotation():
    s = QubitRegister(2, random_state(np.random.default_rng(3), 2))
    probs = rotated_probabilities(s, MeasurementSetting(("Y", "X")))
    ref = np.abs(np.kron(M_X, M_Y) @ s.amps) ** 2
    np.testing.assert_allclose(probs, ref, atol=1e-14)


def test_parity_products():
    np.testing.assert_array_equal(parity_products(np.array([0, 1, 3, 7])), [1, -1, 1, -1])
    assert ShotRecord.from_index(0b101, 3) == ShotRecord((-1, 1, -1), 1, 2)


def test_term_means_track_exact_values():
    s = ghz(4)
    f = estimate_f(s, MerminVariant.ODD_Y, shots_per_term=2000, rng_seed=0)
    for (t, e), t2 in zip(f.terms, enumerate_terms(4, MerminVariant.ODD_Y)):
        assert t == t2
        assert e.mean == pytest.approx(term_expectation(s, t), abs=1e-12)
