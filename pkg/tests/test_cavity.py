import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from merminsim.cavity import (
    CavityGateSpec,
    PipelineSchedule,
    Step,
    StarkSpec,
    build_ghz_cavity,
    cavity_ghz,
    collisional_gate,
    collisional_matrix,
    embed_qubits,
    project_to_qubits,
    rotate_ge,
    rotation_matrix,
    run_schedule,
    schmidt_coefficients,
    stark_z,
    swap_ei,
)
from merminsim.fock import canonicalize_phase
from merminsim.mermin import MerminVariant, f_exact_sum
from merminsim.qstate import AtomChainState, QubitRegister, StateError, fidelity, ghz_plus

from oracles import random_state

E, G, I = 0, 1, 2


def chain(levels):
    return AtomChainState.from_levels(levels)


def amp(state, levels):
    digits = {"e": E, "g": G, "i": I}
    return state.amps[sum(digits[c] * 3**j for j, c in enumerate(levels))]


# ---- rotations and transfers ----------------------------------------------

def test_rotate_quarter_turn_on_e():
    out = rotate_ge(chain("e"), 0, math.pi / 4)
    np.testing.assert_allclose(out.amps, np.array([1, -1j, 0]) / np.sqrt(2), atol=1e-15)


def test_rotate_zero_is_identity():
    s = AtomChainState(2, random_state(np.random.default_rng(0), 2, dim=3))
    np.testing.assert_allclose(rotate_ge(s, 1, 0.0).amps, s.amps, atol=1e-15)


def test_rotate_half_turn_on_g_matches_matrix_exponential():
    from scipy.linalg import expm

    # amplitude equations i d/dt (a, b) = Omega (b, a)  ->  exp(-i angle sigma_x)
    ref = expm(-1j * (math.pi / 2) * np.array([[0, 1], [1, 0]])) @ np.array([0, 1])
    out = rotate_ge(chain("g"), 0, math.pi / 2)
    np.testing.assert_allclose(out.amps[:2], ref, atol=1e-12)
    np.testing.assert_allclose(out.amps, [-1j, 0, 0], atol=1e-15)


def test_rotation_leaves_i_untouched():
    u = rotation_matrix(0.7)
    assert u[I, I] == 1 and u[I, E] == 0 and u[G, I] == 0


def test_swap_examples():
    np.testing.assert_array_equal(swap_ei(chain("e"), 0).amps, chain("i").amps)
    np.testing.assert_array_equal(swap_ei(chain("g"), 0).amps, chain("g").amps)
    s = AtomChainState(1, np.array([0, 1, 1]) / np.sqrt(2))
    np.testing.assert_allclose(swap_ei(s, 0).amps, np.array([1, 1, 0]) / np.sqrt(2))


def test_swap_twice_is_identity():
    s = AtomChainState(3, random_state(np.random.default_rng(1), 3, dim=3))
    np.testing.assert_allclose(swap_ei(swap_ei(s, 2), 2).amps, s.amps, atol=1e-15)


def test_index_errors():
    with pytest.raises(StateError):
        rotate_ge(chain("ee"), 2, 0.1)
    with pytest.raises(StateError):
        swap_ei(chain("e"), 1)
    with pytest.raises(StateError):
        collisional_gate(chain("ee"), 1, 1)
    with pytest.raises(StateError):
        stark_z(chain("e"), 3, StarkSpec(1.0))


# ---- collisional gate -----------------------------------------------------

TRUTH_TABLE = [("gg", "gg", 1), ("ge", "ge", 1), ("ig", "ig", 1), ("ie", "ie", -1), ("eg", "eg", 1)]


@pytest.mark.parametrize("inp,outp,sign", TRUTH_TABLE)
def test_truth_table_at_default(inp, outp, sign):
    out = collisional_gate(chain(inp), 0, 1)
    expected = sign * chain(outp).amps
    assert np.max(np.abs(out.amps - expected)) <= 1e-12


def test_gate_quarter_period_exchanges_excitation():
    out = collisional_gate(chain("ge"), 0, 1, CavityGateSpec(math.pi / 2))
    np.testing.assert_allclose(out.amps, -chain("eg").amps, atol=1e-15)


def test_gate_matches_closed_form_rows():
    gt = 0.37
    out = collisional_gate(chain("ge"), 0, 1, CavityGateSpec(gt))
    assert amp(out, "ge") == pytest.approx(np.exp(-1j * gt) * math.cos(gt), abs=1e-15)
    assert amp(out, "eg") == pytest.approx(-1j * np.exp(-1j * gt) * math.sin(gt), abs=1e-15)
    assert amp(collisional_gate(chain("ie"), 0, 1, CavityGateSpec(gt)), "ie") == pytest.approx(np.exp(-1j * gt))
    assert amp(collisional_gate(chain("ig"), 0, 1, CavityGateSpec(gt)), "ig") == 1
    assert amp(collisional_gate(chain("ee"), 0, 1, CavityGateSpec(gt)), "ee") == pytest.approx(np.exp(-2j * gt))


@settings(max_examples=50, deadline=None)
@given(gt=st.floats(-20, 20))
def test_gate_unitary_for_any_coupling(gt):
    u = collisional_matrix(CavityGateSpec(gt))
    np.testing.assert_allclose(u.conj().T @ u, np.eye(9), atol=1e-12)


def test_gate_on_non_adjacent_atoms():
    # atom 0 in i, atom 2 in e, spectator atom 1 in g
    out = collisional_gate(chain("ige"), 0, 2)
    np.testing.assert_allclose(out.amps, -chain("ige").amps, atol=1e-12)


# ---- Stark shift ----------------------------------------------------------

def test_stark_pi_flips_excited_sign():
    s = AtomChainState(1, np.array([0.6, 0.8, 0]))
    np.testing.assert_allclose(stark_z(s, 0, StarkSpec(math.pi)).amps, [-0.6, 0.8, 0], atol=1e-15)
    q = QubitRegister(1, np.array([0.6, 0.8]))
    np.testing.assert_allclose(stark_z(q, 0, StarkSpec(math.pi)).amps, [-0.6, 0.8], atol=1e-15)


def test_stark_zero_is_identity():
    s = AtomChainState(2, random_state(np.random.default_rng(4), 2, dim=3))
    np.testing.assert_allclose(stark_z(s, 1, StarkSpec(0.0)).amps, s.amps)


def test_stark_from_field_product_formula():
    spec = StarkSpec.from_field(epsilon=1.0, alpha_g=3.0, alpha_e=1.0, field_amplitude=3.0)
    assert spec.theta_t == pytest.approx(18.0, abs=1e-12)
    out = stark_z(chain("e"), 0, spec)
    assert out.amps[E] == pytest.approx(np.exp(-18j), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(a=st.floats(-10, 10), b=st.floats(-10, 10))
def test_stark_phases_add(a, b):
    s = AtomChainState(2, random_state(np.random.default_rng(0), 2, dim=3))
    two = stark_z(stark_z(s, 0, StarkSpec(a)), 0, StarkSpec(b))
    np.testing.assert_allclose(two.amps, stark_z(s, 0, StarkSpec(a + b)).amps, atol=1e-12)


# ---- full pipeline --------------------------------------------------------

@pytest.mark.parametrize("n", range(2, 7))
def test_pipeline_output_and_correlator(n):
    run = run_schedule(PipelineSchedule.standard(n))
    assert run.state.i_population() <= 1e-10
    assert run.max_gate_input_ee <= 1e-12
    reg, _ = canonicalize_phase(project_to_qubits(run.state), relative_phase=0.0)
    assert fidelity(reg, ghz_plus(n)) >= 1 - 1e-10
    assert f_exact_sum(reg, MerminVariant.EVEN_Y) == pytest.approx(2.0 ** (n - 1), abs=1e-10)


def test_two_atoms_maximally_entangled():
    reg = project_to_qubits(build_ghz_cavity(2))
    np.testing.assert_allclose(schmidt_coefficients(reg), [1 / np.sqrt(2)] * 2, atol=1e-12)


def test_three_atoms_correlator_four():
    reg, corr, chain_state = cavity_ghz(3)
    assert f_exact_sum(reg, MerminVariant.EVEN_Y) == pytest.approx(4.0, abs=1e-10)
    assert chain_state.i_population() <= 1e-10


def test_without_gate_output_is_product_state():
    sched = PipelineSchedule.standard(2, CavityGateSpec(0.0))
    reg = project_to_qubits(run_schedule(sched).state)
    s = schmidt_coefficients(reg)
    assert s[1] <= 1e-12
    assert abs(f_exact_sum(reg, MerminVariant.EVEN_Y)) <= 2.0


def test_schedule_validation():
    with pytest.raises(ValueError):
        PipelineSchedule(3, (Step("gate", (0, 1)),))
    with pytest.raises(ValueError):
        PipelineSchedule(1, ())
    with pytest.raises(ValueError):
        build_ghz_cavity(3, PipelineSchedule.standard(4))


def test_projection_examples():
    np.testing.assert_array_equal(project_to_qubits(chain("gg")).amps, QubitRegister.from_bits([1, 1]).amps)
    s = (chain("gg").amps + chain("ee").amps) / np.sqrt(2)
    reg = project_to_qubits(AtomChainState(2, s))
    np.testing.assert_allclose(reg.amps, ghz_plus(2).amps, atol=1e-15)
    with pytest.raises(StateError):
        project_to_qubits(chain("ie"))


def test_embed_inverts_projection():
    reg = QubitRegister(3, random_state(np.random.default_rng(2), 3))
    np.testing.assert_allclose(project_to_qubits(embed_qubits(reg)).amps, reg.amps, atol=1e-15)


def test_six_atom_pipeline_is_fast():
    t0 = time.perf_counter()
    build_ghz_cavity(6)
    assert time.perf_counter() - t0 < 1.0
