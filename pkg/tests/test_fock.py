"""Core sparse-state engine: construction, evolution, measurement, blocking."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from railsim import fock
from railsim.errors import RegisterMismatch, InvalidCoupler
from railsim.fock import (
    Mode,
    apply_phase,
    apply_two_mode,
    block_modes,
    inner_product,
    make_state,
    measure_modes_exact,
    register,
    sample_measure,
    schmidt_coefficients,
    state_close,
    tensor_product,
)
from railsim.optics import HADAMARD_2

R4 = register([(0, 0), (1, 0), (2, 0), (3, 0)])
M = [Mode(s, 0) for s in range(4)]


def test_make_state_single_photons():
    st_ = make_state(R4, [M[0], M[2]])
    assert st_.terms == {(1, 0, 1, 0): 1.0 + 0j}


def test_make_state_vacuum():
    assert make_state(R4, []).terms == {(0, 0, 0, 0): 1.0 + 0j}


def test_make_state_double_occupation():
    assert make_state(R4, [M[0], M[0]]).terms == {(2, 0, 0, 0): 1.0 + 0j}


def test_make_state_unknown_mode():
    with pytest.raises(RegisterMismatch):
        make_state(R4, [Mode(9, 0)])


def test_hadamard_splits_single_photon():
    r2 = register([(0, 0), (1, 0)])
    out = apply_two_mode(make_state(r2, [Mode(0, 0)]), Mode(0, 0), Mode(1, 0), HADAMARD_2)
    s = 1 / math.sqrt(2)
    assert abs(out.amplitude((1, 0)) - s) < 1e-12
    assert abs(out.amplitude((0, 1)) - s) < 1e-12


def test_hadamard_on_cross_modes_reproduces_fusion_line():
    # Photon on modes 2 and 4; couple modes 1 and 4.
    st_ = make_state(R4, [M[1], M[3]])
    out = apply_two_mode(st_, M[0], M[3], HADAMARD_2)
    s = 1 / math.sqrt(2)
    assert abs(out.amplitude((1, 1, 0, 0)) - s) < 1e-12
    assert abs(out.amplitude((0, 1, 0, 1)) + s) < 1e-12


def test_hong_ou_mandel_dip():
    # Hand expansion of (a^ + b^)(a^ - b^)/2: the (1,1) term cancels.
    r2 = register([(0, 0), (1, 0)])
    out = apply_two_mode(make_state(r2, [Mode(0, 0), Mode(1, 0)]), Mode(0, 0), Mode(1, 0), HADAMARD_2)
    s = 1 / math.sqrt(2)
    assert abs(out.amplitude((2, 0)) - s) < 1e-12
    assert abs(out.amplitude((0, 2)) + s) < 1e-12
    assert abs(out.amplitude((1, 1))) < 1e-12


def test_non_unitary_coupler_rejected():
    with pytest.raises(InvalidCoupler):
        apply_two_mode(make_state(R4, [M[0]]), M[0], M[1], np.array([[1, 1], [1, 1]]) / 2**0.5)


def test_phase_identity_and_pi():
    st_ = make_state(R4, [M[1]])
    assert state_close(apply_phase(st_, M[1], 0.0), st_)
    out = apply_phase(st_, M[1], math.pi)
    assert abs(out.amplitude((0, 1, 0, 0)) + 1) < 1e-12


def test_phase_doubles_for_two_photons():
    r2 = register([(0, 0), (1, 0)])
    out = apply_phase(make_state(r2, [Mode(0, 0), Mode(0, 0)]), Mode(0, 0), math.pi / 2)
    # n=2 at phi=pi/2 gives e^{i pi} = -1.
    assert abs(out.amplitude((2, 0)) + 1) < 1e-12


def test_measure_split_photon():
    r2 = register([(0, 0), (1, 0)])
    plus = apply_two_mode(make_state(r2, [Mode(0, 0)]), Mode(0, 0), Mode(1, 0), HADAMARD_2)
    branches = measure_modes_exact(plus, [Mode(0, 0), Mode(1, 0)])
    assert len(branches) == 2
    for b in branches:
        assert abs(b.probability - 0.5) < 1e-12
        assert len(b.post_state.register) == 0


def test_measure_nothing_is_identity():
    st_ = make_state(R4, [M[0], M[2]])
    branches = measure_modes_exact(st_, [])
    assert len(branches) == 1
    assert branches[0].probability == pytest.approx(1.0)
    assert state_close(branches[0].post_state, st_)


def test_measure_probabilities_sum_to_one():
    st_ = make_state(R4, [M[0], M[1]])
    for pair in [(0, 1), (0, 2), (1, 3)]:
        st_ = apply_two_mode(st_, M[pair[0]], M[pair[1]], HADAMARD_2)
    branches = measure_modes_exact(st_, [M[0], M[1]])
    assert sum(b.probability for b in branches) == pytest.approx(1.0, abs=1e-9)
    for b in branches:
        assert b.post_state.norm() == pytest.approx(1.0, abs=1e-9)


def test_sample_measure_deterministic_per_seed():
    r2 = register([(0, 0), (1, 0)])
    plus = apply_two_mode(make_state(r2, [Mode(0, 0)]), Mode(0, 0), Mode(1, 0), HADAMARD_2)
    seq1 = [sample_measure(plus, [Mode(0, 0), Mode(1, 0)], 7)[0] for _ in range(20)]
    seq2 = [sample_measure(plus, [Mode(0, 0), Mode(1, 0)], 7)[0] for _ in range(20)]
    assert seq1 == seq2


def test_sample_measure_frequencies():
    r2 = register([(0, 0), (1, 0)])
    plus = apply_two_mode(make_state(r2, [Mode(0, 0)]), Mode(0, 0), Mode(1, 0), HADAMARD_2)
    rng = np.random.default_rng(11)
    n = 100_000
    ones = sum(sample_measure(plus, [Mode(0, 0)], rng)[0][0] for _ in range(n))
    # 5 sigma binomial bound around p = 1/2.
    assert abs(ones / n - 0.5) < 5 * math.sqrt(0.25 / n)


def test_block_empty_modes_identity():
    st_ = make_state(R4, [M[0]])
    branches = block_modes(st_, [])
    assert len(branches) == 1 and branches[0].absorbed == 0
    assert state_close(branches[0].state, st_)


def test_block_known_empty_mode():
    st_ = make_state(R4, [M[0]])
    branches = block_modes(st_, [M[3]])
    assert len(branches) == 1
    assert branches[0].probability == pytest.approx(1.0)
    assert state_close(branches[0].state, st_)


def test_block_splits_superposed_photon():
    r2 = register([(0, 0), (1, 0)])
    plus = apply_two_mode(make_state(r2, [Mode(0, 0)]), Mode(0, 0), Mode(1, 0), HADAMARD_2)
    branches = sorted(block_modes(plus, [Mode(0, 0)]), key=lambda b: b.absorbed)
    assert len(branches) == 2
    assert branches[0].absorbed == 0 and branches[0].probability == pytest.approx(0.5)
    assert branches[0].state.terms == {(0, 1): pytest.approx(1.0)}
    assert branches[1].absorbed == 1 and branches[1].probability == pytest.approx(0.5)
    assert branches[1].state.terms == {(0, 0): pytest.approx(1.0)}


def test_block_probabilities_complete():
    st_ = make_state(R4, [M[0], M[1]])
    for pair in [(0, 2), (1, 3), (0, 1)]:
        st_ = apply_two_mode(st_, M[pair[0]], M[pair[1]], HADAMARD_2)
    branches = block_modes(st_, [M[0], M[2]])
    assert sum(b.probability for b in branches) == pytest.approx(1.0, abs=1e-9)
    for b in branches:
        # Blocked modes are vacuum in every branch.
        for pat in b.state.terms:
            assert pat[0] == 0 and pat[2] == 0


def test_inner_product_basics():
    a = make_state(R4, [M[0]])
    b = make_state(R4, [M[1]])
    assert inner_product(a, a) == pytest.approx(1.0)
    assert inner_product(a, b) == pytest.approx(0.0)


def test_inner_product_register_mismatch():
    a = make_state(R4, [M[0]])
    b = make_state(register([(0, 0), (1, 0)]), [Mode(0, 0)])
    with pytest.raises(RegisterMismatch):
        inner_product(a, b)


def test_tensor_product_and_embed():
    ra = register([(0, 0), (1, 0)])
    rb = register([(2, 0), (3, 0)])
    joint = tensor_product(make_state(ra, [Mode(0, 0)]), make_state(rb, [Mode(3, 0)]))
    assert joint.terms == {(1, 0, 0, 1): 1.0 + 0j}


def test_schmidt_of_bell_like_state():
    st_ = fock.superpose(
        [make_state(R4, [M[0], M[2]]), make_state(R4, [M[1], M[3]])],
        [1 / math.sqrt(2), -1 / math.sqrt(2)],
    )
    sig = schmidt_coefficients(st_, [M[0], M[1]])
    assert np.allclose(sorted(sig, reverse=True)[:2], [1 / math.sqrt(2)] * 2, atol=1e-12)


def test_state_json_round_trip():
    st_ = apply_two_mode(make_state(R4, [M[0], M[3]]), M[0], M[3], HADAMARD_2)
    again = fock.PureState.from_json(st_.to_json())
    assert state_close(st_, again, atol=0)


def test_same_primitive_sequence_bit_identical():
    """Same ops on the same input give bit-identical term sets."""

    def build():
        st_ = make_state(R4, [M[0], M[1], M[2]])
        for i, j in [(0, 1), (2, 3), (1, 2), (0, 3)]:
            st_ = apply_two_mode(st_, M[i], M[j], HADAMARD_2)
        st_ = apply_phase(st_, M[2], 0.3)
        return st_

    a, b = build(), build()
    assert a.sorted_terms() == b.sorted_terms()
    assert fock.state_to_json_str(a) == fock.state_to_json_str(b)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.integers(0, 3), min_size=1, max_size=3),
    st.floats(0, 2 * math.pi, allow_nan=False),
    st.floats(0, 2 * math.pi, allow_nan=False),
)
def test_phase_composition_property(photons, p1, p2):
    st_ = make_state(R4, [M[k] for k in photons])
    one = apply_phase(apply_phase(st_, M[0], p1), M[0], p2)
    two = apply_phase(st_, M[0], p1 + p2)
    assert state_close(one, two, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_random_coupler_preserves_norm_and_photons(seed):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    u = q * (np.diag(r) / np.abs(np.diag(r)))
    st_ = make_state(R4, [M[0], M[1], M[1]])
    out = apply_two_mode(st_, M[0], M[1], u)
    assert out.norm() == pytest.approx(1.0, abs=1e-9)
    assert out.total_photons() == {3}
