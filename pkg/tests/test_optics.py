"""Interferometer compilation, transfer matrices, and the permanent oracle."""

import json
import math

import numpy as np
import pytest

from railsim.errors import DelayOverflow, InvalidCoupler, RegisterMismatch
from railsim.fock import Mode, lattice_register, make_state, state_close
from railsim.optics import (
    HADAMARD_2,
    Delay,
    InterferometerSpec,
    Permutation,
    PhaseShift,
    apply_dense_unitary,
    apply_spec,
    block,
    compile_hadamard,
    coupler,
    dft_matrix,
    hadamard_matrix,
    haar_unitary,
    is_unitary,
    permanent,
    permanent_amplitude,
    spec_depth,
    spec_from_json,
    spec_to_json,
    spec_to_matrix,
)


def test_hadamard_matrix_small():
    assert np.allclose(hadamard_matrix(0), [[1]])
    assert np.allclose(hadamard_matrix(1), HADAMARD_2)


def test_hadamard_matrix_row_sums():
    h2 = hadamard_matrix(2)
    sums = h2.sum(axis=1)
    assert abs(sums[0] - 2) < 1e-12
    assert np.allclose(sums[1:], 0, atol=1e-12)


def test_hadamard_matrix_properties():
    for k in range(6):
        h = hadamard_matrix(k)
        assert np.allclose(h, h.T)
        assert np.allclose(h @ h, np.eye(2**k), atol=1e-12)
        assert np.allclose(np.abs(h), 2 ** (-k / 2))


def test_hadamard_out_of_range():
    with pytest.raises(ValueError):
        hadamard_matrix(8)


def test_hadamard_recursion_identity():
    for k in range(1, 6):
        lhs = hadamard_matrix(k)
        rhs = np.kron(HADAMARD_2, np.eye(2 ** (k - 1))) @ np.kron(
            np.eye(2), hadamard_matrix(k - 1)
        )
        assert np.abs(lhs - rhs).max() < 1e-9


def test_compile_hadamard_k1():
    spec = compile_hadamard(1)
    assert len(spec.primitives) == 1
    assert np.abs(spec_to_matrix(spec) - HADAMARD_2).max() < 1e-9


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_compile_hadamard_counts_depth_matrix(k):
    spec = compile_hadamard(k)
    assert len(spec.primitives) == k * 2 ** (k - 1)
    assert spec_depth(spec) == k
    assert np.abs(spec_to_matrix(spec) - hadamard_matrix(k)).max() < 1e-9


def test_compiled_hadamard_self_inverse_on_states():
    k = 3
    spec = compile_hadamard(k)
    reg = lattice_register(2**k, 1)
    for j in range(2**k):
        st = make_state(reg, [Mode(j, 0)])
        back = apply_spec(apply_spec(st, spec), spec)
        assert state_close(back, st, atol=1e-9)


def test_empty_spec_is_identity():
    spec = InterferometerSpec(4, 2)
    assert np.allclose(spec_to_matrix(spec), np.eye(8))


def test_delay_matrix_is_timebin_shift():
    spec = InterferometerSpec(2, 4, (Delay(1, 2),))
    m = spec_to_matrix(spec)
    reg = lattice_register(2, 4)
    src = reg.position(Mode(1, 0))
    dst = reg.position(Mode(1, 2))
    assert m[dst, src] == 1
    assert m[:, reg.position(Mode(1, 3))].sum() == 0  # overflow column is zeroed


def test_delay_overflow_raises_on_occupied_edge():
    spec = InterferometerSpec(1, 2, (Delay(0, 1),))
    st = make_state(lattice_register(1, 2), [Mode(0, 1)])
    with pytest.raises(DelayOverflow):
        apply_spec(st, spec)


def test_permutation_relabels_spatial_modes():
    spec = InterferometerSpec(3, 1, (Permutation((2, 0, 1)),))
    st = make_state(lattice_register(3, 1), [Mode(0, 0)])
    out = apply_spec(st, spec)
    assert out.terms == {(0, 0, 1): 1.0 + 0j}


def test_phase_primitive_matches_matrix():
    spec = InterferometerSpec(2, 1, (PhaseShift(0, math.pi / 3),))
    m = spec_to_matrix(spec)
    assert abs(m[0, 0] - np.exp(1j * math.pi / 3)) < 1e-12


def test_apply_spec_matches_matrix_on_single_photon():
    rng = np.random.default_rng(5)
    prims = [
        coupler(0, 2, haar_unitary(2, rng)),
        PhaseShift(1, 0.7),
        coupler(1, 3, haar_unitary(2, rng)),
        Permutation((1, 2, 3, 0)),
        coupler(0, 1, HADAMARD_2),
    ]
    spec = InterferometerSpec(4, 1, tuple(prims))
    m = spec_to_matrix(spec)
    reg = lattice_register(4, 1)
    for j in range(4):
        st = apply_spec(make_state(reg, [Mode(j, 0)]), spec)
        col = np.zeros(4, dtype=complex)
        for pat, amp in st.terms.items():
            col[pat.index(1)] = amp
        assert np.abs(col - m[:, j]).max() < 1e-9


def test_block_primitive_matches_dense_application():
    rng = np.random.default_rng(9)
    u = haar_unitary(3, rng)
    spec = InterferometerSpec(4, 1, (block([0, 1, 3], u),))
    reg = lattice_register(4, 1)
    st = make_state(reg, [Mode(0, 0), Mode(1, 0)])
    via_spec = apply_spec(st, spec)
    via_dense = apply_dense_unitary(st, [Mode(0, 0), Mode(1, 0), Mode(3, 0)], u)
    assert state_close(via_spec, via_dense, atol=1e-12)


def test_dense_unitary_identity():
    reg = lattice_register(3, 1)
    st = make_state(reg, [Mode(1, 0), Mode(1, 0)])
    out = apply_dense_unitary(st, [Mode(s, 0) for s in range(3)], np.eye(3))
    assert state_close(out, st)


def test_dense_unitary_single_photon_column_read_off():
    h2 = hadamard_matrix(2)
    reg = lattice_register(4, 1)
    for j in range(4):
        out = apply_dense_unitary(make_state(reg, [Mode(j, 0)]), [Mode(s, 0) for s in range(4)], h2)
        for i in range(4):
            pat = tuple(1 if s == i else 0 for s in range(4))
            assert abs(out.amplitude(pat) - h2[i, j]) < 1e-12


def test_dense_unitary_agrees_with_two_mode_path():
    reg = lattice_register(2, 1)
    st = make_state(reg, [Mode(0, 0), Mode(1, 0)])
    a = apply_dense_unitary(st, [Mode(0, 0), Mode(1, 0)], HADAMARD_2)
    b = __import__("railsim.fock", fromlist=["apply_two_mode"]).apply_two_mode(
        st, Mode(0, 0), Mode(1, 0), HADAMARD_2
    )
    assert state_close(a, b, atol=1e-12)


def test_dense_unitary_rejects_non_unitary():
    reg = lattice_register(2, 1)
    st = make_state(reg, [Mode(0, 0)])
    with pytest.raises(InvalidCoupler):
        apply_dense_unitary(st, [Mode(0, 0), Mode(1, 0)], np.ones((2, 2)))


def test_permanent_small_cases():
    assert permanent(np.eye(3)) == pytest.approx(1.0)
    assert permanent(np.array([[1, 2], [3, 4]])) == pytest.approx(10.0)
    assert permanent(np.ones((4, 4))) == pytest.approx(24.0)


def test_permanent_amplitude_identity():
    assert permanent_amplitude(np.eye(3), (1, 0, 2), (1, 0, 2)) == pytest.approx(1.0)


def test_permanent_amplitude_hom():
    # 2x2 permanent (1*(-1) + 1*1)/2 = 0.
    assert abs(permanent_amplitude(HADAMARD_2, (1, 1), (1, 1))) < 1e-12


def test_permanent_amplitude_bunched():
    val = permanent_amplitude(HADAMARD_2, (1, 1), (2, 0))
    assert abs(val - 1 / math.sqrt(2)) < 1e-12


def test_permanent_amplitude_total_mismatch():
    with pytest.raises(RegisterMismatch):
        permanent_amplitude(np.eye(2), (1, 0), (1, 1))


def test_oracle_equivalence_random_instances():
    """Engine amplitudes against the independent permanent oracle."""
    rng = np.random.default_rng(2024)
    for _ in range(200):
        d = int(rng.integers(2, 7))
        u = haar_unitary(d, rng)
        n = int(rng.integers(1, 5))
        in_pat = [0] * d
        for _ in range(n):
            in_pat[int(rng.integers(d))] += 1
        reg = lattice_register(d, 1)
        photons = [Mode(s, 0) for s, c in enumerate(in_pat) for _ in range(c)]
        out = apply_dense_unitary(make_state(reg, photons), [Mode(s, 0) for s in range(d)], u)
        # Compare every output amplitude, including structural zeros.
        checked = 0
        for pat, amp in out.terms.items():
            assert abs(amp - permanent_amplitude(u, tuple(in_pat), pat)) < 1e-9
            checked += 1
        assert checked > 0


def test_apply_spec_equals_dense_matrix_route_multiphoton():
    """Sequential primitive application against one dense lattice unitary."""
    rng = np.random.default_rng(21)
    spec = InterferometerSpec(
        4,
        1,
        (
            coupler(0, 1, haar_unitary(2, rng)),
            PhaseShift(2, 0.91),
            block([1, 2, 3], haar_unitary(3, rng)),
            Permutation((2, 0, 1, 3)),
            coupler(0, 3, HADAMARD_2),
        ),
    )
    reg = lattice_register(4, 1)
    state = make_state(reg, [Mode(0, 0), Mode(1, 0), Mode(3, 0)])
    via_spec = apply_spec(state, spec)
    via_matrix = apply_dense_unitary(state, list(reg.modes), spec_to_matrix(spec))
    assert state_close(via_spec, via_matrix, atol=1e-9)


def test_dft_matrix_uniform_and_unitary():
    for d in (2, 3, 5, 7):
        f = dft_matrix(d)
        assert is_unitary(f)
        assert np.allclose(np.abs(f), d**-0.5)


def test_spec_json_round_trip_bit_exact():
    rng = np.random.default_rng(3)
    spec = InterferometerSpec(
        4,
        8,
        (
            coupler(0, 1, haar_unitary(2, rng)),
            Delay(1, 8),
            PhaseShift(2, 1.234567890123),
            Permutation((3, 2, 1, 0)),
            block([0, 2, 1], haar_unitary(3, rng)),
        ),
    )
    payload = json.dumps(spec_to_json(spec))
    again = spec_from_json(json.loads(payload))
    assert again == spec
    assert json.dumps(spec_to_json(again)) == payload
