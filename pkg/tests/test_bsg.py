"""Bell-state and cluster-state generators, plain and multirail."""

import itertools
import math

import numpy as np
import pytest

from railsim.components.bsg import (
    CLUSTER_HERALD_UNITARY,
    bsg_qubits,
    bsg_spec,
    multirail_bsg_qubits,
    multirail_bsg_spec,
    multirail_herald_outcomes,
    multirail_success_probability,
    run_bsg,
    run_cluster_bsg,
    run_multirail_bsg,
    sweep_placements,
)
from railsim.fock import (
    Mode,
    lattice_register,
    make_state,
    inner_product,
    schmidt_coefficients,
    superpose,
)
from railsim.herald import TAG_BELL_PHI, TAG_BELL_PSI, TAG_CLUSTER, TAG_CLUSTER_FRAME, TAG_NONSTANDARD
from railsim.optics import is_unitary, permanent_amplitude, spec_to_matrix

INV32 = 1.0 / 32.0


def _two_click(outcomes):
    return [o for o in outcomes if sum(o.pattern) == 2 and max(o.pattern) == 1]


def test_bsg_two_click_herald_probability_is_6_over_32():
    outs = run_bsg()
    assert sum(o.probability for o in outs) == pytest.approx(1.0, abs=1e-9)
    assert sum(o.probability for o in _two_click(outs)) == pytest.approx(6 * INV32, abs=1e-9)


def test_bsg_dual_rail_success_is_4_over_32():
    succ = [o for o in _two_click(run_bsg()) if o.classification.is_success]
    assert sum(o.probability for o in succ) == pytest.approx(4 * INV32, abs=1e-9)
    assert {o.classification.tag for o in succ} == {TAG_BELL_PHI, TAG_BELL_PSI}


def test_bsg_six_distinct_click_patterns():
    assert len(_two_click(run_bsg())) == 6


def test_bsg_success_branches_maximally_entangled():
    q1, q2 = bsg_qubits()
    for o in _two_click(run_bsg()):
        if o.classification.is_success:
            sig = sorted(schmidt_coefficients(o.post_state, q1.modes), reverse=True)
            assert sig[0] == pytest.approx(2**-0.5, abs=1e-9)
            assert sig[1] == pytest.approx(2**-0.5, abs=1e-9)


def test_bsg_phi_branch_matches_reference_form():
    # Reference: (|1010> - |0101>)/sqrt2 on the four output modes.
    reg = lattice_register(4, 1)
    ref = superpose(
        [
            make_state(reg, [Mode(0, 0), Mode(2, 0)]),
            make_state(reg, [Mode(1, 0), Mode(3, 0)]),
        ],
        [2**-0.5, -(2**-0.5)],
    )
    matched = 0
    for o in _two_click(run_bsg()):
        if o.classification.tag == TAG_BELL_PHI:
            # Output register equals the 4-mode lattice after detector removal.
            ov = abs(inner_product(o.post_state, ref))
            assert ov == pytest.approx(1.0, abs=1e-9)
            matched += 1
    assert matched == 2


def test_bsg_nonstandard_form_probability():
    non = [o for o in _two_click(run_bsg()) if o.classification.tag == TAG_NONSTANDARD]
    assert sum(o.probability for o in non) == pytest.approx(2 * INV32, abs=1e-9)


def test_bsg_failure_patterns_classified():
    outs = run_bsg()
    zero_click = [o for o in outs if sum(o.pattern) == 0]
    four_click = [o for o in outs if sum(o.pattern) == 4]
    assert zero_click and all(not o.classification.is_success for o in zero_click)
    assert four_click and all(not o.classification.is_success for o in four_click)


def test_bsg_probabilities_against_permanent_oracle():
    """Independent route: herald probabilities from the permanent formula."""
    u = spec_to_matrix(bsg_spec())
    in_pat = (1, 1, 1, 1, 0, 0, 0, 0)
    for o in _two_click(run_bsg()):
        prob = 0.0
        for out_front in itertools.product(range(3), repeat=4):
            if sum(out_front) != 2:
                continue
            full_out = tuple(out_front) + o.pattern
            prob += abs(permanent_amplitude(u, in_pat, full_out)) ** 2
        assert prob == pytest.approx(o.probability, abs=1e-9)


def test_bsg_tolerates_photon_on_arm_input():
    # The generator accepts a photon on either member of a port pair.
    outs = run_bsg(ports=(4, 1, 2, 3))
    assert sum(o.probability for o in _two_click(outs)) == pytest.approx(6 * INV32, abs=1e-9)


def test_cluster_unitary_is_unitary():
    assert is_unitary(CLUSTER_HERALD_UNITARY, atol=1e-9)


def test_cluster_dual_rail_success_is_2_over_32():
    outs = run_cluster_bsg()
    exact = [o for o in _two_click(outs) if o.classification.tag == TAG_CLUSTER]
    assert sum(o.probability for o in exact) == pytest.approx(2 * INV32, abs=1e-9)


def test_cluster_heralds_have_unit_entropy_and_frames():
    q1, q2 = bsg_qubits()
    framed = 0
    for o in _two_click(run_cluster_bsg()):
        if o.classification.tag in (TAG_CLUSTER, TAG_CLUSTER_FRAME):
            sig = sorted(schmidt_coefficients(o.post_state, q1.modes), reverse=True)
            assert sig[0] == pytest.approx(2**-0.5, abs=1e-9)
            framed += o.classification.tag == TAG_CLUSTER_FRAME
    assert framed == 2


@pytest.mark.parametrize("placement", [(0, 0, 0, 0), (1, 1, 1, 1)])
def test_multirail_single_copy_placement_reduces_to_plain(placement):
    prob = multirail_success_probability(2, placement)
    assert prob == pytest.approx(4 * INV32, abs=1e-9)


def test_multirail_two_copies_exhaustive_min():
    sweep = sweep_placements(2)
    assert len(sweep) == 16
    assert min(sweep.values()) >= 2 * INV32 - 1e-9


def test_multirail_four_copies_exhaustive_min_and_value_set():
    sweep2 = sweep_placements(2)
    sweep4 = sweep_placements(4)
    assert len(sweep4) == 256
    assert min(sweep4.values()) >= 2 * INV32 - 1e-9
    vals2 = {round(v, 10) for v in sweep2.values()}
    vals4 = {round(v, 10) for v in sweep4.values()}
    assert vals2 == vals4


def test_multirail_eight_copies_random_placements():
    rng = np.random.default_rng(17)
    placements = [tuple(int(x) for x in rng.integers(0, 8, 4)) for _ in range(100)]
    sweep = sweep_placements(8, placements=placements)
    assert min(sweep.values()) >= 2 * INV32 - 1e-9


def test_multirail_engine_matches_product_form_exhaustively():
    """Dual-route check at 2 copies: full sparse engine vs 2x2 permanents."""
    for placement in itertools.product(range(2), repeat=4):
        eng = {
            o.pattern: (o.probability, o.classification.tag)
            for o in run_multirail_bsg(1, placement)
            if sum(o.pattern) == 2 and max(o.pattern) == 1
        }
        fast, _ = multirail_herald_outcomes(2, placement)
        fst = {o.pattern: (o.probability, o.classification.tag) for o in fast}
        assert set(eng) == set(fst)
        for key in eng:
            assert eng[key][0] == pytest.approx(fst[key][0], abs=1e-9)
            assert eng[key][1] == fst[key][1]


def test_multirail_engine_spot_check_four_copies():
    placement = (0, 1, 2, 3)
    eng = {
        o.pattern: o.probability
        for o in run_multirail_bsg(2, placement)
        if sum(o.pattern) == 2 and max(o.pattern) == 1
    }
    fast, _ = multirail_herald_outcomes(4, placement)
    for o in fast:
        assert eng[o.pattern] == pytest.approx(o.probability, abs=1e-9)


def test_multirail_cluster_exhaustive_min():
    sweep = sweep_placements(2, cluster=True)
    assert min(sweep.values()) >= INV32 - 1e-9


def test_multirail_cluster_strict_minimum_below_frame_inclusive():
    # The exact-form floor halves again; the framed states carry the bound.
    strict = {}
    for pl in itertools.product(range(2), repeat=4):
        outs, _ = multirail_herald_outcomes(2, pl, cluster=True)
        strict[pl] = sum(
            o.probability for o in outs if o.classification.tag == TAG_CLUSTER
        )
    assert min(strict.values()) == pytest.approx(0.5 * INV32, abs=1e-9)


def test_blocking_failed_generator_outputs():
    """A failed herald leaves classically determined photons; blocking them
    gives exactly one branch with the right absorbed count."""
    from railsim.fock import block_modes

    outs = run_bsg()
    nonstandard = next(o for o in outs if o.classification.tag == TAG_NONSTANDARD)
    branches = block_modes(nonstandard.post_state, nonstandard.post_state.register.modes)
    assert len(branches) == 1
    assert branches[0].absorbed == 2
    assert branches[0].probability == pytest.approx(1.0, abs=1e-12)


def test_multirail_spec_structure():
    spec = multirail_bsg_spec(1)
    assert spec.width == 16
    q1, q2 = multirail_bsg_qubits(1)
    assert q1.m == 2 and q2.m == 2
