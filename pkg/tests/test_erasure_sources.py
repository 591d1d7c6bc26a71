"""Temporal erasers and stochastic sources."""

import math

import numpy as np
import pytest

from railsim.components.erasure import (
    build_temporal_eraser,
    build_temporal_eraser_tree,
    classify_erasure,
)
from railsim.components.sources import SourceSpec, sample_source, source_efficiency
from railsim.errors import RegisterMismatch
from railsim.fock import Mode, make_state
from railsim.optics import apply_spec


def _output_state(eraser, timebin=0):
    st = make_state(eraser.spec.lattice(), [Mode(eraser.input_spatial, timebin)])
    return apply_spec(st, eraser.spec)


def test_chain_level_one_hand_expansion():
    # BS - delay(1) - BS on |1; t=0>: four +-1/2 events over two timebins.
    out = _output_state(build_temporal_eraser(1))
    reg = out.register
    signs = {}
    for pat, a in out.terms.items():
        mode = next(m for m, o in zip(reg.modes, pat) if o)
        signs[(mode.spatial, mode.timebin)] = round(a.real, 12)
    assert signs == {(0, 0): 0.5, (0, 1): 0.5, (1, 0): 0.5, (1, 1): -0.5}


def test_chain_level_four_uniform_over_32_events():
    out = _output_state(build_temporal_eraser(4))
    assert len(out.terms) == 32
    for amp in out.terms.values():
        assert abs(amp) ** 2 == pytest.approx(1 / 32, abs=1e-9)
    occupied = [m for pat in out.terms for m, o in zip(out.register.modes, pat) if o]
    timebins = {m.timebin for m in occupied}
    assert timebins == set(range(16))
    assert {m.spatial for m in occupied} == {0, 1}


def test_chain_uniform_for_shifted_inputs():
    er = build_temporal_eraser(3, (0, 1, 2, 3))
    for t in (0, 1, 2, 3):
        out = _output_state(er, t)
        assert len(out.terms) == 16
        mags = [abs(a) for a in out.terms.values()]
        assert max(mags) - min(mags) < 1e-12


@pytest.mark.parametrize("window", range(1, 9))
def test_erased_set_is_support_intersection(window):
    er = build_temporal_eraser(4, tuple(range(window)))
    supports = []
    for t in range(window):
        out = _output_state(er, t)
        occupied = {
            m for pat in out.terms for m, o in zip(out.register.modes, pat) if o
        }
        supports.append(occupied)
    expected = set.intersection(*supports)
    assert er.erased_outcomes == expected
    union = set.union(*supports)
    assert er.support == union


def test_classify_erasure_outcomes():
    er = build_temporal_eraser(4, tuple(range(4)))
    earliest = min(er.support, key=lambda m: (m.timebin, m.spatial))
    cls = classify_erasure(er, earliest)
    assert not cls.erased
    assert cls.consistent_inputs == frozenset({0})
    central = Mode(0, 8)
    cls = classify_erasure(er, central)
    assert cls.erased
    assert cls.consistent_inputs == frozenset(range(4))


def test_single_input_window_everything_erased():
    er = build_temporal_eraser(4, (0,))
    assert er.erased_outcomes == er.support


def test_chain_level_bounds():
    with pytest.raises(RegisterMismatch):
        build_temporal_eraser(6)


def test_tree_eraser_uniformity():
    er = build_temporal_eraser_tree(2, (0, 1))
    for t in (0, 1):
        out = _output_state(er, t)
        mags = [abs(a) for a in out.terms.values()]
        assert len(out.terms) == 16
        assert max(mags) - min(mags) < 1e-12


def test_source_efficiency_paper_values():
    assert source_efficiency(0.2, 16, "dump-pump") == pytest.approx(0.9719, abs=5e-5)
    assert round(source_efficiency(0.2, 16, "dump-pump"), 3) == 0.972
    assert source_efficiency(0.2, 32, "dump-pump") == pytest.approx(0.9992, abs=5e-5)
    assert round(source_efficiency(0.2, 32, "dump-pump"), 3) == 0.999


def test_source_efficiency_single_shot():
    for strategy in ("exactly-one", "dump-pump"):
        assert source_efficiency(0.3, 1, strategy) == pytest.approx(0.3)


def test_exactly_one_maximized_near_inverse_eta():
    eta = 0.2
    values = {m: source_efficiency(eta, m, "exactly-one") for m in range(1, 51)}
    best = max(values, key=values.get)
    assert abs(best - 1 / eta) <= 1.0


def test_sample_source_degenerate_cases():
    assert sample_source(SourceSpec(1, 1, 1.0), 3) == Mode(0, 0)
    assert sample_source(SourceSpec(4, 2, 0.0), 3) is None


def test_sample_source_uniformity():
    spec = SourceSpec(4, 1, 1.0)
    rng = np.random.default_rng(5)
    n = 100_000
    counts = {s: 0 for s in range(4)}
    for _ in range(n):
        counts[sample_source(spec, rng).spatial] += 1
    sigma = math.sqrt(0.25 * 0.75 / n)
    for s in range(4):
        assert abs(counts[s] / n - 0.25) < 5 * sigma


def test_sample_source_deterministic_per_seed():
    spec = SourceSpec(2, 2, 0.7)
    seq1 = [sample_source(spec, np.random.default_rng(9)) for _ in range(1)]
    a = [sample_source(spec, s) for s in range(50)]
    b = [sample_source(spec, s) for s in range(50)]
    assert a == b
