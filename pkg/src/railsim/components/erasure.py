"""Passive erasure of single-photon timing information.

A photon arriving in one of several timebins is spread uniformly over many
(spatial, timebin) events with known phases. Detection at an event
reachable from every admissible input timebin erases the arrival time;
events reachable from only a subset reveal it and count as heralded
erasure failures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import RegisterMismatch
from ..fock import Mode
from ..optics import (
    HADAMARD_2,
    Delay,
    InterferometerSpec,
    coupler,
    hadamard_couplers,
    spec_to_matrix,
)


@dataclass(frozen=True)
class EraserSpec:
    """A time-erasing interferometer with its admissible input window.

    `erased_outcomes` holds every detector event reachable with identical
    amplitude magnitude from each input timebin; everything else in
    `support` leaks timing information.
    """

    spec: InterferometerSpec
    input_spatial: int
    input_window: tuple[int, ...]
    erased_outcomes: frozenset[Mode]
    support: frozenset[Mode]


@dataclass(frozen=True)
class ErasureClass:
    erased: bool
    consistent_inputs: frozenset[int]


def _finish(spec: InterferometerSpec, input_spatial: int, window: tuple[int, ...]) -> EraserSpec:
    mat = spec_to_matrix(spec)
    lattice = spec.lattice()
    cols = {t: mat[:, lattice.position(Mode(input_spatial, t))] for t in window}
    support: set[Mode] = set()
    per_input: dict[int, dict[Mode, float]] = {}
    for t, col in cols.items():
        mags = {}
        for r in np.nonzero(np.abs(col) > 1e-12)[0]:
            mode = lattice.modes[int(r)]
            mags[mode] = abs(col[int(r)])
            support.add(mode)
        per_input[t] = mags
    erased = set()
    for mode in support:
        mags = [per_input[t].get(mode, 0.0) for t in window]
        if min(mags) > 1e-12 and max(mags) - min(mags) <= 1e-9:
            erased.add(mode)
    return EraserSpec(spec, input_spatial, tuple(window), frozenset(erased), frozenset(support))


def build_temporal_eraser(levels: int, input_window: tuple[int, ...] = (0,)) -> EraserSpec:
    """Coupler/delay chain spreading one photon over 2^levels timebins.

    Two spatial modes alternate through levels+1 couplers with delays of
    2^(levels-1), ..., 2, 1 bins on the second mode. A photon entering
    spatial mode 0 at timebin t leaves in a uniform superposition of
    magnitude 2^-(levels+1)/2 over 2^levels consecutive timebins on both
    modes.
    """
    if not 1 <= levels <= 5:
        raise RegisterMismatch("chain eraser supports 1..5 levels")
    window = tuple(sorted(input_window))
    total_delay = (1 << levels) - 1
    timebins = max(window) + total_delay + 1
    prims = [coupler(0, 1, HADAMARD_2)]
    for step in range(levels - 1, -1, -1):
        prims.append(Delay(1, 1 << step))
        prims.append(coupler(0, 1, HADAMARD_2))
    spec = InterferometerSpec(2, timebins, tuple(prims))
    return _finish(spec, 0, window)


def build_temporal_eraser_tree(levels: int, input_window: tuple[int, ...] = (0,)) -> EraserSpec:
    """Tree variant: spread over 2^levels spatial modes, stagger, recombine.

    Spatial mode s is delayed by s timebins between two generalized
    Hadamards, giving 4^levels uniform events; accepted purely by the
    uniformity property.
    """
    if not 1 <= levels <= 3:
        raise RegisterMismatch("tree eraser supports 1..3 levels")
    window = tuple(sorted(input_window))
    width = 1 << levels
    timebins = max(window) + width
    prims = list(hadamard_couplers(list(range(width))))
    for s in range(1, width):
        prims.append(Delay(s, s))
    prims.extend(hadamard_couplers(list(range(width))))
    spec = InterferometerSpec(width, timebins, tuple(prims))
    return _finish(spec, 0, window)


def classify_erasure(eraser: EraserSpec, event: Mode) -> ErasureClass:
    """Erased, or the exact input subset a detection at `event` points to."""
    if event in eraser.erased_outcomes:
        return ErasureClass(True, frozenset(eraser.input_window))
    mat = spec_to_matrix(eraser.spec)
    lattice = eraser.spec.lattice()
    row = lattice.position(event)
    consistent = frozenset(
        t
        for t in eraser.input_window
        if abs(mat[row, lattice.position(Mode(eraser.input_spatial, t))]) > 1e-12
    )
    return ErasureClass(False, consistent)
