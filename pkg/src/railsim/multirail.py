"""Multirail qubits: a photon anywhere in the first rail group encodes 0,
anywhere in the second encodes 1.

The group size m can exceed one because coherent erasure (uniform-magnitude
interferometers) removes which-rail information at detection time. This
module provides readout, logical Pauli action, phase rotations, adaptive
X/Z measurement (including the blocking-switch Z variant), and passive
multiplexing of repeated probabilistic attempts into an enlarged encoding.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from itertools import chain
from typing import Sequence

import numpy as np

from .errors import ContractViolation, EncodingError, RegisterMismatch
from .fock import (
    Mode,
    ModeRegister,
    Pattern,
    PureState,
    apply_phase,
    block_modes,
    embed_state,
    inner_product,
    make_state,
    measure_modes_exact,
    relabel_modes,
    superpose,
    vacuum_state,
)
from .herald import (
    TAG_LOST,
    TAG_X_MINUS,
    TAG_X_PLUS,
    TAG_Z_ONE,
    TAG_Z_ZERO,
    TAG_Z_ZERO_OR_LOST,
    Classification,
    HeraldOutcome,
    failure,
    invalid,
    success,
)
from .optics import InterferometerSpec, apply_dense_unitary, apply_spec, hadamard_matrix, spec_to_matrix


@dataclass(frozen=True)
class MultirailQubit:
    """Mode groups encoding logical 0 and 1 for one qubit.

    Rail lists are pair-aligned: zero_rails[i] is the partner of
    one_rails[i] under any erasure interferometer built here.
    """

    zero_rails: tuple[Mode, ...]
    one_rails: tuple[Mode, ...]

    def __post_init__(self) -> None:
        if len(self.zero_rails) != len(self.one_rails) or not self.zero_rails:
            raise EncodingError("rail groups must be non-empty and equal-sized")
        if set(self.zero_rails) & set(self.one_rails):
            raise EncodingError("rail groups must be disjoint")

    @property
    def m(self) -> int:
        return len(self.zero_rails)

    @property
    def modes(self) -> tuple[Mode, ...]:
        return self.zero_rails + self.one_rails

    def rails(self, value: int) -> tuple[Mode, ...]:
        return self.one_rails if value else self.zero_rails

    def to_json(self) -> dict:
        return {
            "zero": [[m.spatial, m.timebin] for m in self.zero_rails],
            "one": [[m.spatial, m.timebin] for m in self.one_rails],
        }

    @staticmethod
    def from_json(data: dict) -> "MultirailQubit":
        return MultirailQubit(
            tuple(Mode(s, t) for s, t in data["zero"]),
            tuple(Mode(s, t) for s, t in data["one"]),
        )


def dual_rail(zero: Mode, one: Mode) -> MultirailQubit:
    return MultirailQubit((zero,), (one,))


class Readout(enum.Enum):
    ZERO = 0
    ONE = 1
    LOST = "lost"
    INVALID = "invalid"


def logical_readout(reg: ModeRegister, pattern: Pattern, qubit: MultirailQubit) -> Readout:
    """Decode a detection pattern on the qubit's modes."""
    n0 = sum(pattern[reg.position(m)] for m in qubit.zero_rails)
    n1 = sum(pattern[reg.position(m)] for m in qubit.one_rails)
    if n0 == 1 and n1 == 0:
        return Readout.ZERO
    if n0 == 0 and n1 == 1:
        return Readout.ONE
    if n0 == 0 and n1 == 0:
        return Readout.LOST
    return Readout.INVALID


def logical_basis_state(
    reg: ModeRegister, assignments: Sequence[tuple[MultirailQubit, int, int]]
) -> PureState:
    """Product computational-basis state: (qubit, value, rail index) triples."""
    photons = [q.rails(v)[rail] for q, v, rail in assignments]
    return make_state(reg, photons)


def bell_pair_state(
    reg: ModeRegister,
    q1: MultirailQubit,
    q2: MultirailQubit,
    form: str = "phi+",
    rails: tuple[int, int, int, int] = (0, 0, 0, 0),
) -> PureState:
    """Maximally entangled two-qubit state on chosen rails.

    `rails` picks the microstate rail index for (q1 zero, q1 one, q2 zero,
    q2 one) so delocalized and misaligned variants are easy to build.
    """
    r10, r11, r20, r21 = rails
    combos = {
        "phi+": ((0, r10, 0, r20, 1), (1, r11, 1, r21, 1)),
        "phi-": ((0, r10, 0, r20, 1), (1, r11, 1, r21, -1)),
        "psi+": ((0, r10, 1, r21, 1), (1, r11, 0, r20, 1)),
        "psi-": ((0, r10, 1, r21, 1), (1, r11, 0, r20, -1)),
    }[form]
    states = []
    amps = []
    for v1, rail1, v2, rail2, sign in combos:
        states.append(make_state(reg, [q1.rails(v1)[rail1], q2.rails(v2)[rail2]]))
        amps.append(sign / math.sqrt(2))
    return superpose(states, amps)


def z_rotation(state: PureState, qubit: MultirailQubit, alpha: float) -> PureState:
    """diag(1, e^{i alpha}) on the logical qubit: phase every one-group rail."""
    for m in qubit.one_rails:
        state = apply_phase(state, m, alpha)
    return state


def apply_logical_z(state: PureState, qubit: MultirailQubit) -> PureState:
    return z_rotation(state, qubit, math.pi)


def apply_logical_x(state: PureState, qubit: MultirailQubit) -> PureState:
    """Pair-aligned rail swap zero_rails[i] <-> one_rails[i]."""
    mapping = {}
    for z, o in zip(qubit.zero_rails, qubit.one_rails):
        mapping[z] = o
        mapping[o] = z
    return relabel_modes(state, mapping)


def pauli_expectation(state: PureState, ops: Sequence[tuple[MultirailQubit, str]]) -> complex:
    """<state| P |state> for a product of logical Paulis on valid encodings."""
    rotated = state
    scale = 1.0 + 0j
    for qubit, op in ops:
        if op == "Z":
            rotated = apply_logical_z(rotated, qubit)
        elif op == "X":
            rotated = apply_logical_x(rotated, qubit)
        elif op == "Y":
            rotated = apply_logical_x(apply_logical_z(rotated, qubit), qubit)
            scale *= 1j
        elif op != "I":
            raise ValueError(f"unknown Pauli {op!r}")
    return scale * inner_product(state, rotated)


def _erasure_unitary(qubit: MultirailQubit) -> np.ndarray:
    k = (2 * qubit.m).bit_length() - 1
    if 2 * qubit.m != 1 << k:
        raise EncodingError("X-basis erasure needs a power-of-2 rail count")
    return hadamard_matrix(k)


def _require_spatial_structure(qubit: MultirailQubit) -> None:
    spatials = {m.spatial for m in qubit.modes}
    if len(spatials) < 2:
        raise EncodingError("purely temporal multirail qubits are not supported here")


def adaptive_measure(
    state: PureState,
    qubit: MultirailQubit,
    basis: str,
    mechanism: str = "detect-only",
) -> list[HeraldOutcome]:
    """Measure one multirail qubit in X or Z.

    X applies the pair-aligned generalized Hadamard across all 2m rails and
    detects them; the collapse sign is +1 for clicks landing in the zero
    half and -1 for the one half. Z with `detect-only` just detects the
    rails. Z with `blocking-z` absorbs the zero rails first and still runs
    the X interferometer, so a click means One while silence is the
    ambiguous Zero-or-Lost outcome (the loss herald is forfeited). Entries
    for the same silent pattern may appear once per absorber branch.
    """
    if basis == "Z" and mechanism == "detect-only":
        return _classify_z_branches(measure_modes_exact(state, qubit.modes), state.register, qubit)
    _require_spatial_structure(qubit)
    u = _erasure_unitary(qubit)
    if basis == "X":
        if mechanism != "detect-only":
            raise ValueError("X measurement supports only detect-only")
        evolved = apply_dense_unitary(state, qubit.modes, u)
        outcomes = []
        for br in measure_modes_exact(evolved, qubit.modes):
            outcomes.append(
                HeraldOutcome(br.modes, br.pattern, _classify_x_click(br.modes, br.pattern, qubit), br.probability, br.post_state)
            )
        return outcomes
    if basis == "Z" and mechanism == "blocking-z":
        outcomes: list[HeraldOutcome] = []
        for blocked in block_modes(state, qubit.zero_rails):
            evolved = apply_dense_unitary(blocked.state, qubit.modes, u)
            for br in measure_modes_exact(evolved, qubit.modes):
                total = sum(br.pattern)
                if total == 0:
                    cls = success(TAG_Z_ZERO_OR_LOST, absorbed=blocked.absorbed)
                elif total == 1:
                    cls = success(TAG_Z_ONE)
                else:
                    cls = invalid()
                outcomes.append(
                    HeraldOutcome(br.modes, br.pattern, cls, blocked.probability * br.probability, br.post_state)
                )
        return outcomes
    raise ValueError(f"unsupported basis/mechanism {basis!r}/{mechanism!r}")


def _classify_x_click(
    modes: tuple[Mode, ...], pattern: Pattern, qubit: MultirailQubit
) -> Classification:
    total = sum(pattern)
    if total == 0:
        return failure(TAG_LOST)
    if total != 1 or max(pattern) != 1:
        return invalid()
    clicked = modes[pattern.index(1)]
    if clicked in qubit.zero_rails:
        return success(TAG_X_PLUS, position=qubit.zero_rails.index(clicked))
    return success(TAG_X_MINUS, position=qubit.one_rails.index(clicked))


def _classify_z_branches(branches, reg: ModeRegister, qubit: MultirailQubit) -> list[HeraldOutcome]:
    out = []
    for br in branches:
        counts = {m: n for m, n in zip(br.modes, br.pattern)}
        n0 = sum(counts[m] for m in qubit.zero_rails)
        n1 = sum(counts[m] for m in qubit.one_rails)
        if (n0, n1) == (1, 0):
            clicked = next(m for m in qubit.zero_rails if counts[m])
            cls = success(TAG_Z_ZERO, position=qubit.zero_rails.index(clicked))
        elif (n0, n1) == (0, 1):
            clicked = next(m for m in qubit.one_rails if counts[m])
            cls = success(TAG_Z_ONE, position=qubit.one_rails.index(clicked))
        elif (n0, n1) == (0, 0):
            cls = failure(TAG_LOST)
        else:
            cls = invalid()
        out.append(HeraldOutcome(br.modes, br.pattern, cls, br.probability, br.post_state))
    return out


@dataclass(frozen=True)
class MultiplexAttempt:
    """One probabilistic generation attempt feeding a passive multiplexer."""

    succeeded: bool
    reg: ModeRegister
    state: PureState | None
    qubits: tuple[MultirailQubit, ...]


@dataclass(frozen=True)
class BlockReport:
    survivor: int | None
    absorbed: dict[int, int]
    qubits: tuple[MultirailQubit, ...]


def passive_multiplex(
    attempts: Sequence[MultiplexAttempt],
    spread: InterferometerSpec,
    keep: int | None = None,
) -> tuple[PureState, BlockReport]:
    """Block all but one successful attempt, then spread uniformly.

    The surviving output is passed through `spread`, whose matrix must mix
    each rail position uniformly (|entry| = attempts^-1/2) across the
    matching modes of every attempt, so amplitudes no longer record which
    attempt succeeded. The returned descriptors span the union of all
    attempts' rails.
    """
    if not attempts:
        raise ContractViolation("need at least one attempt")
    n_qubits = len(attempts[0].qubits)
    m = attempts[0].qubits[0].m if n_qubits else 0
    for att in attempts:
        if len(att.qubits) != n_qubits or any(q.m != m for q in att.qubits):
            raise ContractViolation("attempts must share one qubit structure")

    if keep is None:
        keep = next((i for i, a in enumerate(attempts) if a.succeeded), None)
    elif not attempts[keep].succeeded:
        raise ContractViolation("kept attempt did not succeed")

    union = spread.lattice()
    for att in attempts:
        for mode in att.reg.modes:
            if mode not in union:
                raise RegisterMismatch("attempt modes must lie on the spread lattice")

    _check_uniform_spread(spread, attempts)

    absorbed: dict[int, int] = {}
    for i, att in enumerate(attempts):
        if i == keep:
            continue
        if att.state is None:
            absorbed[i] = 0
            continue
        branches = block_modes(att.state, att.reg.modes)
        if len(branches) != 1:
            raise ContractViolation("blocked attempt has indefinite photon content")
        absorbed[i] = branches[0].absorbed

    if keep is None:
        carried = vacuum_state(union)
    else:
        carried = embed_state(attempts[keep].state, union)
    out = apply_spec(carried, spread)

    enlarged = tuple(
        MultirailQubit(
            tuple(chain.from_iterable(att.qubits[i].zero_rails for att in attempts)),
            tuple(chain.from_iterable(att.qubits[i].one_rails for att in attempts)),
        )
        for i in range(n_qubits)
    )
    return out, BlockReport(keep, absorbed, enlarged)


def _check_uniform_spread(spread: InterferometerSpec, attempts: Sequence[MultiplexAttempt]) -> None:
    mat = spec_to_matrix(spread)
    lattice = spread.lattice()
    d = len(attempts)
    want = 1 / math.sqrt(d)
    n_qubits = len(attempts[0].qubits)
    m = attempts[0].qubits[0].m
    for i in range(n_qubits):
        for group in ("zero_rails", "one_rails"):
            for x in range(m):
                block = [getattr(att.qubits[i], group)[x] for att in attempts]
                rows = [lattice.position(mode) for mode in block]
                for mode in block:
                    col = mat[:, lattice.position(mode)]
                    support = {int(r) for r in np.nonzero(np.abs(col) > 1e-12)[0]}
                    if support != set(rows) or not np.allclose(
                        np.abs(col[rows]), want, atol=1e-9
                    ):
                        raise ContractViolation(
                            "spread is not uniform-magnitude across attempt copies"
                        )


def build_spread_spec(
    width: int, blocks: Sequence[Sequence[Mode]], window: int = 1
) -> InterferometerSpec:
    """Uniform spreader: one Hadamard/DFT block per rail position."""
    from .optics import block as dense_block
    from .optics import hadamard_couplers, uniform_spread_matrix

    prims = []
    for modes in blocks:
        spatials = [m.spatial for m in modes]
        d = len(spatials)
        if d == 1:
            continue
        if d & (d - 1) == 0:
            prims.extend(hadamard_couplers(spatials))
        else:
            prims.append(dense_block(spatials, uniform_spread_matrix(d)))
    return InterferometerSpec(width, window, tuple(prims))
