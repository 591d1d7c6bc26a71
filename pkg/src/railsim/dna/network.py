"""Node-partitioned registers and node-local quantum operations.

Every delocalized rail holds one mode per node; all interferometric
elements act within single node blocks, so nodes never exchange quantum
information and inter-node phase stability is unnecessary. Which-node
amplitudes (the uniform spreading coefficients) are classical knowledge
shared with the central controller.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import EncodingError, RegisterMismatch
from ..fock import Mode, PureState, apply_phase, measure_modes_exact
from ..herald import (
    TAG_EVEN_PARITY,
    TAG_LOST,
    TAG_ODD_PARITY,
    TAG_X_MINUS,
    TAG_X_PLUS,
    TAG_Z_ONE,
    TAG_Z_ZERO,
    Classification,
    HeraldOutcome,
    failure,
    invalid,
    success,
)
from ..multirail import MultirailQubit
from ..optics import HADAMARD_2, apply_dense_unitary, hadamard_matrix
from ..fock import apply_two_mode


@dataclass(frozen=True)
class NodeLayout:
    """Partition of spatial modes into equal contiguous node blocks."""

    node_count: int
    block: int

    def node_of(self, mode: Mode) -> int:
        node = mode.spatial // self.block
        if not 0 <= node < self.node_count:
            raise RegisterMismatch(f"mode {mode} outside the node partition")
        return node

    def spatials_of(self, node: int) -> range:
        return range(node * self.block, (node + 1) * self.block)

    @property
    def width(self) -> int:
        return self.node_count * self.block


@dataclass(frozen=True)
class DelocalizedQubit:
    """A multirail qubit with one mode per node in each rail group.

    `origin_zero`/`origin_one` record which pre-spread position the photon
    occupied, fixing the known which-node amplitudes h_i = U[i][origin].
    """

    qubit: MultirailQubit
    origin_zero: int
    origin_one: int

    def __post_init__(self) -> None:
        m = self.qubit.m
        if not 0 <= self.origin_zero < m or not 0 <= self.origin_one < m:
            raise EncodingError("origins must index a rail")


def delocalize(state: PureState, rail_modes: tuple[Mode, ...], origin: int | None = None) -> PureState:
    """Spread one rail uniformly over its per-node modes with H^(x)k.

    The photon initially at rail position j acquires the known amplitudes
    h_i^(j) over nodes i. Node counts must be a power of two.
    """
    n = len(rail_modes)
    k = n.bit_length() - 1
    if n != 1 << k:
        raise EncodingError("delocalize requires a power-of-2 node count")
    if origin is not None:
        for pat in state.terms:
            occupied = sum(pat[state.register.position(m)] for m in rail_modes)
            if occupied and pat[state.register.position(rail_modes[origin])] != occupied:
                raise EncodingError("declared origin does not match the state")
    if n == 1:
        return state
    return apply_dense_unitary(state, rail_modes, hadamard_matrix(k))


def apply_node_phase(state: PureState, layout: NodeLayout, node: int, theta: float) -> PureState:
    """Common phase on every mode a node holds: e^{i n_node theta}."""
    for mode in state.register.modes:
        if layout.node_of(mode) == node:
            state = apply_phase(state, mode, theta)
    return state


def _by_node(qubit: MultirailQubit, layout: NodeLayout) -> list[tuple[Mode, Mode]]:
    """Pair each node's (zero, one) modes; rails must be one-per-node."""
    zero = {layout.node_of(m): m for m in qubit.zero_rails}
    one = {layout.node_of(m): m for m in qubit.one_rails}
    if len(zero) != qubit.m or len(one) != qubit.m or set(zero) != set(one):
        raise EncodingError("qubit must hold exactly one mode per node per group")
    return [(zero[n], one[n]) for n in sorted(zero)]


def dna_logical_x_measure(
    state: PureState, qubit: MultirailQubit, layout: NodeLayout
) -> list[HeraldOutcome]:
    """Logical X: every node couples its two modes of the qubit, then detects.

    A single click at node s in the zero half collapses the rest to
    h_s^(j) |A0> + h_s^(k) |A1>; the one half gives the minus branch. Tags
    carry the sign and the click node.
    """
    pairs = _by_node(qubit, layout)
    for zero_mode, one_mode in pairs:
        state = apply_two_mode(state, zero_mode, one_mode, HADAMARD_2)
    zero_set = set(qubit.zero_rails)
    outcomes = []
    for br in measure_modes_exact(state, qubit.modes):
        total = sum(br.pattern)
        if total == 0:
            cls = failure(TAG_LOST)
        elif total == 1 and max(br.pattern) == 1:
            clicked = br.modes[br.pattern.index(1)]
            node = layout.node_of(clicked)
            tag = TAG_X_PLUS if clicked in zero_set else TAG_X_MINUS
            cls = success(tag, node=node)
        else:
            cls = invalid()
        outcomes.append(HeraldOutcome(br.modes, br.pattern, cls, br.probability, br.post_state))
    return outcomes


def dna_logical_z_measure(
    state: PureState, qubit: MultirailQubit, layout: NodeLayout
) -> list[HeraldOutcome]:
    """Logical Z: detect all 2N rails; the occupied half is the outcome."""
    zero_set = set(qubit.zero_rails)
    outcomes = []
    for br in measure_modes_exact(state, qubit.modes):
        total = sum(br.pattern)
        if total == 0:
            cls = failure(TAG_LOST)
        elif total == 1:
            clicked = br.modes[br.pattern.index(1)]
            node = layout.node_of(clicked)
            tag = TAG_Z_ZERO if clicked in zero_set else TAG_Z_ONE
            cls = success(tag, node=node)
        else:
            cls = invalid()
        outcomes.append(HeraldOutcome(br.modes, br.pattern, cls, br.probability, br.post_state))
    return outcomes


def _rail_clicks(branch, qubit_a, qubit_b, layout) -> tuple[tuple[str, int], ...]:
    """Name each clicked mode by rail group and node, e.g. ("a0", 2)."""
    names = {}
    for label, qubit in (("a", qubit_a), ("b", qubit_b)):
        for m in qubit.zero_rails:
            names[m] = f"{label}0"
        for m in qubit.one_rails:
            names[m] = f"{label}1"
    out = []
    for m, n in zip(branch.modes, branch.pattern):
        for _ in range(n):
            out.append((names[m], layout.node_of(m)))
    return tuple(out)


def dna_type_II_fusion(
    state: PureState,
    qubit_a: MultirailQubit,
    qubit_b: MultirailQubit,
    layout: NodeLayout,
) -> list[HeraldOutcome]:
    """Node-local Type-II fusion of two delocalized qubits.

    Each node couples (a.zero, b.one) and (a.one, b.zero) among its four
    local modes and detects them all. One photon in the a.zero/b.one group
    and one in the a.one/b.zero group (clicks may sit at different nodes)
    heralds an even-parity merge; two photons in one group reveal the odd
    computational value and fail.
    """
    if set(qubit_a.modes) & set(qubit_b.modes):
        raise EncodingError("fusion qubits must not share modes")
    pairs_a = _by_node(qubit_a, layout)
    pairs_b = _by_node(qubit_b, layout)
    for (a_zero, a_one), (b_zero, b_one) in zip(pairs_a, pairs_b):
        state = apply_two_mode(state, a_zero, b_one, HADAMARD_2)
        state = apply_two_mode(state, a_one, b_zero, HADAMARD_2)
    top_group = set(qubit_a.zero_rails) | set(qubit_b.one_rails)
    outcomes = []
    for br in measure_modes_exact(state, qubit_a.modes + qubit_b.modes):
        counts = {m: n for m, n in zip(br.modes, br.pattern)}
        n_top = sum(n for m, n in counts.items() if m in top_group)
        n_mid = sum(br.pattern) - n_top
        cls = classify_fusion_counts(n_top, n_mid)
        if cls.tag == TAG_EVEN_PARITY:
            cls = success(TAG_EVEN_PARITY, clicks=_rail_clicks(br, qubit_a, qubit_b, layout))
        outcomes.append(HeraldOutcome(br.modes, br.pattern, cls, br.probability, br.post_state))
    return outcomes


def classify_fusion_counts(n_top: int, n_mid: int) -> Classification:
    """Herald verdict from group photon counts alone (controller-shareable)."""
    if (n_top, n_mid) == (1, 1):
        return success(TAG_EVEN_PARITY)
    if (n_top, n_mid) == (2, 0):
        return failure(TAG_ODD_PARITY, revealed=(0, 1))
    if (n_top, n_mid) == (0, 2):
        return failure(TAG_ODD_PARITY, revealed=(1, 0))
    if (n_top, n_mid) == (0, 0):
        return failure(TAG_LOST)
    return invalid()
