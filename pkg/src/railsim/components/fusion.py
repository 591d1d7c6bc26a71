"""Type-I and boosted Type-II fusion on dual-rail and multirail qubits.

Type-I couples one rail group of each qubit into a shared erasure
interferometer and detects it; exactly one detected photon heralds a
merge of the two qubits into one. Boosted Type-II consumes an ancilla
Bell pair, sorts all rails into two sides by logical value, erases origin
information within each side, and reads the parity from the side photon
counts: a 2/2 split or a 3/1 split succeeds, 4/0 fails into the
computational basis.
"""

from __future__ import annotations

import numpy as np

from ..errors import ContractViolation, EncodingError, RegisterMismatch
from ..fock import Mode, PureState, measure_modes_exact
from ..herald import (
    TAG_BAD_COUNT,
    TAG_ERASURE_REVEAL,
    TAG_FUSED,
    TAG_OPPOSITE_PARITY,
    TAG_SAME_PARITY,
    HeraldOutcome,
    failure,
    invalid,
    success,
)
from ..multirail import MultirailQubit
from ..optics import (
    InterferometerSpec,
    Permutation,
    apply_dense_unitary,
    apply_spec,
    hadamard_couplers,
    hadamard_matrix,
    spec_to_matrix,
)


def fused_qubit(qubit_a: MultirailQubit, qubit_b: MultirailQubit) -> MultirailQubit:
    """Descriptor of the merged qubit surviving a Type-I fusion."""
    return MultirailQubit(qubit_b.zero_rails, qubit_a.one_rails)


def _power_of_two_hadamard(n: int) -> np.ndarray:
    k = n.bit_length() - 1
    if n != 1 << k:
        raise EncodingError("erasure block needs a power-of-2 mode count")
    return hadamard_matrix(k)


def type_I_fusion(
    state: PureState,
    qubit_a: MultirailQubit,
    qubit_b: MultirailQubit,
    erasure: InterferometerSpec | None = None,
) -> list[HeraldOutcome]:
    """Fuse two qubits by detecting qubit_a's zero rails with qubit_b's one rails.

    With no explicit erasure the detector rails pass a generalized Hadamard
    (rail counts must be a power of 2, purely spatial distinctions). A
    custom `erasure` spec (e.g. spatial couplers composed with temporal
    erasers) is applied instead when the rails span timebins; detector
    events then split into erased ones (coherent success) and revealing
    ones, classified from the spec's single-photon transfer matrix.

    Success = exactly one photon detected: the survivors re-encode as
    fused_qubit(qubit_a, qubit_b), with collapse sign +1 for clicks in the
    qubit_a half and -1 for the qubit_b half. Zero or two detected photons
    fail into the computational basis.
    """
    if set(qubit_a.modes) & set(qubit_b.modes):
        raise EncodingError("fusion qubits must not share modes")
    detectors = qubit_a.zero_rails + qubit_b.one_rails

    if erasure is None:
        u = _power_of_two_hadamard(len(detectors))
        evolved = apply_dense_unitary(state, detectors, u)
        detect_modes: tuple[Mode, ...] = detectors
        erased: set[Mode] | None = None
    else:
        if state.register != erasure.lattice():
            raise RegisterMismatch("state must live on the erasure lattice")
        mat = spec_to_matrix(erasure)
        lattice = erasure.lattice()
        cols = [lattice.position(m) for m in detectors]
        keep = [lattice.position(m) for m in qubit_b.zero_rails + qubit_a.one_rails]
        for c in keep:
            col = mat[:, c]
            if abs(col[c] - 1) > 1e-9 or np.abs(col).sum() > 1 + 1e-9:
                raise ContractViolation("erasure must not touch the surviving rails")
        sub = np.abs(mat[:, cols])
        reach = np.nonzero(sub.max(axis=1) > 1e-12)[0]
        detect_modes = tuple(lattice.modes[int(r)] for r in reach)
        erased = {
            lattice.modes[int(r)]
            for r in reach
            if sub[r].min() > 1e-12 and sub[r].max() - sub[r].min() <= 1e-9
        }
        evolved = apply_spec(state, erasure)

    half_a = set(qubit_a.zero_rails)
    outcomes = []
    for br in measure_modes_exact(evolved, detect_modes):
        total = sum(br.pattern)
        if total == 1:
            clicked = br.modes[br.pattern.index(1)]
            if erased is not None and clicked not in erased:
                cls = failure(TAG_ERASURE_REVEAL, mode=(clicked.spatial, clicked.timebin))
            else:
                cls = success(TAG_FUSED, sign=1 if clicked in half_a else -1)
        else:
            cls = failure(TAG_BAD_COUNT, photons=total)
        outcomes.append(HeraldOutcome(br.modes, br.pattern, cls, br.probability, br.post_state))
    return outcomes


def _require_bell_ancilla(
    state: PureState, anc1: MultirailQubit, anc2: MultirailQubit
) -> None:
    """The ancilla pair must factor out as (|00> + |11>)/sqrt2."""
    anc_modes = anc1.modes + anc2.modes
    reg = state.register
    idx = [reg.position(m) for m in anc_modes]
    groups: dict[tuple[int, ...], dict] = {}
    for pat, amp in state.terms.items():
        key = tuple(pat[k] for k in idx)
        groups.setdefault(key, {})[pat] = amp
    if len(groups) != 2:
        raise ContractViolation("ancilla is not a two-branch Bell pair")
    keys = sorted(groups)
    weights = [sum(abs(a) ** 2 for a in g.values()) for g in (groups[keys[0]], groups[keys[1]])]
    if any(abs(w - 0.5) > 1e-9 for w in weights):
        raise ContractViolation("ancilla branches are not balanced")
    vals = []
    for key in keys:
        o1 = sum(key[anc_modes.index(m)] for m in anc1.one_rails)
        o2 = sum(key[anc_modes.index(m)] for m in anc2.one_rails)
        z1 = sum(key[anc_modes.index(m)] for m in anc1.zero_rails)
        z2 = sum(key[anc_modes.index(m)] for m in anc2.zero_rails)
        if (z1, o1) not in ((1, 0), (0, 1)) or (z2, o2) not in ((1, 0), (0, 1)):
            raise ContractViolation("ancilla branch is not a valid encoding")
        vals.append((o1, o2))
    if set(vals) != {(0, 0), (1, 1)}:
        raise ContractViolation("ancilla is not correlated in the computational basis")
    # Conditional rest-states must agree in amplitude and phase.
    rests = []
    for key in keys:
        terms = {}
        for pat, amp in groups[key].items():
            rest = tuple(o for k, o in enumerate(pat) if k not in idx)
            terms[rest] = terms.get(rest, 0j) + amp
        rests.append(terms)
    for pat in set(rests[0]) | set(rests[1]):
        if abs(rests[0].get(pat, 0j) - rests[1].get(pat, 0j)) > 1e-9:
            raise ContractViolation("ancilla is entangled with the rest or has a relative phase")


def boosted_type_II_fusion(
    state: PureState,
    qubit_a: MultirailQubit,
    qubit_b: MultirailQubit,
    ancilla: tuple[MultirailQubit, MultirailQubit],
) -> list[HeraldOutcome]:
    """Bell-pair-assisted parity measurement consuming both qubits.

    All four photons are detected. Side counts classify the herald:
    (2, 2) heralds equal logical values, (3, 1)/(1, 3) opposite values,
    and (4, 0)/(0, 4) is the failure branch that reveals the qubits'
    computational value.
    """
    anc1, anc2 = ancilla
    qubits = (qubit_a, qubit_b, anc1, anc2)
    m = qubit_a.m
    if any(q.m != m for q in qubits):
        raise EncodingError("qubits and ancilla must share one rail count")
    _require_bell_ancilla(state, anc1, anc2)

    zero_side = tuple(mode for q in qubits for mode in q.zero_rails)
    one_side = tuple(mode for q in qubits for mode in q.one_rails)
    u = _power_of_two_hadamard(len(zero_side))
    evolved = apply_dense_unitary(state, zero_side, u)
    evolved = apply_dense_unitary(evolved, one_side, u)

    all_modes = zero_side + one_side
    zero_set = set(zero_side)
    outcomes = []
    for br in measure_modes_exact(evolved, all_modes):
        counts = {mode: n for mode, n in zip(br.modes, br.pattern)}
        n_zero = sum(n for mode, n in counts.items() if mode in zero_set)
        n_one = sum(br.pattern) - n_zero
        if n_zero + n_one != 4:
            cls = invalid()
        elif (n_zero, n_one) == (2, 2):
            cls = success(TAG_SAME_PARITY)
        elif (n_zero, n_one) in ((3, 1), (1, 3)):
            cls = success(TAG_OPPOSITE_PARITY)
        else:
            revealed = 0 if n_zero == 4 else 1
            cls = failure(TAG_BAD_COUNT, revealed=revealed)
        outcomes.append(HeraldOutcome(br.modes, br.pattern, cls, br.probability, br.post_state))
    return outcomes


def boosted_type_II_spec() -> InterferometerSpec:
    """Fixed 8-mode network: rail sorting permutation plus per-side erasure.

    Mode layout: (A0, A1, B0, B1, C0, C1, D0, D1) with C, D the ancilla
    pair. Zero rails sort to modes 0..3, one rails to 4..7, then each side
    passes a 4-mode generalized Hadamard.
    """
    sigma = (0, 4, 1, 5, 2, 6, 3, 7)
    prims = [Permutation(sigma)]
    prims.extend(hadamard_couplers([0, 1, 2, 3]))
    prims.extend(hadamard_couplers([4, 5, 6, 7]))
    return InterferometerSpec(8, 1, tuple(prims))
