"""Synchronous-round network protocol with a simulated central controller.

Rounds: source heralds -> per-node generator runs -> herald reports ->
controller classification, survivor selection and block commands ->
passive multiplexing -> node-local fusion -> measurement commands ->
outcome reports -> controller collation.

The controller is purely classical: it sees only transcript messages plus
the static circuit layout, tracks each pair's 2x2 logical amplitude
matrix, and collates raw clicks into frame-corrected logical outcomes.
Every run is deterministic for a fixed seed, and a transcript replays to
identical controller decisions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ..errors import ScenarioError
from ..components.bsg import (
    BSG_DETECTORS,
    BSG_PORTS,
    herald_logical_matrix,
    node_local_generator_spec,
)
from ..fock import (
    Mode,
    PureState,
    block_modes,
    combine,
    embed_state,
    lattice_register,
    make_state,
    register,
    relabel_modes,
    vacuum_state,
)
from ..herald import TAG_EVEN_PARITY, TAG_ODD_PARITY, TAG_WRONG_CLICKS, Classification, failure
from ..multirail import MultirailQubit
from ..optics import apply_dense_unitary, apply_spec, uniform_spread_matrix
from .network import (
    NodeLayout,
    apply_node_phase,
    classify_fusion_counts,
    dna_logical_x_measure,
    dna_logical_z_measure,
    dna_type_II_fusion,
)


def pump_delay_schedule(attempts: int, per_attempt_latency: int) -> list[int]:
    """Fixed output delays aligning all possible pump-blocked successes.

    Attempt i fires only if attempts 0..i-1 failed; delaying its output by
    (attempts-1-i) * latency puts every potential success on one clock
    edge, so only the classical pump is ever switched.
    """
    if attempts < 1:
        raise ScenarioError("need at least one attempt")
    return [(attempts - 1 - i) * per_attempt_latency for i in range(attempts)]


def nested_pump_delays(levels: Sequence[tuple[int, int]]) -> int:
    """Total alignment delay when pump-blocked stages nest: per-level maxima add."""
    return sum(max(pump_delay_schedule(m, lat)) for m, lat in levels)


@dataclass(frozen=True)
class GroupConfig:
    """One Bell-pair production group: sources and generator attempts."""

    source_p: float = 1.0
    bsg_attempts: int = 1
    generator: str = "bell"


@dataclass(frozen=True)
class ProtocolScenario:
    nodes: int = 2
    groups: tuple[GroupConfig, ...] = (GroupConfig(),)
    fusion_plan: tuple[tuple[int, int], ...] = ()
    measurements: tuple[tuple[str, str], ...] = ()
    node_phases: tuple[float, ...] | None = None
    # Sub-node perturbation (group, node, rail, phi) on one surviving rail
    # mode before measurement; contrast knob for the phase-stability claim.
    mode_phase: tuple[int, int, int, float] | None = None

    def validate(self) -> None:
        n = self.nodes
        if n < 1:
            raise ScenarioError("need at least one node")
        if not self.groups:
            raise ScenarioError("need at least one group")
        attempts = {g.bsg_attempts for g in self.groups}
        if len(attempts) != 1:
            raise ScenarioError("groups must share one attempt count")
        a = attempts.pop()
        if a < 1:
            raise ScenarioError("attempt count must be >= 1")
        if self.fusion_plan and a != 1:
            raise ScenarioError("fusion is implemented for single-attempt groups")
        if len(self.fusion_plan) > 1:
            raise ScenarioError("one fusion per run is supported")
        for ga, gb in self.fusion_plan:
            if not (0 <= ga < len(self.groups) and 0 <= gb < len(self.groups)) or ga == gb:
                raise ScenarioError("fusion plan indexes two distinct groups")
        labels = {lbl for lbl, _ in self.measurements}
        if len(labels) != len(self.measurements) or len(self.measurements) != 2:
            raise ScenarioError("exactly two distinct qubits must be measured")
        for lbl, basis in self.measurements:
            if basis not in ("X", "Z"):
                raise ScenarioError(f"unknown basis {basis!r}")
            if basis == "X":
                if a != 1:
                    raise ScenarioError("X measurement needs single-attempt groups")
                if n & (n - 1):
                    raise ScenarioError("X measurement needs a power-of-2 node count")
        if self.node_phases is not None and len(self.node_phases) != n:
            raise ScenarioError("need one phase per node")
        consumed = {f"g{ga}.q2" for ga, _ in self.fusion_plan}
        consumed |= {f"g{gb}.q1" for _, gb in self.fusion_plan}
        for lbl, _ in self.measurements:
            if lbl in consumed or not _parse_label(lbl, len(self.groups)):
                raise ScenarioError(f"cannot measure qubit {lbl!r}")


def _parse_label(label: str, n_groups: int) -> tuple[int, int] | None:
    try:
        g_part, q_part = label.split(".")
        g, q = int(g_part[1:]), int(q_part[1:])
    except (ValueError, IndexError):
        return None
    if g_part[0] != "g" or q_part[0] != "q" or not (0 <= g < n_groups) or q not in (1, 2):
        return None
    return g, q


def scenario_from_dict(data: dict) -> ProtocolScenario:
    """Build a scenario from nested key-value configuration data."""
    groups = tuple(
        GroupConfig(
            source_p=float(g.get("source_p", 1.0)),
            bsg_attempts=int(g.get("bsg_attempts", 1)),
            generator=str(g.get("generator", "bell")),
        )
        for g in data.get("groups", [{}])
    )
    fusion = tuple((int(a), int(b)) for a, b in data.get("fusion_plan", []))
    meas = tuple((str(k), str(v)) for k, v in data.get("measurements", {}).items())
    phases = data.get("node_phases")
    mode_phase = data.get("mode_phase")
    scenario = ProtocolScenario(
        nodes=int(data.get("nodes", 2)),
        groups=groups,
        fusion_plan=fusion,
        measurements=meas,
        node_phases=tuple(float(p) for p in phases) if phases is not None else None,
        mode_phase=tuple(mode_phase) if mode_phase is not None else None,
    )
    scenario.validate()
    return scenario


@dataclass(frozen=True)
class Message:
    round: int
    type: str
    node: int | None
    payload: dict[str, Any]

    def to_json(self) -> str:
        return json.dumps(
            {"round": self.round, "type": self.type, "node": self.node, "payload": self.payload},
            sort_keys=True,
        )


def _message(round_: int, type_: str, node: int | None, payload: dict[str, Any]) -> Message:
    """Messages hold only canonical JSON data, so objects logged live and
    objects parsed back from a transcript file compare equal."""
    return Message(round_, type_, node, json.loads(json.dumps(payload, sort_keys=True)))


@dataclass
class ProtocolTranscript:
    messages: list[Message] = field(default_factory=list)

    def log(self, round_: int, type_: str, node: int | None, **payload: Any) -> None:
        self.messages.append(_message(round_, type_, node, payload))

    def to_jsonl(self) -> str:
        return "\n".join(m.to_json() for m in self.messages) + "\n"

    @staticmethod
    def from_jsonl(text: str) -> "ProtocolTranscript":
        messages = []
        for line in text.strip().splitlines():
            raw = json.loads(line)
            messages.append(Message(raw["round"], raw["type"], raw["node"], raw["payload"]))
        return ProtocolTranscript(messages)

    def of_type(self, *types: str) -> list[Message]:
        return [m for m in self.messages if m.type in types]


CC_TYPES = ("cc-classify", "cc-select", "block", "cc-fusion", "measure-command", "cc-collate")


class CentralController:
    """Classical coordinator: classifies heralds, issues commands, collates.

    Consumes only transcript-visible data; maintains the 2x2 logical
    amplitude matrix of the tracked pair through generation and fusion.
    """

    def __init__(self, scenario: ProtocolScenario):
        self.scenario = scenario
        self.n = scenario.nodes
        self.spread = uniform_spread_matrix(self.n)
        self.group_matrix: dict[int, np.ndarray | None] = {}
        self.group_class: dict[int, Classification] = {}
        self.group_origins: dict[int, tuple[int, ...]] = {}
        self.pair: tuple[str, str] | None = None
        self.pair_matrix: np.ndarray | None = None

    # ---- generation stage ----

    def classify_attempt(
        self, group: int, origins: Sequence[int | None], pattern: Sequence[int]
    ) -> tuple[Classification, np.ndarray | None]:
        if any(j is None for j in origins):
            missing = [p for p, j in enumerate(origins) if j is None]
            return failure(TAG_WRONG_CLICKS, missing_inputs=tuple(missing)), None
        cluster = self.scenario.groups[group].generator == "cluster"
        return herald_logical_matrix(self.n, origins, pattern, cluster)

    def select_survivor(self, classes: Sequence[Classification]) -> int | None:
        for i, cls in enumerate(classes):
            if cls.is_success:
                return i
        return None

    # ---- fusion stage ----

    def _click_amplitude(self, origins: tuple[int, ...], value: int, rail_group: str, node: int) -> complex:
        """Single-photon amplitude for a fused-pair photon to click at a rail/node.

        The photon encoding logical `value` sits in its qubit's value rail
        with spread column `origins[value]`; the node-local coupler routes
        it onto two rail groups with the H sign convention.
        """
        j = origins[value]
        u = self.spread[node, j] / math.sqrt(2.0)
        return u

    def fusion_kraus(
        self,
        origins_a: tuple[int, ...],
        origins_b: tuple[int, ...],
        clicks: Sequence[tuple[str, int]],
    ) -> np.ndarray:
        """2x2 Kraus matrix K[a][b] = <clicks| couplers |a_A, b_B>."""

        def photon_amp(qubit: str, value: int, rail_group: str, node: int) -> complex:
            origins = origins_a if qubit == "a" else origins_b
            j = origins[value]
            base = self.spread[node, j] / math.sqrt(2.0)
            if qubit == "a" and value == 0:
                return base if rail_group in ("a0", "b1") else 0j
            if qubit == "a" and value == 1:
                return base if rail_group in ("a1", "b0") else 0j
            if qubit == "b" and value == 0:
                if rail_group == "a1":
                    return base
                if rail_group == "b0":
                    return -base
                return 0j
            if rail_group == "a0":
                return base
            if rail_group == "b1":
                return -base
            return 0j

        k = np.zeros((2, 2), dtype=complex)
        (g1, n1), (g2, n2) = clicks
        bunched = (g1, n1) == (g2, n2)
        for a in (0, 1):
            for b in (0, 1):
                amp = photon_amp("a", a, g1, n1) * photon_amp("b", b, g2, n2)
                if not bunched:
                    amp += photon_amp("a", a, g2, n2) * photon_amp("b", b, g1, n1)
                else:
                    amp *= math.sqrt(2.0)
                k[a, b] = amp
        return k

    # ---- measurement stage ----

    def measurement_vector(
        self, origins: tuple[int, ...], basis: str, rail_group: int, node: int
    ) -> np.ndarray:
        """Kraus row w[v]: amplitude for logical v to produce this click."""
        w = np.zeros(2, dtype=complex)
        if basis == "Z":
            v = rail_group
            w[v] = self.spread[node, origins[v]]
            return w
        for v in (0, 1):
            sign = -1.0 if (v == 1 and rail_group == 1) else 1.0
            w[v] = sign * self.spread[node, origins[v]] / math.sqrt(2.0)
        return w

    def collate_x(self, origins: tuple[int, ...], rail_group: int, node: int) -> int:
        """Logical X eigenvalue of the click's collapse direction."""
        w = self.measurement_vector(origins, "X", rail_group, node)
        ratio = w[1] / w[0]
        if abs(ratio - 1) < 1e-9:
            return 1
        if abs(ratio + 1) < 1e-9:
            return -1
        raise ScenarioError("collapse direction is not an X eigenvector")

    def pair_correction(self) -> tuple[str, int] | None:
        """(kind, sign) of the tracked pair matrix: diagonal or antidiagonal."""
        m = self.pair_matrix
        if m is None:
            return None
        diag = abs(m[0, 0]) > 1e-12 and abs(m[1, 1]) > 1e-12
        anti = abs(m[0, 1]) > 1e-12 and abs(m[1, 0]) > 1e-12
        if diag and not anti:
            ratio = m[1, 1] / m[0, 0]
        elif anti and not diag:
            ratio = m[1, 0] / m[0, 1]
        else:
            return None
        if abs(ratio - 1) < 1e-9:
            return ("diag" if diag else "anti", 1)
        if abs(ratio + 1) < 1e-9:
            return ("diag" if diag else "anti", -1)
        return None

    def collate_joint(
        self,
        outcomes: Sequence[tuple[str, str, dict]],
    ) -> dict[str, Any]:
        """Frame-corrected logical values for the two measured qubits.

        `outcomes` holds (label, basis, raw) with raw fields tag/node/group.
        ZZ agreement flips when the pair matrix is antidiagonal; the XX
        product is multiplied by the known h-entry signs at the click
        nodes and by the pair matrix's eigensign.
        """
        per_qubit: dict[str, Any] = {}
        values = []
        bases = []
        for label, basis, raw in outcomes:
            bases.append(basis)
            if raw["tag"] in ("lost", "invalid-encoding"):
                per_qubit[label] = raw["tag"]
                values.append(None)
                continue
            origins = self.qubit_origins(label)
            if basis == "Z":
                val = 0 if raw["tag"] == "z-zero" else 1
                per_qubit[label] = f"Z{val}"
                values.append(val)
            else:
                group = 0 if raw["tag"] == "x-plus" else 1
                val = self.collate_x(origins, group, raw["node"])
                per_qubit[label] = f"X{'+' if val > 0 else '-'}"
                values.append(val)
        result: dict[str, Any] = {"qubits": per_qubit}
        corr = self.pair_correction()
        if None not in values and corr is not None:
            kind, sign = corr
            if bases == ["Z", "Z"]:
                agree = values[0] == values[1]
                result["zz_agree"] = agree if kind == "diag" else not agree
            elif bases == ["X", "X"]:
                result["xx_product"] = values[0] * values[1] * sign
        return result

    def qubit_origins(self, label: str) -> tuple[int, int]:
        g, q = _parse_label(label, len(self.scenario.groups))
        origins = self.group_origins[g]
        if q == 1:
            return (origins[0], origins[1])
        return (origins[2], origins[3])


@dataclass
class ProtocolResult:
    transcript: ProtocolTranscript
    distribution: dict[str, float]
    sampled: str
    cc_predictions: dict[str, float]
    pair_matrix: list[list[complex]] | None


def _attempt_register(n: int):
    return lattice_register(8 * n, 1)


# Above this node count one generation attempt is sampled from the product
# structure of the four independent photons instead of expanding the full
# joint state (35^4 terms at 7 nodes); both paths are exact and are
# cross-checked against each other in the tests.
FULL_STATE_NODE_CAP = 4


def _add_photon(terms: dict, vector: np.ndarray) -> dict:
    """Apply a creation operator with the given mode amplitudes."""
    out: dict[tuple[int, ...], complex] = {}
    support = np.nonzero(np.abs(vector) > 1e-14)[0]
    for pat, amp in terms.items():
        for m in support:
            new = list(pat)
            new[m] += 1
            key = tuple(new)
            out[key] = out.get(key, 0j) + amp * vector[m] * math.sqrt(new[m])
    return out


def _sample_attempt_engine(
    n: int,
    origins: Sequence[int | None],
    cluster: bool,
    node_phases: Sequence[float] | None,
    rng: np.random.Generator,
) -> tuple[tuple[int, ...], PureState]:
    """One generation attempt through the full sparse engine."""
    from ..fock import sample_measure

    reg = _attempt_register(n)
    spread_n = uniform_spread_matrix(n)
    photons = [Mode(8 * j + port, 0) for port, j in zip(BSG_PORTS, origins) if j is not None]
    state = make_state(reg, photons)
    for port, j in zip(BSG_PORTS, origins):
        if j is not None and n > 1:
            rail = [Mode(8 * node + port, 0) for node in range(n)]
            state = apply_dense_unitary(state, rail, spread_n)
    layout = NodeLayout(n, 8)
    if node_phases is not None:
        for node, theta in enumerate(node_phases):
            state = apply_node_phase(state, layout, node, theta)
    state = apply_spec(state, node_local_generator_spec(n, cluster))
    detectors = [Mode(8 * node + d, 0) for node in range(n) for d in BSG_DETECTORS]
    return sample_measure(state, detectors, rng)


def _sample_attempt_product(
    n: int,
    origins: Sequence[int | None],
    cluster: bool,
    node_phases: Sequence[float] | None,
    rng: np.random.Generator,
) -> tuple[tuple[int, ...], PureState]:
    """Exact detector sampling via the photons' independent transfer vectors.

    Each input photon splits between its output rail (amplitudes beta over
    nodes) and the erased detector arms (amplitudes alpha); detector
    patterns take coherent contributions from every detected subset, while
    surviving photons keep their independent spreads per subset.
    """
    from ..components.bsg import CLUSTER_HERALD_UNITARY
    from ..optics import hadamard_matrix

    spread = uniform_spread_matrix(n)
    herald = CLUSTER_HERALD_UNITARY if cluster else hadamard_matrix(2)
    phases = np.ones(n, dtype=complex)
    if node_phases is not None:
        phases = np.exp(1j * np.asarray(node_phases))
    photons = [p for p, j in zip(BSG_PORTS, origins) if j is not None]
    alphas = {}
    betas = {}
    n_det = 4 * n
    for port, j in zip(BSG_PORTS, origins):
        if j is None:
            continue
        alpha = np.zeros(n_det, dtype=complex)
        for node in range(n):
            for arm in range(4):
                alpha[node * 4 + arm] = (
                    spread[node, j] * herald[arm, port] * phases[node] / math.sqrt(2.0)
                )
        alphas[port] = alpha
        beta = np.zeros(n, dtype=complex)
        for node in range(n):
            beta[node] = spread[node, j] * phases[node] / math.sqrt(2.0)
        betas[port] = beta

    import itertools as _it

    pattern_amp: dict[tuple[int, ...], dict[frozenset, complex]] = {}
    subset_norm: dict[frozenset, float] = {}
    for size in range(len(photons) + 1):
        for subset in _it.combinations(photons, size):
            key = frozenset(subset)
            terms = {tuple([0] * n_det): 1.0 + 0j}
            for p in subset:
                terms = _add_photon(terms, alphas[p])
            out_norm = (0.5) ** (len(photons) - size)
            subset_norm[key] = out_norm
            for pat, amp in terms.items():
                pattern_amp.setdefault(pat, {})[key] = amp

    patterns = sorted(pattern_amp)
    probs = np.array(
        [
            sum(abs(a) ** 2 * subset_norm[s] for s, a in pattern_amp[pat].items())
            for pat in patterns
        ]
    )
    pick = int(rng.choice(len(patterns), p=probs / probs.sum()))
    pattern = patterns[pick]

    # Conditional output state: per contributing subset, the survivors keep
    # their independent node spreads.
    out_reg = lattice_register(8 * n, 1).without(
        [Mode(8 * node + 4 + arm, 0) for node in range(n) for arm in range(4)]
    )
    terms: dict[tuple[int, ...], complex] = {}
    for subset, amp in pattern_amp[pattern].items():
        survivors = [p for p in photons if p not in subset]
        partial = {tuple([0] * len(out_reg)): amp}
        for p in survivors:
            vec = np.zeros(len(out_reg), dtype=complex)
            for node in range(n):
                vec[out_reg.position(Mode(8 * node + p, 0))] = betas[p][node]
            partial = _add_photon(partial, vec)
        for pat, a in partial.items():
            terms[pat] = terms.get(pat, 0j) + a
    post = PureState(out_reg, terms).normalized()
    return tuple(pattern), post


def _group_width(n: int, a: int) -> int:
    return 4 * a * n


def _joint_width(n: int, a: int, n_groups: int) -> int:
    return n_groups * 4 * a * n


def _joint_mode(n_groups: int, a: int, node: int, group: int, rail: int, slot: int) -> Mode:
    return Mode(node * (n_groups * 4 * a) + group * 4 * a + rail * a + slot, 0)


def _joint_qubit(scenario: ProtocolScenario, group: int, q: int) -> MultirailQubit:
    a = scenario.groups[0].bsg_attempts
    n_groups = len(scenario.groups)
    zero_rail, one_rail = 2 * (q - 1), 2 * (q - 1) + 1
    zero = tuple(
        _joint_mode(n_groups, a, node, group, zero_rail, t)
        for node in range(scenario.nodes)
        for t in range(a)
    )
    one = tuple(
        _joint_mode(n_groups, a, node, group, one_rail, t)
        for node in range(scenario.nodes)
        for t in range(a)
    )
    return MultirailQubit(zero, one)


def run_protocol(scenario: ProtocolScenario, seed: int) -> ProtocolResult:
    """Simulate one protocol run; exact final distribution, sampled transcript."""
    scenario.validate()
    rng = np.random.default_rng(seed)
    n = scenario.nodes
    a = scenario.groups[0].bsg_attempts
    n_groups = len(scenario.groups)
    cc = CentralController(scenario)
    transcript = ProtocolTranscript()
    spread_n = uniform_spread_matrix(n)

    # Round 0-2 per group: sources, generator heralds, classification/blocking.
    group_states: dict[int, PureState | None] = {}
    for g, gconf in enumerate(scenario.groups):
        attempt_posts: list[PureState | None] = []
        attempt_classes: list[Classification] = []
        attempt_origins: list[tuple[int | None, ...]] = []
        attempt_mats: list[np.ndarray | None] = []
        for t in range(a):
            origins: list[int | None] = []
            for port in BSG_PORTS:
                fired = bool(rng.random() < gconf.source_p)
                j = int(rng.integers(n)) if fired else None
                origins.append(j)
                transcript.log(
                    0, "source-herald", None, group=g, attempt=t, port=port, origin=j
                )
            cluster = gconf.generator == "cluster"
            if n <= FULL_STATE_NODE_CAP:
                pattern, post = _sample_attempt_engine(
                    n, origins, cluster, scenario.node_phases, rng
                )
            else:
                pattern, post = _sample_attempt_product(
                    n, origins, cluster, scenario.node_phases, rng
                )
            for node in range(n):
                local = pattern[4 * node : 4 * node + 4]
                transcript.log(
                    1, "bsg-herald", node, group=g, attempt=t, clicks=list(local)
                )
            cls, mat = cc.classify_attempt(g, origins, pattern)
            transcript.log(
                2, "cc-classify", None, group=g, attempt=t,
                classification=cls.to_json(),
            )
            attempt_posts.append(post)
            attempt_classes.append(cls)
            attempt_origins.append(tuple(origins))
            attempt_mats.append(mat)

        survivor = cc.select_survivor(attempt_classes)
        transcript.log(2, "cc-select", None, group=g, survivor=survivor)
        cc.group_class[g] = attempt_classes[survivor] if survivor is not None else failure(TAG_WRONG_CLICKS)
        if survivor is not None:
            cc.group_origins[g] = attempt_origins[survivor]
            cc.group_matrix[g] = attempt_mats[survivor]
        else:
            cc.group_matrix[g] = None

        # Block commands for every non-surviving attempt's outputs.
        for t in range(a):
            if t == survivor:
                continue
            for node in range(n):
                modes = [[8 * node + r, 0] for r in BSG_PORTS]
                transcript.log(2, "block", node, group=g, attempt=t, modes=modes)
            if attempt_posts[t] is not None:
                branches = block_modes(
                    attempt_posts[t],
                    [Mode(8 * node + r, 0) for node in range(n) for r in BSG_PORTS],
                )
                assert len(branches) == 1

        # Multiplex: embed the survivor into the group lattice and spread.
        group_reg = lattice_register(_group_width(n, a), 1)
        if survivor is None:
            group_states[g] = vacuum_state(group_reg)
        else:
            mapping = {
                Mode(8 * node + r, 0): Mode(node * 4 * a + r * a + survivor, 0)
                for node in range(n)
                for r in BSG_PORTS
            }
            moved = relabel_modes(attempt_posts[survivor], mapping)
            moved = embed_state(moved, group_reg)
            if a > 1:
                u = uniform_spread_matrix(a)
                for node in range(n):
                    for r in BSG_PORTS:
                        slots = [Mode(node * 4 * a + r * a + t, 0) for t in range(a)]
                        moved = apply_dense_unitary(moved, slots, u)
            group_states[g] = moved

    # Assemble the joint register over the groups that are fused or
    # measured; other groups were produced, classified, and blocked but
    # never join the final state (their qubits stay at their nodes).
    active = sorted(
        {g for pair in scenario.fusion_plan for g in pair}
        | {_parse_label(lbl, n_groups)[0] for lbl, _ in scenario.measurements}
    )
    joint_reg = register(
        _joint_mode(n_groups, a, node, g, r, t)
        for g in active
        for node in range(n)
        for r in BSG_PORTS
        for t in range(a)
    )
    embedded = []
    for g in active:
        mapping = {
            Mode(node * 4 * a + r * a + t, 0): _joint_mode(n_groups, a, node, g, r, t)
            for node in range(n)
            for r in BSG_PORTS
            for t in range(a)
        }
        embedded.append(embed_state(relabel_modes(group_states[g], mapping), joint_reg))
    joint = combine(embedded)
    joint_layout = NodeLayout(n, n_groups * 4 * a)

    # Round 4-5: fusion.
    for ga, gb in scenario.fusion_plan:
        qa = _joint_qubit(scenario, ga, 2)
        qb = _joint_qubit(scenario, gb, 1)
        outcomes = dna_type_II_fusion(joint, qa, qb, joint_layout)
        probs = np.array([o.probability for o in outcomes])
        pick = int(rng.choice(len(outcomes), p=probs / probs.sum()))
        chosen = outcomes[pick]
        for node in range(n):
            local = [
                int(c)
                for m, c in zip(chosen.modes, chosen.pattern)
                if joint_layout.node_of(m) == node
            ]
            transcript.log(4, "fusion-herald", node, pair=[ga, gb], clicks=local)
        cls = chosen.classification
        joint = chosen.post_state
        joint = embed_state(joint, joint_reg)
        if cls.tag == TAG_EVEN_PARITY:
            k = cc.fusion_kraus(
                cc.qubit_origins(f"g{ga}.q2"), cc.qubit_origins(f"g{gb}.q1"), cls.get("clicks")
            )
        elif cls.tag == TAG_ODD_PARITY:
            k = np.zeros((2, 2), dtype=complex)
            va, vb = cls.get("revealed")
            k[va, vb] = 1.0
        else:
            k = None
        ma, mb = cc.group_matrix.get(ga), cc.group_matrix.get(gb)
        if k is not None and ma is not None and mb is not None:
            cc.pair = (f"g{ga}.q1", f"g{gb}.q2")
            cc.pair_matrix = ma @ k @ mb
        transcript.log(
            5, "cc-fusion", None, pair=[ga, gb], classification=cls.to_json(),
        )

    if not scenario.fusion_plan:
        # The tracked pair is the two measured qubits of one group.
        labels = [lbl for lbl, _ in scenario.measurements]
        gset = {_parse_label(lbl, n_groups)[0] for lbl in labels}
        if len(gset) == 1:
            g = gset.pop()
            cc.pair = tuple(sorted(labels))
            cc.pair_matrix = cc.group_matrix.get(g)

    # A sub-node phase perturbation: one rail mode, not a whole node block.
    # Applied before measurement, it breaks the intra-node phase stability
    # requirement and must show up in X statistics.
    if scenario.mode_phase is not None:
        from ..fock import apply_phase

        g_tgt, node_tgt, rail_tgt, phi = scenario.mode_phase
        joint = apply_phase(joint, _joint_mode(n_groups, a, node_tgt, g_tgt, rail_tgt, 0), phi)

    # Round 6-8: measurements, exact joint distribution, collation.
    measured = list(scenario.measurements)
    for lbl, basis in measured:
        transcript.log(6, "measure-command", None, qubit=lbl, basis=basis)

    def measure(state: PureState, label: str, basis: str):
        g, q = _parse_label(label, n_groups)
        qubit = _joint_qubit(scenario, g, q)
        qubit = MultirailQubit(
            tuple(m for m in qubit.zero_rails if m in state.register.modes),
            tuple(m for m in qubit.one_rails if m in state.register.modes),
        )
        if basis == "X":
            return dna_logical_x_measure(state, qubit, joint_layout)
        return dna_logical_z_measure(state, qubit, joint_layout)

    distribution: dict[str, float] = {}
    cc_pred: dict[str, float] = {}
    joint_outcomes: list[tuple[float, list, dict]] = []
    first = measure(joint, *measured[0])
    for o1 in first:
        second = measure(o1.post_state, *measured[1])
        for o2 in second:
            p = o1.probability * o2.probability
            if p < 1e-15:
                continue
            raws = []
            for (lbl, basis), out in zip(measured, (o1, o2)):
                raws.append(
                    (
                        lbl,
                        basis,
                        {"tag": out.classification.tag, "node": out.classification.get("node")},
                    )
                )
            collated = cc.collate_joint(raws)
            key = _outcome_key(collated)
            distribution[key] = distribution.get(key, 0.0) + p
            joint_outcomes.append((p, raws, collated))
            if cc.pair_matrix is not None and None not in [
                r[2].get("node") for r in raws
            ]:
                cc_pred[key] = cc_pred.get(key, 0.0) + _cc_probability(cc, measured, raws)

    total = sum(distribution.values())
    if total > 0:
        distribution = {k: v / total for k, v in distribution.items()}
    pred_total = sum(cc_pred.values())
    if pred_total > 0:
        cc_pred = {k: v / pred_total for k, v in cc_pred.items()}

    probs = np.array([p for p, _, _ in joint_outcomes])
    pick = int(rng.choice(len(joint_outcomes), p=probs / probs.sum()))
    _, raws, collated = joint_outcomes[pick]
    for lbl, basis, raw in raws:
        transcript.log(7, "outcome", raw.get("node"), qubit=lbl, tag=raw["tag"])
    transcript.log(8, "cc-collate", None, **_jsonable(collated))

    return ProtocolResult(
        transcript=transcript,
        distribution=distribution,
        sampled=_outcome_key(collated),
        cc_predictions=cc_pred,
        pair_matrix=None
        if cc.pair_matrix is None
        else [[complex(x) for x in row] for row in cc.pair_matrix],
    )


def _jsonable(collated: dict) -> dict:
    out = {}
    for k, v in collated.items():
        out[k] = v if not isinstance(v, dict) else dict(v)
    return out


def _outcome_key(collated: dict) -> str:
    parts = [f"{lbl}:{val}" for lbl, val in sorted(collated["qubits"].items())]
    if "zz_agree" in collated:
        parts.append(f"ZZ:{'agree' if collated['zz_agree'] else 'differ'}")
    if "xx_product" in collated:
        parts.append(f"XX:{'+' if collated['xx_product'] > 0 else '-'}")
    return ";".join(parts)


def _cc_probability(cc: CentralController, measured, raws) -> float:
    """Controller's classical prediction of a joint raw outcome probability."""
    vectors = []
    for (lbl, basis), (_, _, raw) in zip(measured, raws):
        origins = cc.qubit_origins(lbl)
        if basis == "Z":
            group = 0 if raw["tag"] == "z-zero" else 1
        else:
            group = 0 if raw["tag"] == "x-plus" else 1
        vectors.append(cc.measurement_vector(origins, basis, group, raw["node"]))
    m = cc.pair_matrix
    amp = vectors[0] @ m @ vectors[1]
    return float(abs(amp) ** 2)


def _pattern_from_messages(transcript: ProtocolTranscript, group: int, attempt: int, n: int):
    locals_ = {}
    for msg in transcript.of_type("bsg-herald"):
        if msg.payload["group"] == group and msg.payload["attempt"] == attempt:
            locals_[msg.node] = msg.payload["clicks"]
    return tuple(c for node in range(n) for c in locals_[node])


def replay_transcript(scenario: ProtocolScenario, transcript: ProtocolTranscript) -> list[Message]:
    """Re-derive every controller decision from the recorded reports.

    Returns the controller messages a fresh replay produces; they must be
    identical to the recorded ones.
    """
    scenario.validate()
    cc = CentralController(scenario)
    n = scenario.nodes
    a = scenario.groups[0].bsg_attempts
    out: list[Message] = []
    origins: dict[tuple[int, int, int], int | None] = {}
    for msg in transcript.of_type("source-herald"):
        origins[(msg.payload["group"], msg.payload["attempt"], msg.payload["port"])] = msg.payload[
            "origin"
        ]
    for g in range(len(scenario.groups)):
        classes = []
        group_origins = []
        for t in range(a):
            ori = tuple(origins[(g, t, port)] for port in BSG_PORTS)
            pattern = _pattern_from_messages(transcript, g, t, n)
            cls, mat = cc.classify_attempt(g, ori, pattern)
            out.append(
                _message(2, "cc-classify", None, {"group": g, "attempt": t, "classification": cls.to_json()})
            )
            classes.append(cls)
            group_origins.append(ori)
        survivor = cc.select_survivor(classes)
        out.append(_message(2, "cc-select", None, {"group": g, "survivor": survivor}))
        if survivor is not None:
            cc.group_origins[g] = group_origins[survivor]
            cc.group_matrix[g] = cc.classify_attempt(
                g, group_origins[survivor], _pattern_from_messages(transcript, g, survivor, n)
            )[1]
        for t in range(a):
            if t == survivor:
                continue
            for node in range(n):
                out.append(
                    _message(
                        2,
                        "block",
                        node,
                        {"group": g, "attempt": t, "modes": [[8 * node + r, 0] for r in BSG_PORTS]},
                    )
                )
    # Re-derive fusion classification from the per-node herald reports.
    n_groups = len(scenario.groups)
    for ga, gb in scenario.fusion_plan:
        qa = _joint_qubit(scenario, ga, 2)
        qb = _joint_qubit(scenario, gb, 1)
        layout = NodeLayout(n, n_groups * 4 * a)
        names = {}
        for label, qubit in (("a", qa), ("b", qb)):
            for m in qubit.zero_rails:
                names[m] = f"{label}0"
            for m in qubit.one_rails:
                names[m] = f"{label}1"
        clicks = []
        counts = {"top": 0, "mid": 0}
        for msg in transcript.of_type("fusion-herald"):
            node = msg.node
            node_modes = sorted(m for m in names if layout.node_of(m) == node)
            for mode, c in zip(node_modes, msg.payload["clicks"]):
                for _ in range(c):
                    clicks.append((names[mode], node))
                    side = "top" if names[mode] in ("a0", "b1") else "mid"
                    counts[side] += 1
        cls = classify_fusion_counts(counts["top"], counts["mid"])
        k = None
        if cls.tag == TAG_EVEN_PARITY:
            cls = Classification("success", TAG_EVEN_PARITY, (("clicks", tuple(clicks)),))
            k = cc.fusion_kraus(cc.qubit_origins(f"g{ga}.q2"), cc.qubit_origins(f"g{gb}.q1"), tuple(clicks))
        elif cls.tag == TAG_ODD_PARITY:
            k = np.zeros((2, 2), dtype=complex)
            va, vb = cls.get("revealed")
            k[va, vb] = 1.0
        ma, mb = cc.group_matrix.get(ga), cc.group_matrix.get(gb)
        if k is not None and ma is not None and mb is not None:
            cc.pair = (f"g{ga}.q1", f"g{gb}.q2")
            cc.pair_matrix = ma @ k @ mb
        out.append(_message(5, "cc-fusion", None, {"pair": [ga, gb], "classification": cls.to_json()}))

    if not scenario.fusion_plan:
        labels = [lbl for lbl, _ in scenario.measurements]
        gset = {_parse_label(lbl, n_groups)[0] for lbl in labels}
        if len(gset) == 1:
            cc.pair = tuple(sorted(labels))
            cc.pair_matrix = cc.group_matrix.get(gset.pop())

    for lbl, basis in scenario.measurements:
        out.append(_message(6, "measure-command", None, {"qubit": lbl, "basis": basis}))
    raws = []
    outcome_msgs = transcript.of_type("outcome")
    for (lbl, basis), msg in zip(scenario.measurements, outcome_msgs):
        raws.append((lbl, basis, {"tag": msg.payload["tag"], "node": msg.node}))
    if raws:
        collated = cc.collate_joint(raws)
        out.append(_message(8, "cc-collate", None, _jsonable(collated)))
    return out
