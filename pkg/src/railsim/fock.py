"""Sparse few-photon Fock states over discrete spatiotemporal modes.

A mode is a (spatial, timebin) pair; a register is a lexicographically
sorted tuple of modes. States are sparse maps from occupation patterns
(one non-negative integer per register mode) to complex amplitudes.
Every operation is a pure function: inputs are never mutated.

Conventions
-----------
* |n> = (a^dag)^n / sqrt(n!) |vac>.
* A two-mode coupler U acts on creation operators as
  a_i^dag -> U[0][0] a_i^dag + U[1][0] a_j^dag and
  a_j^dag -> U[0][1] a_i^dag + U[1][1] a_j^dag,
  so the columns of U are the images of the input modes.
* Amplitudes with magnitude <= EPS_DROP are discarded to keep sparsity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import EncodingError, InvalidCoupler, RegisterMismatch

EPS_DROP = 1e-12
ATOL = 1e-9
MAX_MODES = 128
MAX_PHOTONS = 8


class Mode(NamedTuple):
    """One discrete spatiotemporal mode."""

    spatial: int
    timebin: int = 0


Pattern = tuple[int, ...]


@dataclass(frozen=True)
class ModeRegister:
    """Ordered mode list defining the occupation-vector layout."""

    modes: tuple[Mode, ...]

    def __post_init__(self) -> None:
        if len(self.modes) > MAX_MODES:
            raise RegisterMismatch(f"register has {len(self.modes)} modes, cap is {MAX_MODES}")
        if list(self.modes) != sorted(self.modes):
            raise RegisterMismatch("register modes must be sorted (spatial, timebin)")
        if len(set(self.modes)) != len(self.modes):
            raise RegisterMismatch("register modes must be unique")

    @cached_property
    def index(self) -> dict[Mode, int]:
        return {m: i for i, m in enumerate(self.modes)}

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self) -> Iterator[Mode]:
        return iter(self.modes)

    def __contains__(self, mode: Mode) -> bool:
        return mode in self.index

    def position(self, mode: Mode) -> int:
        try:
            return self.index[mode]
        except KeyError:
            raise RegisterMismatch(f"mode {mode} not in register") from None

    def without(self, removed: Iterable[Mode]) -> "ModeRegister":
        gone = set(removed)
        return ModeRegister(tuple(m for m in self.modes if m not in gone))


def register(modes: Iterable[Mode | tuple[int, int]]) -> ModeRegister:
    """Build a canonical register from any iterable of modes."""
    return ModeRegister(tuple(sorted(Mode(*m) for m in modes)))


def lattice_register(width: int, window: int = 1) -> ModeRegister:
    """Full (spatial x timebin) grid register."""
    return ModeRegister(tuple(Mode(s, t) for s in range(width) for t in range(window)))


class PureState:
    """Sparse pure state: register plus {pattern: amplitude} terms."""

    __slots__ = ("register", "terms")

    def __init__(self, reg: ModeRegister, terms: Mapping[Pattern, complex], _trusted: bool = False):
        if _trusted:
            clean = dict(terms)
        else:
            n = len(reg)
            clean = {}
            for pat, amp in terms.items():
                if len(pat) != n:
                    raise RegisterMismatch(f"pattern length {len(pat)} != register size {n}")
                if any(o < 0 for o in pat):
                    raise EncodingError("negative occupation")
                if sum(pat) > MAX_PHOTONS:
                    raise EncodingError(f"pattern holds {sum(pat)} photons, cap is {MAX_PHOTONS}")
                if abs(amp) > EPS_DROP:
                    clean[tuple(pat)] = complex(amp)
        self.register = reg
        self.terms = clean

    def norm_sq(self) -> float:
        return sum(abs(a) ** 2 for a in self.terms.values())

    def norm(self) -> float:
        return math.sqrt(self.norm_sq())

    def normalized(self) -> "PureState":
        n = self.norm()
        if n < EPS_DROP:
            raise EncodingError("cannot normalize a null state")
        return PureState(self.register, {p: a / n for p, a in self.terms.items()}, _trusted=True)

    def canonical(self) -> "PureState":
        """Fix global phase: the lexicographically first term becomes positive real."""
        if not self.terms:
            return self
        first = min(self.terms)
        phase = self.terms[first] / abs(self.terms[first])
        return PureState(self.register, {p: a / phase for p, a in self.terms.items()}, _trusted=True)

    def amplitude(self, pattern: Sequence[int]) -> complex:
        return self.terms.get(tuple(pattern), 0j)

    def sorted_terms(self) -> list[tuple[Pattern, complex]]:
        return sorted(self.terms.items())

    def total_photons(self) -> set[int]:
        return {sum(p) for p in self.terms}

    def occupation(self, mode: Mode, pattern: Pattern) -> int:
        return pattern[self.register.position(mode)]

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        parts = [f"{a:.4g}|{','.join(map(str, p))}>" for p, a in self.sorted_terms()[:6]]
        more = "..." if len(self.terms) > 6 else ""
        return f"PureState({' + '.join(parts)}{more})"

    def to_json(self) -> dict:
        return {
            "register": [[m.spatial, m.timebin] for m in self.register.modes],
            "terms": [
                {"pattern": list(p), "re": a.real, "im": a.imag} for p, a in self.sorted_terms()
            ],
        }

    @staticmethod
    def from_json(data: dict) -> "PureState":
        reg = ModeRegister(tuple(Mode(s, t) for s, t in data["register"]))
        terms = {tuple(t["pattern"]): complex(t["re"], t["im"]) for t in data["terms"]}
        return PureState(reg, terms)


def state_close(a: PureState, b: PureState, atol: float = ATOL, up_to_phase: bool = False) -> bool:
    """Term-by-term amplitude comparison on a shared register."""
    if a.register != b.register:
        return False
    if up_to_phase:
        a, b = a.canonical(), b.canonical()
    keys = set(a.terms) | set(b.terms)
    return all(abs(a.terms.get(k, 0j) - b.terms.get(k, 0j)) <= atol for k in keys)


def make_state(reg: ModeRegister, photons: Sequence[Mode]) -> PureState:
    """Single-term state with one photon per listed mode (repeats allowed)."""
    occ = [0] * len(reg)
    for m in photons:
        occ[reg.position(m)] += 1
    return PureState(reg, {tuple(occ): 1.0 + 0j})


def vacuum_state(reg: ModeRegister) -> PureState:
    return make_state(reg, [])


def superpose(states: Sequence[PureState], amps: Sequence[complex]) -> PureState:
    """Linear combination of states sharing one register (not normalized)."""
    reg = states[0].register
    out: dict[Pattern, complex] = {}
    for st, c in zip(states, amps):
        if st.register != reg:
            raise RegisterMismatch("superpose requires a common register")
        for p, a in st.terms.items():
            out[p] = out.get(p, 0j) + c * a
    return PureState(reg, {p: a for p, a in out.items() if abs(a) > EPS_DROP}, _trusted=True)


def _check_two_mode_unitary(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or np.abs(u @ u.conj().T - np.eye(2)).max() > ATOL:
        raise InvalidCoupler("coupler matrix is not a 2x2 unitary")
    return u


def apply_two_mode(state: PureState, i: Mode, j: Mode, u2: np.ndarray) -> PureState:
    """Evolve through a two-mode coupler. Photon number is conserved exactly."""
    if i == j:
        raise RegisterMismatch("coupler needs two distinct modes")
    u = _check_two_mode_unitary(u2)
    ii, jj = state.register.position(i), state.register.position(j)
    a, b = complex(u[0, 0]), complex(u[1, 0])
    c, d = complex(u[0, 1]), complex(u[1, 1])

    # Expansion of (a ai^ + b aj^)^ni (c ai^ + d aj^)^nj, cached per occupation pair.
    tables: dict[tuple[int, int], list[tuple[int, int, complex]]] = {}

    def table(ni: int, nj: int) -> list[tuple[int, int, complex]]:
        tab = tables.get((ni, nj))
        if tab is None:
            tab = []
            base = 1.0 / math.sqrt(math.factorial(ni) * math.factorial(nj))
            for p in range(ni + 1):
                for q in range(nj + 1):
                    coeff = (
                        math.comb(ni, p)
                        * math.comb(nj, q)
                        * a**p
                        * b ** (ni - p)
                        * c**q
                        * d ** (nj - q)
                    )
                    out_i, out_j = p + q, ni + nj - p - q
                    coeff *= base * math.sqrt(math.factorial(out_i) * math.factorial(out_j))
                    if abs(coeff) > EPS_DROP:
                        tab.append((out_i, out_j, coeff))
            tables[(ni, nj)] = tab
        return tab

    out: dict[Pattern, complex] = {}
    for pat, amp in state.terms.items():
        ni, nj = pat[ii], pat[jj]
        if ni == 0 and nj == 0:
            out[pat] = out.get(pat, 0j) + amp
            continue
        base = list(pat)
        for out_i, out_j, coeff in table(ni, nj):
            base[ii], base[jj] = out_i, out_j
            key = tuple(base)
            out[key] = out.get(key, 0j) + amp * coeff
    return PureState(state.register, {p: v for p, v in out.items() if abs(v) > EPS_DROP}, _trusted=True)


def apply_phase(state: PureState, mode: Mode, phi: float) -> PureState:
    """Multiply each term by exp(i * n * phi), n the occupation of `mode`."""
    k = state.register.position(mode)
    rot = [1.0 + 0j]
    for n in range(1, MAX_PHOTONS + 1):
        rot.append(complex(math.cos(n * phi), math.sin(n * phi)))
    return PureState(
        state.register,
        {p: a * rot[p[k]] for p, a in state.terms.items()},
        _trusted=True,
    )


@dataclass(frozen=True)
class MeasurementBranch:
    """One photon-number detection outcome on a set of measured modes."""

    modes: tuple[Mode, ...]
    pattern: Pattern
    probability: float
    post_state: PureState


def measure_modes_exact(state: PureState, measured: Iterable[Mode]) -> list[MeasurementBranch]:
    """Exact photon-number measurement on `measured`, one branch per outcome.

    Branch probabilities sum to the squared norm of the input; post states
    are normalized and live on the remaining modes.
    """
    meas = tuple(sorted(set(measured)))
    idx = [state.register.position(m) for m in meas]
    keep = [k for k in range(len(state.register)) if k not in set(idx)]
    rest_reg = state.register.without(meas)

    groups: dict[Pattern, dict[Pattern, complex]] = {}
    for pat, amp in state.terms.items():
        key = tuple(pat[k] for k in idx)
        rest = tuple(pat[k] for k in keep)
        groups.setdefault(key, {})[rest] = groups.get(key, {}).get(rest, 0j) + amp

    branches = []
    for key in sorted(groups):
        terms = groups[key]
        prob = sum(abs(a) ** 2 for a in terms.values())
        if prob <= EPS_DROP**2:
            continue
        scale = 1.0 / math.sqrt(prob)
        post = PureState(rest_reg, {p: a * scale for p, a in terms.items()}, _trusted=True)
        branches.append(MeasurementBranch(meas, key, prob, post))
    return branches


def sample_measure(
    state: PureState, measured: Iterable[Mode], rng: int | np.random.Generator
) -> tuple[Pattern, PureState]:
    """Sample one measurement branch; deterministic for a fixed seed."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    branches = measure_modes_exact(state, measured)
    probs = np.array([b.probability for b in branches])
    pick = int(rng.choice(len(branches), p=probs / probs.sum()))
    return branches[pick].pattern, branches[pick].post_state


@dataclass(frozen=True)
class BlockBranch:
    """Result of absorbing photons on blocked modes: outcome is discarded."""

    probability: float
    absorbed: int
    state: PureState


def block_modes(state: PureState, blocked: Iterable[Mode]) -> list[BlockBranch]:
    """Absorbing switch on `blocked`: number measurement with discarded outcome.

    Each returned state keeps the full register with blocked modes reset to
    vacuum. Branches whose conditional states coincide (the absorber's record
    is the only difference) are merged; with classically determined blocked
    occupation exactly one branch comes back. Branches with equal absorbed
    count but different conditional states stay separate, because the
    environment distinguishes them.
    """
    blk = tuple(sorted(set(blocked)))
    if not blk:
        return [BlockBranch(1.0, 0, state)]
    idx = [state.register.position(m) for m in blk]
    idx_set = set(idx)

    groups: dict[Pattern, dict[Pattern, complex]] = {}
    for pat, amp in state.terms.items():
        key = tuple(pat[k] for k in idx)
        cleared = tuple(0 if k in idx_set else o for k, o in enumerate(pat))
        groups.setdefault(key, {})[cleared] = groups.get(key, {}).get(cleared, 0j) + amp

    raw: list[tuple[int, float, PureState]] = []
    for key in sorted(groups):
        terms = groups[key]
        prob = sum(abs(a) ** 2 for a in terms.values())
        if prob <= EPS_DROP**2:
            continue
        scale = 1.0 / math.sqrt(prob)
        post = PureState(
            state.register, {p: a * scale for p, a in terms.items()}, _trusted=True
        )
        raw.append((sum(key), prob, post))

    merged: list[tuple[int, float, PureState]] = []
    for absorbed, prob, post in raw:
        for k, (m_abs, m_prob, m_post) in enumerate(merged):
            if m_abs == absorbed and state_close(post, m_post, up_to_phase=True):
                merged[k] = (m_abs, m_prob + prob, m_post)
                break
        else:
            merged.append((absorbed, prob, post))
    return [BlockBranch(p, n, st) for n, p, st in merged]


def inner_product(a: PureState, b: PureState) -> complex:
    """<a|b> on a common register."""
    if a.register != b.register:
        raise RegisterMismatch("inner product needs matching registers")
    small, large = (a.terms, b.terms) if len(a.terms) <= len(b.terms) else (b.terms, a.terms)
    acc = 0j
    if small is a.terms:
        for p, amp in small.items():
            other = large.get(p)
            if other is not None:
                acc += amp.conjugate() * other
    else:
        for p, amp in small.items():
            other = large.get(p)
            if other is not None:
                acc += other.conjugate() * amp
    return acc


def combine(states: Sequence[PureState]) -> PureState:
    """Product of states on one shared register with disjoint occupied modes.

    Each factor must keep the others' support in vacuum; occupations add.
    """
    if not states:
        raise RegisterMismatch("combine needs at least one state")
    reg = states[0].register
    terms: dict[Pattern, complex] = {(0,) * len(reg): 1.0 + 0j}
    for st in states:
        if st.register != reg:
            raise RegisterMismatch("combine requires a common register")
        nxt: dict[Pattern, complex] = {}
        for p1, a1 in terms.items():
            for p2, a2 in st.terms.items():
                key = tuple(x + y for x, y in zip(p1, p2))
                nxt[key] = nxt.get(key, 0j) + a1 * a2
        terms = nxt
    return PureState(reg, terms)


def tensor_product(a: PureState, b: PureState) -> PureState:
    """Combine states on disjoint registers into one joint state."""
    common = set(a.register.modes) & set(b.register.modes)
    if common:
        raise RegisterMismatch(f"registers overlap on {sorted(common)}")
    joint = register(list(a.register.modes) + list(b.register.modes))
    pos_a = [joint.position(m) for m in a.register.modes]
    pos_b = [joint.position(m) for m in b.register.modes]
    out: dict[Pattern, complex] = {}
    for pa, aa in a.terms.items():
        for pb, ab in b.terms.items():
            occ = [0] * len(joint)
            for k, o in zip(pos_a, pa):
                occ[k] = o
            for k, o in zip(pos_b, pb):
                occ[k] = o
            out[tuple(occ)] = aa * ab
    return PureState(joint, out)


def relabel_modes(state: PureState, mapping: Mapping[Mode, Mode]) -> PureState:
    """Move the state onto renamed modes (a bijection on the register)."""
    new_modes = [mapping.get(m, m) for m in state.register.modes]
    if len(set(new_modes)) != len(new_modes):
        raise RegisterMismatch("mode relabeling must be injective")
    new_reg = register(new_modes)
    perm = [new_reg.position(mapping.get(m, m)) for m in state.register.modes]
    out: dict[Pattern, complex] = {}
    for pat, amp in state.terms.items():
        occ = [0] * len(new_reg)
        for k, o in zip(perm, pat):
            occ[k] = o
        out[tuple(occ)] = amp
    return PureState(new_reg, out, _trusted=True)


def embed_state(state: PureState, target: ModeRegister) -> PureState:
    """View the state on a larger register; extra modes are vacuum."""
    pos = [target.position(m) for m in state.register.modes]
    out: dict[Pattern, complex] = {}
    for pat, amp in state.terms.items():
        occ = [0] * len(target)
        for k, o in zip(pos, pat):
            occ[k] = o
        out[tuple(occ)] = amp
    return PureState(target, out, _trusted=True)


def schmidt_coefficients(state: PureState, part: Iterable[Mode]) -> np.ndarray:
    """Schmidt coefficients (descending) across the `part` | rest mode cut."""
    part_set = set(part)
    idx_a = [k for k, m in enumerate(state.register.modes) if m in part_set]
    idx_b = [k for k, m in enumerate(state.register.modes) if m not in part_set]
    rows: dict[Pattern, int] = {}
    cols: dict[Pattern, int] = {}
    entries: dict[tuple[int, int], complex] = {}
    for pat, amp in state.terms.items():
        ra = tuple(pat[k] for k in idx_a)
        rb = tuple(pat[k] for k in idx_b)
        r = rows.setdefault(ra, len(rows))
        c = cols.setdefault(rb, len(cols))
        entries[(r, c)] = entries.get((r, c), 0j) + amp
    mat = np.zeros((len(rows), len(cols)), dtype=complex)
    for (r, c), v in entries.items():
        mat[r, c] = v
    return np.linalg.svd(mat, compute_uv=False)


def entanglement_entropy_bits(state: PureState, part: Iterable[Mode]) -> float:
    """Von Neumann entropy (in bits) of the reduced state on `part`."""
    sig = schmidt_coefficients(state, part)
    probs = sig**2
    probs = probs[probs > 1e-15]
    return float(-(probs * np.log2(probs)).sum())


def state_to_json_str(state: PureState) -> str:
    return json.dumps(state.to_json(), sort_keys=True)
