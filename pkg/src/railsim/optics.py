"""Passive interferometers: primitives, compilation, application, oracles.

An interferometer spec is an ordered list of primitives over a
(spatial width x timebin window) lattice:

* ``Coupler(i, j, u)``   -- 2x2 unitary between spatial modes i, j, applied
                            independently at every timebin,
* ``PhaseShift(s, phi)`` -- phase on spatial mode s at every timebin,
* ``Delay(s, n)``        -- shift all photons in spatial mode s by +n timebins,
* ``Permutation(sigma)`` -- rewiring of spatial modes,
* ``Block(modes, u)``    -- dense unitary over a listed set of spatial modes,
                            for elements with no 2-mode factorization here
                            (steering matrices, non-power-of-2 uniform spreads).

``spec_to_matrix`` gives the single-photon transfer matrix on the lattice;
``permanent_amplitude`` is an independent multiphoton oracle (Ryser).
A photon delayed past the window is a hard error, never a wraparound.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DelayOverflow, InvalidCoupler, RegisterMismatch
from .fock import (
    ATOL,
    EPS_DROP,
    MAX_PHOTONS,
    Mode,
    Pattern,
    PureState,
    apply_phase,
    apply_two_mode,
    lattice_register,
)

HADAMARD_2 = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def is_unitary(u: np.ndarray, atol: float = ATOL) -> bool:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.abs(u @ u.conj().T - np.eye(u.shape[0])).max() <= atol)


def hadamard_matrix(k: int) -> np.ndarray:
    """k-fold tensor power of the 2x2 Hadamard; entries +-2^(-k/2)."""
    if not 0 <= k <= 7:
        raise ValueError("hadamard_matrix supports 0 <= k <= 7")
    out = np.array([[1.0 + 0j]])
    for _ in range(k):
        out = np.kron(HADAMARD_2, out)
    return out


def dft_matrix(d: int) -> np.ndarray:
    """Discrete Fourier transform: the generic uniform-magnitude spreader."""
    j, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return np.exp(2j * np.pi * j * k / d) / math.sqrt(d)


def uniform_spread_matrix(d: int) -> np.ndarray:
    """Uniform-magnitude d x d spreader: Hadamard power when d = 2^k, else DFT."""
    k = d.bit_length() - 1
    if d == 1 << k:
        return hadamard_matrix(k)
    return dft_matrix(d)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _mat_tuple(u: np.ndarray) -> tuple[tuple[complex, ...], ...]:
    return tuple(tuple(complex(x) for x in row) for row in np.asarray(u, dtype=complex))


@dataclass(frozen=True)
class Coupler:
    i: int
    j: int
    u: tuple[tuple[complex, ...], ...]

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.u, dtype=complex)


@dataclass(frozen=True)
class PhaseShift:
    spatial: int
    phi: float


@dataclass(frozen=True)
class Delay:
    spatial: int
    bins: int


@dataclass(frozen=True)
class Permutation:
    sigma: tuple[int, ...]


@dataclass(frozen=True)
class Block:
    modes: tuple[int, ...]
    u: tuple[tuple[complex, ...], ...]

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.u, dtype=complex)


Primitive = Union[Coupler, PhaseShift, Delay, Permutation, Block]


def coupler(i: int, j: int, u: np.ndarray) -> Coupler:
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u) or u.shape != (2, 2):
        raise InvalidCoupler("coupler requires a 2x2 unitary")
    return Coupler(i, j, _mat_tuple(u))


def block(modes: Sequence[int], u: np.ndarray) -> Block:
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u) or u.shape[0] != len(modes):
        raise InvalidCoupler("block requires a unitary matching its mode count")
    return Block(tuple(modes), _mat_tuple(u))


@dataclass(frozen=True)
class InterferometerSpec:
    width: int
    window: int = 1
    primitives: tuple[Primitive, ...] = ()

    def __post_init__(self) -> None:
        for p in self.primitives:
            if isinstance(p, Coupler):
                bad = not (0 <= p.i < self.width and 0 <= p.j < self.width and p.i != p.j)
            elif isinstance(p, PhaseShift):
                bad = not 0 <= p.spatial < self.width
            elif isinstance(p, Delay):
                bad = not (0 <= p.spatial < self.width and p.bins >= 1)
            elif isinstance(p, Permutation):
                bad = sorted(p.sigma) != list(range(self.width))
            elif isinstance(p, Block):
                bad = len(set(p.modes)) != len(p.modes) or any(
                    not 0 <= m < self.width for m in p.modes
                )
            else:
                bad = True
            if bad:
                raise RegisterMismatch(f"primitive {p} out of bounds for spec")

    def lattice(self):
        return lattice_register(self.width, self.window)

    def then(self, *extra: Primitive) -> "InterferometerSpec":
        return InterferometerSpec(self.width, self.window, self.primitives + tuple(extra))


def hadamard_couplers(modes: Sequence[int]) -> list[Coupler]:
    """Butterfly network of 2x2 Hadamards realizing H^(x)k on `modes`.

    Layer l couples index pairs differing in bit l (low bit first); depth is
    log2(len(modes)) and the coupler count is k * 2^(k-1).
    """
    n = len(modes)
    k = n.bit_length() - 1
    if n != 1 << k:
        raise RegisterMismatch("hadamard network needs a power-of-2 mode count")
    out = []
    for layer in range(k):
        bit = 1 << layer
        for p in range(n):
            if not p & bit:
                out.append(coupler(modes[p], modes[p | bit], HADAMARD_2))
    return out


def compile_hadamard(k: int) -> InterferometerSpec:
    """Log-depth compilation of the 2^k-mode generalized Hadamard."""
    if k < 1:
        raise ValueError("compile_hadamard requires k >= 1")
    return InterferometerSpec(1 << k, 1, tuple(hadamard_couplers(list(range(1 << k)))))


def spec_depth(spec: InterferometerSpec) -> int:
    """Longest chain of couplers/blocks seen by any single spatial mode."""
    depth = [0] * spec.width
    for p in spec.primitives:
        if isinstance(p, Coupler):
            d = max(depth[p.i], depth[p.j]) + 1
            depth[p.i] = depth[p.j] = d
        elif isinstance(p, Block):
            d = max(depth[m] for m in p.modes) + 1
            for m in p.modes:
                depth[m] = d
        elif isinstance(p, Permutation):
            depth = [depth[p.sigma.index(s)] for s in range(spec.width)]
    return max(depth) if depth else 0


def _lat_index(spec: InterferometerSpec, spatial: int, timebin: int) -> int:
    return spatial * spec.window + timebin


def spec_to_matrix(spec: InterferometerSpec) -> np.ndarray:
    """Single-photon transfer matrix over the (spatial x timebin) lattice.

    Lattice index order matches the canonical register: (spatial, timebin)
    lexicographic. Delay columns that would overflow the window map to zero,
    so the matrix is unitary only on the sublattice that cannot reach the
    window edge.
    """
    dim = spec.width * spec.window
    if dim > 128:
        raise RegisterMismatch("lattice exceeds the 128-mode cap")
    total = np.eye(dim, dtype=complex)
    for p in spec.primitives:
        m = np.eye(dim, dtype=complex)
        if isinstance(p, Coupler):
            u = p.matrix
            for t in range(spec.window):
                a, b = _lat_index(spec, p.i, t), _lat_index(spec, p.j, t)
                m[a, a], m[a, b] = u[0, 0], u[0, 1]
                m[b, a], m[b, b] = u[1, 0], u[1, 1]
        elif isinstance(p, PhaseShift):
            for t in range(spec.window):
                a = _lat_index(spec, p.spatial, t)
                m[a, a] = cmath.exp(1j * p.phi)
        elif isinstance(p, Delay):
            for t in range(spec.window):
                a = _lat_index(spec, p.spatial, t)
                m[a, a] = 0.0
                if t + p.bins < spec.window:
                    m[_lat_index(spec, p.spatial, t + p.bins), a] = 1.0
        elif isinstance(p, Permutation):
            m = np.zeros((dim, dim), dtype=complex)
            for s in range(spec.width):
                for t in range(spec.window):
                    m[_lat_index(spec, p.sigma[s], t), _lat_index(spec, s, t)] = 1.0
        elif isinstance(p, Block):
            u = p.matrix
            for t in range(spec.window):
                idx = [_lat_index(spec, s, t) for s in p.modes]
                for r, row in enumerate(idx):
                    for c, col in enumerate(idx):
                        m[row, col] = u[r, c]
        total = m @ total
    return total


def apply_spec(state: PureState, spec: InterferometerSpec) -> PureState:
    """Run the state through every primitive in order.

    The state register must be the spec's full lattice.
    """
    if state.register != spec.lattice():
        raise RegisterMismatch("state register must match the spec lattice")
    for p in spec.primitives:
        if isinstance(p, Coupler):
            u = p.matrix
            for t in range(spec.window):
                state = apply_two_mode(state, Mode(p.i, t), Mode(p.j, t), u)
        elif isinstance(p, PhaseShift):
            for t in range(spec.window):
                state = apply_phase(state, Mode(p.spatial, t), p.phi)
        elif isinstance(p, Delay):
            state = _apply_delay(state, spec, p)
        elif isinstance(p, Permutation):
            state = _apply_permutation(state, spec, p)
        elif isinstance(p, Block):
            u = p.matrix
            for t in range(spec.window):
                state = apply_dense_unitary(state, [Mode(s, t) for s in p.modes], u)
    return state


def _apply_delay(state: PureState, spec: InterferometerSpec, d: Delay) -> PureState:
    src = [state.register.position(Mode(d.spatial, t)) for t in range(spec.window)]
    out: dict[Pattern, complex] = {}
    for pat, amp in state.terms.items():
        occ = list(pat)
        lane = [occ[k] for k in src]
        for t in range(spec.window - d.bins, spec.window):
            if lane[t]:
                raise DelayOverflow(
                    f"delay of {d.bins} bins on spatial {d.spatial} overflows the window"
                )
        shifted = [0] * d.bins + lane[: spec.window - d.bins]
        for k, o in zip(src, shifted):
            occ[k] = o
        out[tuple(occ)] = amp
    return PureState(state.register, out, _trusted=True)


def _apply_permutation(state: PureState, spec: InterferometerSpec, p: Permutation) -> PureState:
    perm = [
        state.register.position(Mode(p.sigma[m.spatial], m.timebin))
        for m in state.register.modes
    ]
    out: dict[Pattern, complex] = {}
    for pat, amp in state.terms.items():
        occ = [0] * len(pat)
        for k, o in zip(perm, pat):
            occ[k] = o
        out[tuple(occ)] = amp
    return PureState(state.register, out, _trusted=True)


def _compositions(n: int, d: int) -> list[tuple[int, ...]]:
    """All ways to split n photons over d output modes."""
    if d == 1:
        return [(n,)]
    out = []
    for first in range(n + 1):
        for rest in _compositions(n - first, d - 1):
            out.append((first,) + rest)
    return out


def apply_dense_unitary(state: PureState, modes: Sequence[Mode], u: np.ndarray) -> PureState:
    """Multiphoton evolution a_i^dag -> sum_j U[j][i] a_j^dag on `modes`.

    Implemented by multinomial expansion of each sparse term (tractable for
    the <= 8 photon cap); agrees with the permanent oracle on every pattern.
    """
    u = np.asarray(u, dtype=complex)
    d = len(modes)
    if u.shape != (d, d):
        raise RegisterMismatch("unitary dimension must match the mode count")
    if not is_unitary(u):
        raise InvalidCoupler("apply_dense_unitary requires a unitary matrix")
    idx = [state.register.position(m) for m in modes]
    if len(set(idx)) != d:
        raise RegisterMismatch("modes must be distinct")

    # Per-source-mode option tables, cached by (mode position, photon count).
    option_cache: dict[tuple[int, int], list[tuple[tuple[int, ...], complex]]] = {}

    def options(src: int, n: int) -> list[tuple[tuple[int, ...], complex]]:
        key = (src, n)
        opts = option_cache.get(key)
        if opts is None:
            opts = []
            for comp in _compositions(n, d):
                coeff = math.factorial(n)
                for c in comp:
                    coeff //= math.factorial(c)
                val = complex(coeff)
                for j, c in enumerate(comp):
                    if c:
                        val *= u[j, src] ** c
                if abs(val) > EPS_DROP:
                    opts.append((comp, val))
            option_cache[key] = opts
        return opts

    out: dict[Pattern, complex] = {}
    expansion_cache: dict[Pattern, list[tuple[Pattern, complex]]] = {}
    for pat, amp in state.terms.items():
        n_vec = tuple(pat[k] for k in idx)
        expansion = expansion_cache.get(n_vec)
        if expansion is None:
            acc: dict[tuple[int, ...], complex] = {(0,) * d: 1.0 + 0j}
            for src, n in enumerate(n_vec):
                if n == 0:
                    continue
                nxt: dict[tuple[int, ...], complex] = {}
                for partial, pval in acc.items():
                    for comp, cval in options(src, n):
                        key = tuple(a + b for a, b in zip(partial, comp))
                        nxt[key] = nxt.get(key, 0j) + pval * cval
                acc = nxt
            in_norm = math.sqrt(math.prod(math.factorial(n) for n in n_vec))
            expansion = []
            for occ, val in acc.items():
                out_norm = math.sqrt(math.prod(math.factorial(o) for o in occ))
                v = val * out_norm / in_norm
                if abs(v) > EPS_DROP:
                    expansion.append((occ, v))
            expansion_cache[n_vec] = expansion
        base = list(pat)
        for occ, v in expansion:
            for k, o in zip(idx, occ):
                base[k] = o
            key = tuple(base)
            out[key] = out.get(key, 0j) + amp * v
    return PureState(state.register, {p: v for p, v in out.items() if abs(v) > EPS_DROP}, _trusted=True)


def permanent(a: np.ndarray) -> complex:
    """Permanent via Ryser's formula with Gray-code subset updates."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0j
    row_sum = np.zeros(n, dtype=complex)
    total = 0j
    prev = 0
    sign = 1
    for g in range(1, 1 << n):
        gray = g ^ (g >> 1)
        changed = gray ^ prev
        col = changed.bit_length() - 1
        if gray & changed:
            row_sum += a[:, col]
        else:
            row_sum -= a[:, col]
        prev = gray
        sign = -sign
        total += sign * np.prod(row_sum)
    if n % 2:
        total = -total
    return complex(total)


def permanent_amplitude(u: np.ndarray, in_pattern: Sequence[int], out_pattern: Sequence[int]) -> complex:
    """<out| U |in> from the permanent of the row/column-repeated submatrix."""
    u = np.asarray(u, dtype=complex)
    n_in, n_out = sum(in_pattern), sum(out_pattern)
    if n_in != n_out:
        raise RegisterMismatch("photon totals must match")
    if n_in > MAX_PHOTONS:
        raise RegisterMismatch(f"permanent oracle capped at {MAX_PHOTONS} photons")
    if n_in == 0:
        return 1.0 + 0j
    cols = [i for i, n in enumerate(in_pattern) for _ in range(n)]
    rows = [j for j, n in enumerate(out_pattern) for _ in range(n)]
    sub = u[np.ix_(rows, cols)]
    norm = math.prod(math.factorial(n) for n in in_pattern) * math.prod(
        math.factorial(n) for n in out_pattern
    )
    return permanent(sub) / math.sqrt(norm)


def _cplx_pairs(u: tuple[tuple[complex, ...], ...]) -> list[list[float]]:
    return [[z.real, z.imag] for row in u for z in row]


def _pairs_to_matrix(pairs: list[list[float]], d: int) -> tuple[tuple[complex, ...], ...]:
    flat = [complex(re, im) for re, im in pairs]
    return tuple(tuple(flat[r * d + c] for c in range(d)) for r in range(d))


def primitives_to_json(spec: InterferometerSpec) -> list[dict]:
    out: list[dict] = []
    for p in spec.primitives:
        if isinstance(p, Coupler):
            out.append({"op": "coupler", "i": p.i, "j": p.j, "u": _cplx_pairs(p.u)})
        elif isinstance(p, PhaseShift):
            out.append({"op": "phase", "spatial": p.spatial, "phi": p.phi})
        elif isinstance(p, Delay):
            out.append({"op": "delay", "spatial": p.spatial, "n": p.bins})
        elif isinstance(p, Permutation):
            out.append({"op": "perm", "sigma": list(p.sigma)})
        elif isinstance(p, Block):
            out.append({"op": "block", "modes": list(p.modes), "u": _cplx_pairs(p.u)})
    return out


def spec_to_json(spec: InterferometerSpec) -> dict:
    return {"width": spec.width, "window": spec.window, "primitives": primitives_to_json(spec)}


def spec_from_json(data: dict) -> InterferometerSpec:
    prims: list[Primitive] = []
    for rec in data["primitives"]:
        op = rec["op"]
        if op == "coupler":
            prims.append(Coupler(rec["i"], rec["j"], _pairs_to_matrix(rec["u"], 2)))
        elif op == "phase":
            prims.append(PhaseShift(rec["spatial"], rec["phi"]))
        elif op == "delay":
            prims.append(Delay(rec["spatial"], rec["n"]))
        elif op == "perm":
            prims.append(Permutation(tuple(rec["sigma"])))
        elif op == "block":
            d = len(rec["modes"])
            prims.append(Block(tuple(rec["modes"]), _pairs_to_matrix(rec["u"], d)))
        else:
            raise RegisterMismatch(f"unknown primitive record {op!r}")
    return InterferometerSpec(data["width"], data["window"], tuple(prims))
