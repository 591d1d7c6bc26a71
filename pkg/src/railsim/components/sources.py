"""Stochastic single-photon sources over an a x b spatiotemporal grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..fock import Mode

EXACTLY_ONE = "exactly-one"
DUMP_PUMP = "dump-pump"


def source_efficiency(eta: float, m: int, strategy: str) -> float:
    """Probability that m pump cycles of an efficiency-eta source yield one photon.

    `exactly-one` fires all m cycles and succeeds only when a single photon
    appears: m * eta * (1-eta)^(m-1). `dump-pump` switches the pump off after
    the first success (equivalently filters extras): 1 - (1-eta)^m, which
    approaches 1 for large m.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    if m < 1:
        raise ValueError("m must be >= 1")
    if strategy == EXACTLY_ONE:
        return m * eta * (1.0 - eta) ** (m - 1)
    if strategy == DUMP_PUMP:
        return 1.0 - (1.0 - eta) ** m
    raise ValueError(f"unknown strategy {strategy!r}")


@dataclass(frozen=True)
class SourceSpec:
    """[a, b; p] source: with probability p, one photon lands uniformly on
    one mode of an a-spatial x b-temporal grid; otherwise all vacuum."""

    a: int
    b: int
    p: float

    def __post_init__(self) -> None:
        if self.a < 1 or self.b < 1:
            raise ValueError("grid dimensions must be >= 1")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("success probability must lie in [0, 1]")

    @property
    def modes(self) -> tuple[Mode, ...]:
        return tuple(Mode(s, t) for s in range(self.a) for t in range(self.b))


def sample_source(spec: SourceSpec, rng: int | np.random.Generator) -> Mode | None:
    """One firing: the occupied mode, or None on failure. Seed-deterministic."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    if rng.random() >= spec.p:
        return None
    return spec.modes[int(rng.integers(spec.a * spec.b))]
