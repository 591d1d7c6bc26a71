"""Classification vocabulary for heralded outcomes.

Tags form a fixed, machine-comparable vocabulary shared by every
generator, fusion gate, and measurement in the package. `detail` carries
structured context (click node, collapse sign, revealed value) without
widening the tag set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

from .fock import Mode, Pattern, PureState

SUCCESS = "success"
FAILURE = "failure"
INVALID = "invalid"

# Bell/cluster generation.
TAG_BELL_PHI = "bell-phi"
TAG_BELL_PSI = "bell-psi"
TAG_BELL_OTHER = "bell-other"
TAG_CLUSTER = "cluster"
TAG_CLUSTER_FRAME = "cluster-frame"
TAG_NONSTANDARD = "nonstandard-encoding"
TAG_WRONG_CLICKS = "wrong-click-pattern"
TAG_SEPARABLE = "separable"
# Fusion.
TAG_FUSED = "fused"
TAG_BAD_COUNT = "0-or-2-photons"
TAG_SAME_PARITY = "same-parity"
TAG_OPPOSITE_PARITY = "opposite-parity"
TAG_EVEN_PARITY = "even-parity"
TAG_ODD_PARITY = "odd-parity"
TAG_ERASURE_REVEAL = "erasure-reveal"
# Single-qubit measurement.
TAG_X_PLUS = "x-plus"
TAG_X_MINUS = "x-minus"
TAG_Z_ZERO = "z-zero"
TAG_Z_ONE = "z-one"
TAG_Z_ZERO_OR_LOST = "z-zero-or-lost"
TAG_LOST = "lost"
TAG_INVALID_ENCODING = "invalid-encoding"


@dataclass(frozen=True)
class Classification:
    kind: str
    tag: str
    detail: tuple[tuple[str, Any], ...] = ()

    def get(self, key: str, default: Any = None) -> Any:
        for k, v in self.detail:
            if k == key:
                return v
        return default

    @property
    def is_success(self) -> bool:
        return self.kind == SUCCESS

    def to_json(self) -> dict:
        return {"kind": self.kind, "tag": self.tag, "detail": dict(self.detail)}


def _detail(kw: Mapping[str, Any]) -> tuple[tuple[str, Any], ...]:
    return tuple(sorted(kw.items()))


def success(tag: str, **kw: Any) -> Classification:
    return Classification(SUCCESS, tag, _detail(kw))


def failure(tag: str, **kw: Any) -> Classification:
    return Classification(FAILURE, tag, _detail(kw))


def invalid(tag: str = TAG_INVALID_ENCODING, **kw: Any) -> Classification:
    return Classification(INVALID, tag, _detail(kw))


@dataclass(frozen=True)
class HeraldOutcome:
    """One detection outcome: pattern, classical verdict, conditional state."""

    modes: tuple[Mode, ...]
    pattern: Pattern
    classification: Classification
    probability: float
    post_state: PureState

    def clicks(self) -> tuple[Mode, ...]:
        return tuple(m for m, n in zip(self.modes, self.pattern) for _ in range(n))


def outcome_probabilities_complete(outcomes: list[HeraldOutcome], atol: float = 1e-9) -> bool:
    return abs(sum(o.probability for o in outcomes) - 1.0) <= atol
