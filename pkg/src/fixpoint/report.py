"""Verification reports shared by the checkers."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional

from .spaces import Point, point_to_json, to_jsonable

HOLDS = "holds-on-samples"
REFUTED = "refuted"
EVIDENCE_NOTE = "sampled, not proved"


@dataclass(frozen=True)
class Counterexample:
    index: int
    point: Point
    lhs: Any
    rhs: Any
    margin: Any
    other: Optional[Point] = None
    witness: bool = False

    def to_dict(self):
        d = {
            "index": self.index,
            "y": point_to_json(self.point),
            "lhs": to_jsonable(self.lhs),
            "rhs": to_jsonable(self.rhs),
            "margin": to_jsonable(self.margin),
            "witness": self.witness,
        }
        if self.other is not None:
            d["x"] = point_to_json(self.other)
        return d


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of a sampled check.

    ``verdict`` is ``"refuted"`` exactly when a counterexample was found;
    the counterexample is the violating sample with the smallest index.
    """

    check: str
    spec: dict
    samples: int
    verdict: str
    worst_margin: Any
    counterexample: Optional[Counterexample] = None
    seed: Optional[int] = None
    annulus: Optional[tuple] = None
    extra: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    def to_dict(self):
        d = {
            "check": self.check,
            "spec": self.spec,
            "samples": self.samples,
            "verdict": self.verdict,
            "worst_margin": to_jsonable(self.worst_margin),
            "counterexample": None if self.counterexample is None else self.counterexample.to_dict(),
            "seed": self.seed,
            "annulus": None if self.annulus is None else [to_jsonable(a) for a in self.annulus],
            "note": EVIDENCE_NOTE,
        }
        if self.extra:
            d["extra"] = self.extra
        return d

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), sort_keys=True, **kw)


class MarginTracker:
    """Accumulate margins; remember the worst one and the first violation."""

    def __init__(self):
        self.count = 0
        self.worst = None
        self.first = None

    def add(self, margin, threshold, make_counterexample):
        if self.worst is None or margin < self.worst:
            self.worst = margin
        if self.first is None and margin < -threshold:
            self.first = make_counterexample()
        self.count += 1

    @property
    def verdict(self):
        return REFUTED if self.first is not None else HOLDS
