"""Nonexpansive mappings and the example catalog.

Catalog entries (addressable by name from the CLI):

``log_retreat``
    ``Tx = x - log x`` on ``[1, inf)``. Drops like ``log`` at infinity but
    its distance ratio tends to 1.
``shift_down_2``
    ``(Tx)(n) = max(0, x(n) - 2)`` on the c0 box. Drops by exactly 2 at
    infinity, never by more.
``identity_ray``
    ``Tx = x`` on ``[1, inf)``. Every point is fixed, nothing drops.
``affine_half``
    ``Tx = x/2 + 1`` on ``[0, inf)``. A genuine contraction with factor 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .errors import DomainError, UnknownMappingError
from .report import HOLDS, REFUTED, Counterexample, MarginTracker, VerificationReport
from .spaces import C0Box, Point, RealInterval, Scalar, Seq, Space, normalize, slack

WitnessGenerator = Callable[[float, float], Optional[Point]]


@dataclass(frozen=True)
class Mapping:
    """A named self-map of a space.

    ``witnesses`` maps a condition id (``"C1"`` .. ``"C6"``) to a generator
    ``(eta, param) -> point`` producing a point of norm above ``eta`` meant
    to violate that condition. ``param`` is the ratio ``r`` for ratio
    conditions and the drop ``lambda`` for drop conditions.
    """

    name: str
    domain: Space
    rule: Callable[[Point], Point] = field(repr=False)
    reference: str = ""
    witnesses: dict = field(default_factory=dict, repr=False)
    special_points: tuple = ()

    def apply(self, p: Point) -> Point:
        if not self.domain.contains(p):
            raise DomainError(f"{self.name}: point {p} is outside the domain")
        q = self.rule(p)
        if not self.domain.contains(q):
            raise DomainError(f"{self.name}: image {q} of {p} left the domain")
        return q

    __call__ = apply

    def witness(self, condition_id: str, eta, param) -> Optional[Point]:
        gen = self.witnesses.get(condition_id)
        if gen is None:
            return None
        return gen(eta, param)


def check_nonexpansive(m: Mapping, pairs: int = 10_000, seed: int = 42, radius_max=1000.0):
    """Sampled test of ``d(Tx, Ty) <= d(x, y)``.

    Half the pairs are independent draws, the other half pair each point
    with a nearby convex combination so that short distances get tested too.
    """
    if pairs < 1:
        raise ValueError("pairs must be >= 1")
    space = m.domain
    xs = space.sample_annulus(0, radius_max, pairs, seed)
    zs = space.sample_annulus(0, radius_max, pairs, seed + 1)
    tracker = MarginTracker()
    for i, (x, z) in enumerate(zip(xs, zs)):
        if i % 2:
            s = 2.0 ** -(1 + i % 40)
            y = space.snap(space.combine(1 - s, x, s, z))
        else:
            y = z
        tx, ty = m(x), m(y)
        rhs = space.distance(x, y)
        lhs = space.distance(tx, ty)
        margin = rhs - lhs
        tracker.add(
            margin,
            slack(lhs, rhs),
            lambda: Counterexample(i, y, lhs, rhs, margin, other=x),
        )
    return VerificationReport(
        check="nonexpansive",
        spec={"mapping": m.name},
        samples=tracker.count,
        verdict=tracker.verdict,
        worst_margin=tracker.worst,
        counterexample=tracker.first,
        seed=seed,
        annulus=(0, radius_max),
    )


# -- catalog ----------------------------------------------------------------


def _log_retreat(p):
    return Scalar(p.value - math.log(p.value))


def _log_ratio_witness(eta, r):
    """Smallest power-of-two multiple ``y`` above ``eta`` with ``1 - log(y)/(y-1) > r``."""
    y = max(2.0 * float(eta), 2.0)
    for _ in range(2000):
        if 1.0 - math.log(y) / (y - 1.0) > r:
            return Scalar(y)
        y *= 2.0
        if not math.isfinite(y):
            break
    return None


def _shift_down_2(p):
    return Seq._trusted({k: v - 2 for k, v in p.entries if v > 2})


def _spike_witness(eta, lam):
    """``n * e_n`` with ``n`` the smallest integer above ``eta`` (and ``n >= 2``)."""
    n = max(math.floor(eta) + 1, 2)
    return Seq({n: n})


def _identity(p):
    return p


def _ray_witness(eta, param):
    return Scalar(max(eta, 1) + 2)


def _affine_half(p):
    v = p.value
    half = v / 2 if isinstance(v, float) else Fraction(v) / 2
    return Scalar(normalize(half + 1))


LOG_RETREAT = Mapping(
    name="log_retreat",
    domain=RealInterval(1),
    rule=_log_retreat,
    reference="Tx = x - log(x) on [1, inf)",
    witnesses={"C1": _log_ratio_witness, "C2": _log_ratio_witness},
    special_points=(Scalar(1),),
)

SHIFT_DOWN_2 = Mapping(
    name="shift_down_2",
    domain=C0Box(),
    rule=_shift_down_2,
    reference="(Tx)(n) = max(0, x(n) - 2) on {x in c0 : 0 <= x(n) <= n}",
    witnesses={"C3": _spike_witness, "C4": _spike_witness, "C5": _spike_witness},
    special_points=(Seq(),),
)

IDENTITY_RAY = Mapping(
    name="identity_ray",
    domain=RealInterval(1),
    rule=_identity,
    reference="Tx = x on [1, inf)",
    witnesses={cid: _ray_witness for cid in ("C1", "C2", "C3", "C4", "C5")},
    special_points=(Scalar(1),),
)

AFFINE_HALF = Mapping(
    name="affine_half",
    domain=RealInterval(0),
    rule=_affine_half,
    reference="Tx = x/2 + 1 on [0, inf)",
    special_points=(Scalar(0), Scalar(2)),
)

CATALOG = {m.name: m for m in (LOG_RETREAT, SHIFT_DOWN_2, IDENTITY_RAY, AFFINE_HALF)}


def get_mapping(name: str) -> Mapping:
    try:
        return CATALOG[name]
    except KeyError:
        raise UnknownMappingError(
            f"unknown mapping {name!r}; choose from {', '.join(sorted(CATALOG))}"
        ) from None


__all__ = [
    "Mapping",
    "CATALOG",
    "get_mapping",
    "check_nonexpansive",
    "HOLDS",
    "REFUTED",
]
