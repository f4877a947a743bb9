"""The six asymptotic conditions on a nonexpansive mapping.

Each condition compares ``d(Tx, Ty)`` with ``d(x, y)`` for all ``y`` of
norm above a threshold ``eta``:

====  ==========  ===========================  ====================
id    form        inequality                   base point
====  ==========  ===========================  ====================
C1    ratio       ``<= r d(x1, y)``            every ``x1``
C2    ratio       ``<= r d(x0, y)``            one ``x0``
C3    drop        ``<= d(x1, y) - lam``        every ``x1``, every lam
C4    drop        ``<= d(x0, y) - lam``        one ``x0``, every lam
C5    drop        ``<= d(x1, y) - lam``        every ``x1``, one lam
C6    self_drop   ``<= d(x0, y) - d(x0,Tx0)``  one ``x0``
====  ==========  ===========================  ====================

"For all y" is only ever checked on samples plus registered witnesses;
a verdict of ``holds-on-samples`` is evidence, never a proof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import DerivationError, FixpointError
from .mappings import Mapping
from .report import HOLDS, REFUTED, Counterexample, MarginTracker, VerificationReport
from .spaces import Point, Seq, format_point, point_to_json, slack, to_jsonable

RATIO, DROP, SELF_DROP = "ratio", "drop", "self_drop"

FORMS = {"C1": RATIO, "C2": RATIO, "C3": DROP, "C4": DROP, "C5": DROP, "C6": SELF_DROP}
UNIVERSAL = frozenset({"C1", "C3", "C5"})


def default_radius_max(eta) -> float:
    return 1000.0 * max(float(eta), 1.0)


@dataclass(frozen=True)
class ConditionSpec:
    """One condition with concrete parameters.

    ``r`` is used by the ratio form, ``lam`` by the drop form. ``base`` is
    the point the inequality is anchored at; universally quantified
    conditions (C1, C3, C5) must be instantiated at a concrete base before
    verification. ``eta_schedule`` optionally maps a drop ``lam`` to a
    threshold, for C3/C4 where the threshold depends on ``lam``.
    """

    cid: str
    eta: float
    r: Optional[float] = None
    lam: Optional[float] = None
    base: Optional[Point] = None
    eta_schedule: Optional[Callable] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.cid not in FORMS:
            raise ValueError(f"unknown condition {self.cid!r}")
        if self.form == RATIO:
            if self.r is None or not 0 < self.r < 1:
                raise ValueError(f"{self.cid} needs r in (0, 1), got {self.r}")
        elif self.form == DROP:
            if self.lam is None or not self.lam > 0:
                raise ValueError(f"{self.cid} needs lambda > 0, got {self.lam}")
        if not self.eta > 0:
            raise ValueError(f"eta must be > 0, got {self.eta}")

    @property
    def form(self) -> str:
        return FORMS[self.cid]

    @property
    def param(self):
        return self.r if self.form == RATIO else self.lam

    def at(self, base: Point, eta=None) -> "ConditionSpec":
        return ConditionSpec(
            self.cid,
            self.eta if eta is None else eta,
            self.r,
            self.lam,
            base,
            self.eta_schedule,
        )

    def to_dict(self):
        return {
            "id": self.cid,
            "form": self.form,
            "r": to_jsonable(self.r) if self.r is not None else None,
            "lambda": to_jsonable(self.lam) if self.lam is not None else None,
            "eta": to_jsonable(self.eta),
            "base": None if self.base is None else point_to_json(self.base),
        }


def _sides(m: Mapping, spec: ConditionSpec, base: Point, y: Point, tb=None):
    """Return ``(lhs, rhs, margin)`` of the condition's inequality at ``y``."""
    d = m.domain.distance
    if tb is None:
        tb = m(base)
    ty = m(y)
    lhs = d(tb, ty)
    dist = d(base, y)
    if spec.form == RATIO:
        rhs = spec.r * dist
        margin = rhs - lhs
    elif spec.form == DROP:
        # subtract lam last so an exact equality dist == lhs yields exactly -lam
        margin = (dist - lhs) - spec.lam
        rhs = dist - spec.lam
    else:
        own = d(base, tb)
        margin = (dist - lhs) - own
        rhs = dist - own
    return lhs, rhs, margin


def pointwise_margin(m: Mapping, spec: ConditionSpec, base: Point, y: Point):
    """Right side minus left side of the inequality at ``y``; >= 0 means it holds."""
    return _sides(m, spec, base, y)[2]


def verify_condition(
    m: Mapping,
    spec: ConditionSpec,
    samples: int = 10_000,
    seed: int = 42,
    annulus=None,
    extra_slack=0,
) -> VerificationReport:
    """Check ``spec`` on sampled ``y`` with ``eta < ||y|| <= radius_max``.

    Registered witnesses for the condition are evaluated first, then the
    samples. ``annulus`` defaults to ``(spec.eta, 1000 * max(spec.eta, 1))``.
    """
    if spec.base is None:
        raise ValueError(f"{spec.cid} has no base point; instantiate it with spec.at(x)")
    base = spec.base
    space = m.domain
    eta, radius_max = annulus if annulus is not None else (spec.eta, default_radius_max(spec.eta))
    if eta < spec.eta:
        raise ValueError("annulus must lie beyond the condition's eta")

    points = []
    w = m.witness(spec.cid, eta, spec.param)
    if w is not None and space.contains(w) and space.norm(w) > eta:
        points.append((w, True))
    points.extend((y, False) for y in space.sample_annulus(eta, radius_max, samples, seed))

    tb = m(base)
    tracker = MarginTracker()
    for i, (y, is_witness) in enumerate(points):
        lhs, rhs, margin = _sides(m, spec, base, y, tb)
        tracker.add(
            margin,
            slack(lhs, rhs) + extra_slack,
            lambda: Counterexample(i, y, lhs, rhs, margin, witness=is_witness),
        )
    return VerificationReport(
        check=spec.cid,
        spec={"mapping": m.name, **spec.to_dict()},
        samples=tracker.count,
        verdict=tracker.verdict,
        worst_margin=tracker.worst,
        counterexample=tracker.first,
        seed=seed,
        annulus=(eta, radius_max),
    )


@dataclass
class UniversalReport:
    """A universally quantified condition checked at a finite set of bases."""

    cid: str
    reports: list

    @property
    def verdict(self):
        return HOLDS if all(r.holds for r in self.reports) else REFUTED

    @property
    def holds(self):
        return self.verdict == HOLDS

    @property
    def bases(self):
        return [r.spec["base"] for r in self.reports]

    def to_dict(self):
        return {
            "id": self.cid,
            "verdict": self.verdict,
            "bases": self.bases,
            "reports": [r.to_dict() for r in self.reports],
        }


def default_bases(m: Mapping, count: int = 8, seed: int = 42, radius=10.0) -> list:
    """Catalog special points plus ``count`` seeded domain samples."""
    return list(m.special_points) + m.domain.sample_annulus(0, radius, count, seed)


def verify_universal(
    m: Mapping,
    cid: str,
    param,
    eta_for: Callable[[Point], float],
    bases=None,
    samples: int = 10_000,
    seed: int = 42,
) -> UniversalReport:
    """Check a condition at every base point, each with its own threshold ``eta_for(base)``."""
    if bases is None:
        bases = default_bases(m, seed=seed)
    form = FORMS[cid]
    reports = []
    for i, b in enumerate(bases):
        eta = eta_for(b)
        kw = {"r": param} if form == RATIO else {"lam": param} if form == DROP else {}
        spec = ConditionSpec(cid, eta, base=b, **kw)
        reports.append(verify_condition(m, spec, samples=samples, seed=seed + i))
    return UniversalReport(cid, reports)


# -- derivations ------------------------------------------------------------


def derive_c1_from_c2(m: Mapping, r_prime, x0: Point, eta_prime, x1: Point):
    """Turn C2 data ``(r', x0, eta')`` into C1 data ``(r, eta)`` at ``x1``.

    ``r = (1 + r')/2`` and
    ``eta = max(eta', ||x1|| + (d(x1, x0) + d(Tx1, Tx0)) / (r - r'))``.
    """
    if not 0 < r_prime < 1:
        raise DerivationError(f"r' must be in (0, 1), got {r_prime}")
    space = m.domain
    r = (1 + r_prime) / 2
    spread = space.distance(x1, x0) + space.distance(m(x1), m(x0))
    eta = max(eta_prime, space.norm(x1) + spread / (r - r_prime))
    return r, eta


def derive_c4_from_c2(space, r_prime, x0: Point, eta_prime, lam):
    """Threshold beyond which the C2 premise forces a drop of ``lam`` at ``x0``.

    ``eta = max(eta', ||x0|| + lam / (1 - r'))``: beyond it
    ``d(x0, y) >= ||y|| - ||x0|| >= lam / (1 - r')``, so
    ``r' d(x0, y) <= d(x0, y) - lam``.
    """
    if not 0 < r_prime < 1:
        raise DerivationError(f"r' must be in (0, 1), got {r_prime}")
    if not lam > 0:
        raise DerivationError(f"lambda must be > 0, got {lam}")
    return max(eta_prime, space.norm(x0) + lam / (1 - r_prime))


def c4_schedule(space, r_prime, x0: Point, eta_prime) -> Callable:
    """The map ``lam -> derive_c4_from_c2(...)`` as a closed-form schedule."""
    return lambda lam: derive_c4_from_c2(space, r_prime, x0, eta_prime, lam)


def derive_c3_from_c4(m: Mapping, x0: Point, eta_schedule: Callable, x1: Point, lam):
    """Threshold for a drop of ``lam`` at ``x1`` from a C4 schedule at ``x0``.

    The drop needed at ``x0`` is inflated by ``d(x1, x0) + d(Tx1, Tx0)``,
    which the triangle inequality loses when moving the base to ``x1``.
    """
    if not lam > 0:
        raise DerivationError(f"lambda must be > 0, got {lam}")
    space = m.domain
    inflated = lam + space.distance(x1, x0) + space.distance(m(x1), m(x0))
    try:
        eta = eta_schedule(inflated)
    except FixpointError:
        raise
    except Exception as exc:
        raise DerivationError(f"eta schedule rejected lambda={inflated}: {exc}") from exc
    if eta is None or not (eta > 0 and math.isfinite(float(eta))):
        raise DerivationError(f"eta schedule returned {eta!r} for lambda={inflated}")
    return eta


@dataclass
class DerivedCheck:
    """A derived threshold, the premise instance it rests on, and its re-check."""

    eta: float
    premise: VerificationReport
    report: VerificationReport

    @property
    def premise_status(self) -> str:
        return "premise-verified" if self.premise.holds else "premise-refuted"

    @property
    def guaranteed(self) -> bool:
        return self.premise.holds


def derive_c3_checked(
    m: Mapping, x0: Point, eta_schedule: Callable, x1: Point, lam, samples=10_000, seed=42
) -> DerivedCheck:
    """:func:`derive_c3_from_c4` plus a sampled check of the C4 instance it uses.

    The C4 premise is checked at ``x0`` for the inflated drop, with the
    schedule's threshold; the derived C3 instance is checked at ``x1``.
    """
    space = m.domain
    inflated = lam + space.distance(x1, x0) + space.distance(m(x1), m(x0))
    eta = derive_c3_from_c4(m, x0, eta_schedule, x1, lam)
    premise = verify_condition(
        m, ConditionSpec("C4", eta_schedule(inflated), lam=inflated, base=x0), samples, seed
    )
    report = verify_condition(m, ConditionSpec("C3", eta, lam=lam, base=x1), samples, seed)
    return DerivedCheck(eta, premise, report)


# -- approximate fixed points -----------------------------------------------


def default_t_schedule(k_max: int = 20) -> list:
    return [2.0 ** -k for k in range(1, k_max + 1)]


@dataclass(frozen=True)
class ProbeStep:
    t: float
    residual: float
    identity_gap: float
    norm: float
    beyond_eta: bool
    iterations: int


@dataclass(frozen=True)
class ProbeResult:
    """Smallest residual ``||Ty_t - y_t||`` seen over the resolvent schedule."""

    d_estimate: float
    best_point: Point
    steps: tuple
    lam: float
    eta: float

    @property
    def below_lambda(self) -> bool:
        return self.d_estimate < self.lam

    def to_dict(self):
        return {
            "d_estimate": to_jsonable(self.d_estimate),
            "best_point": point_to_json(self.best_point),
            "lambda": to_jsonable(self.lam),
            "eta": to_jsonable(self.eta),
            "steps": [
                {
                    "t": s.t,
                    "residual": to_jsonable(s.residual),
                    "identity_gap": to_jsonable(s.identity_gap),
                    "norm": to_jsonable(s.norm),
                    "beyond_eta": s.beyond_eta,
                    "iterations": s.iterations,
                }
                for s in self.steps
            ],
        }


def residual_infimum_probe(
    m: Mapping, x1: Point, lam, eta, t_schedule=None, tol=1e-12, max_iter=100_000
) -> ProbeResult:
    """Estimate ``inf ||Tx - x||`` through the resolvents anchored at ``x1``.

    For each ``t`` the point ``y_t = (1 - t) T y_t + t x1`` is computed and
    its residual recorded, along with the gap in the identity
    ``||Ty_t - y_t|| = t ||Ty_t - x1||`` and whether ``||y_t|| > eta``.
    """
    from .solver import resolvent

    ts = default_t_schedule() if t_schedule is None else list(t_schedule)
    if any(not 0 < t < 1 for t in ts):
        raise ValueError("t values must lie in (0, 1)")
    if any(b >= a for a, b in zip(ts, ts[1:])):
        raise ValueError("t schedule must be decreasing")
    space = m.domain
    steps = []
    best = None
    for t in ts:
        y, trace = resolvent(m, x1, t, tol=tol, max_iter=max_iter)
        ty = m(y)
        res = space.distance(ty, y)
        gap = abs(res - t * space.distance(ty, x1))
        nrm = space.norm(y)
        steps.append(ProbeStep(t, res, gap, nrm, bool(nrm > eta), trace.iterations))
        if best is None or res < best[0]:
            best = (res, y)
    return ProbeResult(best[0], best[1], tuple(steps), lam, eta)


# -- asymptotic curves ------------------------------------------------------


@dataclass(frozen=True)
class CurvePoint:
    radius: float
    statistic: float
    samples: int


def _check_radii(m, x, radii, band_factor):
    if band_factor <= 1:
        raise ValueError("band_factor must be > 1")
    radii = list(radii)
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be increasing")
    nx = m.domain.norm(x)
    if any(r <= nx for r in radii):
        raise ValueError(f"radii must exceed ||x|| = {nx}")
    return radii


def _curve(m, x, radii, band_factor, samples, seed, stat, witness_ids, witness_param):
    radii = _check_radii(m, x, radii, band_factor)
    space = m.domain
    tx = m(x)
    out = []
    for R in radii:
        top = R * band_factor
        ys = space.sample_annulus(R, top, samples, seed)
        values = [stat(tx, m(y), x, y) for y in ys]
        best = max(values)
        seen = set()
        for cid in witness_ids:
            w = m.witness(cid, R, witness_param(best))
            if w is None or w in seen:
                continue
            seen.add(w)
            if space.contains(w) and R < space.norm(w) <= top:
                ys.append(w)
                best = max(best, stat(tx, m(w), x, w))
        out.append(CurvePoint(R, best, len(ys)))
    return out


def ratio_curve(m: Mapping, x1: Point, radii, band_factor=10.0, samples=1000, seed=42) -> list:
    """Per radius ``R``, the largest ``d(Tx1, Ty) / d(x1, y)`` seen for ``R < ||y|| <= c R``.

    A curve that climbs towards 1 is evidence against C1/C2.
    """
    d = m.domain.distance

    def stat(tx, ty, x, y):
        return d(tx, ty) / d(x, y)

    # a ratio witness is asked to beat the best sampled value
    return _curve(m, x1, radii, band_factor, samples, seed, stat, ("C1", "C2"), lambda best: min(best, 1 - 1e-15))


def gap_curve(m: Mapping, x0: Point, radii, band_factor=10.0, samples=1000, seed=42) -> list:
    """Per radius ``R``, the largest ``d(Tx0, Ty) - d(x0, y)`` seen in the band.

    Divergence to ``-inf`` is evidence for C3/C4; a floor is evidence against.
    """
    d = m.domain.distance

    def stat(tx, ty, x, y):
        return d(tx, ty) - d(x, y)

    return _curve(m, x0, radii, band_factor, samples, seed, stat, ("C3", "C4"), lambda best: 1)


def curve_to_csv(curve) -> str:
    lines = ["radius,statistic,samples"]
    lines += [f"{c.radius!r},{to_jsonable(c.statistic)!r},{c.samples}" for c in curve]
    return "\n".join(lines) + "\n"


# -- the derivation chain -----------------------------------------------------


@dataclass
class ChainReport:
    """C2 premise plus every condition derived from it, each re-verified."""

    premise: VerificationReport
    steps: dict
    probe: Optional[ProbeResult] = None

    @property
    def premise_status(self) -> str:
        return "premise-verified" if self.premise.holds else "premise-refuted"

    @property
    def holds(self) -> bool:
        return self.premise.holds and all(s["report"].holds for s in self.steps.values())

    def to_dict(self):
        return {
            "premise": self.premise.to_dict(),
            "premise_status": self.premise_status,
            "steps": {
                k: {**{p: to_jsonable(v) for p, v in s["params"].items()}, "report": s["report"].to_dict()}
                for k, s in self.steps.items()
            },
            "probe": None if self.probe is None else self.probe.to_dict(),
        }


def derivation_chain(
    m: Mapping,
    r_prime,
    x0: Point,
    eta_prime,
    x1: Point,
    lam_c4=3,
    lam_c3=1,
    lam_c5=1,
    samples: int = 10_000,
    seed: int = 42,
    t_schedule=None,
) -> ChainReport:
    """Verify C2 and everything the hierarchy derives from it.

    Derived conditions: C1 at ``x1``; C4 at ``x0`` for ``lam_c4``; C3 at
    ``x1`` for ``lam_c3`` through the C4 schedule; C6 at the best
    approximate fixed point found by the resolvent probe from ``x1``, with
    its threshold taken from the C3 derivation at a drop equal to the
    observed residual. All checks share ``seed``.
    """
    space = m.domain
    premise = verify_condition(m, ConditionSpec("C2", eta_prime, r=r_prime, base=x0), samples, seed)
    steps = {}

    r, eta1 = derive_c1_from_c2(m, r_prime, x0, eta_prime, x1)
    rep = verify_condition(m, ConditionSpec("C1", eta1, r=r, base=x1), samples, seed)
    steps["C1"] = {"params": {"r": r, "eta": eta1}, "report": rep}

    schedule = c4_schedule(space, r_prime, x0, eta_prime)
    eta4 = schedule(lam_c4)
    rep = verify_condition(m, ConditionSpec("C4", eta4, lam=lam_c4, base=x0), samples, seed)
    steps["C4"] = {"params": {"lambda": lam_c4, "eta": eta4}, "report": rep}

    eta3 = derive_c3_from_c4(m, x0, schedule, x1, lam_c3)
    rep = verify_condition(m, ConditionSpec("C3", eta3, lam=lam_c3, base=x1), samples, seed)
    steps["C3"] = {"params": {"lambda": lam_c3, "eta": eta3}, "report": rep}

    probe = residual_infimum_probe(m, x1, lam_c5, eta3, t_schedule)
    p = probe.best_point
    drop = max(probe.d_estimate, 1e-12)
    eta6 = derive_c3_from_c4(m, x0, schedule, p, drop)
    rep = verify_condition(m, ConditionSpec("C6", eta6, base=p), samples, seed)
    steps["C6"] = {"params": {"eta": eta6, "residual": probe.d_estimate}, "report": rep}
    return ChainReport(premise, steps, probe)


def first_index_below_one(x: Seq) -> int:
    """Smallest ``n1`` with ``x(n) < 1`` for every ``n >= n1``."""
    big = [k for k, v in x.entries if v >= 1]
    return max(big) + 1 if big else 1


__all__ = [
    "ConditionSpec",
    "CurvePoint",
    "ProbeResult",
    "UniversalReport",
    "ChainReport",
    "pointwise_margin",
    "verify_condition",
    "verify_universal",
    "default_bases",
    "derive_c1_from_c2",
    "derive_c4_from_c2",
    "derive_c3_from_c4",
    "c4_schedule",
    "derive_c3_checked",
    "DerivedCheck",
    "residual_infimum_probe",
    "ratio_curve",
    "gap_curve",
    "curve_to_csv",
    "derivation_chain",
    "first_index_below_one",
    "format_point",
]
