"""Invariant balls, resolvents and fixed-point search.

If the C6 condition holds at ``x0`` beyond ``eta``, the closed ball of
radius ``eta + ||x0|| + ||Tx0 - x0||`` about ``x0`` is mapped into itself.
On domains where bounded closed convex sets have the fixed point property
(uniformly convex spaces, for instance) that is enough for a fixed point to
exist. The searches here are concrete procedures for finding it.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from typing import Optional

from .conditions import ConditionSpec, default_t_schedule, verify_condition
from .errors import ConvergenceError, FixpointError
from .mappings import Mapping
from .report import Counterexample, MarginTracker, VerificationReport
from .spaces import Point, Space, point_to_json, slack, to_jsonable

EPS = sys.float_info.epsilon


@dataclass(frozen=True)
class Ball:
    center: Point
    radius: float
    space: Space

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"ball radius must be > 0, got {self.radius}")

    def contains(self, y: Point) -> bool:
        return self.space.contains(y) and self.space.distance(y, self.center) <= self.radius


@dataclass
class SolverTrace:
    """Iteration history.

    ``residuals[k]`` is the residual of the k-th iterate and ``steps[k]``
    the distance from iterate k to iterate k+1, so there is one more
    residual than there are steps.
    """

    method: str
    tol: float
    residuals: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    point: Optional[Point] = None
    converged: bool = False
    iterates: Optional[list] = None
    resolution_limited: bool = False

    @property
    def iterations(self) -> int:
        return len(self.steps)

    def to_csv(self) -> str:
        lines = ["k,residual,step"]
        for k, res in enumerate(self.residuals):
            step = repr(to_jsonable(self.steps[k])) if k < len(self.steps) else ""
            lines.append(f"{k},{to_jsonable(res)!r},{step}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class C6Certificate:
    x0: Point
    eta: float
    drop: float

    def to_dict(self):
        return {"x0": point_to_json(self.x0), "eta": self.eta, "drop": to_jsonable(self.drop)}


@dataclass
class FixedPointResult:
    point: Point
    residual: float
    trace: SolverTrace
    certificate: Optional[C6Certificate] = None

    @property
    def converged(self) -> bool:
        return self.trace.converged

    def to_dict(self):
        return {
            "method": self.trace.method,
            "point": point_to_json(self.point),
            "residual": to_jsonable(self.residual),
            "iterations": self.trace.iterations,
            "converged": self.trace.converged,
            "tol": self.trace.tol,
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), sort_keys=True, **kw)


def invariant_ball(m: Mapping, x0: Point, eta) -> Ball:
    """Ball about ``x0`` of radius ``eta + ||x0|| + ||Tx0 - x0||``.

    It is invariant under ``m`` when C6 holds at ``x0`` beyond ``eta``;
    use :func:`verify_invariance` to test that on samples.
    """
    if not eta > 0:
        raise ValueError(f"eta must be > 0, got {eta}")
    space = m.domain
    if not space.contains(x0):
        raise FixpointError(f"center {x0} is outside the domain of {m.name}")
    rho = eta + space.norm(x0) + space.distance(m(x0), x0)
    return Ball(x0, rho, space)


def verify_invariance(m: Mapping, ball: Ball, samples: int = 10_000, seed: int = 42) -> VerificationReport:
    """Sampled test of ``T(D) ⊂ D``; margin is ``rho - d(Ty, x0)``."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    space = m.domain
    tracker = MarginTracker()
    for i, y in enumerate(space.sample_ball(ball.center, ball.radius, samples, seed)):
        if not ball.contains(y):
            raise FixpointError(f"ball sampler produced {y} outside the ball")
        lhs = space.distance(m(y), ball.center)
        margin = ball.radius - lhs
        tracker.add(margin, slack(lhs, ball.radius), lambda: Counterexample(i, y, lhs, ball.radius, margin))
    return VerificationReport(
        check="invariance",
        spec={"mapping": m.name, "center": point_to_json(ball.center), "radius": to_jsonable(ball.radius)},
        samples=tracker.count,
        verdict=tracker.verdict,
        worst_margin=tracker.worst,
        counterexample=tracker.first,
        seed=seed,
    )


def _resolution_floor(space, z):
    return 4 * EPS * max(1.0, float(space.norm(z)))


def resolvent(m: Mapping, x1: Point, t, tol=1e-12, max_iter=100_000, keep_iterates=False, z0=None):
    """Solve ``y = (1 - t) T y + t x1`` by Picard iteration from ``x1`` (or ``z0``).

    The iterated map is a ``(1 - t)``-contraction, so once a step is at
    most ``tol * t / (1 - t)`` the last iterate is within ``tol`` of the
    solution. Iteration also stops when the step is at the float
    resolution of the iterate; the trace records that case.

    Returns ``(y, trace)``; raises :class:`ConvergenceError` after
    ``max_iter`` steps.
    """
    if not 0 < t < 1:
        raise ValueError(f"t must be in (0, 1), got {t}")
    if not tol > 0:
        raise ValueError("tol must be > 0")
    space = m.domain
    s = 1 - t
    stop = tol * t / s

    def phi(z):
        return space.snap(space.combine(s, m(z), t, x1))

    z = x1 if z0 is None else z0
    trace = SolverTrace(method=f"resolvent(t={t!r})", tol=tol, iterates=[z] if keep_iterates else None)
    for _ in range(max_iter):
        nz = phi(z)
        step = space.distance(nz, z)
        trace.residuals.append(step)
        trace.steps.append(step)
        z = nz
        if keep_iterates:
            trace.iterates.append(z)
        if step <= stop:
            break
        if step <= _resolution_floor(space, z):
            trace.resolution_limited = True
            break
    else:
        trace.point = z
        raise ConvergenceError(
            f"resolvent at t={t} did not converge in {max_iter} steps (last step {trace.steps[-1]})",
            trace,
        )
    final = space.distance(phi(z), z)
    trace.residuals.append(final)
    trace.point = z
    trace.converged = final <= tol
    return z, trace


def find_fixed_point(
    m: Mapping,
    start: Point,
    method: str = "picard",
    tol=1e-9,
    max_iter: int = 10_000,
    alpha=0.5,
    t_schedule=None,
    keep_iterates=False,
) -> FixedPointResult:
    """Search for a fixed point of ``m``.

    ``method`` is one of

    * ``"picard"``: ``x_{k+1} = T x_k``
    * ``"averaged"``: ``x_{k+1} = (1 - alpha) x_k + alpha T x_k``
    * ``"resolvent"``: resolvents anchored at ``start`` along the decreasing
      ``t_schedule`` (default ``2**-k`` for ``k = 1..20``), keeping the one
      with the smallest residual

    Success means ``||Tx - x|| <= tol``; the result then carries a C6
    certificate at the point found. Running out of iterations is reported
    through ``converged=False``, not raised.
    """
    space = m.domain
    if not space.contains(start):
        raise FixpointError(f"start {start} is outside the domain of {m.name}")
    if method == "resolvent":
        return _resolvent_search(m, start, tol, max_iter, t_schedule)
    if method == "picard":
        step_fn = m
        tag = "picard"
    elif method == "averaged":
        if not 0 < alpha < 1:
            raise ValueError(f"alpha must be in (0, 1), got {alpha}")

        def step_fn(x):
            return space.snap(space.combine(1 - alpha, x, alpha, m(x)))

        tag = f"averaged(alpha={alpha!r})"
    else:
        raise ValueError(f"unknown method {method!r}")

    trace = SolverTrace(method=tag, tol=tol, iterates=[start] if keep_iterates else None)
    x = start
    while True:
        res = space.distance(m(x), x)
        trace.residuals.append(res)
        if res <= tol or trace.iterations >= max_iter:
            break
        nx = step_fn(x)
        trace.steps.append(space.distance(nx, x))
        x = nx
        if keep_iterates:
            trace.iterates.append(x)
    return _finish(m, x, trace)


def _resolvent_search(m, start, tol, max_iter, t_schedule):
    space = m.domain
    ts = default_t_schedule() if t_schedule is None else list(t_schedule)
    if any(not 0 < t < 1 for t in ts) or any(b >= a for a, b in zip(ts, ts[1:])):
        raise ValueError("t schedule must be decreasing in (0, 1)")
    trace = SolverTrace(method="resolvent_schedule", tol=tol)
    best = start
    best_res = space.distance(m(start), start)
    trace.residuals.append(best_res)
    for t in ts:
        if best_res <= tol:
            break
        y, _ = resolvent(m, start, t, tol=min(tol, 1e-12), max_iter=max_iter)
        res = space.distance(m(y), y)
        trace.residuals.append(res)
        trace.steps.append(space.distance(y, best))
        if res < best_res:
            best, best_res = y, res
    return _finish(m, best, trace)


def _finish(m, x, trace):
    residual = m.domain.distance(m(x), x)
    trace.point = x
    trace.converged = residual <= trace.tol
    cert = C6Certificate(x, 1, residual) if trace.converged else None
    return FixedPointResult(x, residual, trace, cert)


def certify_c6_from_fixed_point(
    m: Mapping, p: Point, samples: int = 10_000, seed: int = 42, tol=1e-9, radius_max=1000.0
) -> VerificationReport:
    """Check C6 at an (approximate) fixed point ``p``.

    At an exact fixed point C6 is nonexpansiveness with a zero drop, so any
    threshold works; ``eta = 1`` is used. Margins are the C6 margins and a
    violation must exceed ``tol`` as well as the float slack.
    """
    space = m.domain
    res = space.distance(m(p), p)
    if res > tol:
        raise FixpointError(f"{p} has residual {res} > tol={tol}; not a fixed point")
    spec = ConditionSpec("C6", 1, base=p)
    return verify_condition(m, spec, samples, seed, annulus=(1, radius_max), extra_slack=tol)
