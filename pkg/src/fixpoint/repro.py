"""Reproduction of the three counterexample mappings.

Each example makes two claims: one condition holds and the next stronger
one fails. Every claim is turned into sampled checks whose verdict is
compared with the expected one.
"""

from __future__ import annotations

import math

from .conditions import (
    ConditionSpec,
    curve_to_csv,
    default_bases,
    first_index_below_one,
    gap_curve,
    ratio_curve,
    verify_condition,
    verify_universal,
)
from .mappings import IDENTITY_RAY, LOG_RETREAT, SHIFT_DOWN_2
from .report import HOLDS, REFUTED
from .spaces import Scalar, Seq, point_to_json, to_jsonable

EXAMPLES = ("4.1", "4.2", "4.3")


def _claim(example, claim, expected, observed, evidence):
    return {
        "example": example,
        "claim": claim,
        "expected": expected,
        "observed": observed,
        "match": expected == observed,
        "evidence": evidence,
    }


def _strictly(values, increasing=True):
    pairs = list(zip(values, values[1:]))
    return all((b > a) if increasing else (b < a) for a, b in pairs)


def example_4_1(samples, seed):
    """log_retreat: C3 holds, C1 fails."""
    m = LOG_RETREAT
    one = Scalar(1)
    files = {}

    gap = gap_curve(m, one, [math.exp(k) for k in range(2, 11)], samples=samples, seed=seed)
    files["example_4.1_gap.csv"] = curve_to_csv(gap)
    diverging = _strictly([c.statistic for c in gap], increasing=False)
    bases = default_bases(m, seed=seed)
    drops = {}
    for lam in (1, 2, 5):
        # gap at base x1 is -log(y / x1) for y > x1
        rep = verify_universal(m, "C3", lam, lambda b, lam=lam: b.value * math.exp(lam), bases, samples, seed)
        drops[str(lam)] = rep.verdict
    c3 = HOLDS if diverging and all(v == HOLDS for v in drops.values()) else REFUTED

    ratio = ratio_curve(m, one, [10.0 ** k for k in range(1, 6)], samples=samples, seed=seed)
    files["example_4.1_ratio.csv"] = curve_to_csv(ratio)
    climbing = _strictly([c.statistic for c in ratio])
    refutations = {}
    for r in (0.5, 0.9, 0.99, 0.999):
        rep = verify_condition(m, ConditionSpec("C1", 10, r=r, base=one), samples, seed)
        refutations[repr(r)] = rep.verdict
    c1 = REFUTED if climbing and all(v == REFUTED for v in refutations.values()) else HOLDS

    claims = [
        _claim("4.1", "C3 holds", HOLDS, c3, {
            "gap_curve_strictly_decreasing": diverging,
            "gap_curve_last": to_jsonable(gap[-1].statistic),
            "drop_checks": drops,
            "bases": [point_to_json(b) for b in bases],
        }),
        _claim("4.1", "C1 fails", REFUTED, c1, {
            "ratio_curve_strictly_increasing": climbing,
            "ratio_curve_last": to_jsonable(ratio[-1].statistic),
            "ratio_checks": refutations,
        }),
    ]
    return claims, files


def example_4_2(samples, seed):
    """shift_down_2: C5 holds with lambda = 1, C3 fails at lambda = 3."""
    m = SHIFT_DOWN_2
    zero = Seq()
    files = {}

    bases = [zero, Seq({1: 1, 3: 2})] + m.domain.sample_annulus(0, 20, 6, seed)
    rep = verify_universal(m, "C5", 1, lambda b: first_index_below_one(b) + 5, bases, samples, seed)
    c5_evidence = {
        "lambda": 1,
        "bases": [point_to_json(b) for b in bases],
        "etas": [r.spec["eta"] for r in rep.reports],
        "worst_margins": [to_jsonable(r.worst_margin) for r in rep.reports],
    }

    refutes = {}
    for eta in (3, 10, 100):
        r = verify_condition(m, ConditionSpec("C3", eta, lam=3, base=zero), samples, seed)
        ce = r.counterexample
        refutes[str(eta)] = {
            "verdict": r.verdict,
            "counterexample": None if ce is None else ce.to_dict(),
        }
    gap = gap_curve(m, zero, [10.0 ** k for k in range(1, 5)], samples=samples, seed=seed)
    files["example_4.2_gap.csv"] = curve_to_csv(gap)
    floor = all(c.statistic >= -2 for c in gap)
    c3 = REFUTED if floor and all(v["verdict"] == REFUTED for v in refutes.values()) else HOLDS

    claims = [
        _claim("4.2", "C5 holds", HOLDS, rep.verdict, c5_evidence),
        _claim("4.2", "C3 fails", REFUTED, c3, {
            "lambda": 3,
            "checks": refutes,
            "gap_curve_floor_at_minus_2": floor,
        }),
    ]
    return claims, files


def example_4_3(samples, seed):
    """identity_ray: C6 holds, C5 fails."""
    m = IDENTITY_RAY
    rep = verify_condition(m, ConditionSpec("C6", 2, base=Scalar(3)), samples, seed)
    c6_evidence = {"x0": 3, "eta": 2, "worst_margin": to_jsonable(rep.worst_margin)}

    refutes = {}
    for lam in (0.1, 1, 10):
        for eta in (1, 10, 100):
            r = verify_condition(m, ConditionSpec("C5", eta, lam=lam, base=Scalar(1)), samples, seed)
            refutes[f"lambda={lam!r},eta={eta}"] = {
                "verdict": r.verdict,
                "worst_margin": to_jsonable(r.worst_margin),
            }
    c5 = REFUTED if all(v["verdict"] == REFUTED for v in refutes.values()) else HOLDS
    claims = [
        _claim("4.3", "C6 holds", HOLDS, rep.verdict, c6_evidence),
        _claim("4.3", "C5 fails", REFUTED, c5, {"x1": 1, "checks": refutes}),
    ]
    return claims, {}


RUNNERS = {"4.1": example_4_1, "4.2": example_4_2, "4.3": example_4_3}


def run_repro(examples=EXAMPLES, samples=2000, seed=42):
    """Run the selected examples; returns ``(manifest, files)``."""
    claims, files = [], {}
    for ex in examples:
        c, f = RUNNERS[ex](samples, seed)
        claims.extend(c)
        files.update(f)
    manifest = {
        "seed": seed,
        "samples": samples,
        "examples": list(examples),
        "claims": claims,
        "all_match": all(c["match"] for c in claims),
        "note": "sampled, not proved",
    }
    return manifest, files
