import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import log_gap, log_ratio

from fixpoint.conditions import (
    ConditionSpec,
    c4_schedule,
    curve_to_csv,
    derivation_chain,
    derive_c1_from_c2,
    derive_c3_checked,
    derive_c3_from_c4,
    derive_c4_from_c2,
    first_index_below_one,
    gap_curve,
    pointwise_margin,
    ratio_curve,
    residual_infimum_probe,
    verify_condition,
    verify_universal,
)
from fixpoint.errors import DerivationError
from fixpoint.mappings import get_mapping
from fixpoint.report import HOLDS, REFUTED
from fixpoint.spaces import Scalar, Seq, slack

LOG = get_mapping("log_retreat")
SHIFT = get_mapping("shift_down_2")
IDENT = get_mapping("identity_ray")
AFFINE = get_mapping("affine_half")


# -- specs -------------------------------------------------------------------


@pytest.mark.parametrize(
    "kw",
    [
        dict(cid="C1", eta=1, r=1.0),
        dict(cid="C2", eta=1, r=0),
        dict(cid="C3", eta=1, lam=0),
        dict(cid="C5", eta=1),
        dict(cid="C6", eta=0),
        dict(cid="C7", eta=1),
    ],
)
def test_spec_validation(kw):
    with pytest.raises(ValueError):
        ConditionSpec(**kw)


def test_spec_forms():
    assert ConditionSpec("C2", 1, r=0.5).form == "ratio"
    assert ConditionSpec("C4", 1, lam=2).form == "drop"
    assert ConditionSpec("C6", 1).form == "self_drop"
    assert ConditionSpec("C6", 1).at(Scalar(3)).base == Scalar(3)


def test_unanchored_spec_rejected():
    with pytest.raises(ValueError):
        verify_condition(LOG, ConditionSpec("C1", 10, r=0.5), 10)


# -- margins -------------------------------------------------------------------


def test_pointwise_margin_examples():
    assert pointwise_margin(IDENT, ConditionSpec("C6", 1), Scalar(3), Scalar(10)) == 0
    m = pointwise_margin(SHIFT, ConditionSpec("C3", 1, lam=3), Seq(), Seq({5: 5}))
    assert m == -1 and isinstance(m, int)
    y = math.exp(3)
    # closed form: (y - 1) - 2 - (y - log y - 1) = log y - 2 = 1
    got = pointwise_margin(LOG, ConditionSpec("C3", 1, lam=2), Scalar(1), Scalar(y))
    assert got == pytest.approx(1, abs=1e-12)


@settings(max_examples=200)
@given(st.floats(1, 1e5), st.floats(1, 1e5), st.floats(0.01, 0.98), st.floats(0.0, 0.01))
def test_margin_monotone_in_r(b, y, r, dr):
    spec_lo, spec_hi = ConditionSpec("C2", 1, r=r), ConditionSpec("C2", 1, r=r + dr)
    lo = pointwise_margin(LOG, spec_lo, Scalar(b), Scalar(y))
    hi = pointwise_margin(LOG, spec_hi, Scalar(b), Scalar(y))
    assert hi >= lo


@settings(max_examples=200)
@given(st.floats(1, 1e5), st.floats(1, 1e5), st.floats(0.01, 100), st.floats(0.01, 10))
def test_margin_decreasing_in_lambda(b, y, lam, dl):
    a = pointwise_margin(LOG, ConditionSpec("C4", 1, lam=lam), Scalar(b), Scalar(y))
    c = pointwise_margin(LOG, ConditionSpec("C4", 1, lam=lam + dl), Scalar(b), Scalar(y))
    assert c < a


# -- verification ---------------------------------------------------------------


@pytest.mark.parametrize("x1", [Seq(), Seq({1: 1, 3: 2}), Seq({2: 0.5, 7: 6.5, 30: 0.2})])
def test_shift_c5_holds(x1):
    n1 = first_index_below_one(x1)
    rep = verify_condition(SHIFT, ConditionSpec("C5", n1 + 5, lam=1, base=x1), 10_000, 42)
    assert rep.verdict == HOLDS
    assert rep.samples == 10_001  # one witness plus the samples


def test_first_index_below_one():
    assert first_index_below_one(Seq()) == 1
    assert first_index_below_one(Seq({1: 1, 3: 2})) == 4
    assert first_index_below_one(Seq({2: 0.5, 7: 6.5, 30: 0.2})) == 8


@pytest.mark.parametrize("eta", [1, 7.5, 1000])
def test_identity_drop_refuted(eta):
    rep = verify_condition(IDENT, ConditionSpec("C5", eta, lam=1, base=Scalar(1)), 500)
    assert rep.verdict == REFUTED
    assert rep.worst_margin == -1
    assert rep.counterexample.witness


def test_affine_ratio_holds():
    rep = verify_condition(AFFINE, ConditionSpec("C2", 1, r=0.5, base=Scalar(0)), 10_000)
    assert rep.verdict == HOLDS
    assert rep.worst_margin >= -1e-12


def test_report_invariants_and_soundness():
    for m, spec in [
        (SHIFT, ConditionSpec("C3", 10, lam=3, base=Seq())),
        (IDENT, ConditionSpec("C1", 5, r=0.9, base=Scalar(2))),
        (LOG, ConditionSpec("C1", 10, r=0.99, base=Scalar(1))),
        (AFFINE, ConditionSpec("C2", 1, r=0.5, base=Scalar(0))),
    ]:
        rep = verify_condition(m, spec, 2000, 1)
        assert (rep.verdict == REFUTED) == (rep.counterexample is not None)
        ce = rep.counterexample
        if ce is None:
            continue
        assert rep.worst_margin < 0
        y = ce.point
        assert m.domain.contains(y) and m.domain.norm(y) > spec.eta
        again = pointwise_margin(m, spec, spec.base, y)
        assert again == ce.margin and again < -slack(ce.lhs, ce.rhs)


def test_report_json_schema():
    rep = verify_condition(SHIFT, ConditionSpec("C3", 10, lam=3, base=Seq()), 100)
    d = json.loads(rep.to_json())
    assert {"spec", "verdict", "worst_margin", "counterexample"} <= set(d)
    assert d["counterexample"]["y"] == {"11": 11}
    assert d["note"] == "sampled, not proved"


def test_exact_integer_refutation_general_n():
    for n in range(2, 60):
        y = Seq({n: n})
        m = pointwise_margin(SHIFT, ConditionSpec("C3", 1, lam=3), Seq(), y)
        assert m == -1 and type(m) is int


def test_verify_universal_default_bases():
    rep = verify_universal(LOG, "C3", 2, lambda b: b.value * math.exp(2), samples=500)
    assert rep.holds
    assert len(rep.reports) == 9
    assert rep.bases[0] == 1


def test_verification_is_deterministic():
    spec = ConditionSpec("C5", 6, lam=1, base=Seq({1: 1}))
    assert verify_condition(SHIFT, spec, 500, 3).to_json() == verify_condition(SHIFT, spec, 500, 3).to_json()


# -- derivations ----------------------------------------------------------------


def test_derive_c1_example():
    # T4 = 3, T0 = 1 recomputed from Tx = x/2 + 1
    assert AFFINE(Scalar(4)) == Scalar(3) and AFFINE(Scalar(0)) == Scalar(1)
    r, eta = derive_c1_from_c2(AFFINE, 0.5, Scalar(0), 1, Scalar(4))
    assert r == 0.75
    assert eta == max(1, 4 + (4 + 2) / 0.25) == 28


def test_derive_c1_same_base():
    r, eta = derive_c1_from_c2(LOG, 0.3, Scalar(5), 1, Scalar(5))
    assert r == 0.65 and eta == 5
    r, eta = derive_c1_from_c2(LOG, 0.3, Scalar(5), 9, Scalar(5))
    assert eta == 9


def test_derive_c1_downstream_holds():
    r, eta = derive_c1_from_c2(AFFINE, 0.5, Scalar(0), 1, Scalar(4))
    assert verify_condition(AFFINE, ConditionSpec("C1", eta, r=r, base=Scalar(4))).holds


def test_derive_c4_examples():
    assert derive_c4_from_c2(AFFINE.domain, 0.5, Scalar(0), 1, 3) == 6
    assert derive_c4_from_c2(AFFINE.domain, 0.5, Scalar(2), 1, 1e-300) == pytest.approx(2)
    assert verify_condition(AFFINE, ConditionSpec("C4", 6, lam=3, base=Scalar(0))).holds
    with pytest.raises(DerivationError):
        derive_c4_from_c2(AFFINE.domain, 1.0, Scalar(0), 1, 3)


def test_identity_premise_refuted():
    # the derivation still produces numbers; the chain marks the premise
    eta = derive_c4_from_c2(IDENT.domain, 0.5, Scalar(1), 1, 3)
    assert eta == 7
    chain = derivation_chain(IDENT, 0.5, Scalar(1), 1, Scalar(2), samples=200)
    assert chain.premise_status == "premise-refuted"
    assert not chain.holds


def test_derive_c3_examples():
    sched = c4_schedule(AFFINE.domain, 0.5, Scalar(0), 1)
    assert derive_c3_from_c4(AFFINE, Scalar(0), sched, Scalar(0), 1) == sched(1)
    eta = derive_c3_from_c4(AFFINE, Scalar(0), sched, Scalar(4), 1)
    assert eta == 14  # inflated lambda 1 + 4 + 2 = 7, schedule 7 / (1/2)
    assert verify_condition(AFFINE, ConditionSpec("C3", eta, lam=1, base=Scalar(4))).holds


def test_derive_c3_checked_marks_refuted_premise():
    def sched(lam):
        return 5 + 2 * math.ceil(lam)

    chk = derive_c3_checked(SHIFT, Seq(), sched, Seq(), 3, samples=500)
    assert chk.eta == 11
    assert chk.premise_status == "premise-refuted"
    assert not chk.guaranteed
    assert chk.report.verdict == REFUTED

    ok = derive_c3_checked(AFFINE, Scalar(0), c4_schedule(AFFINE.domain, 0.5, Scalar(0), 1), Scalar(4), 1, 2000)
    assert ok.premise_status == "premise-verified" and ok.report.holds


def test_derive_c3_bad_schedule():
    with pytest.raises(DerivationError):
        derive_c3_from_c4(AFFINE, Scalar(0), lambda lam: math.sqrt(5 - lam), Scalar(4), 1)
    with pytest.raises(DerivationError):
        derive_c3_from_c4(AFFINE, Scalar(0), lambda lam: float("nan"), Scalar(4), 1)


def test_chain_consistency_affine():
    chain = derivation_chain(AFFINE, 0.5, Scalar(0), 1, Scalar(4), samples=10_000, seed=7)
    assert chain.premise.holds
    assert chain.holds
    assert chain.steps["C1"]["params"] == {"r": 0.75, "eta": 28}
    assert chain.steps["C4"]["params"]["eta"] == 6
    assert chain.steps["C3"]["params"]["eta"] == 14
    assert chain.probe.d_estimate < 1e-5
    json.dumps(chain.to_dict())


# -- residual probe ---------------------------------------------------------------


def test_probe_fixed_point_anchor():
    res = residual_infimum_probe(LOG, Scalar(1), 1, 5)
    assert res.d_estimate == 0
    assert all(s.residual == 0 for s in res.steps)
    assert res.best_point == Scalar(1)


def test_probe_shift_zero():
    res = residual_infimum_probe(SHIFT, Seq(), 1, 5, [0.5])
    assert res.d_estimate == 0 and res.best_point == Seq()


def test_probe_identity():
    res = residual_infimum_probe(IDENT, Scalar(1), 1, 5, [0.9, 0.3, 0.01])
    assert res.d_estimate == 0
    assert res.best_point == Scalar(1)
    assert not any(s.beyond_eta for s in res.steps)


@pytest.mark.parametrize("m,x1", [(AFFINE, Scalar(4)), (LOG, Scalar(5)), (SHIFT, Seq({3: 3, 10: 9}))])
def test_probe_residual_identity(m, x1):
    res = residual_infimum_probe(m, x1, 1, 1)
    for s in res.steps:
        assert s.identity_gap <= 10 * slack(s.residual, s.norm, 1.0)
    assert res.d_estimate <= min(s.residual for s in res.steps)


def test_probe_rejects_bad_schedule():
    with pytest.raises(ValueError):
        residual_infimum_probe(LOG, Scalar(2), 1, 1, [0.1, 0.2])
    with pytest.raises(ValueError):
        residual_infimum_probe(LOG, Scalar(2), 1, 1, [1.0])


# -- curves --------------------------------------------------------------------------


def test_ratio_curve_log_retreat():
    (c,) = ratio_curve(LOG, Scalar(1), [1e3], 10, 1000, 42)
    assert c.statistic >= log_ratio(1e3)
    assert c.statistic <= log_ratio(1e4) + 1e-12


def test_log_ratio_closed_form_dense_scan():
    # the closed form against direct evaluation of the mapping
    for k in range(1, 400):
        y = 1 + 0.25 * k
        direct = abs(LOG(Scalar(1)).value - LOG(Scalar(y)).value) / (y - 1)
        assert direct == pytest.approx(log_ratio(y), rel=1e-12)


def test_ratio_curve_affine_flat():
    for c in ratio_curve(AFFINE, Scalar(0), [1, 10, 100, 1e4], 10, 500, 1):
        assert c.statistic == pytest.approx(0.5, abs=1e-12)


def test_ratio_curve_identity():
    for c in ratio_curve(IDENT, Scalar(3), [10, 100], 10, 200, 1):
        assert c.statistic == 1


def test_gap_curve_log_retreat():
    R = math.exp(5)
    (c,) = gap_curve(LOG, Scalar(1), [R], 10, 1000, 42)
    assert c.statistic <= -5
    ys = LOG.domain.sample_annulus(R, 10 * R, 1000, 42)
    assert c.statistic == pytest.approx(log_gap(min(p.value for p in ys)), abs=1e-9)


def test_gap_curve_identity():
    assert all(c.statistic == 0 for c in gap_curve(IDENT, Scalar(1), [10, 100, 1000], 10, 200))


def test_gap_curve_shift_floor():
    curve = gap_curve(SHIFT, Seq(), [10, 100, 1000, 1e4], 10, 500)
    assert all(c.statistic >= -2 for c in curve)
    assert all(c.samples == 501 for c in curve)  # witness n e_n included


def test_curve_preconditions():
    with pytest.raises(ValueError):
        ratio_curve(LOG, Scalar(50), [10, 100])
    with pytest.raises(ValueError):
        ratio_curve(LOG, Scalar(1), [100, 10])
    with pytest.raises(ValueError):
        gap_curve(LOG, Scalar(1), [10], band_factor=1)


def test_curve_csv():
    text = curve_to_csv(gap_curve(IDENT, Scalar(1), [10, 100], 10, 5))
    assert text.splitlines() == ["radius,statistic,samples", "10,0.0,6", "100,0.0,6"]
