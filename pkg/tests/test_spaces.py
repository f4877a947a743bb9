import json
from fractions import Fraction

import pytest
from conftest import box_points, ray_points
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from fixpoint.errors import SamplerError, StructureError
from fixpoint.spaces import (
    C0Box,
    RealInterval,
    Scalar,
    Seq,
    format_point,
    parse_point,
    point_from_json,
    point_to_json,
    slack,
    space_from_dict,
)


def test_norm_examples(box, ray):
    assert box.norm(Seq()) == 0
    assert box.norm(Seq({5: 5})) == 5
    assert ray.norm(Scalar(7)) == 7


def test_distance_examples(box, ray):
    assert box.distance(Seq({3: 2}), Seq({3: 2})) == 0
    assert box.distance(Seq({5: 5}), Seq({7: 1})) == 5
    assert ray.distance(Scalar(1), Scalar(4)) == 3


def test_contains_examples(box, ray):
    assert box.contains(Seq({4: 4}))
    assert not box.contains(Seq({2: 3}))
    assert not ray.contains(Scalar(0.5))
    assert not box.contains(Scalar(1))
    assert not ray.contains(Seq())
    assert not box.contains(Seq({3: -1}))


def test_bounded_interval():
    s = RealInterval(0, 5)
    assert s.contains(Scalar(5)) and not s.contains(Scalar(5.5))
    with pytest.raises(SamplerError):
        s.sample_annulus(6, 10, 3, 0)
    pts = s.sample_annulus(2, 10, 50, 0)
    assert all(2 < p.value <= 5 for p in pts)


def test_negative_interval_samples_both_signs():
    s = RealInterval(-10, 10)
    pts = s.sample_annulus(1, 5, 200, 3)
    assert all(1 < abs(p.value) <= 5 for p in pts)
    assert any(p.value < 0 for p in pts) and any(p.value > 0 for p in pts)


def test_structure_mismatch_raises(box, ray):
    with pytest.raises(StructureError):
        box.norm(Scalar(1))
    with pytest.raises(StructureError):
        ray.distance(Scalar(1), Seq())


def test_seq_canonical_form():
    s = Seq({3: 0, 1: 2, 2: 0.0})
    assert s.entries == ((1, 2),)
    assert s[2] == 0 and s[1] == 2
    assert Seq({"4": 1}) == Seq({4: 1})
    with pytest.raises(ValueError):
        Seq({0: 1})
    with pytest.raises(TypeError):
        Seq({1.5: 1})


def test_exact_values_stay_exact(box):
    d = box.distance(Seq({2: Fraction(1, 3)}), Seq({2: 1}))
    assert d == Fraction(2, 3)
    assert slack(d, 3) == 0
    assert slack(0.5, 3) > 0


def test_sample_annulus_box_band(box):
    pts = box.sample_annulus(10, 100, 50, 42)
    assert len(pts) == 50
    for p in pts:
        assert box.contains(p)
        assert 10 < box.norm(p) <= 100
        assert 1 <= len(p) <= 8


def test_sample_annulus_deterministic(box, ray):
    assert box.sample_annulus(3, 30, 20, 9) == box.sample_annulus(3, 30, 20, 9)
    assert ray.sample_annulus(3, 30, 20, 9) == ray.sample_annulus(3, 30, 20, 9)
    assert box.sample_annulus(3, 30, 20, 9) != box.sample_annulus(3, 30, 20, 10)


def test_sample_annulus_ray_example(ray):
    pts = ray.sample_annulus(5, 50, 3, 7)
    assert len(pts) == 3
    assert all(5 < p.value <= 50 for p in pts)


def test_sample_annulus_empty_band(box):
    with pytest.raises(SamplerError):
        box.sample_annulus(10, 10, 5, 0)


def test_interval_band_below_domain():
    with pytest.raises(SamplerError):
        RealInterval(1).sample_annulus(0.5, 0.75, 5, 0)


def test_json_round_trip(box, ray):
    p = Seq({1: 1, 4: 2.5})
    obj = json.loads(json.dumps(point_to_json(p)))
    assert obj == {"1": 1, "4": 2.5}
    assert point_from_json(obj) == p
    assert point_to_json(Scalar(3)) == 3
    assert point_from_json(3.5) == Scalar(3.5)
    for s in (box, ray, RealInterval(0, 2)):
        assert space_from_dict(json.loads(json.dumps(s.to_dict()))) == s


def test_parse_point(box, ray):
    assert parse_point(box, "{1:1,4:4,9:9}") == Seq({1: 1, 4: 4, 9: 9})
    assert parse_point(box, "0") == Seq()
    assert parse_point(ray, "7") == Scalar(7)
    assert isinstance(parse_point(ray, "7").value, int)
    assert format_point(Seq({1: 1, 4: 2.5})) == "{1:1,4:2.5}"


@given(box_points(), box_points(), box_points())
def test_box_metric_axioms(x, y, z):
    s = C0Box()
    assert (s.distance(x, y) == 0) == (x == y)
    assert s.distance(x, y) == s.distance(y, x)
    assert s.distance(x, z) <= s.distance(x, y) + s.distance(y, z) + 1e-12


@given(ray_points(), ray_points(), ray_points())
def test_ray_metric_axioms(x, y, z):
    s = RealInterval(1)
    assert (s.distance(x, y) == 0) == (x == y)
    assert s.distance(x, y) == s.distance(y, x)
    assert s.distance(x, z) <= s.distance(x, y) + s.distance(y, z) + 1e-12


@pytest.mark.parametrize("space", [C0Box(), RealInterval(1), RealInterval(0)])
def test_convexity_on_samples(space):
    xs = space.sample_annulus(0, 100, 200, 1)
    ys = space.sample_annulus(0, 100, 200, 2)
    for x, y in zip(xs, ys):
        for t in (0, 0.25, 0.5, 0.75, 1):
            assert space.contains(space.combine(1 - t, x, t, y))


@settings(max_examples=50, deadline=None)
@given(
    st.floats(0.01, 1e4),
    st.floats(1.001, 100),
    st.integers(0, 2**32),
    st.sampled_from([C0Box(), RealInterval(1), RealInterval(0)]),
)
def test_sampler_soundness(eta, factor, seed, space):
    rmax = eta * factor
    assume(not isinstance(space, RealInterval) or rmax >= space.lower)
    for p in space.sample_annulus(eta, rmax, 20, seed):
        assert space.contains(p)
        assert eta < space.norm(p) <= rmax


@pytest.mark.parametrize("space", [C0Box(), RealInterval(1)])
def test_sample_ball_inside(space):
    center = space.sample_annulus(1, 20, 1, 0)[0]
    for y in space.sample_ball(center, 3.5, 100, 1):
        assert space.contains(y)
        assert space.distance(y, center) <= 3.5


def test_sample_ball_hits_boundary(box):
    ys = box.sample_ball(Seq(), 7, 10, 0)
    assert any(box.distance(y, Seq()) == 7 for y in ys)
