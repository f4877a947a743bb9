"""Normed domains, points and deterministic samplers.

Two domains are supported: a real interval ``[a, b]`` (``b`` may be
infinite) with the absolute value, and the box
``{x in c0 : 0 <= x(n) <= n}`` with the supremum norm. Sequences in c0
are stored with finite support, which is exact for every mapping in the
catalog.

Arithmetic stays exact when the data is exact: ``int`` and ``Fraction``
values are never converted to floats by this module.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Iterable, Union

from .errors import SamplerError, StructureError

Number = Union[int, float, Fraction]

ABS_SLACK = 1e-12
REL_SLACK = 1e-12


def is_exact(*values) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in values)


def slack(*magnitudes) -> Number:
    """Comparison slack for a margin computed from ``magnitudes``.

    Zero when every magnitude is exact, otherwise an absolute plus a
    relative component.
    """
    if is_exact(*magnitudes):
        return 0
    scale = max([1.0] + [abs(float(m)) for m in magnitudes])
    return ABS_SLACK + REL_SLACK * scale


def normalize(v: Number) -> Number:
    """Collapse integral fractions to ``int``."""
    if isinstance(v, Fraction) and v.denominator == 1:
        return int(v.numerator)
    return v


def _check_value(v) -> Number:
    t = type(v)
    if t is float:
        if not math.isfinite(v):
            raise ValueError(f"point values must be finite, got {v!r}")
        return v
    if t is int:
        return v
    if isinstance(v, bool) or not isinstance(v, Real):
        raise TypeError(f"point values must be real numbers, got {v!r}")
    if isinstance(v, float) and not math.isfinite(v):
        raise ValueError(f"point values must be finite, got {v!r}")
    if not isinstance(v, (int, float, Fraction)):
        v = float(v)
    return normalize(v)


@dataclass(frozen=True)
class Scalar:
    value: Number

    def __post_init__(self):
        object.__setattr__(self, "value", _check_value(self.value))


@dataclass(frozen=True, init=False)
class Seq:
    """Finite-support real sequence indexed from 1. Zeros are never stored."""

    entries: tuple
    _lookup: dict = field(compare=False, repr=False, hash=False)

    def __init__(self, entries=()):
        items = entries.items() if hasattr(entries, "items") else entries
        canon = {}
        for k, v in items:
            if isinstance(k, str):
                k = int(k)
            if isinstance(k, bool) or not isinstance(k, int):
                if isinstance(k, float) and k.is_integer():
                    k = int(k)
                else:
                    raise TypeError(f"sequence index must be an integer, got {k!r}")
            if k < 1:
                raise ValueError(f"sequence index must be >= 1, got {k}")
            v = _check_value(v)
            if v != 0:
                canon[k] = v
            else:
                canon.pop(k, None)
        object.__setattr__(self, "entries", tuple(sorted(canon.items())))
        object.__setattr__(self, "_lookup", canon)

    @classmethod
    def _trusted(cls, canon: dict) -> "Seq":
        """Build from a dict already known to hold valid, nonzero entries."""
        self = object.__new__(cls)
        object.__setattr__(self, "entries", tuple(sorted(canon.items())))
        object.__setattr__(self, "_lookup", canon)
        return self

    def __getitem__(self, n: int) -> Number:
        return self._lookup.get(n, 0)

    def __len__(self):
        return len(self.entries)

    @property
    def support(self) -> tuple:
        return tuple(k for k, _ in self.entries)

    def as_dict(self) -> dict:
        return dict(self.entries)


Point = Union[Scalar, Seq]


class Space:
    """Common interface of the normed domains."""

    kind: str = ""
    point_type: type = object

    def _check(self, p):
        if not isinstance(p, self.point_type):
            raise StructureError(
                f"{type(p).__name__} point used with {self.kind} space"
            )

    def norm(self, p: Point) -> Number:
        raise NotImplementedError

    def distance(self, x: Point, y: Point) -> Number:
        raise NotImplementedError

    def contains(self, p: Point) -> bool:
        raise NotImplementedError

    def combine(self, a: Number, x: Point, b: Number, y: Point) -> Point:
        """Return ``a*x + b*y``."""
        raise NotImplementedError

    def snap(self, p: Point) -> Point:
        """Clamp values that overshoot a bound by at most the float slack."""
        return p

    def sample_annulus(self, eta, radius_max, count, seed) -> list:
        raise NotImplementedError

    def sample_ball(self, center, radius, count, seed) -> list:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


def _stream(tag: str, *parts) -> random.Random:
    # str seeds are hashed with sha512, so streams do not depend on PYTHONHASHSEED
    return random.Random("|".join([tag] + [repr(p) for p in parts]))


def _radius(rng: random.Random, lo: float, hi: float, open_lo: float) -> float:
    """Draw a radius in ``[lo, hi]`` strictly above ``open_lo``.

    Log-uniform when ``lo > 0``, uniform otherwise.
    """
    for _ in range(64):
        if lo > 0:
            r = math.exp(rng.uniform(math.log(lo), math.log(hi)))
        else:
            r = rng.uniform(lo, hi)
        r = min(r, hi)
        if r > open_lo and r >= lo:
            return r
    return hi


@dataclass(frozen=True)
class RealInterval(Space):
    """Closed interval ``[lower, upper]`` of the real line; ``upper=None`` is +inf."""

    lower: Number = 1
    upper: Number | None = None

    kind = "RealInterval"
    point_type = Scalar

    def __post_init__(self):
        if self.upper is not None and self.upper < self.lower:
            raise ValueError("empty interval")

    def norm(self, p):
        self._check(p)
        return abs(p.value)

    def distance(self, x, y):
        self._check(x)
        self._check(y)
        return abs(x.value - y.value)

    def contains(self, p):
        if not isinstance(p, Scalar):
            return False
        if p.value < self.lower:
            return False
        return self.upper is None or p.value <= self.upper

    def combine(self, a, x, b, y):
        self._check(x)
        self._check(y)
        return Scalar(a * x.value + b * y.value)

    def snap(self, p):
        self._check(p)
        v = p.value
        if v < self.lower and self.lower - v <= slack(v, self.lower):
            return Scalar(self.lower)
        if self.upper is not None and v > self.upper and v - self.upper <= slack(v, self.upper):
            return Scalar(self.upper)
        return p

    def _bands(self, eta, radius_max):
        """Nonempty value ranges ``(lo, hi, sign)`` whose norms fall in the band."""
        upper = math.inf if self.upper is None else float(self.upper)
        lower = float(self.lower)
        bands = []
        # positive values v with eta < v <= radius_max
        lo, hi = max(float(eta), lower, 0.0), min(float(radius_max), upper)
        if hi >= lo and hi > eta:
            bands.append((lo, hi, 1))
        # negative values v = -s with eta < s <= radius_max
        lo, hi = max(float(eta), -upper, 0.0), min(float(radius_max), -lower)
        if hi >= lo and hi > eta:
            bands.append((lo, hi, -1))
        return bands

    def sample_annulus(self, eta, radius_max, count, seed):
        if not eta < radius_max:
            raise SamplerError(f"empty band: eta={eta} >= radius_max={radius_max}")
        bands = self._bands(eta, radius_max)
        if not bands:
            raise SamplerError(
                f"no point of {self.to_dict()} has norm in ({eta}, {radius_max}]"
            )
        rng = _stream("annulus", self.to_dict(), seed, eta, radius_max, count)
        out = []
        for _ in range(count):
            lo, hi, sign = bands[rng.randrange(len(bands))]
            r = _radius(rng, lo, hi, float(eta))
            out.append(Scalar(sign * r))
        return out

    def sample_ball(self, center, radius, count, seed):
        self._check(center)
        c = float(center.value)
        lo = max(float(self.lower), c - radius)
        hi = c + radius if self.upper is None else min(float(self.upper), c + radius)
        rng = _stream("ball", self.to_dict(), center, seed, radius, count)
        edges = [Scalar(lo), Scalar(hi)]
        pts = edges + [Scalar(rng.uniform(lo, hi)) for _ in range(max(count - 2, 0))]
        return pts[:count]

    def to_dict(self):
        return {"kind": self.kind, "params": {"lower": self.lower, "upper": self.upper}}


@dataclass(frozen=True)
class C0Box(Space):
    """``{x in c0 : 0 <= x(n) <= n}`` under the supremum norm."""

    kind = "C0Box"
    point_type = Seq

    def norm(self, p):
        self._check(p)
        return max((abs(v) for _, v in p.entries), default=0)

    def distance(self, x, y):
        self._check(x)
        self._check(y)
        a, b = x._lookup, y._lookup
        best = 0
        for k in a.keys() | b.keys():
            d = abs(a.get(k, 0) - b.get(k, 0))
            if d > best:
                best = d
        return best

    def contains(self, p):
        if not isinstance(p, Seq):
            return False
        return all(0 <= v <= k for k, v in p.entries)

    def combine(self, a, x, b, y):
        self._check(x)
        self._check(y)
        xa, ya = x._lookup, y._lookup
        return Seq({k: a * xa.get(k, 0) + b * ya.get(k, 0) for k in xa.keys() | ya.keys()})

    def snap(self, p):
        self._check(p)
        out = {}
        for k, v in p.entries:
            if v < 0 and -v <= slack(v):
                v = 0
            elif v > k and v - k <= slack(v, k):
                v = k
            out[k] = v
        return Seq(out)

    def _random_point(self, rng, r):
        """A box point of norm exactly ``r`` with up to 8 nonzero entries."""
        top = math.ceil(r)
        n = top + rng.randrange(max(1, top))
        size = rng.randint(1, 8)
        entries = {n: r}
        pool = max(2 * n, 8)
        while len(entries) < size:
            k = rng.randint(1, pool)
            if k not in entries:
                entries[k] = rng.uniform(0.0, min(k, r))
        return Seq._trusted({k: v for k, v in entries.items() if v})

    def sample_annulus(self, eta, radius_max, count, seed):
        if not eta < radius_max or radius_max <= 0:
            raise SamplerError(f"empty band: eta={eta}, radius_max={radius_max}")
        rng = _stream("annulus", self.to_dict(), seed, eta, radius_max, count)
        lo = max(float(eta), 0.0)
        out = []
        for _ in range(count):
            r = _radius(rng, lo, float(radius_max), float(eta))
            out.append(self._random_point(rng, r))
        return out

    def sample_ball(self, center, radius, count, seed):
        """Points of the box within sup distance ``radius`` of ``center``.

        Every other sample puts one coordinate at distance exactly
        ``radius`` when the box allows it.
        """
        self._check(center)
        rng = _stream("ball", self.to_dict(), center, seed, radius, count)
        base = center.as_dict()
        top = max(list(base) + [math.ceil(radius) + 1, 8])
        out = []
        for i in range(count):
            keys = set(base) | {rng.randint(1, 2 * top) for _ in range(rng.randint(1, 8))}
            y = {}
            for k in keys:
                c = base.get(k, 0)
                lo, hi = max(0.0, c - radius), min(float(k), c + radius)
                y[k] = rng.uniform(lo, hi)
            if i % 2 == 0:
                for k in sorted(keys, key=lambda k: -k):
                    c = base.get(k, 0)
                    if c + radius <= k:
                        y[k] = c + radius
                        break
                    if c - radius >= 0:
                        y[k] = c - radius
                        break
            out.append(Seq(y))
        return out

    def to_dict(self):
        return {"kind": self.kind, "params": {}}


# -- serialization --------------------------------------------------------


def to_jsonable(v):
    """Numbers for JSON: ints stay ints, fractions become floats."""
    v = normalize(v)
    if isinstance(v, Fraction):
        return float(v)
    return v


def point_to_json(p: Point):
    if isinstance(p, Scalar):
        return to_jsonable(p.value)
    if isinstance(p, Seq):
        return {str(k): to_jsonable(v) for k, v in p.entries}
    raise StructureError(f"not a point: {p!r}")


def point_from_json(obj) -> Point:
    if isinstance(obj, dict):
        return Seq(obj)
    return Scalar(obj)


def space_from_dict(d: dict) -> Space:
    kind, params = d["kind"], d.get("params", {})
    if kind == "RealInterval":
        return RealInterval(params.get("lower", 1), params.get("upper"))
    if kind == "C0Box":
        return C0Box()
    raise ValueError(f"unknown space kind {kind!r}")


def parse_number(text: str) -> Number:
    """Parse a numeric literal, keeping integers exact."""
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    if "/" in text:
        return normalize(Fraction(text))
    return float(text)


def parse_point(space: Space, text: str) -> Point:
    """Parse a command-line point literal for ``space``.

    Scalars are plain decimals. Sequences use ``{index:value,...}``; the
    literals ``0`` and ``{}`` both denote the zero sequence.
    """
    text = text.strip()
    if isinstance(space, C0Box):
        if text in ("0", "{}", ""):
            return Seq()
        body = text.strip("{}").strip()
        entries = {}
        for item in filter(None, (s.strip() for s in body.split(","))):
            k, _, v = item.partition(":")
            if not _:
                raise ValueError(f"bad sequence entry {item!r}")
            entries[int(k.strip().strip("'\""))] = parse_number(v)
        return Seq(entries)
    return Scalar(parse_number(text))


def format_point(p: Point) -> str:
    if isinstance(p, Scalar):
        return repr(to_jsonable(p.value))
    return "{" + ",".join(f"{k}:{to_jsonable(v)!r}" for k, v in p.entries) + "}"


def points_equal(x: Point, y: Point) -> bool:
    return type(x) is type(y) and x == y


def iter_values(p: Point) -> Iterable[Number]:
    if isinstance(p, Scalar):
        yield p.value
    else:
        for _, v in p.entries:
            yield v
