"""Axis-aligned regions of d-dimensional space with CSG composition.

Regions are closed sets built from boxes and balls combined by union,
intersection, and difference.  Membership uses the closed-set convention
throughout: box faces and ball surfaces belong to the region, and a
difference removes the closed right operand.  Volumes are computed exactly
for a few structurally recognizable shapes and by hit-or-miss Monte Carlo
otherwise.
"""

import math
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from pppkit import _kernels
from pppkit.errors import DimensionMismatchError, RegionParseError
from pppkit.randcore import RngStream

OP_BOX = 0
OP_BALL = 1
OP_UNION = 2
OP_INTER = 3
OP_DIFF = 4

DEFAULT_MC_SAMPLES = 1_000_000
MIN_MC_SAMPLES = 100

# Fixed internal seed for the default-budget Monte Carlo measure, so that
# measure() is a deterministic function of the region alone.
_MEASURE_SEED = 0x9E3779B97F4A7C15

EXACT = "exact"
MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class MeasureEstimate:
    """A volume value with its uncertainty and provenance.

    std_error is zero exactly when the value is exact; for Monte Carlo
    estimates it is the binomial standard error scaled by the sampling
    frame volume.
    """

    value: float
    std_error: float
    method: str
    samples_used: int


@dataclass(frozen=True)
class _Program:
    """A region flattened to a postfix opcode program.

    codes/offs are parallel int32 arrays (opcode, parameter offset) and
    vals is the flat float64 parameter pool.  Both kernel backends
    evaluate this representation identically.
    """

    codes: np.ndarray
    offs: np.ndarray
    vals: np.ndarray


def _as_point_tuple(values, what):
    try:
        out = tuple(float(v) for v in values)
    except (TypeError, ValueError):
        raise ValueError(f"{what} must be a sequence of numbers") from None
    if not out:
        raise ValueError(f"{what} must have at least one coordinate")
    if not all(math.isfinite(v) for v in out):
        raise ValueError(f"{what} must be finite")
    return out


class Region:
    """Base class for all region shapes.

    Subclasses are frozen dataclasses, so regions compare structurally and
    are hashable.  Set operators are overloaded: ``a | b``, ``a & b`` and
    ``a - b`` build Union, Intersection, and Difference nodes.
    """

    @property
    def dim(self):
        raise NotImplementedError

    def contains(self, point):
        """Whether the point lies in the region (closed-set convention)."""
        pt = _as_point_tuple(point, "point")
        if len(pt) != self.dim:
            raise DimensionMismatchError(
                f"point has dimension {len(pt)}, region has {self.dim}")
        return self._contains(pt)

    def _contains(self, pt):
        raise NotImplementedError

    def bounding_box(self):
        """A box containing the region.  Not necessarily tight."""
        raise NotImplementedError

    def _exact_value(self):
        """Exact volume when structurally recognizable, else None."""
        return None

    def measure(self):
        """Volume of the region as a MeasureEstimate.

        Structurally recognizable shapes (a single box, a single ball, a
        union of pairwise-disjoint boxes, a box difference with proven
        containment) are exact; anything else falls back to hit-or-miss
        Monte Carlo at the default budget with a fixed internal stream,
        making the result deterministic per region.  The estimate is
        cached on the instance.
        """
        return self._measure_cached

    @cached_property
    def _measure_cached(self):
        exact = self._exact_value()
        if exact is not None:
            return MeasureEstimate(float(exact), 0.0, EXACT, 0)
        return self.measure_mc(RngStream(_MEASURE_SEED, 0),
                               DEFAULT_MC_SAMPLES)

    def measure_mc(self, rng, n_samples=DEFAULT_MC_SAMPLES):
        """Hit-or-miss Monte Carlo volume using draws from rng.

        Args:
            rng: RngStream to draw from; consumes n_samples * dim draws.
            n_samples: Sample budget, at least 100.

        Returns:
            MeasureEstimate with method "monte_carlo" and
            std_error = frame_volume * sqrt(p * (1 - p) / n) for hit
            fraction p.  A zero-volume bounding box short-circuits to an
            exact zero.
        """
        n_samples = int(n_samples)
        if n_samples < MIN_MC_SAMPLES:
            raise ValueError(
                f"n_samples must be >= {MIN_MC_SAMPLES}, got {n_samples}")
        lo, wid = self._frame
        frame_vol = 1.0
        for w in wid:
            frame_vol *= w
        if frame_vol == 0.0:
            return MeasureEstimate(0.0, 0.0, EXACT, 0)
        prog = self._program
        hits = _kernels.mc_hits(rng._k0, rng._k1, rng._pos,
                                prog.codes, prog.offs, prog.vals,
                                lo, wid, n_samples)
        rng._pos += n_samples * self.dim
        p = hits / n_samples
        value = frame_vol * p
        std_error = frame_vol * math.sqrt(p * (1.0 - p) / n_samples)
        return MeasureEstimate(value, std_error, MONTE_CARLO, n_samples)

    @cached_property
    def _program(self):
        codes, offs, vals = [], [], []
        self._emit(codes, offs, vals)
        return _Program(np.array(codes, dtype=np.int32),
                        np.array(offs, dtype=np.int32),
                        np.array(vals, dtype=np.float64))

    @cached_property
    def _frame(self):
        """Bounding box as (lo, width) float64 arrays for the samplers."""
        bbox = self.bounding_box()
        lo = np.array(bbox.lo, dtype=np.float64)
        hi = np.array(bbox.hi, dtype=np.float64)
        return lo, hi - lo

    def _emit(self, codes, offs, vals):
        raise NotImplementedError

    def __or__(self, other):
        if not isinstance(other, Region):
            return NotImplemented
        return Union(self, other)

    def __and__(self, other):
        if not isinstance(other, Region):
            return NotImplemented
        return Intersection(self, other)

    def __sub__(self, other):
        if not isinstance(other, Region):
            return NotImplemented
        return Difference(self, other)

    def __str__(self):
        return format_region(self)


@dataclass(frozen=True)
class Box(Region):
    """Axis-aligned closed box given by lower and upper corners."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        object.__setattr__(self, "lo", _as_point_tuple(self.lo, "lo"))
        object.__setattr__(self, "hi", _as_point_tuple(self.hi, "hi"))
        if len(self.lo) != len(self.hi):
            raise DimensionMismatchError(
                f"lo has dimension {len(self.lo)}, hi has {len(self.hi)}")
        for a, b in zip(self.lo, self.hi):
            if a > b:
                raise ValueError(
                    f"box corner ordering violated: {a!r} > {b!r}")

    @property
    def dim(self):
        return len(self.lo)

    def _contains(self, pt):
        return all(a <= x <= b for a, x, b in zip(self.lo, pt, self.hi))

    def bounding_box(self):
        return self

    def _exact_value(self):
        vol = 1.0
        for a, b in zip(self.lo, self.hi):
            vol *= b - a
        return vol

    def _emit(self, codes, offs, vals):
        offs.append(len(vals))
        codes.append(OP_BOX)
        vals.extend(self.lo)
        vals.extend(self.hi)


@dataclass(frozen=True)
class Ball(Region):
    """Closed ball given by center and radius."""

    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center",
                           _as_point_tuple(self.center, "center"))
        r = float(self.radius)
        if not math.isfinite(r) or r < 0.0:
            raise ValueError(f"radius must be finite and >= 0, got {r!r}")
        object.__setattr__(self, "radius", r)

    @property
    def dim(self):
        return len(self.center)

    def _contains(self, pt):
        acc = 0.0
        for x, c in zip(pt, self.center):
            dx = x - c
            acc += dx * dx
        return acc <= self.radius * self.radius

    def bounding_box(self):
        r = self.radius
        return Box(tuple(c - r for c in self.center),
                   tuple(c + r for c in self.center))

    def _exact_value(self):
        d = self.dim
        return math.pi ** (d / 2.0) * self.radius ** d / math.gamma(d / 2.0 + 1.0)

    def _emit(self, codes, offs, vals):
        offs.append(len(vals))
        codes.append(OP_BALL)
        vals.extend(self.center)
        vals.append(self.radius * self.radius)


def _check_same_dim(left, right):
    if not isinstance(left, Region) or not isinstance(right, Region):
        raise TypeError("operands must be Region instances")
    if left.dim != right.dim:
        raise DimensionMismatchError(
            f"operands have dimensions {left.dim} and {right.dim}")


@dataclass(frozen=True)
class Union(Region):
    """Set union of two regions."""

    left: Region
    right: Region

    def __post_init__(self):
        _check_same_dim(self.left, self.right)

    @property
    def dim(self):
        return self.left.dim

    def _contains(self, pt):
        return self.left._contains(pt) or self.right._contains(pt)

    def bounding_box(self):
        a = self.left.bounding_box()
        b = self.right.bounding_box()
        return Box(tuple(min(x, y) for x, y in zip(a.lo, b.lo)),
                   tuple(max(x, y) for x, y in zip(a.hi, b.hi)))

    def _exact_value(self):
        boxes = _union_box_leaves(self)
        if boxes is None or not _pairwise_disjoint(boxes):
            return None
        return sum(b._exact_value() for b in boxes)

    def _emit(self, codes, offs, vals):
        self.left._emit(codes, offs, vals)
        self.right._emit(codes, offs, vals)
        codes.append(OP_UNION)
        offs.append(0)


@dataclass(frozen=True)
class Intersection(Region):
    """Set intersection of two regions."""

    left: Region
    right: Region

    def __post_init__(self):
        _check_same_dim(self.left, self.right)

    @property
    def dim(self):
        return self.left.dim

    def _contains(self, pt):
        return self.left._contains(pt) and self.right._contains(pt)

    def bounding_box(self):
        a = self.left.bounding_box()
        b = self.right.bounding_box()
        lo = tuple(max(x, y) for x, y in zip(a.lo, b.lo))
        hi = tuple(min(x, y) for x, y in zip(a.hi, b.hi))
        # An empty overlap collapses to a zero-volume box.
        hi = tuple(max(a_, b_) for a_, b_ in zip(lo, hi))
        return Box(lo, hi)

    def _emit(self, codes, offs, vals):
        self.left._emit(codes, offs, vals)
        self.right._emit(codes, offs, vals)
        codes.append(OP_INTER)
        offs.append(0)


@dataclass(frozen=True)
class Difference(Region):
    """Points of the left region not in the (closed) right region."""

    left: Region
    right: Region

    def __post_init__(self):
        _check_same_dim(self.left, self.right)

    @property
    def dim(self):
        return self.left.dim

    def _contains(self, pt):
        return self.left._contains(pt) and not self.right._contains(pt)

    def bounding_box(self):
        return self.left.bounding_box()

    def _exact_value(self):
        # Recognized exactly only for box minus contained box.
        if not (isinstance(self.left, Box) and isinstance(self.right, Box)):
            return None
        inside = all(a <= c and d <= b
                     for a, c, d, b in zip(self.left.lo, self.right.lo,
                                           self.right.hi, self.left.hi))
        if not inside:
            return None
        return self.left._exact_value() - self.right._exact_value()

    def _emit(self, codes, offs, vals):
        self.left._emit(codes, offs, vals)
        self.right._emit(codes, offs, vals)
        codes.append(OP_DIFF)
        offs.append(0)


def _union_box_leaves(region):
    """All leaves of a pure union tree when every leaf is a Box, else None."""
    if isinstance(region, Box):
        return [region]
    if isinstance(region, Union):
        left = _union_box_leaves(region.left)
        if left is None:
            return None
        right = _union_box_leaves(region.right)
        if right is None:
            return None
        return left + right
    return None


def _pairwise_disjoint(boxes):
    """Whether box interiors are pairwise disjoint (shared faces allowed)."""
    for i, a in enumerate(boxes):
        for b in boxes[i + 1:]:
            separated = any(ah <= bl or bh <= al
                            for al, ah, bl, bh in zip(a.lo, a.hi, b.lo, b.hi))
            if not separated:
                return False
    return True


def contains_batch(region, points):
    """Membership flags for an (n, dim) array of points, as a bool array."""
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != region.dim:
        raise DimensionMismatchError(
            f"points must have shape (n, {region.dim})")
    prog = region._program
    return _kernels.contains_many(prog.codes, prog.offs, prog.vals,
                                  pts).astype(bool)


# --- text grammar -----------------------------------------------------------

_NUMBER = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_REAL_START = set("+-.0123456789")


class _Parser:
    def __init__(self, text):
        self.text = "".join(text.split())
        self.i = 0

    def fail(self, message):
        raise RegionParseError(message, self.i)

    def at_end(self):
        return self.i >= len(self.text)

    def peek(self):
        return self.text[self.i] if self.i < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            self.fail(f"expected {ch!r}")
        self.i += 1

    def number(self):
        m = _NUMBER.match(self.text, self.i)
        if not m:
            self.fail("expected a number")
        self.i = m.end()
        return float(m.group())

    def numbers(self):
        out = [self.number()]
        while (self.peek() == ","
               and self.i + 1 < len(self.text)
               and self.text[self.i + 1] in _REAL_START):
            self.i += 1
            out.append(self.number())
        return out

    def expr(self):
        for keyword, cls in (("union(", Union), ("inter(", Intersection)):
            if self.text.startswith(keyword, self.i):
                self.i += len(keyword)
                node = self.expr()
                # Two or more operands, folded left.
                while self.peek() == ",":
                    self.i += 1
                    try:
                        node = cls(node, self.expr())
                    except DimensionMismatchError as exc:
                        self.fail(str(exc))
                self.expect(")")
                return node
        if self.text.startswith("diff(", self.i):
            self.i += 5
            left = self.expr()
            self.expect(",")
            right = self.expr()
            self.expect(")")
            try:
                return Difference(left, right)
            except DimensionMismatchError as exc:
                self.fail(str(exc))
        if self.text.startswith("box:", self.i):
            self.i += 4
            lo = self.numbers()
            self.expect(";")
            hi = self.numbers()
            try:
                return Box(lo, hi)
            except (ValueError, DimensionMismatchError) as exc:
                self.fail(str(exc))
        if self.text.startswith("ball:", self.i):
            self.i += 5
            center = self.numbers()
            self.expect(";")
            radius = self.number()
            try:
                return Ball(center, radius)
            except ValueError as exc:
                self.fail(str(exc))
        self.fail("expected 'box:', 'ball:', 'union(', 'inter(', or 'diff('")


def parse_region(text):
    """Parse the region grammar into a Region.

    The grammar is whitespace-insensitive:
        box:LO0,LO1,...;HI0,HI1,...
        ball:C0,C1,...;RADIUS
        union(EXPR,EXPR,...)   inter(EXPR,EXPR,...)   diff(EXPR,EXPR)

    union and inter take two or more operands (folded left); diff takes
    exactly two.

    Raises:
        RegionParseError: On malformed input, carrying the failure position
            within the whitespace-stripped text.
    """
    parser = _Parser(text)
    if parser.at_end():
        parser.fail("empty region expression")
    region = parser.expr()
    if not parser.at_end():
        parser.fail("unexpected trailing input")
    return region


def format_region(region):
    """Render a Region in the text grammar; round-trips through parse_region."""
    if isinstance(region, Box):
        return ("box:" + ",".join(repr(v) for v in region.lo)
                + ";" + ",".join(repr(v) for v in region.hi))
    if isinstance(region, Ball):
        return ("ball:" + ",".join(repr(v) for v in region.center)
                + ";" + repr(region.radius))
    if isinstance(region, Union):
        return (f"union({format_region(region.left)},"
                f"{format_region(region.right)})")
    if isinstance(region, Intersection):
        return (f"inter({format_region(region.left)},"
                f"{format_region(region.right)})")
    if isinstance(region, Difference):
        return (f"diff({format_region(region.left)},"
                f"{format_region(region.right)})")
    raise TypeError(f"not a region: {region!r}")
