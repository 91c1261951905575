"""Region construction, membership, measures, and the text grammar."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pppkit.errors import DimensionMismatchError, RegionParseError
from pppkit.randcore import RngStream
from pppkit.regions import (Ball, Box, Difference, Intersection, Union,
                            contains_batch, format_region, parse_region)

# Volume of the d-dimensional unit ball, d = 1..5.
UNIT_BALL_VOLUMES = [2.0, math.pi, 4.188790204786391,
                     4.934802200544679, 5.263789013914325]


def test_box_validation():
    with pytest.raises(ValueError):
        Box((0.0, 0.0), (1.0, -1.0))
    with pytest.raises(DimensionMismatchError):
        Box((0.0,), (1.0, 1.0))
    with pytest.raises(ValueError):
        Box((), ())
    with pytest.raises(ValueError):
        Box((0.0,), (float("inf"),))
    Box((0.0, 0.0), (0.0, 1.0))  # degenerate is allowed


def test_ball_validation():
    with pytest.raises(ValueError):
        Ball((0.0,), -0.5)
    with pytest.raises(ValueError):
        Ball((float("nan"),), 1.0)
    assert Ball((0.0,), 0.0).radius == 0.0


def test_contains_closed_conventions(unit_square):
    assert unit_square.contains((0.0, 0.0))
    assert unit_square.contains((1.0, 1.0))
    assert not unit_square.contains((1.0, 1.0 + 1e-12))

    ball = Ball((0.0, 0.0), 1.0)
    assert ball.contains((1.0, 0.0))
    assert ball.contains((0.6, 0.8))
    assert not ball.contains((0.0, 1.0 + 1e-9))

    # Difference removes the closed right operand, boundary included.
    carved = unit_square - Box((0.25, 0.25), (0.75, 0.75))
    assert carved.contains((0.1, 0.1))
    assert not carved.contains((0.25, 0.25))
    assert not carved.contains((0.5, 0.5))


def test_contains_validation(unit_square):
    with pytest.raises(DimensionMismatchError):
        unit_square.contains((0.5,))
    with pytest.raises(ValueError):
        unit_square.contains(("a", "b"))


def test_operators_build_nodes(unit_square, left_half):
    assert isinstance(unit_square | left_half, Union)
    assert isinstance(unit_square & left_half, Intersection)
    assert isinstance(unit_square - left_half, Difference)
    with pytest.raises(TypeError):
        Union(unit_square, "not a region")
    with pytest.raises(DimensionMismatchError):
        unit_square | Box((0.0,), (1.0,))


def test_bounding_boxes():
    a = Box((0.0, 0.0), (1.0, 1.0))
    b = Box((2.0, -1.0), (3.0, 0.5))
    hull = (a | b).bounding_box()
    assert hull.lo == (0.0, -1.0) and hull.hi == (3.0, 1.0)

    overlap = (a & Ball((0.0, 0.0), 0.5)).bounding_box()
    assert overlap.lo == (0.0, 0.0) and overlap.hi == (0.5, 0.5)

    empty = (a & Box((5.0, 5.0), (6.0, 6.0))).bounding_box()
    assert empty._exact_value() == 0.0

    assert (a - b).bounding_box() == a
    assert Ball((1.0, 2.0), 0.5).bounding_box() == \
        Box((0.5, 1.5), (1.5, 2.5))


def test_exact_measures():
    est = Box((0.0, -1.0), (2.0, 3.0)).measure()
    assert est.method == "exact" and est.std_error == 0.0
    assert est.value == 8.0

    for d, want in enumerate(UNIT_BALL_VOLUMES, start=1):
        got = Ball((0.0,) * d, 1.0).measure().value
        assert math.isclose(got, want, rel_tol=1e-12)

    assert math.isclose(Ball((0.0, 0.0), 0.5).measure().value, math.pi / 4,
                        rel_tol=1e-12)
    assert Box((0.0, 0.0), (0.0, 1.0)).measure().value == 0.0


def test_disjoint_union_measure_exact():
    a = Box((0.0, 0.0), (1.0, 1.0))
    b = Box((1.0, 0.0), (2.0, 1.0))       # shares a face with a
    c = Box((5.0, 5.0), (6.0, 7.0))
    est = (a | b | c).measure()
    assert est.method == "exact"
    assert est.value == 4.0

    overlapping = a | Box((0.5, 0.0), (1.5, 1.0))
    assert overlapping.measure().method == "monte_carlo"


def test_box_difference_measure_exact():
    outer = Box((0.0, 0.0), (2.0, 2.0))
    inner = Box((0.5, 0.5), (1.5, 1.5))
    est = (outer - inner).measure()
    assert est.method == "exact"
    assert est.value == 3.0

    not_contained = outer - Box((1.5, 1.5), (2.5, 2.5))
    assert not_contained.measure().method == "monte_carlo"


def test_measure_is_deterministic():
    r1 = Box((0.0, 0.0), (1.0, 1.0)) & Ball((0.0, 0.0), 0.5)
    r2 = Box((0.0, 0.0), (1.0, 1.0)) & Ball((0.0, 0.0), 0.5)
    assert r1.measure() == r2.measure()
    assert r1.measure() is r1.measure()  # cached on the instance


def test_measure_mc_unit_disk():
    disk = Ball((0.0, 0.0), 1.0) & Box((-1.0, -1.0), (1.0, 1.0))
    est = disk.measure_mc(RngStream(17, 0), 1_000_000)
    assert est.method == "monte_carlo"
    assert est.samples_used == 1_000_000
    assert est.std_error > 0.0
    assert abs(est.value - math.pi) <= 3.0 * est.std_error


def test_measure_mc_quarter_disk():
    quarter = Box((0.0, 0.0), (1.0, 1.0)) & Ball((0.0, 0.0), 0.5)
    est = quarter.measure()
    assert est.method == "monte_carlo"
    assert abs(est.value - math.pi / 16.0) <= 4.0 * est.std_error


def test_measure_mc_validation_and_edges():
    quarter = Box((0.0, 0.0), (1.0, 1.0)) & Ball((0.0, 0.0), 0.5)
    with pytest.raises(ValueError):
        quarter.measure_mc(RngStream(0, 0), 99)

    # Zero-volume frame short-circuits without consuming draws.
    flat = Box((0.0, 0.0), (1.0, 0.0)) & Ball((0.5, 0.0), 0.1)
    rng = RngStream(0, 0)
    est = flat.measure_mc(rng, 1000)
    assert est.value == 0.0 and est.method == "exact"
    assert rng.position == 0

    # Full hit rate: estimate equals the frame volume, zero spread.
    square_twice = Box((0.0, 0.0), (1.0, 1.0)) & Box((0.0, 0.0), (1.0, 1.0))
    est = square_twice.measure_mc(RngStream(3, 0), 1000)
    assert est.method == "monte_carlo"
    assert est.value == 1.0 and est.std_error == 0.0


def test_measure_mc_consumes_positionally():
    quarter = Box((0.0, 0.0), (1.0, 1.0)) & Ball((0.0, 0.0), 0.5)
    rng = RngStream(21, 4)
    quarter.measure_mc(rng, 500)
    assert rng.position == 1000
    # The next draws continue the stream exactly.
    tail = rng.unit_uniforms(8)
    assert np.array_equal(tail, RngStream(21, 4).unit_uniforms(1008)[1000:])


REGIONS_FOR_BATCH = [
    Box((0.0, 0.0), (1.0, 1.0)),
    Ball((0.3, 0.4), 0.6),
    (Box((0.0, 0.0), (1.0, 1.0)) - Ball((0.5, 0.5), 0.3))
    | Ball((1.2, 1.2), 0.1),
]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(-2, 2), st.floats(-2, 2)),
                min_size=1, max_size=20))
def test_contains_batch_matches_scalar(points):
    pts = np.array(points)
    for region in REGIONS_FOR_BATCH:
        flags = contains_batch(region, pts)
        assert flags.tolist() == [region.contains(p) for p in points]


def test_contains_batch_validation(unit_square):
    with pytest.raises(DimensionMismatchError):
        contains_batch(unit_square, np.zeros((4, 3)))


ROUND_TRIP_TEXTS = [
    "box:0,0;1,1",
    "ball:0;1",
    "ball:-1.5,2.25;0.75",
    "union(box:0,0;1,1,ball:2,2;0.5)",
    "union(box:0;1,box:2;3,box:4;5,ball:9;0.25)",
    "inter(box:0,0;1,1,ball:0,0;0.5)",
    "diff(box:0,0;2,1,box:1,0;2,1)",
    "box:-1e-3,2.5e2;0.001,2.6e2",
]


def test_grammar_round_trips():
    for text in ROUND_TRIP_TEXTS:
        region = parse_region(text)
        assert parse_region(format_region(region)) == region


def test_parse_whitespace_insensitive():
    assert parse_region(" box: 0 , 0 ; 1 , 1 ") == Box((0.0, 0.0), (1.0, 1.0))
    assert parse_region("union( box:0;1 , ball:3;1 )") == \
        Union(Box((0.0,), (1.0,)), Ball((3.0,), 1.0))


def test_parse_examples(unit_square):
    assert parse_region("box:0,0;1,1") == unit_square
    assert parse_region("diff(box:0,0;2,1, box:1,0;2,1)") == \
        Difference(Box((0.0, 0.0), (2.0, 1.0)), Box((1.0, 0.0), (2.0, 1.0)))
    interval = parse_region("ball:0;1")
    assert interval.dim == 1
    assert interval.contains((-1.0,)) and interval.contains((1.0,))
    assert not interval.contains((1.000001,))
    assert math.isclose(interval.measure().value, 2.0, rel_tol=1e-12)


def test_parse_errors_carry_position():
    for text, pos in [("", 0), ("box:0,0;1", 9), ("frob:1", 0),
                      ("box:0,0;1,1junk", 11), ("ball:0,0;", 9),
                      ("diff(box:0;1)", 12), ("union(box:0;1,box:0,0;1,1)", 25),
                      ("box:a,b;1,1", 4)]:
        with pytest.raises(RegionParseError) as err:
            parse_region(text)
        assert err.value.position == pos, text


def test_parse_negative_radius_rejected():
    with pytest.raises(RegionParseError):
        parse_region("ball:0,0;-1")


def test_format_region_rejects_non_region():
    with pytest.raises(TypeError):
        format_region("box:0;1")


def test_str_is_grammar(unit_square):
    assert parse_region(str(unit_square)) == unit_square
