"""Sampling operations: membership, determinism, counting, merging,
coloring, arrival times, and replication."""

import math

import numpy as np
import pytest

from pppkit.errors import (DimensionMismatchError, RejectionLimitError,
                           ZeroMeasureRegionError)
from pppkit.process import (ArrivalTimes, PointCloud, arrival_times, count_in,
                            replicate, sample_conditional, sample_ppp,
                            sample_uniform_point, superpose, thin)
from pppkit.randcore import RngStream
from pppkit.regions import Ball, Box, contains_batch
from pppkit.stats import Pmf, chi_square_gof, conditional_count_pmf


def cloud_on(region, points, intensity=1.0, marks=None):
    return PointCloud(dim=region.dim, points=np.array(points, dtype=float),
                      region=region, intensity=intensity, provenance=(0, 0),
                      marks=marks)


def test_uniform_point_lands_inside(unit_square):
    ball = Ball((0.0, 0.0), 1.0)
    quarter = unit_square & Ball((0.0, 0.0), 0.5)
    for region in (unit_square, ball, quarter):
        rng = RngStream(12, 0)
        for _ in range(200):
            assert region.contains(sample_uniform_point(region, rng))


def test_uniform_point_stream_matches_conditional(unit_square):
    # Point-at-a-time draws and one conditional batch consume the stream
    # identically, so they yield the same points.
    rng = RngStream(5, 9)
    singles = np.array([sample_uniform_point(unit_square, rng)
                        for _ in range(50)])
    batch = sample_conditional(50, unit_square, RngStream(5, 9))
    assert np.array_equal(singles, batch.points)


def test_uniform_point_on_box_is_two_uniforms(unit_square):
    # The bounding box equals the region, so the first draw is accepted:
    # coordinates are the stream's first two unit uniforms.
    pt = sample_uniform_point(unit_square, RngStream(33, 2))
    assert np.array_equal(pt, RngStream(33, 2).unit_uniforms(2))


def test_ball_quadrant_symmetry():
    ball = Ball((0.0, 0.0), 1.0)
    cloud = sample_conditional(100_000, ball, RngStream(60, 0))
    frac = np.mean((cloud.points[:, 0] > 0) & (cloud.points[:, 1] > 0))
    assert abs(frac - 0.25) < 0.005


def test_zero_measure_regions_raise():
    flat = Box((0.0, 0.0), (0.0, 1.0))
    with pytest.raises(ZeroMeasureRegionError):
        sample_uniform_point(flat, RngStream(0, 0))
    with pytest.raises(ZeroMeasureRegionError):
        sample_conditional(3, flat, RngStream(0, 0))
    # n = 0 needs no measure at all.
    assert len(sample_conditional(0, flat, RngStream(0, 0))) == 0

    # Statistically-zero measure (empty intersection found by sampling).
    empty = Box((0.0, 0.0), (1.0, 1.0)) & Ball((5.0, 5.0), 0.1)
    with pytest.raises(ZeroMeasureRegionError):
        sample_uniform_point(empty, RngStream(0, 0))


def test_rejection_limit_error():
    # Two specks in a unit frame: exact measure 2e-6, so the zero-measure
    # guard passes but rejection has an acceptance rate of 2e-6.
    region = (Box((0.0, 0.0), (0.001, 0.001))
              | Box((0.999, 0.999), (1.0, 1.0)))
    with pytest.raises(RejectionLimitError) as err:
        sample_conditional(4, region, RngStream(1, 0), max_attempts=200)
    exc = err.value
    assert exc.max_attempts == 200
    assert exc.attempts >= 200
    assert 0.0 <= exc.acceptance_rate < 0.05
    assert "acceptance" in str(exc)


def test_sample_ppp_fields(unit_square):
    cloud = sample_ppp(5.0, unit_square, RngStream(42, 3))
    assert cloud.dim == 2
    assert cloud.region == unit_square
    assert cloud.intensity == 5.0
    assert cloud.provenance == (42, 3)
    assert cloud.marks is None
    assert contains_batch(unit_square, cloud.points).all()
    assert len(cloud) == cloud.points.shape[0]


def test_sample_ppp_zero_intensity(unit_square):
    assert len(sample_ppp(0.0, unit_square, RngStream(0, 0))) == 0
    with pytest.raises(ValueError):
        sample_ppp(-1.0, unit_square, RngStream(0, 0))


def test_sample_ppp_deterministic(unit_square):
    a = sample_ppp(5.0, unit_square, RngStream(9, 1))
    b = sample_ppp(5.0, unit_square, RngStream(9, 1))
    c = sample_ppp(5.0, unit_square, RngStream(9, 2))
    assert np.array_equal(a.points, b.points)
    assert not (len(a) == len(c) and np.array_equal(a.points, c.points))


def test_sample_conditional_exact_count(unit_square):
    for n in (0, 1, 10):
        cloud = sample_conditional(n, unit_square, RngStream(7, n))
        assert len(cloud) == n
        assert cloud.intensity is None
        assert contains_batch(unit_square, cloud.points).all()
    with pytest.raises(ValueError):
        sample_conditional(-1, unit_square, RngStream(0, 0))


def test_count_in(unit_square, left_half):
    cloud = cloud_on(unit_square, [(0.2, 0.2), (0.8, 0.8)])
    assert count_in(cloud, left_half) == 1
    assert count_in(cloud, unit_square) == 2
    empty = cloud_on(unit_square, np.empty((0, 2)))
    assert count_in(empty, left_half) == 0
    with pytest.raises(DimensionMismatchError):
        count_in(cloud, Box((0.0,), (1.0,)))


def test_count_in_ignores_point_order(unit_square, left_half):
    cloud = sample_conditional(40, unit_square, RngStream(3, 3))
    shuffled = cloud_on(unit_square,
                        cloud.points[np.random.default_rng(0).permutation(40)])
    assert count_in(cloud, left_half) == count_in(shuffled, left_half)


def test_superpose(unit_square):
    a = cloud_on(unit_square, [(0.1, 0.1), (0.2, 0.2), (0.3, 0.3)],
                 intensity=2.0)
    b = cloud_on(unit_square, [(0.5, 0.5)] * 4, intensity=3.0)
    merged = superpose([a, b])
    assert len(merged) == 7
    assert merged.intensity == 5.0
    assert merged.marks.tolist() == [0, 0, 0, 1, 1, 1, 1]
    assert np.array_equal(merged.points[:3], a.points)
    assert np.array_equal(merged.points[3:], b.points)

    empty = superpose([cloud_on(unit_square, np.empty((0, 2)), 2.0),
                       cloud_on(unit_square, np.empty((0, 2)), 3.0)])
    assert len(empty) == 0 and empty.intensity == 5.0


def test_superpose_validation(unit_square, left_half):
    a = cloud_on(unit_square, [(0.1, 0.1)])
    with pytest.raises(ValueError):
        superpose([])
    with pytest.raises(ValueError):
        superpose([a, cloud_on(left_half, [(0.1, 0.1)])])
    with pytest.raises(ValueError):
        superpose([a, cloud_on(unit_square, [(0.2, 0.2)], intensity=None)])
    with pytest.raises(DimensionMismatchError):
        superpose([a, cloud_on(Box((0.0,), (1.0,)), [(0.5,)])])


def test_thin_partition(unit_square):
    cloud = sample_ppp(20.0, unit_square, RngStream(8, 0))
    parts = thin(cloud, [0.25, 0.25, 0.5], RngStream(8, 1))
    assert sum(len(p) for p in parts) == len(cloud)
    recombined = np.concatenate([p.points for p in parts])
    assert sorted(map(tuple, recombined)) == sorted(map(tuple, cloud.points))
    for i, part in enumerate(parts):
        assert part.intensity == pytest.approx(cloud.intensity *
                                               [0.25, 0.25, 0.5][i])
        assert np.all(part.marks == i)
        assert part.region == unit_square


def test_thin_single_color(unit_square):
    cloud = sample_ppp(10.0, unit_square, RngStream(2, 0))
    (only,) = thin(cloud, [1.0], RngStream(2, 1))
    assert np.array_equal(only.points, cloud.points)
    assert only.intensity == cloud.intensity


def test_thin_validation(unit_square):
    cloud = sample_ppp(10.0, unit_square, RngStream(2, 0))
    with pytest.raises(ValueError):
        thin(cloud, [0.5, 0.4], RngStream(0, 0))
    conditional = sample_conditional(5, unit_square, RngStream(2, 2))
    with pytest.raises(ValueError):
        thin(conditional, [0.5, 0.5], RngStream(0, 0))


def test_conditional_count_law_three_configs(unit_square, left_half):
    # Count in A given n points on B is Binomial(n, vol(A)/vol(B)); checked
    # for A = B (point mass), an exact half, and a Monte-Carlo-measured A.
    n, reps = 6, 4000
    quarter = unit_square & Ball((0.0, 0.0), 0.5)
    q = quarter.measure().value

    counts = {"full": [], "half": [], "quarter": []}
    for r in range(reps):
        cloud = sample_conditional(n, unit_square, RngStream(90, r))
        counts["full"].append(count_in(cloud, unit_square))
        counts["half"].append(count_in(cloud, left_half))
        counts["quarter"].append(count_in(cloud, quarter))

    assert all(c == n for c in counts["full"])
    for key, ratio in (("half", 0.5), ("quarter", q)):
        rep = chi_square_gof(np.bincount(counts[key], minlength=n + 1),
                             Pmf.binomial(n, ratio), reps)
        assert rep.passed, key
    # The pmf route gives the same law.
    assert conditional_count_pmf(n, 0.5, 1.0, 3) == \
        pytest.approx(Pmf.binomial(n, 0.5).mass(3), rel=1e-12)


def test_two_in_three_probability(unit_square, left_half):
    # P(exactly 2 of 3 in the half) = 3/8, within multinomial bands.
    reps = 20_000
    hits = 0
    for r in range(reps):
        cloud = sample_conditional(3, unit_square, RngStream(41, r))
        if count_in(cloud, left_half) == 2:
            hits += 1
    p_hat = hits / reps
    band = 3.0 * math.sqrt(0.375 * 0.625 / reps)
    assert abs(p_hat - 0.375) <= band


def test_arrival_times_basic():
    arr = arrival_times(3.0, 10.0, RngStream(14, 0))
    assert isinstance(arr, ArrivalTimes)
    assert arr.t_horizon == 10.0
    assert np.all(np.diff(arr.times) > 0.0)
    assert arr.times.size == 0 or (arr.times[0] > 0.0
                                   and arr.times[-1] < 10.0)
    gaps = arr.gaps()
    assert gaps.size == len(arr)
    assert np.all(gaps > 0.0)
    assert arr.times[0] == gaps[0]

    assert len(arrival_times(0.0, 5.0, RngStream(0, 0))) == 0
    with pytest.raises(ValueError):
        arrival_times(1.0, 0.0, RngStream(0, 0))


def test_arrival_times_count_law():
    reps = 5000
    counts = np.array([len(arrival_times(3.0, 10.0, RngStream(15, r)))
                       for r in range(reps)])
    rep = chi_square_gof(np.bincount(counts), Pmf.poisson(30.0), reps)
    assert rep.passed


def test_arrival_times_validation_of_type():
    with pytest.raises(ValueError):
        ArrivalTimes(5.0, [1.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        ArrivalTimes(5.0, [0.0, 1.0])
    with pytest.raises(ValueError):
        ArrivalTimes(5.0, [1.0, 6.0])
    with pytest.raises(ValueError):
        ArrivalTimes(-1.0, [])


def test_point_cloud_validation(unit_square):
    with pytest.raises(ValueError):
        PointCloud(dim=2, points=np.zeros((3, 1)), region=unit_square,
                   intensity=1.0, provenance=(0, 0))
    with pytest.raises(ValueError):
        PointCloud(dim=2, points=np.zeros((3, 2)), region=unit_square,
                   intensity=1.0, provenance=(0, 0), marks=np.zeros(2))


def test_replicate_parallel_matches_sequential(unit_square):
    def job(rng):
        return sample_ppp(4.0, unit_square, rng).points

    seq = replicate(job, 16, seed=77, base_stream=100)
    par = replicate(job, 16, seed=77, base_stream=100, parallel=True,
                    max_workers=4)
    assert len(seq) == len(par) == 16
    for a, b in zip(seq, par):
        assert np.array_equal(a, b)


def test_replicate_stream_layout(unit_square):
    [only] = replicate(lambda rng: (rng.seed, rng.stream_id), 1, seed=3,
                       base_stream=9)
    assert only == (3, 9)
    assert replicate(lambda rng: rng.stream_id, 4, seed=0) == [0, 1, 2, 3]
