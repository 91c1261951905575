"""Point process sampling on regions.

Counts are drawn first, locations second: a homogeneous process of rate mu
on region B puts a Poisson(mu * volume(B)) number of points down, each
placed as an independent uniform draw on B.  Conditioning on the count,
merging independent processes, and independently coloring points are all
closed operations here, and each replication can run on its own stream so
parallel and sequential execution produce identical output.

When a region's volume is only known by Monte Carlo the point estimate
feeds the Poisson mean directly, so the realized rate carries the estimate's
error; the estimate's std_error quantifies it.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np

from pppkit import _kernels
from pppkit.errors import (DimensionMismatchError, RejectionLimitError,
                           ZeroMeasureRegionError)
from pppkit.randcore import RngStream
from pppkit.regions import MONTE_CARLO, Region, contains_batch

MAX_REJECTION_ATTEMPTS = 1_000_000
_RESAMPLE_ROUNDS = 64


@dataclass(frozen=True)
class PointCloud:
    """Points sampled on a region, with generation provenance.

    intensity is the generating rate per unit volume, or None for clouds
    produced by conditional sampling (where no rate is defined).
    provenance records the (seed, stream_id) of the generating stream.
    marks, when present, are small integer labels per point (source index
    after superposition, color after thinning).
    """

    dim: int
    points: np.ndarray = field(repr=False)
    region: Region
    intensity: float | None
    provenance: tuple
    marks: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise ValueError(
                f"points must have shape (n, {self.dim}), got {pts.shape}")
        object.__setattr__(self, "points", pts)
        if self.marks is not None:
            marks = np.ascontiguousarray(self.marks, dtype=np.int64)
            if marks.shape != (pts.shape[0],):
                raise ValueError("marks must have one entry per point")
            object.__setattr__(self, "marks", marks)

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class ArrivalTimes:
    """Occurrence times of a 1-d process on (0, t_horizon).

    times is strictly increasing; the endpoints are excluded.
    """

    t_horizon: float
    times: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = float(self.t_horizon)
        if not math.isfinite(t) or t <= 0.0:
            raise ValueError(f"t_horizon must be finite and > 0, got {t!r}")
        object.__setattr__(self, "t_horizon", t)
        times = np.ascontiguousarray(self.times, dtype=np.float64)
        if times.ndim != 1:
            raise ValueError("times must be 1-d")
        if times.size:
            if times[0] <= 0.0 or times[-1] >= t:
                raise ValueError("times must lie strictly inside (0, t_horizon)")
            if np.any(np.diff(times) <= 0.0):
                raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", times)

    def __len__(self):
        return self.times.size

    def gaps(self):
        """Inter-arrival gaps, including the gap from 0 to the first time."""
        if self.times.size == 0:
            return np.empty(0)
        return np.diff(self.times, prepend=0.0)


def _measure_is_positive(region):
    est = region.measure()
    if est.method == MONTE_CARLO:
        return est.value > 3.0 * est.std_error
    return est.value > 0.0


def _fill_points(region, rng, n, max_attempts):
    out = np.empty((n, region.dim), dtype=np.float64)
    if n == 0:
        return out
    prog = region._program
    lo, wid = region._frame
    filled, attempts, new_pos = _kernels.rejection_fill(
        rng._k0, rng._k1, rng._pos, prog.codes, prog.offs, prog.vals,
        lo, wid, out, max_attempts)
    rng._pos = new_pos
    if filled < n:
        raise RejectionLimitError(filled, attempts, max_attempts)
    return out


def sample_uniform_point(region, rng, max_attempts=MAX_REJECTION_ATTEMPTS):
    """One uniform point on the region, by rejection from its bounding box.

    Raises:
        ZeroMeasureRegionError: If the region's measure is zero (exactly,
            or statistically indistinguishable from zero when estimated).
        RejectionLimitError: If no candidate lands inside within
            max_attempts attempts.
    """
    if not _measure_is_positive(region):
        raise ZeroMeasureRegionError(
            "cannot sample a uniform point on a zero-measure region")
    return _fill_points(region, rng, 1, max_attempts)[0]


def sample_ppp(mu, region, rng, max_attempts=MAX_REJECTION_ATTEMPTS):
    """A homogeneous process realization of rate mu on the region.

    The count is Poisson(mu * measure(region).value); point locations are
    independent uniforms on the region.

    Args:
        mu: Rate per unit volume, >= 0 and finite.
        region: Region to sample on.
        rng: Stream supplying all randomness.

    Returns:
        PointCloud with intensity mu.
    """
    mu = float(mu)
    if not math.isfinite(mu) or mu < 0.0:
        raise ValueError(f"mu must be finite and >= 0, got {mu!r}")
    mean = mu * region.measure().value
    n = rng.poisson_count(mean)
    points = _fill_points(region, rng, n, max_attempts)
    return PointCloud(dim=region.dim, points=points, region=region,
                      intensity=mu, provenance=(rng.seed, rng.stream_id))


def sample_conditional(n, region, rng, max_attempts=MAX_REJECTION_ATTEMPTS):
    """Exactly n independent uniform points on the region.

    This is the conditional law of a homogeneous process given that its
    count equals n; no intensity is attached to the result.

    Raises:
        ZeroMeasureRegionError: If n > 0 on a zero-measure region.
    """
    n = int(n)
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if n > 0 and not _measure_is_positive(region):
        raise ZeroMeasureRegionError(
            f"cannot place {n} points on a zero-measure region")
    points = _fill_points(region, rng, n, max_attempts)
    return PointCloud(dim=region.dim, points=points, region=region,
                      intensity=None, provenance=(rng.seed, rng.stream_id))


def count_in(cloud, region):
    """Number of the cloud's points lying in the region."""
    if region.dim != cloud.dim:
        raise DimensionMismatchError(
            f"cloud has dimension {cloud.dim}, region has {region.dim}")
    if len(cloud) == 0:
        return 0
    return int(contains_batch(region, cloud.points).sum())


def superpose(clouds):
    """Merge independent realizations on a common region.

    All clouds must share the region and dimension and carry an intensity;
    the merged intensity is the sum of the parts.  Points are concatenated
    in input order and marks record each point's source cloud index.
    """
    clouds = list(clouds)
    if not clouds:
        raise ValueError("need at least one cloud")
    first = clouds[0]
    for c in clouds[1:]:
        if c.dim != first.dim:
            raise DimensionMismatchError("clouds differ in dimension")
        if c.region != first.region:
            raise ValueError("clouds must share the same region")
    if any(c.intensity is None for c in clouds):
        raise ValueError("superposition needs every cloud's intensity")
    points = np.concatenate([c.points for c in clouds], axis=0)
    marks = np.concatenate([np.full(len(c), i, dtype=np.int64)
                            for i, c in enumerate(clouds)])
    return PointCloud(dim=first.dim, points=points, region=first.region,
                      intensity=sum(c.intensity for c in clouds),
                      provenance=first.provenance, marks=marks)


def thin(cloud, probs, rng):
    """Split a cloud by independently coloring each point.

    Point order within each color follows the input order, and the output
    clouds partition the input points exactly.  Color i keeps intensity
    cloud.intensity * probs[i].

    Returns:
        One PointCloud per color, marked with the color index.
    """
    if cloud.intensity is None:
        raise ValueError("thinning needs the cloud's intensity")
    colors = rng.categoricals(probs, len(cloud))
    out = []
    for i in range(len(np.atleast_1d(np.asarray(probs)))):
        mask = colors == i
        pts = cloud.points[mask]
        out.append(PointCloud(
            dim=cloud.dim, points=pts, region=cloud.region,
            intensity=cloud.intensity * float(np.asarray(probs)[i]),
            provenance=(rng.seed, rng.stream_id),
            marks=np.full(pts.shape[0], i, dtype=np.int64)))
    return tuple(out)


def arrival_times(mu, t_horizon, rng, max_attempts=MAX_REJECTION_ATTEMPTS):
    """Occurrence times of a rate-mu process on (0, t_horizon).

    Sampled as a 1-d realization on [0, t_horizon], sorted.  Values that
    collide or touch the endpoints (possible only through floating point)
    are redrawn until the times are strictly increasing inside the open
    interval.
    """
    from pppkit.regions import Box

    t = float(t_horizon)
    if not math.isfinite(t) or t <= 0.0:
        raise ValueError(f"t_horizon must be finite and > 0, got {t!r}")
    region = Box((0.0,), (t,))
    cloud = sample_ppp(mu, region, rng, max_attempts)
    times = np.sort(cloud.points[:, 0])
    for _ in range(_RESAMPLE_ROUNDS):
        bad = (times <= 0.0) | (times >= t)
        if times.size > 1:
            bad[1:] |= times[1:] == times[:-1]
        n_bad = int(bad.sum())
        if n_bad == 0:
            return ArrivalTimes(t_horizon=t, times=times)
        fresh = _fill_points(region, rng, n_bad, max_attempts)[:, 0]
        times = np.sort(np.concatenate([times[~bad], fresh]))
    raise RuntimeError("could not resolve duplicate arrival times")


def replicate(fn, n_reps, seed, base_stream=0, parallel=False,
              max_workers=None):
    """Run fn(rng) across n_reps dedicated streams, in index order.

    Replication r receives RngStream(seed, base_stream + r).  With
    parallel=True the replications run on a thread pool; because every
    stream is independent and addressed by construction, the results are
    identical to the sequential run.
    """
    n_reps = int(n_reps)
    if n_reps < 0:
        raise ValueError("n_reps must be non-negative")

    def run(r):
        return fn(RngStream(seed, base_stream + r))

    if not parallel:
        return [run(r) for r in range(n_reps)]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(run, range(n_reps)))
