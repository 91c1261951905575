"""Statistical verification battery over the sampling engine.

Each check replays many fixed-seed realizations and certifies one
distributional property of the sampler at a chosen significance level:
the marginal count law, independence of counts in disjoint sub-regions,
the conditional count law given the total, additivity of merged
realizations, independent coloring, and the 1-d arrival-time view with
its exponential gaps.  Every replication runs on its own stream, so a
battery run is a pure function of (seed, reps, alpha).
"""

from dataclasses import dataclass
import math

import numpy as np

from pppkit.process import (arrival_times, count_in, replicate,
                            sample_conditional, sample_ppp, superpose, thin)
from pppkit.regions import Box
from pppkit.stats import (DEFAULT_ALPHA, Pmf, chi_square_gof,
                          empirical_mean_stderr, independence_test,
                          regularized_gamma_q)

CHECK_NAMES = ("count_law", "independence", "conditioning", "superposition",
               "thinning", "exp_gaps_1d")
DEFAULT_REPS = 20_000
MIN_REPS = 1000

# Default geometry: unit square split into left and right halves.
_MU = 5.0
_N_COND = 8
_THIN_MU = 6.0
_THIN_PROBS = (1.0 / 3.0, 2.0 / 3.0)
_GAP_MU = 2.0
_GAP_HORIZON = 50.0

# Each check draws from its own block of stream ids so adding reps to one
# check never shifts another check's randomness.
_STREAM_BLOCK = 1 << 20


@dataclass(frozen=True)
class CheckResult:
    """One battery check: a name, a verdict, and its supporting numbers.

    details holds only JSON-ready values (test report dicts, floats,
    bools), keyed by what they measure.
    """

    name: str
    passed: bool
    details: dict

    def to_dict(self):
        return {"name": self.name, "pass": self.passed, **self.details}


@dataclass(frozen=True)
class VerifyBattery:
    """Full battery outcome; passed is the conjunction of all checks run."""

    seed: int
    reps: int
    alpha: float
    checks: tuple
    passed: bool

    def to_dict(self):
        return {
            "seed": self.seed,
            "reps": self.reps,
            "alpha": self.alpha,
            "pass": self.passed,
            "checks": {c.name: c.to_dict() for c in self.checks},
        }


def _joint_table(left, right):
    table = np.zeros((int(left.max()) + 1, int(right.max()) + 1))
    np.add.at(table, (left, right), 1.0)
    return table


def _count_pass(seed, reps, region_b, region_a, parallel):
    """Replicated realizations on B: (total count, count in A) per rep."""

    def one(rng):
        cloud = sample_ppp(_MU, region_b, rng)
        return len(cloud), count_in(cloud, region_a)

    pairs = replicate(one, reps, seed, base_stream=0, parallel=parallel)
    totals = np.array([p[0] for p in pairs], dtype=np.int64)
    in_a = np.array([p[1] for p in pairs], dtype=np.int64)
    return totals, in_a


def _check_count_law(totals, reps, alpha, b_volume):
    gof = chi_square_gof(np.bincount(totals), Pmf.poisson(_MU * b_volume),
                         reps, alpha)
    return CheckResult("count_law", gof.passed, {"count_gof": gof.to_dict()})


def _check_independence(totals, in_a, alpha):
    gof = independence_test(_joint_table(in_a, totals - in_a), alpha)
    return CheckResult("independence", gof.passed,
                       {"independence": gof.to_dict()})


def _check_conditioning(seed, reps, totals, in_a, region_b, region_a, alpha,
                        parallel):
    """Count in A given the total, by both routes to the same law.

    Conditioned route: realizations whose total hit a fixed value, read
    off the shared replication pass.  Direct route: exactly that many
    points placed per replication.  Both must fit the same binomial.
    """
    ratio = region_a.measure().value / region_b.measure().value
    law = Pmf.binomial(_N_COND, ratio)

    cond_counts = in_a[totals == _N_COND]
    cond_gof = chi_square_gof(np.bincount(cond_counts, minlength=1),
                              law, cond_counts.size, alpha)

    def one(rng):
        return count_in(sample_conditional(_N_COND, region_b, rng), region_a)

    direct = np.array(replicate(one, reps, seed, base_stream=_STREAM_BLOCK,
                                parallel=parallel), dtype=np.int64)
    direct_gof = chi_square_gof(np.bincount(direct), law, reps, alpha)

    return CheckResult(
        "conditioning", cond_gof.passed and direct_gof.passed,
        {"conditioned_route": cond_gof.to_dict(),
         "conditioned_sample_size": int(cond_counts.size),
         "direct_route": direct_gof.to_dict()})


def _check_superposition(seed, reps, region_b, alpha, parallel):
    mu1, mu2 = 2.0, 3.0

    def one(rng):
        merged = superpose([sample_ppp(mu1, region_b, rng),
                            sample_ppp(mu2, region_b, rng)])
        return len(merged)

    totals = np.array(replicate(one, reps, seed, base_stream=2 * _STREAM_BLOCK,
                                parallel=parallel), dtype=np.int64)
    vol = region_b.measure().value
    gof = chi_square_gof(np.bincount(totals), Pmf.poisson((mu1 + mu2) * vol),
                        reps, alpha)
    return CheckResult("superposition", gof.passed,
                       {"count_gof": gof.to_dict()})


def _check_thinning(seed, reps, region_b, alpha, parallel):
    def one(rng):
        cloud = sample_ppp(_THIN_MU, region_b, rng)
        parts = thin(cloud, _THIN_PROBS, rng)
        sizes = tuple(len(p) for p in parts)
        return sizes + (sum(sizes) == len(cloud),)

    rows = replicate(one, reps, seed, base_stream=3 * _STREAM_BLOCK,
                     parallel=parallel)
    n0 = np.array([r[0] for r in rows], dtype=np.int64)
    n1 = np.array([r[1] for r in rows], dtype=np.int64)
    partition_ok = all(r[2] for r in rows)

    vol = region_b.measure().value
    gof0 = chi_square_gof(np.bincount(n0),
                          Pmf.poisson(_THIN_MU * _THIN_PROBS[0] * vol),
                          reps, alpha)
    gof1 = chi_square_gof(np.bincount(n1),
                          Pmf.poisson(_THIN_MU * _THIN_PROBS[1] * vol),
                          reps, alpha)
    corr = float(np.corrcoef(n0, n1)[0, 1])
    # 0.03 is calibrated for the default replication count; smaller runs
    # widen the band to hold the false-alarm rate.
    corr_bound = max(0.03, 4.42 / math.sqrt(reps))
    corr_ok = abs(corr) <= corr_bound

    return CheckResult(
        "thinning",
        gof0.passed and gof1.passed and corr_ok and partition_ok,
        {"color0_gof": gof0.to_dict(), "color1_gof": gof1.to_dict(),
         "correlation": corr, "correlation_bound": corr_bound,
         "partition_exact": partition_ok})


def _check_exp_gaps(seed, reps, alpha, parallel):
    """Arrival counts and pooled inter-arrival gaps on (0, t).

    Only gaps opening in the first half of the horizon are pooled: a gap
    opening at s is observed only if it closes before t, and the resulting
    length bias is exp(-mu*(t-s)), negligible for s <= t/2 but material
    near t.
    """

    def one(rng):
        arr = arrival_times(_GAP_MU, _GAP_HORIZON, rng)
        t = arr.times
        starts = np.concatenate([[0.0], t[:-1]]) if t.size else t
        gaps = arr.gaps()[starts <= _GAP_HORIZON / 2.0]
        return t.size, gaps

    rows = replicate(one, reps, seed, base_stream=4 * _STREAM_BLOCK,
                     parallel=parallel)
    counts = np.array([r[0] for r in rows], dtype=np.int64)
    pooled = np.concatenate([r[1] for r in rows])

    count_gof = chi_square_gof(np.bincount(counts),
                               Pmf.poisson(_GAP_MU * _GAP_HORIZON),
                               reps, alpha)
    mean, stderr = empirical_mean_stderr(pooled)
    target = 1.0 / _GAP_MU
    mean_ok = abs(mean - target) <= 3.0 * stderr
    z = (mean - target) / stderr
    mean_p = regularized_gamma_q(0.5, z * z / 2.0)

    return CheckResult(
        "exp_gaps_1d", count_gof.passed and mean_ok,
        {"count_gof": count_gof.to_dict(), "gap_mean": mean,
         "gap_stderr": stderr, "gap_mean_target": target,
         "gap_mean_p": mean_p, "gap_mean_within_3se": mean_ok,
         "pooled_gaps": int(pooled.size)})


def run_battery(seed, reps=DEFAULT_REPS, alpha=DEFAULT_ALPHA, checks=None,
                parallel=False):
    """Run the verification battery.

    Args:
        seed: Stream seed; together with reps it fixes every draw.
        reps: Replications per check, at least 1000 (the conditioned
            route needs a usable subsample).
        alpha: Significance level for each statistical test.
        checks: Iterable of check names to run, or None for all of
            CHECK_NAMES.
        parallel: Run replication loops on a thread pool.  Results are
            identical either way; this only changes wall-clock time.

    Returns:
        VerifyBattery; passed is True iff every selected check passed.

    Raises:
        ValueError: On unknown check names or too few replications.
    """
    reps = int(reps)
    if reps < MIN_REPS:
        raise ValueError(f"reps must be >= {MIN_REPS}, got {reps}")
    if checks is None:
        selected = CHECK_NAMES
    else:
        selected = tuple(checks)
        unknown = set(selected) - set(CHECK_NAMES)
        if unknown:
            raise ValueError(f"unknown checks: {sorted(unknown)}")
        if not selected:
            raise ValueError("no checks selected")

    region_b = Box((0.0, 0.0), (1.0, 1.0))
    region_a = Box((0.0, 0.0), (0.5, 1.0))

    need_pass1 = {"count_law", "independence", "conditioning"} & set(selected)
    totals = in_a = None
    if need_pass1:
        totals, in_a = _count_pass(seed, reps, region_b, region_a, parallel)

    results = []
    for name in CHECK_NAMES:
        if name not in selected:
            continue
        if name == "count_law":
            results.append(_check_count_law(
                totals, reps, alpha, region_b.measure().value))
        elif name == "independence":
            results.append(_check_independence(totals, in_a, alpha))
        elif name == "conditioning":
            results.append(_check_conditioning(
                seed, reps, totals, in_a, region_b, region_a, alpha, parallel))
        elif name == "superposition":
            results.append(_check_superposition(
                seed, reps, region_b, alpha, parallel))
        elif name == "thinning":
            results.append(_check_thinning(seed, reps, region_b, alpha,
                                           parallel))
        elif name == "exp_gaps_1d":
            results.append(_check_exp_gaps(seed, reps, alpha, parallel))

    return VerifyBattery(seed=seed, reps=reps, alpha=alpha,
                         checks=tuple(results),
                         passed=all(r.passed for r in results))
