"""Poisson point process sampling, regions, and statistical verification.

Build regions from boxes and balls with union, intersection, and
difference; sample homogeneous processes on them (or exactly n uniform
points); merge, color, and count realizations; and certify the
distributional claims with the built-in chi-square battery.  All sampling
is driven by counter-based streams addressed as (seed, stream_id), so
results are reproducible and replication-parallel by construction.
"""

from pppkit._kernels import BACKEND as backend
from pppkit.battery import (CheckResult, VerifyBattery, run_battery)
from pppkit.errors import (DimensionMismatchError, PppkitError,
                           RegionParseError, RejectionLimitError,
                           ZeroMeasureRegionError)
from pppkit.process import (ArrivalTimes, PointCloud, arrival_times, count_in,
                            replicate, sample_conditional, sample_ppp,
                            sample_uniform_point, superpose, thin)
from pppkit.randcore import RngStream
from pppkit.regions import (Ball, Box, Difference, Intersection,
                            MeasureEstimate, Region, Union, contains_batch,
                            format_region, parse_region)
from pppkit.stats import (GofReport, Pmf, binomial_pmf, chi_square_gof,
                          conditional_count_pmf, empirical_mean_stderr,
                          independence_test, poisson_pmf,
                          regularized_gamma_q)

__version__ = "0.1.0"

__all__ = [
    "ArrivalTimes", "Ball", "Box", "CheckResult", "Difference",
    "DimensionMismatchError", "GofReport", "Intersection", "MeasureEstimate",
    "PointCloud", "Pmf", "PppkitError", "Region", "RegionParseError",
    "RejectionLimitError", "RngStream", "Union", "VerifyBattery",
    "ZeroMeasureRegionError", "arrival_times", "backend", "binomial_pmf",
    "chi_square_gof", "conditional_count_pmf", "contains_batch", "count_in",
    "empirical_mean_stderr", "format_region", "independence_test",
    "parse_region", "poisson_pmf", "regularized_gamma_q", "replicate",
    "run_battery", "sample_conditional", "sample_ppp",
    "sample_uniform_point", "superpose", "thin",
]
