"""Discrete pmfs and chi-square testing utilities.

Everything here is deterministic numerics: log-space pmf evaluation, a
regularized incomplete gamma implementation for p-values, goodness-of-fit
against a reference pmf with expected-count bin merging, and a contingency
table independence test sharing the same machinery.
"""

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_ALPHA = 1e-4
MIN_EXPECTED_PER_BIN = 5.0
_GAMMA_TOL = 1e-12
_GAMMA_MAX_ITER = 10_000
_PMF_TAIL = 1e-12


def poisson_pmf(mean, k):
    """P(X = k) for X Poisson with the given mean.

    Evaluated in log space as exp(k*log(mean) - mean - lgamma(k+1)); the
    zero-mean distribution is the point mass at zero.
    """
    mean = float(mean)
    if not math.isfinite(mean) or mean < 0.0:
        raise ValueError(f"mean must be finite and >= 0, got {mean!r}")
    k = int(k)
    if k < 0:
        return 0.0
    if mean == 0.0:
        return 1.0 if k == 0 else 0.0
    return math.exp(k * math.log(mean) - mean - math.lgamma(k + 1))


def binomial_pmf(n, p, k):
    """P(X = k) for X Binomial(n, p), evaluated in log space."""
    n = int(n)
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    k = int(k)
    if k < 0 or k > n:
        return 0.0
    if p == 0.0:
        return 1.0 if k == 0 else 0.0
    if p == 1.0:
        return 1.0 if k == n else 0.0
    log_choose = (math.lgamma(n + 1) - math.lgamma(k + 1)
                  - math.lgamma(n - k + 1))
    return math.exp(log_choose + k * math.log(p) + (n - k) * math.log1p(-p))


def conditional_count_pmf(n, a, b, k):
    """Law of the count in a sub-region given n points in the enclosing one.

    For volumes a <= b this is Binomial(n, a / b): each of the n
    independently placed points lands in the sub-region with probability
    a / b.
    """
    a = float(a)
    b = float(b)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("volumes must be finite")
    if b <= 0.0:
        raise ValueError(f"enclosing volume must be > 0, got {b!r}")
    if a < 0.0 or a > b:
        raise ValueError(f"need 0 <= a <= b, got a={a!r}, b={b!r}")
    return binomial_pmf(n, a / b, k)


@dataclass(frozen=True)
class Pmf:
    """A reference pmf over non-negative integers with truncated support.

    The support is 0..upper, chosen so the truncated mass is at least
    1 - 1e-12.  kind is "poisson" or "binomial"; params carries (mean,) or
    (n, p).
    """

    kind: str
    params: tuple
    upper: int

    @classmethod
    def poisson(cls, mean):
        mean = float(mean)
        # Probe the pmf to find where cumulative mass clears the tail bound.
        if poisson_pmf(mean, 0) == 1.0:
            return cls("poisson", (mean,), 0)
        cap = int(math.ceil(mean + 12.0 * math.sqrt(mean) + 50.0))
        p = math.exp(-mean)
        cum = p
        upper = 0
        for k in range(1, cap + 1):
            if cum >= 1.0 - _PMF_TAIL:
                break
            p *= mean / k
            cum += p
            upper = k
        return cls("poisson", (mean,), upper)

    @classmethod
    def binomial(cls, n, p):
        p = float(p)
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {p!r}")
        return cls("binomial", (int(n), p), int(n))

    def mass(self, k):
        """P(X = k)."""
        if self.kind == "poisson":
            return poisson_pmf(self.params[0], k)
        return binomial_pmf(self.params[0], self.params[1], k)

    def masses(self):
        """Array of P(X = k) for k = 0..upper."""
        return np.array([self.mass(k) for k in range(self.upper + 1)])

    def mean(self):
        if self.kind == "poisson":
            return self.params[0]
        return self.params[0] * self.params[1]


def _gamma_p_series(s, x):
    """Lower regularized gamma P(s, x) by series, for x < s + 1."""
    ap = s
    term = 1.0 / s
    total = term
    for _ in range(_GAMMA_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _GAMMA_TOL:
            return total * math.exp(-x + s * math.log(x) - math.lgamma(s))
    raise ArithmeticError("gamma series did not converge")


def _gamma_q_fraction(s, x):
    """Upper regularized gamma Q(s, x) by continued fraction, for x >= s + 1."""
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_MAX_ITER):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_TOL:
            return math.exp(-x + s * math.log(x) - math.lgamma(s)) * h
    raise ArithmeticError("gamma continued fraction did not converge")


def regularized_gamma_q(s, x):
    """Upper regularized incomplete gamma Q(s, x) = Gamma(s, x) / Gamma(s).

    Series expansion below x = s + 1, continued fraction above, both run
    to 1e-12 relative tolerance.  Q(dof/2, stat/2) is the chi-square
    survival function used for p-values.
    """
    s = float(s)
    x = float(x)
    if not (math.isfinite(s) and s > 0.0):
        raise ValueError(f"s must be finite and > 0, got {s!r}")
    if not math.isfinite(x) or x < 0.0:
        raise ValueError(f"x must be finite and >= 0, got {x!r}")
    if x == 0.0:
        return 1.0
    if x < s + 1.0:
        return min(max(1.0 - _gamma_p_series(s, x), 0.0), 1.0)
    return min(max(_gamma_q_fraction(s, x), 0.0), 1.0)


@dataclass(frozen=True)
class GofReport:
    """Outcome of a chi-square test.

    bins describes the category grouping after merging: for
    goodness-of-fit a list of [low, high] count ranges (high None for an
    unbounded tail bin); for independence tests a dict with "rows" and
    "cols" entries of the same shape.  passed is p_value > alpha.
    """

    statistic: float
    dof: int
    p_value: float
    passed: bool
    alpha: float
    bins: object = field(repr=False)

    def to_dict(self):
        return {
            "statistic": self.statistic,
            "dof": self.dof,
            "p_value": self.p_value,
            "pass": self.passed,
            "alpha": self.alpha,
            "bins": self.bins,
        }


def _merge_tail_bins(observed, expected, edges):
    """Merge low-expectation bins inward from both ends.

    Starts from the upper end (the unbounded tail), then the lower end,
    until the end bins clear MIN_EXPECTED_PER_BIN.  Interior bins are left
    alone; for the unimodal reference pmfs used here they cannot fall
    below the ends' threshold.
    """
    obs = list(observed)
    exp = list(expected)
    spans = list(edges)
    while len(exp) > 1 and exp[-1] < MIN_EXPECTED_PER_BIN:
        exp[-2] += exp[-1]
        obs[-2] += obs[-1]
        spans[-2] = (spans[-2][0], spans[-1][1])
        del exp[-1], obs[-1], spans[-1]
    while len(exp) > 1 and exp[0] < MIN_EXPECTED_PER_BIN:
        exp[1] += exp[0]
        obs[1] += obs[0]
        spans[1] = (spans[0][0], spans[1][1])
        del exp[0], obs[0], spans[0]
    return obs, exp, spans


def chi_square_gof(observed, expected, total, alpha=DEFAULT_ALPHA):
    """Chi-square goodness-of-fit of observed counts against a Pmf.

    Args:
        observed: Counts indexed by value, i.e. observed[k] replications
            produced the value k (as from numpy.bincount).
        expected: Reference Pmf.
        total: Number of replications; must equal sum(observed).
        alpha: Significance level; the test passes when p_value > alpha.

    Returns:
        GofReport.  The expected count of the top bin is taken as the
        remaining mass total - sum(lower bins), so expected counts sum to
        the total exactly and the unbounded upper tail is covered.

    Raises:
        ValueError: On negative counts, a total mismatch, or fewer than
            two bins surviving the merge.
    """
    obs = np.asarray(observed, dtype=np.int64)
    if obs.ndim != 1:
        raise ValueError("observed must be 1-d")
    if np.any(obs < 0):
        raise ValueError("observed counts must be non-negative")
    total = int(total)
    if int(obs.sum()) != total:
        raise ValueError(
            f"total ({total}) must equal sum(observed) ({int(obs.sum())})")
    if total <= 0:
        raise ValueError("total must be positive")

    top = max(obs.size - 1, expected.upper)
    obs_full = np.zeros(top + 1, dtype=np.int64)
    obs_full[:obs.size] = obs
    exp_full = np.array([total * expected.mass(k) for k in range(top + 1)])
    # The last bin stands for "k >= top": assign it all remaining mass.
    exp_full[top] = total - float(exp_full[:top].sum())
    if exp_full[top] < 0.0:
        exp_full[top] = 0.0
    edges = [(k, k) for k in range(top)] + [(top, None)]

    obs_m, exp_m, spans = _merge_tail_bins(obs_full.tolist(),
                                           exp_full.tolist(), edges)
    if len(obs_m) < 2:
        raise ValueError(
            "fewer than two bins after merging; not enough data for a test")

    statistic = 0.0
    for o, e in zip(obs_m, exp_m):
        if e <= 0.0:
            raise ValueError(
                "zero expected count in a merged bin; the reference pmf "
                "cannot explain the observed value range")
        diff = o - e
        statistic += diff * diff / e
    dof = len(obs_m) - 1
    if not math.isfinite(statistic):
        p_value = 0.0
    else:
        p_value = regularized_gamma_q(dof / 2.0, statistic / 2.0)
    return GofReport(statistic=statistic, dof=dof, p_value=p_value,
                     passed=p_value > alpha, alpha=alpha,
                     bins=[[lo, hi] for lo, hi in spans])


def _merge_axis(table, spans, axis):
    """One tail merge step along an axis if its end groups are too thin.

    Returns (table, spans, changed).  A group is too thin when its
    smallest expected cell under independence is below the threshold.
    """
    rows = table.sum(axis=1)
    cols = table.sum(axis=0)
    total = table.sum()
    if total == 0:
        raise ValueError("contingency table is empty")
    expected = np.outer(rows, cols) / total
    if axis == 1:
        expected = expected.T
        table = table.T
    n = table.shape[0]
    changed = False
    if n > 2 and expected[-1].min() < MIN_EXPECTED_PER_BIN:
        table[-2] += table[-1]
        table = table[:-1]
        spans[-2] = (spans[-2][0], spans[-1][1])
        del spans[-1]
        changed = True
    elif n > 2 and expected[0].min() < MIN_EXPECTED_PER_BIN:
        table[1] += table[0]
        table = table[1:]
        spans[1] = (spans[0][0], spans[1][1])
        del spans[0]
        changed = True
    if axis == 1:
        table = table.T
    return table, spans, changed


def independence_test(joint, alpha=DEFAULT_ALPHA):
    """Chi-square independence test on a 2-d contingency table.

    Args:
        joint: (r, c) array; joint[i, j] replications produced value pair
            (i, j).
        alpha: Significance level; passes when p_value > alpha.

    Returns:
        GofReport with dof (r - 1)(c - 1) after merging.  Thin leading and
        trailing rows/columns (smallest expected cell under independence
        below threshold) are merged inward, mirroring the
        goodness-of-fit tail policy on both axes.

    Raises:
        ValueError: If the table is smaller than 2x2 (before or after
            merging), has negative entries, or is all zero.
    """
    table = np.array(joint, dtype=np.float64)
    if table.ndim != 2:
        raise ValueError("joint must be 2-d")
    if np.any(table < 0):
        raise ValueError("counts must be non-negative")
    if table.shape[0] < 2 or table.shape[1] < 2:
        raise ValueError("need at least a 2x2 table")

    row_spans = [(i, i) for i in range(table.shape[0])]
    col_spans = [(j, j) for j in range(table.shape[1])]
    changed = True
    while changed:
        changed = False
        table, row_spans, c1 = _merge_axis(table, row_spans, axis=0)
        table, col_spans, c2 = _merge_axis(table, col_spans, axis=1)
        changed = c1 or c2

    rows = table.sum(axis=1)
    cols = table.sum(axis=0)
    total = table.sum()
    if np.any(rows == 0) or np.any(cols == 0):
        raise ValueError("a margin is zero after merging; table degenerate")
    expected = np.outer(rows, cols) / total
    statistic = float(((table - expected) ** 2 / expected).sum())
    dof = (table.shape[0] - 1) * (table.shape[1] - 1)
    if not math.isfinite(statistic):
        p_value = 0.0
    else:
        p_value = regularized_gamma_q(dof / 2.0, statistic / 2.0)
    bins = {"rows": [[lo, hi] for lo, hi in row_spans],
            "cols": [[lo, hi] for lo, hi in col_spans]}
    return GofReport(statistic=statistic, dof=dof, p_value=p_value,
                     passed=p_value > alpha, alpha=alpha, bins=bins)


def empirical_mean_stderr(samples):
    """Sample mean and its standard error sqrt(variance / n).

    Variance is the plain mean squared deviation (no ddof correction);
    at the sample sizes used for gap pooling the difference is
    immaterial.

    Raises:
        ValueError: With fewer than two samples.
    """
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("need at least two samples")
    mean = float(arr.mean())
    stderr = float(arr.std() / math.sqrt(arr.size))
    return mean, stderr
