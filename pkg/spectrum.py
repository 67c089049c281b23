"""
Multifractal spectrum numerics

beta(alpha) is the zero of the singular integral I(alpha, beta); it is also
the decay exponent of e_n(alpha) = E[sum_l nu(l)^(alpha+1)] over uniform
size-n trees, which the moment recursion computes directly.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import beta as beta_fn
from scipy.special import gammaln, logsumexp

from config import Config
from errors import BracketError, DomainError
from exact_combinatorics import LOG_2, LogWeightTable, c_weight, catalan, log_c_weight, split_prob
from leaf_measure import compute_measure
from tree_core import enumerate_all

logger = logging.getLogger(__name__)

SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass
class QuadratureConfig:
    """
    QUADPACK settings shared by every singular integral

    Endpoint power laws are absorbed into algebraic weights, so the
    remaining integrands are smooth on each half interval.
    """
    limit: int = 200
    epsabs: float = field(default_factory=lambda: Config.QUADRATURE_TOLERANCE)
    epsrel: float = 1e-12
    bracket_limit: float = 1e3

    def __post_init__(self):
        if self.epsabs <= 0 or self.epsrel <= 0:
            raise DomainError("quadrature tolerance must be positive")
        if self.limit < 1:
            raise DomainError("quadrature needs at least one subdivision")


class IntegralValue(NamedTuple):
    value: float
    error: float


@dataclass
class SpectrumResult:
    alpha: float
    beta: float
    bracket: Tuple[float, float]
    iterations: int
    residual: float
    error: float = 0.0


@dataclass
class MomentTable:
    """log e_n(alpha) for n = 0..N"""
    alpha: float
    log_e: np.ndarray

    @property
    def n_max(self) -> int:
        return len(self.log_e) - 1

    def to_frame(self) -> pd.DataFrame:
        n = np.arange(len(self.log_e))
        return pd.DataFrame({"n": n, "log_e": self.log_e, "e": np.exp(self.log_e)})


class SlopeFit(NamedTuple):
    slope: float
    intercept: float
    dyadic: float
    dyadic_series: Dict[int, float]
    window: Tuple[int, int]


# ----------------------------------------------------------------------
# singular quadrature


def _weighted(func: Callable, power: float, cfg: QuadratureConfig) -> IntegralValue:
    value, error = quad(func, 0.0, 0.5, weight="alg", wvar=(power, 0.0),
                        epsabs=cfg.epsabs, epsrel=cfg.epsrel, limit=cfg.limit)
    return IntegralValue(value, error)


def _symmetric_integral(power: float, head: Callable, tail_log: Callable, slope0: float,
                        cfg: QuadratureConfig) -> IntegralValue:
    """
    integral_0^1 (g(x) + g(1-x) - 1) p(x) dx for g(x) = x^(power + 3/2) head(x)

    The integrand is symmetric under x -> 1-x, so twice the [0, 1/2] part
    is taken. Near 0 the g(x) piece behaves like x^power and the
    g(1-x) - 1 piece like slope0 * x^(-1/2); both powers go into the
    algebraic weight. tail_log(x) must return log g(1-x).
    """
    def first(x):
        return head(x) * (1.0 - x) ** -1.5

    def second(x):
        if x == 0.0:
            return slope0
        return math.expm1(tail_log(x)) / x * (1.0 - x) ** -1.5

    a = _weighted(first, power, cfg)
    b = _weighted(second, -0.5, cfg)
    return IntegralValue(2.0 * (a.value + b.value), 2.0 * (a.error + b.error))


def _log_c_mirror(x: float) -> float:
    """log c(1-x) = 2 log(1-x) + log(1+2x)"""
    return 2.0 * math.log1p(-x) + math.log1p(2.0 * x)


def integral_I(alpha: float, beta: float, config: Optional[QuadratureConfig] = None) -> IntegralValue:
    """
    I(alpha, beta) = int_0^1 (c(x)^(a+1) x^(-b) + c(1-x)^(a+1) (1-x)^(-b) - 1) p(x) dx

    Raises:
        DomainError: when beta >= 2 alpha + 3/2, where the integral diverges
    """
    cfg = config or QuadratureConfig()
    if beta >= 2.0 * alpha + 1.5:
        raise DomainError(f"integral diverges for beta={beta} >= 2*alpha + 3/2 = {2 * alpha + 1.5}")
    k = alpha + 1.0

    return _symmetric_integral(
        power=2.0 * alpha + 0.5 - beta,
        head=lambda x: (3.0 - 2.0 * x) ** k,
        tail_log=lambda x: k * _log_c_mirror(x) - beta * math.log1p(-x),
        slope0=beta,
        cfg=cfg,
    )


def beta_of_alpha(alpha: float, config: Optional[QuadratureConfig] = None) -> SpectrumResult:
    """
    Zero of the strictly increasing map beta -> I(alpha, beta)

    The bracket is grown downward from 2 alpha + 3/2 - 0.1 (moving the top
    closer to the pole if I is still negative there), then refined with
    Brent's bracketed method to the root tolerance.

    Raises:
        BracketError: if no sign change is found within bracket_limit
    """
    cfg = config or QuadratureConfig()
    upper = 2.0 * alpha + 1.5
    evaluations = 0

    def f(b: float) -> float:
        nonlocal evaluations
        evaluations += 1
        return integral_I(alpha, b, cfg).value

    gap = 0.1
    hi = upper - gap
    f_hi = f(hi)
    while f_hi <= 0.0:
        gap /= 2.0
        if gap < 1e-12:
            raise BracketError(f"no positive value of I below the pole for alpha={alpha}",
                               {"alpha": alpha, "upper": upper, "last_beta": hi, "last_value": f_hi})
        hi = upper - gap
        f_hi = f(hi)

    width = 1.0
    lo = hi - width
    f_lo = f(lo)
    while f_lo > 0.0:
        if width > cfg.bracket_limit:
            raise BracketError(f"no negative value of I above -{cfg.bracket_limit} for alpha={alpha}",
                               {"alpha": alpha, "lo": lo, "hi": hi, "f_lo": f_lo, "f_hi": f_hi})
        hi, f_hi = lo, f_lo
        width *= 2.0
        lo = hi - width
        f_lo = f(lo)

    if f_lo == 0.0:
        root = lo
    else:
        root = brentq(f, lo, hi, xtol=Config.ROOT_TOLERANCE, maxiter=200)
    final = integral_I(alpha, root, cfg)
    if abs(final.value) >= 1e-9:
        logger.warning("beta(%g) residual %.3g above 1e-9", alpha, abs(final.value))
    logger.debug("beta(%g) = %.15g after %d evaluations", alpha, root, evaluations)
    return SpectrumResult(alpha=alpha, beta=float(root), bracket=(lo, hi), iterations=evaluations,
                          residual=abs(final.value), error=final.error)


def beta_grid(alphas: Sequence[float], config: Optional[QuadratureConfig] = None) -> List[SpectrumResult]:
    """The beta(alpha) curve over a grid"""
    cfg = config or QuadratureConfig()
    return [beta_of_alpha(float(alpha), cfg) for alpha in alphas]


def spectrum_frame(results: Sequence[SpectrumResult]) -> pd.DataFrame:
    return pd.DataFrame({
        "alpha": [r.alpha for r in results],
        "beta": [r.beta for r in results],
        "residual": [r.residual for r in results],
        "error": [r.error for r in results],
        "iterations": [r.iterations for r in results],
    })


# ----------------------------------------------------------------------
# Laplace exponent of the spine and related identities


def laplace_exponent(alpha: float) -> float:
    """Phi(alpha) = 2 sqrt(2) alpha Gamma(3/2 + alpha) / Gamma(2 + alpha)"""
    if alpha < 0:
        raise DomainError("Phi is evaluated for alpha >= 0")
    if alpha == 0:
        return 0.0
    return 2.0 * math.sqrt(2.0) * alpha * math.exp(gammaln(1.5 + alpha) - gammaln(2.0 + alpha))


def phi(alpha: float, config: Optional[QuadratureConfig] = None) -> Tuple[float, float]:
    """
    Phi(alpha) by quadrature and in closed form

    The quadrature integrand is (1 - c(x) x^alpha - c(1-x)(1-x)^alpha) p(x)
    scaled by 1 / sqrt(2 pi).

    Returns:
        tuple: (quadrature value, closed-form value)
    """
    if alpha < 0:
        raise DomainError("Phi is evaluated for alpha >= 0")
    cfg = config or QuadratureConfig()
    integral = _symmetric_integral(
        power=alpha + 0.5,
        head=lambda x: 3.0 - 2.0 * x,
        tail_log=lambda x: _log_c_mirror(x) + alpha * math.log1p(-x),
        slope0=-alpha,
        cfg=cfg,
    )
    return -integral.value / SQRT_2PI, laplace_exponent(alpha)


def height_moment(k: int) -> float:
    """E[height^k] of a nu-typical leaf: k! / prod_{i=1..k} Phi(i/2)"""
    if k < 0:
        raise DomainError("moment order must be non-negative")
    value = float(math.factorial(k))
    for i in range(1, k + 1):
        value /= laplace_exponent(i / 2.0)
    return value


def height_moment_closed(k: int) -> float:
    """Gamma((4 + k) / 2) / 2^(k/2)"""
    return math.exp(gammaln((4.0 + k) / 2.0)) / 2.0 ** (k / 2.0)


def beta_identity(alpha: float, config: Optional[QuadratureConfig] = None) -> Tuple[float, float]:
    """
    int_0^1 (1 - x^a - (1-x)^a) (x(1-x))^(-3/2) dx against 4a (B(a+1/2, 1/2) - B(3/2, a-1/2))

    Returns:
        tuple: (quadrature value, Beta-function value)
    """
    if alpha <= 0.5:
        raise DomainError("the identity needs alpha > 1/2")
    cfg = config or QuadratureConfig()
    integral = _symmetric_integral(
        power=alpha - 1.5,
        head=lambda x: 1.0,
        tail_log=lambda x: alpha * math.log1p(-x),
        slope0=-alpha,
        cfg=cfg,
    )
    closed = 4.0 * alpha * (beta_fn(alpha + 0.5, 0.5) - beta_fn(1.5, alpha - 0.5))
    return -integral.value, float(closed)


def _mirror_shape(y: float) -> float:
    """c(1-y) p(1-y) y^(3/2) = (1-y)^(1/2) (1+2y)"""
    return math.sqrt(1.0 - y) * (1.0 + 2.0 * y)


def gamma_constant(config: Optional[QuadratureConfig] = None) -> Tuple[float, float, float]:
    """
    The typical exponent as a ratio of two drift integrals

    numerator int (-log c(x)) c(x) p(x) dx, denominator int (-log x) c(x) p(x) dx.
    Each integral is split at 1/2; the left half carries x^(1/2) (and
    log x) weights, the right half is mapped to y = 1 - x and carries y^(-1/2).

    Returns:
        tuple: (ratio, numerator, denominator)
    """
    cfg = config or QuadratureConfig()
    opts = dict(epsabs=cfg.epsabs, epsrel=cfg.epsrel, limit=cfg.limit)

    def left_shape(x):
        return (3.0 - 2.0 * x) * (1.0 - x) ** -1.5

    # x^(1/2) log x weight on [0, 1/2]
    log_left, _ = quad(lambda x: -left_shape(x), 0.0, 0.5, weight="alg-loga", wvar=(0.5, 0.0), **opts)

    def denominator_right(y):
        ratio = 1.0 if y == 0.0 else -math.log1p(-y) / y
        return ratio * _mirror_shape(y)

    den_right, _ = quad(denominator_right, 0.0, 0.5, weight="alg", wvar=(-0.5, 0.0), **opts)
    denominator = log_left + den_right

    plain_left, _ = quad(lambda x: -math.log(3.0 - 2.0 * x) * left_shape(x), 0.0, 0.5,
                         weight="alg", wvar=(0.5, 0.0), **opts)

    def numerator_right(y):
        if y == 0.0:
            return 0.0
        return -_log_c_mirror(y) / y * _mirror_shape(y)

    num_right, _ = quad(numerator_right, 0.0, 0.5, weight="alg", wvar=(-0.5, 0.0), **opts)
    numerator = 2.0 * log_left + plain_left + num_right
    return numerator / denominator, numerator, denominator


# ----------------------------------------------------------------------
# moment recursion


def moment_recursion(alpha: float, n_max: int) -> MomentTable:
    """
    e_n(alpha) for n = 0..n_max by the profile recursion, in log domain

    e_n = sum_{a+b=n-1} P(a,b) (C(a,b)^(alpha+1) e_a + C(b,a)^(alpha+1) e_b),
    folded by symmetry into 2 sum_a P(a,b) C(a,b)^(alpha+1) e_a.
    """
    Config.check_cap("N", n_max, "MOMENT_CAP")
    if n_max < 0:
        raise DomainError("N must be non-negative")
    log_e = np.zeros(n_max + 1)
    if alpha == 0.0:
        # e_n(0) is the total mass
        return MomentTable(alpha=alpha, log_e=log_e)
    table = LogWeightTable.build(max(n_max, 1))
    k = alpha + 1.0
    for n in range(1, n_max + 1):
        a = np.arange(n)
        b = n - 1 - a
        terms = LOG_2 + table.log_split(a, b) + k * log_c_weight(a, b) + log_e[:n]
        log_e[n] = logsumexp(terms)
    return MomentTable(alpha=alpha, log_e=log_e)


def moment_recursion_exact(alpha: int, n_max: int) -> List[Fraction]:
    """Exact e_n for integer alpha >= -1 and n <= the exact-moment cap"""
    Config.check_cap("N", n_max, "EXACT_MOMENT_CAP")
    if alpha < -1 or int(alpha) != alpha:
        raise DomainError("exact moments need an integer alpha >= -1")
    k = int(alpha) + 1
    e = [Fraction(1)]
    for n in range(1, n_max + 1):
        total = Fraction(0)
        for a in range(n):
            b = n - 1 - a
            total += split_prob(a, b) * (c_weight(a, b) ** k * e[a] + c_weight(b, a) ** k * e[b])
        e.append(total)
    return e


def brute_force_moment(alpha: int, n: int) -> Fraction:
    """(1 / Cat(n)) sum over size-n trees of sum_l nu_t(l)^(alpha+1)"""
    k = int(alpha) + 1
    total = Fraction(0)
    for tree in enumerate_all(n):
        measure = compute_measure(tree, exact=True)
        total += sum((mass ** k for mass in measure.exact_mass.values()), Fraction(0))
    return total / catalan(n)


def slope_fit(table: MomentTable, window: Tuple[int, int]) -> SlopeFit:
    """
    Decay exponent of e_n over a window [lo, hi]

    The least-squares slope of -log e_n against log n is taken on a grid
    evenly spaced in log n. The dyadic ratio -log(e_2m / e_m) / log 2 is
    reported for every power of two m with 2m inside the window; its last
    value exposes residual drift.
    """
    lo, hi = int(window[0]), int(window[1])
    if lo < 2 or hi > table.n_max or hi <= lo:
        raise DomainError(f"degenerate slope window [{lo}, {hi}] for N={table.n_max}")
    grid = np.unique(np.geomspace(lo, hi, 256).round().astype(int))
    slope, intercept = np.polyfit(np.log(grid), -table.log_e[grid], 1)

    series: Dict[int, float] = {}
    m = 1 << max(0, math.ceil(math.log2(lo)))
    while 2 * m <= hi:
        series[m] = float(-(table.log_e[2 * m] - table.log_e[m]) / LOG_2)
        m *= 2
    dyadic = series[max(series)] if series else float("nan")
    return SlopeFit(float(slope), float(intercept), dyadic, series, (lo, hi))


def max_mass_exponent(records) -> float:
    """
    Empirical decay exponent of the largest leaf mass

    Fits the mean of -log max_l nu(l) against log n across the checkpoints
    of growth-chain records that carry it.
    """
    by_n: Dict[int, List[float]] = {}
    for record in records:
        if record.max_log_mass is not None and record.n >= 2:
            by_n.setdefault(record.n, []).append(record.max_log_mass)
    if len(by_n) < 2:
        raise DomainError("max-mass exponent needs records at two or more sizes")
    sizes = np.array(sorted(by_n))
    means = np.array([np.mean(by_n[n]) for n in sizes])
    slope, _ = np.polyfit(np.log(sizes), means, 1)
    return float(slope)
