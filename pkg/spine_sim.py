"""
Continuum spine simulation

A leaf picked by the leaf-growth measure in the Brownian CRT sits at the end
of a spine whose subtree masses are exp(-xi(theta(s))) for a subordinator
xi and the Lamperti time change theta of index 1/2. Jumps of xi_mu are
-log x where x is the mass fraction kept at a branch point, and the coupled
xi_nu jumps by -log c(x) at the same instants. The extinction time of the
time change is the height of the leaf.

The discrete counterpart, the size chain of the leaf-growth descent, lives
at the end of this module.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import cumulative_trapezoid, quad
from scipy.interpolate import PchipInterpolator

from config import Config, SpineMeasure
from errors import DomainError
from exact_combinatorics import LOG_2, log_c_weight, log_catalan
from streams import StreamPurpose, make_rng, run_replicas

logger = logging.getLogger(__name__)

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
LOG_SQRT_2_OVER_PI = math.log(SQRT_2_OVER_PI)

# jumps above this size carry less than 1e-15 of the rate for either measure
P_MAX = 80.0

# target growth of xi_mu per simulated block
BLOCK_XI = 40.0


# ----------------------------------------------------------------------
# jump law


def _log_selection(p, measure: SpineMeasure):
    """log w(e^-p) where w(x) is c(x) for nu and x for the uniform leaf"""
    p = np.asarray(p, dtype=float)
    if measure is SpineMeasure.NU:
        return -2.0 * p + np.log1p(-2.0 * np.expm1(-p))
    return -p


def nu_jump(p, measure: SpineMeasure = SpineMeasure.NU):
    """Jump of the coupled coordinate when xi_mu jumps by p"""
    return -_log_selection(p, measure)


def _log_density(p, measure: SpineMeasure):
    """log of the jump density in p: sqrt(2/pi) w(x) x (x(1-x))^(-3/2), x = e^-p"""
    p = np.asarray(p, dtype=float)
    log_one_minus_x = np.log(-np.expm1(-p))
    return (LOG_SQRT_2_OVER_PI + _log_selection(p, measure) - p
            - 1.5 * (-p + log_one_minus_x))


def _small_jump_shape(p: float, measure: SpineMeasure) -> float:
    """p^(3/2) times the jump density; tends to sqrt(2/pi) as p -> 0"""
    if p == 0.0:
        return SQRT_2_OVER_PI
    return p ** 1.5 * math.exp(float(_log_density(p, measure)))


def _coupled_ratio(p: float, measure: SpineMeasure) -> float:
    if measure is SpineMeasure.UNIFORM:
        return 1.0
    if p == 0.0:
        return 0.0
    return float(nu_jump(p, measure)) / p


def _jump_moment(measure: SpineMeasure, coordinate: str, lo: float, hi: float) -> float:
    """int_lo^hi (jump of coordinate) dpi(p); lo = 0 goes through an algebraic weight"""
    if coordinate == "mu":
        def jump(p):
            return p
    elif coordinate == "nu":
        def jump(p):
            return float(nu_jump(p, measure))
    else:
        raise DomainError(f"unknown coordinate {coordinate!r}")

    total = 0.0
    if lo == 0.0:
        split = min(hi, 1.0)
        # p * density = p^(-1/2) * (jump / p) * shape
        value, _ = quad(
            lambda p: (1.0 if coordinate == "mu" else _coupled_ratio(p, measure))
            * _small_jump_shape(p, measure),
            0.0, split, weight="alg", wvar=(-0.5, 0.0), epsabs=1e-14, epsrel=1e-12, limit=200)
        total += value
        lo = split
    if hi > lo:
        value, _ = quad(lambda ell: jump(math.exp(ell)) * math.exp(float(_log_density(math.exp(ell), measure)) + ell),
                        math.log(lo), math.log(hi), epsabs=1e-14, epsrel=1e-12, limit=200)
        total += value
    return total


def jump_law_mean(measure: SpineMeasure = SpineMeasure.NU, coordinate: str = "mu") -> float:
    """
    Mean jump per unit time, int s dpi(s)

    For the leaf-growth spine this is sqrt(2 pi) for xi_mu and
    gamma * sqrt(2 pi) for xi_nu.
    """
    return _jump_moment(measure, coordinate, 0.0, P_MAX)


@dataclass
class JumpLaw:
    """
    Jumps of size >= eps_cut, tabulated for inverse-CDF sampling

    Smaller jumps are replaced by the deterministic drifts drift_mu and
    drift_nu, their mean contribution per unit time.
    """
    measure: SpineMeasure
    eps_cut: float
    rate: float
    drift_mu: float
    drift_nu: float
    mean_mu: float
    mean_nu: float
    inverse: PchipInterpolator = field(repr=False)

    @classmethod
    def build(cls, measure: SpineMeasure = SpineMeasure.NU, eps_cut: Optional[float] = None,
              knots: Optional[int] = None) -> "JumpLaw":
        eps_cut = Config.EPS_CUT if eps_cut is None else eps_cut
        knots = Config.INVERSE_CDF_KNOTS if knots is None else knots
        if not 0.0 < eps_cut < P_MAX:
            raise DomainError(f"eps_cut must lie in (0, {P_MAX})")

        ell = np.linspace(math.log(eps_cut), math.log(P_MAX), knots)
        density = np.exp(_log_density(np.exp(ell), measure) + ell)
        cdf = cumulative_trapezoid(density, ell, initial=0.0)
        cdf /= cdf[-1]
        keep = np.concatenate(([True], np.diff(cdf) > 0.0))
        inverse = PchipInterpolator(cdf[keep], ell[keep])

        rate, _ = quad(lambda l: math.exp(float(_log_density(math.exp(l), measure)) + l),
                       math.log(eps_cut), math.log(P_MAX), epsabs=1e-14, epsrel=1e-12, limit=200)
        law = cls(
            measure=measure,
            eps_cut=eps_cut,
            rate=rate,
            drift_mu=_jump_moment(measure, "mu", 0.0, eps_cut),
            drift_nu=_jump_moment(measure, "nu", 0.0, eps_cut),
            mean_mu=jump_law_mean(measure, "mu"),
            mean_nu=jump_law_mean(measure, "nu"),
            inverse=inverse,
        )
        if law.compensated_fraction > 0.1:
            logger.warning("eps_cut=%g compensates %.1f%% of the mean jump", eps_cut,
                           100 * law.compensated_fraction)
        logger.debug("jump law %s eps=%g rate=%.4f drift=%.6f", measure.value, eps_cut, rate, law.drift_mu)
        return law

    @property
    def compensated_fraction(self) -> float:
        return self.drift_mu / self.mean_mu

    def draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return np.exp(self.inverse(rng.random(count)))


@lru_cache(maxsize=16)
def jump_law(measure: SpineMeasure = SpineMeasure.NU, eps_cut: Optional[float] = None,
             knots: Optional[int] = None) -> JumpLaw:
    """Shared read-only table per (measure, eps_cut, knots)"""
    return JumpLaw.build(measure, eps_cut, knots)


# ----------------------------------------------------------------------
# paths


@dataclass
class LevyJumpStream:
    """Atoms (time, size) of the truncated Poisson point process, sorted by time"""
    times: np.ndarray
    sizes: np.ndarray
    eps_cut: float
    drift: float


@dataclass
class SpinePathSample:
    """
    Coupled subordinator paths on [0, horizon]

    Both paths are piecewise linear between jumps with slopes drift_mu and
    drift_nu. Segment k starts at starts[k] (0 or a jump time).
    """
    stream: LevyJumpStream
    jumps_nu: np.ndarray
    drift_nu: float
    horizon: float
    measure: SpineMeasure = SpineMeasure.NU
    starts: np.ndarray = field(init=False, repr=False)
    xi_mu_start: np.ndarray = field(init=False, repr=False)
    xi_nu_start: np.ndarray = field(init=False, repr=False)
    clock: np.ndarray = field(init=False, repr=False)
    extinction: float = field(init=False)
    tail_bound: float = field(init=False)

    def __post_init__(self):
        d = self.stream.drift
        times = self.stream.times
        self.starts = np.concatenate(([0.0], times))
        self.xi_mu_start = np.concatenate(([0.0], np.cumsum(self.stream.sizes))) + d * self.starts
        self.xi_nu_start = np.concatenate(([0.0], np.cumsum(self.jumps_nu))) + self.drift_nu * self.starts
        ends = np.concatenate((times, [self.horizon]))
        pieces = np.exp(-self.xi_mu_start / 2.0) * (2.0 / d) * -np.expm1(-d * (ends - self.starts) / 2.0)
        self.clock = np.concatenate(([0.0], np.cumsum(pieces)))
        self.extinction = float(self.clock[-1])
        self.tail_bound = float(math.exp(-self.xi_mu(self.horizon) / 2.0) * 2.0 / d)

    @property
    def drift_mu(self) -> float:
        return self.stream.drift

    @property
    def jumps_mu(self) -> np.ndarray:
        return self.stream.sizes

    @property
    def flagged(self) -> bool:
        return self.tail_bound > 1e-4

    def _segment(self, t):
        return np.searchsorted(self.starts, t, side="right") - 1

    def xi_mu(self, t):
        t = np.asarray(t, dtype=float)
        k = self._segment(t)
        value = self.xi_mu_start[k] + self.drift_mu * (t - self.starts[k])
        return value if value.ndim else float(value)

    def xi_nu(self, t):
        t = np.asarray(t, dtype=float)
        k = self._segment(t)
        value = self.xi_nu_start[k] + self.drift_nu * (t - self.starts[k])
        return value if value.ndim else float(value)


def sample_spine_pair(rng: np.random.Generator, eps_cut: Optional[float] = None,
                      horizon: Optional[float] = None,
                      measure: SpineMeasure = SpineMeasure.NU,
                      law: Optional[JumpLaw] = None) -> SpinePathSample:
    """
    Sample (xi_mu, xi_nu) with jumps >= eps_cut and compensating drifts

    Without a horizon, blocks of time are added until the tail of the
    extinction integral, bounded through the drift alone by
    exp(-xi_mu(H)/2) * 2 / drift, falls below the configured tail.
    """
    if law is None:
        law = jump_law(measure, eps_cut)
    d = law.drift_mu
    times: List[np.ndarray] = []
    sizes: List[np.ndarray] = []

    def block(t0: float, length: float) -> float:
        count = rng.poisson(law.rate * length)
        times.append(np.sort(rng.uniform(t0, t0 + length, count)))
        drawn = law.draw(rng, count)
        sizes.append(drawn)
        return float(drawn.sum())

    if horizon is not None:
        if horizon <= 0:
            raise DomainError("horizon must be positive")
        block(0.0, horizon)
        end = horizon
    else:
        length = BLOCK_XI / law.mean_mu
        end = 0.0
        xi = 0.0
        for _ in range(10_000):
            xi += block(end, length) + d * length
            end += length
            if math.exp(-xi / 2.0) * 2.0 / d < Config.EXTINCTION_TAIL:
                break

    jump_times = np.concatenate(times) if times else np.empty(0)
    jump_sizes = np.concatenate(sizes) if sizes else np.empty(0)
    stream = LevyJumpStream(times=jump_times, sizes=jump_sizes, eps_cut=law.eps_cut, drift=d)
    path = SpinePathSample(stream=stream, jumps_nu=nu_jump(jump_sizes, law.measure),
                           drift_nu=law.drift_nu, horizon=end, measure=law.measure)
    if path.flagged:
        logger.warning("extinction tail bound %.3g above 1e-4 at horizon %.3g", path.tail_bound, end)
    return path


def extinction_time(path: SpinePathSample) -> Tuple[float, float]:
    """
    int_0^horizon exp(-xi_mu(t)/2) dt, exact per segment, and its tail bound

    Returns:
        tuple: (value, tail bound); the true extinction time lies in
        [value, value + tail bound]
    """
    return path.extinction, path.tail_bound


def theta(path: SpinePathSample, s) -> np.ndarray:
    """
    Lamperti time change: the t at which the clock int_0^t exp(-xi_mu/2) reaches s

    Values of s beyond the simulated clock are continued with the drift
    alone; s at or past the extinction of that continuation maps to inf.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    d = path.drift_mu
    k = np.clip(np.searchsorted(path.clock, s, side="right") - 1, 0, len(path.starts) - 1)
    arg = 1.0 - (s - path.clock[k]) * np.exp(path.xi_mu_start[k] / 2.0) * d / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(arg > 0.0, path.starts[k] - (2.0 / d) * np.log(arg), np.inf)
    # rounding may push t past the end of its segment
    ends = np.concatenate((path.starts[1:], [np.inf]))
    return np.minimum(t, ends[k])


def lamperti(path: SpinePathSample, s) -> Tuple[np.ndarray, np.ndarray]:
    """Mass processes (X_mu(s), X_nu(s)) = exp(-xi(theta(s)))"""
    t = theta(path, s)
    finite = np.isfinite(t)
    x_mu = np.zeros_like(t)
    x_nu = np.zeros_like(t)
    if finite.any():
        x_mu[finite] = np.exp(-np.atleast_1d(path.xi_mu(t[finite])))
        x_nu[finite] = np.exp(-np.atleast_1d(path.xi_nu(t[finite])))
    return x_mu, x_nu


def coupling_defect(path: SpinePathSample) -> float:
    """Largest gap between each xi_nu jump and -log w(e^-p) of its xi_mu partner"""
    if path.jumps_mu.size == 0:
        return 0.0
    return float(np.max(np.abs(path.jumps_nu - nu_jump(path.jumps_mu, path.measure))))


def dimension_exponent(paths: Sequence[SpinePathSample], eps_grid: Sequence[float]) -> pd.DataFrame:
    """
    Near-extinction exponents log X(I - eps) / log eps averaged over paths

    Returns:
        DataFrame: eps, mu_exponent, nu_exponent, ratio, paths
    """
    rows = []
    for eps in eps_grid:
        if not 0.0 < eps < 1.0:
            raise DomainError("eps must lie in (0, 1)")
        mu_values, nu_values = [], []
        for path in paths:
            if path.extinction <= eps:
                continue
            x_mu, x_nu = lamperti(path, path.extinction - eps)
            if x_mu[0] > 0.0 and x_nu[0] > 0.0:
                mu_values.append(math.log(x_mu[0]) / math.log(eps))
                nu_values.append(math.log(x_nu[0]) / math.log(eps))
        mu_mean = float(np.mean(mu_values)) if mu_values else float("nan")
        nu_mean = float(np.mean(nu_values)) if nu_values else float("nan")
        rows.append({"eps": eps, "mu_exponent": mu_mean, "nu_exponent": nu_mean,
                     "ratio": nu_mean / mu_mean if mu_mean else float("nan"), "paths": len(mu_values)})
    return pd.DataFrame(rows)


def spine_replica(seed: int, replica: int, measure: SpineMeasure, eps_cut: float,
                  eps_grid: Tuple[float, ...] = (), slope_time: float = 1.0) -> Dict[str, float]:
    """One path reduced to scalar statistics, cheap to send between processes"""
    rng = make_rng(seed, replica, StreamPurpose.SPINE)
    path = sample_spine_pair(rng, eps_cut=eps_cut, measure=measure)
    row = {
        "replica": replica,
        "extinction": path.extinction,
        "tail_bound": path.tail_bound,
        "xi_mu_slope": path.xi_mu(slope_time) / slope_time,
        "xi_nu_slope": path.xi_nu(slope_time) / slope_time,
    }
    for eps in eps_grid:
        x_mu, x_nu = lamperti(path, path.extinction - eps) if path.extinction > eps else (np.zeros(1), np.zeros(1))
        row[f"mu_exponent_{eps:g}"] = math.log(x_mu[0]) / math.log(eps) if x_mu[0] > 0 else float("nan")
        row[f"nu_exponent_{eps:g}"] = math.log(x_nu[0]) / math.log(eps) if x_nu[0] > 0 else float("nan")
    return row


def simulate_spines(replicas: int, seed: int, eps_cut: Optional[float] = None,
                    measure: SpineMeasure = SpineMeasure.NU, eps_grid: Sequence[float] = (),
                    threads: int = 1) -> pd.DataFrame:
    """Per-replica spine statistics as a frame, in replica order"""
    eps_cut = Config.EPS_CUT if eps_cut is None else eps_cut
    jobs = [(seed, r, measure, eps_cut, tuple(eps_grid)) for r in range(replicas)]
    return pd.DataFrame(run_replicas(spine_replica, jobs, threads))


def height_cdf(x):
    """CDF of the density 8 x^3 exp(-2 x^2), the height of a nu-typical leaf"""
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    return 1.0 - np.exp(-2.0 * x * x) * (1.0 + 2.0 * x * x)


def rayleigh_cdf(x):
    """CDF of 4 x exp(-2 x^2), the height of a uniform leaf"""
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    return -np.expm1(-2.0 * x * x)


def histogram(samples, bins: int = 50, upper: Optional[float] = None) -> pd.DataFrame:
    """Bin edges and counts with the two reference densities at bin centres"""
    samples = np.asarray(samples, dtype=float)
    upper = float(samples.max()) if upper is None else upper
    counts, edges = np.histogram(samples, bins=bins, range=(0.0, upper))
    centres = (edges[:-1] + edges[1:]) / 2.0
    return pd.DataFrame({
        "left": edges[:-1],
        "right": edges[1:],
        "count": counts,
        "nu_density": 8.0 * centres ** 3 * np.exp(-2.0 * centres ** 2),
        "uniform_density": 4.0 * centres * np.exp(-2.0 * centres ** 2),
    })


# ----------------------------------------------------------------------
# discrete spine


@dataclass
class DiscreteSpineChain:
    """
    Size chain of one leaf-growth descent

    sizes runs from n down to 0; log_mass[k] is the sum of log C over the
    first k steps, so -log_mass[-1] is -log M_n and steps is the height of
    the sampled leaf.
    """
    n: int
    sizes: np.ndarray
    log_mass: np.ndarray
    clock: Optional[np.ndarray] = None

    @property
    def steps(self) -> int:
        return len(self.sizes) - 1

    @property
    def neg_log_mass(self) -> float:
        return float(-self.log_mass[-1])

    @property
    def mu_trajectory(self) -> np.ndarray:
        return (2 * self.sizes + 1) / (2 * self.n + 1)

    @property
    def nu_trajectory(self) -> np.ndarray:
        return np.exp(self.log_mass)


class DiscreteSpineSampler:
    """
    Draws the next size a out of size m with probability 2 P(a, b) C(a, b), b = m-1-a

    Kernels for m up to the cache cap are kept as full cumulative arrays.
    Larger m are scanned from b = 0 upward in doubling chunks; the kernel
    tail in b decays like b^(-3/2), so the expected scan is O(sqrt(m)).
    """

    FIRST_CHUNK = 64

    def __init__(self, n_max: int, cache_cap: Optional[int] = None):
        self.n_max = n_max
        self.cache_cap = Config.KERNEL_CACHE_CAP if cache_cap is None else cache_cap
        self.log_catalan = log_catalan(np.arange(2 * n_max + 3))
        self._cdf: Dict[int, np.ndarray] = {}

    def _log_kernel(self, m: int, b: np.ndarray) -> np.ndarray:
        a = m - 1 - b
        s = a + b
        log_c = (np.log((a + 1) * (2 * a + 1) * (a + 3 * b + 3.0))
                 - np.log((s + 1.0) * (s + 2) * (2 * s + 3)))
        return LOG_2 + self.log_catalan[a] + self.log_catalan[b] - self.log_catalan[m] + log_c

    def cdf(self, m: int) -> np.ndarray:
        """Cumulative kernel over b = 0..m-1"""
        cached = self._cdf.get(m)
        if cached is None:
            cached = np.cumsum(np.exp(self._log_kernel(m, np.arange(m))))
            if m <= self.cache_cap:
                self._cdf[m] = cached
        return cached

    def next_size(self, m: int, u: float) -> int:
        if m <= self.cache_cap:
            index = int(np.searchsorted(self.cdf(m), u, side="right"))
            return m - 1 - min(index, m - 1)
        start, chunk, acc = 0, self.FIRST_CHUNK, 0.0
        while start < m:
            b = np.arange(start, min(start + chunk, m))
            running = acc + np.cumsum(np.exp(self._log_kernel(m, b)))
            index = int(np.searchsorted(running, u, side="right"))
            if index < len(b):
                return m - 1 - int(b[index])
            acc = float(running[-1])
            start += len(b)
            chunk *= 2
        return 0


def discrete_spine(n: int, rng: np.random.Generator, sampler: Optional[DiscreteSpineSampler] = None,
                   poissonize: bool = False) -> DiscreteSpineChain:
    """
    Run the descent size chain from n to absorption at 0

    Args:
        n (int): Starting size, n >= 1
        rng (Generator): Stream for the profile draws
        sampler (DiscreteSpineSampler): Shared kernel cache
        poissonize (bool): Also draw exponential holding times of rate sqrt(m)

    Returns:
        DiscreteSpineChain: sizes, cumulative log-masses and the optional clock
    """
    if n < 1:
        raise DomainError("discrete spine needs n >= 1")
    if sampler is None or sampler.n_max < n:
        sampler = DiscreteSpineSampler(n)
    sizes = [n]
    log_mass = [0.0]
    holding = [] if poissonize else None
    m = n
    while m > 0:
        if holding is not None:
            holding.append(rng.exponential(1.0 / math.sqrt(m)))
        a = sampler.next_size(m, rng.random())
        log_mass.append(log_mass[-1] + log_c_weight(a, m - 1 - a))
        sizes.append(a)
        m = a
    clock = np.concatenate(([0.0], np.cumsum(holding))) if holding is not None else None
    return DiscreteSpineChain(n=n, sizes=np.array(sizes), log_mass=np.array(log_mass), clock=clock)


def discrete_spine_replica(seed: int, replica: int, n: int) -> Tuple[float, int]:
    rng = make_rng(seed, replica, StreamPurpose.DISCRETE_SPINE)
    chain = discrete_spine(n, rng, _shared_sampler(n))
    return chain.neg_log_mass, chain.steps


@lru_cache(maxsize=4)
def _shared_sampler(n: int) -> DiscreteSpineSampler:
    return DiscreteSpineSampler(n)


def simulate_discrete_spines(n: int, replicas: int, seed: int, threads: int = 1) -> pd.DataFrame:
    """
    -log M_n and leaf heights over independent descents

    Columns: replica, neg_log_mass, gamma_hat (= neg_log_mass / log n),
    height, height_scaled (= height / (2 sqrt(2) sqrt(n))).
    """
    jobs = [(seed, r, n) for r in range(replicas)]
    results = run_replicas(discrete_spine_replica, jobs, threads)
    frame = pd.DataFrame(results, columns=["neg_log_mass", "height"])
    frame.insert(0, "replica", np.arange(replicas))
    frame["gamma_hat"] = frame["neg_log_mass"] / math.log(n) if n >= 2 else np.nan
    frame["height_scaled"] = frame["height"] / (2.0 * math.sqrt(2.0) * math.sqrt(n))
    return frame
