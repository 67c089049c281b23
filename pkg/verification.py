"""
Invariant suites run by `leafgrowth verify`
Each check compares a computed value against its known target and records
the outcome, so the report says what held and by how much
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from scipy.stats import kstest

from config import VerifySuite
from exact_combinatorics import (GAMMA, best_of_three, c_weight, recurrence_rhs, split_prob,
                                 split_prob_factorial)
from growth_chain import uniformity_pushforward_exact
from leaf_measure import compute_measure, token_game_law
from spectrum import (beta_of_alpha, gamma_constant, height_moment, height_moment_closed,
                      integral_I, beta_identity, phi)
from spine_sim import height_cdf, jump_law_mean, simulate_spines
from tree_core import enumerate_all

logger = logging.getLogger(__name__)

SPINE_PATHS = 3000


@dataclass
class CheckResult:
    """Outcome of one invariant check"""
    name: str
    passed: bool
    value: Any = None
    expected: Any = None
    tolerance: Optional[float] = None
    detail: str = ""


@dataclass
class SuiteReport:
    suite: str
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def add_exact(self, name: str, value: Any, expected: Any, detail: str = "") -> None:
        self.checks.append(CheckResult(name, value == expected, str(value), str(expected), None, detail))

    def add_close(self, name: str, value: float, expected: float, tolerance: float,
                  relative: bool = False, detail: str = "") -> None:
        scale = abs(expected) if relative and expected != 0 else 1.0
        passed = bool(np.isfinite(value)) and abs(value - expected) <= tolerance * scale
        self.checks.append(CheckResult(name, passed, float(value), float(expected), tolerance, detail))

    def add_pvalue(self, name: str, pvalue: float, level: float, detail: str = "") -> None:
        """A goodness-of-fit check passes when its p-value is above the level"""
        passed = bool(np.isfinite(pvalue)) and pvalue > level
        self.checks.append(CheckResult(name, passed, float(pvalue), f"p > {level:g}", level, detail))

    def to_dict(self) -> Dict[str, Any]:
        return {"suite": self.suite, "passed": self.passed,
                "checks": [asdict(check) for check in self.checks]}


def _identities(report: SuiteReport, seed: int, threads: int) -> None:
    limit = 60
    mirror_ok = all(c_weight(a, b) + c_weight(b, a) == 1 for a in range(limit + 1) for b in range(limit + 1))
    report.add_exact("C(a,b) + C(b,a) = 1 for a, b <= 60", mirror_ok, True)

    recurrence_ok = all(recurrence_rhs(a, b) == split_prob(a, b)
                        for a in range(limit + 1) for b in range(limit + 1) if a + b >= 1)
    report.add_exact("uniform growth recurrence for P(a, b), a, b <= 60", recurrence_ok, True)

    urn_ok = all(best_of_three(a, b) == c_weight(a, b) for a in range(41) for b in range(41))
    report.add_exact("best-of-three equals C(a, b) for a, b <= 40", urn_ok, True)

    kernel_ok = all(sum((2 * split_prob(a, m - 1 - a) * c_weight(a, m - 1 - a) for a in range(m)),
                        Fraction(0)) == 1 for m in range(1, limit + 1))
    report.add_exact("sum_a 2 P(a, m-1-a) C(a, m-1-a) = 1 for m <= 60", kernel_ok, True)

    factorial_ok = all(split_prob_factorial(a, b) == split_prob(a, b) for a in range(31) for b in range(31))
    report.add_exact("factorial form of P(a, b) for a, b <= 30", factorial_ok, True)


def _uniformity(report: SuiteReport, seed: int, threads: int) -> None:
    for n in range(1, 8):
        report.add_exact(f"pushforward of uniform size-{n} trees is uniform",
                         uniformity_pushforward_exact(n), Fraction(0))
    game_ok = True
    for n in range(0, 6):
        for tree in enumerate_all(n):
            if token_game_law(tree) != compute_measure(tree, exact=True).exact_mass:
                game_ok = False
    report.add_exact("token game law equals the leaf-growth measure for n <= 5", game_ok, True)


def _spectrum(report: SuiteReport, seed: int, threads: int) -> None:
    report.add_close("I(0, 0)", integral_I(0.0, 0.0).value, 0.0, 1e-10)
    report.add_close("beta(0)", beta_of_alpha(0.0).beta, 0.0, 1e-9)
    report.add_close("beta(-1)", beta_of_alpha(-1.0).beta, -1.0, 1e-9)
    report.add_close("beta(1)", beta_of_alpha(1.0).beta, (5.0 - math.sqrt(13.0)) / 2.0, 1e-8)
    ratio, _, denominator = gamma_constant()
    report.add_close("drift denominator", denominator, math.pi, 1e-9)
    report.add_close("typical exponent", ratio, GAMMA, 1e-9)
    for alpha in (0.25, 0.5, 1.0, 2.0, 3.5):
        quadrature, closed = phi(alpha)
        report.add_close(f"Phi({alpha:g}) quadrature vs closed form", quadrature, closed, 1e-8, relative=True)
    for alpha in (1.0, 2.0, 2.5):
        quadrature, closed = beta_identity(alpha)
        report.add_close(f"Beta-function identity at {alpha:g}", quadrature, closed, 1e-8)
    for k in range(1, 7):
        report.add_close(f"height moment {k}", height_moment(k), height_moment_closed(k), 1e-12, relative=True)


def _spine(report: SuiteReport, seed: int, threads: int) -> None:
    root_2pi = math.sqrt(2.0 * math.pi)
    report.add_close("mean jump of xi_mu", jump_law_mean(coordinate="mu"), root_2pi, 1e-9)
    report.add_close("mean jump of xi_nu", jump_law_mean(coordinate="nu"), GAMMA * root_2pi, 1e-9)

    paths = SPINE_PATHS
    frame = simulate_spines(paths, seed, threads=threads)
    extinction = frame["extinction"].to_numpy()
    stderr = extinction.std(ddof=1) / math.sqrt(paths)
    report.add_close("mean extinction time", float(extinction.mean()), math.gamma(2.5) / math.sqrt(2.0),
                     4.0 * stderr, detail=f"{paths} paths, 4 standard errors")
    second = extinction ** 2
    report.add_close("second moment of the extinction time", float(second.mean()), 1.0,
                     4.0 * second.std(ddof=1) / math.sqrt(paths), detail=f"{paths} paths, 4 standard errors")
    report.add_pvalue("extinction time against 8x^3 exp(-2x^2)", kstest(extinction, height_cdf).pvalue, 1e-3,
                      detail=f"{paths} paths, Kolmogorov-Smirnov")
    for column, target in (("xi_mu_slope", root_2pi), ("xi_nu_slope", GAMMA * root_2pi)):
        slopes = frame[column].to_numpy()
        report.add_close(f"mean slope of {column[:-6]}", float(slopes.mean()), target,
                         4.0 * slopes.std(ddof=1) / math.sqrt(paths), detail=f"{paths} paths, 4 standard errors")


SUITES: Dict[VerifySuite, Callable[[SuiteReport, int, int], None]] = {
    VerifySuite.IDENTITIES: _identities,
    VerifySuite.UNIFORMITY: _uniformity,
    VerifySuite.SPECTRUM: _spectrum,
    VerifySuite.SPINE: _spine,
}


def run_suite(suite: VerifySuite, seed: int = 0, threads: int = 1) -> SuiteReport:
    """
    Run one invariant suite

    Args:
        suite (VerifySuite): Which suite
        seed (int): Master seed for the Monte-Carlo checks
        threads (int): Worker processes for the Monte-Carlo checks

    Returns:
        SuiteReport: every check with its outcome
    """
    report = SuiteReport(suite=suite.value)
    SUITES[suite](report, seed, threads)
    logger.debug("suite %s: %d checks, passed=%s", suite.value, len(report.checks), report.passed)
    return report
