"""
Catalan numbers, split probabilities P(a, b) and leaf-growth weights C(a, b)

Exact values are Fractions; large-n evaluation goes through log-gamma
differences. P(a, b) is the probability that a uniform tree of size a+b+1
has profile (a, b); C(a, b) is the probability that the leaf-growth descent
enters the size-a subtree of an (a, b) split.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln

from errors import DomainError

LOG_2 = math.log(2.0)

# typical exponent: a nu-typical leaf of a size-n tree has mass n^(-GAMMA + o(1))
GAMMA = 3.0 * (2.0 - math.sqrt(3.0))


# ----------------------------------------------------------------------
# exact arithmetic


@lru_cache(maxsize=None)
def catalan(n: int) -> Fraction:
    """Cat(n) = binom(2n, n) / (n + 1), as an integer-valued Fraction"""
    if n < 0:
        raise DomainError(f"catalan of negative n={n}")
    return Fraction(math.comb(2 * n, n) // (n + 1))


@lru_cache(maxsize=1 << 16)
def split_prob(a: int, b: int) -> Fraction:
    """P(a, b) = Cat(a) Cat(b) / Cat(a + b + 1); zero when a or b is -1"""
    if a < 0 or b < 0:
        return Fraction(0)
    return catalan(a) * catalan(b) / catalan(a + b + 1)


def split_prob_factorial(a: int, b: int) -> Fraction:
    """P(a, b) through the factorial quotient with n = a + b + 1"""
    n = a + b + 1
    f = math.factorial
    return Fraction(f(2 * a) * f(2 * b) * f(n) * f(n + 1),
                    f(a) * f(a + 1) * f(b) * f(b + 1) * f(2 * n))


@lru_cache(maxsize=1 << 16)
def c_weight(a: int, b: int) -> Fraction:
    """C(a, b) = (a+1)(2a+1)(a+3b+3) / ((a+b+1)(a+b+2)(2(a+b)+3))"""
    if a < 0 or b < 0:
        raise DomainError(f"C({a}, {b}) is undefined")
    s = a + b
    return Fraction((a + 1) * (2 * a + 1) * (a + 3 * b + 3),
                    (s + 1) * (s + 2) * (2 * s + 3))


def best_of_three(a: int, b: int) -> Fraction:
    """
    Probability that L wins a majority of three matches

    L starts with 2a + 1 tokens, R with 2b + 1; each match is won with
    probability proportional to the current token counts and the winner
    gains a token.
    """
    if a < 0 or b < 0:
        raise DomainError(f"best_of_three({a}, {b}) is undefined")
    la, rb = 2 * a + 1, 2 * b + 1
    total = la + rb
    denominator = total * (total + 1) * (total + 2)
    two_wins = 3 * la * (la + 1) * rb
    three_wins = la * (la + 1) * (la + 2)
    return Fraction(two_wins + three_wins, denominator)


def recurrence_rhs(a: int, b: int) -> Fraction:
    """
    Right-hand side of the uniform growth recurrence for P(a, b)

    P(a-1, b) C(a-1, b) + P(a, b-1) (1 - C(a, b-1)), with the P(-1, .) = 0
    convention guarding the boundary terms.
    """
    total = Fraction(0)
    if a >= 1:
        total += split_prob(a - 1, b) * c_weight(a - 1, b)
    if b >= 1:
        total += split_prob(a, b - 1) * (1 - c_weight(a, b - 1))
    return total


# ----------------------------------------------------------------------
# floating point


def c_weight_f(a, b):
    """C(a, b) in floating point; accepts numpy arrays"""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    s = a + b
    value = (a + 1) * (2 * a + 1) * (a + 3 * b + 3) / ((s + 1) * (s + 2) * (2 * s + 3))
    return value if value.ndim else float(value)


def log_c_weight(a, b):
    """log C(a, b); integer pairs take a scalar path, arrays are vectorised"""
    if isinstance(a, (int, np.integer)) and isinstance(b, (int, np.integer)):
        a, b = int(a), int(b)
        s = a + b
        return (math.log((a + 1) * (2 * a + 1) * (a + 3 * b + 3))
                - math.log((s + 1) * (s + 2) * (2 * s + 3)))
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    s = a + b
    value = (np.log(a + 1) + np.log(2 * a + 1) + np.log(a + 3 * b + 3)
             - np.log(s + 1) - np.log(s + 2) - np.log(2 * s + 3))
    return value if value.ndim else float(value)


def log_catalan(k):
    """log Cat(k) through log-gamma, vectorised"""
    k = np.asarray(k, dtype=float)
    value = gammaln(2 * k + 1) - gammaln(k + 1) - gammaln(k + 2)
    return value if value.ndim else float(value)


def split_prob_f(a, b):
    """log P(a, b) in floating point, vectorised"""
    value = log_catalan(a) + log_catalan(b) - log_catalan(np.asarray(a) + np.asarray(b) + 1)
    return value


@dataclass
class LogWeightTable:
    """log Cat(k) for k <= 2 * n_max, for O(1) log P lookups"""
    n_max: int
    log_catalan: np.ndarray

    @classmethod
    def build(cls, n_max: int) -> "LogWeightTable":
        return cls(n_max=n_max, log_catalan=log_catalan(np.arange(2 * n_max + 1)))

    def log_split(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        return self.log_catalan[a] + self.log_catalan[b] - self.log_catalan[a + b + 1]

    def size_kernel(self, m: int) -> np.ndarray:
        """2 P(a, m-1-a) C(a, m-1-a) for a = 0..m-1"""
        a = np.arange(m)
        b = m - 1 - a
        return np.exp(LOG_2 + self.log_split(a, b) + log_c_weight(a, b))


def size_kernel(m: int, table: Optional[LogWeightTable] = None) -> np.ndarray:
    """Descent size-chain kernel out of size m; entries sum to 1"""
    if m < 1:
        raise DomainError("size kernel needs m >= 1")
    if table is None or table.n_max < m:
        table = LogWeightTable.build(m)
    return table.size_kernel(m)


# ----------------------------------------------------------------------
# continuum limits


def c_limit(x: float) -> float:
    """c(x) = x^2 (3 - 2x), the limit of C(a, b) as a / n -> x"""
    if x < 0.0 or x > 1.0:
        raise DomainError(f"c(x) is defined on [0, 1], got {x}")
    return x * x * (3.0 - 2.0 * x)


def p_limit(x: float) -> float:
    """p(x) = (x (1 - x))^(-3/2), the limit of 4 sqrt(pi) n^(3/2) P(a, b)"""
    if x <= 0.0 or x >= 1.0:
        raise DomainError(f"p(x) has a pole at {x}")
    return (x * (1.0 - x)) ** -1.5


def approximation_error_scan(n: int) -> float:
    """max over a of |C(a, n-1-a) - c(a/n)|, bounded by 1/n"""
    if n < 2:
        raise DomainError("approximation scan needs n >= 2")
    a = np.arange(n)
    x = a / n
    return float(np.max(np.abs(c_weight_f(a, n - 1 - a) - x * x * (3.0 - 2.0 * x))))


def _neg_log(x):
    return -np.log(x)


def riemann_sum(n: int, k: int, f: Callable = _neg_log) -> float:
    """sqrt(n) * sum_{a=1}^{n-1} f(a/n) P(a, n-1-a) C(a, n-1-a)^k"""
    if n < 2:
        raise DomainError("riemann sum needs n >= 2")
    table = LogWeightTable.build(n)
    a = np.arange(1, n)
    b = n - 1 - a
    terms = f(a / n) * np.exp(table.log_split(a, b) + k * log_c_weight(a, b))
    return float(math.sqrt(n) * terms.sum())


def riemann_limit(k: int, f: Callable = _neg_log) -> float:
    """(1 / (4 sqrt(pi))) * integral_0^1 f(x) c(x)^k p(x) dx"""
    if k < 1:
        raise DomainError("the limit integral diverges for k < 1")

    def integrand(x):
        return f(x) * (x * x * (3.0 - 2.0 * x)) ** k * (x * (1.0 - x)) ** -1.5

    left, _ = quad(integrand, 0.0, 0.5, limit=200, epsabs=1e-13)
    right, _ = quad(integrand, 0.5, 1.0, limit=200, epsabs=1e-13)
    return (left + right) / (4.0 * math.sqrt(math.pi))
