"""Gegenbauer (ultraspherical) polynomials C_n^lambda and related coefficients.

All functions are pure.  Array arguments are broadcast with numpy; scalar
arguments return Python floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError, ParameterError

# Relative tolerance used for polynomial identities throughout the package.
DEFAULT_RTOL = 1e-10

_X_SLACK = 1e-12


@dataclass(frozen=True)
class GegenbauerParam:
    """Index pair (lambda, n) addressing one polynomial C_n^lambda."""

    lam: float
    n: int

    def __post_init__(self):
        if not self.lam > 0:
            raise ParameterError(f"lambda must be positive, got {self.lam}")
        if int(self.n) != self.n or self.n < 0:
            raise ParameterError(f"degree must be a nonnegative integer, got {self.n}")

    def __call__(self, x):
        return eval_gegenbauer(self.lam, self.n, x)

    def value_at_one(self) -> float:
        return value_at_one(self.lam, self.n)

    def norm_h(self) -> float:
        return norm_h(self.lam, self.n)


@dataclass(frozen=True)
class CosineExpansion:
    """sin^{2mu}(theta) C_n^mu(cos theta) = sum_k coeffs[k] cos((n+2k) theta)."""

    mu: int
    n: int
    coeffs: tuple

    def frequencies(self) -> np.ndarray:
        return self.n + 2 * np.arange(len(self.coeffs))

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros_like(theta)
        for m, c in zip(self.frequencies(), self.coeffs):
            out += c * np.cos(m * theta)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class ConnectionCoeffs:
    """Truncated coefficients of sin^{2mu} C_n^mu in the basis sin^{2lam} C_{n+2k}^lam."""

    mu: float
    lam: float
    n: int
    kmax: int
    coeffs: tuple

    def reconstruct(self, theta):
        """Partial sum of the connection series at theta."""
        theta = np.asarray(theta, dtype=float)
        x = np.cos(theta)
        s2 = np.sin(theta) ** (2 * self.lam)
        out = np.zeros_like(theta)
        for k, c in enumerate(self.coeffs):
            if c != 0.0:
                out += c * s2 * eval_gegenbauer(self.lam, self.n + 2 * k, x)
        return out if out.ndim else float(out)


def _check_lambda(lam):
    if not lam > 0:
        raise ParameterError(f"lambda must be positive, got {lam}")


def _check_degree(n):
    if int(n) != n or n < 0:
        raise ParameterError(f"degree must be a nonnegative integer, got {n}")


def eval_gegenbauer(lam: float, n: int, x):
    """C_n^lam(x) by the forward three-term recurrence.

    Raises DomainError if any |x| exceeds 1 by more than 1e-12.
    """
    _check_lambda(lam)
    _check_degree(n)
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 1.0 + _X_SLACK):
        raise DomainError("Gegenbauer argument outside [-1, 1]")
    c_prev = np.ones_like(xa)
    if n == 0:
        return c_prev if xa.ndim else float(c_prev)
    c = 2.0 * lam * xa
    for k in range(1, n):
        c, c_prev = (2.0 * (k + lam) * xa * c - (k + 2.0 * lam - 1.0) * c_prev) / (k + 1.0), c
    return c if xa.ndim else float(c)


def gegenbauer_table(lam: float, n_max: int, x) -> np.ndarray:
    """Rows C_0^lam(x), ..., C_{n_max}^lam(x) from one recurrence sweep."""
    _check_lambda(lam)
    xa = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + xa.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = 2.0 * lam * xa
    for k in range(1, n_max):
        out[k + 1] = (2.0 * (k + lam) * xa * out[k] - (k + 2.0 * lam - 1.0) * out[k - 1]) / (k + 1.0)
    return out


def value_at_one(lam: float, n: int) -> float:
    """C_n^lam(1) = binomial(n + 2 lam - 1, n)."""
    _check_lambda(lam)
    _check_degree(n)
    two_lam = 2 * lam
    if float(two_lam).is_integer():
        return float(math.comb(n + int(two_lam) - 1, n))
    return math.exp(math.lgamma(n + two_lam) - math.lgamma(n + 1) - math.lgamma(two_lam))


def norm_h(lam: float, n: int) -> float:
    """Squared weighted L2 norm of C_n^lam, evaluated in log space."""
    _check_lambda(lam)
    _check_degree(n)
    log_h = (
        math.log(math.pi)
        + (1.0 - 2.0 * lam) * math.log(2.0)
        + math.lgamma(n + 2.0 * lam)
        - math.lgamma(n + 1.0)
        - math.log(n + lam)
        - 2.0 * math.lgamma(lam)
    )
    return math.exp(log_h)


def _pochhammer(a, k: int):
    out = 1
    for j in range(k):
        out *= a + j
    return out


@lru_cache(maxsize=4096)
def cosine_coeffs_exact(mu: int, n: int) -> tuple:
    """Exact rational cosine-expansion coefficients for integer mu >= 1."""
    if int(mu) != mu or mu < 1:
        raise ParameterError(f"mu must be a positive integer, got {mu}")
    _check_degree(n)
    mu, n = int(mu), int(n)
    lead = Fraction(1, 2 ** (2 * mu - 1) * math.factorial(mu - 1)) * _pochhammer(n + 1, 2 * mu - 1)
    coeffs = []
    for k in range(mu + 1):
        if k == 0:
            # (n + 2k) / (n + k)_{mu+1} reduces to 1 / (n + 1)_mu.
            tail = Fraction(1, _pochhammer(n + 1, mu))
        else:
            tail = Fraction(n + 2 * k, _pochhammer(n + k, mu + 1))
        coeffs.append((-1) ** k * math.comb(mu, k) * lead * tail)
    return tuple(coeffs)


def cosine_coeffs(mu: int, n: int) -> CosineExpansion:
    """Terminating cosine expansion of sin^{2mu}(theta) C_n^mu(cos theta)."""
    exact = cosine_coeffs_exact(mu, n)
    return CosineExpansion(int(mu), int(n), tuple(float(c) for c in exact))


def weighted_eval(mu: int, n: int, theta):
    """sin^{2mu}(theta) C_n^mu(cos theta) via the terminating cosine sum.

    Accurate to about eps * C_n^mu(1) in absolute terms for every n; the
    direct product loses relative accuracy where C_n^mu oscillates.
    """
    return cosine_coeffs(mu, n)(theta)


def connection_coeffs(mu: float, lam: float, n: int, kmax: int) -> ConnectionCoeffs:
    """Coefficients c_k, k = 0..kmax, connecting parameter mu to parameter lam.

    The ratio Gamma(k + lam - mu) / Gamma(lam - mu) is evaluated as the
    Pochhammer product (lam - mu)_k, so removable singularities at
    lam - mu in {0, -1, -2, ...} give the limiting (finitely supported) values.
    """
    _check_lambda(lam)
    _check_degree(n)
    if not mu > (lam - 1.0) / 2.0 or not mu > 0:
        raise ParameterError(f"connection formula needs mu > (lam - 1)/2 and mu > 0, got mu={mu}, lam={lam}")
    if kmax < 0:
        raise ParameterError("kmax must be nonnegative")
    base = (
        (2.0 * lam - 2.0 * mu) * math.log(2.0)
        + math.lgamma(lam)
        + math.lgamma(n + 2.0 * mu)
        - math.lgamma(mu)
        - math.lgamma(n + 1.0)
    )
    coeffs = []
    poch = 1.0
    for k in range(kmax + 1):
        if k > 0:
            poch *= lam - mu + k - 1
        if poch == 0.0:
            coeffs.append(0.0)
            continue
        log_rest = (
            math.log(n + 2 * k + lam)
            + math.lgamma(n + 2 * k + 1.0)
            + math.lgamma(n + k + lam)
            - math.lgamma(k + 1.0)
            - math.lgamma(n + k + mu + 1.0)
            - math.lgamma(n + 2 * k + 2.0 * lam)
        )
        coeffs.append(poch * math.exp(base + log_rest))
    return ConnectionCoeffs(float(mu), float(lam), int(n), int(kmax), tuple(coeffs))


def raise_parameter_sides(lam: float, k: int, x):
    """Both sides of (1 - x^2) C_k^{lam+1}(x) = A C_k^lam(x) - B C_{k+2}^lam(x).

    Returns (lhs, rhs) so callers can form residuals.
    """
    x = np.asarray(x, dtype=float)
    denom = 4.0 * lam * (k + lam + 1.0)
    a = (k + 2.0 * lam + 1.0) * (k + 2.0 * lam) / denom
    b = (k + 2.0) * (k + 1.0) / denom
    lhs = (1.0 - x * x) * eval_gegenbauer(lam + 1.0, k, x)
    rhs = a * eval_gegenbauer(lam, k, x) - b * eval_gegenbauer(lam, k + 2, x)
    return lhs, rhs


def largest_zero_bound(lam: float, n: int, method: str = "elbert") -> float:
    """Upper bound for the largest zero of C_n^lam.

    ``elbert``: sqrt(n^2 + 2(n-1) lam - 1) / (n + lam).
    ``area``:   sqrt((n-1)(n+2lam-2) / ((n+lam-2)(n+lam-1))) cos(pi/(n+1)).
    """
    _check_lambda(lam)
    if n < 1:
        raise ParameterError("largest zero needs n >= 1")
    if method == "elbert":
        return math.sqrt(n * n + 2.0 * (n - 1) * lam - 1.0) / (n + lam)
    if method == "area":
        num = (n - 1.0) * (n + 2.0 * lam - 2.0)
        if num == 0.0:
            return 0.0
        den = (n + lam - 2.0) * (n + lam - 1.0)
        return math.sqrt(num / den) * math.cos(math.pi / (n + 1.0))
    raise ParameterError(f"unknown zero-bound method {method!r}")
