"""Integrals of truncated powers against weighted Gegenbauer polynomials.

    F_n^{lam,delta}(t) = int_0^t (t - theta)^delta C_n^lam(cos theta) sin^{2 lam}(theta) dtheta

For integer lam >= 1 the weighted polynomial is a finite cosine sum, so F is
a finite combination of int_0^t (t - theta)^delta cos(m theta) dtheta.  The
coefficients of that combination are kept as exact rationals, which removes
the cancellation between the trigonometric and polynomial parts; for small
m*t a power series in t with exact moments is used instead.

lam = 0 follows the circle convention C_n^0(cos theta) -> cos(n theta), the
kernel used by G_n^{0,delta}.

Index convention: G_n^{lam,delta}(t) = F_n^{lam,delta+1}(t) / C_n^lam(1), i.e. G
carries exponent delta + 1 where F carries delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import gegenbauer as geg
from .errors import ParameterError
from .quadrature import integrate, panels_for_frequency

# Moment series is used where (largest frequency) * t <= SERIES_SWITCH_X.
SERIES_SWITCH_X = 10.0
_SERIES_TERMS = 40
# h_delta and its derivatives switch to the Maclaurin series below this u.
H_SERIES_SWITCH_U = 4.0
_H_SERIES_TERMS = 60


def _is_int(x) -> bool:
    return float(x).is_integer()


@dataclass(frozen=True)
class TruncatedPowerSpec:
    """Triple (lam, delta, t) plus degree n addressing F_n^{lam,delta}(t)."""

    lam: float
    delta: float
    n: int
    t: float

    def __post_init__(self):
        if self.lam < 0:
            raise ParameterError("lambda must be nonnegative")
        if not self.delta > 0:
            raise ParameterError("delta must be positive")
        if not 0 < self.t <= math.pi + 1e-15:
            raise ParameterError("t must lie in (0, pi]")
        if int(self.n) != self.n or self.n < 0:
            raise ParameterError("degree must be a nonnegative integer")


def _cos_coeffs_exact(lam: int, n: int) -> tuple:
    if lam == 0:
        return (Fraction(1),)
    return geg.cosine_coeffs_exact(lam, n)


@dataclass(frozen=True)
class _ExactForm:
    """F as sum_k amp_k trig(m_k t) + sum_j poly_j t^j, and its small-t series."""

    freqs: np.ndarray
    amps: np.ndarray
    phase: int
    poly_powers: np.ndarray
    poly_coeffs: np.ndarray
    series: np.ndarray
    series_offset: float
    max_freq: int

    def _trig(self, u):
        if self.phase == 0:
            return np.cos(u)
        if self.phase == 1:
            return np.sin(u)
        if self.phase == 2:
            return -np.cos(u)
        return -np.sin(u)

    def large(self, t):
        out = np.zeros_like(t)
        for m, a in zip(self.freqs, self.amps):
            out += a * self._trig(m * t)
        for j, b in zip(self.poly_powers, self.poly_coeffs):
            out += b * t ** j
        return out

    def small(self, t):
        t2 = t * t
        acc = np.zeros_like(t)
        for a in self.series[::-1]:
            acc = acc * t2 + a
        return acc * t ** self.series_offset

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        small = self.max_freq * t <= SERIES_SWITCH_X
        if np.any(small):
            out[small] = self.small(t[small])
        if not np.all(small):
            out[~small] = self.large(t[~small])
        return out

    def rounding_bound(self, t):
        """Rough bound on the floating-point error of __call__ at t."""
        t = np.asarray(t, dtype=float)
        small = self.max_freq * t <= SERIES_SWITCH_X
        mass = np.zeros_like(t)
        ts = t[small]
        acc = np.zeros_like(ts)
        for a in np.abs(self.series[::-1]):
            acc = acc * ts * ts + a
        mass[small] = acc * ts ** self.series_offset
        tl = t[~small]
        # rounding of m t in the trig argument contributes |a| m t eps
        big = np.abs(self.amps) @ (1.0 + np.outer(self.freqs, tl)) if self.amps.size else np.zeros_like(tl)
        for j, b in zip(self.poly_powers, self.poly_coeffs):
            big += abs(b) * tl ** j
        mass[~small] = big
        return 8.0 * np.finfo(float).eps * mass


def _moment_series(coeffs, n, terms):
    return [sum(c * (n + 2 * k) ** (2 * j) for k, c in enumerate(coeffs)) for j in range(terms)]


def _series_terms(max_freq):
    # keep m^(2J) comfortably inside double range
    if max_freq <= 1:
        return _SERIES_TERMS
    return max(12, min(_SERIES_TERMS, int(280 / (2 * math.log10(max_freq)))))


@lru_cache(maxsize=8192)
def _exact_form(lam: int, delta: int, n: int) -> _ExactForm:
    coeffs = _cos_coeffs_exact(lam, n)
    p = (delta + 1) % 4
    fact = math.factorial(delta)
    freqs, amps = [], []
    poly: dict = {}
    for k, c in enumerate(coeffs):
        m = n + 2 * k
        if c == 0:
            continue
        if m == 0:
            poly[delta + 1] = poly.get(delta + 1, 0) + c / (delta + 1)
            continue
        amp = c * fact / Fraction(m) ** (delta + 1)
        freqs.append(m)
        amps.append(amp)
        # Taylor head of the trigonometric part, subtracted exactly.
        for j in range(delta + 1):
            if (j - p) % 2:
                continue
            sign = -1 if ((j - p) // 2) % 2 else 1
            poly[j] = poly.get(j, 0) - amp * sign * Fraction(m) ** j / math.factorial(j)
    max_freq = n + 2 * (len(coeffs) - 1)
    terms = _series_terms(max_freq)
    moments = _moment_series(coeffs, n, terms)
    series = [(-1) ** j * s * fact / math.factorial(2 * j + delta + 1) for j, s in enumerate(moments)]
    powers = sorted(j for j, b in poly.items() if b != 0)
    return _ExactForm(
        freqs=np.array(freqs, dtype=float),
        amps=np.array([float(a) for a in amps]),
        phase=p,
        poly_powers=np.array(powers, dtype=float),
        poly_coeffs=np.array([float(poly[j]) for j in powers]),
        series=np.array([float(a) for a in series]),
        series_offset=float(delta + 1),
        max_freq=max(max_freq, 1),
    )


@lru_cache(maxsize=8192)
def _real_delta_series(lam: int, delta: float, n: int) -> tuple:
    coeffs = _cos_coeffs_exact(lam, n)
    max_freq = n + 2 * (len(coeffs) - 1)
    terms = _series_terms(max_freq)
    moments = _moment_series(coeffs, n, terms)
    out = []
    for j, s in enumerate(moments):
        # Gamma(delta+1) / Gamma(2j+delta+2) = 1 / (delta+1)_{2j+1}
        log_ratio = math.lgamma(delta + 1.0) - math.lgamma(2 * j + delta + 2.0)
        out.append((-1) ** j * float(s) * math.exp(log_ratio))
    return tuple(out), max(max_freq, 1)


def _check_t_range(t_arr) -> None:
    # t = 0 is allowed as the (vanishing) limit
    if t_arr.size and not (np.min(t_arr) >= 0.0 and np.max(t_arr) <= math.pi + 1e-15):
        raise ParameterError("t must lie in [0, pi]")


def _as_output(t_in, values):
    return values if np.ndim(t_in) else float(values)


def f_exact(lam: int, delta: int, n: int, t):
    """F_n^{lam,delta}(t) for integer lam >= 0 and integer delta >= 0, vectorised in t."""
    if not (_is_int(lam) and lam >= 0 and _is_int(delta) and delta >= 0):
        raise ParameterError("exact form needs integer lam >= 0 and integer delta >= 0")
    if int(n) != n or n < 0:
        raise ParameterError("degree must be a nonnegative integer")
    t_arr = np.asarray(t, dtype=float)
    _check_t_range(t_arr)
    form = _exact_form(int(lam), int(delta), int(n))
    return _as_output(t, form(t_arr))


def f_exact_error_bound(lam: int, delta: int, n: int, t):
    """Rounding-error bound matching f_exact at the same arguments."""
    form = _exact_form(int(lam), int(delta), int(n))
    return _as_output(t, form.rounding_bound(np.asarray(t, dtype=float)))


def f_closed(lam: int, n: int, t):
    """Boundary case F_n^lam(t) = F_n^{lam,lam+1}(t) in closed form, integer lam >= 1."""
    if not (_is_int(lam) and lam >= 1):
        raise ParameterError(f"closed form supports positive integer lambda, got {lam}")
    return f_exact(int(lam), int(lam) + 1, n, t)


def f_lambda0(n: int, t):
    """F_n^{0,1}(t) = int_0^t (t - theta) cos(n theta) dtheta = (1 - cos(n t)) / n^2."""
    if n < 1:
        raise ParameterError("f_lambda0 needs n >= 1")
    t_arr = np.asarray(t, dtype=float)
    _check_t_range(t_arr)
    half = np.sin(0.5 * n * t_arr)
    # 1 - cos x = 2 sin^2(x/2), free of cancellation near the zeros of sin
    return _as_output(t, 2.0 * half * half / (n * n))


def _weighted_kernel(lam, n):
    if lam == 0:
        return lambda th: np.cos(n * th)
    if _is_int(lam):
        expansion = geg.cosine_coeffs(int(lam), n)
        return expansion
    return lambda th: geg.eval_gegenbauer(lam, n, np.cos(th)) * np.sin(th) ** (2 * lam)


def f_quadrature(lam: float, delta: float, n: int, t: float, *, tol: float | None = None,
                 with_error: bool = False):
    """F_n^{lam,delta}(t) by adaptive Gauss-Legendre/Jacobi quadrature.

    The factor (t - theta)^delta is treated as an endpoint weight, so
    non-integer delta is integrated without loss of order.
    """
    TruncatedPowerSpec(lam, delta, n, t)
    if tol is None:
        tol = 1e-12 * max(1.0, t ** (delta + 1))
    kernel = _weighted_kernel(lam, n)
    freq = n + 2 * math.ceil(lam)
    res = integrate(kernel, 0.0, t, tol=tol, right_power=float(delta),
                    panels=panels_for_frequency(freq, t))
    if with_error:
        return res.value, res.error
    return res.value


def f_eval(lam: float, delta: float, n: int, t, method: str = "auto"):
    """Dispatching evaluator for F_n^{lam,delta}(t).

    ``auto`` uses the exact trigonometric form for integer (lam, delta), the
    moment series plus quadrature for integer lam and real delta, and
    quadrature otherwise.
    """
    if method not in ("auto", "exact", "quadrature"):
        raise ParameterError(f"unknown method {method!r}")
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    _check_t_range(t_arr)
    int_lam = _is_int(lam)
    if method != "quadrature" and int_lam and _is_int(delta):
        return f_exact(int(lam), int(delta), n, t)
    if method == "exact":
        raise ParameterError("exact form needs integer lambda and delta")
    out = np.empty_like(t_arr)
    if method == "auto" and int_lam:
        series, max_freq = _real_delta_series(int(lam), float(delta), int(n))
        for i, ti in enumerate(t_arr):
            if max_freq * ti <= SERIES_SWITCH_X:
                acc = 0.0
                for a in reversed(series):
                    acc = acc * ti * ti + a
                out[i] = acc * ti ** (delta + 1.0)
            else:
                out[i] = f_quadrature(lam, delta, n, ti)
    else:
        for i, ti in enumerate(t_arr):
            out[i] = 0.0 if ti == 0 else f_quadrature(lam, delta, n, ti)
    return out if np.ndim(t) else float(out[0])


def g_normalized(lam: float, delta: float, n: int, t, method: str = "auto"):
    """G_n^{lam,delta}(t) = F_n^{lam,delta+1}(t) / C_n^lam(1)  (note the +1)."""
    scale = 1.0 if lam == 0 else geg.value_at_one(lam, n)
    return np.asarray(f_eval(lam, delta + 1.0, n, t, method=method)) / scale if np.ndim(t) \
        else f_eval(lam, delta + 1.0, n, t, method=method) / scale


def prototype_coeffs(lam: int, n: int) -> tuple:
    """Integer coefficients of the worked cases lam = 2 (e_k) and lam = 3 (f_k)."""
    if lam == 2:
        return (n + 3, -2 * (n + 2), n + 1)
    if lam == 3:
        return ((n + 5) * (n + 4), -3 * (n + 5) * (n + 2), 3 * (n + 4) * (n + 1), -(n + 2) * (n + 1))
    raise ParameterError("worked coefficient tables exist for lam in {2, 3}")


def f_prototype(lam: int, n: int, t):
    """F_n^2 or F_n^3 from the integer-coefficient bracket forms (n >= 1).

    Literal evaluation, including the cancellation between the cosine (sine)
    and its Taylor head; intended as a cross-check at moderate n t.
    """
    if n < 1:
        raise ParameterError("integer-coefficient forms are singular at n = 0")
    t = np.asarray(t, dtype=float)
    coeffs = prototype_coeffs(lam, n)
    total = np.zeros_like(t)
    for k, e in enumerate(coeffs):
        m = n + 2 * k
        u = m * t
        if lam == 2:
            total += e / m ** 4 * (np.cos(u) - (1.0 - u * u / 2.0))
        else:
            total += e / m ** 5 * (np.sin(u) - (u - u ** 3 / 6.0))
    scale = 0.75 if lam == 2 else 3.0 / 8.0
    return scale * total if total.ndim else float(scale * total)


def i_kernel(t, m):
    """I(t, m) = (1/2) int_0^t (t - theta)^2 cos(m theta) dtheta = t^3 u_kernel(m t)."""
    t = np.asarray(t, dtype=float)
    return t ** 3 * u_kernel(m * t)


def u_kernel(u):
    """(u - sin u) / u^3 with its Maclaurin series near 0 (value 1/6 at u = 0)."""
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    small = np.abs(u) < 0.5
    us = u[small]
    acc = np.zeros_like(us)
    for j in range(12, -1, -1):
        acc = acc * us * us + (-1) ** j / math.factorial(2 * j + 3)
    out[small] = acc
    ul = u[~small]
    out[~small] = (ul - np.sin(ul)) / ul ** 3
    return out if out.ndim else float(out)


def f1_via_i(n: int, t):
    """F_n^1(t) = I(t, n) - I(t, n + 2)."""
    return i_kernel(t, n) - i_kernel(t, n + 2)


def f1_d_form(n: int, t):
    """F_n^1(t) = sum_k d_k [sin((n+2k)t) - (n+2k)t], d_0 = -1/n^3, d_1 = 1/(n+2)^3."""
    if n < 1:
        raise ParameterError("d-coefficient form needs n >= 1")
    t = np.asarray(t, dtype=float)
    out = -(np.sin(n * t) - n * t) / n ** 3 + (np.sin((n + 2) * t) - (n + 2) * t) / (n + 2) ** 3
    return out if out.ndim else float(out)


# --------------------------------------------------------------------------
# h_delta(u) = int_0^1 (1 - s)^{delta+1} cos(u s) ds and derivatives


@lru_cache(maxsize=256)
def _h_series_coeffs(delta, order):
    j0 = (order + 1) // 2
    coeffs = []
    for j in range(j0, j0 + _H_SERIES_TERMS):
        log_c = (math.lgamma(delta + 2.0) + math.lgamma(2 * j + 1.0) - math.lgamma(2 * j - order + 1.0)
                 - math.lgamma(2 * j + delta + 3.0))
        coeffs.append((-1) ** j * math.exp(log_c))
    return tuple(coeffs), 2 * j0 - order


def _h_series(delta, u, order):
    # h^(r)(u) = Gamma(delta+2) sum_j (-1)^j (2j)!/(2j-r)! u^(2j-r) / Gamma(2j+delta+3)
    u = np.asarray(u, dtype=float)
    coeffs, lead_power = _h_series_coeffs(float(delta), int(order))
    out = np.zeros_like(u)
    for c in reversed(coeffs):
        out = out * u * u + c
    return out * u ** lead_power if lead_power else out


def _h_generic(delta, u, order):
    """Closed form for integer delta via Leibniz on (delta+1)! u^{-(delta+2)} q(u)."""
    p = delta + 2
    fact = math.factorial(delta + 1)
    u = np.asarray(u, dtype=float)

    def q_deriv(i):
        # q(u) = Re[i^{-p} (e^{iu} - sum_{j<=p-1} (iu)^j / j!)]
        phase = (i - p) % 4
        trig = (np.cos(u), -np.sin(u), -np.cos(u), np.sin(u))[phase]
        # Re[i^{i-p} e^{iu}] : i^0 -> cos, i^1 -> -sin, i^2 -> -cos, i^3 -> sin
        head = np.zeros_like(u)
        for j in range(i, p):
            if (j - p) % 2:
                continue
            sign = -1.0 if ((j - p) // 2) % 2 else 1.0
            head += sign * u ** (j - i) / math.factorial(j - i)
        return trig - head

    total = np.zeros_like(u)
    for j in range(order + 1):
        power_deriv = (-1) ** j * math.prod(range(p, p + j)) * u ** (-(p + j))
        total += math.comb(order, j) * power_deriv * q_deriv(order - j)
    return fact * total


def _literal_forms():
    # hand-expanded forms for delta = 2 and delta = 3
    def h2_0(u):
        return 6.0 / u ** 4 * (np.cos(u) - 1.0 + u * u / 2.0)

    def h2_1(u):
        return 6.0 * (4.0 - u * u - 4.0 * np.cos(u) - u * np.sin(u)) / u ** 5

    def h2_2(u):
        return 6.0 * (-20.0 + 3.0 * u * u - (-20.0 + u * u) * np.cos(u) + 8.0 * u * np.sin(u)) / u ** 6

    def h3_0(u):
        return 4.0 * (-6.0 * u + u ** 3 + 6.0 * np.sin(u)) / u ** 5

    def h3_1(u):
        return -8.0 * (u ** 3 - 12.0 * u - 3.0 * u * np.cos(u) + 15.0 * np.sin(u)) / u ** 6

    def h3_2(u):
        return 24.0 * (u * (u * u - 20.0) - 10.0 * u * np.cos(u) - (u * u - 30.0) * np.sin(u)) / u ** 7

    def h3_3(u):
        return -24.0 * (4.0 * u * (u * u - 30.0) + u * (u * u - 90.0) * np.cos(u)
                        - 15.0 * (u * u - 14.0) * np.sin(u)) / u ** 8

    return {(2, 0): h2_0, (2, 1): h2_1, (2, 2): h2_2,
            (3, 0): h3_0, (3, 1): h3_1, (3, 2): h3_2, (3, 3): h3_3}


LITERAL_H_FORMS = _literal_forms()


def h_delta_closed(delta: int, u, order: int = 0):
    """Closed form of h_delta^(order)(u), integer delta; hand-expanded form where one exists.

    Suffers cancellation for small u; see h_delta_eval for the safe version.
    """
    key = (int(delta), int(order))
    if key in LITERAL_H_FORMS:
        return LITERAL_H_FORMS[key](np.asarray(u, dtype=float))
    return _h_generic(int(delta), u, int(order))


def _h_quadrature(delta, u, order):
    def integrand_factory(uu):
        def f(s):
            base = s ** order
            phase = order % 4
            trig = (np.cos(uu * s), -np.sin(uu * s), -np.cos(uu * s), np.sin(uu * s))[phase]
            return base * trig
        return f

    vals = []
    for uu in np.atleast_1d(u):
        res = integrate(integrand_factory(uu), 0.0, 1.0, tol=1e-14, right_power=delta + 1.0,
                        panels=panels_for_frequency(uu, 1.0))
        vals.append(res.value)
    return np.array(vals)


def h_delta_eval(delta: float, u, order: int = 0):
    """h_delta^(order)(u) for u >= 0 with a Maclaurin-series switch near 0.

    Integer delta uses the closed forms above H_SERIES_SWITCH_U; other delta
    use quadrature there.  h_delta(0) = 1/(delta + 2).
    """
    if order < 0:
        raise ParameterError("derivative order must be nonnegative")
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(u_arr < 0):
        raise ParameterError("h_delta is evaluated for u >= 0")
    out = np.empty_like(u_arr)
    small = u_arr <= H_SERIES_SWITCH_U
    if np.any(small):
        out[small] = _h_series(delta, u_arr[small], order)
    if not np.all(small):
        ul = u_arr[~small]
        if _is_int(delta) and delta >= 0:
            out[~small] = h_delta_closed(int(delta), ul, order)
        else:
            out[~small] = _h_quadrature(delta, ul, order)
    return out if np.ndim(u) else float(out[0])


def h_delta_naive(delta: int, u, order: int = 0):
    """Closed form only, no series switch (kept for cancellation comparisons)."""
    return h_delta_closed(delta, u, order)


# --------------------------------------------------------------------------
# identities and norms


def recursion_check(lam: int, delta: float, n: int, t: float) -> float:
    """|2/(2lam-1) G_n^{lam,delta} - (G_n^{lam-1,delta} - G_{n+2}^{lam-1,delta}) / (n + lam)|, by quadrature."""
    if lam < 1:
        raise ParameterError("recursion needs lam >= 1")

    def g(l, m):
        scale = 1.0 if l == 0 else geg.value_at_one(l, m)
        return f_quadrature(l, delta + 1.0, m, t) / scale

    lhs = 2.0 / (2 * lam - 1) * g(lam, n)
    rhs = (g(lam - 1, n) - g(lam - 1, n + 2)) / (n + lam)
    return abs(lhs - rhs)


def h_kernel(j: int, delta: float, n: float, xis, t: float):
    """H_j^delta(n, xi_j, ..., xi_1, t) for j in {1, 2}; xis = (xi_j, ..., xi_1)."""
    if j == 1:
        (xi1,) = xis
        return h_delta_eval(delta, (n + xi1) * t, 1)
    if j == 2:
        xi2, xi1 = xis
        u = (n + xi2 + xi1) * t
        d = n + 1.0 + xi2
        return t * h_delta_eval(delta, u, 2) / d - h_delta_eval(delta, u, 1) / d ** 2
    raise ParameterError("H_j kernels are implemented for j <= 2")


def induct_main_sides(j: int, delta: float, n: int, t: float, nodes: int = 24):
    """Both sides of 2^j/(2j-1)!! G_n^{j,delta}(t) = (-1)^j t^{delta+3}/(n+j) int_{[0,2]^j} H_j."""
    from scipy.special import roots_legendre

    x, w = roots_legendre(nodes)
    xi = 1.0 + x
    dfact = math.prod(range(1, 2 * j, 2))
    lhs = 2.0 ** j / dfact * g_normalized(j, delta, n, t, method="quadrature")
    if j == 1:
        integral = float(np.sum(w * h_kernel(1, delta, n, (xi,), t)))
    elif j == 2:
        a, b = np.meshgrid(xi, xi, indexing="ij")
        vals = h_kernel(2, delta, n, (a.ravel(), b.ravel()), t).reshape(a.shape)
        integral = float(w @ vals @ w)
    else:
        raise ParameterError("H_j kernels are implemented for j <= 2")
    rhs = (-1) ** j * t ** (delta + 3) / (n + j) * integral
    return lhs, rhs


def sup_norm_f(lam: int, n: int, grid_size: int = 2048) -> float:
    """max |F_n^lam(t)| over a uniform grid of [0, pi]."""
    if grid_size < 256:
        raise ParameterError("grid_size must be at least 256")
    t = np.linspace(0.0, math.pi, grid_size)
    return float(np.max(np.abs(f_closed(lam, n, t))))


def fractional_reduction_check(lam: float, delta: float, mu: float, n: int, t: float,
                                  method: str = "quadrature") -> float:
    """|F^{lam,mu}(t) - Gamma(mu+1)/(Gamma(delta+1)Gamma(mu-delta)) int_0^t (t-s)^{mu-delta-1} F^{lam,delta}(s) ds|."""
    if mu < delta:
        raise ParameterError("need mu >= delta")
    direct = f_eval(lam, mu, n, t, method=method)
    if mu == delta:
        return 0.0
    const = math.exp(math.lgamma(mu + 1.0) - math.lgamma(delta + 1.0) - math.lgamma(mu - delta))

    def inner(s):
        return np.array([0.0 if si == 0 else f_eval(lam, delta, n, si, method=method) for si in s])

    res = integrate(inner, 0.0, t, tol=1e-13, right_power=mu - delta - 1.0,
                    panels=panels_for_frequency(n + 2 * math.ceil(lam), t))
    return abs(direct - const * res.value)
