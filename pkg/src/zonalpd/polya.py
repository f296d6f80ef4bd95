"""Gegenbauer coefficients of sampled zonal functions and Polya-type criteria.

A zonal function is given by samples g(theta_i) on a uniform grid of [0, pi].
Coefficients are

    b_n = int_0^pi g(theta) C_n^lam(cos theta) sin^{2 lam}(theta) dtheta,   a_n = b_n / h_n,

with the circle convention C_n^0(cos theta) -> cos(n theta) for lam = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as cheb
from numpy.polynomial import polynomial as poly
from scipy.interpolate import CubicSpline
from scipy.special import roots_legendre

from . import gegenbauer as geg
from . import truncated_power as tp
from .errors import ParameterError, ResolutionError, SmoothnessError

DEFAULT_POINTS = 4097
POINTS_PER_PERIOD = 8
CELL_NODES = 8
CONVEXITY_RTOL = 1e-9
AFFINE_RTOL = 1e-8
MAX_PIECES = 16
DEFAULT_N_MAX = 64

_EPS = np.finfo(float).eps


# --------------------------------------------------------------------------
# built-in kernels with analytic derivatives


@dataclass(frozen=True)
class TruncatedPowerKernel:
    """g(theta) = (t - theta)_+^delta."""

    t: float
    delta: float
    name: str = "trunc-power"

    @property
    def support_end(self) -> float:
        return min(self.t, math.pi)

    @property
    def smoothness(self) -> int:
        return max(0, math.ceil(self.delta) - 1)

    @property
    def params(self) -> dict:
        return {"t": self.t, "delta": self.delta}

    def derivative(self, theta, order: int = 0):
        theta = np.asarray(theta, dtype=float)
        d = self.delta
        if order > d:
            raise SmoothnessError(f"derivative of order {order} is not a function for delta = {d}")
        gap = np.clip(self.t - theta, 0.0, None)
        coef = (-1) ** order * math.exp(math.lgamma(d + 1.0) - math.lgamma(d - order + 1.0))
        if order == d:
            return coef * (theta < self.t).astype(float)
        return coef * gap ** (d - order)

    def __call__(self, theta):
        return self.derivative(theta, 0)


@dataclass(frozen=True)
class CosineSeriesKernel:
    """g(theta) = sum_j cos_coeffs[j] cos(j theta) for theta < support, 0 beyond."""

    cos_coeffs: tuple
    support: float
    smoothness: int
    name: str
    params: dict = field(default_factory=dict, hash=False, compare=False)

    @property
    def support_end(self) -> float:
        return min(self.support, math.pi)

    def derivative(self, theta, order: int = 0):
        theta = np.asarray(theta, dtype=float)
        if order > self.smoothness + 1:
            raise SmoothnessError(f"derivative of order {order} is not available")
        out = np.zeros_like(theta)
        for j, a in enumerate(self.cos_coeffs):
            if a != 0.0 and not (j == 0 and order > 0):
                out += a * j ** order * np.cos(j * theta + order * math.pi / 2)
        return np.where(theta < self.support, out, 0.0)

    def __call__(self, theta):
        return self.derivative(theta, 0)


def cosine_bump_kernel(t: float, power: int) -> CosineSeriesKernel:
    """(cos theta - cos t)_+^power, expanded in cos(j theta) through Chebyshev coefficients."""
    if not 0 < t <= math.pi or power < 1:
        raise ParameterError("need 0 < t <= pi and power >= 1")
    p = poly.polypow([-math.cos(t), 1.0], int(power))
    return CosineSeriesKernel(tuple(cheb.poly2cheb(p)), t, int(power) - 1, "cos-bump",
                              {"t": t, "power": int(power)})


def power_series_kernel(coeffs) -> CosineSeriesKernel:
    """sum_k coeffs[k] cos^k(theta), supported on all of [0, pi]."""
    coeffs = np.asarray(coeffs, dtype=float)
    return CosineSeriesKernel(tuple(cheb.poly2cheb(coeffs)), math.inf, 10 ** 6, "power-series",
                              {"coeffs": coeffs.tolist()})


@dataclass(frozen=True)
class PolynomialCapKernel:
    """(1 - theta/t)_+^power (1 + power theta / t), a polynomial on [0, t]."""

    t: float
    power: int
    name: str = "wendland"

    @property
    def support_end(self) -> float:
        return min(self.t, math.pi)

    @property
    def smoothness(self) -> int:
        return int(self.power) - 1

    @property
    def params(self) -> dict:
        return {"t": self.t, "power": self.power}

    def _poly(self):
        s = np.polynomial.Polynomial([1.0, -1.0 / self.t]) ** int(self.power)
        return s * np.polynomial.Polynomial([1.0, self.power / self.t])

    def derivative(self, theta, order: int = 0):
        theta = np.asarray(theta, dtype=float)
        if order > self.power:
            raise SmoothnessError(f"derivative of order {order} is not available")
        vals = self._poly().deriv(order)(theta) if order else self._poly()(theta)
        return np.where(theta < self.t, vals, 0.0)

    def __call__(self, theta):
        return self.derivative(theta, 0)


def make_kernel(name: str, **params):
    """Built-in kernel by name: trunc-power, cos-bump, wendland, power-series."""
    if name == "trunc-power":
        return TruncatedPowerKernel(float(params["t"]), float(params["delta"]))
    if name == "cos-bump":
        return cosine_bump_kernel(float(params["t"]), int(params["power"]))
    if name == "wendland":
        return PolynomialCapKernel(float(params["t"]), int(params["power"]))
    if name == "power-series":
        return power_series_kernel(params["coeffs"])
    raise ParameterError(f"unknown kernel {name!r}")


# --------------------------------------------------------------------------
# sampled functions


@dataclass
class SampledZonalFunction:
    """Samples of g on the uniform grid theta_i = i pi / (N - 1).

    ``derivatives`` maps an order k to samples of g^(k) when they are known
    exactly (built-in kernels); otherwise finite differences are used.
    """

    theta: np.ndarray
    values: np.ndarray
    smoothness_claim: int = 0
    derivatives: dict = field(default_factory=dict)
    label: str = "sampled"

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.theta.ndim != 1 or self.theta.shape != self.values.shape or self.theta.size < 3:
            raise ParameterError("theta and values must be matching 1-d arrays of length >= 3")
        if abs(self.theta[0]) > 1e-12 or abs(self.theta[-1] - math.pi) > 1e-9:
            raise ParameterError("grid must start at 0 and end at pi")
        steps = np.diff(self.theta)
        if np.max(np.abs(steps - self.spacing)) > 1e-9 * self.spacing + 1e-12:
            raise ParameterError("grid must be uniform")
        if not np.all(np.isfinite(self.values)):
            raise ParameterError("samples must be finite")

    @property
    def spacing(self) -> float:
        return math.pi / (self.theta.size - 1)

    @property
    def support_end(self) -> float:
        nz = np.nonzero(self.values != 0.0)[0]
        return float(self.theta[nz[-1]]) if nz.size else 0.0

    @classmethod
    def from_kernel(cls, kernel, num_points: int = DEFAULT_POINTS, derivative_orders=None):
        theta = np.linspace(0.0, math.pi, num_points)
        if derivative_orders is None:
            derivative_orders = range(1, kernel.smoothness + 2)
        derivs = {}
        for k in derivative_orders:
            try:
                derivs[k] = np.asarray(kernel.derivative(theta, k), dtype=float)
            except SmoothnessError:
                break
        return cls(theta, np.asarray(kernel(theta), dtype=float), int(min(kernel.smoothness, 10 ** 3)),
                   derivs, kernel.name)

    @classmethod
    def from_callable(cls, func, num_points: int = DEFAULT_POINTS, smoothness_claim: int = 0,
                      label: str = "callable"):
        theta = np.linspace(0.0, math.pi, num_points)
        return cls(theta, np.asarray(func(theta), dtype=float), smoothness_claim, {}, label)

    def scaled(self, factor: float) -> "SampledZonalFunction":
        return SampledZonalFunction(self.theta.copy(), factor * self.values, self.smoothness_claim,
                                    {k: factor * v for k, v in self.derivatives.items()}, self.label)

    def coarsened(self) -> "SampledZonalFunction":
        """Every other sample (requires an odd number of points)."""
        if self.theta.size % 2 == 0:
            raise ResolutionError("coarsening needs an odd number of samples")
        return SampledZonalFunction(self.theta[::2], self.values[::2], self.smoothness_claim,
                                    {k: v[::2] for k, v in self.derivatives.items()}, self.label)


def finite_difference(values: np.ndarray, spacing: float, order: int) -> np.ndarray:
    """Centered order-th difference quotient on the same grid.

    Odd orders are averaged onto the nodes; the few nodes at each end that
    the stencil cannot reach are filled by linear extension.
    """
    values = np.asarray(values, dtype=float)
    if order == 0:
        return values.copy()
    if values.size < order + 3:
        raise ResolutionError("too few samples for the requested derivative")
    d = np.diff(values, order) / spacing ** order
    if order % 2:
        d = 0.5 * (d[:-1] + d[1:])
    pad = (values.size - d.size) // 2
    out = np.empty_like(values)
    out[pad: pad + d.size] = d
    left_slope = d[1] - d[0]
    right_slope = d[-1] - d[-2]
    out[:pad] = d[0] - left_slope * np.arange(pad, 0, -1)
    out[pad + d.size:] = d[-1] + right_slope * np.arange(1, values.size - pad - d.size + 1)
    return out


def optimal_stride(spacing: float, order: int) -> int:
    """Power-of-two stride bringing the step near eps^(1/(order+2))."""
    target = _EPS ** (1.0 / (order + 2))
    stride = 1
    while stride * spacing < 0.5 * target:
        stride *= 2
    return stride


def strided_derivative(g: "SampledZonalFunction", order: int, stride: int | None = None) -> np.ndarray:
    """Finite-difference g^(order) on a coarser sub-grid, splined back to the full grid."""
    if stride is None:
        stride = optimal_stride(g.spacing, order)
    n_cells = g.theta.size - 1
    while stride > 1 and (n_cells % stride or n_cells // stride < order + 8):
        stride //= 2
    sub = finite_difference(g.values[::stride], stride * g.spacing, order)
    if stride == 1:
        return sub
    return interpolate_samples(g.theta[::stride], sub, g.theta)


def derivative_samples(g: SampledZonalFunction, order: int) -> tuple:
    """(samples of g^(order), exact?) using stored derivatives when available."""
    if order == 0:
        return g.values, True
    if order in g.derivatives:
        return g.derivatives[order], True
    return finite_difference(g.values, g.spacing, order), False


# --------------------------------------------------------------------------
# coefficients


@dataclass
class CoefficientSeries:
    lam: int
    b: np.ndarray
    a: np.ndarray
    n_max: int
    error: np.ndarray
    route: str = "quadrature"

    def norms(self) -> np.ndarray:
        return np.array([norm_for(self.lam, n) for n in range(self.n_max + 1)])


def norm_for(lam: int, n: int) -> float:
    """h_n for lam >= 1; the cosine norms pi, pi/2 for lam = 0."""
    if lam == 0:
        return math.pi if n == 0 else math.pi / 2
    return geg.norm_h(lam, n)


def _check_resolution(g: SampledZonalFunction, lam: int, n_max: int) -> None:
    top = n_max + 2 * lam
    if top > 0 and g.spacing > 2 * math.pi / (POINTS_PER_PERIOD * top):
        raise ResolutionError(
            f"grid spacing {g.spacing:.3g} resolves frequencies up to "
            f"{2 * math.pi / (POINTS_PER_PERIOD * g.spacing):.0f}, need {top}")


def _cell_rule(theta: np.ndarray, nodes: int = CELL_NODES):
    x, w = roots_legendre(nodes)
    lo, hi = theta[:-1], theta[1:]
    half = 0.5 * (hi - lo)
    pts = (0.5 * (hi + lo))[:, None] + half[:, None] * x[None, :]
    wts = half[:, None] * w[None, :]
    return pts.ravel(), wts.ravel()


def _cosine_moments(func_vals, pts, wts, m_max: int) -> np.ndarray:
    """M_m = sum w f(x) cos(m x), m = 0..m_max, via the Chebyshev recurrence in cos."""
    fw = func_vals * wts
    c = np.cos(pts)
    out = np.empty(m_max + 1)
    prev = np.ones_like(pts)
    out[0] = fw.sum()
    if m_max == 0:
        return out
    cur = c.copy()
    out[1] = fw @ cur
    for m in range(2, m_max + 1):
        prev, cur = cur, 2.0 * c * cur - prev
        out[m] = fw @ cur
    return out


def _combine(lam: int, moments: np.ndarray, n_max: int):
    """b_n = sum_k c_k M_{n+2k} and a rounding bound for each n."""
    b = np.empty(n_max + 1)
    noise = np.empty(n_max + 1)
    for n in range(n_max + 1):
        if lam == 0:
            b[n] = moments[n]
            noise[n] = 4 * _EPS * abs(moments[n])
            continue
        c = np.array(geg.cosine_coeffs(lam, n).coeffs)
        terms = c * moments[n: n + 2 * lam + 1: 2]
        b[n] = terms.sum()
        noise[n] = 16 * _EPS * np.abs(terms).sum()
    return b, noise


def interpolate_samples(theta: np.ndarray, vals: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Cubic spline through the samples up to the last nonzero one, zero beyond.

    In the cell where the function drops to zero the spline is extended and
    cut at its own zero crossing (linear ramp to the next node if it has
    none), so the end of the support neither rings nor smears.
    """
    nz = np.nonzero(vals != 0.0)[0]
    if nz.size == 0:
        return np.zeros_like(x)
    last = int(nz[-1])
    if last >= theta.size - 2:
        return CubicSpline(theta, vals)(x)
    out = np.zeros_like(x)
    lo, hi = theta[last], theta[last + 1]
    edge = (x > lo) & (x < hi)
    if last < 3:
        inner = x <= lo
        out[inner] = np.interp(x[inner], theta[: last + 1], vals[: last + 1])
        out[edge] = (1.0 - (x[edge] - lo) / (hi - lo)) * vals[last]
        return out
    spline = CubicSpline(theta[: last + 1], vals[: last + 1])
    inner = x <= lo
    out[inner] = spline(x[inner])
    roots = spline.solve(0.0, extrapolate=True)
    roots = roots[(roots > lo) & (roots <= hi)]
    if roots.size:
        cut = float(roots.min())
        keep = edge & (x < cut)
        out[keep] = spline(x[keep])
    else:
        out[edge] = (1.0 - (x[edge] - lo) / (hi - lo)) * vals[last]
    return out


def _moments_from_samples(theta, vals, m_max):
    pts, wts = _cell_rule(theta)
    return _cosine_moments(interpolate_samples(theta, vals, pts), pts, wts, m_max)


def coefficients_by_quadrature(g: SampledZonalFunction, lam: int, n_max: int) -> CoefficientSeries:
    """b_n from a cubic-spline interpolant of the samples, integrated cell by cell.

    The error estimate compares against the same computation on every other
    sample, plus a rounding bound.
    """
    lam = _check_lam(lam)
    _check_resolution(g, lam, n_max)
    m_max = n_max + 2 * lam
    b, noise = _combine(lam, _moments_from_samples(g.theta, g.values, m_max), n_max)
    err = noise
    if g.theta.size % 2 == 1 and g.theta.size >= 9:
        coarse = g.coarsened()
        try:
            _check_resolution(coarse, lam, n_max)
            b_coarse, _ = _combine(lam, _moments_from_samples(coarse.theta, coarse.values, m_max), n_max)
            err = noise + np.abs(b - b_coarse)
        except ResolutionError:
            pass
    norms = np.array([norm_for(lam, n) for n in range(n_max + 1)])
    return CoefficientSeries(lam, b, b / norms, n_max, err, "quadrature")


def _f_kernel(lam: int, n: int, tau):
    if lam == 0:
        return 0.5 * tau * tau if n == 0 else tp.f_lambda0(n, tau)
    return tp.f_closed(lam, n, tau)


def _window_change(d: np.ndarray, window: int) -> float:
    if d.size <= window:
        return float(np.ptp(d))
    return float(np.max(np.abs(d[window:] - d[:-window])))


def settling_check(g: "SampledZonalFunction", order: int) -> dict:
    """Does g^(order) look continuous?  Its largest change over a fixed number
    of cells must shrink (ratio <= 0.75) when the step is halved; a jump keeps
    that change at the jump size whatever the step.
    """
    window = order + 3
    if order in g.derivatives or order == 0:
        exact = g.values if order == 0 else g.derivatives[order]
        fine = _window_change(exact, window)
        coarse = _window_change(exact[::2], window)
        noise = 0.0
        top = float(np.max(np.abs(exact)))
    else:
        stride = optimal_stride(g.spacing, order)
        while stride > 1 and (g.theta.size - 1) // (2 * stride) < 4 * window:
            stride //= 2
        d_fine = finite_difference(g.values[::stride], stride * g.spacing, order)
        d_coarse = finite_difference(g.values[:: 2 * stride], 2 * stride * g.spacing, order)
        fine = _window_change(d_fine, window)
        coarse = _window_change(d_coarse, window)
        top = float(np.max(np.abs(d_fine)))
        noise = 64 * _EPS * float(np.max(np.abs(g.values))) * (2.0 / (stride * g.spacing)) ** order
    ratio = fine / coarse if coarse > 0 else (0.0 if fine == 0 else math.inf)
    settled = ratio <= 0.75 or fine <= max(1e-12 * top, 4 * noise)
    return {"passed": bool(settled), "order": order, "ratio": ratio, "change_fine": fine,
            "change_coarse": coarse}


def coefficients_via_f(g: SampledZonalFunction, lam: int, n_max: int) -> CoefficientSeries:
    """b_n = ((-1)^{lam+2} / (lam+1)!) int_0^pi F_n^lam(tau) g^{(lam+2)}(tau) dtau.

    g^{(lam+2)} comes from exact derivative samples when present, else from
    finite differences; diverging finite differences raise SmoothnessError.
    Valid for g vanishing near pi.
    """
    lam = _check_lam(lam)
    _check_resolution(g, lam, n_max)
    order = lam + 2
    if order in g.derivatives:
        deriv = g.derivatives[order]
    else:
        probe = settling_check(g, order - 1)
        if not probe["passed"]:
            raise SmoothnessError(
                f"derivative of order {order - 1} does not settle under refinement "
                f"(change ratio {probe['ratio']:.2f})")
        deriv = strided_derivative(g, order)
    pts, wts = _cell_rule(g.theta)
    d_nodes = interpolate_samples(g.theta, deriv, pts)
    scale = (-1) ** order / math.factorial(lam + 1)
    b = np.empty(n_max + 1)
    err = np.empty(n_max + 1)
    for n in range(n_max + 1):
        f_nodes = _f_kernel(lam, n, pts)
        terms = f_nodes * d_nodes * wts
        b[n] = scale * terms.sum()
        err[n] = 16 * _EPS * np.abs(terms).sum() / math.factorial(lam + 1)
    norms = np.array([norm_for(lam, n) for n in range(n_max + 1)])
    return CoefficientSeries(lam, b, b / norms, n_max, err, "via_f")


def _check_lam(lam) -> int:
    if int(lam) != lam or lam < 0:
        raise ParameterError("lambda must be a nonnegative integer here")
    return int(lam)


# --------------------------------------------------------------------------
# mollification


def mollifier_weights(width: float, step: float) -> np.ndarray:
    """Weights w_j with G_h(x_i) = sum_j w_j g(x_{i+j}) for the piecewise-linear interpolant.

    w_j = h^-2 int_0^{2h} K(s) hat(s/step - j) ds with the triangle K(s) = min(s, 2h - s);
    both factors are linear between the breakpoints, so Simpson's rule is exact.
    """
    reach = int(math.ceil(2 * width / step - 1e-12))
    j = np.arange(reach + 1)
    breaks = np.union1d(np.minimum(step * np.arange(reach + 1), 2 * width), [0.0, width, 2 * width])
    lo, hi = breaks[:-1], breaks[1:]
    keep = hi - lo > 1e-15 * width
    lo, hi = lo[keep], hi[keep]
    mid = 0.5 * (lo + hi)

    def tri(s):
        return np.minimum(s, 2 * width - s)

    def hat(s):
        return np.clip(1.0 - np.abs(s[:, None] / step - j[None, :]), 0.0, None)

    simpson = ((hi - lo) / 6.0)[:, None] * (tri(lo)[:, None] * hat(lo) + 4.0 * tri(mid)[:, None] * hat(mid)
                                            + tri(hi)[:, None] * hat(hi))
    return simpson.sum(axis=0) / width ** 2


def mollify(g: SampledZonalFunction, width: float) -> SampledZonalFunction:
    """G_h(x) = h^-2 int_0^h int_0^h g(x + u + v) du dv with g = 0 beyond pi.

    g is read as its piecewise-linear interpolant; the double average is then
    an exact weighted sum of samples.
    """
    step = g.spacing
    if width < step * (1 - 1e-12):
        raise ResolutionError("smoothing width is below the grid spacing")
    w = mollifier_weights(width, step)
    ext = np.concatenate([g.values, np.zeros(w.size)])
    out = np.correlate(ext, w, mode="valid")[: g.values.size]
    return SampledZonalFunction(g.theta.copy(), out, g.smoothness_claim + 2, {}, f"{g.label}:mollified")


def mollifier_identity_residual(g: SampledZonalFunction, width_steps: int, lam: int) -> float:
    """Mismatch of D^{lam+2} G_h and S(Delta_h^2 D^lam g) / h^2 on the grid.

    D is the forward difference quotient, h = width_steps * spacing, and S the
    [1, 4, 1]/6 average that the second difference of the exact double average
    of a piecewise-linear function reduces to.  The residual is measured in
    units of max |g| after multiplying both sides by spacing^(lam+2), so it
    reflects rounding rather than the 1/spacing^(lam+2) blow-up of differencing.
    """
    if width_steps < 1:
        raise ResolutionError("width must be at least one grid step")
    step = g.spacing
    width = width_steps * step
    k = width_steps
    moll = mollify(g, width)
    ext = np.concatenate([g.values, np.zeros(2 * k + lam + 4)])
    lhs = np.diff(moll.values, lam + 2)
    dg = np.diff(ext, lam)
    second = (dg[2 * k:] - 2.0 * dg[k:-k] + dg[:-2 * k]) * (step / width) ** 2
    rhs = (second[:-2] + 4.0 * second[1:-1] + second[2:]) / 6.0
    m = min(lhs.size, rhs.size)
    scale = max(float(np.max(np.abs(g.values))), 1e-300)
    return float(np.max(np.abs(lhs[:m] - rhs[:m])) / scale)


# --------------------------------------------------------------------------
# criterion checks


@dataclass
class PolyaVerdict:
    lam: int
    checks: dict
    classification: str
    evidence: dict

    def to_dict(self) -> dict:
        return {"lam": self.lam, "checks": self.checks, "classification": self.classification,
                "evidence": self.evidence}


def _psi(g: SampledZonalFunction, lam: int):
    vals, exact = derivative_samples(g, lam)
    psi = (-1) ** lam * np.asarray(vals, dtype=float)
    scale = float(np.max(np.abs(g.values))) if g.values.size else 0.0
    noise = 0.0 if exact else 64 * _EPS * scale * (2.0 / g.spacing) ** lam
    return psi, noise


def _support_check(g: SampledZonalFunction) -> dict:
    end = g.support_end
    return {"passed": bool(end <= math.pi - 2 * g.spacing), "support_end": end}


def _one_sided_check(g: SampledZonalFunction, lam: int) -> dict:
    """Forward differences of order lam+1 at 0 with steps s, 2s, 4s settle."""
    order = lam + 1
    base = max(1, 2 ** lam)
    estimates = []
    for mult in (base, 2 * base, 4 * base):
        idx = np.arange(order + 1) * mult
        if idx[-1] >= g.values.size:
            return {"passed": False, "estimates": [], "reason": "grid too short"}
        estimates.append(float(np.diff(g.values[idx], order)[0] / (mult * g.spacing) ** order))
    e1, e2, e4 = estimates
    scale = max(abs(e1), abs(e2), abs(e4), 1.0)
    noise = 64 * _EPS * float(np.max(np.abs(g.values))) * 2 ** order / (base * g.spacing) ** order
    converging = abs(e1 - e2) <= 0.75 * abs(e2 - e4) + 1e-9 * scale + noise
    finite = all(math.isfinite(e) for e in estimates)
    return {"passed": bool(converging and finite), "estimates": estimates}


def _convexity_check(psi: np.ndarray, noise: float) -> dict:
    """psi(x_j) <= (psi(x_{j-s}) + psi(x_{j+s})) / 2 + tol for strides s = 1, 2, 4, ..."""
    span = float(np.ptp(psi)) if psi.size else 0.0
    tol = max(CONVEXITY_RTOL * span, noise)
    worst = -math.inf
    stride = 1
    while 2 * stride < psi.size:
        gap = psi[stride:-stride] - 0.5 * (psi[:-2 * stride] + psi[2 * stride:])
        worst = max(worst, float(gap.max()))
        stride *= 2
    return {"passed": bool(worst <= tol), "max_midpoint_excess": worst, "tolerance": tol}


def _affine_deviation(x, y) -> float:
    if x.size < 3:
        return 0.0
    coef = np.polyfit(x, y, 1)
    return float(np.max(np.abs(np.polyval(coef, x) - y)))


def pieces_needed(x: np.ndarray, y: np.ndarray, tol: float, cap: int = MAX_PIECES + 1) -> int:
    """Greedy count of least-squares affine pieces fitting y within tol (capped)."""
    count, start, n = 0, 0, x.size
    while start < n - 1 and count < cap:
        lo, hi = start + 1, n - 1
        # largest end index with an affine fit within tol, by bisection
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if _affine_deviation(x[start: mid + 1], y[start: mid + 1]) <= tol:
                lo = mid
            else:
                hi = mid - 1
        count += 1
        start = lo
    return count


def _strictness_check(g: SampledZonalFunction, psi: np.ndarray, noise: float, lam: int) -> dict:
    interior = slice(1, -1)
    x, y = g.theta[interior], psi[interior]
    scale = float(np.max(np.abs(y))) if y.size else 0.0
    tol = max(AFFINE_RTOL * scale, 4 * noise)
    if lam == 0:
        pieces = pieces_needed(x, y, tol)
        return {"passed": bool(pieces > MAX_PIECES), "pieces_needed": pieces, "max_pieces": MAX_PIECES,
                "tolerance": tol, "rule": "not piecewise linear"}
    dev = _affine_deviation(x, y)
    return {"passed": bool(dev > tol), "affine_deviation": dev, "tolerance": tol, "rule": "not affine"}


def check_criterion(g: SampledZonalFunction, lam: int, n_max: int = DEFAULT_N_MAX) -> PolyaVerdict:
    """Test the hypotheses (smoothness, support, one-sided derivative, convexity)
    and the strictness condition, and compare with computed coefficients.

    lam = 0 uses the circle rules: continuity, convexity of g itself, and
    "not piecewise linear with at most 16 pieces" for strictness.
    """
    lam = _check_lam(lam)
    psi, noise = _psi(g, lam)
    checks = {
        "smoothness": settling_check(g, lam),
        "support": _support_check(g),
        "one_sided_derivative": _one_sided_check(g, lam),
        "convexity": _convexity_check(psi, noise),
    }
    checks["strictness"] = _strictness_check(g, psi, noise, lam)
    hypotheses = all(checks[k]["passed"] for k in ("smoothness", "support", "one_sided_derivative", "convexity"))
    try:
        series = coefficients_by_quadrature(g, lam, n_max)
        coeff = classify_pd(series)
        evidence = {"n_max": n_max, "coefficients": coeff.to_dict(), "a": series.a.tolist()}
        contradiction = coeff.negative_count > 0
    except ResolutionError as exc:
        evidence = {"n_max": n_max, "coefficients": None, "error": str(exc)}
        contradiction = False
    if not hypotheses:
        classification = "violated"
    elif contradiction:
        classification = "inconclusive"
    elif checks["strictness"]["passed"]:
        classification = "strictly_positive_definite"
    else:
        classification = "positive_definite"
    evidence["caveat"] = "coefficient signs verified up to n_max only"
    return PolyaVerdict(lam, checks, classification, evidence)


# --------------------------------------------------------------------------
# classification from coefficients


@dataclass
class CoefficientClassification:
    classification: str
    nonnegative: bool
    all_positive: bool
    negative_count: int
    positive_even: int
    positive_odd: int
    n_max: int
    caveat: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def classify_pd(series: CoefficientSeries) -> CoefficientClassification:
    """Sign pattern of a_n against the per-n error estimates.

    Nonnegative a_n: consistent with positive definiteness (Schoenberg).
    All a_n positive: sufficient for strict positive definiteness.
    Positive even- and odd-index counts are reported for the infinite-index
    condition, which no finite computation can settle.
    """
    b, err = np.asarray(series.b), np.asarray(series.error)
    floor = 1e-13 * float(np.max(np.abs(b))) if b.size else 0.0
    tol = err + floor
    positive = b > tol
    negative = b < -tol
    n = np.arange(b.size)
    pos_even = int(np.count_nonzero(positive & (n % 2 == 0)))
    pos_odd = int(np.count_nonzero(positive & (n % 2 == 1)))
    neg = int(np.count_nonzero(negative))
    all_pos = bool(np.all(positive))
    if neg:
        label = "not_positive_definite"
    elif all_pos:
        label = "strictly_positive_definite"
    else:
        label = "positive_definite"
    return CoefficientClassification(label, neg == 0, all_pos, neg, pos_even, pos_odd, series.n_max,
                                     f"verified up to n_max = {series.n_max} only")


@dataclass
class AllSpheresVerdict:
    passed: bool
    nonnegative: bool
    convergent: bool
    first_negative: int | None
    partial_sum: float
    caveat: str


def all_spheres_check(coeffs, exact_polynomial: bool = True) -> AllSpheresVerdict:
    """Positive definite on every sphere iff all power-series coefficients in cos theta
    are >= 0 and the series converges at cos theta = 1.

    With ``exact_polynomial`` false the list is read as a truncated series and
    the last quarter of the terms must be small against the partial sum.
    """
    a = np.asarray(coeffs, dtype=float)
    if a.ndim != 1 or a.size == 0 or not np.all(np.isfinite(a)):
        raise ParameterError("coefficients must be a nonempty finite list")
    neg = np.nonzero(a < 0)[0]
    total = float(np.sum(np.abs(a)))
    if exact_polynomial:
        convergent = True
    else:
        tail = float(np.sum(np.abs(a[-max(1, a.size // 4):])))
        convergent = tail <= 1e-3 * max(total, 1e-300)
    return AllSpheresVerdict(
        passed=bool(neg.size == 0 and convergent), nonnegative=bool(neg.size == 0), convergent=bool(convergent),
        first_negative=int(neg[0]) if neg.size else None, partial_sum=float(np.sum(a)),
        caveat=f"checked over the {a.size} supplied coefficients")
