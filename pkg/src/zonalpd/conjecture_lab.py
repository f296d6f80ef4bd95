"""Positivity scans of F_n^{lam,delta}, root constants of the d = 4, 6, 8 auxiliary functions,
negativity-witness search, and the small-n / overlap bookkeeping.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import bisect

from . import gegenbauer as geg
from . import truncated_power as tp
from .errors import BracketError, ParameterError

T_FLOOR = 1e-6
WITNESS_THRESHOLD = 1e-10
ROOT_SCAN_STEP = 0.01
ROOT_SCAN_END = 20.0
ROOT_XTOL = 1e-12
MAX_STORED_WITNESSES = 1000


def worker_count() -> int:
    """Worker cap from ZONALPD_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("ZONALPD_THREADS", "1")))
    except ValueError:
        return 1


def scan_grid(t_points: int, floor: float = T_FLOOR) -> np.ndarray:
    """Uniform grid pi*k/t_points, k = 1..t_points, with points below floor dropped."""
    t = np.linspace(0.0, math.pi, t_points + 1)[1:]
    return t[t >= floor]


# --------------------------------------------------------------------------
# positivity scans


@dataclass
class ScanReport:
    lam: float
    delta: float
    n_range: tuple
    t_grid: dict
    min_value: float
    argmin: tuple
    all_positive: bool
    witnesses: list = field(default_factory=list)
    witness_count: int = 0
    evaluator: str = "exact"

    def to_dict(self) -> dict:
        out = asdict(self)
        out["n_range"] = list(self.n_range)
        out["argmin"] = list(self.argmin)
        out["witnesses"] = [list(w) for w in self.witnesses]
        return out


def _evaluator_name(lam, delta):
    if lam == 0 and delta == 1:
        return "lambda0"
    if float(lam).is_integer() and float(delta).is_integer():
        return "exact"
    return "quadrature"


def evaluate_curve(lam: float, delta: float, n: int, t: np.ndarray) -> np.ndarray:
    """F_n^{lam,delta} on a grid with the most accurate evaluator available."""
    return evaluate_with_noise(lam, delta, n, t)[0]


def evaluate_with_noise(lam: float, delta: float, n: int, t: np.ndarray):
    """(values, absolute noise level) of F_n^{lam,delta} on a grid."""
    t = np.asarray(t, dtype=float)
    name = _evaluator_name(lam, delta)
    eps = np.finfo(float).eps
    if name == "lambda0":
        if n == 0:
            return 0.5 * t * t, eps * t * t
        return tp.f_lambda0(n, t), np.full_like(t, 4.0 * eps / n ** 2)
    if name == "exact":
        return (np.asarray(tp.f_exact(int(lam), int(delta), n, t), dtype=float),
                np.asarray(tp.f_exact_error_bound(int(lam), int(delta), n, t), dtype=float))
    vals = np.asarray(tp.f_eval(lam, delta, n, t), dtype=float)
    return vals, 1e-12 * np.maximum(1.0, t ** (delta + 1.0))


def positive_prefix(lam: float, n: int) -> float:
    """Cap radius below which the weighted integrand has no sign change, so F > 0."""
    if n == 0:
        return math.pi
    if lam == 0:
        return math.pi / (2 * n)
    bound = min(1.0, geg.largest_zero_bound(lam, n, "elbert"))
    return math.acos(bound)


def _scan_one(lam, delta, n, t):
    vals, noise = evaluate_with_noise(lam, delta, n, t)
    # values inside the noise band only count past the sign-definite prefix
    unresolved = (vals <= noise) & (t > positive_prefix(lam, n))
    bad = (vals <= 0.0) | unresolved
    i = int(np.argmin(vals))
    hits = [(n, float(t[j]), float(vals[j])) for j in np.nonzero(bad)[0]]
    return float(vals[i]), float(t[i]), hits


def scan_positivity(lam: float, delta: float, n_max: int, t_points: int = 2048, *,
                    n_min: int = 0, floor: float = T_FLOOR) -> ScanReport:
    """Scan F_n^{lam,delta}(t) over n = n_min..n_max and the uniform t grid.

    Grid points below ``floor`` are excluded.  A point is a witness when its
    value is <= 0, or not above the evaluator's noise level past the
    sign-definite prefix (where F > 0 holds for structural reasons).
    """
    if t_points < 512:
        raise ParameterError("t_points must be at least 512")
    if lam < 0 or delta <= 0 or n_max < n_min:
        raise ParameterError("need lam >= 0, delta > 0 and n_max >= n_min")
    t = scan_grid(t_points, floor)
    ns = range(n_min, n_max + 1)
    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda n: _scan_one(lam, delta, n, t), ns))
    else:
        results = [_scan_one(lam, delta, n, t) for n in ns]
    min_value, argmin = math.inf, (n_min, float(t[0]))
    witnesses, count = [], 0
    for n, (vmin, tmin, hits) in zip(ns, results):
        if vmin < min_value:
            min_value, argmin = vmin, (n, tmin)
        count += len(hits)
        room = MAX_STORED_WITNESSES - len(witnesses)
        witnesses.extend(hits[:room])
    grid = {"kind": "uniform", "start": float(t[0]), "stop": float(t[-1]), "points": int(t.size),
            "floor": floor}
    return ScanReport(lam=float(lam), delta=float(delta), n_range=(n_min, n_max), t_grid=grid,
                      min_value=min_value, argmin=argmin, all_positive=count == 0,
                      witnesses=witnesses, witness_count=count,
                      evaluator=_evaluator_name(lam, delta))


@dataclass
class WitnessReport:
    lam: float
    delta: float
    n_scanned: tuple
    t_points: int
    found: bool
    witness: dict | None
    certified: bool
    note: str

    def to_dict(self) -> dict:
        out = asdict(self)
        out["n_scanned"] = list(self.n_scanned)
        return out


def find_negativity_witness(lam: float, delta: float, n_max: int = 2000,
                            t_points: int = 512) -> WitnessReport:
    """Search n = 0, 1, ... for a grid value F_n^{lam,delta}(t) < -1e-10.

    Stops at the first such n and returns its most negative grid point,
    re-evaluated by quadrature as an independent certificate.  Intended for
    delta < lam + 1; larger delta is accepted as a control and should find none.
    """
    if lam < 0 or delta <= 0:
        raise ParameterError("need lam >= 0 and delta > 0")
    t = scan_grid(t_points)
    for n in range(n_max + 1):
        vals = evaluate_curve(lam, delta, n, t)
        i = int(np.argmin(vals))
        if vals[i] < -WITNESS_THRESHOLD:
            t_star = float(t[i])
            if lam == 0:
                check, err = float(vals[i]), 0.0
            else:
                check, err = tp.f_quadrature(lam, delta, n, t_star, with_error=True)
            certified = check < -(WITNESS_THRESHOLD + err)
            return WitnessReport(
                lam=float(lam), delta=float(delta), n_scanned=(0, n), t_points=t_points, found=True,
                witness={"n": n, "t": t_star, "value": float(vals[i]), "quadrature_value": float(check),
                         "quadrature_error": float(err)},
                certified=bool(certified), note="negative value found")
    return WitnessReport(lam=float(lam), delta=float(delta), n_scanned=(0, n_max), t_points=t_points,
                         found=False, witness=None, certified=False, note="not found in range")


# --------------------------------------------------------------------------
# auxiliary functions of the d = 4, 6, 8 cases


def g_function(u):
    """g(u) = 2u + u cos u - 3 sin u, with the alternating series below u = 0.5."""
    u = np.asarray(u, dtype=float)
    out = 2.0 * u + u * np.cos(u) - 3.0 * np.sin(u)
    small = np.abs(u) < 0.5
    if np.any(small):
        us = u[small]
        acc = np.zeros_like(us)
        # sum_{k>=2} (-1)^k (2k-2) / (2k+1)! u^(2k+1)
        for k in range(14, 1, -1):
            acc = acc * us * us + (-1) ** k * (2 * k - 2) / math.factorial(2 * k + 1)
        out[small] = acc * us ** 5
    return out if out.ndim else float(out)


def k_function(u):
    """k(u) = (4/3) u h_2''(u) - h_2'(u)."""
    u = np.asarray(u, dtype=float)
    return 4.0 / 3.0 * u * tp.h_delta_eval(2, u, 2) - tp.h_delta_eval(2, u, 1)


def d8_bracket_function(u):
    """u h_3''(u) - h_3'(u) / 2."""
    u = np.asarray(u, dtype=float)
    return u * tp.h_delta_eval(3, u, 2) - 0.5 * tp.h_delta_eval(3, u, 1)


def lambda_n_function(n: int, u):
    """Lambda_n(u) = u^2 h3''' - (3 - 1/(n+2))(1 - 1/(n+1)) [u h3'' - (1 - 1/(n+1)) h3']."""
    if n < 1:
        raise ParameterError("Lambda_n needs n >= 1")
    u = np.asarray(u, dtype=float)
    shrink = 1.0 - 1.0 / (n + 1)
    factor = (3.0 - 1.0 / (n + 2)) * shrink
    h1 = tp.h_delta_eval(3, u, 1)
    h2 = tp.h_delta_eval(3, u, 2)
    h3 = tp.h_delta_eval(3, u, 3)
    return u * u * h3 - factor * (u * h2 - shrink * h1)


def h_n_kernel_d8(n: float, xi, eta, u):
    """H_n(u) = u^2 h''' - A u h'' + A B h' with h = h_3,
    A = (3n+5+eta)(n+xi+eta) / ((n+2)(n+1+eta)), B = (n+xi+eta)/(n+1+eta)."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    u = np.asarray(u, dtype=float)
    if np.any((xi <= 0) | (xi >= 2) | (eta <= 0) | (eta >= 2)):
        raise ParameterError("need 0 < xi, eta < 2")
    a = (3 * n + 5 + eta) * (n + xi + eta) / ((n + 2) * (n + 1 + eta))
    b = (n + xi + eta) / (n + 1 + eta)
    return (u * u * tp.h_delta_eval(3, u, 3) - a * u * tp.h_delta_eval(3, u, 2)
            + a * b * tp.h_delta_eval(3, u, 1))


@dataclass
class RootCertificate:
    name: str
    target_function: str
    bracket: tuple
    root: float
    residual: float
    reference_value: float

    @property
    def deviation(self) -> float:
        return abs(self.root - self.reference_value)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["bracket"] = list(self.bracket)
        out["deviation"] = self.deviation
        return out


def _lambda9(u):
    return lambda_n_function(9, u)


# name -> (target description, function, reference value, which sign change)
ROOT_TARGETS = {
    "u0_d6": ("h_2''(u)", lambda u: tp.h_delta_eval(2, u, 2), 3.68542, "first"),
    "u1": ("(4/3) u h_2''(u) - h_2'(u)", k_function, 1.86321, "first"),
    "u0_d8": ("u h_3''(u) - h_3'(u)/2", d8_bracket_function, 2.99521, "first"),
    "u2": ("h_3''(u)", lambda u: tp.h_delta_eval(3, u, 2), 4.23573, "first"),
    "u3": ("h_3'''(u)", lambda u: tp.h_delta_eval(3, u, 3), 7.15125, "first"),
    "u_star": ("Lambda_9(u)", _lambda9, 3.63661, "last"),
}


def sign_change_brackets(func, step: float = ROOT_SCAN_STEP, end: float = ROOT_SCAN_END) -> list:
    """Brackets (lo, hi) of every sign change of func on the grid step, 2 step, ..., end."""
    u = np.arange(1, int(round(end / step)) + 1) * step
    v = np.asarray(func(u), dtype=float)
    idx = np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]
    return [(float(u[i]), float(u[i + 1])) for i in idx]


def certify_root(name: str) -> RootCertificate:
    """Bracket scan plus bisection for one named constant."""
    if name not in ROOT_TARGETS:
        raise ParameterError(f"unknown root name {name!r}")
    label, func, reference_value, pick = ROOT_TARGETS[name]
    brackets = sign_change_brackets(func)
    if not brackets:
        raise BracketError(f"no sign change of {label} on (0, {ROOT_SCAN_END}]")
    lo, hi = brackets[0] if pick == "first" else brackets[-1]

    def scalar(x):
        return float(func(np.array([x]))[0])

    root = bisect(scalar, lo, hi, xtol=ROOT_XTOL)
    return RootCertificate(name=name, target_function=label, bracket=(lo, hi), root=float(root),
                           residual=abs(scalar(root)), reference_value=reference_value)


def reproduce_roots(names=None) -> list:
    """RootCertificates for the six named constants (or the requested subset)."""
    names = list(ROOT_TARGETS) if names is None else list(names)
    return [certify_root(name) for name in names]


def root_value(name: str) -> float:
    return certify_root(name).root


# --------------------------------------------------------------------------
# sign checks on grids


def sign_checks(u_max: float = 50.0, step: float = 0.01) -> dict:
    """Minimum of g and maxima of h_2', h_3' over the grid step..u_max."""
    u = np.arange(1, int(round(u_max / step)) + 1) * step
    g = g_function(u)
    h2p = tp.h_delta_eval(2, u, 1)
    h3p = tp.h_delta_eval(3, u, 1)
    return {
        "g_positive": bool(np.all(g > 0)), "g_min": float(g.min()),
        "h2_prime_negative": bool(np.all(h2p < 0)), "h2_prime_max": float(h2p.max()),
        "h3_prime_negative": bool(np.all(h3p < 0)), "h3_prime_max": float(h3p.max()),
    }


def lambda_monotonicity_violations(n_max: int = 50, u_grid=None, u_start: float | None = None) -> list:
    """(n, u, increase) wherever Lambda_{n+1}(u) > Lambda_n(u) for u past u0_d8."""
    if u_start is None:
        u_start = root_value("u0_d8")
    if u_grid is None:
        u_grid = np.linspace(u_start, 20.0, 2001)[1:]
    u_grid = np.asarray(u_grid, dtype=float)
    out = []
    prev = lambda_n_function(1, u_grid)
    for n in range(1, n_max):
        cur = lambda_n_function(n + 1, u_grid)
        for j in np.nonzero(cur > prev)[0]:
            out.append((n, float(u_grid[j]), float(cur[j] - prev[j])))
        prev = cur
    return out


# --------------------------------------------------------------------------
# d = 8 overlap of the small-t and large-t regions


def sin_t_star_lower_bound(n: int) -> float:
    """sqrt(1 - (1 - 6/((n+1)(n+2))) cos^2(pi/(n+1)))."""
    c = math.cos(math.pi / (n + 1))
    return math.sqrt(1.0 - (1.0 - 6.0 / ((n + 1) * (n + 2))) * c * c)


@dataclass
class OverlapRow:
    n: int
    sin_t_star_lower_bound: float
    u_star_over_n: float
    overlap: bool


@dataclass
class OverlapTable:
    rows: list
    first_overlap: int | None
    persists: bool
    u_star: float

    def limit_estimate(self) -> float:
        last = self.rows[-1]
        return (last.n + 1) * last.sin_t_star_lower_bound


def overlap_check_d8(n_max: int = 500, u_star: float | None = None) -> OverlapTable:
    """Compare the lower bound for sin t_n* with u*/n for n = 1..n_max."""
    if n_max < 20:
        raise ParameterError("n_max must be at least 20")
    if u_star is None:
        u_star = root_value("u_star")
    rows = []
    for n in range(1, n_max + 1):
        b = sin_t_star_lower_bound(n)
        rows.append(OverlapRow(n, b, u_star / n, b > u_star / n))
    first = next((r.n for r in rows if r.overlap), None)
    persists = first is not None and all(r.overlap for r in rows if r.n >= first)
    return OverlapTable(rows=rows, first_overlap=first, persists=persists, u_star=u_star)


# --------------------------------------------------------------------------
# curves for the residual small-n cases


SMALL_N_CASES = {2: range(0, 4), 3: range(0, 15)}


@dataclass
class CurveSummary:
    lam: int
    n: int
    min_value: float
    argmin: float
    positive: bool
    path: str | None = None


def small_n_curves(lam: int, n_set=None, t_points: int = 2048, out_dir=None) -> list:
    """F_n^lam curves on (t_floor, pi]; optionally written as (t, value) CSV files."""
    from .io import write_csv

    if lam not in SMALL_N_CASES:
        raise ParameterError("small-n curves are defined for lam in {2, 3}")
    n_set = SMALL_N_CASES[lam] if n_set is None else n_set
    t = scan_grid(t_points)
    out = []
    for n in n_set:
        if n not in SMALL_N_CASES[lam]:
            raise ParameterError(f"n = {n} is not a residual case for lam = {lam}")
        vals = tp.f_closed(lam, n, t)
        i = int(np.argmin(vals))
        path = None
        if out_dir is not None:
            path = str(Path(out_dir) / f"curve_lam{lam}_n{n}.csv")
            write_csv(path, ["t", "F"], np.column_stack([t, vals]))
        out.append(CurveSummary(lam, n, float(vals[i]), float(t[i]), bool(vals.min() > 0), path))
    return out
