"""Adaptive composite Gauss-Legendre quadrature.

Panels are refined dyadically, breadth first, so the integrand is called
once per refinement level on all active panels at the same time.  An
optional algebraic weight (b - x)^p at the right endpoint is integrated
exactly on the last panel with Gauss-Jacobi nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .errors import QuadratureError

DEFAULT_ORDER = 20
MAX_LEVEL = 40
MAX_ACTIVE_PANELS = 1 << 14


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    panels: int


@lru_cache(maxsize=None)
def _legendre(order):
    x, w = roots_legendre(order)
    return x, w


@lru_cache(maxsize=None)
def _jacobi(order, alpha):
    x, w = roots_jacobi(order, alpha, 0.0)
    return x, w


def _panel_rule(lo, hi, order, b, right_power):
    """Nodes (P, order) and weights for panels [lo, hi], weight (b - x)^p folded in."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x, w = _legendre(order)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    if right_power != 0.0:
        weights = weights * np.abs(b - nodes) ** right_power
        last = hi == b
        if np.any(last):
            xj, wj = _jacobi(order, right_power)
            nodes[last] = mid[last, None] + half[last, None] * xj[None, :]
            weights[last] = (half[last, None] ** (1.0 + right_power)) * wj[None, :]
    return nodes, weights


def _apply(f, lo, hi, order, b, right_power):
    nodes, weights = _panel_rule(lo, hi, order, b, right_power)
    vals = np.asarray(f(nodes.ravel()), dtype=float).reshape(nodes.shape)
    return np.sum(vals * weights, axis=1)


def integrate(f, a: float, b: float, *, tol: float = 1e-12, order: int = DEFAULT_ORDER,
              panels: int = 1, right_power: float = 0.0, max_level: int = MAX_LEVEL,
              max_panels: int = MAX_ACTIVE_PANELS, raise_on_fail: bool = True) -> QuadResult:
    """Integrate a vectorised f over [a, b] with optional weight (b - x)^right_power.

    ``tol`` is an absolute target for the whole integral; each panel must
    meet its share tol * width / (b - a).  On non-convergence a
    QuadratureError carries the best value and the achieved error estimate.
    Refinement also stops once more than ``max_panels`` panels are active.
    """
    if b == a:
        return QuadResult(0.0, 0.0, 0)
    if b < a:
        res = integrate(f, b, a, tol=tol, order=order, panels=panels,
                        right_power=right_power, max_level=max_level, max_panels=max_panels,
                        raise_on_fail=raise_on_fail)
        return QuadResult(-res.value, res.error, res.panels)
    if right_power <= -1.0:
        raise ValueError("endpoint power must exceed -1")
    length = b - a
    edges = np.linspace(a, b, max(1, int(panels)) + 1)
    lo, hi = edges[:-1], edges[1:].copy()
    hi[-1] = b
    coarse = _apply(f, lo, hi, order, b, right_power)
    total = 0.0
    err = 0.0
    done = 0
    for _ in range(max_level):
        mid = 0.5 * (lo + hi)
        both_lo = np.concatenate([lo, mid])
        both_hi = np.concatenate([mid, hi])
        halves = _apply(f, both_lo, both_hi, order, b, right_power)
        left, right = halves[: lo.size], halves[lo.size:]
        fine = left + right
        diff = np.abs(fine - coarse)
        ok = diff <= tol * (hi - lo) / length
        total += float(np.sum(fine[ok]))
        err += float(np.sum(diff[ok]))
        done += int(np.count_nonzero(ok))
        if np.all(ok):
            return QuadResult(total, err, done)
        bad = ~ok
        if 2 * np.count_nonzero(bad) > max_panels:
            break
        lo = np.concatenate([lo[bad], mid[bad]])
        hi = np.concatenate([mid[bad], hi[bad]])
        coarse = np.concatenate([left[bad], right[bad]])
    # best estimate from the unconverged panels' finer values
    value = total + float(np.sum(fine[~ok]))
    err += float(np.sum(diff[~ok]))
    # per-panel shares can stall at rounding level while the total is fine
    if err <= tol:
        return QuadResult(value, err, done + lo.size)
    if raise_on_fail:
        raise QuadratureError(
            f"quadrature did not converge: estimate {err:.3e} > tol {tol:.3e}", value, err)
    return QuadResult(value, err, done + lo.size)


def panels_for_frequency(freq: float, length: float, per_panel: float = math.pi) -> int:
    """Initial panel count so that each panel spans about half an oscillation."""
    return max(1, int(math.ceil(abs(freq) * length / per_panel)))
