"""Point sets on S^{d-1}, Gram matrices of zonal kernels, and kernel interpolation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, eigvalsh

from .errors import DomainError, ParameterError, PoisednessError
from .io import dumps, read_csv, write_csv

UNIT_TOL = 1e-12
INNER_TOL = 1e-9
SEPARATION_TOL = 1e-8
EIG_RTOL = 1e-10
RESIDUAL_RTOL = 1e-8


@dataclass
class SpherePointSet:
    """Unit vectors in R^d stored row-wise."""

    d: int
    points: np.ndarray
    labels: list | None = None

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if self.d < 2:
            raise ParameterError("ambient dimension must be at least 2")
        if self.points.shape[1] != self.d:
            raise ParameterError(f"points have {self.points.shape[1]} coordinates, expected {self.d}")
        norms = np.linalg.norm(self.points, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_TOL):
            bad = int(np.argmax(np.abs(norms - 1.0)))
            raise DomainError(f"point {bad} has norm {norms[bad]!r}, not 1")
        if self.labels is not None and len(self.labels) != len(self):
            raise ParameterError("one label per point")

    def __len__(self) -> int:
        return self.points.shape[0]


def _check_unit(v, tol=INNER_TOL):
    v = np.asarray(v, dtype=float)
    norms = np.linalg.norm(np.atleast_2d(v), axis=1)
    if np.any(np.abs(norms - 1.0) > tol):
        raise DomainError("input vectors must have unit length")
    return v


def _angles(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """arccos of the clamped inner products of rows of a and rows of b.

    Near 0 and pi arccos loses half the digits, so there the angle is taken
    from the chord |a - b| (or |a + b|) instead.
    """
    inner = a @ b.T
    excess = np.max(np.abs(inner)) - 1.0 if inner.size else 0.0
    if excess > INNER_TOL:
        raise DomainError(f"inner product exceeds 1 by {excess:.3e}")
    out = np.arccos(np.clip(inner, -1.0, 1.0))
    near = np.abs(inner) > 0.5
    if np.any(near):
        rows, cols = np.nonzero(near)
        sign = np.sign(inner[rows, cols])
        chord = np.linalg.norm(a[rows] - sign[:, None] * b[cols], axis=1)
        half = 2.0 * np.arcsin(np.minimum(0.5 * chord, 1.0))
        out[rows, cols] = np.where(sign > 0, half, math.pi - half)
    return out


def geodesic_distance(x, y) -> float:
    """arccos(x . y) for unit vectors, with the inner product clamped to [-1, 1].

    Raises DomainError when |x . y| exceeds 1 by more than 1e-9.
    """
    x = np.atleast_2d(_check_unit(x))
    y = np.atleast_2d(_check_unit(y))
    if x.shape != (1, y.shape[1]) or y.shape[0] != 1:
        raise ParameterError("need two vectors of equal length")
    return float(_angles(x, y)[0, 0])


def pairwise_distances(a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    """Matrix of geodesic distances between rows of a and rows of b (default a)."""
    a = np.atleast_2d(a)
    b = a if b is None else np.atleast_2d(b)
    return _angles(a, b)


def random_points(d: int, count: int, seed: int | None = None) -> SpherePointSet:
    """Uniform points on S^{d-1}: normalised standard Gaussian vectors."""
    if d < 2 or count < 1:
        raise ParameterError("need d >= 2 and count >= 1")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((count, d))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return SpherePointSet(d, x)


def kernel_name(kernel) -> str:
    name = getattr(kernel, "name", None) or getattr(kernel, "__name__", None) or type(kernel).__name__
    params = getattr(kernel, "params", None)
    return f"{name}{params}" if params else str(name)


def _eval_kernel(kernel, dist: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(kernel(dist), dtype=float)
    except Exception as exc:
        for idx in np.ndindex(dist.shape):
            try:
                float(kernel(np.asarray(dist[idx])))
            except Exception:
                raise ParameterError(f"kernel failed at entry {idx} (distance {dist[idx]!r}): {exc}") from exc
        raise ParameterError(f"kernel failed: {exc}") from exc
    if vals.shape != dist.shape:
        vals = np.broadcast_to(vals, dist.shape).copy()
    if not np.all(np.isfinite(vals)):
        idx = tuple(int(i) for i in np.argwhere(~np.isfinite(vals))[0])
        raise ParameterError(f"kernel returned a non-finite value at entry {idx}")
    return vals


@dataclass
class GramMatrix:
    matrix: np.ndarray
    kernel: str
    points: SpherePointSet


def gram(points: SpherePointSet, kernel) -> GramMatrix:
    """[g(d(x_i, x_j))]: upper triangle evaluated and mirrored, diagonal g(0)."""
    n = len(points)
    dist = pairwise_distances(points.points)
    iu = np.triu_indices(n, 1)
    m = np.empty((n, n))
    diag = float(_eval_kernel(kernel, np.zeros(1))[0])
    m[np.diag_indices(n)] = diag
    if n > 1:
        upper = _eval_kernel(kernel, dist[iu])
        m[iu] = upper
        m[(iu[1], iu[0])] = upper
    return GramMatrix(m, kernel_name(kernel), points)


@dataclass
class PDCertificate:
    status: str
    min_eigenvalue: float
    threshold: float


def certify_pd(m) -> PDCertificate:
    """Classify by the smallest eigenvalue against +-1e-10 * trace / n."""
    a = m.matrix if isinstance(m, GramMatrix) else np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParameterError("need a square matrix")
    n = a.shape[0]
    lam_min = float(eigvalsh(a, subset_by_index=[0, 0])[0])
    threshold = EIG_RTOL * abs(float(np.trace(a))) / n
    if lam_min > threshold:
        status = "positive_definite"
    elif lam_min >= -threshold:
        status = "positive_semidefinite"
    else:
        status = "indefinite"
    return PDCertificate(status, lam_min, threshold)


def min_separation(points: SpherePointSet) -> float:
    if len(points) < 2:
        return math.inf
    dist = pairwise_distances(points.points)
    return float(dist[np.triu_indices(len(points), 1)].min())


@dataclass
class InterpolationResult:
    weights: np.ndarray
    residual: float
    min_eigenvalue: float
    status: str


def interpolate(points: SpherePointSet, values, kernel) -> InterpolationResult:
    """Weights w with sum_j w_j g(d(x_i, x_j)) = y_i, by Cholesky factorisation.

    Raises PoisednessError for repeated nodes or a Gram matrix that is not
    certified positive definite; the error carries the smallest eigenvalue.
    """
    y = np.asarray(values, dtype=float).ravel()
    if y.size != len(points):
        raise ParameterError(f"{y.size} values for {len(points)} points")
    sep = min_separation(points)
    if sep <= SEPARATION_TOL:
        raise PoisednessError(f"points are not distinct (minimum separation {sep:.3e})")
    g = gram(points, kernel)
    cert = certify_pd(g)
    if cert.status != "positive_definite":
        raise PoisednessError(f"Gram matrix is {cert.status} (min eigenvalue {cert.min_eigenvalue:.3e})",
                              cert.min_eigenvalue)
    try:
        factor = cho_factor(g.matrix, lower=True)
    except LinAlgError as exc:
        raise PoisednessError(f"Cholesky factorisation failed: {exc}", cert.min_eigenvalue) from exc
    w = cho_solve(factor, y)
    residual = float(np.max(np.abs(g.matrix @ w - y))) if y.size else 0.0
    return InterpolationResult(w, residual, cert.min_eigenvalue, cert.status)


def evaluate(points: SpherePointSet, weights, kernel, query):
    """s(q) = sum_j w_j g(d(q, x_j)) for one query vector or a stack of them."""
    w = np.asarray(weights, dtype=float).ravel()
    if w.size != len(points):
        raise ParameterError("one weight per point")
    q = _check_unit(query)
    dist = pairwise_distances(np.atleast_2d(q), points.points)
    vals = _eval_kernel(kernel, dist) @ w
    return float(vals[0]) if np.ndim(query) == 1 else vals


# --------------------------------------------------------------------------
# files


def read_points(path) -> SpherePointSet:
    """Points from CSV (one vector per row) or JSON ({"points": [[...], ...]})."""
    text_path = str(path)
    if text_path.endswith(".json"):
        with open(text_path) as fh:
            data = json.load(fh)
        pts = np.asarray(data["points"], dtype=float)
        d = int(data.get("d", pts.shape[1]))
        return SpherePointSet(d, pts, data.get("labels"))
    pts = read_csv(text_path)
    return SpherePointSet(pts.shape[1], pts)


def write_points(path, points: SpherePointSet) -> None:
    text_path = str(path)
    if text_path.endswith(".json"):
        payload = {"d": points.d, "points": points.points}
        if points.labels is not None:
            payload["labels"] = list(points.labels)
        with open(text_path, "w", encoding="utf-8") as fh:
            fh.write(dumps(payload))
        return
    header = [f"x{i}" for i in range(points.d)]
    write_csv(text_path, header, points.points)
