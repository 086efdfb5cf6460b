"""Dimension estimates for sampled sets and measures.

Box counting with log-log regression, local dimension of weighted clouds,
the counting certificate for projections of planar homogeneous measures,
and a sweep of projection directions on the sphere.
"""
from __future__ import annotations

import io
import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import PreconditionError, ResourceError
from .geometry import canonical_sign, collinearity_check
from .ifs import (
    DEFAULT_MAX_CELLS,
    Ifs,
    WeightedCloud,
    _refine,
    _root_cover,
    bounding_ball,
    check_ssc,
    level_cover,
    sample_cloud,
)

log = logging.getLogger(__name__)

RELIABLE_R2 = 0.99


@dataclass
class BoxCountResult:
    """Occupied-cell counts ``N(delta)`` and their log-log regression."""

    scales: np.ndarray
    counts: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    meta: dict = field(default_factory=dict)

    @property
    def reliable(self) -> bool:
        return self.r_squared >= RELIABLE_R2

    def rows(self) -> list:
        return [(float(d), int(n), math.log(1.0 / d), math.log(n)) for d, n in zip(self.scales, self.counts)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["delta", "count", "log_inv_delta", "log_count"])
        for d, n, x, y in self.rows():
            w.writerow([repr(d), n, repr(x), repr(y)])
        w.writerow(["slope", repr(self.slope), "r_squared", repr(self.r_squared)])
        return buf.getvalue()

    def to_dat(self) -> str:
        lines = ["# log(1/delta) log(N)"]
        lines += [f"{x!r} {y!r}" for _, _, x, y in self.rows()]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "scales": [float(s) for s in self.scales],
            "counts": [int(n) for n in self.counts],
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "reliable": self.reliable,
        }


def _count_cells(points: np.ndarray, delta: float, anchor: np.ndarray) -> int:
    idx = np.floor((points - anchor) / delta).astype(np.int64)
    if idx.shape[1] == 1:
        return int(len(np.unique(idx[:, 0])))
    idx -= idx.min(axis=0)
    span = idx.max(axis=0) + 1
    if float(np.prod(span.astype(float))) < 2.0**62:
        key = np.zeros(len(idx), dtype=np.int64)
        for k in range(idx.shape[1]):
            key = key * span[k] + idx[:, k]
        return int(len(np.unique(key)))
    return int(len(np.unique(idx, axis=0)))


def fit_loglog(scales, counts):
    """Least-squares slope, intercept and r^2 of ``log N`` against ``log(1/delta)``."""
    x = np.log(1.0 / np.asarray(scales, dtype=float))
    y = np.log(np.asarray(counts, dtype=float))
    if len(x) < 2:
        raise PreconditionError("regression needs at least two scales")
    slope, intercept = np.polyfit(x, y, 1)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum((y - (slope * x + intercept)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return float(slope), float(intercept), float(r2)


def box_count(cloud: WeightedCloud, scales, anchor=None) -> BoxCountResult:
    """Count occupied cells of ``anchor + delta * Z^d`` for each scale.

    Parameters
    ----------
    cloud : WeightedCloud
        Sample whose ``resolution`` bounds the covering radius.
    scales : sequence of float
        Strictly decreasing, all at least the cloud resolution.
    anchor : array-like, optional
        Grid offset, the origin by default.

    Raises
    ------
    PreconditionError
        If the scales are not strictly decreasing or go below the resolution.
    """
    scales = np.asarray(scales, dtype=float)
    if scales.ndim != 1 or len(scales) == 0:
        raise PreconditionError("scales must be a non-empty list")
    if np.any(np.diff(scales) >= 0) or np.any(scales <= 0):
        raise PreconditionError("scales must be positive and strictly decreasing")
    if scales[-1] < cloud.resolution:
        raise PreconditionError(
            f"smallest scale {scales[-1]:.6g} is below the cloud resolution {cloud.resolution:.6g}")
    if len(cloud) == 0:
        raise PreconditionError("cannot box-count an empty cloud")
    anchor = np.zeros(cloud.dim) if anchor is None else np.asarray(anchor, dtype=float).reshape(-1)
    counts = np.array([_count_cells(cloud.points, d, anchor) for d in scales], dtype=np.int64)
    if len(scales) == 1:
        return BoxCountResult(scales, counts, 0.0, math.log(counts[0]), 1.0)
    slope, intercept, r2 = fit_loglog(scales, counts)
    return BoxCountResult(scales, counts, slope, intercept, r2)


def lambda_adic_scales(ifs: Ifs, decades: float, start: int = 1) -> np.ndarray:
    """Scales ``lam**k``, ``k >= start``, spanning ``decades`` factors of ten, ``lam`` the largest ratio.

    These are the lambda-adic grids anchored at the origin, the same family
    :func:`finest_scales` uses for clouds.
    """
    lam = float(ifs.ratios.max())
    steps = max(2, math.ceil(decades * math.log(10.0) / math.log(1.0 / lam)))
    return lam ** np.arange(start, start + steps + 1, dtype=float)


def geometric_scales(top: float, bottom: float, ratio: float = 0.5) -> np.ndarray:
    """Scales ``top * ratio**k`` down to, and not below, ``bottom``."""
    if not 0 < ratio < 1:
        raise PreconditionError(f"scale ratio must lie in (0, 1), got {ratio}")
    if top <= bottom:
        raise PreconditionError(f"top scale {top:.6g} must exceed bottom scale {bottom:.6g}")
    k = math.floor(math.log(bottom / top) / math.log(ratio) + 1e-9)
    return top * ratio ** np.arange(0, k + 1, dtype=float)


def cloud_for_scales(ifs: Ifs, smallest: float, min_ratio: float = 4.0,
                     max_cells: int = DEFAULT_MAX_CELLS) -> WeightedCloud:
    """Deterministic cylinder cloud fine enough to count down to ``smallest``."""
    return sample_cloud(ifs, smallest / min_ratio, max_cells=max_cells)


def finest_scales(cloud: WeightedCloud, ratio: float, decades: float, min_ratio: float = 4.0,
                  top: float | None = None) -> np.ndarray:
    """The finest window of scales ``top * ratio**k``, ``k >= 1``, allowed by the cloud.

    With the default ``top = 1`` these are plain powers of ``ratio``.  The
    window ends at the last scale not below ``min_ratio`` times the
    resolution and spans ``decades`` factors of ten upward from there.
    """
    if not 0 < ratio < 1:
        raise PreconditionError(f"scale ratio must lie in (0, 1), got {ratio}")
    if top is None:
        top = 1.0
    bottom = min_ratio * cloud.resolution
    if top <= bottom:
        raise PreconditionError(
            f"cloud resolution {cloud.resolution:.6g} is too coarse for scales below {top:.6g}")
    kmax = math.floor(math.log(bottom / top) / math.log(ratio) + 1e-9)
    steps = max(2, math.ceil(decades * math.log(10.0) / math.log(1.0 / ratio) - 1e-9))
    kmin = max(1, kmax - steps)
    if kmax - kmin < 1:
        raise PreconditionError("cloud too coarse for box counting over two scales")
    return top * ratio ** np.arange(kmin, kmax + 1, dtype=float)


def estimate_set_dimension(obj, scale_decades: float = 3, max_cells: int = DEFAULT_MAX_CELLS,
                           min_ratio: float = 4.0, scales=None, ratio: float = 0.5) -> BoxCountResult:
    """Box-counting estimate for an IFS attractor or a cloud.

    For an :class:`Ifs` the scales are ``lam**k``, ``k >= 1``, spanning
    ``scale_decades`` factors of ten, and a cylinder cloud at least
    ``min_ratio`` times finer than the smallest scale is generated.  For a
    cloud, the scales are the finest window of :func:`finest_scales` with
    factor ``ratio``; coarse scales of an image set are often far from the
    asymptotic regime.
    """
    if isinstance(obj, Ifs):
        if scales is None:
            scales = lambda_adic_scales(obj, scale_decades)
        scales = np.asarray(scales, dtype=float)
        cloud = cloud_for_scales(obj, float(scales[-1]), min_ratio, max_cells)
        result = box_count(cloud, scales)
        result.meta.update({"depth": cloud.meta.get("depth"), "cells": len(cloud),
                            "resolution": cloud.resolution})
        return result
    cloud = obj
    if scales is None:
        scales = finest_scales(cloud, ratio, scale_decades, min_ratio)
    result = box_count(cloud, scales)
    result.meta.update({"cells": len(cloud), "resolution": cloud.resolution})
    return result


def local_dimension(cloud: WeightedCloud, x, radii) -> list:
    """Pairs ``(r, log mu(B_r(x)) / log r)`` with ``mu`` the cloud's weights."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if len(x) != cloud.dim:
        raise PreconditionError("point and cloud dimensions differ")
    dist = np.linalg.norm(cloud.points - x, axis=1)
    out = []
    for r in radii:
        r = float(r)
        if r < cloud.resolution:
            raise PreconditionError(f"radius {r:.6g} is below the cloud resolution {cloud.resolution:.6g}")
        if not 0 < r < 1:
            raise PreconditionError(f"radius must lie in (0, 1), got {r}")
        mass = float(cloud.weights[dist <= r].sum())
        out.append((r, math.log(mass) / math.log(r) if mass > 0 else math.inf))
    return out


@dataclass
class Ltech1Certificate:
    """Counting certificate for projections of a planar homogeneous measure.

    ``records`` holds one entry per ``(n, direction, test point)`` with the
    computed mass ``z`` of cylinders near the projected point and the bound
    ``(1 - p_min**N)**n`` it must respect.
    """

    triangle: np.ndarray
    kappa: float
    N: int
    p_min: float
    lam: float
    bound_c: float
    diameter_bound: float
    directions: np.ndarray
    test_points: np.ndarray
    records: list = field(default_factory=list)
    max_n: int = 0
    tolerance: float = 1e-12

    @property
    def all_ok(self) -> bool:
        return bool(self.records) and all(r["ok"] for r in self.records)

    def to_dict(self) -> dict:
        return {
            "triangle": self.triangle.tolist(),
            "kappa": self.kappa,
            "N": self.N,
            "p_min": self.p_min,
            "lambda": self.lam,
            "bound_c": self.bound_c,
            "diameter_bound": self.diameter_bound,
            "directions": self.directions.tolist(),
            "test_points": self.test_points.tolist(),
            "max_n": self.max_n,
            "all_ok": self.all_ok,
            "records": self.records,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "direction", "theta", "point", "z", "bound", "ok"])
        for r in self.records:
            w.writerow([r["n"], r["direction"], repr(r["theta"]), r["point"], repr(r["z"]),
                        repr(r["bound"]), int(r["ok"])])
        return buf.getvalue()


def _triangle(ifs: Ifs) -> np.ndarray:
    F = ifs.fixed_points()
    q = len(F)
    for i in range(q):
        for j in range(i + 1, q):
            for k in range(j + 1, q):
                if not collinearity_check(F[[i, j, k]]):
                    return F[[i, j, k]]
    raise PreconditionError("the one-symbol fixed points do not form a triangle")


def min_max_projection(sides: np.ndarray, grid: int = 4096) -> float:
    """``min over theta of max_k |<side_k, (cos theta, sin theta)>|``.

    A uniform grid on ``[0, pi)`` locates the minimum, which is then refined
    by bounded scalar minimisation on the neighbouring grid cells.
    """
    theta = np.arange(grid) * (math.pi / grid)
    U = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    vals = np.abs(U @ sides.T).max(axis=1)
    k = int(np.argmin(vals))
    h = math.pi / grid

    def objective(t):
        return float(np.abs(sides @ np.array([math.cos(t), math.sin(t)])).max())

    res = minimize_scalar(objective, bounds=(theta[k] - h, theta[k] + h), method="bounded",
                          options={"xatol": 1e-12})
    return min(float(vals[k]), float(res.fun))


def ltech1_certificate(ifs: Ifs, test_points=None, directions=None, n_max: int | None = None,
                       max_cells: int = DEFAULT_MAX_CELLS, kappa_grid: int = 4096,
                       ssc_depth: int = 8) -> Ltech1Certificate:
    """Check ``z_n(x) <= (1 - p_min**N)**n`` for projections of a planar measure.

    Parameters
    ----------
    ifs : Ifs
        Homogeneous planar system satisfying strong separation; its
        probabilities define the measure.
    test_points : array-like, optional
        Points of the support, the triangle of fixed points by default.
    directions : array-like, optional
        Angles in ``[0, pi)`` of the lines projected onto, ``k pi / 8`` by default.
    n_max : int, optional
        Largest ``n`` tested.  By default every ``n`` whose level
        ``q ** (n N)`` fits in ``max_cells``.

    Notes
    -----
    ``kappa`` is the smallest, over directions, of the largest projected side
    of the fixed-point triangle, and ``N = ceil(log(kappa / (4 |spt|)) / log lam)``
    with ``|spt| <= 2R`` from the invariant ball.  ``z_n(x)`` sums the
    weights of the level-``nN`` cylinders whose projected ball meets the
    closed ball of radius ``kappa / 4 * lam**(nN)`` around the projected
    test point.  The lower bound on dimension is
    ``log(1 - p_min**N) / (N log lam)``.
    """
    if ifs.dim != 2:
        raise PreconditionError("the certificate is defined for planar systems")
    if not ifs.is_homogeneous:
        raise PreconditionError("the certificate needs a homogeneous system")
    if not check_ssc(ifs, ssc_depth).proved:
        raise PreconditionError("strong separation could not be proved")
    tri = _triangle(ifs)
    sides = np.array([tri[1] - tri[0], tri[2] - tri[1], tri[0] - tri[2]])
    kappa = min_max_projection(sides, kappa_grid)
    _, R = bounding_ball(ifs)
    diam = 2.0 * R
    lam = float(ifs.ratios[0])
    N = max(1, math.ceil(math.log(kappa / (4.0 * diam)) / math.log(lam)))
    p = ifs.probabilities
    p_min = float(p.min())
    bound_c = math.log(1.0 - p_min**N) / (N * math.log(lam))

    X = tri if test_points is None else np.atleast_2d(np.asarray(test_points, dtype=float))
    thetas = (np.arange(8) * math.pi / 8 if directions is None
              else np.asarray(directions, dtype=float).reshape(-1))
    U = np.stack([np.cos(thetas), np.sin(thetas)], axis=1)

    q = ifs.q
    feasible = int(math.floor(math.log(max_cells) / (N * math.log(q)) + 1e-12))
    if n_max is None:
        n_max = feasible
    elif n_max > feasible:
        raise ResourceError(
            f"level q^(nN) exceeds {max_cells} cells beyond n = {feasible}", depth=n_max * N,
            limit=max_cells)
    if n_max < 1:
        raise ResourceError(f"even n = 1 needs {q ** N} cells, cap is {max_cells}",
                            depth=N, limit=max_cells)

    cert = Ltech1Certificate(tri, kappa, N, p_min, lam, bound_c, diam, thetas, X, max_n=n_max)
    cover = _root_cover(ifs, keep_words=False)
    PX = X @ U.T
    for n in range(1, n_max + 1):
        for _ in range(N):
            cover = _refine(ifs, cover, np.ones(len(cover), dtype=bool), max_cells)
        scale = lam ** (n * N)
        reach = float(cover.radii[0]) + kappa / 4.0 * scale
        proj = cover.centers @ U.T
        bound = (1.0 - p_min**N) ** n
        for a in range(len(thetas)):
            col = proj[:, a]
            for b in range(len(X)):
                z = float(cover.weights[np.abs(col - PX[b, a]) <= reach].sum())
                cert.records.append({
                    "n": n, "direction": a, "theta": float(thetas[a]), "point": b,
                    "z": z, "bound": bound, "ok": z <= bound + cert.tolerance,
                })
        log.info("level %d checked (%d cells)", n * N, len(cover))
    return cert


def fibonacci_sphere(num: int) -> np.ndarray:
    """``num`` nearly uniform unit vectors on the sphere, in a fixed order."""
    if num < 1:
        raise PreconditionError("need at least one direction")
    i = np.arange(num, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / num
    rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = i * math.pi * (3.0 - math.sqrt(5.0))
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)


def direction_sweep(ifs: Ifs, num_directions: int = 500, decades: float = 2,
                    threads: int = 1, max_cells: int = DEFAULT_MAX_CELLS,
                    min_ratio: float = 4.0, directions=None) -> list:
    """Box-counting slope of the projection onto each direction of a sphere grid.

    The cylinder cloud is built once; each projection is 1-Lipschitz, so the
    projected cloud keeps its resolution.  A direction and its antipode give
    the same line, and both are counted in the orientation fixed by
    :func:`canonical_sign`.  Rows come back in grid order whatever
    ``threads`` is.
    """
    if ifs.dim != 3:
        raise PreconditionError("direction sweep needs a system in R^3")
    dirs = fibonacci_sphere(num_directions) if directions is None else np.atleast_2d(directions)
    scales = lambda_adic_scales(ifs, decades)
    cloud = cloud_for_scales(ifs, float(scales[-1]), min_ratio, max_cells)

    def one(n):
        u = canonical_sign(np.asarray(n, dtype=float) / np.linalg.norm(n))
        proj = WeightedCloud(cloud.points @ u, cloud.weights, cloud.resolution)
        res = box_count(proj, scales)
        return {"n": [float(v) for v in n], "slope": res.slope, "r_squared": res.r_squared}

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, dirs))
    return [one(n) for n in dirs]
