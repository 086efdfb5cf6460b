"""Linear and non-linear maps applied to IFSs and weighted clouds.

Every image operation returns a new :class:`~fraclab.ifs.WeightedCloud`
whose ``resolution`` is rescaled by a Lipschitz bound of the map on the
sampled region, so downstream box counts know how fine they may go.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial.distance import pdist

from .errors import DomainError, PreconditionError, ResourceError
from .ifs import Ifs, WeightedCloud


def as_direction(v) -> np.ndarray:
    """Normalise ``v`` to a unit vector."""
    v = np.asarray(v, dtype=float).reshape(-1)
    norm = np.linalg.norm(v)
    if not np.isfinite(norm) or norm == 0:
        raise PreconditionError(f"direction must be a nonzero finite vector, got {v.tolist()}")
    return v / norm


def plane_basis(normal) -> np.ndarray:
    """Orthonormal basis (as rows) of the plane orthogonal to ``normal`` in R^3."""
    n = as_direction(normal)
    if n.shape != (3,):
        raise PreconditionError("plane projections need a direction in R^3")
    helper = np.eye(3)[int(np.argmin(np.abs(n)))]
    u = np.cross(n, helper)
    u /= np.linalg.norm(u)
    return np.vstack([u, np.cross(n, u)])


class SmoothMap:
    """A map ``g: R^d -> R`` with exact gradient and Hessian.

    Build instances through :func:`distance_from`, :func:`product2`,
    :func:`product3`, :func:`linear`, :func:`poly` or
    :meth:`from_descriptor`.  Evaluators take an ``(n, d)`` array.
    """

    def __init__(self, kind: str, dim: int, params: dict, terms=None):
        self.kind = kind
        self.dim = dim
        self.params = params
        self._terms = terms

    def __repr__(self):
        return f"SmoothMap({self.descriptor()})"

    def descriptor(self) -> dict:
        d = {"kind": self.kind}
        d.update(self.params)
        return d

    @classmethod
    def from_descriptor(cls, desc: dict) -> "SmoothMap":
        kind = desc.get("kind")
        if kind == "product2":
            return product2()
        if kind == "product3":
            return product3()
        if kind == "distance":
            return distance_from(desc["pin"])
        if kind == "linear":
            return linear(desc["n"])
        if kind == "poly":
            return poly(desc["coeffs"])
        raise PreconditionError(f"unknown map kind {kind!r}")

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.dim:
            raise PreconditionError(f"{self.kind} expects {self.dim}-dimensional points, got {X.shape[1]}")
        return X

    def value(self, X) -> np.ndarray:
        X = self._check(X)
        if self.kind == "distance":
            return np.linalg.norm(X - self.params_array("pin"), axis=1)
        out = np.zeros(len(X))
        for c, e in self._terms:
            out += c * _monomial(X, e)
        return out

    def gradient(self, X) -> np.ndarray:
        X = self._check(X)
        if self.kind == "distance":
            diff = X - self.params_array("pin")
            r = np.linalg.norm(diff, axis=1, keepdims=True)
            return diff / r
        out = np.zeros_like(X)
        for c, e in self._terms:
            for k in range(self.dim):
                if e[k]:
                    de = list(e)
                    de[k] -= 1
                    out[:, k] += c * e[k] * _monomial(X, de)
        return out

    def hessian(self, X) -> np.ndarray:
        X = self._check(X)
        n, d = X.shape
        if self.kind == "distance":
            diff = X - self.params_array("pin")
            r = np.linalg.norm(diff, axis=1)
            u = diff / r[:, None]
            return (np.eye(d)[None] - u[:, :, None] * u[:, None, :]) / r[:, None, None]
        out = np.zeros((n, d, d))
        for c, e in self._terms:
            for a in range(d):
                for b in range(d):
                    de = list(e)
                    coef = de[a]
                    de[a] -= 1
                    coef *= de[b]
                    de[b] -= 1
                    if coef:
                        out[:, a, b] += c * coef * _monomial(X, de)
        return out

    def params_array(self, key) -> np.ndarray:
        return np.asarray(self.params[key], dtype=float)


def _monomial(X, exponents) -> np.ndarray:
    out = np.ones(len(X))
    for k, e in enumerate(exponents):
        if e < 0:
            return np.zeros(len(X))
        if e:
            out = out * X[:, k] ** e
    return out


def distance_from(a) -> SmoothMap:
    a = [float(v) for v in np.atleast_1d(a)]
    return SmoothMap("distance", len(a), {"pin": a})


def product2() -> SmoothMap:
    return SmoothMap("product2", 2, {}, [(1.0, (1, 1))])


def product3() -> SmoothMap:
    return SmoothMap("product3", 3, {}, [(1.0, (1, 1, 1))])


def linear(n) -> SmoothMap:
    n = as_direction(n)
    d = len(n)
    terms = [(float(n[k]), tuple(int(j == k) for j in range(d))) for k in range(d)]
    return SmoothMap("linear", d, {"n": n.tolist()}, terms)


def poly(coeffs) -> SmoothMap:
    """Polynomial from ``[[coefficient, [e_1, ..., e_d]], ...]``."""
    terms = []
    for c, e in coeffs:
        e = tuple(int(v) for v in e)
        if any(v < 0 for v in e):
            raise PreconditionError(f"negative exponent in {e}")
        terms.append((float(c), e))
    dims = {len(e) for _, e in terms}
    if len(dims) != 1:
        raise PreconditionError("all monomials need the same number of variables")
    return SmoothMap("poly", dims.pop(), {"coeffs": [[c, list(e)] for c, e in terms]}, terms)


# -- projections --------------------------------------------------------------

def orthogonal_project_cloud(cloud: WeightedCloud, n) -> WeightedCloud:
    n = as_direction(n)
    if len(n) != cloud.dim:
        raise PreconditionError(f"direction has {len(n)} coordinates, cloud is {cloud.dim}-dimensional")
    return WeightedCloud(cloud.points @ n, cloud.weights, cloud.resolution, meta={"direction": n.tolist()})


def project_ifs(ifs: Ifs, n) -> Ifs:
    """The system ``{r_i x + <t_i, n>}`` on the line, whose attractor is the projection."""
    n = as_direction(n)
    if len(n) != ifs.dim:
        raise PreconditionError(f"direction has {len(n)} coordinates, IFS is {ifs.dim}-dimensional")
    return Ifs.from_arrays(ifs.ratios, ifs.translations @ n, ifs.weights, ifs.name,
                           provenance=ifs.provenance)


def project_ifs_plane(ifs: Ifs, normal) -> Ifs:
    """Project a system in R^3 onto the plane orthogonal to ``normal``.

    Coordinates are taken in the basis returned by :func:`plane_basis`.
    """
    if ifs.dim != 3:
        raise PreconditionError("plane projection needs a system in R^3")
    basis = plane_basis(normal)
    return Ifs.from_arrays(ifs.ratios, ifs.translations @ basis.T, ifs.weights, ifs.name,
                           provenance=ifs.provenance)


def radial_project(cloud: WeightedCloud, exclusion_radius: float = 1e-12) -> WeightedCloud:
    """Map every point to ``x / ||x||`` on the unit sphere.

    The resolution is rescaled by ``2 / (r_min - resolution)``, a Lipschitz
    bound of the radial projection on the set sampled by the cloud.
    """
    norms = np.linalg.norm(cloud.points, axis=1)
    r_min = float(norms.min())
    if r_min < exclusion_radius:
        raise DomainError(
            f"point at distance {r_min:.3g} from the origin; radial projection is defined on R^d \\ {{0}}")
    clearance = r_min - cloud.resolution
    if clearance <= 0:
        raise DomainError(
            f"cloud resolution {cloud.resolution:.3g} reaches the origin (r_min={r_min:.3g}); "
            "radial projection is defined on R^d \\ {0}")
    return WeightedCloud(cloud.points / norms[:, None], cloud.weights,
                         2.0 * cloud.resolution / clearance, meta={"r_min": r_min})


def geodesic_project(cloud: WeightedCloud, pole_tol: float = 1e-9) -> WeightedCloud:
    """Azimuthal angle ``atan2(y, x)`` of points on the unit sphere in R^3."""
    if cloud.dim != 3:
        raise PreconditionError("geodesic projection acts on S^2 in R^3")
    P = cloud.points
    rho = np.hypot(P[:, 0], P[:, 1])
    if np.any(np.abs(P[:, 2]) >= 1.0 - pole_tol) or np.any(rho <= pole_tol):
        raise DomainError("a point lies at a pole, where the geodesic projection is not well defined")
    clearance = float(rho.min()) - cloud.resolution
    res = math.pi / 2 * cloud.resolution / clearance if clearance > 0 else math.inf
    return WeightedCloud(np.arctan2(P[:, 1], P[:, 0]), cloud.weights, res)


def angle_coordinate(cloud: WeightedCloud) -> WeightedCloud:
    """Angle of points on the unit circle; arc length is at most pi/2 times chord length."""
    if cloud.dim != 2:
        raise PreconditionError("angle coordinate needs points in R^2")
    P = cloud.points
    return WeightedCloud(np.arctan2(P[:, 1], P[:, 0]), cloud.weights,
                         math.pi / 2 * cloud.resolution, meta=dict(cloud.meta))


# -- images of clouds ---------------------------------------------------------

def dedup_grid(cloud: WeightedCloud, width: float | None = None) -> WeightedCloud:
    """Keep one value per cell of the grid ``width * Z`` anchored at 0.

    The first sample of each cell survives and collects the cell's weight;
    the covering radius grows by ``width``.
    """
    values = cloud.values
    if width is None:
        width = cloud.resolution
    if width <= 0:
        uniq, first, inverse = np.unique(values, return_index=True, return_inverse=True)
        return WeightedCloud(uniq, np.bincount(inverse, weights=cloud.weights), cloud.resolution,
                             meta=dict(cloud.meta))
    keys = np.floor(values / width).astype(np.int64)
    _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    weights = np.bincount(inverse, weights=cloud.weights)
    return WeightedCloud(values[first], weights, cloud.resolution + width, meta=dict(cloud.meta))


def map_image(g: SmoothMap, cloud: WeightedCloud) -> WeightedCloud:
    vals = g.value(cloud.points)
    lip = float(np.linalg.norm(g.gradient(cloud.points), axis=1).max())
    return WeightedCloud(vals, cloud.weights, cloud.resolution * lip, meta={"map": g.descriptor()})


def _stride(total: int, cap: int) -> np.ndarray:
    """``cap`` evenly spread indices of ``range(total)`` (all of them if it fits)."""
    if total <= cap:
        return np.arange(total, dtype=np.int64)
    return np.floor(np.linspace(0, total - 1, cap)).astype(np.int64)


def _pair_from_index(k: np.ndarray, n: int):
    """Invert the lexicographic enumeration of pairs ``i < j`` of ``range(n)``."""
    def start(i):
        return i * n - i * (i + 1) // 2

    b = 2.0 * n - 1.0
    i = np.floor((b - np.sqrt(np.maximum(b * b - 8.0 * k, 0.0))) / 2.0).astype(np.int64)
    i = np.clip(i, 0, max(n - 2, 0))
    i = np.where(k < start(i), i - 1, i)
    i = np.where(k >= start(i + 1), i + 1, i)
    return i, k - start(i) + i + 1


def distance_set(cloud: WeightedCloud, pin=None, max_pairs: int = 2_000_000) -> WeightedCloud:
    """Pinned or pairwise distance cloud, deduplicated on the resolution grid.

    Unpinned mode includes the zero distance of ``x = y`` and subsamples the
    lexicographic list of pairs with a uniform stride when it exceeds
    ``max_pairs``.
    """
    if len(cloud) == 0:
        raise PreconditionError("distance set of an empty cloud")
    P, w = cloud.points, cloud.weights
    if pin is not None:
        pin = np.asarray(pin, dtype=float).reshape(-1)
        vals = np.linalg.norm(P - pin, axis=1)
        out = WeightedCloud(vals, w, cloud.resolution, meta={"pin": pin.tolist()})
        return dedup_grid(out)
    n = len(P)
    total = n * (n - 1) // 2
    ks = _stride(total, max_pairs)
    i, j = _pair_from_index(ks, n)
    vals = np.concatenate([[0.0], np.linalg.norm(P[i] - P[j], axis=1)])
    weights = np.concatenate([[np.sum(w * w)], 2.0 * w[i] * w[j]])
    out = WeightedCloud(vals, weights, 2.0 * cloud.resolution,
                        meta={"pairs": int(len(ks)), "subsampled": bool(len(ks) < total)})
    return dedup_grid(out)


def _dedup_keys(keys, values, weights):
    uniq, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    return uniq, values[first], np.bincount(inverse.reshape(-1), weights=weights)


def algebraic_product(clouds: Sequence[WeightedCloud], max_tuples: int = 300_000_000,
                      chunk: int = 4_000_000) -> WeightedCloud:
    """Cloud of all products ``x * y (* z)`` of two or three line clouds.

    Every tuple is formed, block by block over the first factor, and the
    products are deduplicated on the grid of the output resolution as they
    are produced, so memory follows the number of occupied cells.  The
    surviving sample of a cell is the first tuple in lexicographic order.
    """
    clouds = list(clouds)
    if len(clouds) not in (2, 3):
        raise PreconditionError(f"need 2 or 3 factors, got {len(clouds)}")
    if any(c.dim != 1 for c in clouds):
        raise PreconditionError("algebraic product factors must be one-dimensional")
    total = int(np.prod([len(c) for c in clouds]))
    if total > max_tuples:
        raise ResourceError(f"{total} product tuples exceed the cap {max_tuples}", limit=max_tuples)
    bounds = [float(np.abs(c.values).max()) + c.resolution for c in clouds]
    res = 0.0
    for k, c in enumerate(clouds):
        res += c.resolution * float(np.prod([b for m, b in enumerate(bounds) if m != k]))
    width = res

    head, tail = clouds[0], clouds[1:]
    tail_v, tail_w = tail[0].values, tail[0].weights
    for c in tail[1:]:
        tail_v = np.multiply.outer(tail_v, c.values).reshape(-1)
        tail_w = np.multiply.outer(tail_w, c.weights).reshape(-1)
    rows = max(1, chunk // max(len(tail_v), 1))
    parts = []
    for a in range(0, len(head), rows):
        v = np.multiply.outer(head.values[a:a + rows], tail_v).reshape(-1)
        w = np.multiply.outer(head.weights[a:a + rows], tail_w).reshape(-1)
        # exact clouds (zero resolution) are deduplicated on the values themselves
        keys = np.floor(v / width).astype(np.int64) if width > 0 else v
        parts.append(_dedup_keys(keys, v, w))
    keys = np.concatenate([p[0] for p in parts])
    vals = np.concatenate([p[1] for p in parts])
    wts = np.concatenate([p[2] for p in parts])
    _, vals, wts = _dedup_keys(keys, vals, wts)
    return WeightedCloud(vals, wts, res + width, meta={"tuples": total})


# -- condition checkers -------------------------------------------------------

@dataclass
class CurvyReport:
    min_gradient_norm: float
    min_curvature_norm: float
    gradient_threshold: float
    curvature_threshold: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def curvature_vector(g: SmoothMap, X) -> np.ndarray:
    """The planar curvature vector built from first and second derivatives of ``g``."""
    G = g.gradient(X)
    H = g.hessian(X)
    gx, gy = G[:, 0], G[:, 1]
    return np.column_stack([H[:, 0, 0] * gy - H[:, 0, 1] * gx,
                            H[:, 0, 1] * gy - H[:, 1, 1] * gx])


def curvy_check(g: SmoothMap, cloud: WeightedCloud, threshold: float = 1e-6) -> CurvyReport:
    """Check that the gradient and curvature vector stay away from zero on a planar cloud.

    Thresholds are relative: ``threshold`` times the largest gradient norm,
    and times largest gradient norm by largest Hessian norm for curvature.
    """
    if cloud.dim != 2 or g.dim != 2:
        raise PreconditionError("curvy check is defined for maps of the plane")
    X = cloud.points
    gn = np.linalg.norm(g.gradient(X), axis=1)
    hn = np.linalg.norm(g.hessian(X), axis=(1, 2))
    cn = np.linalg.norm(curvature_vector(g, X), axis=1)
    g_thr = threshold * float(gn.max())
    c_thr = threshold * float(gn.max()) * float(hn.max())
    g_min, c_min = float(gn.min()), float(cn.min())
    return CurvyReport(g_min, c_min, g_thr, c_thr, bool(g_min > g_thr and c_min > c_thr))


@dataclass
class TmainReport:
    min_gradient_norm: float
    gradient_ok: bool
    max_normalized_cross: float
    cross_ok: bool
    ray_samples: int
    skipped_ray_samples: int
    lipschitz_min: float
    lipschitz_max: float
    lipschitz_pairs: int
    separation_floor: float
    bilipschitz_ok: bool
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.gradient_ok and self.cross_ok and self.bilipschitz_ok

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def tmain_condition_check(g: SmoothMap, cloud: WeightedCloud, ray_ts=(0.5, 0.8, 1.25, 2.0),
                          domain=None, tol: float = 1e-10, threshold: float = 1e-6,
                          max_points: int = 1500) -> TmainReport:
    """Evaluate the three gradient conditions for a map of R^3 on a cloud.

    1. the gradient never vanishes on the cloud;
    2. gradients along rays ``t * x`` stay parallel: the largest normalised
       cross product over the cloud and ``ray_ts`` must be at most ``tol``;
    3. ``h(x) = P3(grad g(x))`` is bi-Lipschitz against ``P3(x)``: the
       smallest ratio of distances over pairs of (a stride subsample of) the
       cloud, with spherical separation at least the radial resolution, must
       exceed ``threshold``.

    ``domain`` is an optional ``(lo, hi)`` box; ray samples leaving it are
    skipped and counted, as are samples where the gradient vanishes.
    """
    if cloud.dim != 3 or g.dim != 3:
        raise PreconditionError("the gradient conditions are checked for maps of R^3")
    X = cloud.points
    G = g.gradient(X)
    gn = np.linalg.norm(G, axis=1)
    g_min = float(gn.min())
    gradient_ok = g_min > threshold * max(float(gn.max()), 1e-300)

    worst, samples, skipped = 0.0, 0, 0
    for t in ray_ts:
        Y = t * X
        ok = np.ones(len(X), dtype=bool)
        if domain is not None:
            lo, hi = (np.asarray(b, dtype=float) for b in domain)
            ok &= np.all((Y > lo) & (Y < hi), axis=1)
        ok &= np.linalg.norm(Y, axis=1) > 0
        Gt = np.zeros_like(X)
        if ok.any():
            Gt[ok] = g.gradient(Y[ok])
        gtn = np.linalg.norm(Gt, axis=1)
        ok &= (gtn > 0) & (gn > 0) & np.isfinite(gtn)
        skipped += int((~ok).sum())
        samples += int(ok.sum())
        if ok.any():
            cross = np.linalg.norm(np.cross(Gt[ok], G[ok]), axis=1) / (gtn[ok] * gn[ok])
            worst = max(worst, float(cross.max()))
    cross_ok = samples > 0 and worst <= tol

    norms = np.linalg.norm(X, axis=1)
    clearance = float(norms.min()) - cloud.resolution
    floor = 2.0 * cloud.resolution / clearance if clearance > 0 else math.inf
    sel = _stride(len(X), max_points)
    U = X[sel] / norms[sel, None]
    good = gn[sel] > 0
    Hg = np.zeros_like(U)
    Hg[good] = G[sel][good] / gn[sel][good, None]
    du = pdist(U)
    dh = pdist(Hg)
    mask = du >= floor
    if mask.any():
        ratio = dh[mask] / du[mask]
        l_min, l_max = float(ratio.min()), float(ratio.max())
    else:
        l_min = l_max = float("nan")
    bilip_ok = bool(mask.any() and l_min > threshold)
    return TmainReport(g_min, bool(gradient_ok), worst, bool(cross_ok), samples, skipped,
                       l_min, l_max, int(mask.sum()), floor, bilip_ok,
                       meta={"map": g.descriptor(), "ray_ts": list(ray_ts)})
