"""Separation geometry of self-similar sets in R^3.

Double cones, plane and line containment tests, certified brackets for the
smallest angle between difference vectors of the attractor and a fixed
normal direction, and the direction along which a projection identifies an
extremal pair.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import PreconditionError
from .ifs import (
    DEFAULT_MAX_CELLS,
    DEFAULT_REL_TOL,
    CylinderCover,
    Ifs,
    _refine,
    _root_cover,
    bounding_ball,
    compose,
    level_cover,
)
from .maps import as_direction


@dataclass(frozen=True)
class DoubleCone:
    """Closed double cone of half-angle ``half_angle`` around the line ``vertex + R * axis``."""

    vertex: tuple
    axis: tuple
    half_angle: float

    def __post_init__(self):
        if not 0.0 < self.half_angle < math.pi / 2:
            raise PreconditionError(f"half-angle must lie in (0, pi/2), got {self.half_angle}")
        object.__setattr__(self, "vertex", tuple(float(v) for v in np.ravel(self.vertex)))
        object.__setattr__(self, "axis", tuple(as_direction(self.axis).tolist()))
        if len(self.vertex) != len(self.axis):
            raise PreconditionError("vertex and axis dimensions differ")


def cone_contains(cone: DoubleCone, y, rel_tol: float = 1e-12) -> bool:
    """Membership ``|<x - y, v>| >= cos(alpha) * ||x - y||`` with boundary included.

    ``rel_tol`` absorbs rounding in the two sides, relative to ``||x - y||``.
    """
    d = np.asarray(cone.vertex) - np.asarray(y, dtype=float)
    norm = float(np.linalg.norm(d))
    if norm == 0.0:
        raise PreconditionError("membership is not tested at the vertex itself")
    lhs = abs(float(d @ np.asarray(cone.axis)))
    return lhs >= (math.cos(cone.half_angle) - rel_tol) * norm


def affine_dimension(points, tol: float = 1e-7) -> int:
    """Dimension of the affine hull, from singular values above ``tol`` times the largest."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if len(P) == 0:
        raise PreconditionError("affine dimension of an empty point set")
    s = np.linalg.svd(P - P.mean(axis=0), compute_uv=False)
    if len(s) == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def collinearity_check(points, tol: float = 1e-9) -> bool:
    """True iff the three points lie on one line, up to relative ``tol``."""
    P = np.asarray(points, dtype=float)
    if P.shape[0] != 3:
        raise PreconditionError("collinearity is tested on exactly three points")
    if P.shape[1] < 3:
        P = np.hstack([P, np.zeros((3, 3 - P.shape[1]))])
    u, v = P[1] - P[0], P[2] - P[0]
    return bool(np.linalg.norm(np.cross(u, v)) <= tol * np.linalg.norm(u) * np.linalg.norm(v))


class ConeOutcome(Enum):
    NONEMPTY_WITNESS = "nonempty_witness"
    EMPTY_CERTIFIED = "empty_certified"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class ConeTestResult:
    outcome: ConeOutcome
    word: tuple | None = None
    depth: int = 0
    undetermined_cells: int = 0


def _ball_vs_truncated_cone(centers, radii, vertex, axis, alpha, r):
    """Classify balls against ``B_r(vertex)`` intersected with the double cone.

    Returns two boolean arrays: balls inside the interior of the
    intersection, and balls disjoint from the closed intersection.
    """
    d = centers - vertex
    D = np.linalg.norm(d, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cos_t = np.clip(np.abs(d @ axis) / D, 0.0, 1.0)
        theta = np.arccos(cos_t)
        spread = np.arcsin(np.clip(radii / D, 0.0, 1.0))
    clear_of_vertex = D > radii
    inside = clear_of_vertex & (D + radii < r) & (theta + spread < alpha)
    outside = (D - radii > r) | (clear_of_vertex & (theta - spread > alpha))
    return inside, outside


def _classify(ifs: Ifs, cover: CylinderCover, vertex, axis, alpha, r, depth, max_cells):
    """Refine ``cover`` where undecided; return ``(outcome, word, level, open_cells)``."""
    level = 0
    while True:
        inside, outside = _ball_vs_truncated_cone(cover.centers, cover.radii, vertex, axis, alpha, r)
        if inside.any():
            k = int(np.argmax(inside))
            return ConeOutcome.NONEMPTY_WITNESS, cover.word(k), level, 0
        open_cells = ~outside
        if not open_cells.any():
            return ConeOutcome.EMPTY_CERTIFIED, None, level, 0
        if level >= depth:
            return ConeOutcome.UNDETERMINED, None, level, int(open_cells.sum())
        cover = _subset(cover, np.nonzero(open_cells)[0])
        cover = _refine(ifs, cover, np.ones(len(cover), dtype=bool), max_cells)
        level += 1


def _cover_of_words(ifs: Ifs, words) -> CylinderCover:
    c, R = bounding_ball(ifs)
    sims = [compose(ifs, w) for w in words]
    L = max(len(w) for w in words)
    codes = np.full((len(words), L), -1, dtype=np.int16)
    for k, w in enumerate(words):
        codes[k, : len(w)] = np.asarray(w) - 1
    p = ifs.probabilities
    return CylinderCover(
        depth=L,
        ratios=np.array([s.ratio for s in sims]),
        translations=np.array([s.t for s in sims]),
        weights=np.array([np.prod(p[np.asarray(w) - 1]) for w in words]),
        lengths=np.array([len(w) for w in words], dtype=np.int64),
        codes=codes,
        root_center=c,
        root_radius=R,
    )


def cone_intersect_test(ifs: Ifs, cone: DoubleCone, r: float, depth: int,
                        vertex_address: tuple | None = None,
                        max_cells: int = DEFAULT_MAX_CELLS) -> ConeTestResult:
    """Decide whether the attractor meets ``int(B_r(x) ∩ C)`` for the cone's vertex ``x``.

    Cylinders are refined adaptively, only where undecided, down to
    ``depth`` extra levels.  A cylinder ball strictly inside the open
    truncated cone witnesses a non-empty intersection; if every remaining
    ball misses the closed truncated cone the intersection is certified
    empty.  Otherwise the answer is undetermined.

    A vertex on the attractor lies in cylinders at every depth, so it can
    only be certified through self-similarity.  Pass
    ``vertex_address=(w, i)`` when the vertex is ``f_w(Fix f_i)``: the
    siblings of the cylinders along ``w`` are tested against the truncated
    cone, and the tail ``f_w(attractor)`` reduces to testing the pieces
    ``j != i`` against the untruncated cone at ``Fix f_i``.
    """
    if ifs.dim != len(cone.vertex):
        raise PreconditionError("cone and IFS live in different dimensions")
    vertex = np.asarray(cone.vertex)
    axis = np.asarray(cone.axis)
    alpha = cone.half_angle
    if vertex_address is None:
        out, word, level, n_open = _classify(ifs, _root_cover(ifs, keep_words=True), vertex, axis,
                                             alpha, r, depth, max_cells)
        return ConeTestResult(out, word, level, n_open)

    w, i = tuple(int(s) for s in vertex_address[0]), int(vertex_address[1])
    p = ifs.maps[i - 1].fixed_point()
    x = compose(ifs, w)(p) if w else p
    _, R = bounding_ball(ifs)
    if np.linalg.norm(x - vertex) > DEFAULT_REL_TOL * max(R, 1.0):
        raise PreconditionError("vertex does not match the given address")
    groups = []
    siblings = [w[:k] + (j,) for k in range(len(w)) for j in range(1, ifs.q + 1) if j != w[k]]
    if siblings:
        groups.append((_cover_of_words(ifs, siblings), vertex, r))
    tail = [(j,) for j in range(1, ifs.q + 1) if j != i]
    groups.append((_cover_of_words(ifs, tail), p, math.inf))
    undecided, level = 0, 0
    for cover, v, radius in groups:
        out, word, lev, n_open = _classify(ifs, cover, v, axis, alpha, radius, depth, max_cells)
        level = max(level, lev)
        if out is ConeOutcome.NONEMPTY_WITNESS:
            if v is not vertex:
                # f_w f_i^m is a homothety onto the cone at x; choose m so the ball fits in B_r
                cell = _cover_of_words(ifs, [word])
                reach = float(np.linalg.norm(cell.centers[0] - p) + cell.radii[0])
                scale = compose(ifs, w).ratio if w else 1.0
                lam = ifs.maps[i - 1].ratio
                m = max(0, math.ceil(math.log(r / (scale * reach)) / math.log(lam)) + 1)
                word = w + (i,) * m + word
            return ConeTestResult(out, word, lev, 0)
        undecided += n_open
    if undecided:
        return ConeTestResult(ConeOutcome.UNDETERMINED, None, level, undecided)
    return ConeTestResult(ConeOutcome.EMPTY_CERTIFIED, None, level, 0)


def _subset(cover: CylinderCover, rows) -> CylinderCover:
    return CylinderCover(cover.depth, cover.ratios[rows], cover.translations[rows],
                         cover.weights[rows], cover.lengths[rows],
                         None if cover.codes is None else cover.codes[rows],
                         cover.root_center, cover.root_radius)


@dataclass
class SeparationReport:
    """Bracket ``lower <= sin(eps) <= upper`` for a normal direction ``n``.

    ``witness_words`` and ``witness_points`` give the pair of attractor
    points realising ``upper``; ``separated`` is False when cylinder balls
    from different first-level pieces overlap at the depth used, in which
    case ``lower`` is 0 and uninformative.
    """

    direction: np.ndarray
    sin_eps_lower: float
    sin_eps_upper: float
    witness_words: tuple
    witness_points: tuple
    depth: int
    separated: bool
    pairs: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def witness_value(self) -> float:
        x, y = (np.asarray(p) for p in self.witness_points)
        d = x - y
        return float(np.linalg.norm(np.cross(self.direction, d)) / np.linalg.norm(d))

    def to_dict(self) -> dict:
        return {
            "direction": self.direction.tolist(),
            "sin_eps_lower": self.sin_eps_lower,
            "sin_eps_upper": self.sin_eps_upper,
            "witness_words": [list(w) for w in self.witness_words],
            "witness_points": [list(map(float, p)) for p in self.witness_points],
            "depth": self.depth,
            "separated": self.separated,
            "pairs": self.pairs,
        }


def separation_spectrum(ifs: Ifs, n, depth: int, block: int = 2048,
                        max_cells: int = 10**5) -> SeparationReport:
    """Certified bracket for ``inf ||n x (x - y)|| / ||x - y||`` over distinct attractor points.

    Only pairs of depth-``depth`` cylinders with different first symbols are
    needed, since the ratio is invariant under the maps.  The upper bound is
    the minimum over pairs of attractor points ``f_w(Fix f_1)``; these
    representatives are nested across depths, so the upper bound never
    increases with depth.  The lower bound replaces each cylinder by its
    ball (which are nested too) and inflates/deflates by the radii, so it
    never decreases.  Ties are broken by lexicographic word pair.
    """
    if ifs.dim != 3:
        raise PreconditionError("separation spectrum is defined for systems in R^3")
    if depth < 1:
        raise PreconditionError(f"depth must be >= 1, got {depth}")
    n = as_direction(n)
    cover = level_cover(ifs, depth, max_cells=max_cells)
    centers, radii = cover.centers, cover.radii
    reps = cover.translations + cover.ratios[:, None] * ifs.maps[0].fixed_point()
    first = cover.codes[:, 0]
    M = len(cover)
    best_up, best_pair = math.inf, None
    best_lo = math.inf
    overlap = False
    pairs = 0
    for a0 in range(0, M, block):
        a = np.arange(a0, min(a0 + block, M))
        for b0 in range(a0, M, block):
            b = np.arange(b0, min(b0 + block, M))
            ia, ib = np.meshgrid(a, b, indexing="ij")
            mask = (first[ia] != first[ib]) & (ia < ib)
            if not mask.any():
                continue
            ia, ib = ia[mask], ib[mask]
            pairs += len(ia)
            d = reps[ia] - reps[ib]
            dd = np.linalg.norm(d, axis=1)
            # coincident maps give equal points, which do not form a difference direction
            with np.errstate(divide="ignore", invalid="ignore"):
                up = np.where(dd > 0, np.linalg.norm(np.cross(n, d), axis=1) / dd, np.inf)
            k = int(np.argmin(up))
            # blocks are visited in lexicographic order, so strict < keeps the first tie
            if up[k] < best_up and np.isfinite(up[k]):
                best_up, best_pair = float(up[k]), (int(ia[k]), int(ib[k]))
            dc = centers[ia] - centers[ib]
            rr = radii[ia] + radii[ib]
            dn = np.linalg.norm(dc, axis=1)
            overlap |= bool(np.any(dn <= rr))
            lo = np.maximum(0.0, np.linalg.norm(np.cross(n, dc), axis=1) - rr) / (dn + rr)
            best_lo = min(best_lo, float(lo.min()))
    if best_pair is None:
        raise PreconditionError("need two distinct attractor points from different first-level pieces")
    i, j = best_pair
    return SeparationReport(
        direction=n,
        sin_eps_lower=best_lo,
        sin_eps_upper=best_up,
        witness_words=(cover.word(i), cover.word(j)),
        witness_points=(reps[i].copy(), reps[j].copy()),
        depth=depth,
        separated=not overlap,
        pairs=pairs,
    )


def two_to_one_direction(ifs: Ifs, n, depth: int, report: SeparationReport | None = None) -> np.ndarray:
    """Unit vector joining the extremal witness pair, with sign fixed canonically.

    Projecting along this vector (onto its orthogonal plane) identifies the
    two witness points.
    """
    if report is None:
        report = separation_spectrum(ifs, n, depth)
    x, y = (np.asarray(p) for p in report.witness_points)
    return canonical_sign(as_direction(x - y))


def canonical_sign(v) -> np.ndarray:
    """Flip ``v`` so that its first non-negligible coordinate is positive."""
    v = np.asarray(v, dtype=float)
    nz = np.nonzero(np.abs(v) > 1e-12)[0]
    if len(nz) and v[nz[0]] < 0:
        v = -v
    return v + 0.0  # turns -0.0 into 0.0
