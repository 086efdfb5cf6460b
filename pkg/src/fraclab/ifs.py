"""Homothetic iterated function systems and their symbolic dynamics.

An IFS here is a finite family of maps ``f_i(x) = r_i * x + t_i`` with
``0 < r_i < 1`` and no rotation part.  Words are tuples of 1-based symbols;
the composition ``f_w`` of a word ``w = (i_0, ..., i_{n-1})`` is
``f_{i_0} o f_{i_1} o ... o f_{i_{n-1}}``.

Cylinder enumeration is vectorised with numpy and always produces cells in
lexicographic word order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import PreconditionError, ResourceError

DEFAULT_MAX_CELLS = 10**7
#: geometric tolerances are this factor times the root radius
DEFAULT_REL_TOL = 1e-9

Word = tuple


def parse_number(value) -> float:
    """Parse a decimal, an integer or a rational ``"p/q"`` string exactly."""
    if isinstance(value, bool):
        raise PreconditionError(f"not a number: {value!r}")
    if isinstance(value, (int, float, Fraction)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError) as exc:
            raise PreconditionError(f"cannot parse number {value!r}") from exc
    raise PreconditionError(f"not a number: {value!r}")


@dataclass(frozen=True)
class Similitude:
    """Homothety ``x -> ratio * x + translation``."""

    ratio: float
    translation: tuple

    def __post_init__(self):
        ratio = float(self.ratio)
        t = tuple(float(v) for v in np.atleast_1d(np.asarray(self.translation, dtype=float)))
        if not 0.0 < ratio < 1.0:
            raise PreconditionError(f"contraction ratio must lie in (0, 1), got {ratio}")
        if not 1 <= len(t) <= 3:
            raise PreconditionError(f"ambient dimension must be 1, 2 or 3, got {len(t)}")
        object.__setattr__(self, "ratio", ratio)
        object.__setattr__(self, "translation", t)

    @property
    def ambient_dim(self) -> int:
        return len(self.translation)

    @property
    def t(self) -> np.ndarray:
        return np.array(self.translation)

    def __call__(self, x):
        return self.ratio * np.asarray(x, dtype=float) + self.t

    def fixed_point(self) -> np.ndarray:
        return self.t / (1.0 - self.ratio)


@dataclass(frozen=True)
class Ifs:
    """Ordered family of homotheties sharing one ambient dimension.

    ``weights`` is an optional probability vector attached to the maps.
    When it is absent, :attr:`probabilities` falls back to the natural
    weights ``r_i ** s`` where ``s`` is the similarity dimension.
    ``provenance`` optionally records, per map, the word of a parent system
    whose composition produced it.
    """

    maps: tuple
    weights: tuple | None = None
    name: str | None = None
    provenance: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise PreconditionError("an IFS needs at least one map")
        dims = {m.ambient_dim for m in maps}
        if len(dims) != 1:
            raise PreconditionError(f"maps disagree on ambient dimension: {sorted(dims)}")
        object.__setattr__(self, "maps", maps)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (len(maps),):
                raise PreconditionError(f"expected {len(maps)} weights, got {w.shape}")
            if np.any(w <= 0):
                raise PreconditionError("weights must be strictly positive")
            if abs(w.sum() - 1.0) > 1e-9:
                raise PreconditionError(f"weights must sum to 1, got {w.sum()!r}")
            object.__setattr__(self, "weights", tuple(float(v) for v in w / w.sum()))

    @classmethod
    def from_arrays(cls, ratios, translations, weights=None, name=None, provenance=None) -> "Ifs":
        t = np.asarray(translations, dtype=float)
        if t.ndim == 1:
            t = t[:, None]
        ratios = np.broadcast_to(np.asarray(ratios, dtype=float), (t.shape[0],))
        maps = tuple(Similitude(r, row) for r, row in zip(ratios, t))
        return cls(maps, None if weights is None else tuple(weights), name, provenance)

    @property
    def q(self) -> int:
        return len(self.maps)

    @property
    def dim(self) -> int:
        return self.maps[0].ambient_dim

    @property
    def ratios(self) -> np.ndarray:
        return np.array([m.ratio for m in self.maps])

    @property
    def translations(self) -> np.ndarray:
        return np.array([m.translation for m in self.maps])

    @property
    def is_homogeneous(self) -> bool:
        r = self.ratios
        return bool(np.all(np.abs(r - r[0]) <= 1e-12 * r[0]))

    @property
    def is_degenerate(self) -> bool:
        """A one-map system; its attractor is a single point."""
        return self.q == 1

    @property
    def probabilities(self) -> np.ndarray:
        if self.weights is not None:
            return np.array(self.weights)
        p = self.ratios ** similarity_dimension(self)
        return p / p.sum()

    def fixed_points(self) -> np.ndarray:
        return self.translations / (1.0 - self.ratios)[:, None]

    def with_weights(self, weights) -> "Ifs":
        return Ifs(self.maps, None if weights is None else tuple(weights), self.name)

    def to_dict(self) -> dict:
        out = {"dim": self.dim,
               "maps": [{"ratio": m.ratio, "translation": list(m.translation)} for m in self.maps]}
        if self.weights is not None:
            out["weights"] = list(self.weights)
        if self.name is not None:
            out["name"] = self.name
        return out


def ifs_from_dict(doc: dict) -> Ifs:
    """Build an :class:`Ifs` from a parsed IFS spec document.

    Expected keys are ``dim``, ``maps`` (a list of ``{ratio, translation}``),
    and optionally ``weights`` and ``name``.  Numbers may be decimals or
    ``"p/q"`` strings.
    """
    try:
        dim = int(doc["dim"])
        raw_maps = doc["maps"]
    except (KeyError, TypeError) as exc:
        raise PreconditionError(f"IFS document needs 'dim' and 'maps': {exc}") from exc
    maps = []
    for k, m in enumerate(raw_maps):
        t = m["translation"]
        if not isinstance(t, (list, tuple)):
            t = [t]
        t = [parse_number(v) for v in t]
        if len(t) != dim:
            raise PreconditionError(f"map {k + 1}: translation has {len(t)} coordinates, dim is {dim}")
        maps.append(Similitude(parse_number(m["ratio"]), t))
    weights = doc.get("weights")
    if weights is not None:
        weights = tuple(parse_number(w) for w in weights)
    return Ifs(tuple(maps), weights, doc.get("name"))


def _check_word(ifs: Ifs, word: Sequence[int]) -> tuple:
    word = tuple(int(s) for s in word)
    bad = [s for s in word if not 1 <= s <= ifs.q]
    if bad:
        raise PreconditionError(f"symbols {bad} out of range 1..{ifs.q}")
    return word


def compose(ifs: Ifs, word: Sequence[int]) -> Similitude:
    """Return ``f_w`` for a non-empty word ``w``."""
    word = _check_word(ifs, word)
    if not word:
        raise PreconditionError("the empty word composes to the identity, which is not a contraction")
    ratio = 1.0
    x = np.zeros(ifs.dim)
    for s in reversed(word):
        m = ifs.maps[s - 1]
        x = m.ratio * x + m.t
        ratio *= m.ratio
    return Similitude(ratio, x)


def fixed_point(s: Similitude) -> np.ndarray:
    return s.fixed_point()


def natural_projection_point(ifs: Ifs, word: Sequence[int]) -> np.ndarray:
    """Depth-``len(word)`` truncation ``f_w(0)`` of the natural projection."""
    return compose(ifs, word).t


def bounding_ball(ifs: Ifs) -> tuple[np.ndarray, float]:
    """Centre and radius of a ball mapped into itself by every ``f_i``.

    The attractor lies in this ball.
    """
    c = ifs.fixed_points().mean(axis=0)
    images = ifs.ratios[:, None] * c + ifs.translations
    spread = np.linalg.norm(images - c, axis=1).max()
    return c, float(spread / (1.0 - ifs.ratios.max()))


def similarity_dimension(ifs: Ifs, tol: float = 1e-12) -> float:
    """Solve ``sum_i r_i ** s = 1`` by bisection."""
    r = ifs.ratios
    if len(r) == 1:
        return 0.0
    lo, hi = 0.0, float(ifs.dim + 1)
    while np.sum(r ** hi) > 1.0:
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if np.sum(r ** mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class WeightedCloud:
    """Finite weighted sample of a set or measure.

    ``resolution`` is a covering radius: every point of the underlying set is
    within ``resolution`` of some sample point.
    """

    points: np.ndarray
    weights: np.ndarray
    resolution: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(w) != len(pts):
            raise PreconditionError(f"{len(pts)} points but {len(w)} weights")
        if np.any(w < 0):
            raise PreconditionError("weights must be nonnegative")
        total = w.sum()
        if total > 0:
            w = w / total
        self.points = pts
        self.weights = w
        self.resolution = float(self.resolution)

    def __len__(self):
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def values(self) -> np.ndarray:
        """Flat view of a one-dimensional cloud."""
        if self.dim != 1:
            raise PreconditionError(f"cloud is {self.dim}-dimensional")
        return self.points[:, 0]


@dataclass
class CylinderCover:
    """Cover of an attractor by balls around cylinder sets.

    Row ``k`` describes the cell of word ``word(k)``: its ball has centre
    ``centers[k]`` and radius ``radii[k]`` and contains ``f_w(attractor)``;
    ``weights[k]`` is the Bernoulli weight of the word.  ``codes`` stores
    0-based symbols padded with -1 and is ``None`` when words were not kept.
    """

    depth: int
    ratios: np.ndarray
    translations: np.ndarray
    weights: np.ndarray
    lengths: np.ndarray
    codes: np.ndarray | None
    root_center: np.ndarray
    root_radius: float

    def __len__(self):
        return len(self.ratios)

    @property
    def centers(self) -> np.ndarray:
        return self.translations + self.ratios[:, None] * self.root_center

    @property
    def radii(self) -> np.ndarray:
        return self.ratios * self.root_radius

    def word(self, k: int) -> tuple:
        if self.codes is None:
            raise PreconditionError("cover was built without words")
        return tuple(int(s) + 1 for s in self.codes[k, : self.lengths[k]])

    def words(self) -> Iterator[tuple]:
        for k in range(len(self)):
            yield self.word(k)

    @property
    def cells(self) -> Iterator[tuple]:
        """Yield ``(word, center, radius, weight)`` per cell."""
        centers, radii = self.centers, self.radii
        for k in range(len(self)):
            yield self.word(k), centers[k], float(radii[k]), float(self.weights[k])


def _root_cover(ifs: Ifs, keep_words: bool) -> CylinderCover:
    c, R = bounding_ball(ifs)
    return CylinderCover(
        depth=0,
        ratios=np.ones(1),
        translations=np.zeros((1, ifs.dim)),
        weights=np.ones(1),
        lengths=np.zeros(1, dtype=np.int64),
        codes=np.zeros((1, 0), dtype=np.int16) if keep_words else None,
        root_center=c,
        root_radius=R,
    )


def _refine(ifs: Ifs, cover: CylinderCover, mask: np.ndarray, max_cells: int) -> CylinderCover:
    """Replace each masked cell by its ``q`` children, keeping lexicographic order."""
    q = ifs.q
    rep = np.where(mask, q, 1)
    total = int(rep.sum())
    next_depth = int(cover.lengths[mask].max()) + 1 if mask.any() else cover.depth
    if total > max_cells:
        raise ResourceError(
            f"refining to depth {next_depth} needs {total} cells, cap is {max_cells}",
            depth=next_depth, limit=max_cells)
    idx = np.repeat(np.arange(len(cover)), rep)
    starts = np.cumsum(rep) - rep
    sym = np.arange(total) - np.repeat(starts, rep)
    split = mask[idx]
    lam = ifs.ratios
    t = ifs.translations
    p = ifs.probabilities

    parent_r = cover.ratios[idx]
    ratios = parent_r * np.where(split, lam[sym], 1.0)
    translations = cover.translations[idx] + np.where(split[:, None], parent_r[:, None] * t[sym], 0.0)
    weights = cover.weights[idx] * np.where(split, p[sym], 1.0)
    parent_len = cover.lengths[idx]
    lengths = parent_len + split

    codes = None
    if cover.codes is not None:
        width = max(cover.codes.shape[1], int(lengths.max()))
        codes = np.full((total, width), -1, dtype=np.int16)
        codes[:, : cover.codes.shape[1]] = cover.codes[idx]
        rows = np.nonzero(split)[0]
        codes[rows, parent_len[rows]] = sym[rows]
    return CylinderCover(
        depth=int(lengths.max()),
        ratios=ratios,
        translations=translations,
        weights=weights,
        lengths=lengths,
        codes=codes,
        root_center=cover.root_center,
        root_radius=cover.root_radius,
    )


def cylinder_cover(ifs: Ifs, target_radius: float, max_cells: int = DEFAULT_MAX_CELLS,
                   keep_words: bool = True) -> CylinderCover:
    """Adaptive cover whose cells all have radius at most ``target_radius``.

    Cells are subdivided (by appending every symbol) while their radius
    exceeds the target.  A target at or above the root radius returns the
    root cell alone.
    """
    if target_radius <= 0:
        raise PreconditionError(f"target radius must be positive, got {target_radius}")
    cover = _root_cover(ifs, keep_words)
    while True:
        mask = cover.radii > target_radius
        if not mask.any():
            return cover
        cover = _refine(ifs, cover, mask, max_cells)


def level_cover(ifs: Ifs, depth: int, max_cells: int = DEFAULT_MAX_CELLS,
                keep_words: bool = True) -> CylinderCover:
    """Cover by all ``q ** depth`` cylinders of exactly the given length."""
    if depth < 0:
        raise PreconditionError(f"depth must be nonnegative, got {depth}")
    if ifs.q ** depth > max_cells:
        raise ResourceError(
            f"depth {depth} needs {ifs.q ** depth} cells, cap is {max_cells}",
            depth=depth, limit=max_cells)
    cover = _root_cover(ifs, keep_words)
    for _ in range(depth):
        cover = _refine(ifs, cover, np.ones(len(cover), dtype=bool), max_cells)
    return cover


def sample_cloud(ifs: Ifs, target_radius: float, max_cells: int = DEFAULT_MAX_CELLS) -> WeightedCloud:
    """Deterministic cloud of cylinder centres carrying Bernoulli weights."""
    cover = cylinder_cover(ifs, target_radius, max_cells, keep_words=False)
    return WeightedCloud(cover.centers, cover.weights, float(cover.radii.max()),
                         meta={"depth": cover.depth, "cells": len(cover)})


def chaos_game(ifs: Ifs, n_points: int, seed: int, burn_in: int = 64) -> WeightedCloud:
    """Random-orbit sample of the self-similar measure.

    Unlike :func:`sample_cloud` the covering radius is not certified; the
    reported resolution is the cylinder size at depth ``log_q(n_points)``,
    which is only the typical spacing.
    """
    rng = np.random.default_rng(seed)
    p = ifs.probabilities
    lam = ifs.ratios
    t = ifs.translations
    x = ifs.fixed_points()[0].copy()
    symbols = rng.choice(ifs.q, size=burn_in + n_points, p=p)
    out = np.empty((n_points, ifs.dim))
    for k, s in enumerate(symbols):
        x = lam[s] * x + t[s]
        if k >= burn_in:
            out[k - burn_in] = x
    _, R = bounding_ball(ifs)
    depth = max(1, int(math.log(max(n_points, 2)) / math.log(max(ifs.q, 2))))
    res = R * float(lam.max()) ** depth
    return WeightedCloud(out, np.full(n_points, 1.0 / n_points), res,
                         meta={"sampler": "chaos", "seed": seed, "certified": False})


class SSCStatus(Enum):
    PROVED = "proved"
    VIOLATED = "violated"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class SSCCertificate:
    """Outcome of :func:`check_ssc`.

    ``depth`` is the refinement depth that proved separation (or exposed a
    coincidence); ``witness`` is a pair of words for violations;
    ``overlap`` records that cylinder balls from different first-level
    pieces strictly overlapped at the deepest level tested.
    """

    status: SSCStatus
    depth: int | None = None
    witness: tuple | None = None
    overlap: bool = False

    @property
    def proved(self) -> bool:
        return self.status is SSCStatus.PROVED


def coincident_pairs(ratios: np.ndarray, translations: np.ndarray, ratio_tol: float,
                     trans_tol: float) -> np.ndarray:
    """Index pairs ``(i, j)``, ``i < j``, whose maps agree within tolerance.

    Returned sorted lexicographically.
    """
    if len(ratios) < 2:
        return np.zeros((0, 2), dtype=np.int64)
    rt = max(ratio_tol, 1e-300)
    tt = max(trans_tol, 1e-300)
    keys = np.column_stack([ratios / rt, translations / tt])
    pairs = cKDTree(keys).query_pairs(r=1.0, p=np.inf, output_type="ndarray")
    if len(pairs) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    pairs = np.sort(pairs, axis=1)
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    return pairs[order]


def _cross_piece_conflicts(cover: CylinderCover, tol: float):
    """Pairs of balls from different first-level pieces that are not separated.

    Returns ``(pairs, gaps)`` where ``gaps = dist - (r_i + r_j)``.
    """
    centers = cover.centers
    radii = cover.radii
    first = cover.codes[:, 0]
    reach = 2.0 * float(radii.max()) + tol
    pairs = cKDTree(centers).query_pairs(r=reach, output_type="ndarray")
    if len(pairs) == 0:
        return pairs.reshape(0, 2), np.zeros(0)
    pairs = pairs[first[pairs[:, 0]] != first[pairs[:, 1]]]
    dist = np.linalg.norm(centers[pairs[:, 0]] - centers[pairs[:, 1]], axis=1)
    gaps = dist - radii[pairs[:, 0]] - radii[pairs[:, 1]]
    keep = gaps <= tol
    return pairs[keep], gaps[keep]


def check_ssc(ifs: Ifs, max_depth: int = 8, tol: float | None = None, root=None,
              max_cells: int = 10**6) -> SSCCertificate:
    """Try to certify the strong separation condition.

    At each depth ``k`` the cylinder balls of length-``k`` words are compared
    across different first symbols; if all such pairs are separated by more
    than ``tol`` the condition is proved.  Two distinct words of equal
    length with coinciding maps prove a violation.  Anything else is
    undetermined.  ``root`` optionally supplies a ``(center, radius)`` ball
    known to be mapped into itself by every map.
    """
    if ifs.q == 1:
        return SSCCertificate(SSCStatus.PROVED, depth=0)
    c, R = bounding_ball(ifs) if root is None else (np.asarray(root[0], float), float(root[1]))
    if tol is None:
        tol = DEFAULT_REL_TOL * max(R, 1e-300)
    overlap = False
    for k in range(1, max_depth + 1):
        try:
            cover = level_cover(ifs, k, max_cells=max_cells)
        except ResourceError:
            break
        cover.root_center, cover.root_radius = c, R
        same = coincident_pairs(cover.ratios, cover.translations, DEFAULT_REL_TOL, tol)
        if len(same):
            i, j = same[0]
            return SSCCertificate(SSCStatus.VIOLATED, depth=k,
                                  witness=(cover.word(int(i)), cover.word(int(j))), overlap=True)
        pairs, gaps = _cross_piece_conflicts(cover, tol)
        if len(pairs) == 0:
            return SSCCertificate(SSCStatus.PROVED, depth=k)
        overlap = bool(np.any(gaps < -tol))
    return SSCCertificate(SSCStatus.UNDETERMINED, overlap=overlap)


def product_ifs(factors: Sequence[Ifs]) -> Ifs:
    """Cartesian product of two or three homogeneous systems on the line.

    All factors must share one contraction ratio; the product maps are
    ``x -> r * x + (t_i, t_j[, t_k])`` in lexicographic order.
    """
    factors = list(factors)
    if len(factors) not in (2, 3):
        raise PreconditionError(f"need 2 or 3 factors, got {len(factors)}")
    for f in factors:
        if f.dim != 1:
            raise PreconditionError("product factors must live on the line")
        if not f.is_homogeneous:
            raise PreconditionError("product factors must be homogeneous")
    lam = factors[0].ratios[0]
    if any(abs(f.ratios[0] - lam) > 1e-12 * lam for f in factors):
        raise PreconditionError(
            f"factor ratios differ: {[float(f.ratios[0]) for f in factors]}; a common ratio is required")
    grids = np.meshgrid(*[f.translations[:, 0] for f in factors], indexing="ij")
    t = np.column_stack([g.reshape(-1) for g in grids])
    weights = None
    if all(f.weights is not None for f in factors):
        wg = np.meshgrid(*[np.array(f.weights) for f in factors], indexing="ij")
        weights = np.prod([g.reshape(-1) for g in wg], axis=0)
    name = " x ".join(f.name or "ifs" for f in factors)
    return Ifs.from_arrays(lam, t, weights, name)
