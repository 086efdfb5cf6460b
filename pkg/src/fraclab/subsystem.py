"""Sub-systems of an IFS: iterates, word removal and separated homogeneous pieces."""
from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import FraclabError, NotFoundError, PreconditionError, ResourceError, UnsupportedError
from .ifs import (
    DEFAULT_MAX_CELLS,
    DEFAULT_REL_TOL,
    Ifs,
    bounding_ball,
    check_ssc,
    coincident_pairs,
    level_cover,
    similarity_dimension,
)

log = logging.getLogger(__name__)


class HomogenizeFailure(FraclabError):
    """No admissible depth was found; carries the best system seen."""

    def __init__(self, message, best=None, best_dimension=float("nan"), target=float("nan")):
        super().__init__(message)
        self.best = best
        self.best_dimension = best_dimension
        self.target = target


def iterate(ifs: Ifs, n: int, max_cells: int = DEFAULT_MAX_CELLS) -> Ifs:
    """The system of all ``q ** n`` compositions of length ``n``."""
    if n < 1:
        raise PreconditionError(f"iteration count must be >= 1, got {n}")
    if n == 1:
        return ifs
    cover = level_cover(ifs, n, max_cells=max_cells)
    weights = cover.weights if ifs.weights is not None else None
    name = f"{ifs.name or 'ifs'}^{n}"
    return Ifs.from_arrays(cover.ratios, cover.translations, weights, name,
                           provenance=tuple(cover.words()))


def _provenance(ifs: Ifs) -> list:
    if ifs.provenance is not None:
        return list(ifs.provenance)
    return [(k + 1,) for k in range(ifs.q)]


def remove_words(ifs_iterated: Ifs, words: Sequence[Sequence[int]]) -> Ifs:
    """Drop the maps produced by the listed words.

    Words refer to the provenance of an iterated system (see :func:`iterate`);
    for a system without provenance they are single symbols.
    """
    prov = _provenance(ifs_iterated)
    index = {w: k for k, w in enumerate(prov)}
    drop = set()
    for w in words:
        w = tuple(int(s) for s in w)
        if w not in index:
            raise NotFoundError(f"word {w} is not a map of this system")
        drop.add(index[w])
    if not drop:
        return ifs_iterated
    keep = [k for k in range(ifs_iterated.q) if k not in drop]
    if not keep:
        raise PreconditionError("cannot remove every map")
    weights = None
    if ifs_iterated.weights is not None:
        w = np.array(ifs_iterated.weights)[keep]
        weights = w / w.sum()
    out = Ifs.from_arrays(ifs_iterated.ratios[keep], ifs_iterated.translations[keep], weights,
                          ifs_iterated.name, provenance=tuple(prov[k] for k in keep))
    log.info("removed %d maps; similarity dimension %.6f", len(drop), similarity_dimension(out))
    return out


def commensurable_exponents(ifs: Ifs, rel_tol: float = 1e-9, max_multiple: int = 64):
    """Find ``r0`` and integers ``k_i`` with ``ratio_i = r0 ** k_i``.

    Returns ``(r0, k)`` for the largest such ``r0`` found, or raises
    :class:`UnsupportedError`.
    """
    logs = -np.log(ifs.ratios)
    base = logs.min()
    for m in range(1, max_multiple + 1):
        unit = base / m
        k = logs / unit
        kr = np.round(k)
        if np.all(np.abs(k - kr) <= rel_tol * k):
            return math.exp(-unit), kr.astype(np.int64)
    raise UnsupportedError(
        f"contraction ratios {ifs.ratios.tolist()} are not integer powers of a common ratio")


def _exact_level_words(ifs: Ifs, exponents: np.ndarray, n: int, max_cells: int):
    """Words whose exponents sum to exactly ``n``, with their maps, in lexicographic order."""
    q, d = ifs.q, ifs.dim
    lam, t = ifs.ratios, ifs.translations
    frontier_r = np.ones(1)
    frontier_t = np.zeros((1, d))
    frontier_s = np.zeros(1, dtype=np.int64)
    frontier_w = [()]
    done_r, done_t, done_w = [], [], []
    while len(frontier_r):
        size = len(frontier_r) * q
        if size + len(done_w) > max_cells:
            raise ResourceError(f"exact-level enumeration at depth {n} exceeds {max_cells} cells",
                                depth=n, limit=max_cells)
        nr = (frontier_r[:, None] * lam[None, :]).reshape(-1)
        nt = (frontier_t[:, None, :] + frontier_r[:, None, None] * t[None, :, :]).reshape(-1, d)
        ns = (frontier_s[:, None] + exponents[None, :]).reshape(-1)
        nw = [w + (j + 1,) for w in frontier_w for j in range(q)]
        finished = ns == n
        alive = ns < n
        done_r.append(nr[finished])
        done_t.append(nt[finished])
        done_w.extend(w for w, f in zip(nw, finished) if f)
        frontier_r, frontier_t, frontier_s = nr[alive], nt[alive], ns[alive]
        frontier_w = [w for w, a in zip(nw, alive) if a]
    order = sorted(range(len(done_w)), key=lambda k: done_w[k])
    ratios = np.concatenate(done_r)[order] if done_r else np.zeros(0)
    trans = np.concatenate(done_t)[order] if done_t else np.zeros((0, d))
    return ratios, trans, [done_w[k] for k in order]


def _greedy_pack(centers: np.ndarray, radius: float, tol: float) -> list:
    """Greedy maximal family of pairwise disjoint equal balls, in the given order."""
    if len(centers) == 0:
        return []
    tree = cKDTree(centers)
    neighbours = tree.query_ball_point(centers, r=2.0 * radius + tol)
    accepted = np.zeros(len(centers), dtype=bool)
    for k, nb in enumerate(neighbours):
        if not any(accepted[j] for j in nb if j != k):
            accepted[k] = True
    return np.nonzero(accepted)[0].tolist()


def greedy_ssc_subsystem(ifs: Ifs, depth: int, max_cells: int = DEFAULT_MAX_CELLS,
                         tol: float | None = None) -> Ifs:
    """Separated sub-system of the depth-``depth`` iterate of a homogeneous IFS.

    Cylinder balls are scanned in lexicographic order and each one disjoint
    from all previously accepted balls is kept.  The accepted maps have
    pairwise disjoint images of the root ball, which every map sends into
    itself, so the result satisfies the strong separation condition.
    """
    if not ifs.is_homogeneous:
        raise PreconditionError("greedy packing needs a homogeneous system")
    c, R = bounding_ball(ifs)
    if tol is None:
        tol = DEFAULT_REL_TOL * max(R, 1e-300)
    cover = level_cover(ifs, depth, max_cells=max_cells)
    keep = _greedy_pack(cover.centers, float(cover.radii[0]), tol)
    words = tuple(cover.word(k) for k in keep)
    weights = None
    if ifs.weights is not None:
        w = cover.weights[keep]
        weights = w / w.sum()
    out = Ifs.from_arrays(cover.ratios[keep], cover.translations[keep], weights,
                          f"greedy({ifs.name or 'ifs'}, {depth})", provenance=words)
    if out.is_degenerate:
        log.warning("greedy packing at depth %d kept a single map", depth)
    return out


def homogenize(ifs: Ifs, epsilon: float, max_depth: int = 10, max_cells: int = DEFAULT_MAX_CELLS,
               ssc_depth: int = 8) -> Ifs:
    """Homogeneous separated sub-system losing less than ``epsilon`` of dimension.

    Ratios must be integer powers ``r0 ** k_i`` of a common ratio.  For each
    ``n <= max_depth`` the words with exponent sum exactly ``n`` (all of
    ratio ``r0 ** n``) are packed greedily; the first ``n`` whose sub-system
    has similarity dimension above ``min(s, d) - epsilon`` is returned.
    ``s`` is the similarity dimension of the input and ``d`` the ambient
    dimension, which bounds the attractor's dimension for overlapping input.
    Raises :class:`HomogenizeFailure` carrying the best system otherwise.
    """
    if epsilon <= 0:
        raise PreconditionError(f"epsilon must be positive, got {epsilon}")
    r0, exps = commensurable_exponents(ifs)
    s = similarity_dimension(ifs)
    target = min(s, float(ifs.dim)) - epsilon
    if ifs.is_homogeneous and check_ssc(ifs, ssc_depth).proved:
        return ifs
    c, R = bounding_ball(ifs)
    tol = DEFAULT_REL_TOL * max(R, 1e-300)
    best, best_dim = None, -math.inf
    for n in range(1, max_depth + 1):
        try:
            ratios, trans, words = _exact_level_words(ifs, exps, n, max_cells)
        except ResourceError:
            break
        if len(words) == 0:
            continue
        centers = trans + ratios[:, None] * c
        keep = _greedy_pack(centers, float(ratios[0] * R), tol)
        if len(keep) < 2:
            continue
        weights = None
        if ifs.weights is not None:
            p = np.array(ifs.weights)
            w = np.array([np.prod(p[np.array(words[k]) - 1]) for k in keep])
            weights = w / w.sum()
        sub = Ifs.from_arrays(ratios[keep], trans[keep], weights,
                              f"homogenized({ifs.name or 'ifs'}, {n})",
                              provenance=tuple(words[k] for k in keep))
        dim = math.log(len(keep)) / (n * math.log(1.0 / r0))
        if dim > best_dim:
            best, best_dim = sub, dim
        if dim > target and check_ssc(sub, 1, root=(c, R)).proved:
            return sub
    raise HomogenizeFailure(
        f"no depth <= {max_depth} reaches dimension {target:.6f}; best {best_dim:.6f}",
        best=best, best_dimension=best_dim, target=target)


def detect_exact_overlaps(ifs: Ifs, depth: int, tol: float = DEFAULT_REL_TOL,
                          max_cells: int = DEFAULT_MAX_CELLS) -> list:
    """Unordered pairs of distinct equal-length words with coinciding maps.

    Ratios are compared absolutely, translations relative to the root
    radius.  Pairs come grouped by word length, lexicographic within.
    """
    if depth < 1:
        raise PreconditionError(f"depth must be >= 1, got {depth}")
    _, R = bounding_ball(ifs)
    out = []
    for n in range(1, depth + 1):
        cover = level_cover(ifs, n, max_cells=max_cells)
        for i, j in coincident_pairs(cover.ratios, cover.translations, tol, tol * max(R, 1e-300)):
            out.append((cover.word(int(i)), cover.word(int(j))))
    return out

