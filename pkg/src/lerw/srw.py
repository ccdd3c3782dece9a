"""Exact samplers for the conditioned simple random walks that feed the
loop-erasing pipeline.

Conditioning is realized as a Doob h-transform.  The hitting probability
h of a chosen outer corner of the two-triangle neighborhood of the start
vertex is computed exactly: the coarse value at the start is 1/4 by the
four-fold corner symmetry, and values propagate to triangle midpoints by
the harmonic refinement rule m_AB = (2 h(A) + 2 h(B) + h(C)) / 5, scale
by scale.  The b-visiting walks are sampled in two conditioned stages.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import gasket
from .errors import CapacityError
from .gasket import Point, corner_a, corner_b
from .paths import CrossingType, Path

#: Direct SRW pipelines above this level are refused (conditioned paths
#: grow like 5^N steps in expectation).
DEFAULT_MAX_LEVEL = 8
#: Exact-rational tables are built up to this level by default.
DEFAULT_EXACT_LEVEL = 6


@dataclass(frozen=True)
class ConditionedWalkSpec:
    level: int
    ctype: CrossingType


def bowtie_faces(start: Point, level: int):
    """The two 2^level faces meeting at `start`."""
    faces = gasket.faces_containing(start, level)
    if len(faces) != 2:
        raise ValueError(f"{start} is not a G_{level} vertex")
    return tuple(sorted(faces))


def bowtie_corners(start: Point, level: int) -> list[Point]:
    """The four outer corners of the two faces at `start`."""
    out = []
    for f in bowtie_faces(start, level):
        for c in f.corners():
            if c != start:
                out.append(c)
    return out


def reachable_region(level: int, start: Point = gasket.ORIGIN) -> tuple[frozenset, frozenset]:
    """(transient, absorbing) vertices for a walk from `start` stopped at
    its first G_level hit: the interiors plus corners of the two 2^level
    faces at `start`."""
    absorbing = frozenset(bowtie_corners(start, level))
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for p in frontier:
            for q in gasket.neighbors(p):
                if q in seen or q in absorbing:
                    continue
                seen.add(q)
                nxt.append(q)
        frontier = nxt
    return frozenset(seen), absorbing


def _harmonic_fill(corners, values, depth, out):
    """Refine corner values of one face down `depth` scales, recording
    every vertex value in `out`."""
    stack = [(corners, values, depth)]
    while stack:
        (A, B, C), (va, vb, vc), k = stack.pop()
        out[A] = va
        out[B] = vb
        out[C] = vc
        if k == 0:
            continue
        mab = ((A[0] + B[0]) // 2, (A[1] + B[1]) // 2)
        mbc = ((B[0] + C[0]) // 2, (B[1] + C[1]) // 2)
        mca = ((C[0] + A[0]) // 2, (C[1] + A[1]) // 2)
        vab = (2 * va + 2 * vb + vc) / 5
        vbc = (2 * vb + 2 * vc + va) / 5
        vca = (2 * vc + 2 * va + vb) / 5
        stack.append(((A, mab, mca), (va, vab, vca), k - 1))
        stack.append(((B, mbc, mab), (vb, vbc, vab), k - 1))
        stack.append(((C, mca, mbc), (vc, vca, vbc), k - 1))


def hitting_odds(start: Point, level: int, target: Point, exact: bool = True) -> dict[Point, Fraction]:
    """h(v) = P_v[first G_level hit (excluding `start`) is `target`] for
    every vertex of the two faces at `start`."""
    corners = bowtie_corners(start, level)
    if target not in corners:
        raise ValueError(f"{target} is not an outer corner of the region at {start}")
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    quarter = Fraction(1, 4) if exact else 0.25
    vals: dict[Point, Fraction] = {}
    for face in bowtie_faces(start, level):
        cs = face.corners()
        cv = tuple(
            quarter if c == start else (one if c == target else zero) for c in cs
        )
        _harmonic_fill(cs, cv, level, vals)
    return vals


@dataclass(frozen=True)
class StageChain:
    """One conditioned absorbing stage: transition rows over the transient
    vertices of a two-face region, absorbing at `target`."""

    start: Point
    target: Point
    level: int
    rows: dict  # vertex -> tuple of (neighbor, probability)

    def step_options(self, v: Point):
        return self.rows[v]

    def path_probability(self, vertices) -> Fraction:
        p = Fraction(1)
        for a, b in zip(vertices, vertices[1:]):
            q = dict(self.rows[a]).get(b)
            if q is None:
                return Fraction(0)
            p *= q
        return p


def _stage_chain(start: Point, level: int, target: Point, exact: bool) -> StageChain:
    h = hitting_odds(start, level, target, exact=exact)
    absorbing = set(bowtie_corners(start, level))
    rows = {}
    quarter = Fraction(1, 4) if exact else 0.25
    for v, hv in h.items():
        if v in absorbing:
            continue
        if hv == 0:
            continue  # unreachable under the conditioning
        opts = []
        for q in gasket.neighbors(v):
            hq = h.get(q)
            if hq is None or hq == 0:
                continue
            opts.append((q, quarter * hq / hv))
        total = sum(p for _, p in opts)
        if exact and total != 1:
            raise AssertionError(f"row at {v} sums to {total}")
        rows[v] = tuple(opts)
    return StageChain(start, target, level, rows)


STAGE_PLANS = {
    CrossingType.A: ("a",),
    CrossingType.B: ("b",),
    CrossingType.BA: ("b", "a"),
    CrossingType.AB: ("a", "b"),
}


@dataclass(frozen=True)
class TransitionTable:
    """The full conditioned walk: one or two h-transformed stages."""

    spec: ConditionedWalkSpec
    stages: tuple[StageChain, ...]
    exact: bool

    def path_probability(self, w: Path) -> Fraction:
        """Exact probability of a concrete path under the conditioned walk
        (stages split at the first visit of the intermediate target)."""
        if len(self.stages) == 1:
            return self.stages[0].path_probability(w.vertices)
        mid = self.stages[0].target
        cut = w.vertices.index(mid)
        return self.stages[0].path_probability(w.vertices[: cut + 1]) * self.stages[
            1
        ].path_probability(w.vertices[cut:])


@lru_cache(maxsize=None)
def exact_conditional_chain(
    level: int, ctype: CrossingType, exact_limit: int = DEFAULT_EXACT_LEVEL
) -> TransitionTable:
    """Per-vertex transition probabilities for the conditioned walk, as
    exact rationals up to `exact_limit` and floats above."""
    if level < 1:
        raise ValueError("level must be >= 1")
    if level > DEFAULT_MAX_LEVEL:
        raise CapacityError(
            f"direct SRW pipeline capped at level {DEFAULT_MAX_LEVEL}; use the recursive sampler"
        )
    exact = level <= exact_limit
    a, b = corner_a(level), corner_b(level)
    targets = {"a": a, "b": b}
    stages = []
    pos = gasket.ORIGIN
    for label in STAGE_PLANS[ctype]:
        tgt = targets[label]
        stages.append(_stage_chain(pos, level, tgt, exact))
        pos = tgt
    return TransitionTable(ConditionedWalkSpec(level, ctype), tuple(stages), exact)


@lru_cache(maxsize=None)
def _sampling_rows(level: int, ctype: CrossingType):
    """Float cumulative rows per stage for fast sampling."""
    table = exact_conditional_chain(level, ctype)
    out = []
    for st in table.stages:
        rows = {}
        for v, opts in st.rows.items():
            nbrs = tuple(q for q, _ in opts)
            cum = np.cumsum([float(p) for _, p in opts])
            cum[-1] = 1.0
            rows[v] = (nbrs, cum)
        out.append((rows, st.target))
    return tuple(out)


def sample_conditioned(spec: ConditionedWalkSpec, rng: np.random.Generator) -> Path:
    """One path with exactly the conditioned law: weight (1/4)^(len-1) for
    the one-stage types and (1/4)^(len-2) for the two-stage types."""
    stages = _sampling_rows(spec.level, spec.ctype)
    verts = [gasket.ORIGIN]
    pos = gasket.ORIGIN
    for rows, target in stages:
        while pos != target:
            nbrs, cum = rows[pos]
            pos = nbrs[int(np.searchsorted(cum, rng.random(), side="right"))]
            verts.append(pos)
    return Path(verts, validate=False)


def sample_unconditioned(level: int, rng: np.random.Generator) -> tuple[Path, CrossingType | None]:
    """Plain SRW from O stopped at its first G_level hit; used as a
    rejection oracle.  Returns the path and its type if it matches one of
    the four crossings (None when the walk would have to continue)."""
    a, b = corner_a(level), corner_b(level)
    absorbing = {a, b, gasket.mirror_y(a), gasket.mirror_y(b)}
    verts = [gasket.ORIGIN]
    pos = gasket.ORIGIN
    while pos not in absorbing:
        nbrs = sorted(gasket.neighbors(pos))
        pos = nbrs[int(rng.integers(0, 4))]
        verts.append(pos)
    first = pos
    if first == a:
        hit1 = CrossingType.A
    elif first == b:
        hit1 = CrossingType.B
    else:
        return Path(verts, validate=False), None
    return Path(verts, validate=False), hit1


def sample_rejection(spec: ConditionedWalkSpec, rng: np.random.Generator, max_tries: int = 1_000_000) -> Path:
    """Rejection sampling cross-check (keep levels <= 3)."""
    a, b = corner_a(spec.level), corner_b(spec.level)
    want_first = b if spec.ctype in (CrossingType.B, CrossingType.BA) else a
    second = {CrossingType.BA: a, CrossingType.AB: b}.get(spec.ctype)
    for _ in range(max_tries):
        w, hit1 = sample_unconditioned(spec.level, rng)
        if hit1 is None or w.vertices[-1] != want_first:
            continue
        if second is None:
            return w
        # Continue the walk: next new G_level hit must be the other corner.
        mid = w.vertices[-1]
        ring = set(bowtie_corners(mid, spec.level))
        verts = list(w.vertices)
        pos = mid
        while pos not in ring:
            nbrs = sorted(gasket.neighbors(pos))
            pos = nbrs[int(rng.integers(0, 4))]
            verts.append(pos)
        if pos == second:
            return Path(verts, validate=False)
    raise RuntimeError("rejection sampler exceeded max_tries")


def expected_length(level: int, ctype: CrossingType) -> Fraction:
    """Exact E[len] of the conditioned walk, from the absorbing-chain
    linear system (small levels only)."""
    if level > 3:
        raise CapacityError("exact expected length supported for level <= 3")
    table = exact_conditional_chain(level, ctype)
    total = Fraction(0)
    for st in table.stages:
        states = sorted(st.rows)
        idx = {v: i for i, v in enumerate(states)}
        n = len(states)
        # Solve (I - T) x = 1 by Gaussian elimination over Fractions.
        aug = [[Fraction(0)] * n + [Fraction(1)] for _ in range(n)]
        for v in states:
            i = idx[v]
            aug[i][i] += 1
            for q, p in st.rows[v]:
                if q in idx:
                    aug[i][idx[q]] -= p
        x = _solve_aug(aug)
        total += x[idx[st.start]]
    return total


def _solve_aug(aug):
    n = len(aug)
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [e * inv for e in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [aug[r][n] for r in range(n)]
