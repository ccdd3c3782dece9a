"""Path machinery: hitting times, coarse-graining, skeletons, the
step-based and triangle-based decompositions, and loop detection.

Similarity maps between gasket cells are explicit invertible transforms:
an orientation-class-preserving lattice isometry (one of the six point
maps fixing the upward-triangle sublattice, plus a translation),
optionally composed with the corner-swap graph automorphism of the
two-triangle neighborhood at the origin.  Storing the transform with each
segment makes decompose/recompose exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Sequence

from . import gasket
from .gasket import Point, TriangleAddress, corner_a, corner_b

# The six point maps preserving upward triangles: identity, rotations by
# 120 and 240 degrees, and the three upward-preserving reflections, as
# row-major integer 2x2 matrices acting on (u, v).
MAT_ID = 0
MAT_R120 = 1
MAT_R240 = 2
MAT_MY = 3      # mirror across the y-axis
MAT_SWAP = 4    # mirror swapping the a- and b-directions: (u, v) -> (v, u)
MAT_M3 = 5      # the remaining upward-preserving mirror

MATS: tuple[tuple[int, int, int, int], ...] = (
    (1, 0, 0, 1),
    (-1, -1, 1, 0),
    (0, 1, -1, -1),
    (-1, -1, 0, 1),
    (0, 1, 1, 0),
    (1, 0, -1, -1),
)


def mat_apply(m: int, p: Point) -> Point:
    a, b, c, d = MATS[m]
    return (a * p[0] + b * p[1], c * p[0] + d * p[1])


def _mat_mul(m1: int, m2: int) -> int:
    composed = tuple(
        mat_apply(m1, mat_apply(m2, e)) for e in ((1, 0), (0, 1))
    )
    target = (composed[0][0], composed[1][0], composed[0][1], composed[1][1])
    return MATS.index(target)


MAT_COMPOSE = tuple(tuple(_mat_mul(i, j) for j in range(6)) for i in range(6))
MAT_INVERSE = tuple(next(j for j in range(6) if MAT_COMPOSE[i][j] == MAT_ID) for i in range(6))


def mat_for_direction(d: Point, target: Point) -> int:
    """The unique upward-preserving point map sending direction d to target."""
    for m in range(6):
        if mat_apply(m, d) == target:
            return m
    raise ValueError(f"no lattice rotation/reflection maps {d} to {target}")


def flip_ab(p: Point) -> Point:
    """The corner-swap graph automorphism of the pair of triangles at O.

    On the right triangle it is the a<->b mirror (u, v) -> (v, u); on the
    left triangle the corresponding in-place mirror (u, v) -> (u, -u-v).
    It fixes O, swaps a_N with b_N, and preserves gasket edges within the
    two-triangle neighborhood of O.
    """
    u, v = p
    if u >= 0 and v >= 0:
        return (v, u)
    if u + v <= 0 and v >= 0:
        return (u, -u - v)
    raise ValueError(f"{p} outside the two-triangle neighborhood of O")


@dataclass(frozen=True)
class Transform:
    """Exact invertible identification of a crossing segment with its
    canonical position (entry at O, exit at a, third corner at b).

    The base is a rigid corner map q = M * (p - anchor).  A segment may
    excurse out of its cell through the entry corner or (for a three-corner
    passage) through the middle corner; the base map can park either
    excursion face outside the gasket, in which case it is rotated in
    place around the corner it hangs on (a graph automorphism of the
    two-face neighborhood, so the image is again a gasket path).  The two
    fix flags make the piecewise map invertible.
    """

    mat: int
    anchor: Point
    scale: int
    fix_entry: bool = False
    fix_middle: bool = False

    def apply_point(self, p: Point) -> Point:
        u, v = mat_apply(self.mat, (p[0] - self.anchor[0], p[1] - self.anchor[1]))
        if v >= 0:
            if u >= 0 or u + v <= 0:
                return (u, v)
            raise ValueError(f"segment point maps into the gap: {(u, v)}")
        s = 1 << self.scale
        if u >= 0 and u + v <= 0:
            if not self.fix_entry:
                raise ValueError("entry-side excursion without fix_entry")
            return mat_apply(MAT_R240, (u, v))
        if u >= s and u + v <= s:
            if not self.fix_middle:
                raise ValueError("middle-side excursion without fix_middle")
            ru, rv = mat_apply(MAT_R120, (u - s, v))
            return (ru + s, rv)
        raise ValueError(f"segment point maps outside the crossing support: {(u, v)}")

    def invert_point(self, q: Point) -> Point:
        u, v = q
        s = 1 << self.scale
        # O and b are fixed points of their rotations, so boundary inclusion
        # is harmless; the flags resolve the only genuine overlaps.
        if self.fix_entry and u + v <= 0 and v >= 0:
            u, v = mat_apply(MAT_R120, (u, v))
        elif self.fix_middle and u >= s and v >= 0 and u + v <= 2 * s:
            ru, rv = mat_apply(MAT_R240, (u - s, v))
            u, v = ru + s, rv
        r = mat_apply(MAT_INVERSE[self.mat], (u, v))
        return (r[0] + self.anchor[0], r[1] + self.anchor[1])

    def apply(self, path: "Path") -> "Path":
        return Path([self.apply_point(p) for p in path.vertices], validate=False)

    def invert(self, path: "Path") -> "Path":
        return Path([self.invert_point(p) for p in path.vertices], validate=False)


class CellType(IntEnum):
    TYPE1 = 1
    TYPE2 = 2


class CrossingType(IntEnum):
    """The four unit crossing behaviors, indexing the measure families:
    A = O->a, B = O->b, BA = O->b->a, AB = O->a->b."""

    A = 0
    B = 1
    BA = 2
    AB = 3

    @property
    def hits_both(self) -> bool:
        return self in (CrossingType.BA, CrossingType.AB)

    @property
    def mirrored(self) -> "CrossingType":
        return CrossingType((CrossingType.B, CrossingType.A, CrossingType.AB, CrossingType.BA)[self])


#: Vertex sequences of the four unit crossings in canonical coordinates.
GAMMA0_PATHS: dict[CrossingType, tuple[Point, ...]] = {
    CrossingType.A: ((0, 0), (0, 1)),
    CrossingType.B: ((0, 0), (1, 0)),
    CrossingType.BA: ((0, 0), (1, 0), (0, 1)),
    CrossingType.AB: ((0, 0), (0, 1), (1, 0)),
}


class Path:
    """An adjacency-respecting vertex sequence on the gasket."""

    __slots__ = ("vertices", "_cache")

    def __init__(self, vertices: Iterable[Point], validate: bool = True):
        vs = tuple((int(u), int(v)) for u, v in vertices)
        if not vs:
            raise ValueError("empty path")
        if validate:
            for p, q in zip(vs, vs[1:]):
                if not gasket.adjacent(p, q):
                    raise ValueError(f"non-adjacent step {p} -> {q}")
        self.vertices = vs
        self._cache: dict = {}

    def __len__(self) -> int:
        return len(self.vertices)

    def __getitem__(self, i):
        return self.vertices[i]

    def __iter__(self):
        return iter(self.vertices)

    def __eq__(self, other) -> bool:
        return isinstance(other, Path) and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash(self.vertices)

    def __repr__(self) -> str:
        if len(self.vertices) > 8:
            head = ", ".join(map(str, self.vertices[:4]))
            return f"Path([{head}, ... {len(self.vertices)} vertices])"
        return f"Path({list(self.vertices)})"

    @property
    def length(self) -> int:
        """Number of steps."""
        return len(self.vertices) - 1

    def scaled(self, shift: int) -> "Path":
        """Coordinates multiplied by 2^shift (shift may be negative)."""
        if shift >= 0:
            return Path([(u << shift, v << shift) for u, v in self.vertices], validate=False)
        k = -shift
        out = []
        for u, v in self.vertices:
            if (u % (1 << k)) or (v % (1 << k)):
                raise ValueError("coordinates not divisible in downscaling")
            out.append((u >> k, v >> k))
        return Path(out, validate=False)

    def is_loopless(self) -> bool:
        return len(set(self.vertices)) == len(self.vertices)


def hitting_times(w: Path, scale: int) -> list[int]:
    """Times T_i at which w hits G_scale vertices, counting a vertex hit
    repeatedly in a row only once.  T_0 = 0."""
    key = ("hits", scale)
    cached = w._cache.get(key)
    if cached is not None:
        return cached
    times = [0]
    last = w.vertices[0]
    for j in range(1, len(w.vertices)):
        p = w.vertices[j]
        if p != last and gasket.in_coarse_lattice(p, scale):
            times.append(j)
            last = p
    w._cache[key] = times
    return times


def coarse_grain(w: Path, scale: int) -> Path:
    """The coarse path (Q_scale w)(i) = w(T_i)."""
    return Path([w.vertices[t] for t in hitting_times(w, scale)], validate=False)


@dataclass(frozen=True)
class SkeletonCell:
    triangle: TriangleAddress
    cell_type: CellType | None
    entry: Point
    exit: Point
    middle: Point | None  # the intermediate corner hit, for TYPE2 cells


@dataclass(frozen=True)
class Skeleton:
    scale: int
    cells: tuple[SkeletonCell, ...]
    exit_times: tuple[int, ...]  # T^ex_0 = 0, then one exit time per cell

    def type_counts(self) -> tuple[int, int]:
        s1 = sum(1 for c in self.cells if c.cell_type == CellType.TYPE1)
        s2 = sum(1 for c in self.cells if c.cell_type == CellType.TYPE2)
        return s1, s2


def skeleton(w: Path, scale: int) -> Skeleton:
    """The 2^scale-skeleton: the cells w passes through with exit times.

    Cells are Type 1 or Type 2 according to whether the exit comes one or
    two G_scale hits after the entry; anything else (possible only when the
    coarse path has loops at this scale) gets cell_type None.
    """
    key = ("skel", scale)
    cached = w._cache.get(key)
    if cached is not None:
        return cached
    times = hitting_times(w, scale)
    m = len(times) - 1
    if m < 1:
        raise ValueError("path never leaves its starting coarse vertex")
    cells = []
    exit_times = [0]
    tri = gasket.containing_triangle(w.vertices[times[0]], w.vertices[times[1]], scale)
    entry_idx = 0
    while True:
        # Advance to the hit whose successor leaves the current triangle.
        nxt = entry_idx
        while nxt < m and tri.contains(w.vertices[times[nxt + 1]]):
            nxt += 1
        hops = nxt - entry_idx
        ctype = CellType(hops) if hops in (1, 2) else None
        entry_v = w.vertices[times[entry_idx]]
        exit_v = w.vertices[times[nxt]]
        middle = w.vertices[times[entry_idx + 1]] if hops == 2 else None
        cells.append(SkeletonCell(tri, ctype, entry_v, exit_v, middle))
        exit_times.append(times[nxt])
        if nxt == m:
            break
        tri = gasket.containing_triangle(w.vertices[times[nxt]], w.vertices[times[nxt + 1]], scale)
        entry_idx = nxt
    skel = Skeleton(scale, tuple(cells), tuple(exit_times))
    w._cache[key] = skel
    return skel


def _segment_to_canonical(seg: Path, scale: int, exit_point: Point) -> Transform:
    """The stored transform sending a step- or cell-segment to canonical
    position (entry -> O, exit -> a_scale, middle corner of a three-corner
    passage -> b_scale).  Excursion-fix flags are read off from where the
    base corner map parks the out-of-cell excursions."""
    entry = seg.vertices[0]
    d = (exit_point[0] - entry[0], exit_point[1] - entry[1])
    mat = mat_for_direction(d, corner_a(scale))
    s = 1 << scale
    fix_entry = fix_middle = False
    for p in seg.vertices:
        u, v = mat_apply(mat, (p[0] - entry[0], p[1] - entry[1]))
        if v >= 0:
            if u < 0 < u + v:
                raise AssertionError(f"segment point {p} maps into the gap")
            continue
        if u >= 0 and u + v <= 0:
            fix_entry = True
        elif u >= s and u + v <= s:
            fix_middle = True
        else:
            raise AssertionError(f"segment point {p} maps outside the crossing support")
    return Transform(mat, entry, scale, fix_entry, fix_middle)


def decompose_steps(w: Path, scale: int) -> tuple[Path, list[Path], list[Transform]]:
    """Step-based decomposition at 2^scale: the coarse path plus one
    canonical crossing segment per coarse step, with the transforms that
    restore them."""
    times = hitting_times(w, scale)
    coarse = Path([w.vertices[t] for t in times], validate=False)
    segments = []
    transforms = []
    for i in range(1, len(times)):
        raw = Path(w.vertices[times[i - 1]: times[i] + 1], validate=False)
        tr = _segment_to_canonical(raw, scale, w.vertices[times[i]])
        segments.append(tr.apply(raw))
        transforms.append(tr)
    return coarse, segments, transforms


def recompose_steps(coarse: Path, segments: Sequence[Path], transforms: Sequence[Transform]) -> Path:
    out = [coarse.vertices[0]]
    for seg, tr in zip(segments, transforms):
        restored = tr.invert(seg)
        if restored.vertices[0] != out[-1]:
            raise ValueError("segment does not continue the path")
        out.extend(restored.vertices[1:])
    return Path(out, validate=False)


def decompose_triangles(w: Path, scale: int) -> tuple[Skeleton, list[Path], list[Transform]]:
    """Triangle-based decomposition at 2^scale: per-cell segments between
    consecutive exit times, each mapped to a canonical level-`scale`
    crossing (entry -> O, exit -> a; a Type 2 cell's intermediate corner
    lands on b).  Requires the coarse path to be loopless."""
    skel = skeleton(w, scale)
    if any(c.cell_type is None for c in skel.cells):
        raise ValueError("coarse path not loopless")
    segments = []
    transforms = []
    for cell, t0, t1 in zip(skel.cells, skel.exit_times, skel.exit_times[1:]):
        raw = Path(w.vertices[t0: t1 + 1], validate=False)
        tr = _segment_to_canonical(raw, scale, cell.exit)
        img = tr.apply(raw)
        if cell.cell_type == CellType.TYPE2 and tr.apply_point(cell.middle) != corner_b(scale):
            raise AssertionError("type-2 middle corner not mapped to b")
        segments.append(img)
        transforms.append(tr)
    return skel, segments, transforms


def recompose_triangles(skel: Skeleton, segments: Sequence[Path], transforms: Sequence[Transform]) -> Path:
    out = None
    for seg, tr in zip(segments, transforms):
        restored = tr.invert(seg)
        if out is None:
            out = list(restored.vertices)
        else:
            if restored.vertices[0] != out[-1]:
                raise ValueError("segment does not continue the path")
            out.extend(restored.vertices[1:])
    return Path(out, validate=False)


@dataclass(frozen=True)
class Loop:
    vertex: Point
    start: int
    end: int
    diameter_sq: int

    @property
    def diameter(self) -> float:
        return math.sqrt(self.diameter_sq)

    @property
    def scale(self) -> int:
        """Dyadic scale: largest M with the formation vertex in G_M and
        diameter >= 2^M (the two constraints are combined by a min, so a
        small loop at a high-level vertex is classified at the scale it is
        actually erased)."""
        lvl = gasket.vertex_level(self.vertex)
        dlim = 0
        while self.diameter_sq >= (1 << (2 * (dlim + 1))):
            dlim += 1
        return int(min(lvl, dlim))


def find_loops(w: Path) -> list[Loop]:
    """All maximal loops: pairs i < j with w(i) = w(j) = c and no
    intermediate visit of c."""
    last_seen: dict[Point, int] = {}
    loops = []
    for j, p in enumerate(w.vertices):
        i = last_seen.get(p)
        if i is not None:
            seg = w.vertices[i: j + 1]
            d2 = max(
                gasket.dist_sq(seg[k1], seg[k2])
                for k1 in range(len(seg))
                for k2 in range(k1 + 1, len(seg))
            )
            loops.append(Loop(p, i, j, d2))
        last_seen[p] = j
    return loops


def has_loop(w: Path) -> bool:
    return not w.is_loopless()


def max_loop_diameter_sq(w: Path) -> int:
    """0 for loopless paths; cheaper than find_loops for guards."""
    loops = find_loops(w)
    return max((l.diameter_sq for l in loops), default=0)


def crossing_type_of(w: Path, scale: int) -> CrossingType:
    """Classify a canonical crossing of the level-`scale` triangle."""
    times = hitting_times(w, scale)
    hits = [w.vertices[t] for t in times[1:]]
    a, b = corner_a(scale), corner_b(scale)
    if hits == [a]:
        return CrossingType.A
    if hits == [b]:
        return CrossingType.B
    if hits == [b, a]:
        return CrossingType.BA
    if hits == [a, b]:
        return CrossingType.AB
    raise ValueError(f"not a canonical crossing at scale {scale}: hits {hits}")
