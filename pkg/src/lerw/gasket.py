"""Geometry of the infinite pre-Sierpinski gasket.

Vertices are integer pairs (u, v) in the triangular basis
e1 = (1, 0), e2 = (1/2, sqrt(3)/2); the Cartesian position of (u, v) is
u*e1 + v*e2, with one lattice unit equal to the edge length of the level-0
triangle.  The right half of the gasket fills the cone {u >= 0, v >= 0};
the left half is its mirror image across the y-axis, filling
{u + v <= 0, v >= 0}.  All membership and adjacency tests are exact
integer arithmetic; floats appear only in Cartesian conversion.
"""

from __future__ import annotations

import math
from typing import Iterator, NamedTuple

Point = tuple[int, int]

ORIGIN: Point = (0, 0)

#: The six lattice unit directions, counterclockwise from (1, 0).
UNIT_DIRECTIONS: tuple[Point, ...] = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))


def corner_a(scale: int) -> Point:
    """Top corner a_N = 2^N * (0, 1) of the level-N right triangle."""
    return (0, 1 << scale)


def corner_b(scale: int) -> Point:
    """Right corner b_N = 2^N * (1, 0) of the level-N right triangle."""
    return (1 << scale, 0)


def to_xy(p: Point) -> tuple[float, float]:
    u, v = p
    return (u + 0.5 * v, v * (math.sqrt(3) / 2))


def norm_sq(p: Point) -> int:
    """Squared Euclidean distance from the origin, exact in integers."""
    u, v = p
    return u * u + u * v + v * v


def dist_sq(p: Point, q: Point) -> int:
    return norm_sq((p[0] - q[0], p[1] - q[1]))


def mirror_y(p: Point) -> Point:
    """Reflection across the y-axis (maps the right half onto the left)."""
    u, v = p
    return (-u - v, v)


def _is_face_right(u: int, v: int, side: int) -> bool:
    # Descend the recursive construction of the right half-gasket.  The
    # candidate up-triangle has SW corner (u, v) and side length `side`;
    # at each scale it must fall entirely inside one of the three
    # sub-triangles, never straddling the central hole.
    if u < 0 or v < 0:
        return False
    span = side
    while span < u + v + side:
        span <<= 1
    while span > side:
        half = span >> 1
        if u >= half:
            u -= half
        elif v >= half:
            v -= half
        elif u + v + side > half:
            return False
        span = half
    return u == 0 and v == 0


def is_face(sw: Point, scale: int = 0) -> bool:
    """True iff the upward 2^scale-triangle with SW corner `sw` is a face
    of the infinite gasket."""
    u, v = sw
    side = 1 << scale
    if v < 0:
        return False
    if u >= 0:
        return _is_face_right(u, v, side)
    # Mirror the triangle into the right half: the image of the up-triangle
    # at sw has SW corner mirror_y(sw) - (side, 0).
    mu, mv = mirror_y(sw)
    return _is_face_right(mu - side, mv, side)


def is_vertex(p: Point) -> bool:
    """Membership in the vertex set of the infinite pre-gasket.

    A lattice point is a vertex iff it is a corner of some unit face; cost
    is O(bits of the coordinates), no enumeration.
    """
    u, v = p
    return (
        is_face((u, v))
        or is_face((u - 1, v))
        or is_face((u, v - 1))
    )


def neighbors(p: Point) -> set[Point]:
    """The vertices adjacent to p (always 4 on the infinite gasket)."""
    if not is_vertex(p):
        raise ValueError(f"{p} is not a gasket vertex")
    u, v = p
    out: set[Point] = set()
    if is_face((u, v)):
        out.add((u + 1, v))
        out.add((u, v + 1))
    if is_face((u - 1, v)):
        out.add((u - 1, v))
        out.add((u - 1, v + 1))
    if is_face((u, v - 1)):
        out.add((u, v - 1))
        out.add((u + 1, v - 1))
    return out


def adjacent(p: Point, q: Point) -> bool:
    """True iff (p, q) is an edge of the gasket.

    Each unit-distance pair belongs to exactly one upward unit triangle;
    the pair is an edge iff that triangle is a face.
    """
    du, dv = q[0] - p[0], q[1] - p[1]
    if (du, dv) == (1, 0) or (du, dv) == (0, 1):
        return is_face(p)
    if (du, dv) == (-1, 0):
        return is_face(q)
    if (du, dv) == (0, -1):
        return is_face(q)
    if (du, dv) == (-1, 1):
        return is_face((p[0] - 1, p[1]))
    if (du, dv) == (1, -1):
        return is_face((p[0], p[1] - 1))
    return False


def in_coarse_lattice(p: Point, scale: int) -> bool:
    """Membership in G_scale = 2^scale * G_0."""
    u, v = p
    mask = (1 << scale) - 1
    if (u & mask) or (v & mask):
        return False
    return is_vertex((u >> scale, v >> scale))


def vertex_level(p: Point) -> int | float:
    """Largest N with p in G_N; the origin gets math.inf."""
    if not is_vertex(p):
        raise ValueError(f"{p} is not a gasket vertex")
    if p == ORIGIN:
        return math.inf
    u, v = p
    level = 0
    while (u & 1) == 0 and (v & 1) == 0 and is_vertex((u >> 1, v >> 1)):
        u >>= 1
        v >>= 1
        level += 1
    return level


class TriangleAddress(NamedTuple):
    """An upward 2^scale gasket face, addressed by its SW corner."""

    corner: Point
    scale: int

    @property
    def side(self) -> str:
        """Half-plane flag: 'right' or 'left' of the y-axis."""
        return "right" if self.corner[0] >= 0 else "left"

    def corners(self) -> tuple[Point, Point, Point]:
        """(SW, SE, top) corners."""
        u, v = self.corner
        s = 1 << self.scale
        return ((u, v), (u + s, v), (u, v + s))

    def contains(self, p: Point) -> bool:
        u, v = p[0] - self.corner[0], p[1] - self.corner[1]
        return u >= 0 and v >= 0 and u + v <= (1 << self.scale)


def _faces_right(u: int, v: int, scale: int) -> Iterator[Point]:
    # All scale-2^scale faces of the right half whose closed triangle
    # contains the point; a point on a sub-triangle boundary may recurse
    # into two branches.
    side = 1 << scale
    if u < 0 or v < 0:
        return
    # Grow the top triangle until every face containing the point fits
    # strictly inside it.
    span = side
    while span < u + v + side:
        span <<= 1
    stack = [(u, v, span, 0, 0)]
    while stack:
        pu, pv, sp, ou, ov = stack.pop()
        if pu < 0 or pv < 0 or pu + pv > sp:
            continue
        if sp == side:
            yield (ou, ov)
            continue
        half = sp >> 1
        if pu + pv <= half:
            stack.append((pu, pv, half, ou, ov))
        if pu >= half:
            stack.append((pu - half, pv, half, ou + half, ov))
        if pv >= half:
            stack.append((pu, pv - half, half, ou, ov + half))


def faces_containing(p: Point, scale: int) -> set[TriangleAddress]:
    """All 2^scale faces whose closed triangle contains the vertex p
    (one for an interior point, two for a G_scale vertex)."""
    u, v = p
    out: set[TriangleAddress] = set()
    if u >= 0 and v >= 0:
        for sw in _faces_right(u, v, scale):
            out.add(TriangleAddress(sw, scale))
    if u + v <= 0 and v >= 0:
        mu, mv = mirror_y(p)
        side = 1 << scale
        for sw in _faces_right(mu, mv, scale):
            # Mirror the right-half face back: its left image has SW corner
            # mirror_y(sw) - (side, 0).
            iw = mirror_y(sw)
            out.add(TriangleAddress((iw[0] - side, iw[1]), scale))
    return out


def containing_triangle(x: Point, y: Point, scale: int) -> TriangleAddress:
    """The unique upward 2^scale face containing both x and y."""
    common = faces_containing(x, scale) & faces_containing(y, scale)
    if not common:
        raise ValueError(f"no common {1 << scale}-triangle contains {x} and {y}")
    if len(common) > 1:
        raise ValueError(f"ambiguous containing triangle for {x}, {y} at scale {scale}")
    return next(iter(common))
