import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lerw import gasket
from oracle import build_vertices, adjacency, build_right_edges

# Frozen from the construction oracle (F'_2 plus reflection).
NEIGHBORS_O = {(1, 0), (0, 1), (-1, 0), (-1, 1)}
NEIGHBORS_A0 = {(0, 0), (1, 0), (1, 1), (0, 2)}


def test_is_vertex_examples():
    assert gasket.is_vertex((0, 0))
    assert gasket.is_vertex((0, 1))
    # Cartesian (4, sqrt 3): interior of the side-4 hole of F'_3.
    assert not gasket.is_vertex((3, 2))


def test_is_vertex_matches_construction_exhaustively():
    levels = 6
    truth = build_vertices(levels)
    side = 1 << levels
    # Bounding rhombus of F'_N and its mirror; only points well inside the
    # union F'_N u F'^R_N are decidable from the finite construction, which
    # is exactly the cone pair the infinite membership test models.
    for u in range(-2 * side, side + 1):
        for v in range(0, side + 1):
            if u + v > side or u < -side:
                continue
            assert gasket.is_vertex((u, v)) == ((u, v) in truth), (u, v)


def test_is_vertex_reflection_symmetry():
    for u in range(0, 64):
        for v in range(0, 64 - u):
            assert gasket.is_vertex((u, v)) == gasket.is_vertex(gasket.mirror_y((u, v)))


def test_neighbors_examples():
    assert gasket.neighbors((0, 0)) == NEIGHBORS_O
    assert gasket.neighbors((0, 1)) == NEIGHBORS_A0
    assert (0, 0) in gasket.neighbors((0, 1)) and (1, 0) in gasket.neighbors((0, 1))
    with pytest.raises(ValueError):
        gasket.neighbors((3, 2))


def test_neighbors_match_oracle():
    adj = adjacency(3)
    interior = [p for p in adj if len(adj[p]) == 4]
    assert interior, "oracle produced no degree-4 vertices"
    for p in interior:
        assert gasket.neighbors(p) == adj[p], p


def test_neighbors_symmetric_and_degree_four():
    for p in sorted(build_vertices(3)):
        nbrs = gasket.neighbors(p)
        assert len(nbrs) == 4
        for q in nbrs:
            assert p in gasket.neighbors(q)
            assert gasket.adjacent(p, q) and gasket.adjacent(q, p)


def test_vertex_level():
    assert gasket.vertex_level((1, 0)) == 0
    assert gasket.vertex_level((2, 0)) == 1
    assert gasket.vertex_level((0, 0)) == math.inf
    assert gasket.vertex_level((2, 2)) == 1
    for p in sorted(build_vertices(4)):
        if p == (0, 0):
            continue
        lvl = gasket.vertex_level(p)
        doubled = (2 * p[0], 2 * p[1])
        assert gasket.vertex_level(doubled) == lvl + 1


def test_coarse_lattice_membership():
    assert gasket.in_coarse_lattice((2, 0), 1)
    assert gasket.in_coarse_lattice((0, 4), 2)
    assert not gasket.in_coarse_lattice((1, 0), 1)
    assert not gasket.in_coarse_lattice((2, 0), 2)


def test_containing_triangle_examples():
    t = gasket.containing_triangle((0, 0), (0, 1), 0)
    assert t == gasket.TriangleAddress((0, 0), 0)
    assert t.side == "right"
    t = gasket.containing_triangle((0, 2), (2, 0), 1)
    assert t == gasket.TriangleAddress((0, 0), 1)
    # Left-side unit triangle at O, frozen from the mirrored construction.
    t = gasket.containing_triangle((0, 0), (-1, 0), 0)
    assert t == gasket.TriangleAddress((-1, 0), 0)
    assert t.side == "left"
    with pytest.raises(ValueError):
        gasket.containing_triangle((0, 1), (3, 0), 0)


def test_faces_containing_counts():
    # A G_M vertex lies in exactly two 2^M faces, an interior vertex in one.
    assert len(gasket.faces_containing((0, 0), 1)) == 2
    assert len(gasket.faces_containing((1, 0), 1)) == 1
    assert len(gasket.faces_containing((2, 0), 1)) == 2


def test_face_set_matches_oracle_unit_faces():
    # Unit faces of the right construction = SW corners whose up-triangle
    # edges are all present.
    edges = build_right_edges(4)
    side = 1 << 4
    for u in range(0, side):
        for v in range(0, side - u):
            expect = (
                frozenset({(u, v), (u + 1, v)}) in edges
                and frozenset({(u, v), (u, v + 1)}) in edges
                and frozenset({(u + 1, v), (u, v + 1)}) in edges
            )
            assert gasket.is_face((u, v)) == expect, (u, v)


@given(st.integers(-256, 256), st.integers(-256, 256))
@settings(max_examples=300, deadline=None)
def test_norm_sq_matches_cartesian(u, v):
    x, y = gasket.to_xy((u, v))
    assert gasket.norm_sq((u, v)) == pytest.approx(x * x + y * y, abs=1e-6)


@given(st.integers(0, 1 << 20), st.integers(0, 1 << 20))
@settings(max_examples=200, deadline=None)
def test_large_scale_mirror_consistency(u, v):
    p = (u, v)
    assert gasket.is_vertex(p) == gasket.is_vertex(gasket.mirror_y(p))
