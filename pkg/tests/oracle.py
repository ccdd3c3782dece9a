"""Brute-force construction oracles, independent of the library's
bit-recursive predicates.

The right half-gasket is built literally from the recursion
F'_{N+1} = F'_N  u  (F'_N + a_N)  u  (F'_N + b_N) as explicit edge sets;
the left half is its mirror image.
"""

from __future__ import annotations


def build_right_edges(levels: int) -> set[frozenset]:
    edges = {
        frozenset({(0, 0), (1, 0)}),
        frozenset({(0, 0), (0, 1)}),
        frozenset({(1, 0), (0, 1)}),
    }
    for n in range(levels):
        a = (0, 1 << n)
        b = (1 << n, 0)
        shifted = set()
        for e in edges:
            p, q = tuple(e)
            shifted.add(frozenset({(p[0] + a[0], p[1] + a[1]), (q[0] + a[0], q[1] + a[1])}))
            shifted.add(frozenset({(p[0] + b[0], p[1] + b[1]), (q[0] + b[0], q[1] + b[1])}))
        edges |= shifted
    return edges


def mirror(p):
    return (-p[0] - p[1], p[1])


def build_edges(levels: int) -> set[frozenset]:
    """Edge set of F'_levels together with its reflection across the y-axis."""
    edges = build_right_edges(levels)
    out = set(edges)
    for e in edges:
        p, q = tuple(e)
        out.add(frozenset({mirror(p), mirror(q)}))
    return out


def build_vertices(levels: int) -> set:
    return {p for e in build_edges(levels) for p in e}


def adjacency(levels: int) -> dict:
    adj: dict = {}
    for e in build_edges(levels):
        p, q = tuple(e)
        adj.setdefault(p, set()).add(q)
        adj.setdefault(q, set()).add(p)
    return adj
