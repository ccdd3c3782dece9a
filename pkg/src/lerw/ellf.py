"""The erasing-larger-loops-first operator.

Base step: chronological erasure on unit-scale crossings.  General step:
erase the top-scale loops through the coarse path, restore the original
fine segments under the surviving coarse steps, then recurse independently
inside each skeleton cell.  The recursion works on the decomposition tree,
never by rescanning the flat vertex array per scale.
"""

from __future__ import annotations

from . import gasket
from .paths import (
    CrossingType,
    Path,
    coarse_grain,
    crossing_type_of,
    decompose_triangles,
    hitting_times,
    recompose_triangles,
)


def crossing_scale(w: Path) -> int:
    """The level N such that w is a canonical crossing of the level-N
    triangle (ends on a corner at distance 2^N)."""
    end = w.vertices[-1]
    n2 = gasket.norm_sq(end)
    scale = (n2.bit_length() - 1) // 2
    if n2 != 1 << (2 * scale):
        raise ValueError(f"endpoint {end} is not at a power-of-two distance")
    crossing_type_of(w, scale)  # raises if not one of the four crossings
    return scale


def erase_chronological(w: Path) -> Path:
    """Lawler's chronological loop erasure."""
    return Path(_erase_indices(w.vertices)[0], validate=False)


def _erase_indices(vertices):
    """Chronological erasure returning (vertices, surviving step indices):
    surviving edge k of the result was step steps[k] of the input."""
    prefix = [vertices[0]]
    steps: list[int] = []
    where = {vertices[0]: 0}
    for t in range(1, len(vertices)):
        v = vertices[t]
        back = where.get(v)
        if back is not None:
            for dropped in prefix[back + 1:]:
                del where[dropped]
            del prefix[back + 1:]
            del steps[back:]
        else:
            prefix.append(v)
            steps.append(t)
            where[v] = len(prefix) - 1
    return prefix, steps


def erase_largest(w: Path, scale: int | None = None) -> tuple[Path, Path]:
    """Remove the largest-scale (2^(N-1)) loops from a level-N crossing.

    Returns (result, coarse) where coarse is the loopless coarse path on
    the 2^(N-1) lattice and the result carries the original fine segments
    under every surviving coarse step.
    """
    n = crossing_scale(w) if scale is None else scale
    if n < 1:
        raise ValueError("erase_largest needs a crossing of level >= 1")
    times = hitting_times(w, n - 1)
    scaled = Path(
        [(u >> (n - 1), v >> (n - 1)) for u, v in (w.vertices[t] for t in times)],
        validate=False,
    )
    erased, kept = _erase_indices(scaled.vertices)
    out = [w.vertices[0]]
    for k in kept:
        out.extend(w.vertices[times[k - 1] + 1: times[k] + 1])
    coarse = Path([(u << (n - 1), v << (n - 1)) for u, v in erased], validate=False)
    return Path(out, validate=False), coarse


def ellf(w: Path) -> Path:
    """Full erasing-larger-loops-first erasure of a crossing of any of the
    four ensembles; the result is loopless with the same endpoints."""
    n = crossing_scale(w)
    return _ellf_rec(w, n)


def _ellf_rec(w: Path, n: int) -> Path:
    if n == 0:
        return w
    if n == 1:
        return erase_chronological(w)
    w1, _ = erase_largest(w, n)
    skel, segments, transforms = decompose_triangles(w1, n - 1)
    parts = [tr.invert(_ellf_rec(seg, n - 1)) for seg, tr in zip(segments, transforms)]
    out = list(parts[0].vertices)
    for part in parts[1:]:
        assert part.vertices[0] == out[-1]
        out.extend(part.vertices[1:])
    return Path(out, validate=False)


def hatQ(w: Path, target_scale: int) -> Path:
    """The partially-erased coarse path on the 2^target_scale lattice:
    erase down through the 2^target_scale-scale loops, then coarse-grain
    (before restoring finer structure).  hatQ(w, N) = Q_N w and
    hatQ(w, 0) = ellf(w)."""
    n = crossing_scale(w)
    if not 0 <= target_scale <= n:
        raise ValueError("target scale out of range")
    return _hatq_rec(w, n, target_scale)


def _hatq_rec(w: Path, n: int, m: int) -> Path:
    if m == n:
        return coarse_grain(w, n)
    if m == 0:
        return _ellf_rec(w, n)
    w1, coarse = erase_largest(w, n)
    if m == n - 1:
        return coarse
    skel, segments, transforms = decompose_triangles(w1, n - 1)
    out = None
    for seg, tr in zip(segments, transforms):
        part = tr.invert(_hatq_rec(seg, n - 1, m))
        if out is None:
            out = list(part.vertices)
        else:
            assert part.vertices[0] == out[-1]
            out.extend(part.vertices[1:])
    return Path(out, validate=False)


def erased_to_scale(w: Path, target_scale: int) -> Path:
    """The intermediate path itself (fine structure restored) after all
    loops of scale >= 2^target_scale are gone; used by the stagewise
    diagnostics."""
    n = crossing_scale(w)
    if target_scale >= n:
        return w
    return _erase_stage_rec(w, n, target_scale)


def _erase_stage_rec(w: Path, n: int, m: int) -> Path:
    w1, _ = erase_largest(w, n)
    if n - 1 == m:
        return w1
    skel, segments, transforms = decompose_triangles(w1, n - 1)
    out = None
    for seg, tr in zip(segments, transforms):
        part = tr.invert(_erase_stage_rec(seg, n - 1, m))
        if out is None:
            out = list(part.vertices)
        else:
            out.extend(part.vertices[1:])
    return Path(out, validate=False)
