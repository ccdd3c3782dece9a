"""Exact loop-erased-walk samplers that never touch an underlying simple
random walk: the recursive self-similar crossing sampler, the two-type
branching exit-time sampler, and the extendable infinite-gasket walk.

Randomness contract
-------------------
All draws flow from a RandomStream (counter-based Philox keyed by a seed
and a split path), through a block-buffered uniform source, consuming
exactly one uniform per event in a documented order:

  * crossing expansion: one uniform per internal node (shape selection),
    nodes expanded depth-first in path order, none for level-0 cells;
  * infinite walk: one uniform for the initial type, then one per
    level-up (joint type/shape selection), then expansion as above.

The compiled kernel (lerw._kernel) implements the same contract, so a
given seed yields bit-identical trajectories on either engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import measures
from .errors import CapacityError
from .gasket import Point, norm_sq
from .paths import (
    CrossingType,
    GAMMA0_PATHS,
    MAT_COMPOSE,
    Path,
    mat_apply,
)

try:
    from . import _kernel
except ImportError:  # pragma: no cover - build without the extension
    _kernel = None

HAVE_KERNEL = _kernel is not None and hasattr(_kernel, "run_walk")

UNIFORM_BLOCK = 8192


@dataclass(frozen=True)
class RandomStream:
    """Splittable, platform-stable random stream (Philox counter-based).

    Identical (seed, path) always produces the identical stream; split()
    derives independent children.
    """

    seed: int
    path: tuple[int, ...] = ()

    def split(self, index: int) -> "RandomStream":
        return RandomStream(self.seed, self.path + (int(index),))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(ss))


class UniformSource:
    """Block-buffered uniforms; the unit every sampler draw consumes."""

    __slots__ = ("gen", "buf", "i")

    def __init__(self, gen: np.random.Generator, block: int = UNIFORM_BLOCK):
        self.gen = gen
        self.buf = gen.random(block)
        self.i = 0

    def next(self) -> float:
        if self.i >= self.buf.shape[0]:
            self.buf = self.gen.random(self.buf.shape[0])
            self.i = 0
        x = self.buf[self.i]
        self.i += 1
        return x


def _as_source(rng) -> UniformSource:
    if isinstance(rng, UniformSource):
        return rng
    if isinstance(rng, RandomStream):
        return UniformSource(rng.generator())
    if isinstance(rng, np.random.Generator):
        return UniformSource(rng)
    raise TypeError(f"cannot use {type(rng)} as a random source")


#: Step templates of the four unit crossings (deltas from the entry).
GAMMA0_STEPS = {
    t: tuple(
        (q[0] - p[0], q[1] - p[1])
        for p, q in zip(GAMMA0_PATHS[t], GAMMA0_PATHS[t][1:])
    )
    for t in CrossingType
}


@dataclass(frozen=True)
class SamplerTables:
    """Catalog data flattened for the expansion engines (both engines
    share one instance; all arrays are immutable after construction)."""

    shape_cum: np.ndarray      # (4, max_shapes) cumulative probabilities
    n_shapes: np.ndarray       # (4,)
    shape_ncells: np.ndarray   # (4, max_shapes)
    shape_fc: np.ndarray       # (4, max_shapes) first-cell crossing type
    shape_s1: np.ndarray       # (4, max_shapes)
    shape_s2: np.ndarray       # (4, max_shapes)
    cell_mat: np.ndarray       # (4, max_shapes, 3)
    cell_eu: np.ndarray        # (4, max_shapes, 3) entry corner, unit coords
    cell_ev: np.ndarray
    cell_sub: np.ndarray       # (4, max_shapes, 3) sub-crossing type
    lev_count: np.ndarray      # (4,) number of eligible level-up pairs
    lev_cum: np.ndarray        # (4, max_pairs)
    lev_type: np.ndarray       # (4, max_pairs) new ambient type j
    lev_shape: np.ndarray      # (4, max_pairs) shape index within type j
    gamma0_du: np.ndarray      # (4, 2)
    gamma0_dv: np.ndarray
    gamma0_len: np.ndarray     # (4,)
    mats: np.ndarray           # (6, 4) row-major 2x2 entries
    compose: np.ndarray        # (6, 6)
    shape_probs: tuple         # exact Fractions, kept for the oracles
    alpha: tuple


@lru_cache(maxsize=None)
def default_tables() -> SamplerTables:
    catalogs = {t: measures.exact_shape_catalog(t) for t in CrossingType}
    alpha = measures.type_chain().alpha
    maxs = max(len(c) for c in catalogs.values())
    shape_cum = np.zeros((4, maxs))
    n_shapes = np.zeros(4, dtype=np.int64)
    ncells = np.zeros((4, maxs), dtype=np.int8)
    fc = np.zeros((4, maxs), dtype=np.int8)
    s1 = np.zeros((4, maxs), dtype=np.int8)
    s2 = np.zeros((4, maxs), dtype=np.int8)
    cmat = np.zeros((4, maxs, 3), dtype=np.int8)
    ceu = np.zeros((4, maxs, 3), dtype=np.int8)
    cev = np.zeros((4, maxs, 3), dtype=np.int8)
    csub = np.zeros((4, maxs, 3), dtype=np.int8)
    probs = {}
    for t, cat in catalogs.items():
        n_shapes[t] = len(cat)
        acc = Fraction(0)
        for si, (shape, p) in enumerate(cat):
            acc += p
            shape_cum[t, si] = float(acc)
            ncells[t, si] = len(shape.cells)
            fc[t, si] = int(shape.first_cell)
            s1[t, si] = shape.s1
            s2[t, si] = shape.s2
            for ci, cell in enumerate(shape.cells):
                cmat[t, si, ci] = cell.mat
                ceu[t, si, ci] = cell.entry[0]
                cev[t, si, ci] = cell.entry[1]
                csub[t, si, ci] = int(cell.sub_type)
        shape_cum[t, len(cat) - 1] = 1.0
        probs[t] = tuple(p for _, p in cat)

    # Level-up tables: from ambient type i, the joint law of the next
    # ambient type j and its level-1 shape, conditioned on the first cell
    # of the shape being an i-type crossing.
    pairs = {i: [] for i in CrossingType}
    for i in CrossingType:
        for j in CrossingType:
            for si, (shape, p) in enumerate(catalogs[j]):
                if shape.first_cell == i and p > 0:
                    pairs[i].append((alpha[j] * p / alpha[i], int(j), si))
    maxp = max(len(v) for v in pairs.values())
    lev_count = np.zeros(4, dtype=np.int64)
    lev_cum = np.zeros((4, maxp))
    lev_type = np.zeros((4, maxp), dtype=np.int8)
    lev_shape = np.zeros((4, maxp), dtype=np.int8)
    for i, plist in pairs.items():
        lev_count[i] = len(plist)
        acc = Fraction(0)
        for k, (pr, j, si) in enumerate(plist):
            acc += pr
            lev_cum[i, k] = float(acc)
            lev_type[i, k] = j
            lev_shape[i, k] = si
        if acc != 1:
            raise AssertionError(f"level-up law from type {i} sums to {acc}")
        lev_cum[i, len(plist) - 1] = 1.0

    g_du = np.zeros((4, 2), dtype=np.int8)
    g_dv = np.zeros((4, 2), dtype=np.int8)
    g_len = np.zeros(4, dtype=np.int8)
    for t, steps in GAMMA0_STEPS.items():
        g_len[t] = len(steps)
        for k, (du, dv) in enumerate(steps):
            g_du[t, k] = du
            g_dv[t, k] = dv

    from .paths import MATS

    mats = np.array(MATS, dtype=np.int8)
    compose = np.array(MAT_COMPOSE, dtype=np.int8)
    return SamplerTables(
        shape_cum, n_shapes, ncells, fc, s1, s2, cmat, ceu, cev, csub,
        lev_count, lev_cum, lev_type, lev_shape, g_du, g_dv, g_len,
        mats, compose, tuple(sorted(probs.items())), tuple(alpha),
    )


def _pick(cum_row, count: int, u: float) -> int:
    for k in range(count):
        if u <= cum_row[k]:
            return k
    return count - 1


def _expand_python(tables: SamplerTables, src: UniformSource, stack: list,
                   us: list, vs: list, limit: int | None) -> None:
    """Depth-first expansion of pending (level, type, mat, tx, ty) nodes,
    appending emitted vertices; stops once len(us) > limit."""
    t = tables
    while stack:
        if limit is not None and len(us) > limit:
            return
        level, ctype, mat, tx, ty = stack.pop()
        if level == 0:
            for k in range(t.gamma0_len[ctype]):
                du, dv = mat_apply(mat, (int(t.gamma0_du[ctype, k]), int(t.gamma0_dv[ctype, k])))
                tx += du
                ty += dv
                us.append(tx)
                vs.append(ty)
            continue
        si = _pick(t.shape_cum[ctype], t.n_shapes[ctype], src.next())
        half = 1 << (level - 1)
        for ci in range(int(t.shape_ncells[ctype, si]) - 1, -1, -1):
            cmat = int(t.compose[mat, t.cell_mat[ctype, si, ci]])
            eu, ev = mat_apply(mat, (int(t.cell_eu[ctype, si, ci]) * half,
                                     int(t.cell_ev[ctype, si, ci]) * half))
            stack.append((level - 1, int(t.cell_sub[ctype, si, ci]), cmat, tx + eu, ty + ev))


def _fresh_generator(rng) -> np.random.Generator:
    if isinstance(rng, RandomStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("the compiled engine needs a RandomStream or a fresh Generator")


def sample_crossing(level: int, ctype: CrossingType, rng, engine: str = "auto",
                    tables: SamplerTables | None = None) -> Path:
    """One crossing of the level-`level` triangle with exactly the
    loop-erased law of the given type."""
    if level < 0:
        raise ValueError("level must be >= 0")
    t = tables or default_tables()
    if _use_kernel(engine) and not isinstance(rng, UniformSource):
        u, v = _kernel.sample_crossing(_kernel_tables(t), _fresh_generator(rng), level, int(ctype))
        return Path(list(zip(u.tolist(), v.tolist())), validate=False)
    src = _as_source(rng)
    us, vs = [0], [0]
    stack = [(level, int(ctype), 0, 0, 0)]
    _expand_python(t, src, stack, us, vs, None)
    return Path(list(zip(us, vs)), validate=False)


def sample_exit_time(level: int, ctype: CrossingType, rng,
                     tables: SamplerTables | None = None) -> int:
    """The exit-time law s1 + 2*s2 via the two-type branching population,
    never materializing a path."""
    if level < 0:
        raise ValueError("level must be >= 0")
    t = tables or default_tables()
    gen = rng.generator() if isinstance(rng, RandomStream) else rng
    n1, n2 = (0, 1) if CrossingType(ctype).hits_both else (1, 0)
    p1 = np.diff(t.shape_cum[CrossingType.A, : t.n_shapes[CrossingType.A]], prepend=0.0)
    p2 = np.diff(t.shape_cum[CrossingType.BA, : t.n_shapes[CrossingType.BA]], prepend=0.0)
    s1a = t.shape_s1[CrossingType.A, : t.n_shapes[CrossingType.A]].astype(np.int64)
    s2a = t.shape_s2[CrossingType.A, : t.n_shapes[CrossingType.A]].astype(np.int64)
    s1b = t.shape_s1[CrossingType.BA, : t.n_shapes[CrossingType.BA]].astype(np.int64)
    s2b = t.shape_s2[CrossingType.BA, : t.n_shapes[CrossingType.BA]].astype(np.int64)
    for _ in range(level):
        n1_new = n2_new = 0
        if n1:
            c1 = gen.multinomial(n1, p1)
            n1_new += int((c1 * s1a).sum())
            n2_new += int((c1 * s2a).sum())
        if n2:
            c2 = gen.multinomial(n2, p2)
            n1_new += int((c2 * s1b).sum())
            n2_new += int((c2 * s2b).sum())
        n1, n2 = n1_new, n2_new
    return n1 + 2 * n2


def _use_kernel(engine: str) -> bool:
    if engine == "auto":
        return HAVE_KERNEL
    if engine == "compiled":
        if not HAVE_KERNEL:
            raise RuntimeError("compiled kernel not available")
        return True
    if engine == "python":
        return False
    raise ValueError(f"unknown engine {engine!r}")


_KERNEL_TABLES = {}


def _kernel_tables(t: SamplerTables):
    key = id(t)
    kt = _KERNEL_TABLES.get(key)
    if kt is None:
        alpha_cum = np.cumsum([float(a) for a in t.alpha])
        alpha_cum[-1] = 1.0
        kt = _kernel.Tables(
            t.shape_cum, t.n_shapes, t.shape_ncells, t.shape_fc,
            t.cell_mat, t.cell_eu, t.cell_ev, t.cell_sub,
            t.lev_count, t.lev_cum, t.lev_type, t.lev_shape,
            t.gamma0_du, t.gamma0_dv, t.gamma0_len, t.mats, t.compose,
            alpha_cum,
        )
        _KERNEL_TABLES[key] = kt
    return kt


@dataclass
class InfiniteWalkState:
    """The growing loop-erased walk on the infinite gasket.

    The expanded prefix always has the level-independent law of the
    extended walk; `level` and `ctype` describe the enclosing crossing
    currently being expanded, `stack` its pending cells.
    """

    stream: RandomStream
    source: UniformSource = None
    level: int = -1
    ctype: int = -1
    us: list = field(default_factory=lambda: [0])
    vs: list = field(default_factory=lambda: [0])
    stack: list = field(default_factory=list)
    type_history: list = field(default_factory=list)

    def __post_init__(self):
        if self.source is None:
            self.source = UniformSource(self.stream.generator())

    @property
    def steps(self) -> int:
        return len(self.us) - 1

    def position(self, n: int) -> Point:
        if n > self.steps:
            raise IndexError(f"step {n} beyond expanded prefix ({self.steps})")
        return (self.us[n], self.vs[n])


def new_walk(stream: RandomStream, engine: str = "auto",
             tables: SamplerTables | None = None):
    """A fresh infinite-walk state on the selected engine.  Both engines
    expose steps/position(n)/type_history and accept extend_walk."""
    t = tables or default_tables()
    if _use_kernel(engine):
        return _kernel.WalkState(_kernel_tables(t), stream.generator())
    return InfiniteWalkState(stream)


def extend_walk(state, target_steps: int,
                engine: str = "auto", tables: SamplerTables | None = None):
    """Grow the walk until its expanded prefix covers >= target_steps
    steps.  Level-up draws follow the stationary backward-type chain, so
    the law of any fixed prefix does not depend on how far the walk has
    been extended."""
    if not isinstance(state, InfiniteWalkState):
        state.extend(target_steps)
        return state
    t = tables or default_tables()
    src = state.source
    if state.level < 0:
        # Initial crossing type from the invariant vector.
        alpha_cum = np.cumsum([float(a) for a in t.alpha])
        u = src.next()
        ctype = int(np.searchsorted(alpha_cum, u, side="left").clip(0, 3))
        state.ctype = ctype
        state.level = 0
        state.type_history.append(ctype)
        for du, dv in GAMMA0_STEPS[CrossingType(ctype)]:
            state.us.append(state.us[-1] + du)
            state.vs.append(state.vs[-1] + dv)
    while state.steps < target_steps:
        if not state.stack:
            _level_up(state, t, src)
        _expand_python(t, src, state.stack, state.us, state.vs, target_steps)
    return state


def _level_up(state: InfiniteWalkState, t: SamplerTables, src: UniformSource) -> None:
    i = state.ctype
    k = _pick(t.lev_cum[i], int(t.lev_count[i]), src.next())
    j = int(t.lev_type[i, k])
    si = int(t.lev_shape[i, k])
    half = 1 << state.level
    # The first cell is the already-expanded crossing; queue the rest.
    for ci in range(int(t.shape_ncells[j, si]) - 1, 0, -1):
        stack_mat = int(t.cell_mat[j, si, ci])
        eu = int(t.cell_eu[j, si, ci]) * half
        ev = int(t.cell_ev[j, si, ci]) * half
        state.stack.append((state.level, int(t.cell_sub[j, si, ci]), stack_mat, eu, ev))
    state.ctype = j
    state.level += 1
    state.type_history.append(j)


def position_at(state, n: int) -> Point:
    return state.position(n)


def walk_positions(stream: RandomStream, n_steps: int, engine: str = "auto",
                   tables: SamplerTables | None = None) -> np.ndarray:
    """One-shot trajectory: array of shape (n_steps+1, 2) of positions of
    the infinite-gasket loop-erased walk."""
    t = tables or default_tables()
    if _use_kernel(engine):
        u, v = _kernel.run_walk(_kernel_tables(t), stream.generator(), n_steps)
        return np.stack([u, v], axis=1)
    state = InfiniteWalkState(stream)
    extend_walk(state, n_steps, engine="python", tables=t)
    out = np.empty((n_steps + 1, 2), dtype=np.int64)
    out[:, 0] = state.us[: n_steps + 1]
    out[:, 1] = state.vs[: n_steps + 1]
    return out


def iter_steps(stream: RandomStream, n_steps: int, chunk: int = 1 << 16,
               engine: str = "auto", tables: SamplerTables | None = None):
    """Stream (u, v) position chunks of a trajectory without holding more
    than one chunk of history beyond the walk state itself."""
    t = tables or default_tables()
    state = new_walk(stream, engine=engine, tables=t)
    done = 0
    while done < n_steps:
        upto = min(n_steps, done + chunk)
        extend_walk(state, upto, tables=t)
        if isinstance(state, InfiniteWalkState):
            block = np.array(
                [state.us[done: upto + 1], state.vs[done: upto + 1]], dtype=np.int64
            ).T
        else:
            block = state.positions(upto)[done:]
        yield block
        done = upto


def walk_norms(positions: np.ndarray) -> np.ndarray:
    """Euclidean |X(n)| for a positions array, exact quadratic form inside."""
    u = positions[:, 0].astype(np.float64)
    v = positions[:, 1].astype(np.float64)
    return np.sqrt(u * u + u * v + v * v)


def assert_loopless(positions: np.ndarray) -> None:
    """Guard: the trajectory never revisits a vertex.  The walk lives in
    the cone u, v >= 0, so the coordinate pair packs into one integer."""
    u = positions[:, 0].astype(np.int64)
    v = positions[:, 1].astype(np.int64)
    if u.min() < 0 or v.min() < 0:
        raise AssertionError("trajectory left the canonical cone")
    z = (u << 32) | v
    if np.unique(z).shape[0] != z.shape[0]:
        raise AssertionError("sampled trajectory contains a loop")
