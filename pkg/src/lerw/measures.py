"""Exact rational renormalization data.

Everything here is computed from first principles in exact arithmetic:
the crossing-shape catalogs (absorption distribution of the chronological
loop-erasure chain over conditioned-walk prefixes), the bivariate
generating functions of the cell-type counts, their mean matrix and
Perron eigenvalue, the four-state type chain with its invariant vector,
and the Kolmogorov-consistency identity of the level mixture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import gasket, srw
from .errors import CapacityError, IntegrityError
from .gasket import Point, corner_a, corner_b
from .paths import (
    CellType,
    CrossingType,
    GAMMA0_PATHS,
    MATS,
    Path,
    mat_apply,
    skeleton,
)

Rational = Fraction

#: Cap on exact polynomial composition (degree grows like 3^N).
PHI_EXACT_CAP = 6

#: Cap on exhaustive crossing enumeration.
ENUMERATE_CAP = 2


class ShapeCell(NamedTuple):
    entry: Point
    exit: Point
    third: Point
    cell_type: CellType
    sub_type: CrossingType  # canonical refinement type: A or BA
    mat: int  # point map sending the canonical triangle onto the cell


@dataclass(frozen=True)
class Shape:
    """A loopless level-1 crossing pattern: the engine of the recursive
    sampler.  Vertices are unit coordinates in the level-1 triangle."""

    ctype: CrossingType
    vertices: tuple[Point, ...]
    cells: tuple[ShapeCell, ...]
    s1: int
    s2: int
    first_cell: CrossingType

    @property
    def length(self) -> int:
        return len(self.vertices) - 1


def _cell_frame(entry: Point, exit_: Point, third: Point) -> int:
    """The unique point map with mat*(0,1) = exit-entry, mat*(1,0) = third-entry."""
    col_a = (exit_[0] - entry[0], exit_[1] - entry[1])
    col_b = (third[0] - entry[0], third[1] - entry[1])
    for m in range(6):
        if mat_apply(m, (0, 1)) == col_a and mat_apply(m, (1, 0)) == col_b:
            return m
    raise AssertionError(f"no lattice map for cell frame {entry}, {exit_}, {third}")


def _make_shape(ctype: CrossingType, vertices: tuple[Point, ...]) -> Shape:
    path = Path(vertices)
    skel = skeleton(path, 0)
    cells = []
    for c in skel.cells:
        third = next(p for p in c.triangle.corners() if p not in (c.entry, c.exit))
        if c.cell_type == CellType.TYPE2 and c.middle != third:
            raise AssertionError("type-2 middle is not the remaining corner")
        sub = CrossingType.A if c.cell_type == CellType.TYPE1 else CrossingType.BA
        cells.append(
            ShapeCell(c.entry, c.exit, third, c.cell_type, sub, _cell_frame(c.entry, c.exit, third))
        )
    s1, s2 = skel.type_counts()
    first = cells[0]
    if first.entry != gasket.ORIGIN:
        raise AssertionError("shape does not start at O")
    if first.cell_type == CellType.TYPE1:
        fc = CrossingType.A if first.exit == (0, 1) else CrossingType.B
    else:
        fc = CrossingType.BA if first.exit == (0, 1) else CrossingType.AB
    assert path.length == s1 + 2 * s2
    return Shape(ctype, vertices, tuple(cells), s1, s2, fc)


@lru_cache(maxsize=None)
def enumerate_shapes(ctype: CrossingType) -> tuple[Shape, ...]:
    """All loopless crossings of the level-1 triangle for the given type,
    in lexicographic order of their skeleton cell sequences."""
    a1, b1 = corner_a(1), corner_b(1)
    target = b1 if ctype in (CrossingType.B, CrossingType.AB) else a1
    tri = {gasket.ORIGIN, (0, 1), (1, 0), (1, 1), a1, b1}
    adj = {p: sorted(q for q in gasket.neighbors(p) if q in tri) for p in tri}
    found = []

    def dfs(path):
        tip = path[-1]
        if tip == target:
            found.append(tuple(path))
            return
        for q in adj[tip]:
            if q not in path:
                path.append(q)
                dfs(path)
                path.pop()

    dfs([gasket.ORIGIN])
    shapes = [_make_shape(ctype, vs) for vs in found]
    shapes.sort(key=lambda s: tuple((c.entry, c.exit) for c in s.cells))
    return tuple(shapes)


# ---------------------------------------------------------------------------
# Exact catalog: absorption law of the chronological erasure chain.
# ---------------------------------------------------------------------------


def _erase_update(prefix: tuple, v: Point) -> tuple:
    if v in prefix:
        return prefix[: prefix.index(v) + 1]
    return prefix + (v,)


try:  # gmpy2 rationals make the exact elimination ~10x faster
    from gmpy2 import mpq as _mpq
except ImportError:  # pragma: no cover
    _mpq = Fraction


def _solve_absorption(states, trans, hits, nshapes):
    """Gaussian elimination for X = T X + R in exact rational arithmetic."""
    n = len(states)
    index = {s: i for i, s in enumerate(states)}
    zero = _mpq(0)
    rows = []
    for s in states:
        row = [zero] * n + [_mpq(h.numerator, h.denominator) for h in hits[s]]
        row[index[s]] += 1
        for s2, p in trans[s]:
            row[index[s2]] -= _mpq(p.numerator, p.denominator)
        rows.append(row)
    width = n + nshapes
    for col in range(n):
        piv = next(r for r in range(col, n) if rows[r][col] != 0)
        rows[col], rows[piv] = rows[piv], rows[col]
        inv = 1 / rows[col][col]
        rows[col] = [e * inv for e in rows[col]]
        for r in range(n):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    return {
        states[i]: tuple(Fraction(int(e.numerator), int(e.denominator)) for e in rows[i][n:width])
        for i in range(n)
    }


@lru_cache(maxsize=None)
def exact_shape_catalog(ctype: CrossingType) -> tuple[tuple[Shape, Fraction], ...]:
    """The law of the loop-erased conditioned walk over the level-1
    crossing shapes, solved exactly.

    State = (conditioning stage, loop-erased prefix); one chronological
    erasure step per walk step; absorption when the walk completes, with
    the final loopless path as the outcome.
    """
    shapes = enumerate_shapes(ctype)
    shape_index = {s.vertices: i for i, s in enumerate(shapes)}
    table = srw.exact_conditional_chain(1, ctype)
    nstages = len(table.stages)

    start = (0, (gasket.ORIGIN,))
    states = []
    seen = {start}
    queue = [start]
    trans: dict = {}
    hits: dict = {}
    while queue:
        st = queue.pop()
        states.append(st)
        stage_i, prefix = st
        stage = table.stages[stage_i]
        out = []
        absorb = [Fraction(0)] * len(shapes)
        for v, p in stage.step_options(prefix[-1]):
            if v == stage.target:
                new_prefix = _erase_update(prefix, v)
                if stage_i + 1 < nstages:
                    nxt = (stage_i + 1, new_prefix)
                    out.append((nxt, p))
                else:
                    absorb[shape_index[new_prefix]] += p
                    continue
            else:
                nxt = (stage_i, _erase_update(prefix, v))
                out.append((nxt, p))
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
        trans[st] = out
        hits[st] = absorb

    solved = _solve_absorption(states, trans, hits, len(shapes))
    probs = solved[start]
    if sum(probs) != 1:
        raise IntegrityError(f"catalog probabilities for {ctype.name} sum to {sum(probs)}")
    return tuple(zip(shapes, probs))


def catalog_by_vertices(ctype: CrossingType) -> dict[tuple, Fraction]:
    return {s.vertices: p for s, p in exact_shape_catalog(ctype)}


def first_cell_groupings(ctype: CrossingType) -> dict[CrossingType, Fraction]:
    """Catalog probability grouped by the type of the cell containing O."""
    out = {t: Fraction(0) for t in CrossingType}
    for s, p in exact_shape_catalog(ctype):
        out[s.first_cell] += p
    return out


# ---------------------------------------------------------------------------
# Generating functions.
# ---------------------------------------------------------------------------


class GenFun:
    """Bivariate polynomial with exact rational coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        self.coeffs: dict[tuple[int, int], Fraction] = {}
        if coeffs:
            for k, v in dict(coeffs).items():
                v = Fraction(v)
                if v:
                    self.coeffs[k] = v

    def __eq__(self, other):
        return isinstance(other, GenFun) and self.coeffs == other.coeffs

    def __repr__(self):
        terms = " + ".join(
            f"({c})x^{i}y^{j}" for (i, j), c in sorted(self.coeffs.items())
        )
        return f"GenFun({terms or '0'})"

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, Fraction(0)) + v
        return GenFun(out)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return GenFun({k: v * other for k, v in self.coeffs.items()})
        out: dict = {}
        for (i1, j1), c1 in self.coeffs.items():
            for (i2, j2), c2 in other.coeffs.items():
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, Fraction(0)) + c1 * c2
        return GenFun(out)

    __rmul__ = __mul__

    def evaluate(self, x, y):
        return sum(c * x**i * y**j for (i, j), c in self.coeffs.items())

    def evaluate_array(self, x, y):
        total = np.zeros_like(np.asarray(x, dtype=float))
        for (i, j), c in self.coeffs.items():
            total = total + float(c) * x**i * y**j
        return total

    def partial_x(self):
        return GenFun({(i - 1, j): c * i for (i, j), c in self.coeffs.items() if i})

    def partial_y(self):
        return GenFun({(i, j - 1): c * j for (i, j), c in self.coeffs.items() if j})

    def compose(self, gx: "GenFun", gy: "GenFun") -> "GenFun":
        """Substitute x -> gx, y -> gy."""
        xpows: dict[int, GenFun] = {0: GenFun({(0, 0): 1})}
        ypows: dict[int, GenFun] = {0: GenFun({(0, 0): 1})}

        def power(table, base, n):
            if n not in table:
                table[n] = power(table, base, n - 1) * base
            return table[n]

        out = GenFun()
        for (i, j), c in self.coeffs.items():
            out = out + c * (power(xpows, gx, i) * power(ypows, gy, j))
        return out

    def degree(self) -> int:
        return max((i + j for (i, j) in self.coeffs), default=0)


def genfun_from_catalog(ctype: CrossingType) -> GenFun:
    out: dict = {}
    for s, p in exact_shape_catalog(ctype):
        k = (s.s1, s.s2)
        out[k] = out.get(k, Fraction(0)) + p
    return GenFun(out)


#: Closed forms of the two level-1 generating functions (cross-check only;
#: the catalog is the source of truth and any mismatch is fatal).
_PHI1_EXPECTED = GenFun(
    {
        (2, 0): Fraction(15, 30),
        (1, 1): Fraction(8, 30),
        (0, 2): Fraction(1, 30),
        (2, 1): Fraction(2, 30),
        (3, 0): Fraction(4, 30),
    }
)
_PHI2_EXPECTED = GenFun(
    {
        (2, 0): Fraction(5, 45),
        (1, 1): Fraction(11, 45),
        (0, 2): Fraction(2, 45),
        (2, 1): Fraction(14, 45),
        (3, 0): Fraction(8, 45),
        (1, 2): Fraction(5, 45),
    }
)


@lru_cache(maxsize=None)
def phi_base() -> tuple[GenFun, GenFun]:
    """The level-1 generating functions of (s1, s2), derived from the
    catalogs and verified coefficient-by-coefficient."""
    phi1 = genfun_from_catalog(CrossingType.A)
    phi2 = genfun_from_catalog(CrossingType.BA)
    if phi1 != _PHI1_EXPECTED:
        raise IntegrityError(f"catalog-derived phi1 mismatch: {phi1}")
    if phi2 != _PHI2_EXPECTED:
        raise IntegrityError(f"catalog-derived phi2 mismatch: {phi2}")
    if phi1.evaluate(1, 1) != 1 or phi2.evaluate(1, 1) != 1:
        raise IntegrityError("phi not a probability generating function")
    return phi1, phi2


def phi_iterate(n: int, cap: int = PHI_EXACT_CAP) -> tuple[GenFun, GenFun]:
    """Exact n-fold composition (phi1_n, phi2_n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > cap:
        raise CapacityError(f"exact composition capped at {cap} (degree grows like 3^n)")
    p1, p2 = phi_base()
    f1, f2 = p1, p2
    for _ in range(n - 1):
        f1, f2 = f1.compose(p1, p2), f2.compose(p1, p2)
    return f1, f2


def phi_tilde(n: int) -> GenFun:
    """The whole-walk mixture: (11/14) phi1_n + (3/14) phi2_n."""
    f1, f2 = phi_iterate(n)
    return Fraction(11, 14) * f1 + Fraction(3, 14) * f2


# ---------------------------------------------------------------------------
# Mean matrix and the time-scaling eigenvalue.
# ---------------------------------------------------------------------------


def sqrt205_decimal(digits: int) -> str:
    scaled = math.isqrt(205 * 10 ** (2 * digits))
    s = str(scaled)
    return s[:-digits] + "." + s[-digits:]


def lambda_decimal(digits: int = 15) -> Fraction:
    """(20 + sqrt(205)) / 15 to at least `digits` correct decimals, as a
    Fraction (sqrt(205) truncated at digits+5 places)."""
    k = digits + 5
    root = Fraction(math.isqrt(205 * 10 ** (2 * k)), 10**k)
    return (20 + root) / 15


@dataclass(frozen=True)
class MeanMatrix:
    m: tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]

    @property
    def lam(self) -> float:
        """Perron root (20 + sqrt 205)/15, from trace and determinant."""
        (a, b), (c, d) = self.m
        tr, det = a + d, a * d - b * c
        disc = tr * tr - 4 * det
        return float(tr + _fraction_sqrt(disc)) / 2

    @property
    def nu(self) -> float:
        return math.log(2) / math.log(self.lam)

    def power(self, n: int):
        out = ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))
        base = self.m
        for _ in range(n):
            out = _mat2_mul(out, base)
        return out

    def expected_exit_time(self, level: int, ctype: CrossingType) -> Fraction:
        """E[T_1^ex at `level`] = e_i M^level (1, 2)^T, exact."""
        row = (Fraction(1), Fraction(0)) if not ctype.hits_both else (Fraction(0), Fraction(1))
        p = self.power(level)
        v1 = row[0] * p[0][0] + row[1] * p[1][0]
        v2 = row[0] * p[0][1] + row[1] * p[1][1]
        return v1 + 2 * v2


def _mat2_mul(x, y):
    return (
        (x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]),
        (x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]),
    )


def _fraction_sqrt(f: Fraction, digits: int = 30) -> Fraction:
    scale = 10**digits
    return Fraction(math.isqrt(f.numerator * scale * scale // f.denominator), scale)


@lru_cache(maxsize=None)
def mean_matrix() -> MeanMatrix:
    phi1, phi2 = phi_base()
    m = (
        (phi1.partial_x().evaluate(1, 1), phi1.partial_y().evaluate(1, 1)),
        (phi2.partial_x().evaluate(1, 1), phi2.partial_y().evaluate(1, 1)),
    )
    return MeanMatrix(m)


class LambdaPowers:
    """Exact integer comparisons against powers of lambda.

    lambda^k = (a_k + b_k sqrt(205)) / 15^k with integer a_k, b_k.
    """

    def __init__(self):
        self._ab = [(1, 0)]

    def _grow(self, k: int):
        while len(self._ab) <= k:
            a, b = self._ab[-1]
            self._ab.append((20 * a + 205 * b, a + 20 * b))

    def power_le(self, k: int, n: int) -> bool:
        """lambda^k <= n, exactly."""
        self._grow(k)
        a, b = self._ab[k]
        rhs = n * 15**k - a
        if rhs < 0:
            return False
        return 205 * b * b <= rhs * rhs

    def K(self, n: int) -> int:
        """The integer K with lambda^K <= n < lambda^(K+1)."""
        if n < 1:
            raise ValueError("n must be >= 1")
        k = 0
        while self.power_le(k + 1, n):
            k += 1
        return k


# ---------------------------------------------------------------------------
# The four-state type chain.
# ---------------------------------------------------------------------------

_P_EXPECTED = tuple(
    tuple(Fraction(x, 30) for x in row)
    for row in ((19, 5, 5, 1), (5, 19, 1, 5), (7, 15, 5, 3), (15, 7, 3, 5))
)


@dataclass(frozen=True)
class TypeChain:
    matrix: tuple  # 4x4 Fractions; matrix[k][j] = P(first cell type j | crossing type k)
    alpha: tuple  # invariant probability vector

    def power_convergence(self, start, n: int):
        v = [float(x) for x in start]
        m = [[float(x) for x in row] for row in self.matrix]
        for _ in range(n):
            v = [sum(v[i] * m[i][j] for i in range(4)) for j in range(4)]
        return v


@lru_cache(maxsize=None)
def type_chain() -> TypeChain:
    rows = []
    for k in CrossingType:
        g = first_cell_groupings(k)
        rows.append(tuple(g[j] for j in CrossingType))
    matrix = tuple(rows)
    if matrix != _P_EXPECTED:
        raise IntegrityError(f"recomputed type chain differs from expected: {matrix}")
    alpha = _invariant_vector(matrix)
    return TypeChain(matrix, alpha)


def _invariant_vector(matrix) -> tuple:
    # Solve alpha (P - I) = 0 with sum(alpha) = 1 over Fractions.
    n = 4
    aug = []
    for j in range(n - 1):
        aug.append([matrix[i][j] - (1 if i == j else 0) for i in range(n)] + [Fraction(0)])
    aug.append([Fraction(1)] * n + [Fraction(1)])
    sol = srw._solve_aug(aug)
    return tuple(sol)


# ---------------------------------------------------------------------------
# Exact enumeration of small crossings and the consistency identity.
# ---------------------------------------------------------------------------


def assemble_crossing(shape: Shape, level: int, sub_paths) -> tuple[Point, ...]:
    """Paste per-cell canonical level-(level-1) crossings into the cells
    of `shape` scaled to level `level`."""
    scale = level - 1
    verts = [gasket.ORIGIN]
    for cell, sub in zip(shape.cells, sub_paths):
        ox, oy = cell.entry[0] << scale, cell.entry[1] << scale
        mapped = [
            (lambda q: (q[0] + ox, q[1] + oy))(mat_apply(cell.mat, p)) for p in sub
        ]
        if mapped[0] != verts[-1]:
            raise AssertionError("cell pasting mismatch")
        verts.extend(mapped[1:])
    return tuple(verts)


@lru_cache(maxsize=None)
def enumerate_crossings(level: int, ctype: CrossingType) -> dict[tuple, Fraction]:
    """Exact law over all level-`level` loopless crossings of the given
    type, as a map vertex-tuple -> probability."""
    if level > ENUMERATE_CAP:
        raise CapacityError(f"exhaustive crossing enumeration capped at level {ENUMERATE_CAP}")
    if level == 0:
        return {GAMMA0_PATHS[ctype]: Fraction(1)}
    out: dict[tuple, Fraction] = {}
    subs = {t: enumerate_crossings(level - 1, t) for t in CrossingType}
    for shape, p in exact_shape_catalog(ctype):
        if p == 0:
            continue
        # Build the product measure over cell contents, then assemble each
        # combination once; distinct combinations can assemble to the same
        # path (an erased middle corner), hence the accumulation.
        combos = [((), p)]
        for cell in shape.cells:
            new = []
            for chosen, q in combos:
                for sub, ps in subs[cell.sub_type].items():
                    if ps == 0:
                        continue
                    new.append((chosen + (sub,), q * ps))
            combos = new
        for chosen, q in combos:
            verts = assemble_crossing(shape, level, chosen)
            out[verts] = out.get(verts, Fraction(0)) + q
    return out


def restrict_to_first_cell(verts: tuple, level: int) -> tuple:
    """The crossing stopped at its exit from the first 2^level cell."""
    w = Path(verts, validate=False)
    skel = skeleton(w, level)
    return verts[: skel.exit_times[1] + 1]


def crossing_type_of_restriction(verts: tuple, level: int) -> CrossingType:
    a, b = corner_a(level), corner_b(level)
    hits = [p for p in verts[1:] if gasket.in_coarse_lattice(p, level)]
    # consecutive duplicates cannot occur in a loopless path
    if hits == [a]:
        return CrossingType.A
    if hits == [b]:
        return CrossingType.B
    if hits == [b, a]:
        return CrossingType.BA
    if hits == [a, b]:
        return CrossingType.AB
    raise ValueError("not a canonical crossing restriction")


DEFAULT_WEIGHTS = (Fraction(11, 28), Fraction(11, 28), Fraction(3, 28), Fraction(3, 28))


@dataclass(frozen=True)
class ConsistencyReport:
    level: int
    weights: tuple
    mixing_rows: tuple  # recomputed rows P(type of restriction | ambient type)
    checked_paths: int


def consistency_identity(level: int = 1, weights=DEFAULT_WEIGHTS) -> ConsistencyReport:
    """Verify, in exact rational arithmetic, that the weighted mixture of
    the four crossing families at `level`+1 restricts to the same mixture
    at `level` (the Kolmogorov-extension consistency), and that the four
    family-wise mixing rows match the type-chain matrix.

    Raises IntegrityError, naming the offending path, if any identity
    fails; perturbed `weights` are expected to fail.
    """
    if level not in (1, 2):
        raise CapacityError("consistency check supported at level 1 and 2")
    weights = tuple(Fraction(w) for w in weights)
    chain = type_chain()

    if level == 1:
        fine = {t: enumerate_crossings(2, t) for t in CrossingType}
        coarse = {t: enumerate_crossings(1, t) for t in CrossingType}
        # Restriction law of each level-2 family over level-1 crossings.
        restricted: dict[CrossingType, dict[tuple, Fraction]] = {
            t: {} for t in CrossingType
        }
        npaths = 0
        for t in CrossingType:
            for verts, p in fine[t].items():
                npaths += 1
                r = restrict_to_first_cell(verts, 1)
                restricted[t][r] = restricted[t].get(r, Fraction(0)) + p
        gamma1 = set()
        for t in CrossingType:
            gamma1 |= set(coarse[t])
        # (a) The four mixing rows.
        for i in CrossingType:
            for w in sorted(gamma1):
                lhs = restricted[i].get(w, Fraction(0))
                rhs = sum(
                    chain.matrix[i][j] * coarse[j].get(w, Fraction(0))
                    for j in CrossingType
                )
                if lhs != rhs:
                    raise IntegrityError(
                        f"mixing row {i.name} fails at {w}: {lhs} != {rhs}"
                    )
        # (b) The weighted consistency identity.
        for w in sorted(gamma1):
            lhs = sum(weights[i] * restricted[i].get(w, Fraction(0)) for i in CrossingType)
            rhs = sum(weights[i] * coarse[i].get(w, Fraction(0)) for i in CrossingType)
            if lhs != rhs:
                raise IntegrityError(
                    f"consistency fails for weights {weights} at path {w}: {lhs} != {rhs}"
                )
        rows = chain.matrix
        return ConsistencyReport(level, weights, rows, npaths)

    # level == 2: one recursion step.  The restriction of a level-3 family
    # to its first 2^2 cell has law sum_j P[i][j] * (level-2 family j); the
    # identity to check is that the weights are invariant for that mixing.
    coarse = {t: enumerate_crossings(2, t) for t in CrossingType}
    npaths = 0
    for w in sorted(set().union(*[set(coarse[t]) for t in CrossingType])):
        npaths += 1
        lhs = sum(
            weights[i]
            * sum(chain.matrix[i][j] * coarse[j].get(w, Fraction(0)) for j in CrossingType)
            for i in CrossingType
        )
        rhs = sum(weights[i] * coarse[i].get(w, Fraction(0)) for i in CrossingType)
        if lhs != rhs:
            raise IntegrityError(f"consistency fails at level 2 for {w}")
    return ConsistencyReport(level, weights, chain.matrix, npaths)


# ---------------------------------------------------------------------------
# Laplace transforms of the scaled exit times.
# ---------------------------------------------------------------------------


def laplace_G(n: int, t_grid) -> dict[str, np.ndarray]:
    """G^(i)_n(t) for the scaled exit times, evaluated by iterating the
    one-step functional recursion n times (never by expanding phi_n)."""
    t = np.asarray(t_grid, dtype=float)
    phi1, phi2 = phi_base()
    lam = mean_matrix().lam
    scaled = t / lam**n
    g1 = np.exp(-scaled)
    g2 = np.exp(-2 * scaled)
    for _ in range(n):
        g1, g2 = phi1.evaluate_array(g1, g2), phi2.evaluate_array(g1, g2)
    gt = (11 / 14) * g1 + (3 / 14) * g2
    return {"g1": g1, "g2": g2, "gtilde": gt}
