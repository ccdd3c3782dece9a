from collections import Counter, defaultdict
from fractions import Fraction

import numpy as np
import pytest

from lerw import ellf, gasket, srw
from lerw.analysis import chi_square_two_sample
from lerw.errors import CapacityError
from lerw.paths import CrossingType, Path
from lerw.sampler import RandomStream


def test_reachable_region_level1():
    transient, absorbing = srw.reachable_region(1)
    assert transient == {
        (0, 0), (0, 1), (1, 0), (1, 1), (-1, 0), (-1, 1), (-2, 1),
    }
    assert absorbing == {(0, 2), (2, 0), (-2, 0), (-2, 2)}


def test_reachable_region_level2_size():
    transient, absorbing = srw.reachable_region(2)
    # two copies of the 15-vertex level-2 construction sharing the origin,
    # minus the 4 outer corners
    assert len(transient) == 2 * 15 - 1 - 4
    assert len(absorbing) == 4
    assert (0, 0) in transient


def test_hitting_odds_match_direct_solve():
    # independent oracle: solve the harmonic system directly
    for level in (1, 2):
        h = srw.hitting_odds(gasket.ORIGIN, level, gasket.corner_a(level))
        transient, absorbing = srw.reachable_region(level)
        states = sorted(transient)
        idx = {v: i for i, v in enumerate(states)}
        n = len(states)
        aug = [[Fraction(0)] * (n + 1) for _ in range(n)]
        for v in states:
            i = idx[v]
            aug[i][i] = Fraction(1)
            for q in gasket.neighbors(v):
                if q in idx:
                    aug[i][idx[q]] -= Fraction(1, 4)
                elif q == gasket.corner_a(level):
                    aug[i][n] += Fraction(1, 4)
        x = srw._solve_aug(aug)
        for v in states:
            assert x[idx[v]] == h[v]


def test_normalizer_at_origin():
    h = srw.hitting_odds(gasket.ORIGIN, 1, gasket.corner_a(1))
    assert h[gasket.ORIGIN] == Fraction(1, 4)


def test_rows_sum_to_one_exactly():
    for ctype in CrossingType:
        table = srw.exact_conditional_chain(2, ctype)
        assert table.exact
        for stage in table.stages:
            for v, opts in stage.rows.items():
                assert sum(p for _, p in opts) == 1


def test_mirror_symmetry_of_tables():
    # The B chain is the image of the A chain under the corner-swap graph
    # automorphism of the two-triangle neighborhood of the origin.
    from lerw.paths import flip_ab

    ta = srw.exact_conditional_chain(1, CrossingType.A)
    tb = srw.exact_conditional_chain(1, CrossingType.B)
    rows_a = ta.stages[0].rows
    rows_b = tb.stages[0].rows
    assert set(map(flip_ab, rows_a)) == set(rows_b)
    for v, opts in rows_a.items():
        mirrored = {flip_ab(q): p for q, p in opts}
        assert dict(rows_b[flip_ab(v)]) == mirrored


def test_capacity_error():
    with pytest.raises(CapacityError):
        srw.exact_conditional_chain(9, CrossingType.A)


def test_sampled_law_matches_expected_length():
    gen = RandomStream(11).generator()
    spec = srw.ConditionedWalkSpec(1, CrossingType.A)
    exact = float(srw.expected_length(1, CrossingType.A))
    lens = [srw.sample_conditioned(spec, gen).length for _ in range(20000)]
    se = np.std(lens, ddof=1) / np.sqrt(len(lens))
    assert abs(np.mean(lens) - exact) < 4 * se
    assert exact == 5.0


def test_two_stage_weight_identity_exact():
    """The two-stage conditioning reproduces the (1/4)^(len-2) weight:
    per-length absorbed masses agree exactly as rationals, with the
    truncation tail below 1e-6 by length 64."""
    table = srw.exact_conditional_chain(1, CrossingType.BA)
    st1, st2 = table.stages
    b1, a1 = gasket.corner_b(1), gasket.corner_a(1)
    absorbing1 = set(srw.bowtie_corners(gasket.ORIGIN, 1))
    absorbing2 = set(srw.bowtie_corners(b1, 1))

    max_len = 64
    dist = {(0, gasket.ORIGIN): Fraction(1)}
    chain_mass = {}
    for length in range(1, max_len + 1):
        nxt = defaultdict(Fraction)
        for (si, v), p in dist.items():
            stage = (st1, st2)[si]
            for u, q in stage.rows[v]:
                if si == 0 and u == st1.target:
                    nxt[(1, u)] += p * q
                elif si == 1 and u == st2.target:
                    chain_mass[length] = chain_mass.get(length, Fraction(0)) + p * q
                else:
                    nxt[(si, u)] += p * q
        dist = nxt

    raw = {(0, gasket.ORIGIN): 1}
    raw_mass = {}
    for length in range(1, max_len + 1):
        nxt = defaultdict(int)
        for (si, v), c in raw.items():
            for u in gasket.neighbors(v):
                if si == 0:
                    if u == b1:
                        nxt[(1, u)] += c
                    elif u not in absorbing1:
                        nxt[(0, u)] += c
                else:
                    if u == a1:
                        raw_mass[length] = raw_mass.get(length, 0) + c
                    elif u not in absorbing2:
                        nxt[(1, u)] += c
        raw = nxt

    total = Fraction(0)
    for length in range(1, max_len + 1):
        expect = raw_mass.get(length, 0) * Fraction(1, 4) ** (length - 2)
        assert chain_mass.get(length, Fraction(0)) == expect, length
        total += expect
    assert 1 - total < Fraction(1, 10**6)


def test_path_probability_weight():
    # every sampled path has chain probability exactly (1/4)^(len-2) / (1/16)
    table = srw.exact_conditional_chain(1, CrossingType.BA)
    gen = RandomStream(3).generator()
    for _ in range(100):
        w = srw.sample_conditioned(srw.ConditionedWalkSpec(1, CrossingType.BA), gen)
        p = table.path_probability(w)
        assert p == Fraction(1, 4) ** (w.length - 2) * 16


def test_htransform_agrees_with_rejection():
    # joint check through the loop-erasure map at level 1
    gen = RandomStream(17).generator()
    n = 4000
    for ctype in (CrossingType.A, CrossingType.BA):
        spec = srw.ConditionedWalkSpec(1, ctype)
        c1 = Counter(
            ellf.ellf(srw.sample_conditioned(spec, gen)).vertices for _ in range(n)
        )
        c2 = Counter(
            ellf.ellf(srw.sample_rejection(spec, gen)).vertices for _ in range(n)
        )
        stat, p = chi_square_two_sample(c1, c2)
        assert p > 1e-3, (ctype, stat, p)


def test_ba_path_visits_b_once():
    gen = RandomStream(23).generator()
    b1 = gasket.corner_b(1)
    for _ in range(200):
        w = srw.sample_conditioned(srw.ConditionedWalkSpec(1, CrossingType.BA), gen)
        hits = [p for p in w.vertices if gasket.in_coarse_lattice(p, 1)]
        dedup = [h for i, h in enumerate(hits) if i == 0 or hits[i - 1] != h]
        assert dedup[-1] == gasket.corner_a(1)
        assert dedup.count(b1) == 1
        Path(w.vertices)  # adjacency
