"""Estimators and diagnostics for the displacement exponent, the law of
the iterated logarithm, and the dyadic-scale tail bounds.

All estimators are deterministic functions of (seed, config): replicas
are partitioned into fixed blocks by index, each block draws from its own
split stream, and reductions run in block order, so results do not depend
on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2 as _chi2_dist

from . import measures, sampler
from .errors import CapacityError
from .sampler import RandomStream

REPLICA_BLOCK = 256
MAX_WALK_STEPS = 1 << 24


@dataclass(frozen=True)
class MomentTable:
    s: float
    n_values: np.ndarray          # strictly increasing step counts
    estimates: np.ndarray         # E|X(n)|^s estimates
    std_errors: np.ndarray
    replicas: int
    samples: np.ndarray = field(repr=False)  # (replicas, len(n_values)) of |X(n)|


@dataclass(frozen=True)
class ExponentFit:
    nu_hat: float
    ci_low: float
    ci_high: float
    reference_nu: float
    slope_se: float


@dataclass(frozen=True)
class LILTrace:
    trajectory: int
    n_values: np.ndarray
    ratios: np.ndarray       # |X(n)| / psi(n) at geometrically spaced n
    running_max: float


@dataclass(frozen=True)
class LILSummary:
    traces: list
    running_maxima: np.ndarray
    band: tuple[float, float]
    nu: float


@dataclass(frozen=True)
class TailReport:
    n: int
    K: int
    m_values: np.ndarray
    short_probs: np.ndarray   # P[D_n < K - M]
    short_wilson: np.ndarray  # (low, high) columns
    long_probs: np.ndarray    # P[D_n > K + M]
    long_wilson: np.ndarray
    replicas: int


def psi(n, nu: float) -> np.ndarray:
    """The iterated-logarithm scaling n^nu (log log n)^(1-nu); needs n >= 16."""
    n = np.asarray(n, dtype=float)
    if (n < 16).any():
        raise ValueError("psi(n) needs n >= 16 so log log n is positive")
    return n**nu * np.log(np.log(n)) ** (1.0 - nu)


def lambda_index(n: int) -> int:
    """K(n) with lambda^K <= n < lambda^(K+1), exact integer arithmetic."""
    return measures.LambdaPowers().K(n)


def _worker_norms(args):
    seed, path, block, n_checks, engine = args
    stream = RandomStream(seed, path)
    out = np.empty((len(block), len(n_checks)))
    n_max = int(max(n_checks))
    for i, r in enumerate(block):
        pos = sampler.walk_positions(stream.split(r), n_max, engine=engine)
        sampler.assert_loopless(pos)
        norms = sampler.walk_norms(pos)
        out[i] = norms[np.asarray(n_checks)]
    return out


def _run_blocks(stream: RandomStream, replicas: int, job, threads: int = 1):
    """Fixed-block replica partition; deterministic regardless of threads."""
    blocks = [
        list(range(b, min(b + REPLICA_BLOCK, replicas)))
        for b in range(0, replicas, REPLICA_BLOCK)
    ]
    args = [job(stream, blk) for blk in blocks]
    if threads <= 1 or len(blocks) <= 1:
        return [_worker_norms(a) for a in args]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_worker_norms, args))


def estimate_moments(s: float, n_list, replicas: int, rng: RandomStream,
                     threads: int = 1, engine: str = "auto") -> MomentTable:
    """Monte Carlo E|X(n)|^s over independent replicas of the infinite
    walk, with standard errors."""
    if s <= 0:
        raise ValueError("s must be positive")
    n_values = np.asarray(sorted(n_list), dtype=np.int64)
    if n_values[-1] > MAX_WALK_STEPS:
        raise CapacityError(f"walks capped at {MAX_WALK_STEPS} steps")
    job = lambda stream, blk: (stream.seed, stream.path, blk, n_values, engine)
    chunks = _run_blocks(rng, replicas, job, threads)
    norms = np.concatenate(chunks, axis=0)
    powered = norms**s
    est = powered.mean(axis=0)
    se = powered.std(axis=0, ddof=1) / math.sqrt(replicas)
    return MomentTable(s, n_values, est, se, replicas, norms)


def fit_exponent(table: MomentTable, bootstrap: int = 1000,
                 rng: RandomStream | None = None) -> ExponentFit:
    """Least-squares slope of log E|X(n)|^s against log n, divided by s,
    with a bootstrap confidence interval over replicas."""
    if len(table.n_values) < 4:
        raise ValueError("need at least 4 rows to fit")
    x = np.log(table.n_values.astype(float))
    y = np.log(table.estimates)
    slope, intercept = np.polyfit(x, y, 1)
    nu_hat = slope / table.s

    gen = (rng or RandomStream(0)).generator()
    powered = table.samples**table.s
    nrep = powered.shape[0]
    boots = np.empty(bootstrap)
    for b in range(bootstrap):
        idx = gen.integers(0, nrep, nrep)
        est = powered[idx].mean(axis=0)
        boots[b] = np.polyfit(x, np.log(est), 1)[0] / table.s
    lo, hi = np.percentile(boots, [2.5, 97.5])
    ref = measures.mean_matrix().nu
    return ExponentFit(float(nu_hat), float(lo), float(hi), ref, float(boots.std(ddof=1)))


def lil_diagnostic(replicas: int, n_max: int, rng: RandomStream,
                   n_min: int = 16, points: int = 64, engine: str = "auto",
                   threads: int = 1) -> LILSummary:
    """Running max of |X(n)|/psi(n) per trajectory, plus the cross-replica
    distribution of the running max at n_max."""
    if n_max < n_min:
        raise ValueError("n_max must be >= 16")
    nu = measures.mean_matrix().nu
    grid = np.unique(np.geomspace(n_min, n_max, points).astype(np.int64))
    traces = []
    maxima = np.empty(replicas)
    for r in range(replicas):
        pos = sampler.walk_positions(rng.split(r), n_max, engine=engine)
        sampler.assert_loopless(pos)
        norms = sampler.walk_norms(pos)
        ns = np.arange(n_min, n_max + 1, dtype=np.int64)
        ratios = norms[n_min:] / psi(ns, nu)
        maxima[r] = ratios.max()
        traces.append(LILTrace(r, grid, norms[grid] / psi(grid, nu), float(maxima[r])))
    return LILSummary(traces, maxima, (float(maxima.min()), float(maxima.max())), nu)


def wilson_interval(k: int, n: int, z: float = 1.96) -> tuple[float, float]:
    if n == 0:
        return (0.0, 1.0)
    p = k / n
    denom = 1 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def tail_decay(n: int, m_range, replicas: int, rng: RandomStream,
               engine: str = "auto") -> TailReport:
    """Empirical tails of the dyadic range scale D_n around K(n)."""
    m_values = np.asarray(sorted(m_range), dtype=np.int64)
    K = lambda_index(n)
    if K <= int(m_values.max()):
        raise ValueError(f"K(n) = {K} must exceed max M = {m_values.max()}")
    d_vals = np.empty(replicas, dtype=np.int64)
    for r in range(replicas):
        pos = sampler.walk_positions(rng.split(r), n, engine=engine)
        sampler.assert_loopless(pos)
        u = pos[:, 0].astype(np.int64)
        v = pos[:, 1].astype(np.int64)
        peak = int((u * u + u * v + v * v).max())
        d = 0
        while (1 << (2 * d)) < peak:
            d += 1
        d_vals[r] = d
    shorts = np.array([(d_vals < K - m).mean() for m in m_values])
    longs = np.array([(d_vals > K + m).mean() for m in m_values])
    sw = np.array([wilson_interval(int((d_vals < K - m).sum()), replicas) for m in m_values])
    lw = np.array([wilson_interval(int((d_vals > K + m).sum()), replicas) for m in m_values])
    return TailReport(n, K, m_values, shorts, sw, longs, lw, replicas)


# ---------------------------------------------------------------------------
# Goodness of fit.
# ---------------------------------------------------------------------------


def chi_square(observed: dict | np.ndarray, expected_probs: dict | np.ndarray,
               min_expected: float = 5.0) -> tuple[float, float]:
    """Pearson statistic against exact category probabilities.

    Categories with expected probability zero must have zero observed
    count (hard failure otherwise: that is a correctness signal, not a
    statistical one).  Low-expectation categories are pooled so the
    asymptotic distribution applies.
    """
    if isinstance(observed, dict) or isinstance(expected_probs, dict):
        keys = sorted(set(observed) | set(expected_probs), key=repr)
        obs = np.array([observed.get(k, 0) for k in keys], dtype=float)
        exp_p = np.array([float(expected_probs.get(k, 0)) for k in keys], dtype=float)
    else:
        obs = np.asarray(observed, dtype=float)
        exp_p = np.asarray(expected_probs, dtype=float)
    zero = exp_p == 0
    if (obs[zero] != 0).any():
        raise AssertionError("observed mass on a zero-probability outcome")
    obs, exp_p = obs[~zero], exp_p[~zero]
    total = obs.sum()
    if abs(exp_p.sum() - 1.0) > 1e-9:
        raise ValueError("expected probabilities must sum to 1")
    exp = exp_p * total
    order = np.argsort(-exp)
    obs, exp = obs[order], exp[order]
    po, pe = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(obs, exp):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            po.append(acc_o)
            pe.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 and pe:
        po[-1] += acc_o
        pe[-1] += acc_e
    elif acc_e > 0:
        po.append(acc_o)
        pe.append(acc_e)
    po, pe = np.array(po), np.array(pe)
    stat = float((((po - pe) ** 2) / pe).sum())
    dof = len(pe) - 1
    if dof < 1:
        return stat, 1.0
    return stat, float(_chi2_dist.sf(stat, dof))


def chi_square_two_sample(counts1: dict, counts2: dict,
                          min_total: float = 10.0) -> tuple[float, float]:
    """Two-sample Pearson test that both count dictionaries come from the
    same distribution; sparse categories are pooled."""
    keys = sorted(set(counts1) | set(counts2), key=repr)
    c1 = np.array([counts1.get(k, 0) for k in keys], dtype=float)
    c2 = np.array([counts2.get(k, 0) for k in keys], dtype=float)
    order = np.argsort(-(c1 + c2))
    c1, c2 = c1[order], c2[order]
    p1, p2 = [], []
    a1 = a2 = 0.0
    for x, y in zip(c1, c2):
        a1 += x
        a2 += y
        if a1 + a2 >= min_total:
            p1.append(a1)
            p2.append(a2)
            a1 = a2 = 0.0
    if (a1 + a2) > 0 and p1:
        p1[-1] += a1
        p2[-1] += a2
    c1, c2 = np.array(p1), np.array(p2)
    n1, n2 = c1.sum(), c2.sum()
    k1, k2 = math.sqrt(n2 / n1), math.sqrt(n1 / n2)
    with np.errstate(invalid="ignore"):
        terms = (k1 * c1 - k2 * c2) ** 2 / (c1 + c2)
    stat = float(np.nansum(terms))
    dof = len(c1) - 1
    if dof < 1:
        return stat, 1.0
    return stat, float(_chi2_dist.sf(stat, dof))
