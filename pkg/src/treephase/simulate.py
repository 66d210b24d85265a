"""Monte Carlo engine over tree-indexed product measures.

Sampling is counter-based: a symbol is a pure function of (seed, trial,
oriented-edge id), so identical parameters reproduce identical fields for
any chunking or worker count, and only the coordinates a statistic needs
are ever drawn.  The heavy paths (sphere sums over truncated trees) run
through the compiled kernels when available and their numpy twin
otherwise.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import (
    DepthBudget,
    NoBlockLength,
    OutOfDepth,
    ParameterOutOfRange,
    SpecMismatch,
)
from .measures import (
    Direction,
    DiscreteMeasure,
    MeasurePair,
    ScalarDistribution,
    chernoff_min,
    convolve,
    log_ratio_distribution,
    mix,
)
from .actions import FreeWord, act_on_vertex
from .trees import (
    CAYLEY,
    REGULAR,
    ROOT,
    EdgeDirection,
    OrientedEdge,
    TreeSpec,
    Vertex,
    ball_size,
    edge_counter,
    iter_children,
    level_offset,
    path_edges,
    vertex_index,
)

DEFAULT_VERTEX_CAP = 10**7
DEFAULT_EPSILON = 1e-2
DEFAULT_SLOPE_FLOOR = 0.05
DEFAULT_CONVERGED_QUANTILE = 0.975

_TRIAL_CHUNK = 1024
_PERC_CHUNK = 256
_Z99 = 2.5758293035489004  # 99% two-sided normal quantile

THREADS_ENV = "TREEPHASE_THREADS"


def resolve_threads(threads: Optional[int]) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV, "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _run_trial_chunks(trials: int, threads: int, fn, chunk: int = _TRIAL_CHUNK):
    """Evaluate fn(lo, hi) over fixed-size trial chunks, assembled in order.

    Chunk size never depends on the worker count, so the concatenated
    result is byte-identical for any ``threads``.
    """
    bounds = [(lo, min(lo + chunk, trials)) for lo in range(0, trials, chunk)]
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: fn(*b), bounds))
    else:
        parts = [fn(*b) for b in bounds]
    return parts


def _pair_tables(pair: MeasurePair):
    cum_toward = np.cumsum(np.asarray(pair.mu0.weights, dtype=np.float64))
    cum_away = np.cumsum(np.asarray(pair.mu1.weights, dtype=np.float64))
    ratios = np.asarray(pair.log_ratios, dtype=np.float64)
    return cum_toward, cum_away, -ratios, ratios


@dataclass(frozen=True, eq=False)
class FieldSample:
    """One realization of the independent per-edge symbol field.

    ``symbols`` maps the canonical oriented-edge counter (2*vid for the
    toward-root orientation, 2*vid+1 away) to a sampled alphabet index.
    Toward-root edges sample from mu0, away edges from mu1.  The map is
    fully determined by (spec, pair, depth, seed).
    """

    spec: TreeSpec
    pair: MeasurePair
    depth: int
    seed: int
    symbols: dict

    def symbol(self, edge: OrientedEdge) -> int:
        return self.symbols[edge_counter(self.spec, edge)]

    def x_value(self, edge: OrientedEdge) -> float:
        """Log-likelihood ratio of the sampled symbol at an oriented edge."""
        sym = self.symbol(edge)
        ratio = self.pair.log_ratios[sym]
        return -ratio if edge.direction is EdgeDirection.TOWARD_ROOT else ratio


def sample_field(
    spec: TreeSpec,
    pair: MeasurePair,
    depth: int,
    seed: int,
    vertex_cap: int = DEFAULT_VERTEX_CAP,
) -> FieldSample:
    if depth < 0:
        raise ParameterOutOfRange(f"depth {depth} is negative")
    nverts = ball_size(spec, depth)
    if nverts > vertex_cap:
        raise DepthBudget(nverts, vertex_cap)
    symbols: dict = {}
    if nverts > 1:
        cum_t, cum_a, _, _ = _pair_tables(pair)
        state = np.asarray([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
        vids = np.arange(1, nverts, dtype=np.uint64)
        toward = kernels.symbol_grid(state, np.uint64(2) * vids, cum_t)[0]
        away = kernels.symbol_grid(state, np.uint64(2) * vids + np.uint64(1), cum_a)[0]
        for vid, s_t, s_a in zip(vids.tolist(), toward.tolist(), away.tolist()):
            symbols[2 * vid] = int(s_t)
            symbols[2 * vid + 1] = int(s_a)
    return FieldSample(spec, pair, depth, seed, symbols)


def cocycle_sum(sample: FieldSample, v: Vertex) -> float:
    """Sum of the sampled log-ratios over both orientations of the
    root-to-v geodesic."""
    if v.depth > sample.depth:
        raise OutOfDepth(f"vertex at depth {v.depth} beyond sample depth {sample.depth}")
    return math.fsum(sample.x_value(e) for e in path_edges(sample.spec, ROOT, v))


def rn_derivative(sample: FieldSample, g: FreeWord) -> float:
    """Radon-Nikodym derivative of the g-translate, exp of the cocycle sum
    at the vertex g moves the root to."""
    if sample.spec.kind != CAYLEY:
        raise SpecMismatch("rn_derivative needs a cayley tree sample")
    if len(g) > sample.depth:
        raise OutOfDepth(f"|g|={len(g)} beyond sample depth {sample.depth}")
    target = act_on_vertex(sample.spec, g, ROOT)
    return math.exp(cocycle_sum(sample, target))


def martingale_W(sample: FieldSample, n: int) -> float:
    """Exact sphere sum of exp(S_v / 2) at radius n for one field sample."""
    if sample.spec.kind != REGULAR:
        raise SpecMismatch("martingale_W is defined on regular trees")
    if n > sample.depth:
        raise OutOfDepth(f"radius {n} beyond sample depth {sample.depth}")
    level = [(ROOT, 0.0)]
    for _ in range(n):
        nxt = []
        for v, s in level:
            for child in iter_children(sample.spec, v):
                e_t = OrientedEdge(v, child, EdgeDirection.TOWARD_ROOT)
                e_a = OrientedEdge(v, child, EdgeDirection.AWAY_FROM_ROOT)
                nxt.append((child, s + sample.x_value(e_t) + sample.x_value(e_a)))
        level = nxt
    return math.fsum(math.exp(0.5 * s) for _, s in level)


def _level_sums(
    spec: TreeSpec,
    pair: MeasurePair,
    depth: int,
    trials: int,
    seed: int,
    scale: float,
    threads: int,
    vertex_cap: int = DEFAULT_VERTEX_CAP,
) -> np.ndarray:
    nverts = ball_size(spec, depth)
    if nverts > vertex_cap:
        raise DepthBudget(nverts, vertex_cap)
    cum_t, cum_a, val_t, val_a = _pair_tables(pair)
    parts = _run_trial_chunks(
        trials,
        threads,
        lambda lo, hi: kernels.tree_level_sums(
            spec.root_degree, spec.branching, depth, seed, lo, hi,
            cum_t, cum_a, val_t, val_a, scale,
        ),
    )
    return parts[0] if len(parts) == 1 else np.concatenate(parts, axis=0)


def martingale_mc(
    spec: TreeSpec,
    pair: MeasurePair,
    depth: int,
    trials: int,
    seed: int = 0,
    threads: Optional[int] = None,
) -> np.ndarray:
    """Per-trial sphere sums W_n for n = 0..depth, shape (trials, depth+1).

    Row t reproduces ``martingale_W`` on the field sampled with the
    derived per-trial seed.
    """
    if spec.kind != REGULAR:
        raise SpecMismatch("the sphere martingale is defined on regular trees")
    if trials < 1 or depth < 0:
        raise ParameterOutOfRange("need trials >= 1 and depth >= 0")
    return _level_sums(spec, pair, depth, trials, seed, 0.5, resolve_threads(threads))


def sqrt_rn_samples(
    d: int,
    pair: MeasurePair,
    g: FreeWord,
    trials: int,
    seed: int = 0,
    threads: Optional[int] = None,
) -> np.ndarray:
    """Per-trial sqrt of the Radon-Nikodym derivative of the g-translate.

    Only the geodesic coordinates are drawn, so arbitrarily long words stay
    cheap as long as they fit the counter width.
    """
    spec = TreeSpec.cayley(d)
    if trials < 1:
        raise ParameterOutOfRange("need trials >= 1")
    if len(g) == 0:
        return np.ones(trials, dtype=np.float64)
    cum_t, cum_a, val_t, val_a = _pair_tables(pair)
    vids = np.asarray(
        [vertex_index(spec, Vertex(g.letters[:k])) for k in range(1, len(g) + 1)],
        dtype=np.uint64,
    )
    c_toward = np.uint64(2) * vids
    c_away = c_toward + np.uint64(1)

    def run(lo, hi):
        ts = kernels.derive_seeds(seed, lo, hi)
        i_t = kernels.symbol_grid(ts, c_toward, cum_t)
        i_a = kernels.symbol_grid(ts, c_away, cum_a)
        s = val_t[i_t].sum(axis=1) + val_a[i_a].sum(axis=1)
        return np.exp(0.5 * s)

    parts = _run_trial_chunks(trials, resolve_threads(threads), run)
    return parts[0] if len(parts) == 1 else np.concatenate(parts)


class RecurrenceVerdict(Enum):
    RECURRENT_EVIDENCE = "RecurrentEvidence"
    DISSIPATIVE_EVIDENCE = "DissipativeEvidence"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True, eq=False)
class RecurrenceDiagnostic:
    """Growth-regression evidence for the recurrence dichotomy.

    ``log_T`` holds per-trial log partial sums, one row per trial and one
    column per depth.  The verdict is evidence, not a certificate:
    RecurrentEvidence requires the 99% slope CI to clear ``slope_floor``
    with essentially no converged trials, DissipativeEvidence requires at
    least ``converged_quantile`` of the trials to show a tail increment
    below ``epsilon`` and the slope CI to sit below the floor.  Everything
    else is Inconclusive, the honest output near a phase boundary.
    """

    depths: tuple
    log_T: np.ndarray
    slope: float
    slope_ci: tuple
    verdict: RecurrenceVerdict
    epsilon: float
    slope_floor: float
    converged_fraction: float
    truncation_bias: bool = False


def _per_trial_slopes(log_t: np.ndarray, lo: int, hi: int) -> np.ndarray:
    xs = np.arange(lo, hi + 1, dtype=np.float64)
    ys = log_t[:, lo : hi + 1]
    xc = xs - xs.mean()
    return (ys - ys.mean(axis=1, keepdims=True)) @ xc / float(np.dot(xc, xc))


def _slope_ci(slopes: np.ndarray):
    mean = float(slopes.mean())
    if slopes.size > 1:
        sd = float(slopes.std(ddof=1))
        half = _Z99 * sd / math.sqrt(slopes.size)
    else:
        half = 0.0
    return mean, (mean - half, mean + half)


def _growth_verdict(ci, converged_fraction, slope_floor, quantile):
    lo, hi = ci
    if converged_fraction >= quantile and hi < slope_floor:
        return RecurrenceVerdict.DISSIPATIVE_EVIDENCE
    if lo > slope_floor and converged_fraction < quantile:
        return RecurrenceVerdict.RECURRENT_EVIDENCE
    return RecurrenceVerdict.INCONCLUSIVE


def recurrence_diagnostic(
    spec: TreeSpec,
    pair: MeasurePair,
    depth: int,
    trials: int,
    seed: int = 0,
    epsilon: float = DEFAULT_EPSILON,
    slope_floor: float = DEFAULT_SLOPE_FLOOR,
    converged_quantile: float = DEFAULT_CONVERGED_QUANTILE,
    threads: Optional[int] = None,
) -> RecurrenceDiagnostic:
    """Growth diagnostics of the orbital partial sums T_n over a truncation.

    T_n sums exp(S_v) over the ball of radius n; per-trial regressions of
    log T_n on n over the upper half window feed a 99% CI, and a trial
    counts as converged when its smallest tail relative increment
    (T_n - T_{n-1}) / T_n over the last two thirds of the window drops
    below ``epsilon``.
    """
    if trials < 30:
        raise ParameterOutOfRange("need trials >= 30")
    if depth < 4:
        raise ParameterOutOfRange("need depth >= 4")
    level = _level_sums(spec, pair, depth, trials, seed, 1.0, resolve_threads(threads))
    t_sums = np.cumsum(level, axis=1)
    log_t = np.log(t_sums)

    reg_lo = (depth + 1) // 2
    slopes = _per_trial_slopes(log_t, reg_lo, depth)
    slope, ci = _slope_ci(slopes)

    tail_lo = max(2, -(-depth // 3))
    rel = level[:, tail_lo : depth + 1] / t_sums[:, tail_lo : depth + 1]
    tail_min = rel.min(axis=1)
    frac = float(np.mean(tail_min < epsilon))

    verdict = _growth_verdict(ci, frac, slope_floor, converged_quantile)
    return RecurrenceDiagnostic(
        depths=tuple(range(depth + 1)),
        log_T=log_t,
        slope=slope,
        slope_ci=ci,
        verdict=verdict,
        epsilon=epsilon,
        slope_floor=slope_floor,
        converged_fraction=frac,
    )


@dataclass(frozen=True)
class CouplingTestResult:
    statistic: float
    p_value: float
    observed: tuple
    expected: tuple
    samples: int
    t: float


def coupling_pushforward_test(
    nu: DiscreteMeasure,
    mu: DiscreteMeasure,
    t: float,
    samples: int,
    seed: int = 0,
) -> CouplingTestResult:
    """Chi-square test of the coin-selection coupling against the mixture.

    Draws (x, x', j) with x from mu, x' from nu and a coin j that picks the
    mu coordinate with probability t; the pushed-forward law must match
    mix(nu, mu, t).
    """
    if not 0.0 <= t <= 1.0:
        raise ParameterOutOfRange(f"t={t!r} not in [0, 1]")
    if samples < 1000:
        raise ParameterOutOfRange("need samples >= 1000")
    target = mix(nu, mu, t)
    cum_mu = np.cumsum(np.asarray(mu.weights, dtype=np.float64))
    cum_nu = np.cumsum(np.asarray(nu.weights, dtype=np.float64))
    k = mu.size

    state = kernels.derive_seeds(seed, 0, 1)
    counters = np.arange(3 * samples, dtype=np.uint64)
    u = kernels.uniform_grid(state, counters)[0]
    x = np.minimum(np.searchsorted(cum_mu, u[0::3], side="right"), k - 1)
    x_alt = np.minimum(np.searchsorted(cum_nu, u[1::3], side="right"), k - 1)
    pick_mu = u[2::3] < t
    chosen = np.where(pick_mu, x, x_alt)

    observed = np.bincount(chosen, minlength=k).astype(np.float64)
    expected = samples * target.as_array()
    statistic = float(np.sum((observed - expected) ** 2 / expected))

    from scipy.stats import chi2

    p_value = float(chi2.sf(statistic, df=k - 1))
    return CouplingTestResult(
        statistic=statistic,
        p_value=p_value,
        observed=tuple(int(c) for c in observed),
        expected=tuple(float(e) for e in expected),
        samples=samples,
        t=t,
    )


def block_sum_distribution(pair: MeasurePair, M: int) -> ScalarDistribution:
    """Exact law of the sum of M independent two-sided log-ratio blocks."""
    if M < 1:
        raise ParameterOutOfRange(f"block length M={M} must be >= 1")
    z = convolve(
        log_ratio_distribution(pair, Direction.TOWARD_ROOT),
        log_ratio_distribution(pair, Direction.AWAY_FROM_ROOT),
    )
    out = z
    for _ in range(M - 1):
        out = convolve(out, z)
    return out


def find_block_length(pair: MeasurePair, delta: float, M_max: int) -> int:
    """Smallest M with P(R_M >= 0) > exp(-M * delta).

    Short-circuits to NoBlockLength when the Chernoff bound already rules
    success out: P(R_M >= 0) <= (inf phi)^M, so inf phi <= exp(-delta)
    makes the target unreachable for every M.
    """
    if delta <= 0.0:
        raise ParameterOutOfRange(f"delta={delta!r} must be positive")
    if M_max < 1:
        raise ParameterOutOfRange(f"M_max={M_max} must be >= 1")
    _, inf_phi = chernoff_min(pair)
    bound = math.exp(-delta)
    if inf_phi <= bound:
        raise NoBlockLength(
            NoBlockLength.BOUND_IMPOSSIBLE,
            f"inf phi = {inf_phi!r} <= exp(-delta) = {bound!r}",
        )
    z = block_sum_distribution(pair, 1)
    r_m = z
    for m in range(1, M_max + 1):
        if r_m.tail_prob(0.0) > math.exp(-m * delta):
            return m
        if m < M_max:
            r_m = convolve(r_m, z)
    raise NoBlockLength(NoBlockLength.MMAX_EXHAUSTED, f"no M <= {M_max} works")


@dataclass(frozen=True)
class PercolationReport:
    """Block percolation summary on the derived tree.

    ``survival`` solves the Galton-Watson fixed point for the per-vertex
    offspring law Binomial(branching**M, p).  ``mc_survival`` estimates the
    same quantity from sampled fields through the frontier transform
    1 - extinction**Z, whose expectation is exactly the survival
    probability at any truncation depth; ``mc_reach`` is the raw fraction
    of components alive at the truncation depth, biased upward near
    criticality.
    """

    M: int
    p: float
    criterion: float
    supercritical: bool
    survival: float
    mc_survival: Optional[float] = None
    mc_reach: Optional[float] = None
    mc_trials: Optional[int] = None
    mc_depth: Optional[int] = None


def _gw_extinction(offspring: int, p: float, tol: float = 1e-15) -> float:
    """Smallest fixed point of ((1-p) + p s)^offspring on [0, 1]."""
    if offspring * p <= 1.0:
        return 1.0
    s = 0.0
    for _ in range(2_000_000):
        s_next = ((1.0 - p) + p * s) ** offspring
        if abs(s_next - s) <= tol:
            return s_next
        s = s_next
    return s


def _percolation_frontier(
    spec: TreeSpec,
    pair: MeasurePair,
    M: int,
    gens: int,
    trials: int,
    seed: int,
    threads: int,
):
    """Frontier sizes of the percolated component below the distinguished
    depth-M vertex, with retained/candidate block-edge counts.

    Returns (counts, retained, candidates) where counts[t] is the number of
    component vertices at generation ``gens`` in trial t.
    """
    r = spec.branching
    cum_t, cum_a, val_t, val_a = _pair_tables(pair)
    child_steps = np.arange(r, dtype=np.int64)

    def run(lo, hi):
        n = hi - lo
        tseeds = kernels.derive_seeds(seed, lo, hi)
        tix = np.arange(n, dtype=np.int64)
        j = np.zeros(n, dtype=np.int64)
        level = M
        retained = 0
        candidates = 0
        for _ in range(gens):
            if tix.size == 0:
                break
            rows = np.arange(tix.size, dtype=np.int64)
            jj = j
            sums = np.zeros(tix.size, dtype=np.float64)
            for m in range(1, M + 1):
                parent = np.repeat(rows, r)
                jj = np.repeat(jj, r) * r + np.tile(child_steps, rows.size)
                sums = np.repeat(sums, r)
                vids = (level_offset(spec, level + m) + jj).astype(np.uint64)
                ts_rows = tseeds[tix[parent]]
                i_t = kernels.pair_symbols(ts_rows, np.uint64(2) * vids, cum_t)
                i_a = kernels.pair_symbols(ts_rows, np.uint64(2) * vids + np.uint64(1), cum_a)
                sums = sums + val_t[i_t] + val_a[i_a]
                rows = parent
            candidates += sums.size
            keep = sums >= 0.0
            retained += int(np.count_nonzero(keep))
            tix = tix[rows[keep]]
            j = jj[keep]
            level += M
        counts = np.bincount(tix, minlength=n).astype(np.int64)
        return counts, retained, candidates

    parts = _run_trial_chunks(trials, threads, run, chunk=_PERC_CHUNK)
    counts = np.concatenate([p[0] for p in parts]) if len(parts) > 1 else parts[0][0]
    retained = sum(p[1] for p in parts)
    candidates = sum(p[2] for p in parts)
    return counts, retained, candidates


def percolation_report(
    spec: TreeSpec,
    pair: MeasurePair,
    M: int,
    mc_trials: Optional[int] = None,
    seed: int = 0,
    mc_depth: int = 14,
    threads: Optional[int] = None,
) -> PercolationReport:
    """Retention probability, survival criterion and Galton-Watson survival
    for block percolation, with an optional field-sampled estimate.

    Block edges over edge-disjoint geodesic segments retain independently,
    so the derived-tree process is exactly Bernoulli with
    p = P(R_M >= 0)."""
    r_m = block_sum_distribution(pair, M)
    p = r_m.tail_prob(0.0)
    branching = spec.branching
    criterion = p * float(branching) ** M
    offspring = branching**M
    extinction = _gw_extinction(offspring, p)
    survival = 1.0 - extinction

    mc_survival = None
    mc_reach = None
    if mc_trials:
        if mc_trials < 1:
            raise ParameterOutOfRange("mc_trials must be >= 1")
        gens = mc_depth // M - 1
        if gens < 1:
            raise ParameterOutOfRange(f"mc_depth={mc_depth} too shallow for M={M}")
        counts, _, _ = _percolation_frontier(
            spec, pair, M, gens, mc_trials, seed, resolve_threads(threads)
        )
        mc_survival = float(np.mean(1.0 - extinction ** counts.astype(np.float64)))
        mc_reach = float(np.mean(counts > 0))
    return PercolationReport(
        M=M,
        p=p,
        criterion=criterion,
        supercritical=criterion > 1.0,
        survival=survival,
        mc_survival=mc_survival,
        mc_reach=mc_reach,
        mc_trials=mc_trials,
        mc_depth=mc_depth if mc_trials else None,
    )


def ks_family(t: float, n: int) -> float:
    """Head weight of the integer-indexed two-point family at site n:
    1/2 up to the cutoff 4t^2, then 1/2 + t/sqrt(n)."""
    if t < 0.0:
        raise ParameterOutOfRange(f"t={t!r} must be nonnegative")
    if n <= 4.0 * t * t:
        return 0.5
    return 0.5 + t / math.sqrt(n)


def shift_recurrence_diagnostic(
    t: float,
    window: int,
    trials: int,
    seed: int = 0,
    epsilon: Optional[float] = None,
    slope_floor: Optional[float] = None,
    converged_quantile: float = DEFAULT_CONVERGED_QUANTILE,
    threads: Optional[int] = None,
) -> RecurrenceDiagnostic:
    """Growth diagnostics for the integer shift of the two-point family.

    Coordinates are sampled for |n| <= 2*window, the translate density is
    truncated to the inner window, and partial sums over shifts |k| <= m
    feed the same regression machinery as the tree diagnostic.  The
    truncated product is biased, so the report carries a warning flag.
    Both the slope floor and the Cauchy threshold scale like 1/window:
    the conservative regime grows polynomially here, not exponentially,
    so its tail increments shrink like 1/m even when the sums diverge.
    """
    if window < 16:
        raise ParameterOutOfRange("need window >= 16")
    if trials < 30:
        raise ParameterOutOfRange("need trials >= 30")
    if slope_floor is None:
        slope_floor = 1.0 / (4.0 * window)
    if epsilon is None:
        epsilon = 1.0 / (8.0 * window)

    w = window
    q_all = np.asarray([ks_family(t, n) for n in range(-2 * w, 2 * w + 1)])

    # Sample x_n for |n| <= 2w; only |n| <= w enters the truncated product.
    tseeds = kernels.derive_seeds(seed, 0, trials)
    counters = np.arange(4 * w + 1, dtype=np.uint64)
    u = kernels.uniform_grid(tseeds, counters)
    x = (u >= q_all[None, :]).astype(np.float64)

    inner = slice(w, 3 * w + 1)  # n in [-w, w]
    x0 = 1.0 - x[:, inner]
    x1 = x[:, inner]

    log_q = np.log(q_all)
    log_1q = np.log1p(-q_all)
    ks = np.arange(-w, w + 1)
    ns = np.arange(-w, w + 1)
    # Index into q_all: coordinate j maps to j + 2w.
    shifted = (ns[None, :] - ks[:, None]) + 2 * w
    base = ns + 2 * w
    d0 = log_q[shifted] - log_q[base][None, :]
    d1 = log_1q[shifted] - log_1q[base][None, :]
    log_p = x0 @ d0.T + x1 @ d1.T  # (trials, 2w+1), column i is shift k=i-w

    log_t = np.empty((trials, w + 1), dtype=np.float64)
    log_t[:, 0] = log_p[:, w]
    for m in range(1, w + 1):
        both = np.logaddexp(log_p[:, w + m], log_p[:, w - m])
        log_t[:, m] = np.logaddexp(log_t[:, m - 1], both)

    reg_lo = (w + 1) // 2
    slopes = _per_trial_slopes(log_t, reg_lo, w)
    slope, ci = _slope_ci(slopes)

    tail_lo = max(2, -(-w // 3))
    rel = 1.0 - np.exp(log_t[:, tail_lo - 1 : w] - log_t[:, tail_lo : w + 1])
    tail_min = np.maximum(rel, 0.0).min(axis=1)
    frac = float(np.mean(tail_min < epsilon))

    verdict = _growth_verdict(ci, frac, slope_floor, converged_quantile)
    return RecurrenceDiagnostic(
        depths=tuple(range(w + 1)),
        log_T=log_t,
        slope=slope,
        slope_ci=ci,
        verdict=verdict,
        epsilon=epsilon,
        slope_floor=slope_floor,
        converged_fraction=frac,
        truncation_bias=True,
    )
