"""Exact arithmetic on finite probability measures.

Base spaces are finite alphabets carrying strictly positive weights, so
every quantity in this module (Hellinger geometry, log-likelihood laws,
moment generating functions, Chernoff minima, essential-range subgroups)
is computed exactly up to float rounding.  All types are immutable after
construction and safe to share across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import (
    AlphabetMismatch,
    AtomBudgetExceeded,
    NonPositiveWeight,
    NotNormalized,
    ParameterOutOfRange,
)

NORMALIZATION_TOL = 1e-9
MERGE_TOL = 1e-12
DEFAULT_ATOM_CAP = 10**6

# Lattice-vs-dense detection is a bounded heuristic; these caps make it
# reproducible and testable.
TRIVIAL_TOL = 1e-12
LATTICE_TOL = 1e-9
MAX_DENOMINATOR = 10**6


class Direction(Enum):
    TOWARD_ROOT = "TowardRoot"
    AWAY_FROM_ROOT = "AwayFromRoot"


@dataclass(frozen=True)
class DiscreteMeasure:
    """Strictly positive probability weights on a finite alphabet.

    Zero weights are rejected at construction: the whole framework assumes
    the measures on a common alphabet are equivalent.
    """

    weights: tuple

    @property
    def size(self) -> int:
        return len(self.weights)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=np.float64)

    def mass(self, values: Sequence[float]) -> float:
        """Integral of a function given by its value on each symbol."""
        return float(np.dot(self.as_array(), np.asarray(values, dtype=np.float64)))


def make_measure(weights: Sequence[float]) -> DiscreteMeasure:
    """Validate weights and wrap them; no silent renormalization."""
    ws = [float(w) for w in weights]
    if not ws:
        raise NonPositiveWeight(0, None)
    for i, w in enumerate(ws):
        if not (w > 0.0) or not math.isfinite(w):
            raise NonPositiveWeight(i, w)
    total = math.fsum(ws)
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(total)
    return DiscreteMeasure(tuple(ws))


@dataclass(frozen=True)
class MeasurePair:
    """Ordered pair of equivalent measures with cached log-ratios.

    ``log_ratios[i] = log(mu0[i]) - log(mu1[i])`` in nats, stored exactly
    as computed so that downstream laws built from the same pair share
    bit-identical atom values.
    """

    mu0: DiscreteMeasure
    mu1: DiscreteMeasure
    log_ratios: tuple

    @property
    def size(self) -> int:
        return self.mu0.size


def make_pair(mu0: DiscreteMeasure, mu1: DiscreteMeasure) -> MeasurePair:
    if mu0.size != mu1.size:
        raise AlphabetMismatch(mu0.size, mu1.size)
    ratios = tuple(
        math.log(a) - math.log(b) for a, b in zip(mu0.weights, mu1.weights)
    )
    return MeasurePair(mu0, mu1, ratios)


def hellinger_sq(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Squared Hellinger distance, 1 minus the Bhattacharyya sum."""
    if mu.size != nu.size:
        raise AlphabetMismatch(mu.size, nu.size)
    s = math.fsum(math.sqrt(a * b) for a, b in zip(mu.weights, nu.weights))
    return max(0.0, 1.0 - s)


def affinity(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Bhattacharyya sum, the companion of :func:`hellinger_sq`."""
    if mu.size != nu.size:
        raise AlphabetMismatch(mu.size, nu.size)
    return math.fsum(math.sqrt(a * b) for a, b in zip(mu.weights, nu.weights))


def mix(nu: DiscreteMeasure, mu: DiscreteMeasure, t: float) -> DiscreteMeasure:
    """Convex combination (1-t)*nu + t*mu, componentwise."""
    if nu.size != mu.size:
        raise AlphabetMismatch(nu.size, mu.size)
    if not 0.0 <= t <= 1.0:
        raise ParameterOutOfRange(f"interpolation parameter t={t!r} not in [0, 1]")
    return DiscreteMeasure(
        tuple((1.0 - t) * a + t * b for a, b in zip(nu.weights, mu.weights))
    )


@dataclass(frozen=True)
class ScalarDistribution:
    """Finite real-valued law with strictly increasing atom values."""

    values: tuple
    probs: tuple

    def __len__(self) -> int:
        return len(self.values)

    def values_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    def probs_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=np.float64)

    def tail_prob(self, threshold: float) -> float:
        """P(value >= threshold)."""
        return math.fsum(p for v, p in zip(self.values, self.probs) if v >= threshold)


def make_distribution(
    values: Sequence[float],
    probs: Sequence[float],
    merge_tol: float = MERGE_TOL,
) -> ScalarDistribution:
    """Build a law from raw atoms, merging values closer than ``merge_tol``.

    Each merge cluster is represented by its highest-probability member, so
    exact values (in particular exact zeros arising from cancelling
    log-ratios) survive the presence of nearby rounding noise.
    """
    vals = np.asarray(values, dtype=np.float64)
    ps = np.asarray(probs, dtype=np.float64)
    if vals.shape != ps.shape or vals.ndim != 1 or vals.size == 0:
        raise ParameterOutOfRange("atoms must be one nonempty value/prob pair list")
    if np.any(ps <= 0.0):
        raise ParameterOutOfRange("atom probabilities must be strictly positive")
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    ps = ps[order]

    out_vals: list = []
    out_probs: list = []
    start = 0
    n = vals.size
    while start < n:
        stop = start + 1
        while stop < n and vals[stop] - vals[start] <= merge_tol:
            stop += 1
        cluster_p = ps[start:stop]
        rep = vals[start + int(np.argmax(cluster_p))]
        out_vals.append(float(rep))
        out_probs.append(float(math.fsum(cluster_p.tolist())))
        start = stop
    total = math.fsum(out_probs)
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(total)
    return ScalarDistribution(tuple(out_vals), tuple(out_probs))


def point_mass(value: float = 0.0) -> ScalarDistribution:
    return ScalarDistribution((float(value),), (1.0,))


def log_ratio_distribution(pair: MeasurePair, direction: Direction) -> ScalarDistribution:
    """Law of the per-site log-likelihood ratio.

    ``TowardRoot`` is the law of log(dmu1/dmu0) under mu0 and
    ``AwayFromRoot`` the law of log(dmu0/dmu1) under mu1.  Either way
    E[exp(value/2)] equals the affinity of the pair.
    """
    if direction is Direction.TOWARD_ROOT:
        values = [-r for r in pair.log_ratios]
        probs = pair.mu0.weights
    else:
        values = list(pair.log_ratios)
        probs = pair.mu1.weights
    return make_distribution(values, probs)


def convolve(
    a: ScalarDistribution,
    b: ScalarDistribution,
    atom_cap: int = DEFAULT_ATOM_CAP,
) -> ScalarDistribution:
    """Exact law of the sum of independent samples from ``a`` and ``b``."""
    count = len(a) * len(b)
    if count > atom_cap:
        raise AtomBudgetExceeded(count, atom_cap)
    va = a.values_array()
    vb = b.values_array()
    pa = a.probs_array()
    pb = b.probs_array()
    vals = (va[:, None] + vb[None, :]).ravel()
    probs = (pa[:, None] * pb[None, :]).ravel()
    return make_distribution(vals, probs)


def mgf(d: ScalarDistribution, t: float) -> float:
    """Moment generating function E[exp(t * value)]; finite for all t."""
    return float(np.dot(d.probs_array(), np.exp(t * d.values_array())))


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def chernoff_min(pair: MeasurePair) -> tuple:
    """Minimize the MGF of the two-sided log-ratio sum over [0, 1].

    The law of the sum of one draw from each directional law is symmetric
    in the MGF sense (phi(t) = phi(1-t)) and convex, so the infimum over
    t >= 0 is attained at 1/2 and equals affinity squared.  A golden
    section search over [0, 1] recovers both facts numerically and returns
    ``(t_star, value)``.
    """
    z = convolve(
        log_ratio_distribution(pair, Direction.TOWARD_ROOT),
        log_ratio_distribution(pair, Direction.AWAY_FROM_ROOT),
    )
    if len(z) == 1:
        # Equal measures: phi is identically one.
        return 0.5, mgf(z, 0.0)

    lo, hi = 0.0, 1.0
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc = mgf(z, c)
    fd = mgf(z, d)
    while hi - lo > 1e-11:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = mgf(z, c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = mgf(z, d)
    t_star = 0.5 * (lo + hi)
    return t_star, mgf(z, t_star)


class RangeKind(Enum):
    TRIVIAL = "Trivial"
    LATTICE = "Lattice"
    DENSE = "Dense"


@dataclass(frozen=True)
class RangeGroupReport:
    """Smallest closed subgroup of the reals containing the examined set.

    ``Dense`` is a fallback verdict: commensurability cannot be decided
    from floats, so the detection is a bounded heuristic (generator search
    down to 1e-6 of the largest difference, rational cross-check with
    denominators up to 10**6) and non-trivial verdicts carry the
    ``heuristic`` flag.
    """

    kind: RangeKind
    generator: Optional[float]
    witnesses: tuple
    heuristic: bool


def _real_gcd(a: float, b: float, stop: float) -> float:
    a, b = abs(a), abs(b)
    if a < b:
        a, b = b, a
    while b > stop:
        a, b = b, math.fmod(a, b)
    return a


def _rational_check(x: float, tol: float) -> Optional[Fraction]:
    frac = Fraction(x).limit_denominator(MAX_DENOMINATOR)
    if abs(x - float(frac)) <= tol:
        return frac
    return None


def essential_range_group(
    pair: MeasurePair,
    delta_log_generators: Optional[Sequence[float]] = None,
) -> RangeGroupReport:
    """Classify the group generated by pairwise log-ratio differences.

    Optional extra generators (log values of a modular function, supplied
    by the caller) are appended to the examined set before the search.
    """
    ratios = pair.log_ratios
    diffs = [ratios[i] - ratios[j] for i in range(len(ratios)) for j in range(len(ratios)) if i != j]
    if delta_log_generators:
        diffs.extend(float(g) for g in delta_log_generators)

    witnesses: list = []
    for d in sorted(diffs):
        if not witnesses or d - witnesses[-1] > TRIVIAL_TOL:
            witnesses.append(d)
    witnesses_t = tuple(witnesses)

    nonzero = sorted({abs(d) for d in witnesses if abs(d) > TRIVIAL_TOL})
    if not nonzero:
        return RangeGroupReport(RangeKind.TRIVIAL, None, witnesses_t, False)

    dense = RangeGroupReport(RangeKind.DENSE, None, witnesses_t, True)
    largest = nonzero[-1]

    g = nonzero[0]
    for d in nonzero[1:]:
        g = _real_gcd(g, d, stop=LATTICE_TOL)
    if g <= largest / MAX_DENOMINATOR:
        return dense

    # Least-squares refinement of the generator through the integer
    # multiples found so far, then the actual multiple test.
    ks = [round(d / g) for d in nonzero]
    num = math.fsum(k * d for k, d in zip(ks, nonzero))
    den = math.fsum(k * k for k in ks)
    if den == 0:
        return dense
    g = num / den
    if g <= 0.0 or not all(abs(d - round(d / g) * g) <= LATTICE_TOL for d in nonzero):
        return dense

    # Cross-check: every ratio to the candidate generator must look like a
    # bounded-denominator rational that is in fact an integer.
    for d in nonzero:
        frac = _rational_check(d / g, tol=LATTICE_TOL / g)
        if frac is None or frac.denominator != 1:
            return dense
    return RangeGroupReport(RangeKind.LATTICE, g, witnesses_t, True)


def site_contraction_norm(nu: DiscreteMeasure, mu: DiscreteMeasure, t: float) -> float:
    """Operator norm of the single-site averaging map on mean-zero functions.

    The map F -> t*F + (1-t)*nu(F)*1 is viewed from the mean-zero subspace
    of the space weighted by mix(nu, mu, t) into the space weighted by mu.
    Its largest singular value is guaranteed to stay below sqrt(t).
    """
    if nu.size != mu.size:
        raise AlphabetMismatch(nu.size, mu.size)
    if not 0.0 < t <= 1.0:
        raise ParameterOutOfRange(f"t={t!r} not in (0, 1]")
    m_t = mix(nu, mu, t).as_array()
    m = mu.as_array()
    n = nu.as_array()
    k = m.size
    if k == 1:
        return 0.0

    # Orthonormal basis (in the m_t inner product) of the mean-zero subspace.
    _, _, vt = np.linalg.svd(m_t[None, :])
    null = vt[1:].T  # (k, k-1), euclidean-orthonormal complement of m_t
    gram = null.T @ (m_t[:, None] * null)
    basis = null @ np.linalg.inv(np.linalg.cholesky(gram)).T

    mapped = t * basis + (1.0 - t) * np.outer(np.ones(k), n @ basis)
    weighted = np.sqrt(m)[:, None] * mapped
    return float(np.linalg.svd(weighted, compute_uv=False)[0])
