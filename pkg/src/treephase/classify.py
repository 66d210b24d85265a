"""Exact phase classification from closed-form thresholds.

Everything here is theorem-certified arithmetic: compare the affinity of
the edge-measure pair against exp(-delta/2), map the essential-range
subgroup to a Krieger flow, evaluate the free-group spectral radius, and
locate the interpolation parameter where a family crosses the threshold.
Monte Carlo evidence lives in :mod:`treephase.simulate`; the two layers
are kept separate on purpose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import ParameterOutOfRange
from .measures import (
    DiscreteMeasure,
    MeasurePair,
    RangeGroupReport,
    RangeKind,
    affinity,
    essential_range_group,
    mix,
)

CRITICAL_TOL = 1e-12
T1_RESIDUAL_TOL = 1e-9


class Phase(Enum):
    DISSIPATIVE = "Dissipative"
    WEAKLY_MIXING = "WeaklyMixing"
    CRITICAL_DISSIPATIVE = "CriticalDissipative"
    CRITICAL_UNKNOWN = "CriticalUnknown"


@dataclass(frozen=True)
class Classification:
    phase: Phase
    affinity: float
    threshold: float
    delta: float


def classify_tree_action(
    delta: float, pair: MeasurePair, regular_full_orbit: bool = False
) -> Classification:
    """Threshold classification of the edge-indexed product action.

    Above exp(-delta/2) the verdict is weakly mixing, below it dissipative
    (up to compact stabilizers).  At the critical value the dissipative
    verdict is only available on a regular tree whose full vertex orbit
    attains the exponent, which the caller asserts via
    ``regular_full_orbit``; otherwise the critical case is reported as
    unknown.
    """
    if delta <= 0.0 or not math.isfinite(delta):
        raise ParameterOutOfRange(f"delta={delta!r} must be positive and finite")
    aff = affinity(pair.mu0, pair.mu1)
    threshold = math.exp(-delta / 2.0)
    if abs(aff - threshold) <= CRITICAL_TOL:
        phase = Phase.CRITICAL_DISSIPATIVE if regular_full_orbit else Phase.CRITICAL_UNKNOWN
    elif aff > threshold:
        phase = Phase.WEAKLY_MIXING
    else:
        phase = Phase.DISSIPATIVE
    return Classification(phase=phase, affinity=aff, threshold=threshold, delta=delta)


class KriegerKind(Enum):
    FLOW_IS_TRANSLATION = "FlowIsTranslation"
    TYPE_III_LAMBDA = "TypeIIIlambda"
    TYPE_III_1 = "TypeIII1"


@dataclass(frozen=True)
class KriegerFlow:
    kind: KriegerKind
    lam: Optional[float] = None


@dataclass(frozen=True)
class KriegerReport:
    """Krieger flow (and flow of weights, when modular generators are
    supplied) derived from the essential-range subgroup.

    The trichotomy holds in the weakly mixing regime; this report does not
    verify that precondition itself and records the caveat instead.
    """

    lambda_group: RangeGroupReport
    krieger: KriegerFlow
    flow_of_weights: KriegerFlow
    caveat: str


_KRIEGER_CAVEAT = (
    "valid when the action is weakly mixing (affinity above exp(-delta/2)); "
    "not verified here"
)


def _flow_from_range(report: RangeGroupReport) -> KriegerFlow:
    if report.kind is RangeKind.TRIVIAL:
        return KriegerFlow(KriegerKind.FLOW_IS_TRANSLATION)
    if report.kind is RangeKind.LATTICE:
        return KriegerFlow(KriegerKind.TYPE_III_LAMBDA, math.exp(-report.generator))
    return KriegerFlow(KriegerKind.TYPE_III_1)


def krieger_type(
    pair: MeasurePair, delta_log_generators: Optional[Sequence[float]] = None
) -> KriegerReport:
    """Map the essential-range subgroup to the Krieger flow.

    Trivial range gives a translation flow (an equivalent invariant
    measure exists), a lattice with generator a gives type III_lambda with
    lambda = exp(-a), a dense range gives type III_1.  Discrete groups
    have trivial modular function, so without extra generators the flow of
    weights coincides with the Krieger flow.
    """
    lambda_group = essential_range_group(pair)
    krieger = _flow_from_range(lambda_group)
    if delta_log_generators:
        sigma_group = essential_range_group(pair, delta_log_generators)
        weights_flow = _flow_from_range(sigma_group)
    else:
        weights_flow = krieger
    return KriegerReport(
        lambda_group=lambda_group,
        krieger=krieger,
        flow_of_weights=weights_flow,
        caveat=_KRIEGER_CAVEAT,
    )


class SpectralRegime(Enum):
    DISSIPATIVE = "Dissipative"
    WEAKLY_MIXING_NONAMENABLE = "WeaklyMixingNonamenable"
    STRONGLY_ERGODIC = "StronglyErgodic"


@dataclass(frozen=True)
class SpectralReport:
    rho_action: float
    rho_group: float
    regime: SpectralRegime
    affinity: float
    d: int


def spectral_radius_free(d: int, pair: MeasurePair) -> SpectralReport:
    """Spectral radius of the averaged Koopman operator for the rank-d
    free group acting on its Cayley tree.

    Below the strong-ergodicity threshold (2d-1)^(-1/4) the radius sticks
    at the regular-representation value sqrt(2d-1)/d; above it the
    explicit rational expression in the affinity takes over.  The two
    branches agree at the kink.
    """
    if d < 2:
        raise ParameterOutOfRange(f"free group rank d={d} must be >= 2")
    aff = affinity(pair.mu0, pair.mu1)
    q = 2 * d - 1
    rho_group = math.sqrt(q) / d
    kink = q ** (-0.25)
    if aff > kink:
        rho_action = (aff * aff / (2 * d)) * (q + aff**-4)
    else:
        rho_action = rho_group
    if aff <= q ** (-0.5):
        regime = SpectralRegime.DISSIPATIVE
    elif aff <= kink:
        regime = SpectralRegime.WEAKLY_MIXING_NONAMENABLE
    else:
        regime = SpectralRegime.STRONGLY_ERGODIC
    return SpectralReport(
        rho_action=rho_action, rho_group=rho_group, regime=regime, affinity=aff, d=d
    )


@dataclass(frozen=True)
class PhaseScanResult:
    """Affinity curve of the interpolated family against the threshold.

    ``t1`` is reported only when the curve crosses the threshold exactly
    once on the grid; with zero or multiple sign changes it stays absent
    and ``crossings`` carries the count.  A present ``t1`` satisfies
    |affinity(t1) - threshold| <= 1e-9.
    """

    grid: tuple
    threshold: float
    t1: Optional[float]
    crossings: int
    monotone: bool
    delta: float


def _interp_affinity(nu: DiscreteMeasure, pair: MeasurePair, t: float) -> float:
    return affinity(mix(nu, pair.mu0, t), mix(nu, pair.mu1, t))


def phase_scan(
    delta: float,
    nu: DiscreteMeasure,
    pair: MeasurePair,
    grid_points: int = 129,
    bisect_tol: float = 1e-10,
) -> PhaseScanResult:
    """Scan the interpolation parameter for the threshold crossing.

    Evaluates the affinity of (mix(nu, mu0, t), mix(nu, mu1, t)) on a
    uniform grid, counts sign changes of affinity - exp(-delta/2), and
    refines a unique crossing by bisection until the bracket is narrower
    than ``bisect_tol`` and the affinity residual is within 1e-9.
    """
    if delta <= 0.0 or not math.isfinite(delta):
        raise ParameterOutOfRange(f"delta={delta!r} must be positive and finite")
    if grid_points < 16:
        raise ParameterOutOfRange(f"grid_points={grid_points} must be >= 16")
    if bisect_tol <= 0.0:
        raise ParameterOutOfRange(f"bisect_tol={bisect_tol!r} must be positive")

    threshold = math.exp(-delta / 2.0)
    ts = np.linspace(0.0, 1.0, grid_points)
    affs = np.asarray([_interp_affinity(nu, pair, float(t)) for t in ts])

    diffs = np.diff(affs)
    monotone = bool(np.all(diffs <= 1e-15) or np.all(diffs >= -1e-15))

    signs = affs - threshold
    brackets = [
        (float(ts[i]), float(ts[i + 1]))
        for i in range(grid_points - 1)
        if signs[i] * signs[i + 1] < 0.0
    ]
    crossings = len(brackets)

    t1 = None
    if crossings == 1:
        lo, hi = brackets[0]
        f_lo = _interp_affinity(nu, pair, lo) - threshold
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            f_mid = _interp_affinity(nu, pair, mid) - threshold
            if f_lo * f_mid <= 0.0:
                hi = mid
            else:
                lo, f_lo = mid, f_mid
            if hi - lo <= min(bisect_tol, 1e-10) and abs(f_mid) <= T1_RESIDUAL_TOL:
                break
        t1 = 0.5 * (lo + hi)

    grid = tuple((float(t), float(a)) for t, a in zip(ts, affs))
    return PhaseScanResult(
        grid=grid,
        threshold=threshold,
        t1=t1,
        crossings=crossings,
        monotone=monotone,
        delta=delta,
    )
