"""Phase thresholds, Krieger types and Monte Carlo diagnostics for
product measures indexed by regular trees and free groups."""

from .errors import (
    AlphabetMismatch,
    AtomBudgetExceeded,
    BudgetError,
    DegenerateWindow,
    DepthBudget,
    NoBlockLength,
    NonPositiveWeight,
    NoResult,
    NotNormalized,
    OutOfDepth,
    Overflow,
    ParameterOutOfRange,
    SpecMismatch,
    TreePhaseError,
    ValidationError,
)
from .measures import (
    Direction,
    DiscreteMeasure,
    MeasurePair,
    RangeGroupReport,
    RangeKind,
    ScalarDistribution,
    affinity,
    chernoff_min,
    convolve,
    essential_range_group,
    hellinger_sq,
    log_ratio_distribution,
    make_distribution,
    make_measure,
    make_pair,
    mgf,
    mix,
    point_mass,
    site_contraction_norm,
)
from .trees import (
    EdgeDirection,
    OrientedEdge,
    ROOT,
    TreeSpec,
    Vertex,
    ball_size,
    encode_vertex,
    estimate_exponent,
    parse_vertex,
    path_edges,
    poincare_exponent,
    sphere_size,
    tree_distance,
    vertex_index,
)
from .actions import (
    FreeWord,
    IDENTITY,
    act_on_edge,
    act_on_vertex,
    compose,
    flipped_edge_count,
    kakutani_sum,
    koopman_correlation,
    make_word,
    parse_word,
)
from .simulate import (
    CouplingTestResult,
    FieldSample,
    PercolationReport,
    RecurrenceDiagnostic,
    RecurrenceVerdict,
    block_sum_distribution,
    cocycle_sum,
    coupling_pushforward_test,
    find_block_length,
    ks_family,
    martingale_W,
    martingale_mc,
    percolation_report,
    recurrence_diagnostic,
    rn_derivative,
    sample_field,
    shift_recurrence_diagnostic,
    sqrt_rn_samples,
)
from .classify import (
    Classification,
    KriegerFlow,
    KriegerKind,
    KriegerReport,
    Phase,
    PhaseScanResult,
    SpectralRegime,
    SpectralReport,
    classify_tree_action,
    krieger_type,
    phase_scan,
    spectral_radius_free,
)
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"
