"""Stability certification and simulation for delay systems with
time-varying coefficients and bounded time-varying delays."""

from .coeff import (
    CoefficientPair,
    ConfigError,
    MeasureTriple,
    PiecewiseFunction,
    bound_estimates,
    classify,
    partition_measures,
)
from .certifier import (
    EtaCertificate,
    PeriodicCheck,
    WindowStats,
    check_eta_condition,
    check_periodic_condition,
    common_pair,
    ratio_from_measures,
    theorem1_constants,
    window_ratio,
)
from .ddesim import (
    DelaySpec,
    HistorySegment,
    IntegrationOverflow,
    NetworkSpec,
    ScalarDDE,
    Trajectory,
    fit_decay_rate,
    integrate,
    maximal_function,
    periodic_residual,
    sync_error,
)
from .expressions import EvaluationError, ExprError, parse_expr
from .oracle import (
    OracleReport,
    check_lemma1,
    check_lemma2,
    check_lemma3,
    check_lemma4,
    check_theorem1_envelope,
    oracle_battery,
)

__version__ = "0.1.0"
