"""Online learning with strongly observable undirected feedback graphs.

Core pieces: feedback-graph utilities (independence numbers, variance
certificate), the q-Tsallis-entropy FTRL solver, importance-weighted loss
estimators, tuned learners including a doubling meta-learner that needs no
independence-number knowledge, the multitask-bandit lower-bound environment
family, and a run/sweep/verify harness with a CLI front end.
"""

from .errors import (
    ConfigError,
    ConvergenceFailure,
    DegenerateProbability,
    DomainError,
    GraphBanditsError,
    InvalidDistribution,
    InvalidInputs,
    InvalidParams,
    InvalidSubset,
    MissingSelfLoop,
    NonFiniteInput,
    NotStronglyObservable,
    SizeLimitExceeded,
)
from .graphs import (
    FeedbackGraph,
    IndependenceCertificate,
    format_edge_list,
    generate_graph,
    independence_number,
    parse_edge_list,
    validate_strong_observability,
    variance_certificate,
)
from .ftrl import ftrl_update, kkt_residual, solve_ftrl, tsallis_entropy
from .estimators import (
    RoundObservation,
    estimate_basic,
    estimate_shifted,
    make_observation,
    neighborhood_prob,
)
from .learners import (
    DoublingQFTRL,
    QTsallisFTRL,
    TsallisParams,
    UniformPolicy,
    tune,
    variance_quantity,
)
from .environments import (
    KL_CONSTANT,
    Environment,
    MtbEnvironment,
    build_environment,
    mtb_build,
    mtb_round,
    read_replay,
    write_replay,
)
from .harness import (
    DOUBLING_C,
    LEARNER_KINDS,
    RegretSummary,
    RunResult,
    mtb_lower_const,
    run,
    run_single,
    sweep,
    regret_bound,
    verify,
)

__version__ = "0.1.0"
