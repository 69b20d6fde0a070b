"""Expansions in non-integer bases with prescribed digit frequencies."""

from .balancer import BalancerState, Side, emit_block, init_balancer, step_balancer
from .bounds import (
    BernoulliParams,
    beta_n,
    beta_table,
    check_lower,
    corollary_dim_bound,
    count_bound,
    generalized_golden,
    local_dim_bound,
    lower_envelope,
    normality_threshold,
    upper_envelope,
)
from .dynamics import (
    BetaContext,
    CertifiedInterval,
    PairGeometry,
    Word,
    admissible_step,
    apply_map,
    build_geometry,
    check_inclusions,
    eval_periodic,
    orbit_value,
    parse_beta,
)
from .errors import *  # noqa: F401,F403
from .navigator import NavRequest, hitting_run, navigate
from .oracle import BranchTree, branching_profile, enumerate_prefixes, validate_expansion
from .orbit import OrbitPoint
from .precision import (
    Ball,
    CertifiedReal,
    Membership,
    Ordering,
    RootDescriptor,
    compare,
    decide,
    isolate_root,
    refine,
)
from .synthesis import (
    Checkpoint,
    ExpansionStream,
    FreqVector,
    PairWeights,
    Schedule,
    decompose,
    oscillation_targets,
    synthesize,
    synthesize_nonconvergent,
)

__version__ = "0.1.0"
