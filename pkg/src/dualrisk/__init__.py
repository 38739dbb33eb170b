"""Dual moments and risk premia under dual theory and rank-dependent utility.

The variance of a risk drives the risk premium of an expected-utility agent.
Its dual counterpart, the maxiance (expected best of two independent draws
minus the mean), drives the premium of an agent who distorts cumulative
probabilities. Rank-dependent utility combines both.
"""

from .comparative import (
    Agent,
    Check,
    DominanceReport,
    concave_transform_check,
    cross_ratio_check,
    index_dominance,
    local_quadruples,
    premium_dominance,
    proposition1_report,
    sample_queries,
)
from .errors import *  # noqa: F401,F403
from .evaluation import (
    PremiumQuery,
    PremiumResult,
    dt_lottery_pair,
    dt_premium_approx,
    dt_premium_exact,
    dt_premium_general,
    dt_value,
    eu_premium_approx,
    eu_premium_exact,
    premium_sensitivity,
    premium_surface,
    rdu_lottery_pair,
    rdu_premium_approx,
    rdu_premium_batch,
    rdu_premium_exact,
    rdu_premium_general,
    rdu_value,
)
from .oracle import McEstimate, fd_derivative, gini_pairs, indifference_bisect, maxiance_mc, maxiance_pairs
from .portfolio import (
    PortfolioProblem,
    contraction_reduction_approx,
    contraction_reduction_exact,
    optimal_share,
    zero_participation_weight,
)
from .preferences import (
    DecumulativeWeighting,
    ExponentialUtility,
    IdentityWeighting,
    LinearUtility,
    PowerUtility,
    PowerWeighting,
    PrelecWeighting,
    QuadraticUtility,
    QuadraticWeighting,
    TKWeighting,
    UtilityFunction,
    WeightingFunction,
    decumulative_transform,
    invert_utility,
    parse_utility,
    parse_weighting,
    utility_eval,
    weighting_eval,
)
from .risk_model import (
    Lottery,
    MomentSet,
    SpreadRisk,
    apply_spread,
    binary_spread,
    build_lottery,
    build_spread_risk,
    dual_moment,
    gini,
    moments,
    nstate_spread,
    risk_from_json,
    risk_to_json,
)

__version__ = "0.1.0"
