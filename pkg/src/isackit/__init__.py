"""Communication-sensing tradeoff toolkit for finite state-dependent
memoryless channels with a bi-static sensing receiver."""

from .frontier import (
    FrontierPoint,
    InfeasibleError,
    SolverConfig,
    capacity_under_cost,
    capacity_under_exponent,
    grid_oracle,
    rd_frontier,
    re_frontier,
)
from .infomeasures import entropy, expected_kl, kl_divergence, mutual_information
from .model import (
    Alphabet,
    ChannelModel,
    DistortionSpec,
    InputDistribution,
    ModelFormatError,
    ProblemInstance,
    StatePrior,
    instance_from_dict,
    instance_to_dict,
    load_model,
    mix_over_state,
    split_marginals,
    validate_model,
)
from .sensing import (
    EstimatorTable,
    PosteriorTable,
    apply_estimator,
    expected_distortion,
    optimal_estimator,
    per_input_cost,
    posterior,
    sequence_distortion,
)
from .simulator import (
    Codebook,
    LlrDistribution,
    SimulationReport,
    channel_sample,
    exact_beta,
    exact_llr_law,
    generate_codebook,
    llr_statistic,
    ml_decode,
    np_threshold,
    run_ht_experiment,
    run_rd_experiment,
)
from .typeclasses import (
    JointType,
    is_conditionally_typical,
    is_strongly_typical,
    joint_type,
    typicality_lower_bound,
)

__version__ = "0.1.0"
