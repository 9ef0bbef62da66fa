"""Weighted-automaton lattice engine for learning from weak supervision.

Compiles weak annotations (candidate sets, counts, pair relations,
confidences, class priors) into small weighted automata and computes
per-position posterior targets and accepted log-likelihoods with a
linear-time log-domain forward-backward pass.
"""

__version__ = "0.1.0"

from .automaton import Nfa, Transition, Trellis, accepts, build_trellis, validate
from .errors import (
    EngineError,
    InfeasibleSupervision,
    InvalidParams,
    InvalidSpec,
    ShapeMismatch,
    SymbolOutOfRange,
    TooLarge,
    UnsupportedCardinality,
)
from .forward_backward import (
    EmOutput,
    ScoreTables,
    active_kernel,
    available_kernels,
    backward,
    forward,
    posteriors,
    score_tables,
    symbol_log_mass,
)
from .losses import LossOutput, em_losses, em_targets, grad_logits, ovr_losses
from .supervision import (
    ClassPrior,
    FullLabels,
    LabelProportion,
    MultiClassLabelProportion,
    MultiClassMultiInstance,
    MultiInstance,
    PairwiseComparison,
    PairwiseSimilarity,
    PartialLabel,
    PositiveConfidence,
    SupervisionSpec,
    Unconstrained,
    WeightedPair,
    compile_spec,
    from_dict,
    one_vs_rest,
    to_dict,
)
