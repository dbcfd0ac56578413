"""Algebraic classifier: moment encoder, polynomial decoder, training and rules."""

from .basis import (
    DecoderBasis,
    EULER_GAMMA,
    bound_applies,
    decoder_term_count,
    effective_order,
    enumerate_monomials,
    harmonic_floor_sum,
    parameter_bound,
)
from .model import (
    AlClaConfig,
    AlClaParams,
    Batch,
    batch_loss,
    decode,
    encode,
    encoder_outputs,
    forward,
    gradients,
    loss,
    loss_and_gradients,
    loss_terms,
    monomial_values,
    output,
    predict,
    predict_labels,
    sigmoid,
)
from .rule import DecisionRule, extract_rule, parse_rule
from .training import TrainResult, TrainingError, load_checkpoint, save_checkpoint, stratified_split, train

__all__ = [
    "AlClaConfig",
    "AlClaParams",
    "Batch",
    "DecisionRule",
    "DecoderBasis",
    "EULER_GAMMA",
    "TrainResult",
    "TrainingError",
    "batch_loss",
    "bound_applies",
    "decode",
    "decoder_term_count",
    "effective_order",
    "encode",
    "encoder_outputs",
    "enumerate_monomials",
    "extract_rule",
    "forward",
    "gradients",
    "harmonic_floor_sum",
    "load_checkpoint",
    "loss",
    "loss_and_gradients",
    "loss_terms",
    "monomial_values",
    "output",
    "parameter_bound",
    "parse_rule",
    "predict",
    "predict_labels",
    "save_checkpoint",
    "sigmoid",
    "stratified_split",
    "train",
]
