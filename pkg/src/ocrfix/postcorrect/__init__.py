"""Post-correction of masked OCR lines."""

from .align import EditOp, align_pair, apply_script, script_cost
from .decode import BeamConfig, beam_corrector, correct_document, correct_line, decode_line
from .external import correct_external, external_corrector
from .models import (
    ChannelModel,
    CharLM,
    TrainingPair,
    load_channel,
    load_lm,
    read_pairs,
    save_channel,
    save_lm,
    train_channel,
    train_lm,
    write_pairs,
)

__all__ = [
    "BeamConfig",
    "ChannelModel",
    "CharLM",
    "EditOp",
    "TrainingPair",
    "align_pair",
    "apply_script",
    "beam_corrector",
    "correct_document",
    "correct_external",
    "correct_line",
    "decode_line",
    "external_corrector",
    "load_channel",
    "load_lm",
    "read_pairs",
    "save_channel",
    "save_lm",
    "script_cost",
    "train_channel",
    "train_lm",
    "write_pairs",
]
