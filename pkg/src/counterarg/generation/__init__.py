from .decoding import (
    CandidatePair,
    DecodingConfig,
    GenerationError,
    decode,
    generate_candidates_oneseq,
    generate_candidates_twodec,
    nucleus_filter,
    prompt_constrained_step,
    softmax,
)
from .joint import (
    CONCLUSION,
    COUNTER,
    FormatError,
    JointTarget,
    ParseError,
    TrainingExample,
    format_joint_target,
    parse_joint_output,
)
from .losses import lm_loss, multitask_loss
from .models import (
    EOS,
    TabularModel,
    ToySeq2Seq,
    Vocabulary,
    load_checkpoint,
    save_checkpoint,
)
from .training import (
    TrainConfig,
    TrainResult,
    build_examples,
    build_vocabulary,
    train,
    twodec_forward,
)

__all__ = [
    "lm_loss",
    "multitask_loss",
    "CandidatePair",
    "DecodingConfig",
    "GenerationError",
    "decode",
    "generate_candidates_oneseq",
    "generate_candidates_twodec",
    "nucleus_filter",
    "prompt_constrained_step",
    "softmax",
    "CONCLUSION",
    "COUNTER",
    "FormatError",
    "JointTarget",
    "ParseError",
    "TrainingExample",
    "format_joint_target",
    "parse_joint_output",
    "EOS",
    "TabularModel",
    "ToySeq2Seq",
    "Vocabulary",
    "load_checkpoint",
    "save_checkpoint",
    "TrainConfig",
    "TrainResult",
    "build_examples",
    "build_vocabulary",
    "train",
    "twodec_forward",
]
