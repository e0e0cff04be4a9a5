"""Teacher-forced training for the one-sequence and two-decoder variants."""

from __future__ import annotations

import copy
import logging
import random
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import torch

from ..corpus import Argument, select_best_counter
from ..text import tokenize
from .joint import TrainingExample, format_joint_target
from .losses import lm_loss, multitask_loss
from .models import EOS, MODES, Seq2SeqModel, ToySeq2Seq, Vocabulary

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 5e-5
    epochs: int = 3
    batch_size: int = 8
    alpha_a: float = 0.7
    alpha_b: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1 or self.learning_rate <= 0:
            raise ValueError("need epochs >= 0, batch_size >= 1, learning_rate > 0")
        for name in ("alpha_a", "alpha_b"):
            if not 0.0 < getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in (0, 1]")

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class TrainResult:
    model: Seq2SeqModel
    initial_train_loss: float | None = None
    train_losses: list[float] = field(default_factory=list)
    validation_losses: list[float] = field(default_factory=list)
    best_epoch: int | None = None

    def curve(self) -> list[dict]:
        return [{"epoch": i + 1, "train": t, "validation": v}
                for i, (t, v) in enumerate(zip(self.train_losses, self.validation_losses))]


def build_examples(arguments: Iterable[Argument],
                   scorer: Callable[[str], float] | None = None) -> list[TrainingExample]:
    """Premises plus (conclusion, best counter) targets; counterless arguments are skipped."""
    examples = []
    for a in arguments:
        if not a.counters:
            continue
        best = select_best_counter(a.counters, scorer) if scorer else select_best_counter(a.counters)
        examples.append(TrainingExample(tuple(tokenize(a.premises)),
                                        format_joint_target(a.conclusion, best.text)))
    return examples


def build_vocabulary(examples: Iterable[TrainingExample]) -> Vocabulary:
    tokens = set()
    for ex in examples:
        tokens.update(ex.premise_tokens)
        tokens.update(ex.target.conclusion_tokens)
        tokens.update(ex.target.counter_tokens)
    return Vocabulary(tokens)


def twodec_forward(model: Seq2SeqModel, premises: Sequence[int], conclusion_target: Sequence[int],
                   counter_target: Sequence[int]):
    """Encode once, then score each target with its own decoder.

    Returns ``(loss_a, loss_b)``, the summed NLL of the conclusion and the
    counter target. Neither decoder sees the other's tokens.
    """
    if not conclusion_target or not counter_target:
        raise ValueError("targets must be non-empty")
    state = model.encode(premises)
    loss_a = lm_loss(model.teacher_forced_logits(state, conclusion_target, "conclusion"),
                     conclusion_target)
    loss_b = lm_loss(model.teacher_forced_logits(state, counter_target, "counter"),
                     counter_target)
    return loss_a, loss_b


def example_loss(model: Seq2SeqModel, example: TrainingExample, config: TrainConfig):
    vocab = model.vocab
    eos = vocab.stoi[EOS]
    premises = vocab.encode(example.premise_tokens)
    if model.mode == "oneseq":
        target = vocab.encode(example.target.joined) + [eos]
        state = model.encode(premises)
        return lm_loss(model.teacher_forced_logits(state, target, "joint"), target)
    loss_a, loss_b = twodec_forward(
        model, premises,
        vocab.encode(example.target.conclusion_tokens) + [eos],
        vocab.encode(example.target.counter_tokens) + [eos],
    )
    return multitask_loss(loss_a, loss_b, config.alpha_a, config.alpha_b)


def mean_loss(model: Seq2SeqModel, examples: Sequence[TrainingExample], config: TrainConfig) -> float:
    with torch.no_grad():
        return sum(float(example_loss(model, ex, config)) for ex in examples) / len(examples)


def train(model: ToySeq2Seq, train_examples: Sequence[TrainingExample],
          validation_examples: Sequence[TrainingExample], mode: str,
          config: TrainConfig) -> TrainResult:
    """Train with AdamW; keep the epoch-end parameters with the lowest validation loss.

    Losses are per-example sums of token NLL, averaged over the batch.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if model.mode != mode:
        raise ValueError(f"model built for {model.mode}, asked to train {mode}")
    if not train_examples:
        raise ValueError("empty training split")
    if config.epochs == 0:
        return TrainResult(model)
    validation = validation_examples or train_examples

    torch.manual_seed(config.seed)
    order_rng = random.Random(config.seed)
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)
    result = TrainResult(model, initial_train_loss=mean_loss(model, train_examples, config))
    best_loss, best_state = float("inf"), None
    indices = list(range(len(train_examples)))
    for epoch in range(config.epochs):
        model.train()
        order_rng.shuffle(indices)
        for start in range(0, len(indices), config.batch_size):
            batch = [train_examples[i] for i in indices[start:start + config.batch_size]]
            optimizer.zero_grad()
            loss = sum(example_loss(model, ex, config) for ex in batch) / len(batch)
            loss.backward()
            optimizer.step()
        model.eval()
        train_loss = mean_loss(model, train_examples, config)
        val_loss = mean_loss(model, validation, config)
        result.train_losses.append(train_loss)
        result.validation_losses.append(val_loss)
        log.info("epoch %d train %.4f validation %.4f", epoch + 1, train_loss, val_loss)
        if val_loss < best_loss:
            best_loss, best_state = val_loss, copy.deepcopy(model.state_dict())
            result.best_epoch = epoch + 1
    model.load_state_dict(best_state)
    model.eval()
    return result
