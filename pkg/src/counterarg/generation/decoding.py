"""Candidate decoding: nucleus sampling, prompt-forced prefixes, retries."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..concepts import Concept
from ..text import tokenize
from .joint import CONCLUSION, ParseError, parse_joint_output
from .models import BOS, EOS, PAD, Seq2SeqModel

MAX_RESAMPLES = 3
MASKED_LOGIT = np.finfo(np.float64).min


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class DecodingConfig:
    nucleus_p: float = 0.95
    top_k: int = 50
    n_candidates: int = 8
    n_concepts: int = 5
    max_conclusion_len: int = 32
    max_counter_len: int = 64
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.nucleus_p <= 1.0:
            raise ValueError(f"nucleus_p must be in (0, 1], got {self.nucleus_p}")
        if self.top_k < 1 or self.n_candidates < 1 or self.n_concepts < 0:
            raise ValueError("top_k and n_candidates must be >= 1, n_concepts >= 0")
        if self.max_conclusion_len < 1 or self.max_counter_len < 1:
            raise ValueError("length maxima must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass(frozen=True)
class CandidatePair:
    conclusion: str
    counter: str
    prompt_concept: str | None = None
    score: float | None = None
    sequence: tuple[str, ...] = field(default=(), compare=False)
    seed: int | None = None

    def __post_init__(self):
        if not self.counter.strip():
            raise ValueError("candidate counter is empty")
        if self.score is not None and not -1.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [-1, 1]")


def softmax(logits: np.ndarray) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    z = np.exp(z - z.max())
    return z / z.sum()


def nucleus_filter(probabilities, p: float = 0.95, k: int = 50) -> np.ndarray:
    """Token ids eligible for nucleus sampling, most probable first.

    Among the ``k`` most probable tokens (ties to the lower id), keep the
    shortest prefix whose cumulative mass reaches ``p``; keep all ``k`` when
    they never reach it.
    """
    if p <= 0 or k < 1:
        raise ValueError(f"need p > 0 and k >= 1, got p={p}, k={k}")
    probs = np.asarray(probabilities, dtype=np.float64)
    if probs.ndim != 1 or np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-6:
        raise ValueError("probabilities must be a non-negative vector summing to 1")
    order = np.argsort(-probs, kind="stable")[:k]
    cumulative = np.cumsum(probs[order])
    reached = np.nonzero(cumulative >= p)[0]
    size = reached[0] + 1 if reached.size else len(order)
    return order[:size]


def prompt_constrained_step(logits, prompt_ids: Sequence[int], position: int) -> np.ndarray:
    """Force ``prompt_ids[position]`` while ``position`` is inside the prompt."""
    if position < 0:
        raise ValueError("position must be >= 0")
    logits = np.asarray(logits, dtype=np.float64)
    if position >= len(prompt_ids):
        return logits
    masked = np.full_like(logits, MASKED_LOGIT)
    tok = prompt_ids[position]
    masked[tok] = logits[tok]
    return masked


def draw_seed(seed: int, *stream: int) -> int:
    """Independent per-draw seed derived from the run seed and a stream index."""
    return int(np.random.SeedSequence([seed, *stream]).generate_state(1)[0])


def sample_token(logits: np.ndarray, rng: np.random.Generator, p: float, k: int) -> int:
    probs = softmax(logits)
    allowed = nucleus_filter(probs, p, k)
    weights = probs[allowed] / probs[allowed].sum()
    return int(allowed[rng.choice(len(allowed), p=weights)])


def decode(model: Seq2SeqModel, state, decoder: str, max_len: int, *,
           rng: np.random.Generator | None = None, p: float = 0.95, k: int = 50,
           prompt_ids: Sequence[int] = ()) -> list[int]:
    """Decode one sequence; greedy when ``rng`` is None, nucleus sampling otherwise."""
    eos = model.vocab.stoi[EOS]
    out: list[int] = []
    for position in range(max_len):
        logits = prompt_constrained_step(model.step_logits(state, out, decoder), prompt_ids, position)
        if rng is None:
            tok = int(np.argmax(logits))
        else:
            tok = sample_token(logits, rng, p, k)
        if tok == eos:
            break
        out.append(tok)
    return out


def _ordered_concepts(concepts, n: int) -> list[str]:
    if concepts and isinstance(concepts[0], Concept):
        concepts = [c.phrase for c in sorted(concepts, key=lambda c: -c.salience)]
    seen, phrases = set(), []
    for c in concepts:
        if c.lower() not in seen:
            seen.add(c.lower())
            phrases.append(c)
    return phrases[:n]


def generate_candidates_oneseq(model: Seq2SeqModel, premises: str | Sequence[str],
                               concepts: Sequence[str | Concept],
                               config: DecodingConfig) -> list[CandidatePair]:
    """Decode up to ``n_candidates`` joint sequences, one per slot.

    Slot ``i`` is prompted with the conclusion marker plus the tokens of the
    ``i``-th concept; slots beyond the concepts are sampled unprompted.
    Concepts with out-of-vocabulary tokens are skipped. Unparseable outputs
    are resampled up to three times and then dropped.
    """
    vocab = model.vocab
    tokens = tokenize(premises) if isinstance(premises, str) else list(premises)
    state = model.encode(vocab.encode(tokens))
    usable = [c for c in _ordered_concepts(list(concepts), len(concepts))
              if all(t in vocab for t in tokenize(c))]
    prompts: list[str | None] = usable[: config.n_candidates]
    prompts += [None] * (config.n_candidates - len(prompts))
    max_len = config.max_conclusion_len + config.max_counter_len + 2
    ignore = frozenset({BOS, EOS, PAD})

    candidates = []
    for slot, concept in enumerate(prompts):
        prompt_ids = [] if concept is None else vocab.encode([CONCLUSION, *tokenize(concept)])
        for attempt in range(1 + MAX_RESAMPLES):
            seed = draw_seed(config.seed, slot, attempt)
            ids = decode(model, state, "joint", max_len, rng=np.random.default_rng(seed),
                         p=config.nucleus_p, k=config.top_k, prompt_ids=prompt_ids)
            sequence = tuple(vocab.decode(ids))
            try:
                conclusion, counter = parse_joint_output(sequence, ignore)
            except ParseError:
                continue
            if not counter:
                continue
            candidates.append(CandidatePair(conclusion, counter, concept, None, sequence, seed))
            break
    if not candidates:
        raise GenerationError("no parseable candidate after retries")
    return candidates


def generate_candidates_twodec(model: Seq2SeqModel, premises: str | Sequence[str],
                               config: DecodingConfig) -> tuple[str, list[CandidatePair]]:
    """One greedy conclusion plus ``n_candidates`` nucleus-sampled counters."""
    vocab = model.vocab
    tokens = tokenize(premises) if isinstance(premises, str) else list(premises)
    state = model.encode(vocab.encode(tokens))
    special = vocab.specials
    conclusion_ids = decode(model, state, "conclusion", config.max_conclusion_len)
    conclusion = " ".join(t for t in vocab.decode(conclusion_ids) if t not in special)
    if not conclusion:
        raise GenerationError("empty conclusion decode")
    counters = []
    for slot in range(config.n_candidates):
        for attempt in range(1 + MAX_RESAMPLES):
            seed = draw_seed(config.seed, slot, attempt)
            ids = decode(model, state, "counter", config.max_counter_len,
                         rng=np.random.default_rng(seed), p=config.nucleus_p, k=config.top_k)
            sequence = tuple(vocab.decode(ids))
            counter = " ".join(t for t in sequence if t not in special)
            if counter:
                counters.append(CandidatePair(conclusion, counter, None, None, sequence, seed))
                break
    if not counters:
        raise GenerationError("every counter decode was empty")
    return conclusion, counters
