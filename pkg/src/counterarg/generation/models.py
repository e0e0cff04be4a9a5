"""Vocabulary, the sequence-to-sequence backend interface and two backends.

``TabularModel`` serves explicit per-prefix distributions and is meant for
tests. ``ToySeq2Seq`` is a small trainable GRU encoder-decoder whose encoder
is shared by one joint decoder (``oneseq``) or by separate conclusion and
counter decoders (``twodec``).
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Callable, Iterable, Mapping, Protocol, Sequence

import numpy as np
import torch
from torch import nn

from .joint import CONCLUSION, COUNTER

PAD, BOS, EOS, UNK = "<pad>", "<bos>", "<eos>", "<unk>"
SPECIALS = (PAD, BOS, EOS, UNK, CONCLUSION, COUNTER)
MODES = ("oneseq", "twodec")
DECODERS = {"oneseq": ("joint",), "twodec": ("conclusion", "counter")}

# finite stand-in for log(0)
LOG_ZERO = -1e9


class Vocabulary:
    def __init__(self, tokens: Iterable[str] = ()):
        extra = sorted(set(tokens) - set(SPECIALS))
        self.itos = list(SPECIALS) + extra
        self.stoi = {t: i for i, t in enumerate(self.itos)}

    def __len__(self) -> int:
        return len(self.itos)

    def __contains__(self, token: str) -> bool:
        return token in self.stoi

    def id(self, token: str) -> int:
        return self.stoi.get(token, self.stoi[UNK])

    def encode(self, tokens: Iterable[str]) -> list[int]:
        return [self.id(t) for t in tokens]

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self.itos[i] for i in ids]

    @property
    def specials(self) -> frozenset[str]:
        return frozenset(SPECIALS)

    def digest(self) -> str:
        return hashlib.sha256("\n".join(self.itos).encode()).hexdigest()

    def to_json(self) -> list[str]:
        return list(self.itos)

    @classmethod
    def from_json(cls, itos: Sequence[str]) -> "Vocabulary":
        if tuple(itos[:len(SPECIALS)]) != SPECIALS:
            raise ValueError("vocabulary does not start with the special tokens")
        return cls(itos)


class Seq2SeqModel(Protocol):
    vocab: Vocabulary
    mode: str

    def encode(self, premise_ids: Sequence[int]): ...

    def step_logits(self, state, prefix_ids: Sequence[int], decoder: str) -> np.ndarray:
        """Logits over the vocabulary for the token following ``prefix_ids``."""

    def teacher_forced_logits(self, state, target_ids: Sequence[int], decoder: str):
        """One logit vector per target position given the gold prefix."""


Distribution = Callable[[tuple[str, ...], tuple[str, ...]], Mapping[str, float]]


class TabularModel:
    """Decoder distributions given explicitly as functions of (premises, prefix).

    Each decoder maps the premise tokens and the decoded prefix (token
    strings) to a ``{token: probability}`` mapping. Tokens not mentioned get
    probability zero, encoded as a large negative finite logit.
    """

    def __init__(self, vocab: Vocabulary, decoders: Mapping[str, Distribution], mode: str = "oneseq"):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        missing = set(DECODERS[mode]) - set(decoders)
        if missing:
            raise ValueError(f"missing decoders {sorted(missing)} for mode {mode}")
        self.vocab = vocab
        self.mode = mode
        self.decoders = dict(decoders)

    def encode(self, premise_ids):
        return tuple(self.vocab.decode(premise_ids))

    def _logits(self, dist: Mapping[str, float]) -> np.ndarray:
        logits = np.full(len(self.vocab), LOG_ZERO)
        for tok, p in dist.items():
            if p > 0:
                logits[self.vocab.stoi[tok]] = np.log(p)
        return logits

    def step_logits(self, state, prefix_ids, decoder):
        prefix = tuple(self.vocab.decode(prefix_ids))
        return self._logits(self.decoders[decoder](state, prefix))

    def teacher_forced_logits(self, state, target_ids, decoder):
        target = list(target_ids)
        return np.stack([self.step_logits(state, target[:i], decoder) for i in range(len(target))])

    # -- convenience constructors --------------------------------------------

    @staticmethod
    def sequence_distribution(sequence: Sequence[str]) -> Distribution:
        """Point mass on ``sequence`` followed by end-of-sequence."""
        seq = tuple(sequence)

        def dist(_premises, prefix):
            if prefix == seq[:len(prefix)] and len(prefix) < len(seq):
                return {seq[len(prefix)]: 1.0}
            return {EOS: 1.0}
        return dist

    @staticmethod
    def uniform_distribution(tokens: Sequence[str]) -> Distribution:
        tokens = tuple(tokens)

        def dist(_premises, _prefix):
            return {t: 1.0 / len(tokens) for t in tokens}
        return dist


class _Decoder(nn.Module):
    def __init__(self, vocab_size: int, emb_dim: int, hidden_dim: int):
        super().__init__()
        self.embed = nn.Embedding(vocab_size, emb_dim)
        self.rnn = nn.GRU(emb_dim, hidden_dim, batch_first=True)
        self.out = nn.Linear(hidden_dim, vocab_size)

    def forward(self, input_ids: torch.Tensor, state: torch.Tensor) -> torch.Tensor:
        hidden, _ = self.rnn(self.embed(input_ids), state)
        return self.out(hidden)


class ToySeq2Seq(nn.Module):
    """GRU encoder shared by one (oneseq) or two (twodec) GRU decoders.

    The encoder's final hidden state initialises every decoder; the decoders
    never read each other's outputs.
    """

    backend_id = "toy-gru"

    def __init__(self, vocab: Vocabulary, mode: str = "oneseq", emb_dim: int = 32,
                 hidden_dim: int = 64, max_premise_len: int = 128, seed: int = 0,
                 dtype: torch.dtype = torch.float32):
        super().__init__()
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.vocab = vocab
        self.mode = mode
        self.emb_dim, self.hidden_dim = emb_dim, hidden_dim
        self.max_premise_len = max_premise_len
        gen_state = torch.random.get_rng_state()
        torch.manual_seed(seed)
        self.enc_embed = nn.Embedding(len(vocab), emb_dim)
        self.encoder = nn.GRU(emb_dim, hidden_dim, batch_first=True)
        self.decoders = nn.ModuleDict({name: _Decoder(len(vocab), emb_dim, hidden_dim)
                                       for name in DECODERS[mode]})
        torch.random.set_rng_state(gen_state)
        self.to(dtype)

    @property
    def dtype(self) -> torch.dtype:
        return self.enc_embed.weight.dtype

    def encoder_parameters(self) -> list[nn.Parameter]:
        return list(self.enc_embed.parameters()) + list(self.encoder.parameters())

    def encode(self, premise_ids) -> torch.Tensor:
        ids = torch.as_tensor(list(premise_ids)[: self.max_premise_len], dtype=torch.long)
        if ids.numel() == 0:
            raise ValueError("empty premises")
        _, state = self.encoder(self.enc_embed(ids).unsqueeze(0))
        return state

    def teacher_forced_logits(self, state, target_ids, decoder):
        target = list(target_ids)
        inputs = torch.as_tensor([self.vocab.stoi[BOS]] + target[:-1], dtype=torch.long)
        return self.decoders[decoder](inputs.unsqueeze(0), state)[0]

    def step_logits(self, state, prefix_ids, decoder):
        inputs = torch.as_tensor([self.vocab.stoi[BOS]] + list(prefix_ids), dtype=torch.long)
        with torch.no_grad():
            logits = self.decoders[decoder](inputs.unsqueeze(0), state)[0, -1]
        return logits.double().numpy()

    def config(self) -> dict:
        return {"mode": self.mode, "emb_dim": self.emb_dim, "hidden_dim": self.hidden_dim,
                "max_premise_len": self.max_premise_len}


def save_checkpoint(model: ToySeq2Seq, directory: str | Path, manifest: dict) -> Path:
    """Write parameters, vocabulary and a JSON manifest into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    torch.save(model.state_dict(), directory / "parameters.pt")
    (directory / "vocab.json").write_text(json.dumps(model.vocab.to_json()))
    full = {
        "backend_id": model.backend_id,
        "mode": model.mode,
        "model_config": model.config(),
        "vocabulary_hash": model.vocab.digest(),
        **manifest,
    }
    (directory / "manifest.json").write_text(json.dumps(full, indent=2, sort_keys=True))
    return directory


def load_checkpoint(directory: str | Path) -> tuple[ToySeq2Seq, dict]:
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    vocab = Vocabulary.from_json(json.loads((directory / "vocab.json").read_text()))
    if vocab.digest() != manifest["vocabulary_hash"]:
        raise ValueError(f"{directory}: vocabulary does not match the manifest hash")
    model = ToySeq2Seq(vocab, **manifest["model_config"])
    model.load_state_dict(torch.load(directory / "parameters.pt", weights_only=True))
    model.eval()
    return model, manifest
