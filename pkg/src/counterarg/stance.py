"""Pro/con stance classification, contrastiveness scores and candidate ranking."""

from __future__ import annotations

import dataclasses
import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Protocol, Sequence

import torch
from torch import nn

from .corpus import LABELS, ClaimPair, make_splits
from .generation.decoding import CandidatePair
from .text import split_sentences, words

__all__ = [
    "StanceVerdict", "StanceClassifier", "LookupClassifier", "BagOfTokensClassifier",
    "TransformerStanceClassifier",
    "StanceTrainConfig", "RankedCandidates", "classify_stance", "sentence_contrastiveness",
    "counter_contrastiveness", "rank_candidates", "train_stance", "evaluate_stance_classifier",
    "split_sentences", "save_classifier", "load_classifier",
]


@dataclass(frozen=True)
class StanceVerdict:
    """Predicted label and the probability of that label."""

    label: str
    probability: float

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"label must be one of {LABELS}")
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"probability {self.probability} outside [0, 1]")

    @property
    def pr_pro(self) -> float:
        return self.probability if self.label == "pro" else 1.0 - self.probability

    @property
    def pr_con(self) -> float:
        return self.probability if self.label == "con" else 1.0 - self.probability

    @classmethod
    def from_probabilities(cls, pr_pro: float, pr_con: float) -> "StanceVerdict":
        # exact ties resolve to pro
        return cls("pro", pr_pro) if pr_pro >= pr_con else cls("con", pr_con)


class StanceClassifier(Protocol):
    def predict(self, claim: str, statement: str) -> StanceVerdict: ...


class LookupClassifier:
    """Fixture classifier answering from a ``{(claim, statement): (label, prob)}`` table."""

    backend_id = "lookup"

    def __init__(self, table: Mapping[tuple[str, str], tuple[str, float]],
                 default: tuple[str, float] | None = None):
        self.table = dict(table)
        self.default = default

    def predict(self, claim, statement):
        entry = self.table.get((claim, statement), self.default)
        if entry is None:
            raise KeyError(f"no fixture verdict for {(claim, statement)!r}")
        return StanceVerdict(*entry)


class TransformerStanceClassifier:
    """Adapter for a Hugging Face sequence-pair classifier with two labels.

    ``pro_index`` names the output logit that means pro; the other is con.
    """

    backend_id = "transformer"

    def __init__(self, model, tokenizer, pro_index: int = 0, max_length: int = 256):
        self.model = model.eval()
        self.tokenizer = tokenizer
        self.pro_index = pro_index
        self.max_length = max_length

    @classmethod
    def from_pretrained(cls, name_or_path: str, **kwargs) -> "TransformerStanceClassifier":
        from transformers import AutoModelForSequenceClassification, AutoTokenizer

        return cls(AutoModelForSequenceClassification.from_pretrained(name_or_path),
                   AutoTokenizer.from_pretrained(name_or_path), **kwargs)

    def predict(self, claim, statement):
        enc = self.tokenizer(claim, statement, return_tensors="pt", truncation=True,
                             max_length=self.max_length)
        with torch.no_grad():
            probs = torch.softmax(self.model(**enc).logits[0].double(), dim=-1)
        pr_pro = float(probs[self.pro_index])
        return StanceVerdict.from_probabilities(pr_pro, 1.0 - pr_pro)


def classify_stance(classifier: StanceClassifier, claim: str, statement: str) -> StanceVerdict:
    if not claim.strip() or not statement.strip():
        raise ValueError("claim and statement must be non-empty")
    return classifier.predict(claim, statement)


def sentence_contrastiveness(verdict: StanceVerdict) -> float:
    """+pr_con for a con verdict, -pr_pro for a pro verdict."""
    return verdict.probability if verdict.label == "con" else -verdict.probability


def counter_contrastiveness(conclusion: str, counter: str, classifier: StanceClassifier,
                            splitter: Callable[[str], list[str]] = split_sentences) -> float:
    """Mean sentence contrastiveness of the counter towards the conclusion."""
    if not counter.strip():
        raise ValueError("empty counter")
    sentences = splitter(counter)
    if not sentences:
        raise ValueError("counter has no sentences")
    scores = [sentence_contrastiveness(classify_stance(classifier, conclusion, s)) for s in sentences]
    return sum(scores) / len(scores)


@dataclass(frozen=True)
class RankedCandidates:
    candidates: tuple[CandidatePair, ...]

    def __post_init__(self):
        scores = [c.score for c in self.candidates]
        if any(s is None or not -1.0 <= s <= 1.0 for s in scores):
            raise ValueError("every ranked candidate needs a score in [-1, 1]")
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise ValueError("scores must be non-increasing")

    @property
    def top(self) -> CandidatePair:
        return self.candidates[0]

    def __len__(self):
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)

    def __getitem__(self, i):
        return self.candidates[i]


def rank_candidates(candidates: Sequence[CandidatePair], classifier: StanceClassifier,
                    shared_conclusion: str | None = None,
                    splitter: Callable[[str], list[str]] = split_sentences) -> RankedCandidates:
    """Score every candidate against its conclusion and sort, best first.

    ``shared_conclusion`` (two-decoder output) replaces the per-candidate
    conclusions. Equal scores keep their original order.
    """
    if not candidates:
        raise ValueError("no candidates to rank")
    scored = []
    for c in candidates:
        conclusion = shared_conclusion if shared_conclusion is not None else c.conclusion
        score = counter_contrastiveness(conclusion, c.counter, classifier, splitter)
        scored.append(dataclasses.replace(c, score=score))
    # sorted() is stable, so ties stay in index order
    return RankedCandidates(tuple(sorted(scored, key=lambda c: -c.score)))


# -- trainable bag-of-tokens classifier ---------------------------------------

def _pair_features(claim: str, statement: str) -> Counter:
    c, s = Counter(words(claim)), Counter(words(statement))
    feats: Counter = Counter()
    for tok in s:
        feats[("s", tok)] += s[tok]
        if tok not in c:
            feats[("added", tok)] += 1
    for tok in c:
        if tok not in s:
            feats[("dropped", tok)] += 1
    return feats


class BagOfTokensClassifier(nn.Module):
    """Logistic model over the statement's tokens and its token edits w.r.t. the claim."""

    backend_id = "bag-of-tokens"

    def __init__(self, features: Sequence[tuple[str, str]], seed: int = 0):
        super().__init__()
        self.features = list(features)
        self.index = {f: i for i, f in enumerate(self.features)}
        gen_state = torch.random.get_rng_state()
        torch.manual_seed(seed)
        self.linear = nn.Linear(len(self.features), len(LABELS))
        torch.random.set_rng_state(gen_state)
        self.history: list[dict] = []

    def vectorize(self, pairs: Iterable[tuple[str, str]]) -> torch.Tensor:
        rows = list(pairs)
        x = torch.zeros(len(rows), len(self.features))
        for r, (claim, statement) in enumerate(rows):
            for f, v in _pair_features(claim, statement).items():
                j = self.index.get(f)
                if j is not None:
                    x[r, j] = float(v)
        return x

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.linear(x)

    def probabilities(self, pairs: Iterable[tuple[str, str]]) -> torch.Tensor:
        with torch.no_grad():
            return torch.softmax(self(self.vectorize(pairs)).double(), dim=-1)

    def predict(self, claim, statement):
        pr_pro, pr_con = self.probabilities([(claim, statement)])[0].tolist()
        return StanceVerdict.from_probabilities(pr_pro, pr_con)

    def predict_labels(self, pairs: Iterable[tuple[str, str]]) -> list[str]:
        probs = self.probabilities(pairs)
        return [LABELS[int(i)] for i in probs.argmax(dim=-1)]


@dataclass(frozen=True)
class StanceTrainConfig:
    learning_rate: float = 2e-5
    epochs: int = 3
    batch_size: int = 64
    seed: int = 0
    min_feature_count: int = 1

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1 or self.learning_rate <= 0:
            raise ValueError("need epochs >= 0, batch_size >= 1, learning_rate > 0")


def evaluate_stance_classifier(classifier: StanceClassifier, pairs: Sequence[ClaimPair]) -> float:
    """Macro-F1 over pro and con."""
    if not pairs:
        raise ValueError("no pairs to evaluate")
    if hasattr(classifier, "predict_labels"):
        predicted = classifier.predict_labels([(p.claim, p.statement) for p in pairs])
    else:
        predicted = [classifier.predict(p.claim, p.statement).label for p in pairs]
    f1s = []
    for label in LABELS:
        tp = sum(1 for p, y in zip(predicted, pairs) if p == label and y.label == label)
        fp = sum(1 for p, y in zip(predicted, pairs) if p == label and y.label != label)
        fn = sum(1 for p, y in zip(predicted, pairs) if p != label and y.label == label)
        f1s.append(2 * tp / (2 * tp + fp + fn) if tp else 0.0)
    return sum(f1s) / len(f1s)


def train_stance(pairs: Sequence[ClaimPair], config: StanceTrainConfig = StanceTrainConfig(),
                 validation: Sequence[ClaimPair] | None = None) -> BagOfTokensClassifier:
    """Fit the bag-of-tokens classifier with Adam and cross-entropy.

    Without an explicit ``validation`` set, a tenth of the debates is held
    out. Per-epoch validation macro-F1 lands in ``classifier.history``. With
    ``epochs=0`` the classifier keeps its seeded random initialisation.
    """
    if {p.label for p in pairs} != set(LABELS):
        raise ValueError("training pairs must contain both pro and con")
    train_pairs = list(pairs)
    if validation is None:
        split = make_splits(train_pairs, (0.9, 0.1, 0.0), seed=config.seed)
        held = set(split.validation_ids)
        validation = [p for p in train_pairs if p.debate_id in held]
        train_pairs = [p for p in train_pairs if p.debate_id not in held] or list(pairs)

    counts: Counter = Counter()
    for p in train_pairs:
        counts.update(_pair_features(p.claim, p.statement).keys())
    features = sorted(f for f, n in counts.items() if n >= config.min_feature_count)
    model = BagOfTokensClassifier(features, seed=config.seed)
    if config.epochs == 0:
        return model

    x = model.vectorize((p.claim, p.statement) for p in train_pairs)
    y = torch.tensor([LABELS.index(p.label) for p in train_pairs])
    gen = torch.Generator().manual_seed(config.seed)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    loss_fn = nn.CrossEntropyLoss()
    for epoch in range(config.epochs):
        model.train()
        perm = torch.randperm(len(y), generator=gen)
        for start in range(0, len(y), config.batch_size):
            idx = perm[start:start + config.batch_size]
            optimizer.zero_grad()
            loss_fn(model(x[idx]), y[idx]).backward()
            optimizer.step()
        model.eval()
        f1 = evaluate_stance_classifier(model, validation) if validation else None
        model.history.append({"epoch": epoch + 1, "validation_f1": f1})
    return model


def save_classifier(model: BagOfTokensClassifier, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    torch.save(model.state_dict(), directory / "parameters.pt")
    (directory / "features.json").write_text(json.dumps([list(f) for f in model.features]))
    last_f1 = model.history[-1]["validation_f1"] if model.history else None
    manifest = {"backend_id": model.backend_id, "label_order": list(LABELS),
                "validation_f1": last_f1, "history": model.history}
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return directory


def load_classifier(directory: str | Path) -> BagOfTokensClassifier:
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    if manifest["backend_id"] != BagOfTokensClassifier.backend_id:
        raise ValueError(f"unsupported classifier backend {manifest['backend_id']!r}")
    if manifest["label_order"] != list(LABELS):
        raise ValueError("label order mismatch")
    features = [tuple(f) for f in json.loads((directory / "features.json").read_text())]
    model = BagOfTokensClassifier(features)
    model.load_state_dict(torch.load(directory / "parameters.pt", weights_only=True))
    model.history = manifest.get("history", [])
    model.eval()
    return model
