"""Automatic metrics and the length / implicitness quintile analysis."""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Protocol, Sequence

import numpy as np

from .concepts import extract_concepts
from .corpus import Argument, conclusion_implicitness, quintile_split
from .stance import StanceClassifier, classify_stance, counter_contrastiveness

MAX_ORDER = 4
DIMENSIONS = ("length", "implicitness")
PLOT_COLUMNS = ("dimension", "bin_index", "bin_low", "bin_high", "n", "semantic_f1",
                "contrastiveness")


class JoinError(ValueError):
    pass


class TargetExtractionError(ValueError):
    pass


def _tokens(text: str) -> list[str]:
    return text.lower().split()


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def sentence_bleu(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """BLEU-4 of one tokenized candidate against one reference.

    Orders 2-4 use add-one smoothing; unigram precision is unsmoothed.
    """
    if not candidate:
        return 0.0
    log_sum = 0.0
    for n in range(1, MAX_ORDER + 1):
        cand, ref = _ngrams(candidate, n), _ngrams(reference, n)
        matches = sum(min(c, ref[g]) for g, c in cand.items())
        total = sum(cand.values())
        if n == 1:
            if matches == 0:
                return 0.0
            precision = matches / total
        else:
            precision = (matches + 1) / (total + 1)
        log_sum += math.log(precision)
    c, r = len(candidate), len(reference)
    brevity = 1.0 if c > r else math.exp(1.0 - r / c)
    return brevity * math.exp(log_sum / MAX_ORDER)


def bleu(candidate: str, references: Sequence[str]) -> float:
    """Best sentence BLEU over the references (0.0 for an empty candidate)."""
    if not references:
        raise ValueError("references must be non-empty")
    cand = _tokens(candidate)
    return max(sentence_bleu(cand, _tokens(ref)) for ref in references)


class Embedder(Protocol):
    def embed(self, tokens: Sequence[str]) -> np.ndarray:
        """One row vector per token."""


class OneHotEmbedder:
    """Exact-match embedder: each distinct token gets its own axis."""

    def embed(self, tokens):
        index = {t: i for i, t in enumerate(dict.fromkeys(tokens))}
        vectors = np.zeros((len(tokens), max(len(index), 1)))
        for row, t in enumerate(tokens):
            vectors[row, index[t]] = 1.0
        return vectors


class TransformerTokenEmbedder:
    """Contextual token vectors from a Hugging Face encoder (last hidden layer)."""

    def __init__(self, model, tokenizer):
        self.model = model.eval()
        self.tokenizer = tokenizer

    @classmethod
    def from_pretrained(cls, name_or_path: str) -> "TransformerTokenEmbedder":
        from transformers import AutoModel, AutoTokenizer

        return cls(AutoModel.from_pretrained(name_or_path), AutoTokenizer.from_pretrained(name_or_path))

    def embed(self, tokens):
        import torch

        enc = self.tokenizer(list(tokens), is_split_into_words=True, return_tensors="pt",
                             truncation=True)
        with torch.no_grad():
            hidden = self.model(**enc).last_hidden_state[0].double().numpy()
        # average word pieces back onto the input words
        word_ids = enc.word_ids(0)
        out = np.zeros((len(tokens), hidden.shape[1]))
        counts = np.zeros(len(tokens))
        for row, w in enumerate(word_ids):
            if w is not None:
                out[w] += hidden[row]
                counts[w] += 1
        return out / np.maximum(counts, 1)[:, None]


def _greedy_f1(candidate: list[str], reference: list[str], embedder: Embedder) -> float:
    vectors = np.asarray(embedder.embed(candidate + reference), dtype=np.float64)
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    vectors = vectors / np.where(norms == 0, 1.0, norms)
    sim = vectors[: len(candidate)] @ vectors[len(candidate):].T
    precision = float(sim.max(axis=1).mean())
    recall = float(sim.max(axis=0).mean())
    if precision + recall <= 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def semantic_f1(candidate: str, references: Sequence[str],
                embedder: Embedder | None = None) -> float:
    """Greedy token-alignment F1, best over the references.

    Precision averages each candidate token's best cosine match in the
    reference; recall does the same from the reference side.
    """
    if not references:
        raise ValueError("references must be non-empty")
    embedder = embedder or OneHotEmbedder()
    cand = _tokens(candidate)
    if not cand:
        return 0.0
    scores = [_greedy_f1(cand, _tokens(ref), embedder) for ref in references if _tokens(ref)]
    return min(1.0, max(0.0, max(scores, default=0.0)))


def contrastiveness_metric(pairs: Iterable[tuple[str, str]], classifier: StanceClassifier) -> float:
    """Mean counter contrastiveness over ``(counter, gold_conclusion)`` pairs."""
    scores = [counter_contrastiveness(conclusion, counter, classifier) for counter, conclusion in pairs]
    if not scores:
        raise ValueError("empty evaluation set")
    return sum(scores) / len(scores)


def default_target_extractor(conclusion: str) -> str:
    """Most salient concept of the conclusion."""
    concepts = extract_concepts(conclusion, 1)
    if not concepts:
        raise TargetExtractionError(f"no target in {conclusion!r}")
    return concepts[0].phrase


class ClassifierStanceScorer:
    """Signed stance of a text towards a target: +pr_pro or -pr_con."""

    def __init__(self, classifier: StanceClassifier):
        self.classifier = classifier

    def __call__(self, text: str, target: str) -> float:
        verdict = classify_stance(self.classifier, target, text)
        return verdict.probability if verdict.label == "pro" else -verdict.probability


def target_stance_scores(instances: Iterable[tuple[str, str]],
                         target_extractor: Callable[[str], str],
                         stance_scorer: Callable[[str, str], float]) -> list[float | None]:
    """Per-instance |score(counter) - score(conclusion)|; None where extraction failed."""
    scores: list[float | None] = []
    for conclusion, counter in instances:
        try:
            target = target_extractor(conclusion)
        except TargetExtractionError:
            scores.append(None)
            continue
        scores.append(abs(stance_scorer(counter, target) - stance_scorer(conclusion, target)))
    return scores


def target_stance_metric(instances: Iterable[tuple[str, str]],
                         target_extractor: Callable[[str], str] = default_target_extractor,
                         stance_scorer: Callable[[str, str], float] | None = None) -> float:
    if stance_scorer is None:
        raise ValueError("a stance scorer is required")
    kept = [s for s in target_stance_scores(instances, target_extractor, stance_scorer) if s is not None]
    if not kept:
        raise ValueError("no instance had an extractable target")
    return sum(kept) / len(kept)


@dataclass(frozen=True)
class BinStats:
    index: int
    low: float
    high: float
    n: int
    semantic_f1: float
    contrastiveness: float


@dataclass(frozen=True)
class BinAnalysis:
    dimension: str
    bins: tuple[BinStats, ...]

    def __post_init__(self):
        if self.dimension not in DIMENSIONS:
            raise ValueError(f"dimension must be one of {DIMENSIONS}")
        if len(self.bins) != 5:
            raise ValueError("expected exactly 5 bins")
        if any(a.high > b.low for a, b in zip(self.bins, self.bins[1:])):
            raise ValueError("bin ranges must be ordered")

    def rows(self) -> list[dict]:
        return [{"dimension": self.dimension, "bin_index": b.index, "bin_low": b.low,
                 "bin_high": b.high, "n": b.n, "semantic_f1": b.semantic_f1,
                 "contrastiveness": b.contrastiveness} for b in self.bins]

    def to_json(self) -> dict:
        return {"dimension": self.dimension, "bins": [asdict(b) for b in self.bins]}


@dataclass
class EvalReport:
    bleu: float
    semantic_f1: float
    contrastiveness: float
    stance_diff: float | None
    n_instances: int
    n_stance_skipped: int = 0
    per_bin: dict[str, BinAnalysis] = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if k != "per_bin"}
        out["per_bin"] = {k: v.to_json() for k, v in sorted(self.per_bin.items())}
        return out


def _select_counters(generated: Iterable[Mapping]) -> dict[str, str]:
    # lowest rank wins; records without a rank keep the first seen
    chosen: dict[str, tuple[float, str]] = {}
    for rec in generated:
        key = str(rec["argument_id"])
        rank = rec.get("rank", math.inf)
        if key not in chosen or rank < chosen[key][0]:
            chosen[key] = (rank, rec["counter"])
    return {k: v[1] for k, v in chosen.items()}


def evaluate_run(generated: Iterable[Mapping], gold: Iterable[Argument],
                 classifier: StanceClassifier, embedder: Embedder | None = None,
                 extractor: Callable[[str], str] = default_target_extractor,
                 scorer: Callable[[str, str], float] | None = None) -> tuple[EvalReport, list[dict]]:
    """Score the selected counter of every generated argument against the gold data.

    Returns the report and the per-instance scores, ordered by argument id.
    """
    embedder = embedder or OneHotEmbedder()
    scorer = scorer or ClassifierStanceScorer(classifier)
    counters = _select_counters(generated)
    if not counters:
        raise JoinError("no generated counters")
    by_id = {a.id: a for a in gold}
    missing = sorted(set(counters) - set(by_id))
    if missing:
        raise JoinError(f"generated ids missing from gold: {missing}")
    no_refs = sorted(k for k in counters if not by_id[k].counters)
    if no_refs:
        raise JoinError(f"gold arguments without reference counters: {no_refs}")

    instances = []
    for key in sorted(counters):
        arg, counter = by_id[key], counters[key]
        refs = [c.text for c in arg.counters]
        stance = target_stance_scores([(arg.conclusion, counter)], extractor, scorer)[0]
        instances.append({
            "argument_id": key,
            "counter": counter,
            "empty_candidate": not counter.strip(),
            "bleu": bleu(counter, refs),
            "semantic_f1": semantic_f1(counter, refs, embedder),
            "contrastiveness": counter_contrastiveness(arg.conclusion, counter, classifier)
            if counter.strip() else 0.0,
            "stance_diff": stance,
        })
    n = len(instances)
    stance_values = [i["stance_diff"] for i in instances if i["stance_diff"] is not None]
    report = EvalReport(
        bleu=sum(i["bleu"] for i in instances) / n,
        semantic_f1=sum(i["semantic_f1"] for i in instances) / n,
        contrastiveness=sum(i["contrastiveness"] for i in instances) / n,
        stance_diff=sum(stance_values) / len(stance_values) if stance_values else None,
        n_instances=n,
        n_stance_skipped=n - len(stance_values),
    )
    return report, instances


def dimension_value(argument: Argument, dimension: str) -> float:
    if dimension == "length":
        return float(argument.token_length)
    if dimension == "implicitness":
        if argument.implicitness is not None:
            return argument.implicitness
        return conclusion_implicitness(argument)
    raise ValueError(f"dimension must be one of {DIMENSIONS}")


def analysis_report(instance_scores: Sequence[Mapping], arguments: Iterable[Argument] | Mapping[str, Argument],
                    dimension: str) -> BinAnalysis:
    """Quintiles of the instances by argument length or conclusion implicitness."""
    by_id = dict(arguments) if isinstance(arguments, Mapping) else {a.id: a for a in arguments}
    unknown = sorted({str(s["argument_id"]) for s in instance_scores} - set(by_id))
    if unknown:
        raise JoinError(f"instances without a matching argument: {unknown}")
    keyed = [(s, dimension_value(by_id[str(s["argument_id"])], dimension)) for s in instance_scores]
    bins = []
    for i, members in enumerate(quintile_split(keyed)):
        n = len(members)
        bins.append(BinStats(
            index=i,
            low=members[0][1],
            high=members[-1][1],
            n=n,
            semantic_f1=sum(s["semantic_f1"] for s, _ in members) / n,
            contrastiveness=sum(s["contrastiveness"] for s, _ in members) / n,
        ))
    return BinAnalysis(dimension, tuple(bins))


def write_plot_csv(analyses: Iterable[BinAnalysis], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=PLOT_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for analysis in analyses:
            writer.writerows(analysis.rows())
