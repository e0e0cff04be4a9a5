"""Argument and claim-pair ingestion, counter selection, splits and quintiles."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .text import content_tokens, split_sentences, tokenize

LABELS = ("pro", "con")
RELATION_TO_LABEL = {"supporting": "pro", "opposing": "con"}


class RecordError(ValueError):
    """A JSON-lines record was rejected during ingestion."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        where = f"line {line_no}: " if line_no is not None else ""
        super().__init__(where + message)


class IngestionError(ValueError):
    pass


@dataclass(frozen=True)
class CounterCandidate:
    text: str
    quality: float | None = None

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("counter text is empty")
        if self.quality is not None and not 0.0 <= self.quality <= 1.0:
            raise ValueError(f"quality {self.quality} outside [0, 1]")


@dataclass(frozen=True)
class Argument:
    id: str
    conclusion: str
    premises: str
    counters: tuple[CounterCandidate, ...] = ()
    token_length: int = 0
    implicitness: float | None = None

    def __post_init__(self):
        if not self.premises.strip():
            raise ValueError(f"argument {self.id}: premises are empty")
        expected = len(tokenize(self.premises))
        if self.token_length == 0:
            object.__setattr__(self, "token_length", expected)
        elif self.token_length != expected:
            raise ValueError(f"argument {self.id}: token_length {self.token_length} != {expected}")
        if self.implicitness is not None and not 0.0 <= self.implicitness <= 1.0:
            raise ValueError(f"argument {self.id}: implicitness outside [0, 1]")

    def to_record(self) -> dict:
        record = {
            "id": self.id,
            "title": self.conclusion,
            "post": self.premises,
            "comments": [
                {"text": c.text} if c.quality is None else {"text": c.text, "quality": c.quality}
                for c in self.counters
            ],
        }
        if self.implicitness is not None:
            record["implicitness"] = self.implicitness
        return record


@dataclass(frozen=True)
class ClaimPair:
    claim: str
    statement: str
    label: str
    debate_id: str

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"label must be one of {LABELS}, got {self.label!r}")
        if not self.claim.strip() or not self.statement.strip():
            raise ValueError("claim and statement must be non-empty")

    def to_record(self) -> dict:
        return {"claim": self.claim, "statement": self.statement, "label": self.label,
                "debate_id": self.debate_id}


@dataclass(frozen=True)
class SplitSpec:
    train_ids: tuple[str, ...]
    validation_ids: tuple[str, ...]
    test_ids: tuple[str, ...]

    def __post_init__(self):
        a, b, c = set(self.train_ids), set(self.validation_ids), set(self.test_ids)
        if a & b or a & c or b & c:
            raise ValueError("split id collections overlap")

    def to_json(self) -> dict:
        return {"train": list(self.train_ids), "validation": list(self.validation_ids),
                "test": list(self.test_ids)}

    @classmethod
    def from_json(cls, obj: dict) -> "SplitSpec":
        return cls(tuple(obj["train"]), tuple(obj["validation"]), tuple(obj["test"]))

    def part_of(self, key: str) -> str:
        for name, ids in (("train", self.train_ids), ("validation", self.validation_ids),
                          ("test", self.test_ids)):
            if key in ids:
                return name
        raise KeyError(key)


# -- ingestion ---------------------------------------------------------------

def parse_argument_record(line: str, line_no: int | None = None) -> Argument:
    """Map one post record (title, post, comments) onto an Argument."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise RecordError(f"malformed JSON ({exc.msg})", line_no) from None
    if not isinstance(obj, dict):
        raise RecordError("record is not a JSON object", line_no)
    for key in ("id", "title", "post", "comments"):
        if key not in obj:
            raise RecordError(f"missing required key {key!r}", line_no)
    if not isinstance(obj["post"], str) or not obj["post"].strip():
        raise RecordError("empty premises (post)", line_no)
    try:
        counters = tuple(
            CounterCandidate(c["text"], None if c.get("quality") is None else float(c["quality"]))
            for c in obj["comments"]
        )
        return Argument(
            id=str(obj["id"]),
            conclusion=obj["title"],
            premises=obj["post"],
            counters=counters,
            implicitness=obj.get("implicitness"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise RecordError(f"invalid record: {exc}", line_no) from None


def load_arguments(path: str | Path) -> list[Argument]:
    arguments = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            if line.strip():
                arguments.append(parse_argument_record(line, i))
    return arguments


def write_arguments(arguments: Iterable[Argument], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for a in arguments:
            fh.write(json.dumps(a.to_record(), sort_keys=True) + "\n")


def load_claim_pairs(path: str | Path) -> list[ClaimPair]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                pairs.append(ClaimPair(obj["claim"], obj["statement"], obj["label"],
                                       str(obj["debate_id"])))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise RecordError(f"invalid claim pair: {exc}", i) from None
    return pairs


def write_claim_pairs(pairs: Iterable[ClaimPair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(json.dumps(p.to_record(), sort_keys=True) + "\n")


# -- counter selection ---------------------------------------------------------

def length_quality(text: str, cap: int = 100) -> float:
    """Fallback quality for unscored corpora: token count over ``cap``, capped at 1."""
    return min(len(tokenize(text)), cap) / cap


def select_best_counter(
    counters: Sequence[CounterCandidate],
    scorer: Callable[[str], float] = length_quality,
) -> CounterCandidate:
    """Return the highest-quality counter; missing qualities come from ``scorer``.

    Ties go to the lowest index.
    """
    if not counters:
        raise ValueError("no counter candidates to select from")
    best, best_q = None, -math.inf
    for c in counters:
        q = c.quality if c.quality is not None else scorer(c.text)
        if q > best_q:
            best, best_q = c, q
    return best


# -- conclusion implicitness ----------------------------------------------------

def token_overlap(conclusion: str, sentence: str) -> float:
    """Share of the conclusion's distinct content tokens found in ``sentence``."""
    c = set(content_tokens(conclusion))
    if not c:
        return 0.0
    return len(c & set(content_tokens(sentence))) / len(c)


def conclusion_implicitness(
    argument: Argument,
    similarity: Callable[[str, str], float] = token_overlap,
    splitter: Callable[[str], list[str]] = split_sentences,
) -> float:
    """Max similarity of the conclusion to any premise sentence.

    Higher means the conclusion is stated more explicitly in the premises.
    """
    if not argument.conclusion.strip():
        raise ValueError(f"argument {argument.id}: empty conclusion")
    sentences = splitter(argument.premises)
    if not sentences:
        raise ValueError(f"argument {argument.id}: premises have no sentences")
    return max(similarity(argument.conclusion, s) for s in sentences)


# -- claim pairs -----------------------------------------------------------------

def build_claim_pairs(debate_tree: dict) -> list[ClaimPair]:
    """Flatten a debate tree into (parent, child) claim pairs.

    The tree is nested dicts: ``{"id", "text", "children": [{"text",
    "relation", "children"}, ...]}`` with relation ``supporting`` or
    ``opposing``. The root id becomes the debate id of every pair.
    """
    debate_id = str(debate_tree["id"])
    pairs: list[ClaimPair] = []
    stack = [debate_tree]
    while stack:
        node = stack.pop()
        children = node.get("children", [])
        for child in children:
            relation = child.get("relation")
            if relation not in RELATION_TO_LABEL:
                raise IngestionError(f"debate {debate_id}: unknown relation {relation!r}")
            pairs.append(ClaimPair(node["text"], child["text"], RELATION_TO_LABEL[relation],
                                   debate_id))
        stack.extend(reversed(children))
    return pairs


# -- splits and quintiles ----------------------------------------------------------

def _group_key(record) -> str:
    if isinstance(record, ClaimPair):
        return record.debate_id
    if isinstance(record, Argument):
        return record.id
    if isinstance(record, dict):
        return str(record.get("debate_id", record.get("id")))
    return str(record)


def _apportion(n: int, ratios: Sequence[float]) -> list[int]:
    # largest remainder, ties to the earlier part
    raw = [r * n for r in ratios]
    sizes = [math.floor(x) for x in raw]
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - sizes[i]), i))
    for i in order[: n - sum(sizes)]:
        sizes[i] += 1
    return sizes


def make_splits(records: Iterable, ratios: Sequence[float] = (0.8, 0.1, 0.1),
                seed: int = 0) -> SplitSpec:
    """Split records into train/validation/test by group.

    Claim pairs are grouped by debate, arguments by their own id, so no
    group straddles two splits.
    """
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must be three non-negative values summing to 1, got {ratios}")
    groups = sorted({_group_key(r) for r in records})
    random.Random(seed).shuffle(groups)
    n_train, n_val, _ = _apportion(len(groups), ratios)
    return SplitSpec(
        tuple(groups[:n_train]),
        tuple(groups[n_train:n_train + n_val]),
        tuple(groups[n_train + n_val:]),
    )


def quintile_split(scored_instances: Iterable[tuple[object, float]], n_bins: int = 5) -> list[list]:
    """Sort ascending by score and cut into ``n_bins`` contiguous bins.

    Bin sizes differ by at most one; the extra items go to the earlier bins.
    """
    items = sorted(scored_instances, key=lambda pair: pair[1])
    if len(items) < n_bins:
        raise ValueError(f"need at least {n_bins} instances, got {len(items)}")
    q, r = divmod(len(items), n_bins)
    bins, start = [], 0
    for b in range(n_bins):
        size = q + (1 if b < r else 0)
        bins.append(items[start:start + size])
        start += size
    return bins


def training_arguments(arguments: Iterable[Argument]) -> list[Argument]:
    """Arguments usable for training, i.e. with at least one gold counter."""
    return [a for a in arguments if a.counters]
