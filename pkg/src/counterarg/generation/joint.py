"""Single-sequence rendering of a (conclusion, counter) target."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from ..text import detokenize, tokenize

CONCLUSION = "<conclusion>"
COUNTER = "<counter>"
MARKERS = (CONCLUSION, COUNTER)


class FormatError(ValueError):
    pass


class ParseError(ValueError):
    pass


@dataclass(frozen=True)
class JointTarget:
    conclusion_tokens: tuple[str, ...]
    counter_tokens: tuple[str, ...]

    @property
    def joined(self) -> tuple[str, ...]:
        return (CONCLUSION, *self.conclusion_tokens, COUNTER, *self.counter_tokens)


@dataclass(frozen=True)
class TrainingExample:
    premise_tokens: tuple[str, ...]
    target: JointTarget

    def __post_init__(self):
        if not self.premise_tokens:
            raise ValueError("premise_tokens is empty")


def format_joint_target(conclusion: str, counter: str,
                        tokenizer: Callable[[str], list[str]] = tokenize) -> JointTarget:
    for name, text in (("conclusion", conclusion), ("counter", counter)):
        if not text.strip():
            raise FormatError(f"{name} is empty")
        for marker in MARKERS:
            if marker in text:
                raise FormatError(f"{name} contains the reserved marker {marker}")
    return JointTarget(tuple(tokenizer(conclusion)), tuple(tokenizer(counter)))


def parse_joint_output(sequence: Sequence[str], ignore: frozenset[str] = frozenset()) -> tuple[str, str]:
    """Split a decoded sequence into (conclusion, counter) text.

    The conclusion is what lies between the first conclusion marker and the
    first counter marker; the counter is everything after. Stray markers and
    tokens in ``ignore`` are dropped from both parts.
    """
    seq = list(sequence)
    try:
        c_at = seq.index(CONCLUSION)
    except ValueError:
        raise ParseError("missing conclusion marker") from None
    try:
        k_at = seq.index(COUNTER)
    except ValueError:
        raise ParseError("missing counter marker") from None
    if k_at < c_at:
        raise ParseError("counter marker precedes conclusion marker")
    drop = set(MARKERS) | set(ignore)
    conclusion = [t for t in seq[c_at + 1:k_at] if t not in drop]
    counter = [t for t in seq[k_at + 1:] if t not in drop]
    return detokenize(conclusion), detokenize(counter)
