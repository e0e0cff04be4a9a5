"""Tokenization, sentence segmentation and the fixed stopword list."""

from __future__ import annotations

import re

_SENTENCE_BOUNDARY = re.compile(r"(?<=[.!?])\s+")
_WORD = re.compile(r"[a-z0-9]+(?:'[a-z]+)?")

# Fixed list used by concept extraction and content-token overlap.
STOPWORDS = frozenset(
    """
    a about above after again against all also am an and any are aren't as at
    be because been before being below between both but by can can't cannot
    could couldn't did didn't do does doesn't doing don't down during each even
    ever every few for from further get gets got had hadn't has hasn't have
    haven't having he her here hers herself him himself his how however i if in
    into is isn't it it's its itself just let's like make makes many may me
    might more most much must mustn't my myself never no nor not now of off on
    once only or other ought our ours ourselves out over own perhaps quite
    rather really same shall she should shouldn't so some such than that that's
    the their theirs them themselves then there there's these they this those
    though through thus to too under until up upon us very was wasn't we were
    weren't what when where whether which while who whom whose why will with
    within without won't would wouldn't yet you your yours yourself yourselves
    """.split()
)


def tokenize(text: str) -> list[str]:
    """Whitespace tokenization; the token inventory of the generation models."""
    return text.split()


def detokenize(tokens) -> str:
    return " ".join(tokens)


def words(text: str) -> list[str]:
    """Lowercased alphanumeric word tokens, punctuation dropped."""
    return _WORD.findall(text.lower())


def content_tokens(text: str) -> list[str]:
    return [w for w in words(text) if w not in STOPWORDS]


def split_sentences(text: str) -> list[str]:
    """Split on terminal punctuation followed by whitespace.

    Never returns empty strings; text without a terminal mark is one sentence.
    """
    return [s.strip() for s in _SENTENCE_BOUNDARY.split(text) if s.strip()]
