"""Concept extraction used to prompt diverse conclusions.

The default extractor is self-contained: candidate phrases are the n-grams
(up to four tokens) inside runs of non-stopword tokens, scored by
frequency times phrase length. Other extractors register under a string id.
"""

from __future__ import annotations

import json
import math
import os
import re
import urllib.request
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Protocol

from .text import STOPWORDS

MAX_PHRASE_TOKENS = 4
DEFAULT_M = 5

_CHUNK = re.compile(r"[^\w'\s]+")  # punctuation breaks a run
_TOKEN = re.compile(r"[\w']+")


@dataclass(frozen=True)
class Concept:
    phrase: str
    salience: float

    def __post_init__(self):
        if not any(t not in STOPWORDS for t in _TOKEN.findall(self.phrase.lower())):
            raise ValueError(f"concept {self.phrase!r} has no content token")
        if not math.isfinite(self.salience) or self.salience < 0:
            raise ValueError(f"bad salience {self.salience}")


class ConceptExtractor(Protocol):
    def __call__(self, premises: str, m: int) -> list[Concept]: ...


def _runs(text: str) -> list[list[str]]:
    runs = []
    for chunk in _CHUNK.split(text.lower()):
        current: list[str] = []
        for tok in _TOKEN.findall(chunk):
            if tok in STOPWORDS or tok.strip("'") == "":
                if current:
                    runs.append(current)
                current = []
            else:
                current.append(tok)
        if current:
            runs.append(current)
    return runs


def extract_concepts(premises: str, m: int = DEFAULT_M) -> list[Concept]:
    """Return up to ``m`` concepts by descending salience.

    Ties are broken by higher frequency, then by first occurrence.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0 or not premises.strip():
        return []
    freq: Counter[str] = Counter()
    first_seen: dict[str, int] = {}
    for run in _runs(premises):
        for n in range(1, MAX_PHRASE_TOKENS + 1):
            for i in range(len(run) - n + 1):
                phrase = " ".join(run[i:i + n])
                freq[phrase] += 1
                first_seen.setdefault(phrase, len(first_seen))
    ranked = sorted(
        freq,
        key=lambda ph: (-freq[ph] * len(ph.split()), -freq[ph], first_seen[ph]),
    )
    return [Concept(ph, float(freq[ph] * len(ph.split()))) for ph in ranked[:m]]


class ServiceConceptExtractor:
    """Concepts from an HTTP service.

    Reads ``COUNTERARG_CONCEPT_ENDPOINT`` and ``COUNTERARG_CONCEPT_KEY``. The
    service receives ``{"text", "m"}`` and must answer with a JSON list of
    ``{"phrase", "salience"}`` objects.
    """

    def __init__(self, endpoint: str | None = None, key: str | None = None, timeout: float = 30.0):
        self.endpoint = endpoint or os.environ.get("COUNTERARG_CONCEPT_ENDPOINT")
        self.key = key or os.environ.get("COUNTERARG_CONCEPT_KEY", "")
        if not self.endpoint:
            raise RuntimeError("COUNTERARG_CONCEPT_ENDPOINT is not set")
        self.timeout = timeout

    def _post(self, payload: dict) -> list:
        req = urllib.request.Request(
            self.endpoint,
            data=json.dumps(payload).encode(),
            headers={"Content-Type": "application/json", "apikey": self.key},
        )
        with urllib.request.urlopen(req, timeout=self.timeout) as resp:
            return json.loads(resp.read())

    def __call__(self, premises: str, m: int) -> list[Concept]:
        if m <= 0 or not premises.strip():
            return []
        concepts = [Concept(c["phrase"], float(c["salience"])) for c in self._post({"text": premises, "m": m})]
        seen, out = set(), []
        for c in sorted(concepts, key=lambda c: -c.salience):
            if c.phrase.lower() not in seen:
                seen.add(c.phrase.lower())
                out.append(c)
        return out[:m]


EXTRACTORS: dict[str, Callable[[], ConceptExtractor]] = {
    "noun-phrase": lambda: extract_concepts,
    "service": ServiceConceptExtractor,
}


def get_extractor(name: str) -> ConceptExtractor:
    try:
        return EXTRACTORS[name]()
    except KeyError:
        raise ValueError(f"unknown concept extractor {name!r}; known: {sorted(EXTRACTORS)}") from None
