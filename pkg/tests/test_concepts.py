import re
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from counterarg.concepts import Concept, ServiceConceptExtractor, extract_concepts, get_extractor
from counterarg.text import STOPWORDS


def test_empty_text_and_zero_m():
    assert extract_concepts("", 5) == []
    assert extract_concepts("meat production harms animals.", 0) == []


def test_meat_production_is_top_concept():
    text = "meat production harms animals. meat production is cheap."
    # oracle: every n-gram (n <= 4) inside stopword/punctuation-delimited runs
    counts = Counter()
    for clause in re.split(r"[.]", text):
        run = []
        for w in clause.split() + ["is"]:
            if w in STOPWORDS:
                for n in range(1, 5):
                    for i in range(len(run) - n + 1):
                        counts[" ".join(run[i:i + n])] += 1
                run = []
            else:
                run.append(w)
    best = max(counts, key=lambda p: (counts[p] * len(p.split()), counts[p]))
    assert best == "meat production"
    [top] = extract_concepts(text, 1)
    assert top == Concept("meat production", 4.0)


@given(st.text(alphabet="abc .,", max_size=80), st.integers(0, 6))
def test_output_invariants(text, m):
    out = extract_concepts(text, m)
    assert len(out) <= m
    assert all(a.salience >= b.salience for a, b in zip(out, out[1:]))
    folded = [c.phrase.lower() for c in out]
    assert len(folded) == len(set(folded))
    assert extract_concepts(text, m) == out


def test_case_normalised_deduplication():
    out = extract_concepts("Tax reform. tax REFORM. TAX reform.", 3)
    assert out[0].phrase == "tax reform"
    assert len({c.phrase for c in out}) == len(out)


def test_concept_requires_content_token():
    with pytest.raises(ValueError):
        Concept("the of", 1.0)


def test_registry():
    assert get_extractor("noun-phrase") is extract_concepts
    with pytest.raises(ValueError):
        get_extractor("nope")


def test_service_extractor_reads_env_and_dedupes(monkeypatch):
    monkeypatch.setenv("COUNTERARG_CONCEPT_ENDPOINT", "http://localhost:1/concepts")
    ext = ServiceConceptExtractor()
    seen = {}

    def fake_post(payload):
        seen.update(payload)
        return [{"phrase": "Tax", "salience": 0.2}, {"phrase": "health care", "salience": 0.9},
                {"phrase": "tax", "salience": 0.1}]

    monkeypatch.setattr(ext, "_post", fake_post)
    out = ext("premises text", 5)
    assert seen == {"text": "premises text", "m": 5}
    assert [c.phrase for c in out] == ["health care", "Tax"]


def test_service_extractor_needs_endpoint(monkeypatch):
    monkeypatch.delenv("COUNTERARG_CONCEPT_ENDPOINT", raising=False)
    with pytest.raises(RuntimeError):
        ServiceConceptExtractor()
