import random

import pytest
import torch
from hypothesis import given
from hypothesis import strategies as st

from counterarg.corpus import ClaimPair
from counterarg.generation import CandidatePair
from counterarg.stance import (
    LookupClassifier,
    StanceTrainConfig,
    StanceVerdict,
    TransformerStanceClassifier,
    classify_stance,
    counter_contrastiveness,
    evaluate_stance_classifier,
    load_classifier,
    rank_candidates,
    save_classifier,
    sentence_contrastiveness,
    split_sentences,
    train_stance,
)
from counterarg.synthetic import negation_pairs


class SentenceTable:
    """Classifier that looks up a verdict per statement only."""

    def __init__(self, table):
        self.table = table

    def predict(self, claim, statement):
        return StanceVerdict(*self.table[statement])


def test_lookup_passthrough():
    clf = LookupClassifier({("c", "s"): ("con", 0.8)})
    assert classify_stance(clf, "c", "s") == StanceVerdict("con", 0.8)
    with pytest.raises(KeyError):
        clf.predict("c", "other")
    with pytest.raises(ValueError):
        classify_stance(clf, " ", "s")


def test_verdict_validation_and_complements():
    v = StanceVerdict("pro", 0.7)
    assert v.pr_pro == 0.7 and v.pr_con == pytest.approx(0.3)
    assert StanceVerdict.from_probabilities(0.5, 0.5).label == "pro"
    for bad in [("maybe", 0.5), ("pro", 1.2), ("con", -0.1)]:
        with pytest.raises(ValueError):
            StanceVerdict(*bad)


def test_sentence_contrastiveness_sign():
    assert sentence_contrastiveness(StanceVerdict("con", 0.8)) == 0.8
    assert sentence_contrastiveness(StanceVerdict("pro", 0.6)) == -0.6


def test_counter_mean_worked_example():
    clf = SentenceTable({"One.": ("con", 0.9), "Two.": ("pro", 0.3), "Three.": ("con", 0.6)})
    assert counter_contrastiveness("claim", "One. Two. Three.", clf) == pytest.approx(0.4, abs=1e-12)
    with pytest.raises(ValueError):
        counter_contrastiveness("claim", "  ", clf)


@given(st.lists(st.tuples(st.sampled_from(["pro", "con"]), st.floats(0, 1)), min_size=1, max_size=12))
def test_counter_score_bounded(verdicts):
    sentences = [f"s{i}." for i in range(len(verdicts))]
    clf = SentenceTable(dict(zip(sentences, verdicts)))
    score = counter_contrastiveness("c", " ".join(sentences), clf)
    assert -1.0 <= score <= 1.0


def test_more_con_sentences_raise_score():
    clf = SentenceTable({"a.": ("pro", 0.9), "b.": ("con", 0.9)})
    assert counter_contrastiveness("c", "b. b. a.", clf) > counter_contrastiveness("c", "b. a. a.", clf)


def test_split_sentences():
    assert split_sentences("A. B!") == ["A.", "B!"]
    assert split_sentences("   ") == []
    rng = random.Random(0)
    for _ in range(100):
        toks = [rng.choice(["x", "y.", "z!", "w?", "v"]) for _ in range(rng.randint(1, 30))]
        doc = " ".join(toks)
        assert " ".join(split_sentences(doc)).split() == toks


def _cands(n):
    return [CandidatePair("conc", f"s{i}.") for i in range(n)]


def test_ranking_worked_example_and_ties():
    scores = [0.2, 0.9, 0.9, -0.5]
    clf = SentenceTable({f"s{i}.": ("con" if s >= 0 else "pro", abs(s)) for i, s in enumerate(scores)})
    ranked = rank_candidates(_cands(4), clf)
    assert [c.counter for c in ranked] == ["s1.", "s2.", "s0.", "s3."]
    assert ranked.top.score == 0.9
    with pytest.raises(ValueError):
        rank_candidates([], clf)


def test_ranking_shared_conclusion():
    clf = LookupClassifier({("shared", "x."): ("con", 0.7), ("shared", "y."): ("con", 0.2)})
    cands = [CandidatePair("ignored", "y."), CandidatePair("ignored", "x.")]
    ranked = rank_candidates(cands, clf, shared_conclusion="shared")
    assert ranked.top.counter == "x."


def test_negation_classifier_and_defaults():
    assert (StanceTrainConfig().learning_rate, StanceTrainConfig().epochs,
            StanceTrainConfig().batch_size) == (2e-5, 3, 64)
    pairs = negation_pairs(700, seed=1)
    clf = train_stance(pairs[:500], StanceTrainConfig(learning_rate=0.05, epochs=10, batch_size=32))
    assert evaluate_stance_classifier(clf, pairs[500:]) >= 0.95
    assert len(clf.history) == 10
    assert clf.predict("cats can eat fish", "cats can not eat fish").label == "con"


def test_train_stance_needs_both_labels():
    pairs = [p for p in negation_pairs(40) if p.label == "pro"]
    with pytest.raises(ValueError):
        train_stance(pairs)


def test_zero_epochs_keeps_initialisation():
    pairs = negation_pairs(60)
    a = train_stance(pairs, StanceTrainConfig(epochs=0))
    b = train_stance(pairs, StanceTrainConfig(epochs=0))
    assert a.history == []
    assert torch.equal(a.linear.weight, b.linear.weight)


def test_macro_f1_oracles():
    pairs = [ClaimPair("c", f"s{i}", "pro" if i % 2 else "con", "d") for i in range(10)]
    perfect = LookupClassifier({(p.claim, p.statement): (p.label, 0.9) for p in pairs})
    assert evaluate_stance_classifier(perfect, pairs) == 1.0
    # always pro on a balanced set: F1(pro)=2/3, F1(con)=0
    constant = LookupClassifier({}, default=("pro", 0.9))
    assert evaluate_stance_classifier(constant, pairs) == pytest.approx(1 / 3)


def test_classifier_round_trip(tmp_path):
    pairs = negation_pairs(120, seed=2)
    clf = train_stance(pairs, StanceTrainConfig(learning_rate=0.05, epochs=2, batch_size=32))
    save_classifier(clf, tmp_path)
    loaded = load_classifier(tmp_path)
    probe = [(p.claim, p.statement) for p in pairs[:20]]
    assert torch.equal(clf.probabilities(probe), loaded.probabilities(probe))
    assert loaded.history == clf.history


def test_transformer_adapter_with_tiny_model():
    transformers = pytest.importorskip("transformers")
    config = transformers.BertConfig(vocab_size=30, hidden_size=8, num_hidden_layers=1,
                                     num_attention_heads=2, intermediate_size=16, num_labels=2)
    torch.manual_seed(0)
    model = transformers.BertForSequenceClassification(config)

    def tokenizer(claim, statement, **_):
        ids = [2] + [3 + len(w) % 20 for w in (claim + " " + statement).split()] + [1]
        return {"input_ids": torch.tensor([ids]), "attention_mask": torch.ones(1, len(ids), dtype=torch.long)}

    clf = TransformerStanceClassifier(model, tokenizer, pro_index=1)
    verdict = clf.predict("tax is good", "tax is not good")
    with torch.no_grad():
        probs = torch.softmax(model(**tokenizer("tax is good", "tax is not good")).logits[0].double(), -1)
    assert verdict.pr_pro == pytest.approx(float(probs[1]), abs=1e-12)
    assert verdict.probability >= 0.5
