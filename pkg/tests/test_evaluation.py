import csv
import math
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import synthetic_arguments
from counterarg.corpus import Argument, CounterCandidate
from counterarg.evaluation import (
    PLOT_COLUMNS,
    ClassifierStanceScorer,
    JoinError,
    OneHotEmbedder,
    TargetExtractionError,
    analysis_report,
    bleu,
    contrastiveness_metric,
    evaluate_run,
    semantic_f1,
    target_stance_metric,
    target_stance_scores,
    write_plot_csv,
)
from counterarg.stance import LookupClassifier

ALWAYS_CON = LookupClassifier({}, default=("con", 0.75))


def test_bleu_fixtures():
    assert bleu("the cat sat on the mat", ["the cat sat on the mat"]) == pytest.approx(1.0, abs=1e-12)
    assert bleu("alpha beta gamma", ["delta epsilon zeta"]) == 0.0
    assert bleu("", ["x"]) == 0.0
    # unigram 3/3, smoothed higher orders all 1, brevity exp(1 - 4/3)
    assert abs(bleu("the cat sat", ["the cat sat down"]) - math.exp(1 - 4 / 3)) < 1e-9
    assert bleu("the cat sat", ["dog", "the cat sat"]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        bleu("x", [])


def test_bleu_partial_overlap_by_hand():
    cand, ref = "a b c d e", "a b x d e f"
    # p1 = 4/5, p2 = (2+1)/(4+1), p3 = (0+1)/(3+1), p4 = (0+1)/(2+1); c=5 < r=6
    expected = math.exp(1 - 6 / 5) * math.exp((math.log(4 / 5) + math.log(3 / 5)
                                                 + math.log(1 / 4) + math.log(1 / 3)) / 4)
    assert abs(bleu(cand, [ref]) - expected) < 1e-9


@given(st.lists(st.sampled_from("abcde"), min_size=1, max_size=12),
       st.lists(st.sampled_from("abcxy"), min_size=1, max_size=12))
def test_bleu_in_unit_interval(c, r):
    assert 0.0 <= bleu(" ".join(c), [" ".join(r)]) <= 1.0


def test_semantic_f1_worked_example():
    assert abs(semantic_f1("a b c", ["a b d"], OneHotEmbedder()) - 2 / 3) < 1e-12
    assert semantic_f1("a b c", ["a b c"]) == pytest.approx(1.0, abs=1e-12)
    assert semantic_f1("a b c", ["x y"]) == 0.0
    assert semantic_f1("", ["a"]) == 0.0


def test_contrastiveness_metric_mean():
    clf = LookupClassifier({("c1", "x."): ("con", 0.8), ("c2", "y."): ("pro", 0.2)})
    assert contrastiveness_metric([("x.", "c1"), ("y.", "c2")], clf) == pytest.approx(0.3, abs=1e-12)
    with pytest.raises(ValueError):
        contrastiveness_metric([], clf)


def test_target_stance_bounds():
    scores = {"support": 1.0, "oppose": -1.0}
    scorer = lambda text, target: scores[text]
    extractor = lambda conclusion: "target"
    assert target_stance_metric([("support", "oppose")], extractor, scorer) == 2.0
    assert target_stance_metric([("support", "support")], extractor, scorer) == 0.0


def test_target_stance_skips_failed_extraction():
    def extractor(conclusion):
        if conclusion == "none":
            raise TargetExtractionError("no target")
        return "t"

    scorer = lambda text, target: 0.5 if text == "a" else -0.5
    assert target_stance_scores([("a", "b"), ("none", "b")], extractor, scorer) == [1.0, None]
    assert target_stance_metric([("a", "b"), ("none", "b")], extractor, scorer) == 1.0
    with pytest.raises(ValueError):
        target_stance_metric([("none", "b")], extractor, scorer)


def test_classifier_scorer_sign():
    clf = LookupClassifier({("t", "p"): ("pro", 0.9), ("t", "n"): ("con", 0.7)})
    scorer = ClassifierStanceScorer(clf)
    assert scorer("p", "t") == 0.9 and scorer("n", "t") == -0.7


def _gold(n=20, seed=0):
    return synthetic_arguments(n, seed=seed)


def test_self_evaluation_scores_one():
    gold = _gold()
    generated = [{"argument_id": a.id, "counter": a.counters[0].text} for a in gold]
    report, instances = evaluate_run(generated, gold, ALWAYS_CON)
    assert report.bleu == pytest.approx(1.0)
    assert report.semantic_f1 == pytest.approx(1.0)
    assert report.contrastiveness == pytest.approx(0.75)
    assert report.n_instances == len(gold)
    assert [i["argument_id"] for i in instances] == sorted(a.id for a in gold)


def test_join_errors():
    gold = _gold(3)
    with pytest.raises(JoinError):
        evaluate_run([{"argument_id": "nope", "counter": "x"}], gold, ALWAYS_CON)
    with pytest.raises(JoinError):
        evaluate_run([], gold, ALWAYS_CON)
    bare = Argument("z", "c is good", "premise text", ())
    with pytest.raises(JoinError):
        evaluate_run([{"argument_id": "z", "counter": "x"}], [bare], ALWAYS_CON)


def test_ranked_records_pick_lowest_rank():
    gold = _gold(2)
    a = gold[0]
    generated = [{"argument_id": a.id, "counter": "junk words", "rank": 1},
                 {"argument_id": a.id, "counter": a.counters[0].text, "rank": 0}]
    _, [inst] = evaluate_run(generated, gold, ALWAYS_CON)
    assert inst["counter"] == a.counters[0].text


def test_report_is_mean_of_instances_and_order_free():
    gold = _gold(100, seed=5)
    rng = random.Random(1)
    generated = [{"argument_id": a.id, "counter": rng.choice(gold).counters[0].text} for a in gold]
    report, instances = evaluate_run(generated, gold, ALWAYS_CON)
    for key in ("bleu", "semantic_f1", "contrastiveness"):
        assert getattr(report, key) == pytest.approx(np.mean([i[key] for i in instances]), abs=1e-12)
    ref = [bleu(g["counter"], [c.text for c in a.counters]) for g, a in zip(generated, gold)]
    assert report.bleu == pytest.approx(np.mean(ref), abs=1e-12)
    shuffled = generated[:]
    rng.shuffle(shuffled)
    again, _ = evaluate_run(shuffled, list(reversed(gold)), ALWAYS_CON)
    assert again.to_json() == report.to_json()


def _scored(n, f1=lambda i: 0.5):
    args, inst = [], []
    for i in range(n):
        args.append(Argument(f"x{i:05d}", "c is good", " ".join(["w"] * (i + 1)),
                             (CounterCandidate("c is bad", 0.5),)))
        inst.append({"argument_id": f"x{i:05d}", "semantic_f1": f1(i), "contrastiveness": 0.1})
    return args, inst


def test_analysis_constant_and_monotone():
    args, inst = _scored(50)
    flat = analysis_report(inst, args, "length")
    assert [b.semantic_f1 for b in flat.bins] == [0.5] * 5
    args, inst = _scored(50, f1=lambda i: i / 50)
    mono = analysis_report(inst, args, "length")
    means = [b.semantic_f1 for b in mono.bins]
    assert means == sorted(means) and len(set(means)) == 5
    assert sum(b.n for b in mono.bins) == 50


def test_analysis_2000_instances_and_csv(tmp_path):
    args, inst = _scored(2000)
    analysis = analysis_report(inst, args, "length")
    assert [b.n for b in analysis.bins] == [400] * 5
    path = tmp_path / "plot.csv"
    write_plot_csv([analysis], path)
    rows = list(csv.DictReader(open(path)))
    assert tuple(rows[0].keys()) == PLOT_COLUMNS and len(rows) == 5


def test_analysis_unknown_dimension_and_ids():
    args, inst = _scored(10)
    with pytest.raises(ValueError):
        analysis_report(inst, args, "color")
    with pytest.raises(JoinError):
        analysis_report(inst + [{"argument_id": "ghost", "semantic_f1": 0, "contrastiveness": 0}],
                        args, "length")
