"""Deterministic synthetic corpora for tests and the CLI walkthrough.

Run ``python -m counterarg.synthetic OUTDIR`` to write ``posts.jsonl``,
``claim_pairs.jsonl`` and ``debates.jsonl``.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

from .corpus import ClaimPair

TOPICS = ["meat", "tax", "health", "school", "cars", "guns", "zoos", "art", "sports", "phones"]
STANCE_WORDS = ["good", "harmful", "useful", "fair", "bad", "needed"]
FILLERS = [
    "people", "often", "say", "many", "cities", "money", "rules", "change", "years", "costs",
    "families", "workers", "data", "shows", "history", "risk", "public", "choice", "children",
    "market", "prices", "safety", "freedom", "society", "experts", "argue",
]
REASONS = ["it helps people", "the costs are low", "the data says so", "history shows it",
           "experts disagree", "the risk is small", "it hurts workers", "prices go up"]

SUBJECTS = ["governments", "parents", "schools", "companies", "voters", "doctors", "cities",
            "farmers", "students", "banks", "artists", "drivers"]
VERBS = ["should fund", "must ban", "can improve", "should regulate", "will support",
         "should tax", "must protect", "can reduce"]
OBJECTS = ["public transport", "junk food", "online privacy", "renewable energy", "local farms",
           "space travel", "free speech", "animal testing", "video games", "nuclear power"]
INTENSIFIERS = ["clearly", "really", "certainly", "indeed", "surely"]


def _sentence(rng: random.Random, topic: str) -> str:
    body = rng.sample(FILLERS, rng.randint(3, 6))
    body.insert(rng.randrange(len(body) + 1), topic)
    return " ".join(body) + " ."


def argument_record(rng: random.Random, i: int) -> dict:
    topic = rng.choice(TOPICS)
    stance = rng.choice(STANCE_WORDS)
    conclusion = f"{topic} is {stance}"
    sentences = [_sentence(rng, topic) for _ in range(rng.randint(2, 4))]
    if rng.random() < 0.4:
        sentences.insert(rng.randrange(len(sentences) + 1), conclusion + " .")
    comments = []
    for _ in range(rng.randint(1, 3)):
        text = f"{topic} is not {stance} . {rng.choice(REASONS)} ."
        comments.append({"text": text, "quality": round(rng.random(), 3)})
    return {"id": f"a{i:04d}", "title": conclusion, "post": " ".join(sentences), "comments": comments}


def argument_records(n: int, seed: int = 0) -> list[dict]:
    rng = random.Random(seed)
    return [argument_record(rng, i) for i in range(n)]


def negation_pairs(n: int, seed: int = 0, n_debates: int = 40) -> list[ClaimPair]:
    """Claim pairs where a con statement is the claim with ``not`` inserted.

    Pro statements insert a neutral intensifier instead. Labels alternate so
    the set is balanced.
    """
    rng = random.Random(seed)
    pairs = []
    for i in range(n):
        subject, verb, obj = rng.choice(SUBJECTS), rng.choice(VERBS), rng.choice(OBJECTS)
        modal, main = verb.split(" ", 1)
        claim = f"{subject} {modal} {main} {obj}"
        if i % 2:
            statement, label = f"{subject} {modal} not {main} {obj}", "con"
        else:
            statement, label = f"{subject} {modal} {rng.choice(INTENSIFIERS)} {main} {obj}", "pro"
        pairs.append(ClaimPair(claim, statement, label, f"d{rng.randrange(n_debates):03d}"))
    return pairs


def debate_tree(rng: random.Random, debate_id: str, n_edges: int) -> dict:
    root = {"id": debate_id, "text": f"{rng.choice(SUBJECTS)} {rng.choice(VERBS)} {rng.choice(OBJECTS)}",
            "children": []}
    nodes = [root]
    for j in range(n_edges):
        parent = rng.choice(nodes)
        child = {"text": f"claim {debate_id}-{j} about {rng.choice(OBJECTS)}",
                 "relation": rng.choice(["supporting", "opposing"]), "children": []}
        parent["children"].append(child)
        nodes.append(child)
    return root


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    out = Path(argv[0] if argv else ".")
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "posts.jsonl", "w") as fh:
        for rec in argument_records(500, seed=0):
            fh.write(json.dumps(rec) + "\n")
    with open(out / "claim_pairs.jsonl", "w") as fh:
        for p in negation_pairs(700, seed=1):
            fh.write(json.dumps(p.to_record()) + "\n")
    rng = random.Random(2)
    with open(out / "debates.jsonl", "w") as fh:
        for d in range(5):
            fh.write(json.dumps(debate_tree(rng, f"kialo{d}", 12)) + "\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
