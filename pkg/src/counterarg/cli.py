"""Command-line pipeline: ingest, train-gen, train-stance, generate, rank, evaluate, analyze.

Every subcommand reads an optional YAML/JSON config (``--config``) whose keys
are the long flag names with underscores; flags given on the command line
win. Outputs go to ``--out`` together with a config snapshot and a
run manifest, both under ``manifests/``. Exit status is 0 on success, 2 for usage
errors (nothing written) and 1 for runtime failures; failures also print a
JSON error record on stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from collections import defaultdict
from datetime import datetime, timezone
from pathlib import Path

import yaml

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("counterarg")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# Defaults per subcommand; a value of None means required.
DEFAULTS: dict[str, dict] = {
    "ingest": {"input": None, "claims": "", "debates": "", "out": None, "seed": 0,
               "ratios": [0.8, 0.1, 0.1]},
    "train-gen": {"corpus": None, "mode": "oneseq", "out": None, "epochs": 3,
                  "learning_rate": 5e-5, "batch_size": 8, "alpha_a": 0.7, "alpha_b": 0.3,
                  "seed": 0, "emb_dim": 32, "hidden_dim": 64, "limit": 0},
    "train-stance": {"pairs": None, "out": None, "epochs": 3, "learning_rate": 2e-5,
                     "batch_size": 64, "seed": 0},
    "generate": {"model": None, "corpus": None, "out": None, "mode": "", "split": "test",
                 "n": 8, "m": 5, "p": 0.95, "k": 50, "seed": 0, "max_conclusion_len": 32,
                 "max_counter_len": 64, "extractor": "noun-phrase", "limit": 0},
    "rank": {"candidates": "", "classifier": None, "out": None},
    "evaluate": {"ranked": "", "corpus": None, "classifier": None, "out": None},
    "analyze": {"instances": "", "corpus": None, "out": None, "dimension": "both"},
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="counterarg", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, help_text, flags):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="YAML or JSON file with flag values")
        for flag, kwargs in flags:
            p.add_argument(flag, default=None, **kwargs)
        return p

    add("ingest", "load posts (and claim pairs) into a corpus directory", [
        ("--input", {"help": "posts JSON-lines file"}),
        ("--claims", {"help": "claim-pair JSON-lines file"}),
        ("--debates", {"help": "debate-tree JSON-lines file"}),
        ("--out", {}), ("--seed", {"type": int}),
        ("--ratios", {"type": float, "nargs": 3}),
    ])
    add("train-gen", "train a joint generation model", [
        ("--corpus", {}), ("--mode", {"choices": ["oneseq", "twodec"]}), ("--out", {}),
        ("--epochs", {"type": int}), ("--learning-rate", {"type": float}),
        ("--batch-size", {"type": int}), ("--alpha-a", {"type": float}),
        ("--alpha-b", {"type": float}), ("--seed", {"type": int}),
        ("--emb-dim", {"type": int}), ("--hidden-dim", {"type": int}),
        ("--limit", {"type": int, "help": "use only the first N training arguments"}),
    ])
    add("train-stance", "train the pro/con stance classifier", [
        ("--pairs", {"help": "claim-pair file or a corpus directory"}), ("--out", {}),
        ("--epochs", {"type": int}), ("--learning-rate", {"type": float}),
        ("--batch-size", {"type": int}), ("--seed", {"type": int}),
    ])
    add("generate", "decode candidate (conclusion, counter) pairs", [
        ("--model", {}), ("--corpus", {}), ("--out", {}),
        ("--mode", {"choices": ["oneseq", "twodec"]}),
        ("--split", {"choices": ["train", "validation", "test", "all"]}),
        ("--n", {"type": int}), ("--m", {"type": int}), ("--p", {"type": float}),
        ("--k", {"type": int}), ("--seed", {"type": int}),
        ("--max-conclusion-len", {"type": int}), ("--max-counter-len", {"type": int}),
        ("--extractor", {}), ("--limit", {"type": int}),
    ])
    add("rank", "rank candidates by stance contrastiveness", [
        ("--candidates", {}), ("--classifier", {}), ("--out", {}),
    ])
    add("evaluate", "compute BLEU, semantic F1, contrastiveness and stance difference", [
        ("--ranked", {}), ("--corpus", {}), ("--classifier", {}), ("--out", {}),
    ])
    add("analyze", "quintile analysis by argument length and conclusion implicitness", [
        ("--instances", {}), ("--corpus", {}), ("--out", {}),
        ("--dimension", {"choices": ["length", "implicitness", "both"]}),
    ])
    return parser


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    """Merge defaults < config file < flags and check required keys."""
    config = dict(DEFAULTS[command])
    if args.config:
        try:
            loaded = yaml.safe_load(Path(args.config).read_text()) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise UsageError(f"unreadable config {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError("config must be a mapping")
        unknown = sorted(set(loaded) - set(config))
        if unknown:
            raise UsageError(f"unknown config keys for {command}: {unknown}")
        config.update(loaded)
    for key in DEFAULTS[command]:
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    missing = [k for k, v in config.items() if v is None]
    if missing:
        raise UsageError(f"{command}: missing required settings {missing}")
    return config


def _digest_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def digest_path(path: Path) -> str:
    """Content hash of a file, or of a directory's files excluding run manifests."""
    if path.is_file():
        return _digest_bytes(path.read_bytes())
    h = hashlib.sha256()
    for f in sorted(p for p in path.rglob("*") if p.is_file() and "manifests" not in p.parts):
        h.update(str(f.relative_to(path)).encode())
        h.update(f.read_bytes())
    return h.hexdigest()


# Locations, not settings: inputs are identified by content digest instead.
PATH_KEYS = frozenset({"input", "claims", "debates", "out", "corpus", "pairs", "model",
                       "candidates", "classifier", "ranked", "instances"})


def config_digest(config: dict) -> str:
    settings = {k: v for k, v in config.items() if k not in PATH_KEYS}
    return _digest_bytes(json.dumps(settings, sort_keys=True).encode())


class Run:
    """Bookkeeping for one subcommand execution inside an output directory."""

    def __init__(self, command: str, config: dict, inputs: dict[str, Path]):
        self.command = command
        self.config = config
        self.out = Path(config["out"])
        self.config_digest = config_digest(config)
        self.input_digests = {k: digest_path(p) for k, p in sorted(inputs.items())}
        seed = json.dumps([command, self.config_digest, self.input_digests], sort_keys=True)
        self.run_id = _digest_bytes(seed.encode())[:16]
        self.started = datetime.now(timezone.utc).isoformat()
        self.artifacts: list[str] = []
        self.extra: dict = {}

    def path(self, name: str) -> Path:
        self.artifacts.append(name)
        return self.out / name

    def finish(self) -> Path:
        (self.out / "manifests").mkdir(parents=True, exist_ok=True)
        snapshot = self.out / "manifests" / f"{self.command}.config.json"
        snapshot.write_text(json.dumps(self.config, indent=2, sort_keys=True) + "\n")
        manifest = {
            "run_id": self.run_id,
            "command": self.command,
            "config_digest": self.config_digest,
            "input_digests": self.input_digests,
            "started": self.started,
            "finished": datetime.now(timezone.utc).isoformat(),
            "artifacts": sorted(set(self.artifacts)),
            "config_snapshot": str(snapshot.relative_to(self.out)),
            **self.extra,
        }
        path = self.out / "manifests" / f"{self.command}.json"
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return path


def _existing(path_like: str, what: str) -> Path:
    path = Path(path_like)
    if not path.exists():
        raise UsageError(f"{what} not found: {path}")
    return path


def _write_jsonl(path: Path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _read_jsonl(path: Path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _load_corpus(corpus: Path):
    from .corpus import SplitSpec, load_arguments

    arguments = load_arguments(corpus / "arguments.jsonl")
    split = SplitSpec.from_json(json.loads((corpus / "splits.json").read_text()))
    return arguments, split


# -- subcommands -------------------------------------------------------------


def cmd_ingest(config: dict) -> Run:
    from dataclasses import replace

    from .corpus import (build_claim_pairs, conclusion_implicitness, load_arguments,
                         load_claim_pairs, make_splits, write_arguments, write_claim_pairs)

    inputs = {"input": _existing(config["input"], "input")}
    if config["claims"]:
        inputs["claims"] = _existing(config["claims"], "claims file")
    if config["debates"]:
        inputs["debates"] = _existing(config["debates"], "debates file")
    ratios = tuple(float(r) for r in config["ratios"])
    if len(ratios) != 3 or abs(sum(ratios) - 1.0) > 1e-9:
        raise UsageError(f"ratios must be three values summing to 1, got {ratios}")
    run = Run("ingest", config, inputs)

    arguments = [replace(a, implicitness=conclusion_implicitness(a)) if a.implicitness is None else a
                 for a in load_arguments(inputs["input"])]
    split = make_splits(arguments, ratios, config["seed"])
    pairs = load_claim_pairs(inputs["claims"]) if "claims" in inputs else []
    if "debates" in inputs:
        for tree in _read_jsonl(inputs["debates"]):
            pairs.extend(build_claim_pairs(tree))

    run.out.mkdir(parents=True, exist_ok=True)
    write_arguments(arguments, run.path("arguments.jsonl"))
    run.path("splits.json").write_text(json.dumps(split.to_json(), indent=2) + "\n")
    run.extra["counts"] = {"arguments": len(arguments), "train": len(split.train_ids),
                           "validation": len(split.validation_ids), "test": len(split.test_ids),
                           "claim_pairs": len(pairs)}
    if pairs:
        write_claim_pairs(pairs, run.path("claim_pairs.jsonl"))
        claim_split = make_splits(pairs, ratios, config["seed"])
        run.path("claim_splits.json").write_text(json.dumps(claim_split.to_json(), indent=2) + "\n")
    return run


def cmd_train_gen(config: dict) -> Run:
    from .generation import (TrainConfig, ToySeq2Seq, build_examples, build_vocabulary,
                             save_checkpoint, train)

    corpus = _existing(config["corpus"], "corpus directory")
    try:
        train_config = TrainConfig(config["learning_rate"], config["epochs"], config["batch_size"],
                                   config["alpha_a"], config["alpha_b"], config["seed"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    run = Run("train-gen", config, {"corpus": corpus})
    arguments, split = _load_corpus(corpus)
    parts = defaultdict(list)
    for a in arguments:
        parts[split.part_of(a.id)].append(a)
    train_args = parts["train"][: config["limit"]] if config["limit"] else parts["train"]
    train_examples = build_examples(train_args)
    validation_examples = build_examples(parts["validation"])
    if not train_examples:
        raise ValueError("training split has no argument with a counter")
    vocab = build_vocabulary(train_examples)
    model = ToySeq2Seq(vocab, config["mode"], emb_dim=config["emb_dim"],
                       hidden_dim=config["hidden_dim"], seed=config["seed"])
    result = train(model, train_examples, validation_examples, config["mode"], train_config)
    save_checkpoint(model, run.out, {
        "train_config": train_config.to_json(),
        "epoch_losses": result.curve(),
        "initial_train_loss": result.initial_train_loss,
        "best_epoch": result.best_epoch,
        "run_id": run.run_id,
    })
    for name in ("parameters.pt", "vocab.json", "manifest.json"):
        run.path(name)
    return run


def cmd_train_stance(config: dict) -> Run:
    from .corpus import SplitSpec, load_claim_pairs
    from .stance import StanceTrainConfig, save_classifier, train_stance

    source = _existing(config["pairs"], "claim pairs")
    try:
        stance_config = StanceTrainConfig(config["learning_rate"], config["epochs"],
                                          config["batch_size"], config["seed"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    run = Run("train-stance", config, {"pairs": source})
    pairs_file = source / "claim_pairs.jsonl" if source.is_dir() else source
    pairs = load_claim_pairs(pairs_file)
    validation = None
    split_file = pairs_file.parent / "claim_splits.json"
    if source.is_dir() and split_file.exists():
        split = SplitSpec.from_json(json.loads(split_file.read_text()))
        held = set(split.validation_ids)
        validation = [p for p in pairs if p.debate_id in held]
        pairs = [p for p in pairs if p.debate_id in set(split.train_ids)]
    classifier = train_stance(pairs, stance_config, validation)
    save_classifier(classifier, run.out)
    for name in ("parameters.pt", "features.json", "manifest.json"):
        run.path(name)
    run.extra["validation_f1"] = classifier.history[-1]["validation_f1"] if classifier.history else None
    return run


def cmd_generate(config: dict) -> Run:
    from .concepts import get_extractor
    from .generation import (DecodingConfig, GenerationError, generate_candidates_oneseq,
                             generate_candidates_twodec, load_checkpoint)

    model_dir = _existing(config["model"], "model directory")
    corpus = _existing(config["corpus"], "corpus directory")
    try:
        decoding = DecodingConfig(config["p"], config["k"], config["n"], config["m"],
                                  config["max_conclusion_len"], config["max_counter_len"],
                                  config["seed"])
        extractor = get_extractor(config["extractor"])
    except (ValueError, RuntimeError) as exc:
        raise UsageError(str(exc)) from None
    run = Run("generate", config, {"model": model_dir, "corpus": corpus})
    model, manifest = load_checkpoint(model_dir)
    if config["mode"] and config["mode"] != model.mode:
        raise UsageError(f"--mode {config['mode']} but the checkpoint is {model.mode}")
    arguments, split = _load_corpus(corpus)
    if config["split"] != "all":
        arguments = [a for a in arguments if split.part_of(a.id) == config["split"]]
    if config["limit"]:
        arguments = arguments[: config["limit"]]

    records, failed = [], []
    for a in arguments:
        try:
            if model.mode == "oneseq":
                concepts = extractor(a.premises, decoding.n_concepts)
                candidates = generate_candidates_oneseq(model, a.premises, concepts, decoding)
            else:
                _, candidates = generate_candidates_twodec(model, a.premises, decoding)
        except GenerationError as exc:
            log.warning("argument %s: %s", a.id, exc)
            failed.append(a.id)
            continue
        for slot, c in enumerate(candidates):
            records.append({"argument_id": a.id, "candidate": slot, "conclusion": c.conclusion,
                            "counter": c.counter, "prompt_concept": c.prompt_concept,
                            "seed": c.seed, "mode": model.mode, "run_id": run.run_id})
    run.out.mkdir(parents=True, exist_ok=True)
    _write_jsonl(run.path("candidates.jsonl"), records)
    run.extra.update({"n_arguments": len(arguments), "failed_ids": failed,
                      "model_run_id": manifest.get("run_id")})
    return run


def cmd_rank(config: dict) -> Run:
    from .generation import CandidatePair
    from .stance import load_classifier, rank_candidates

    out = Path(config["out"])
    candidates_file = _existing(config["candidates"] or str(out / "candidates.jsonl"), "candidates")
    classifier_dir = _existing(config["classifier"], "classifier directory")
    run = Run("rank", config, {"candidates": candidates_file, "classifier": classifier_dir})
    classifier = load_classifier(classifier_dir)
    groups: dict[str, list[dict]] = {}
    for rec in _read_jsonl(candidates_file):
        groups.setdefault(rec["argument_id"], []).append(rec)
    records = []
    for arg_id, recs in groups.items():
        pairs = [CandidatePair(r["conclusion"], r["counter"], r.get("prompt_concept"),
                               seed=r.get("seed")) for r in recs]
        shared = recs[0]["conclusion"] if recs[0].get("mode") == "twodec" else None
        for rank, c in enumerate(rank_candidates(pairs, classifier, shared), start=1):
            records.append({"argument_id": arg_id, "rank": rank, "conclusion": c.conclusion,
                            "counter": c.counter, "score": c.score, "run_id": run.run_id})
    run.out.mkdir(parents=True, exist_ok=True)
    _write_jsonl(run.path("ranked.jsonl"), records)
    return run


def cmd_evaluate(config: dict) -> Run:
    from .evaluation import evaluate_run
    from .stance import load_classifier

    out = Path(config["out"])
    ranked_file = _existing(config["ranked"] or str(out / "ranked.jsonl"), "ranked file")
    corpus = _existing(config["corpus"], "corpus directory")
    classifier_dir = _existing(config["classifier"], "classifier directory")
    run = Run("evaluate", config, {"ranked": ranked_file, "corpus": corpus,
                                   "classifier": classifier_dir})
    arguments, _ = _load_corpus(corpus)
    report, instances = evaluate_run(_read_jsonl(ranked_file), arguments,
                                     load_classifier(classifier_dir))
    run.out.mkdir(parents=True, exist_ok=True)
    body = {"run_id": run.run_id, **report.to_json()}
    run.path("report.json").write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")
    _write_jsonl(run.path("instances.jsonl"), ({"run_id": run.run_id, **i} for i in instances))
    return run


def cmd_analyze(config: dict) -> Run:
    from .evaluation import analysis_report, write_plot_csv

    out = Path(config["out"])
    instances_file = _existing(config["instances"] or str(out / "instances.jsonl"), "instances file")
    corpus = _existing(config["corpus"], "corpus directory")
    run = Run("analyze", config, {"instances": instances_file, "corpus": corpus})
    arguments, _ = _load_corpus(corpus)
    instances = _read_jsonl(instances_file)
    dims = ["length", "implicitness"] if config["dimension"] == "both" else [config["dimension"]]
    analyses = [analysis_report(instances, arguments, d) for d in dims]
    run.out.mkdir(parents=True, exist_ok=True)
    body = {"run_id": run.run_id, "n": len(instances), "analyses": [a.to_json() for a in analyses]}
    run.path("analysis.json").write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")
    write_plot_csv(analyses, run.path("plot_data.csv"))
    return run


COMMANDS = {
    "ingest": cmd_ingest,
    "train-gen": cmd_train_gen,
    "train-stance": cmd_train_stance,
    "generate": cmd_generate,
    "rank": cmd_rank,
    "evaluate": cmd_evaluate,
    "analyze": cmd_analyze,
}


def _error(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)
    return code


def run_command(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
        config = resolve_config(args.command, args)
    except UsageError as exc:
        return _error("usage", str(exc), EXIT_USAGE)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        run = COMMANDS[args.command](config)
        manifest = run.finish()
    except UsageError as exc:
        return _error("usage", str(exc), EXIT_USAGE)
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure record
        log.debug("failure", exc_info=True)
        return _error(type(exc).__name__, str(exc), EXIT_RUNTIME)
    log.info("%s finished in %.1fs; manifest %s", args.command, time.perf_counter() - t0, manifest)
    return EXIT_OK


def main() -> None:
    raise SystemExit(run_command())


if __name__ == "__main__":
    main()
