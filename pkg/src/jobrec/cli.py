"""Command line front end.

Subcommands cover the full pipeline: generate a synthetic corpus,
featurize it, train the sequence classifier, verify gradients, compose
recommendation slates, evaluate the model against the feedforward
baseline, and run the CTR simulation.

Exit codes: 0 success, 2 configuration or usage error, 3 data error,
4 check failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from jobrec import compose as compose_mod
from jobrec import config as config_mod
from jobrec import domain, evalharness, seqnet, synthgen
from jobrec.errors import (
    ConfigError,
    ConfigInvalid,
    JobRecError,
    UnknownCandidate,
    UnknownSubcommand,
)
from jobrec.featurize import Featurizer, build_featurizer
from jobrec.seqnet import TrainConfig

log = logging.getLogger(__name__)

SUBCOMMANDS = ("generate", "featurize", "train", "grad-check", "recommend",
               "evaluate", "simulate-ctr")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_CHECK = 4

GRAD_CHECK_LIMIT = 1e-4


def _dataset_paths(data_dir: str) -> tuple:
    return (os.path.join(data_dir, "candidates.jsonl"),
            os.path.join(data_dir, "jobs.jsonl"),
            os.path.join(data_dir, "interactions.jsonl"))


def _load_dataset(data_dir: str) -> domain.Dataset:
    return domain.load_dataset(*_dataset_paths(data_dir))


def _emit(args, payload: dict, human: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(human)


def _train_config(cfg: config_mod.AppConfig, epochs=None) -> TrainConfig:
    return TrainConfig(
        learning_rate=cfg.learning_rate, beta1=cfg.beta1, beta2=cfg.beta2,
        eps=cfg.eps, epochs=cfg.epochs if epochs is None else epochs,
        batch_size=cfg.batch_size, dropout_rate=cfg.dropout_rate,
        patience=cfg.patience, val_fraction=cfg.val_fraction,
        hidden1=cfg.hidden1, hidden2=cfg.hidden2, seed=cfg.seed)


# -- subcommand handlers -----------------------------------------------------


def _cmd_generate(args, cfg: config_mod.AppConfig) -> int:
    if args.scale == "full":
        gen = synthgen.GeneratorConfig(seed=cfg.seed)
    else:
        gen = synthgen.GeneratorConfig.small(seed=cfg.seed)
    if args.candidates is not None or args.jobs is not None \
            or args.interactions is not None:
        gen = synthgen.GeneratorConfig(
            n_candidates=args.candidates or gen.n_candidates,
            n_jobs=args.jobs or gen.n_jobs,
            n_interactions=args.interactions or gen.n_interactions,
            seed=cfg.seed)
    dataset, truth = synthgen.generate(gen)
    out_dir = args.out or cfg.data_dir
    paths = synthgen.write_corpus(dataset, truth, out_dir)
    positives = sum(1 for i in dataset.interactions if i.label == 1)
    share = positives / len(dataset.interactions)
    payload = {
        "candidates": len(dataset.candidates),
        "jobs": len(dataset.jobs),
        "interactions": len(dataset.interactions),
        "positive_share": share,
        "paths": paths,
    }
    _emit(args, payload,
          f"wrote {len(dataset.candidates)} candidates, {len(dataset.jobs)} "
          f"jobs, {len(dataset.interactions)} interactions "
          f"(positive share {share:.4f}) to {out_dir}")
    return EXIT_OK


def _cmd_featurize(args, cfg: config_mod.AppConfig) -> int:
    dataset = _load_dataset(args.data or cfg.data_dir)
    featurizer = build_featurizer(
        dataset,
        embed_dim=cfg.embed_dim, competency_k=cfg.competency_k,
        expand_m=cfg.expand_m, hash_width=cfg.hash_width,
        experience_cap=cfg.experience_cap,
        append_competency_feature=cfg.append_competency_feature,
        expand_for_vectors=cfg.expand_for_vectors, seed=cfg.seed)
    out = args.out or cfg.featurizer_path
    featurizer.save(out)
    payload = {
        "vocabulary_size": len(featurizer.vocab.tokens),
        "embed_dim": featurizer.embedding.vectors.shape[1],
        "competency_k": featurizer.groups.k,
        "pair_width": featurizer.pair_width,
        "path": out,
    }
    _emit(args, payload,
          f"featurizer: {payload['vocabulary_size']} skills, "
          f"embed dim {payload['embed_dim']}, pair width "
          f"{payload['pair_width']} -> {out}")
    return EXIT_OK


def _cmd_train(args, cfg: config_mod.AppConfig) -> int:
    dataset = _load_dataset(args.data or cfg.data_dir)
    featurizer = Featurizer.load(args.featurizer or cfg.featurizer_path)
    examples = seqnet.build_sequence_examples(dataset, featurizer)
    params, history = seqnet.train(examples, _train_config(cfg, args.epochs))
    out = args.out or cfg.model_path
    seqnet.save_model(out, params, meta={"seed": cfg.seed})
    best = max((h["val_f1_1"] for h in history), default=None)
    payload = {
        "examples": len(examples),
        "epochs_run": len(history),
        "best_val_f1_1": best,
        "path": out,
    }
    _emit(args, payload,
          f"trained on {len(examples)} examples for {len(history)} epochs "
          f"(best val F1 {best if best is None else format(best, '.4f')}) -> {out}")
    return EXIT_OK


def _cmd_grad_check(args, cfg: config_mod.AppConfig) -> int:
    worst = float(seqnet.gradient_check_suite(
        n_configs=args.configs, seed=cfg.seed, h=args.step))
    ok = worst < GRAD_CHECK_LIMIT
    payload = {"max_relative_error": worst, "limit": GRAD_CHECK_LIMIT,
               "configs": args.configs, "ok": ok}
    _emit(args, payload,
          f"max relative error {worst:.3e} over {args.configs} configs "
          f"(limit {GRAD_CHECK_LIMIT:.0e}): {'ok' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_CHECK


def _load_pipeline(args, cfg: config_mod.AppConfig):
    dataset = _load_dataset(args.data or cfg.data_dir)
    featurizer = Featurizer.load(args.featurizer or cfg.featurizer_path)
    model_path = args.model or cfg.model_path
    model = None
    if model_path and os.path.exists(model_path):
        model, _ = seqnet.load_model(model_path)
    job_index, candidate_index = compose_mod.build_indexes(dataset, featurizer)
    return dataset, featurizer, model, job_index, candidate_index


def _cmd_recommend(args, cfg: config_mod.AppConfig) -> int:
    dataset, featurizer, model, job_index, candidate_index = \
        _load_pipeline(args, cfg)
    if args.candidate not in dataset.candidates:
        raise UnknownCandidate(f"unknown candidate {args.candidate!r}")
    counters_path = args.counters or cfg.counters_path
    if os.path.exists(counters_path):
        counters = compose_mod.StarvationCounter.load(
            counters_path, threshold=cfg.starvation_threshold)
    else:
        counters = compose_mod.StarvationCounter(
            threshold=cfg.starvation_threshold)
    slate = compose_mod.compose(
        dataset.candidates[args.candidate], dataset, model, featurizer,
        job_index, candidate_index, counters,
        np.random.default_rng(cfg.seed),
        relaxation_years=cfg.experience_relaxation_years,
        ml_cutoff=cfg.ml_cutoff,
        similar_jobs_threshold=cfg.similar_jobs_threshold,
        similar_candidates_threshold=cfg.similar_candidates_threshold,
        blend_window=cfg.blend_window, blend_per_source=cfg.blend_per_source,
        edge_keep_threshold=cfg.edge_keep_threshold)
    counters.save(counters_path)
    entries = slate.entries[:args.top] if args.top else slate.entries
    payload = {
        "candidate_id": slate.candidate_id,
        "composed_at": slate.composed_at,
        "reason": slate.reason,
        "entries": [
            {"job_id": e.job_id, "source": e.source.value,
             "provenance": e.provenance}
            for e in entries
        ],
    }
    lines = [f"{e.job_id}\t{e.source.value}\t{e.provenance}" for e in entries]
    if not lines:
        lines = [f"(no recommendations: {slate.reason})"]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def _split_examples(examples, cfg: config_mod.AppConfig):
    """Deterministic stratified train/test split used by evaluate."""
    labels = np.array([e.label for e in examples], dtype=np.float64)
    rng = np.random.default_rng(cfg.seed)
    train_idx, test_idx = seqnet._stratified_split(
        labels, cfg.val_fraction, rng)
    return train_idx, test_idx


def _cmd_evaluate(args, cfg: config_mod.AppConfig) -> int:
    dataset = _load_dataset(args.data or cfg.data_dir)
    featurizer = Featurizer.load(args.featurizer or cfg.featurizer_path)
    model, _ = seqnet.load_model(args.model or cfg.model_path)
    examples = seqnet.build_sequence_examples(dataset, featurizer)
    _, test_idx = _split_examples(examples, cfg)
    held_out = [examples[i] for i in test_idx]
    labels = [e.label for e in held_out]
    probs = seqnet.predict_batch(model, held_out)
    preds = (probs >= 0.5).astype(int).tolist()
    report = evalharness.classification_report(preds, labels)
    _emit(args, report.to_dict(), report.format())
    return EXIT_OK


def _build_arm_slates(dataset, featurizer, model, job_index, candidate_index,
                      cfg, top, limit, parallel=False):
    """Blended and pure-ML slates for every candidate (sorted ids)."""
    ids = sorted(dataset.candidates)
    if limit:
        ids = ids[:limit]
    master = np.random.default_rng(cfg.seed)
    seeds = [int(s) for s in master.integers(0, 2 ** 62, size=len(ids))]

    def one(pair):
        cid, seed = pair
        candidate = dataset.candidates[cid]
        counters = compose_mod.StarvationCounter(
            threshold=cfg.starvation_threshold)
        slate = compose_mod.compose(
            candidate, dataset, model, featurizer, job_index, candidate_index,
            counters, np.random.default_rng(seed),
            relaxation_years=cfg.experience_relaxation_years,
            ml_cutoff=cfg.ml_cutoff,
            similar_jobs_threshold=cfg.similar_jobs_threshold,
            similar_candidates_threshold=cfg.similar_candidates_threshold,
            blend_window=cfg.blend_window,
            blend_per_source=cfg.blend_per_source,
            edge_keep_threshold=cfg.edge_keep_threshold)
        blended = compose_mod.RecommendationSlate(
            candidate_id=cid, entries=slate.entries[:top],
            composed_at=slate.composed_at, reason=slate.reason)
        ml_slate = compose_mod.ml_only_slate(
            candidate, dataset, model, featurizer,
            relaxation_years=cfg.experience_relaxation_years,
            ml_cutoff=cfg.ml_cutoff, top=top)
        return blended, ml_slate

    work = list(zip(ids, seeds))
    if parallel:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor() as pool:
            results = list(pool.map(one, work))
    else:
        results = [one(item) for item in work]
    blended_slates = [r[0] for r in results]
    ml_slates = [r[1] for r in results]
    return blended_slates, ml_slates


def _cmd_simulate_ctr(args, cfg: config_mod.AppConfig) -> int:
    dataset, featurizer, model, job_index, candidate_index = \
        _load_pipeline(args, cfg)
    truth_path = os.path.join(args.data or cfg.data_dir, "ground_truth.jsonl")
    truth = synthgen.GroundTruth.load(truth_path)
    blended, ml_only = _build_arm_slates(
        dataset, featurizer, model, job_index, candidate_index, cfg,
        top=args.top, limit=args.limit, parallel=args.parallel)
    click_cfg = evalharness.ClickModelConfig(
        view_decay=cfg.view_decay, click_scale=cfg.click_scale,
        serendipity_bonus=cfg.serendipity_bonus)
    report = evalharness.simulate_ctr(
        blended, ml_only, truth, click_cfg,
        np.random.default_rng(cfg.seed))
    _emit(args, report.to_dict(), report.format())
    return EXIT_OK


# -- parser and dispatch -----------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None,
                        help="TOML or JSON config file (default: built-ins)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--json", action="store_true",
                        help="emit machine-readable JSON on stdout")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress the effective-config echo")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jobrec",
        description="Job recommendation pipeline: generation, training, "
                    "slate composition, and evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic corpus")
    _add_common(p)
    p.add_argument("--scale", choices=("small", "full"), default="small",
                   help="corpus size preset (default small)")
    p.add_argument("--candidates", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--interactions", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory")

    p = sub.add_parser("featurize", help="fit the feature space")
    _add_common(p)
    p.add_argument("--data", default=None, help="corpus directory")
    p.add_argument("--out", default=None, help="featurizer output path")

    p = sub.add_parser("train", help="train the sequence classifier")
    _add_common(p)
    p.add_argument("--data", default=None)
    p.add_argument("--featurizer", default=None)
    p.add_argument("--epochs", type=int, default=None,
                   help="override config epochs")
    p.add_argument("--out", default=None, help="model checkpoint path")

    p = sub.add_parser("grad-check", help="finite-difference gradient audit")
    _add_common(p)
    p.add_argument("--configs", type=int, default=20,
                   help="number of random model configurations (default 20)")
    p.add_argument("--step", type=float, default=1e-5,
                   help="central-difference step (default 1e-5)")

    p = sub.add_parser("recommend", help="compose a slate for one candidate")
    _add_common(p)
    p.add_argument("--candidate", required=True, help="candidate id")
    p.add_argument("--top", type=int, default=20,
                   help="maximum slate length (default 20)")
    p.add_argument("--data", default=None)
    p.add_argument("--featurizer", default=None)
    p.add_argument("--model", default=None)
    p.add_argument("--counters", default=None,
                   help="starvation counter JSONL path")

    p = sub.add_parser("evaluate", help="held-out classification report")
    _add_common(p)
    p.add_argument("--data", default=None)
    p.add_argument("--featurizer", default=None)
    p.add_argument("--model", default=None)

    p = sub.add_parser("simulate-ctr",
                       help="blended vs pure-ML click simulation")
    _add_common(p)
    p.add_argument("--data", default=None)
    p.add_argument("--featurizer", default=None)
    p.add_argument("--model", default=None)
    p.add_argument("--top", type=int, default=20)
    p.add_argument("--limit", type=int, default=None,
                   help="cap the number of candidates simulated")
    p.add_argument("--parallel", action="store_true",
                   help="compose slates with a thread pool")

    return parser


_HANDLERS = {
    "generate": _cmd_generate,
    "featurize": _cmd_featurize,
    "train": _cmd_train,
    "grad-check": _cmd_grad_check,
    "recommend": _cmd_recommend,
    "evaluate": _cmd_evaluate,
    "simulate-ctr": _cmd_simulate_ctr,
}


def run(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    argv = list(argv)
    try:
        if argv and not argv[0].startswith("-") and argv[0] not in SUBCOMMANDS:
            raise UnknownSubcommand(
                f"unknown subcommand {argv[0]!r}; expected one of "
                f"{', '.join(SUBCOMMANDS)}")
        try:
            args = build_parser().parse_args(argv)
        except SystemExit as exc:
            code = exc.code if isinstance(exc.code, int) else 0
            return EXIT_OK if code == 0 else EXIT_CONFIG
        cfg = config_mod.load_config(args.config)
        cfg = config_mod.apply_overrides(cfg, {"seed": args.seed})
        if not args.quiet:
            print(cfg.echo(), file=sys.stderr)
        return _HANDLERS[args.command](args, cfg)
    except (ConfigError, ConfigInvalid, UnknownSubcommand) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except JobRecError as exc:
        print(f"data error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    raise SystemExit(run())


if __name__ == "__main__":
    main()
