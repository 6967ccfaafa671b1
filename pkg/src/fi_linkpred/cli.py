"""Command-line front end: ``scores``, ``train``, ``evaluate`` and ``predict``.

Exit codes: 0 success, 2 input/parse error, 3 degenerate data, 4 model load error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, asdict
from pathlib import Path

from . import email_benchmark, learners
from .dataset import DatasetError, build_dataset, derive_seed, require_both_classes, stratified_kfold, stratified_split
from .evaluation import (
    Infeasible,
    PipelineConfig,
    PipelineError,
    classify_candidates,
    fit_family,
    pipeline_digest,
    run_pipeline,
)
from .graph import GraphError, parse_graph
from .learners import FAMILIES, ModelFormatError
from .report import render_markdown
from .similarity import MetricError, MetricParams, format_real, score_table

log = logging.getLogger("fi_linkpred")

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE, EXIT_MODEL = 0, 2, 3, 4
DEFAULT_SEED = 42
SEED_ENV = "FI_LINKPRED_SEED"


class InputError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    features: str | None = None
    interactions: str | None = None
    out: str = "."
    model: str | None = None
    candidates: str | None = None
    seed: int = DEFAULT_SEED
    train_fraction: float = 0.8
    k_folds: int = 10
    families: tuple = FAMILIES
    katz_beta: float = MetricParams.katz_beta
    rwr_restart: float = MetricParams.rwr_restart
    lp_epsilon: float = MetricParams.lp_epsilon
    formats: tuple = ("json", "markdown")

    def validate(self) -> tuple[MetricParams, PipelineConfig]:
        if (self.features is None) != (self.interactions is None):
            raise InputError("--features and --interactions must be given together")
        if not 0 <= self.seed < 2**64:
            raise InputError(f"seed must be a non-negative 64-bit integer, got {self.seed}")
        bad = [f for f in self.formats if f not in ("json", "markdown")]
        if bad or not self.formats:
            raise InputError(f"unknown report format(s) {bad}")
        try:
            params = MetricParams(katz_beta=self.katz_beta, rwr_restart=self.rwr_restart, lp_epsilon=self.lp_epsilon)
            cfg = PipelineConfig(self.train_fraction, self.k_folds, tuple(self.families))
        except (MetricError, ValueError) as exc:
            raise InputError(str(exc)) from exc
        return params, cfg

    def echo(self) -> dict:
        d = asdict(self)
        d["families"] = list(self.families)
        d["formats"] = list(self.formats)
        return d


def load_graph(cfg: RunConfig):
    if cfg.features is None:
        return email_benchmark()
    docs = []
    for path in (cfg.features, cfg.interactions):
        try:
            docs.append(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return parse_graph(docs[0], docs[1], cfg.features, cfg.interactions)


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _header(digest: str, seed: int) -> list[str]:
    return [f"config_digest={digest} seed={seed}"]


def _digest(cfg: RunConfig, g, params, pcfg) -> str:
    return pipeline_digest(g, params, cfg.seed, pcfg.to_dict())


def cmd_scores(cfg: RunConfig) -> int:
    params, pcfg = cfg.validate()
    g = load_graph(cfg)
    table = score_table(g, params)
    path = Path(cfg.out) / "scores.csv"
    write_atomic(path, table.to_csv(_header(_digest(cfg, g, params, pcfg), cfg.seed)))
    print(f"wrote {path} ({len(table)} pairs)")
    return EXIT_OK


def _train_partition(g, params, pcfg, seed):
    ds = build_dataset(score_table(g, params), g, params)
    require_both_classes(ds)
    split = stratified_split(ds, pcfg.train_fraction, derive_seed(seed, "split"))
    train = ds.subset(split.train_indices)
    folds = stratified_kfold(train, min(pcfg.k_folds, len(train)), derive_seed(seed, "folds"))
    return train, split, folds


def cmd_train(cfg: RunConfig) -> int:
    params, pcfg = cfg.validate()
    g = load_graph(cfg)
    digest = _digest(cfg, g, params, pcfg)
    train, split, folds = _train_partition(g, params, pcfg, cfg.seed)
    out = Path(cfg.out)
    tuning = {}
    for family in pcfg.families:
        res, model = fit_family(family, train, folds, cfg.seed)
        model.provenance.update(config_digest=digest, seed=cfg.seed, metric_params=params.to_dict())
        write_atomic(out / "models" / f"{family}.json", learners.dumps_model(model) + "\n")
        tuning[family] = res.to_dict()
        print(f"{family}: CV accuracy {res.best_cv_accuracy:.3f} with {res.best_spec.hyperparameters}")
    doc = {"config": cfg.echo(), "config_digest": digest, "seed": cfg.seed,
           "split": json.loads(split.to_json()), "folds": json.loads(folds.to_json()), "tuning": tuning}
    write_atomic(out / "tuning.json", json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def cmd_evaluate(cfg: RunConfig) -> int:
    params, pcfg = cfg.validate()
    g = load_graph(cfg)
    try:
        report = run_pipeline(g, params, cfg.seed, pcfg, run_config=cfg.echo())
    except PipelineError as exc:
        raise exc.cause from exc
    doc = report.to_dict()
    out = Path(cfg.out)
    if "json" in cfg.formats:
        write_atomic(out / "report.json", json.dumps(doc, sort_keys=True, indent=2) + "\n")
    if "markdown" in cfg.formats:
        write_atomic(out / "report.md", render_markdown(doc))
    for fam, m in doc["test_metrics"].items():
        print(f"{fam}: test accuracy {m['accuracy']:.2f}")
    return EXIT_OK


def read_candidates(path: str) -> list[tuple[str, str]]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if parts[:2] == ["feature_a", "feature_b"]:
            continue
        if len(parts) != 2:
            raise InputError(f"{path}:{lineno}: expected 'featureA,featureB'")
        pairs.append((parts[0], parts[1]))
    return pairs


def cmd_predict(cfg: RunConfig) -> int:
    params, pcfg = cfg.validate()
    if cfg.model is None or cfg.candidates is None:
        raise InputError("predict needs --model and --candidates")
    try:
        text = Path(cfg.model).read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelFormatError(f"cannot read model {cfg.model}: {exc.strerror or exc}") from exc
    model = learners.loads_model(text)
    g = load_graph(cfg)
    pairs = read_candidates(cfg.candidates)
    try:
        results = classify_candidates(g, model, params, pairs)
    except learners.SchemaError as exc:
        raise ModelFormatError(str(exc)) from exc
    header = _header(_digest(cfg, g, params, pcfg), cfg.seed)
    header.append(f"model={model.family} hyperparameters={json.dumps(model.spec.hyperparameters, sort_keys=True)}")
    trained_with = model.provenance.get("metric_params")
    if trained_with is not None and trained_with != params.to_dict():
        header.append(f"warning: model was trained with metric params {json.dumps(trained_with, sort_keys=True)}"
                      f" but candidates were scored with {json.dumps(params.to_dict(), sort_keys=True)}")
        log.warning(header[-1])
    lines = [f"# {h}" for h in header] + ["feature_a,feature_b,label,score"]
    lines += [f"{a},{b},{label.value},{format_real(score)}" for (a, b), label, score in results]
    path = Path(cfg.out) / "predictions.csv"
    write_atomic(path, "\n".join(lines) + "\n")
    print(f"wrote {path} ({len(results)} candidates)")
    return EXIT_OK


COMMANDS = {"scores": cmd_scores, "train": cmd_train, "evaluate": cmd_evaluate, "predict": cmd_predict}


def _csv_list(text: str) -> tuple:
    return tuple(p.strip() for p in text.split(",") if p.strip())


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--features", help="features file (name[,mandatory] per line); default: bundled Email")
    common.add_argument("--interactions", help="interactions file (featureA,featureB,label per line)")
    common.add_argument("--out", default=".", help="output directory (default: current directory)")
    common.add_argument("--seed", type=int, default=None,
                        help=f"master seed (default: ${SEED_ENV} or {DEFAULT_SEED})")
    common.add_argument("--train-fraction", type=float, default=0.8)
    common.add_argument("--folds", type=int, default=10, help="cross-validation folds (default 10)")
    common.add_argument("--families", type=_csv_list, default=FAMILIES,
                        help="comma-separated model families (default: all six)")
    common.add_argument("--katz-beta", type=float, default=MetricParams.katz_beta)
    common.add_argument("--rwr-restart", type=float, default=MetricParams.rwr_restart)
    common.add_argument("--lp-epsilon", type=float, default=MetricParams.lp_epsilon)
    common.add_argument("--model", help="model JSON file (predict)")
    common.add_argument("--candidates", help="candidate pairs file, featureA,featureB per line (predict)")
    common.add_argument("--format", type=_csv_list, default=("json", "markdown"),
                        help="report formats: json,markdown (evaluate)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="fi-linkpred", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "scores": "write the pairwise similarity table",
        "train": "tune and save one model per family",
        "evaluate": "run the full evaluation and write reports",
        "predict": "classify candidate feature pairs with a saved model",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def config_from_args(args) -> RunConfig:
    seed = args.seed
    if seed is None:
        env = os.environ.get(SEED_ENV)
        try:
            seed = int(env) if env else DEFAULT_SEED
        except ValueError:
            raise InputError(f"${SEED_ENV} is not an integer: {env!r}") from None
    return RunConfig(
        features=args.features, interactions=args.interactions, out=args.out, model=args.model,
        candidates=args.candidates, seed=seed, train_fraction=args.train_fraction, k_folds=args.folds,
        families=tuple(args.families), katz_beta=args.katz_beta, rwr_restart=args.rwr_restart,
        lp_epsilon=args.lp_epsilon, formats=tuple(args.format),
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command](cfg)
    except (InputError, GraphError, MetricError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DatasetError, Infeasible) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ModelFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
