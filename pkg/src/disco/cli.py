"""Command-line entry point: ``disco <command> [options]``.

Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
The output directory is ``--out`` if given, else ``$DISCO_OUT``, else
``./disco_out``.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .association import ContrastiveConfig
from .base_embed import BipartiteGraph
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .config import PAPER_SCALE, ConfigError, RunConfig, load_config
from .data import (
    SPLITS, DataFormatError, InteractionDataset, PlantedGroundTruth, generate_synthetic, load_dataset,
    make_taxonomy, save_dataset, split_dataset,
)
from .estimator import HISTORY_COLUMNS, DiscoRecommender
from .gradcheck import GradCheckReport, finite_diff_check
from .metrics import evaluate
from .model import DiscoNetwork, NetworkConfig
from .profiles import export_profiles, plot_profile_pair

__all__ = ["generate_from_config", "grad_check_toy", "main", "train_from_config"]

OUT_ENV = "DISCO_OUT"
DEFAULT_OUT = "disco_out"
METRIC_NAMES = ("AUC", "HR@5", "HR@10", "NDCG@5", "NDCG@10")

log = logging.getLogger("disco")


class UsageError(Exception):
    """Bad input detected by a command; exits with status 2."""


# ----------------------------------------------------------------------------
# building blocks (also used by the test-suite)
# ----------------------------------------------------------------------------


def generate_from_config(cfg: RunConfig) -> tuple[InteractionDataset, PlantedGroundTruth]:
    """Planted dataset with a 7/1/2 split; ``cfg.seed`` fixes both the data and the split."""
    try:
        taxonomy = make_taxonomy(cfg.taxonomy_sizes)
    except ValueError as exc:
        raise ConfigError("taxonomy_sizes", str(exc)) from exc
    ds, truth = generate_synthetic(cfg.n_candidates, cfg.n_jobs, taxonomy, cfg.density,
                                   np.random.default_rng(cfg.seed),
                                   requirement_range=(cfg.requirement_low, cfg.requirement_high))
    return split_dataset(ds, np.random.default_rng(cfg.seed + 1)), truth


def train_from_config(cfg: RunConfig, ds: InteractionDataset, log_path: str | os.PathLike | None = None,
                      ) -> DiscoRecommender:
    cfg.check_taxonomy(ds.taxonomy)
    model = DiscoRecommender(ds.taxonomy, ds.qmatrix, n_candidates=ds.n_candidates, **cfg.estimator_params())
    X, y = ds.subset("train")
    Xv, yv = ds.subset("valid")
    eval_set = (Xv, yv) if len(Xv) else None
    use_cl = not cfg.disable_cl and cfg.cl_weight > 0
    columns = [c for c in HISTORY_COLUMNS if c != "cl_loss" or use_cl]
    if eval_set is None:
        columns = [c for c in columns if not c.startswith("val_")]
    fh = None
    if log_path is not None:
        fh = open(log_path, "w", encoding="utf-8")
        fh.write("\t".join(columns) + "\n")
        fh.flush()

    def on_epoch(row: dict) -> None:
        if fh is not None:
            fh.write("\t".join(str(row[c]) if c == "epoch" else repr(float(row[c])) for c in columns) + "\n")
            fh.flush()

    try:
        model.fit(X, y, eval_set=eval_set, callback=on_epoch)
    finally:
        if fh is not None:
            fh.close()
    return model


def grad_check_toy(seed: int = 0, corrupt: bool = False, tolerance: float = 1e-4,
                   step: float = 1e-5) -> GradCheckReport:
    """Finite-difference check of every parameter of a small NGCF-based network.

    N=8, M=12, L=3, d=d_h=16, d_z=10. The contrastive weight is raised to
    0.5 so its path contributes visibly to every prototype gradient.
    ``corrupt`` perturbs one analytic gradient as a negative control.
    """
    taxonomy = make_taxonomy((2, 4, 10))
    ds, _ = generate_synthetic(8, 12, taxonomy, 0.5, np.random.default_rng(seed))
    X, y = ds.pairs, ds.behaviors
    graph = BipartiteGraph(8, 12, np.unique(X[y == 3], axis=0).reshape(-1, 2))
    config = NetworkConfig(base_model="ngcf", d=16, d_h=16, n_layers=2,
                           contrastive=ContrastiveConfig(tau=0.2, epsilon=0.1, weight=0.5))
    net = DiscoNetwork(config, 8, 12, ds.qmatrix.level_masks, graph.normalized_adjacency(),
                       np.random.default_rng(seed + 1))

    def forward():
        return net.forward(X, y, noise_rng=np.random.default_rng(seed + 2)).total

    hook = None
    if corrupt:
        def hook(name, grad):
            if name == "head.W1":
                grad = grad.copy()
                grad.flat[0] += 1.0 + abs(grad.flat[0])
            return grad

    return finite_diff_check(forward, net.named_parameters(), tolerance=tolerance, step=step, grad_hook=hook)


# ----------------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------------


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(OUT_ENV) or DEFAULT_OUT
    path = Path(out)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {path}: {exc}") from exc
    return path


def _config(args) -> RunConfig:
    base = RunConfig()
    if getattr(args, "paper_scale", False):
        base = base.replace(**PAPER_SCALE)
    cfg = load_config(args.config, base)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    return cfg


def _load_data(path: str) -> InteractionDataset:
    if not Path(path, "interactions.tsv").exists():
        raise UsageError(f"no dataset in {path} (interactions.tsv missing)")
    ds = load_dataset(path)
    if ds.split is None:
        raise UsageError(f"dataset in {path} has no split column")
    return ds


def _load_model(path: str, ds: InteractionDataset) -> DiscoRecommender:
    if not Path(path).exists():
        raise UsageError(f"checkpoint not found: {path}")
    return load_checkpoint(path, ds.taxonomy, ds.qmatrix)


def cmd_gen_data(args) -> int:
    cfg = _config(args)
    ds, truth = generate_from_config(cfg)
    out = _out_dir(args)
    save_dataset(ds, out, truth)
    (out / "config.txt").write_text(cfg.to_text(), encoding="utf-8")
    counts = ds.behavior_counts()
    for name, n in counts.items():
        print(f"{name}\t{n}")
    print(f"total\t{len(ds)}")
    for split in SPLITS:
        print(f"{split}\t{int((ds.split == split).sum())}")
    return 0


def _train_one(cfg: RunConfig, ds: InteractionDataset, out: Path) -> DiscoRecommender:
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(cfg.to_text(), encoding="utf-8")
    model = train_from_config(cfg, ds, out / "train_log.tsv")
    save_checkpoint(model, out / "checkpoint.npz")
    print(f"seed={cfg.seed}\tepochs={model.n_epochs_}\tbest_epoch={model.best_epoch_}\t"
          f"best_val_auc={model.best_score_!r}\tcheckpoint={out / 'checkpoint.npz'}")
    return model


def cmd_train(args) -> int:
    cfg = _config(args)
    ds = _load_data(args.data)
    cfg.check_taxonomy(ds.taxonomy)
    out = _out_dir(args)
    if args.repeat <= 1:
        _train_one(cfg, ds, out)
        return 0
    rows = []
    for r in range(args.repeat):
        run_cfg = cfg.replace(seed=cfg.seed + r)
        model = _train_one(run_cfg, ds, out / f"run_{r}")
        report = evaluate(model.decision_function, ds, "test", rng=np.random.default_rng(run_cfg.seed))
        report.write(out / f"run_{r}" / "metrics.txt")
        rows.append([report[m] for m in METRIC_NAMES])
    values = np.asarray(rows)
    with open(out / "repeat_summary.tsv", "w", encoding="utf-8") as fh:
        fh.write("metric\tmean\tstd\t" + "\t".join(f"seed_{cfg.seed + r}" for r in range(args.repeat)) + "\n")
        for k, name in enumerate(METRIC_NAMES):
            col = values[:, k]
            fh.write(f"{name}\t{float(col.mean())!r}\t{float(col.std(ddof=1))!r}\t"
                     + "\t".join(repr(float(v)) for v in col) + "\n")
            print(f"{name}\tmean={col.mean():.4f}\tstd={col.std(ddof=1):.4f}")
    return 0


def cmd_eval(args) -> int:
    cfg = _config(args)
    ds = _load_data(args.data)
    model = _load_model(args.checkpoint, ds)
    report = evaluate(model.decision_function, ds, args.split, rng=np.random.default_rng(cfg.seed))
    out = _out_dir(args)
    report.write(out / "metrics.txt", out / "ranked_lists.tsv")
    sys.stdout.write(report.to_text())
    return 0


def cmd_grad_check(args) -> int:
    cfg = _config(args)
    report = grad_check_toy(seed=cfg.seed, corrupt=args.corrupt_grad)
    for line in report.lines():
        print(line)
    return 0 if report.passed else 1


def _parse_ids(text: str | None, what: str) -> list[int]:
    if not text:
        return []
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"{what} ids must be comma-separated integers, got {text!r}") from None


def cmd_export_profiles(args) -> int:
    ds = _load_data(args.data)
    model = _load_model(args.checkpoint, ds)
    cands = _parse_ids(args.candidates, "candidate")
    jobs = _parse_ids(args.jobs, "job")
    if not cands and not jobs:
        raise UsageError("give --candidates and/or --jobs")
    out = _out_dir(args)
    try:
        cprof = export_profiles(model, "candidate", cands, out / "profiles_candidate.tsv") if cands else []
        jprof = export_profiles(model, "job", jobs, out / "profiles_job.tsv") if jobs else []
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    if args.chart:
        if len(cands) != len(jobs):
            raise UsageError("--chart pairs candidates with jobs; give the same number of each")
        names = ds.taxonomy.atomic_names()
        for cp, jp in zip(cprof, jprof):
            path = out / f"profile_c{cp.entity_id}_j{jp.entity_id}.png"
            plot_profile_pair(cp, jp, names, path)
            print(f"chart\t{path}")
    for path in ("profiles_candidate.tsv", "profiles_job.tsv"):
        if (out / path).exists():
            print(f"profiles\t{out / path}")
    return 0


# ----------------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------------


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="key = value run configuration file")
    parser.add_argument("--seed", type=int, default=default, help="override the config seed")
    parser.add_argument("--out", default=default, help=f"output directory (else ${OUT_ENV}, else ./{DEFAULT_OUT})")
    parser.add_argument("--paper-scale", action="store_true",
                        default=argparse.SUPPRESS if suppress else False, help="use d = d_h = 256")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="disco", description="Interpretable skill-diagnosis job recommender")
    _global_flags(parser, suppress=False)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        _global_flags(p, suppress=True)
        p.set_defaults(func=func)
        return p

    add("gen-data", cmd_gen_data, "write a planted-signal dataset")
    p = add("train", cmd_train, "train and save the best-validation checkpoint")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--repeat", type=int, default=1, help="train with seeds seed..seed+R-1 and summarise")
    p = add("eval", cmd_eval, "rank sampled lists and write the metric report")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="test", choices=SPLITS)
    p = add("grad-check", cmd_grad_check, "finite-difference gradient check on a toy network")
    p.add_argument("--corrupt-grad", action="store_true", help=argparse.SUPPRESS)
    p = add("export-profiles", cmd_export_profiles, "write per-level skill profiles")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--candidates", help="comma-separated candidate ids")
    p.add_argument("--jobs", help="comma-separated job ids")
    p.add_argument("--chart", action="store_true", help="also draw one bar chart per candidate/job pair")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, CheckpointError, DataFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
