"""Checkpoint files: one ``.npz`` with parameters, graph edges and a JSON config snapshot."""

from __future__ import annotations

import json
import os
import zipfile

import numpy as np

from .data import QMatrix, SkillTaxonomy
from .estimator import DiscoRecommender

__all__ = ["CheckpointError", "load_checkpoint", "save_checkpoint"]

FORMAT_VERSION = 1
_STRUCTURAL = ("taxonomy", "qmatrix")


class CheckpointError(RuntimeError):
    """Checkpoint is missing, truncated or inconsistent with the data."""


def save_checkpoint(model: DiscoRecommender, path: str | os.PathLike, epoch: int | None = None,
                    best_metric: float | None = None) -> None:
    params = {k: v for k, v in model.get_params().items() if k not in _STRUCTURAL}
    meta = {
        "format_version": FORMAT_VERSION,
        "params": params,
        "n_candidates": model.n_candidates_,
        "n_jobs": model.n_jobs_,
        "d_z": model.network_.d_z,
        "n_levels": model.taxonomy.n_levels,
        "epoch": int(epoch if epoch is not None else getattr(model, "best_epoch_", 0)),
        "best_metric": float(best_metric if best_metric is not None else getattr(model, "best_score_", np.nan)),
        "history": getattr(model, "history_", []),
    }
    arrays = {f"param/{k}": v for k, v in model.network_.state_dict().items()}
    arrays["graph_edges"] = model.graph_.edges
    arrays["meta"] = np.array(json.dumps(meta))
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path: str | os.PathLike, taxonomy: SkillTaxonomy, qmatrix: QMatrix) -> DiscoRecommender:
    """Rebuild a fitted estimator; ``taxonomy``/``qmatrix`` must match the training data."""
    if not os.path.exists(path):
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        with np.load(path, allow_pickle=False) as npz:
            meta = json.loads(str(npz["meta"]))
            state = {k[len("param/"):]: npz[k] for k in npz.files if k.startswith("param/")}
            edges = npz["graph_edges"]
    except (OSError, ValueError, KeyError, zipfile.BadZipFile, EOFError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if meta.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint format {meta.get('format_version')!r}")
    if meta["d_z"] != taxonomy.n_atomic or meta["n_levels"] != taxonomy.n_levels:
        raise CheckpointError(
            f"checkpoint was trained with L={meta['n_levels']}, d_z={meta['d_z']}; data has "
            f"L={taxonomy.n_levels}, d_z={taxonomy.n_atomic}"
        )
    if meta["n_jobs"] != qmatrix.n_jobs:
        raise CheckpointError(f"checkpoint has {meta['n_jobs']} jobs, Q-matrix has {qmatrix.n_jobs}")
    model = DiscoRecommender(taxonomy=taxonomy, qmatrix=qmatrix, **meta["params"])
    try:
        model._restore(state, edges, meta["n_candidates"])
    except (KeyError, ValueError) as exc:
        raise CheckpointError(f"checkpoint parameters do not fit the model: {exc}") from exc
    model.history_ = meta.get("history", [])
    model.best_epoch_ = meta["epoch"]
    model.best_score_ = meta["best_metric"]
    model.n_epochs_ = len(model.history_)
    return model
