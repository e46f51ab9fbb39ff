"""Per-level skill profile export and its comparison against planted ground truth."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy.stats import spearmanr

from .data import PlantedGroundTruth
from .estimator import DiscoRecommender

__all__ = ["SkillProfile", "export_profiles", "plot_profile_pair", "profile_spearman", "read_profiles"]

PROFILE_COLUMNS = ("entity_id", "side", "level", "skill_id", "skill_name", "value")


@dataclass
class SkillProfile:
    entity_id: int
    side: str
    levels: tuple[int, ...]  # taxonomy level number of each row of ``values``
    values: np.ndarray  # (len(levels), d_z), strictly inside (0, 1)


def _profile_levels(model: DiscoRecommender) -> tuple[int, ...]:
    L = model.taxonomy.n_levels
    # the single-granularity ablation keeps only the atomic level
    return (L,) if model.disable_hd else tuple(range(1, L + 1))


def export_profiles(model: DiscoRecommender, side: str, ids, path: str | os.PathLike | None = None,
                    ) -> list[SkillProfile]:
    """Sigmoid of each entity's enhanced prototypes, one row per (level, atomic skill).

    Raises ``KeyError`` naming the first unknown id. Files written for the
    two sides share the same skill columns in the same order.
    """
    ids = [int(i) for i in np.asarray(ids).reshape(-1)]
    values = model.profiles(side, ids)
    levels = _profile_levels(model)
    profiles = [SkillProfile(e, side, levels, values[k]) for k, e in enumerate(ids)]
    if path is not None:
        atomic = model.taxonomy.levels[-1]
        names = model.taxonomy.atomic_names()
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\t".join(PROFILE_COLUMNS) + "\n")
            for prof in profiles:
                for row, level in enumerate(prof.levels):
                    for s, (sid, name) in enumerate(zip(atomic, names)):
                        fh.write(f"{prof.entity_id}\t{side}\t{level}\t{sid}\t{name}\t{float(prof.values[row, s])!r}\n")
    return profiles


def read_profiles(path: str | os.PathLike) -> list[tuple[int, str, int, int, str, float]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if tuple(header) != PROFILE_COLUMNS:
            raise ValueError(f"{path}: unexpected header {header}")
        for line in fh:
            e, side, level, sid, name, value = line.rstrip("\n").split("\t")
            rows.append((int(e), side, int(level), int(sid), name, float(value)))
    return rows


def profile_spearman(model: DiscoRecommender, truth: PlantedGroundTruth, train_pairs: np.ndarray,
                     min_occurrences: int = 20) -> tuple[float, np.ndarray]:
    """Pooled Spearman correlation of atomic-level candidate profiles with planted proficiency.

    Only atomic skills tagged on at least ``min_occurrences`` training
    records enter. Returns the correlation and the eligible-skill mask.
    """
    train_pairs = np.asarray(train_pairs, dtype=np.int64)
    masks = model.qmatrix.level_masks[:, -1, :]
    occurrences = masks[train_pairs[:, 1]].sum(axis=0)
    eligible = occurrences >= min_occurrences
    if not eligible.any():
        raise ValueError(f"no atomic skill has {min_occurrences} training occurrences")
    estimated = model.profiles("candidate", np.arange(model.n_candidates_))[:, -1, :]
    rho = spearmanr(estimated[:, eligible].ravel(), truth.proficiency[:, eligible].ravel())[0]
    return float(rho), eligible


def plot_profile_pair(candidate: SkillProfile, job: SkillProfile, skill_names: list[str],
                      path: str | os.PathLike) -> None:
    """Grouped bar chart per level: candidate proficiency next to job requirement."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    n_levels = len(candidate.levels)
    x = np.arange(len(skill_names))
    fig, axes = plt.subplots(n_levels, 1, figsize=(max(6.0, 0.35 * len(x)), 2.2 * n_levels), squeeze=False)
    for row, ax in enumerate(axes[:, 0]):
        ax.bar(x - 0.2, candidate.values[row], width=0.4, label=f"candidate {candidate.entity_id}")
        ax.bar(x + 0.2, job.values[row], width=0.4, label=f"job {job.entity_id}")
        ax.set_ylim(0, 1)
        ax.set_ylabel(f"level {candidate.levels[row]}")
    axes[-1, 0].set_xticks(x, skill_names, rotation=90, fontsize=7)
    axes[0, 0].legend(loc="upper right", fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
