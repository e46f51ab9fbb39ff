"""AUC, HR@k and NDCG@k under the sampled-negative ranking protocol."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import rankdata

from .data import Behavior, InteractionDataset, sample_negatives

__all__ = [
    "MetricReport",
    "RankedList",
    "UndefinedMetricError",
    "build_ranked_lists",
    "compute_auc",
    "compute_hr_ndcg",
    "evaluate",
    "positive_rank",
]


class UndefinedMetricError(ValueError):
    """Metric needs both classes present."""


def compute_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Probability a random positive outscores a random negative; ties count half."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError(f"AUC needs both classes, got {n_pos} positives and {n_neg} negatives")
    ranks = rankdata(scores)  # average ranks resolve ties
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def positive_rank(pos_job: int, pos_score: float, neg_jobs: np.ndarray, neg_scores: np.ndarray) -> int:
    """1-based rank of the positive; ties go to the smaller job id."""
    ahead = (neg_scores > pos_score) | ((neg_scores == pos_score) & (neg_jobs < pos_job))
    return int(ahead.sum()) + 1


def compute_hr_ndcg(rank: int, k: int) -> tuple[int, float]:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if rank <= k:
        return 1, float(1.0 / np.log2(rank + 1))
    return 0, 0.0


@dataclass
class RankedList:
    candidate: int
    positive: int
    negatives: np.ndarray
    scores: np.ndarray | None = None  # positive first, then negatives

    @property
    def jobs(self) -> np.ndarray:
        return np.concatenate([[self.positive], self.negatives])

    @property
    def rank(self) -> int:
        if self.scores is None:
            raise ValueError("list has not been scored")
        return positive_rank(self.positive, self.scores[0], self.negatives, self.scores[1:])


def lists_from_records(pairs: np.ndarray, behaviors: np.ndarray, exclude: dict[int, set[int]], n_jobs: int,
                       rng: np.random.Generator, n_negatives: int = 25) -> tuple[list[RankedList], int]:
    """One list per Match record; negatives avoid ``exclude[candidate]`` and the positive itself.

    Returns the lists and the number of records skipped for lack of jobs.
    """
    pairs = np.asarray(pairs, dtype=np.int64)
    behaviors = np.asarray(behaviors)
    lists, skipped = [], 0
    for c, j in pairs[behaviors == Behavior.MATCH]:
        c, j = int(c), int(j)
        positives = exclude.get(c, set()) | {j}
        if n_jobs - len(positives) < n_negatives:
            skipped += 1
            continue
        negs = sample_negatives(c, positives, n_jobs, rng, count=n_negatives)
        lists.append(RankedList(c, j, negs))
    return lists, skipped


def build_ranked_lists(dataset: InteractionDataset, split: str, rng: np.random.Generator,
                       n_negatives: int = 25) -> tuple[list[RankedList], int]:
    """Lists for the Match records of ``split``, excluding each candidate's Matches in every split."""
    pairs, behaviors = dataset.subset(split)
    return lists_from_records(pairs, behaviors, dataset.match_sets(), dataset.n_jobs, rng, n_negatives)


@dataclass
class MetricReport:
    metrics: dict[str, float]
    n_lists: int
    skipped: int
    lists: list[RankedList] = field(default_factory=list, repr=False)

    def __getitem__(self, key: str) -> float:
        return self.metrics[key]

    def to_text(self) -> str:
        lines = [f"{k}={v!r}" for k, v in self.metrics.items()]
        lines += [f"n_lists={self.n_lists}", f"skipped={self.skipped}"]
        return "\n".join(lines) + "\n"

    def write(self, path: str | os.PathLike, lists_path: str | os.PathLike | None = None) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())
        if lists_path is not None:
            with open(lists_path, "w", encoding="utf-8") as fh:
                fh.write("candidate_id\tpositive_job\trank\tpositive_score\n")
                for rl in self.lists:
                    fh.write(f"{rl.candidate}\t{rl.positive}\t{rl.rank}\t{float(rl.scores[0])!r}\n")


def score_lists(lists: list[RankedList], score_fn: Callable[[np.ndarray], np.ndarray]) -> None:
    if not lists:
        return
    pairs = np.concatenate([np.column_stack([np.full(len(rl.jobs), rl.candidate), rl.jobs]) for rl in lists])
    scores = np.asarray(score_fn(pairs), dtype=np.float64)
    width = len(lists[0].jobs)
    for i, rl in enumerate(lists):
        rl.scores = scores[i * width:(i + 1) * width]


def report_from_lists(lists: list[RankedList], ks: Sequence[int] = (5, 10), skipped: int = 0) -> MetricReport:
    metrics: dict[str, float] = {}
    if lists:
        labels = np.concatenate([[1] + [0] * len(rl.negatives) for rl in lists])
        scores = np.concatenate([rl.scores for rl in lists])
        metrics["AUC"] = compute_auc(scores, labels)
        ranks = [rl.rank for rl in lists]
        for k in ks:
            hits, gains = zip(*(compute_hr_ndcg(r, k) for r in ranks))
            metrics[f"HR@{k}"] = float(np.mean(hits))
            metrics[f"NDCG@{k}"] = float(np.mean(gains))
    else:
        metrics["AUC"] = float("nan")
        for k in ks:
            metrics[f"HR@{k}"] = float("nan")
            metrics[f"NDCG@{k}"] = float("nan")
    return MetricReport(metrics=metrics, n_lists=len(lists), skipped=skipped, lists=lists)


def evaluate(score_fn: Callable[[np.ndarray], np.ndarray], dataset: InteractionDataset, split: str = "test",
             ks: Sequence[int] = (5, 10), rng: np.random.Generator | None = None,
             n_negatives: int = 25) -> MetricReport:
    """Rank every Match record of ``split`` against sampled negatives.

    ``score_fn`` maps an ``(n, 2)`` array of (candidate, job) pairs to match
    scores; a fitted :class:`~disco.DiscoRecommender` passes its
    ``decision_function``. AUC pools every scored point of every list.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    lists, skipped = build_ranked_lists(dataset, split, rng, n_negatives)
    score_lists(lists, score_fn)
    return report_from_lists(lists, ks, skipped)
