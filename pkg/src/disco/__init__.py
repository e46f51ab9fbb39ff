"""Hierarchical disentangled cognitive diagnosis for interpretable job recommendation."""

from .data import (
    Behavior,
    InteractionDataset,
    PlantedGroundTruth,
    QMatrix,
    SkillTaxonomy,
    generate_synthetic,
    load_dataset,
    load_taxonomy,
    make_taxonomy,
    sample_negatives,
    save_dataset,
    split_dataset,
)
from .estimator import DiscoRecommender
from .metrics import MetricReport, compute_auc, compute_hr_ndcg, evaluate

__all__ = [
    "Behavior",
    "DiscoRecommender",
    "InteractionDataset",
    "MetricReport",
    "PlantedGroundTruth",
    "QMatrix",
    "SkillTaxonomy",
    "compute_auc",
    "compute_hr_ndcg",
    "evaluate",
    "generate_synthetic",
    "load_dataset",
    "load_taxonomy",
    "make_taxonomy",
    "sample_negatives",
    "save_dataset",
    "split_dataset",
]

__version__ = "0.1.0"
