"""Neural diagnosis interaction, hierarchical prediction head and training losses."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import autograd as ag
from .autograd import Tensor
from .data import Behavior
from .optim import xavier_init

__all__ = [
    "N_CLASSES",
    "DiagnosisHead",
    "LogClampWarning",
    "aggregate_predict",
    "diagnose_level",
    "main_loss",
    "match_score",
    "total_loss",
]

N_CLASSES = 4
LOG_FLOOR = 1e-12


class LogClampWarning(RuntimeWarning):
    """A true-class probability hit zero and was clamped before the log."""


def diagnose_level(c_tilde: Tensor, j_tilde: Tensor, mask) -> Tensor:
    """Masked ability-minus-difficulty distance ``mask * (sigmoid(c) - sigmoid(j))``."""
    c_tilde = c_tilde if isinstance(c_tilde, Tensor) else Tensor(c_tilde)
    j_tilde = j_tilde if isinstance(j_tilde, Tensor) else Tensor(j_tilde)
    mask = mask if isinstance(mask, Tensor) else Tensor(mask)
    if not (c_tilde.shape == j_tilde.shape == mask.shape):
        raise ag.DimensionError("diagnose_level", c_tilde.shape, j_tilde.shape, mask.shape)
    return ag.multiply(mask, ag.subtract(ag.sigmoid(c_tilde), ag.sigmoid(j_tilde)))


@dataclass
class DiagnosisHead:
    W1: Tensor
    b1: Tensor
    W2: Tensor
    b2: Tensor
    output_activation: str = "sigmoid"

    @classmethod
    def create(cls, in_width: int, d_h: int, rng: np.random.Generator,
               output_activation: str = "sigmoid") -> "DiagnosisHead":
        if output_activation not in ("sigmoid", "softmax"):
            raise ValueError(f"output_activation must be 'sigmoid' or 'softmax', got {output_activation!r}")
        return cls(
            W1=xavier_init(in_width, d_h, rng),
            b1=Tensor(np.zeros(d_h), requires_grad=True),
            W2=xavier_init(d_h, N_CLASSES, rng),
            b2=Tensor(np.zeros(N_CLASSES), requires_grad=True),
            output_activation=output_activation,
        )

    @property
    def in_width(self) -> int:
        return self.W1.shape[0]

    def logits(self, h: Tensor) -> Tensor:
        if h.shape[-1] != self.in_width:
            raise ag.DimensionError("aggregate_predict", h.shape, self.W1.shape)
        hidden = ag.sigmoid(ag.add(ag.matmul(h, self.W1), self.b1))
        return ag.add(ag.matmul(hidden, self.W2), self.b2)

    def __call__(self, h: Tensor) -> Tensor:
        z = self.logits(h)
        if self.output_activation == "softmax":
            return ag.softmax(z, axis=-1)
        return ag.sigmoid(z)

    def named_parameters(self, prefix: str = "head") -> dict[str, Tensor]:
        return {f"{prefix}.W1": self.W1, f"{prefix}.b1": self.b1,
                f"{prefix}.W2": self.W2, f"{prefix}.b2": self.b2}


def aggregate_predict(levels: list[Tensor], head: DiagnosisHead) -> Tensor:
    """Concatenate the L per-level distances and run the prediction head."""
    return head(ag.concat(levels, axis=-1))


def main_loss(y: Tensor, labels) -> Tensor:
    """Mean over the batch of ``-log y[r]`` (one-hot cross-entropy)."""
    labels = np.asarray(labels, dtype=np.int64)
    if y.ndim != 2 or y.shape[0] != len(labels):
        raise ag.DimensionError("main_loss", y.shape, labels.shape)
    onehot = np.zeros(y.shape)
    onehot[np.arange(len(labels)), labels] = 1.0
    picked = ag.sum(ag.multiply(y, Tensor(onehot)), axis=-1)
    if (picked.data <= 0).any():
        warnings.warn("true-class probability is 0; clamped to 1e-12", LogClampWarning, stacklevel=2)
        floor = np.where(picked.data <= 0, LOG_FLOOR - picked.data, 0.0)
        picked = ag.add(picked, Tensor(floor))
    return ag.scale(ag.sum(ag.log(picked)), -1.0 / len(labels))


def total_loss(main: Tensor, cl: Tensor | None, weight: float) -> Tensor:
    if weight < 0:
        raise ValueError(f"contrastive weight must be nonnegative, got {weight}")
    if cl is None or weight == 0:
        return main
    return ag.add(main, ag.scale(cl, weight))


def match_score(y) -> np.ndarray:
    """Match-class output used for AUC and ranking."""
    y = y.data if isinstance(y, Tensor) else np.asarray(y)
    return y[..., Behavior.MATCH]
