"""Level-aware self-attention and level-wise contrastive learning."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import autograd as ag
from .autograd import Tensor
from .optim import xavier_init

__all__ = [
    "AttentionParams",
    "ContrastiveConfig",
    "DegenerateNoiseWarning",
    "ZeroNormWarning",
    "augment_noise",
    "combined_cl_loss",
    "level_attention",
    "level_contrastive_loss",
]


class DegenerateNoiseWarning(RuntimeWarning):
    """An all-zero prototype cannot receive noise of norm epsilon."""


class ZeroNormWarning(RuntimeWarning):
    """Cosine similarity met a zero vector and was taken as 0."""


@dataclass
class AttentionParams:
    Wq: Tensor
    Wk: Tensor
    Wv: Tensor

    @classmethod
    def create(cls, d_z: int, rng: np.random.Generator) -> "AttentionParams":
        return cls(xavier_init(d_z, d_z, rng), xavier_init(d_z, d_z, rng), xavier_init(d_z, d_z, rng))

    @classmethod
    def identity(cls, d_z: int) -> "AttentionParams":
        return cls(*(Tensor(np.eye(d_z), requires_grad=True) for _ in range(3)))

    def named_parameters(self, prefix: str) -> dict[str, Tensor]:
        return {f"{prefix}.Wq": self.Wq, f"{prefix}.Wk": self.Wk, f"{prefix}.Wv": self.Wv}


@dataclass(frozen=True)
class ContrastiveConfig:
    tau: float = 0.2
    epsilon: float = 0.1
    weight: float = 1e-3
    double_noise: bool = False

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")
        if self.weight < 0:
            raise ValueError(f"contrastive weight must be nonnegative, got {self.weight}")


def level_attention(prototypes: Tensor, params: AttentionParams, values: Tensor | None = None,
                    return_weights: bool = False):
    """Scaled dot-product attention across the L levels of each entity.

    ``prototypes`` is ``(batch, L, d_z)``. Queries and keys come from it;
    values too unless ``values`` (same shape) is given.
    """
    if prototypes.ndim != 3:
        raise ag.DimensionError("level_attention", prototypes.shape, detail="expected (batch, L, d_z)")
    d_z = prototypes.shape[-1]
    src = prototypes if values is None else values
    if src.shape != prototypes.shape:
        raise ag.DimensionError("level_attention", prototypes.shape, src.shape)
    q = ag.matmul(prototypes, params.Wq)
    k = ag.matmul(prototypes, params.Wk)
    v = ag.matmul(src, params.Wv)
    scores = ag.scale(ag.matmul(q, ag.swapaxes(k, 1, 2)), 1.0 / np.sqrt(d_z))
    weights = ag.softmax(scores, axis=-1)
    out = ag.matmul(weights, v)
    return (out, weights) if return_weights else out


def augment_noise(prototype: np.ndarray, epsilon: float, rng: np.random.Generator) -> np.ndarray:
    """Add sign-aligned uniform noise rescaled to L2 norm ``epsilon`` along the last axis.

    Works on a single vector or any batch of vectors. Zero components stay
    unperturbed; all-zero vectors are returned unchanged with a warning.
    """
    x = np.asarray(prototype, dtype=np.float64)
    if epsilon < 0:
        raise ValueError(f"epsilon must be nonnegative, got {epsilon}")
    if epsilon == 0:
        return x.copy()
    raw = rng.uniform(0.0, 1.0, size=x.shape) * np.sign(x)
    n = np.linalg.norm(raw, axis=-1, keepdims=True)
    dead = n == 0
    if dead.any():
        warnings.warn(
            f"{int(dead.sum())} all-zero prototype(s) left unperturbed: noise norm {epsilon} unattainable",
            DegenerateNoiseWarning, stacklevel=2,
        )
    delta = np.where(dead, 0.0, epsilon * raw / np.where(dead, 1.0, n))
    return x + delta


def level_contrastive_loss(enhanced: Tensor, config: ContrastiveConfig, rng: np.random.Generator) -> Tensor:
    """Contrast each level's clean/noisy similarity against the other levels.

    With ``phi_l`` the cosine between an entity's level-l vector and its
    augmented copy, the loss is ``(1/L) sum_entities sum_l -log softmax(phi/tau)_l``.
    The noise is a constant; gradients flow through both views.
    """
    if enhanced.ndim != 3:
        raise ag.DimensionError("level_contrastive_loss", enhanced.shape, detail="expected (batch, L, d_z)")
    L = enhanced.shape[1]
    if L == 1:
        return Tensor(0.0)
    delta = augment_noise(enhanced.data, config.epsilon, rng) - enhanced.data
    view_b = ag.add(enhanced, Tensor(delta))
    if config.double_noise:
        delta_a = augment_noise(enhanced.data, config.epsilon, rng) - enhanced.data
        view_a = ag.add(enhanced, Tensor(delta_a))
    else:
        view_a = enhanced
    if (np.linalg.norm(view_a.data, axis=-1) == 0).any() or (np.linalg.norm(view_b.data, axis=-1) == 0).any():
        warnings.warn("zero-norm prototype in cosine similarity; similarity taken as 0",
                      ZeroNormWarning, stacklevel=2)
    phi = ag.cosine_similarity(view_a, view_b, axis=-1)  # (batch, L)
    log_p = ag.log(ag.softmax(ag.scale(phi, 1.0 / config.tau), axis=-1))
    return ag.scale(ag.sum(log_p), -1.0 / L)


def combined_cl_loss(candidate_loss: Tensor, job_loss: Tensor) -> Tensor:
    return ag.add(candidate_loss, job_loss)
