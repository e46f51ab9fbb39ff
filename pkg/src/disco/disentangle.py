"""Level projectors and per-level prototype encoders."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autograd as ag
from .autograd import Tensor
from .optim import xavier_init

__all__ = ["LevelEncoder", "encode_prototypes", "make_encoders", "make_projectors", "project_levels"]

HIDDEN_ACTIVATIONS = {"tanh": ag.tanh, "sigmoid": ag.sigmoid, "leaky_relu": ag.leaky_relu}


def make_projectors(n_levels: int, in_width: int, d_h: int, rng: np.random.Generator, side: str) -> list[Tensor]:
    return [xavier_init(in_width, d_h, rng, name=f"proj.{side}.{l}") for l in range(n_levels)]


def project_levels(embedding: Tensor, projectors: list[Tensor]) -> list[Tensor]:
    """``embedding @ W_l`` for every level (no bias)."""
    for W in projectors:
        if embedding.shape[-1] != W.shape[0]:
            raise ag.DimensionError("project_levels", embedding.shape, W.shape)
    return [ag.matmul(embedding, W) for W in projectors]


@dataclass
class LevelEncoder:
    """Two-layer MLP ``d_h -> d_h -> d_z`` with no output activation."""

    W1: Tensor
    b1: Tensor
    W2: Tensor
    b2: Tensor
    activation: str = "tanh"

    def __call__(self, h: Tensor) -> Tensor:
        if h.shape[-1] != self.W1.shape[0]:
            raise ag.DimensionError("encode_prototypes", h.shape, self.W1.shape)
        act = HIDDEN_ACTIVATIONS[self.activation]
        hidden = act(ag.add(ag.matmul(h, self.W1), self.b1))
        return ag.add(ag.matmul(hidden, self.W2), self.b2)

    def named_parameters(self, prefix: str) -> dict[str, Tensor]:
        return {f"{prefix}.W1": self.W1, f"{prefix}.b1": self.b1,
                f"{prefix}.W2": self.W2, f"{prefix}.b2": self.b2}


def make_encoders(n_levels: int, d_h: int, d_z: int, rng: np.random.Generator,
                  activation: str = "tanh") -> list[LevelEncoder]:
    return [
        LevelEncoder(
            W1=xavier_init(d_h, d_h, rng),
            b1=Tensor(np.zeros(d_h), requires_grad=True),
            W2=xavier_init(d_h, d_z, rng),
            b2=Tensor(np.zeros(d_z), requires_grad=True),
            activation=activation,
        )
        for _ in range(n_levels)
    ]


def encode_prototypes(hidden: list[Tensor], encoders: list[LevelEncoder]) -> Tensor:
    """Encode each level's hidden vectors; returns ``(batch, L, d_z)``."""
    if len(hidden) != len(encoders):
        raise ValueError(f"got {len(hidden)} hidden levels for {len(encoders)} encoders")
    return ag.stack([enc(h) for enc, h in zip(encoders, hidden)], axis=1)
