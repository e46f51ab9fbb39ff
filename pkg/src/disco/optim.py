"""Parameter initialisation and the Adam optimiser."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .autograd import Tensor

__all__ = ["Adam", "AdamState", "xavier_bound", "xavier_init"]


def xavier_bound(n_in: int, n_out: int) -> float:
    return float(np.sqrt(2.0 / (n_in + n_out)))


def xavier_init(n_in: int, n_out: int, rng: np.random.Generator, name: str | None = None) -> Tensor:
    """Trainable ``(n_in, n_out)`` matrix drawn from U(-b, b), b = sqrt(2 / (n_in + n_out))."""
    if n_in < 1 or n_out < 1:
        raise ValueError(f"xavier_init: dimensions must be >= 1, got ({n_in}, {n_out})")
    b = xavier_bound(n_in, n_out)
    return Tensor(rng.uniform(-b, b, size=(n_in, n_out)), requires_grad=True, name=name)


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


class Adam:
    """Bias-corrected Adam over a name -> Tensor parameter mapping.

    ``step`` requires every parameter to carry a gradient and zeroes the
    gradients afterwards.
    """

    def __init__(self, params: Mapping[str, Tensor], lr: float = 1e-3,
                 betas: tuple[float, float] = (0.9, 0.999), eps: float = 1e-8):
        if lr <= 0:
            raise ValueError(f"learning rate must be positive, got {lr}")
        self.params = dict(params)
        self.state = AdamState(lr=lr, beta1=betas[0], beta2=betas[1], eps=eps)
        for name, p in self.params.items():
            self.state.m[name] = np.zeros_like(p.data)
            self.state.v[name] = np.zeros_like(p.data)

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None

    def step(self) -> None:
        missing = [n for n, p in self.params.items() if p.grad is None]
        if missing:
            raise ValueError(f"adam_step: missing gradient for parameter {missing[0]!r}")
        st = self.state
        st.step += 1
        c1 = 1.0 - st.beta1**st.step
        c2 = 1.0 - st.beta2**st.step
        for name, p in self.params.items():
            g = p.grad
            m = st.m[name]
            v = st.v[name]
            m *= st.beta1
            m += (1.0 - st.beta1) * g
            v *= st.beta2
            v += (1.0 - st.beta2) * g * g
            p.data -= st.lr * (m / c1) / (np.sqrt(v / c2) + st.eps)
        self.zero_grad()
