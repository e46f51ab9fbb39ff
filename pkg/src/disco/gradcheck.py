"""Central finite-difference verification of analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .autograd import Tensor, backward, no_grad

__all__ = ["GradCheckError", "GradCheckReport", "finite_diff_check", "relative_error"]


class GradCheckError(RuntimeError):
    """The checked function produced a non-finite loss."""


@dataclass
class GradCheckReport:
    tolerance: float
    errors: dict[str, float] = field(default_factory=dict)
    checked: dict[str, int] = field(default_factory=dict)

    @property
    def max_error(self) -> float:
        return max(self.errors.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tolerance

    def lines(self) -> list[str]:
        out = []
        for name, err in self.errors.items():
            status = "ok" if err <= self.tolerance else "FAIL"
            out.append(f"{name}\tentries={self.checked[name]}\tmax_rel_err={err:.3e}\t{status}")
        verdict = "PASS" if self.passed else "FAIL"
        out.append(f"{verdict}\tmax_rel_err={self.max_error:.3e}\ttolerance={self.tolerance:.1e}")
        return out


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> float:
    """Max-abs discrepancy scaled by the larger max-abs gradient of the two.

    Scaling per tensor rather than per entry keeps near-zero entries from
    turning finite-difference round-off into spurious failures.
    """
    scale = max(np.abs(analytic).max(initial=0.0), np.abs(numeric).max(initial=0.0), floor)
    return float(np.abs(analytic - numeric).max(initial=0.0) / scale)


def _eval(forward: Callable[[], Tensor]) -> float:
    with no_grad():
        value = forward().item()
    if not np.isfinite(value):
        raise GradCheckError(f"loss is not finite: {value}")
    return value


def finite_diff_check(
    forward: Callable[[], Tensor],
    params: Mapping[str, Tensor],
    tolerance: float = 1e-4,
    step: float = 1e-5,
    max_entries: int | None = None,
    rng: np.random.Generator | None = None,
    grad_hook: Callable[[str, np.ndarray], np.ndarray] | None = None,
) -> GradCheckReport:
    """Compare backward() gradients of ``forward()`` against central differences.

    ``forward`` must rebuild the loss from the current parameter values and be
    deterministic. ``max_entries`` caps the number of entries probed per
    tensor (sampled with ``rng``); ``None`` probes all of them. ``grad_hook``
    may rewrite the analytic gradient before comparison, which is how the
    negative controls inject a broken rule.
    """
    for p in params.values():
        p.grad = None
    loss = forward()
    if not np.isfinite(loss.item()):
        raise GradCheckError(f"loss is not finite: {loss.item()}")
    backward(loss)
    analytic = {}
    for name, p in params.items():
        g = np.zeros_like(p.data) if p.grad is None else p.grad.copy()
        if grad_hook is not None:
            g = grad_hook(name, g)
        analytic[name] = g
        p.grad = None

    rng = rng if rng is not None else np.random.default_rng(0)
    report = GradCheckReport(tolerance=tolerance)
    for name, p in params.items():
        flat = p.data.reshape(-1)
        idx = np.arange(flat.size)
        if max_entries is not None and flat.size > max_entries:
            idx = np.sort(rng.choice(flat.size, size=max_entries, replace=False))
        numeric = np.empty(idx.size)
        for k, i in enumerate(idx):
            orig = flat[i]
            flat[i] = orig + step
            up = _eval(forward)
            flat[i] = orig - step
            down = _eval(forward)
            flat[i] = orig
            numeric[k] = (up - down) / (2.0 * step)
        report.errors[name] = relative_error(analytic[name].reshape(-1)[idx], numeric)
        report.checked[name] = int(idx.size)
    return report
