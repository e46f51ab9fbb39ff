"""Run configuration: typed fields, ``key = value`` text files, validation."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields

from .base_embed import ACTIVATIONS
from .data import SkillTaxonomy
from .model import BASE_MODELS

__all__ = ["ConfigError", "PAPER_SCALE", "RunConfig", "load_config"]

# full-size embedding/hidden widths; desk defaults are smaller
PAPER_SCALE = {"d": 256, "d_h": 256}

# fields that belong to the synthetic generator rather than the model
DATA_FIELDS = ("n_candidates", "n_jobs", "taxonomy_sizes", "density", "requirement_low", "requirement_high")
# fields handled by the CLI itself
RUN_FIELDS = ("seed", "d_z") + DATA_FIELDS


class ConfigError(ValueError):
    def __init__(self, name: str, message: str):
        self.field = name
        super().__init__(f"{name}: {message}")


@dataclass
class RunConfig:
    # synthetic data
    n_candidates: int = 200
    n_jobs: int = 400
    taxonomy_sizes: tuple[int, ...] = (3, 9, 30)
    density: float = 0.2
    requirement_low: float = 0.3
    requirement_high: float = 1.0
    # model
    base_model: str = "ngcf"
    d: int = 32
    d_h: int = 32
    d_z: int | None = None  # taken from the taxonomy when unset
    n_layers: int = 2
    ngcf_activation: str = "leaky_relu"
    encoder_activation: str = "tanh"
    output_activation: str = "softmax"
    # training
    learning_rate: float = 5e-3
    cl_weight: float = 1e-3
    tau: float = 0.2
    epsilon: float = 0.1
    batch_size: int = 256
    epochs: int = 100
    patience: int = 10
    seed: int = 0
    # ablations and variants
    disable_hd: bool = False
    disable_sa: bool = False
    disable_cl: bool = False
    disable_id: bool = False
    attention_cross_side: bool = False
    double_noise: bool = False
    edge_rule: str = "match"
    freeze_base: bool = False

    # ------------------------------------------------------------------
    def validate(self) -> "RunConfig":
        def need(ok: bool, name: str, message: str):
            if not ok:
                raise ConfigError(name, message)

        for name in ("n_candidates", "n_jobs", "d", "d_h", "batch_size", "patience"):
            need(getattr(self, name) >= 1, name, f"must be >= 1, got {getattr(self, name)}")
        need(self.epochs >= 0, "epochs", f"must be >= 0, got {self.epochs}")
        need(self.n_layers >= (1 if self.base_model == "ngcf" else 0), "n_layers",
             f"must be >= 1 for ngcf and >= 0 otherwise, got {self.n_layers}")
        need(len(self.taxonomy_sizes) >= 1 and min(self.taxonomy_sizes) >= 1, "taxonomy_sizes",
             f"need at least one level and positive sizes, got {self.taxonomy_sizes}")
        need(all(a <= b for a, b in zip(self.taxonomy_sizes, self.taxonomy_sizes[1:])), "taxonomy_sizes",
             f"level sizes must be nondecreasing, got {self.taxonomy_sizes}")
        need(0 < self.density <= 1, "density", f"must be in (0, 1], got {self.density}")
        need(0 <= self.requirement_low < self.requirement_high <= 1, "requirement_low",
             f"need 0 <= requirement_low < requirement_high <= 1, got {self.requirement_low}, {self.requirement_high}")
        need(self.base_model in BASE_MODELS, "base_model", f"must be one of {BASE_MODELS}, got {self.base_model!r}")
        need(self.ngcf_activation in ACTIVATIONS, "ngcf_activation", f"must be one of {sorted(ACTIVATIONS)}")
        need(self.encoder_activation in ACTIVATIONS, "encoder_activation", f"must be one of {sorted(ACTIVATIONS)}")
        need(self.output_activation in ("sigmoid", "softmax"), "output_activation",
             f"must be sigmoid or softmax, got {self.output_activation!r}")
        need(self.learning_rate > 0, "learning_rate", f"must be > 0, got {self.learning_rate}")
        need(self.cl_weight >= 0, "cl_weight", f"must be >= 0, got {self.cl_weight}")
        need(self.tau > 0, "tau", f"must be > 0, got {self.tau}")
        need(self.epsilon >= 0, "epsilon", f"must be >= 0, got {self.epsilon}")
        need(self.edge_rule in ("match", "all"), "edge_rule", f"must be match or all, got {self.edge_rule!r}")
        need(self.d_z is None or self.d_z >= 1, "d_z", f"must be >= 1, got {self.d_z}")
        return self

    def check_taxonomy(self, taxonomy: SkillTaxonomy) -> None:
        if self.d_z is not None and self.d_z != taxonomy.n_atomic:
            raise ConfigError("d_z", f"config says {self.d_z} but the taxonomy has {taxonomy.n_atomic} atomic skills")

    def estimator_params(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)
               if f.init and f.name not in RUN_FIELDS}
        out["random_state"] = self.seed
        return out

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes).validate()

    # ------------------------------------------------------------------
    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            if not f.init:
                continue
            value = getattr(self, f.name)
            if value is None:
                continue
            if isinstance(value, tuple):
                text = ",".join(str(v) for v in value)
            elif isinstance(value, bool):
                text = "true" if value else "false"
            else:
                text = repr(value) if isinstance(value, float) else str(value)
            lines.append(f"{f.name} = {text}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, base: "RunConfig | None" = None) -> "RunConfig":
        values = {}
        known = {f.name: f for f in fields(cls) if f.init}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in known:
                raise ConfigError(key, "unknown field")
            values[key] = _parse_value(key, known[key].type, value)
        start = base if base is not None else cls()
        return dataclasses.replace(start, **values).validate()


def _parse_value(name: str, type_text: str, value: str):
    try:
        if type_text == "bool":
            lowered = value.lower()
            if lowered not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(value)
            return lowered in ("true", "1", "yes")
        if type_text == "int":
            return int(value)
        if type_text == "int | None":
            return None if value.lower() in ("", "none") else int(value)
        if type_text == "float":
            return float(value)
        if type_text == "tuple[int, ...]":
            return tuple(int(v) for v in value.split(",") if v.strip())
        return value
    except ValueError:
        raise ConfigError(name, f"cannot parse {value!r} as {type_text}") from None


def load_config(path: str | os.PathLike | None, base: RunConfig | None = None) -> RunConfig:
    if path is None:
        return (base or RunConfig()).validate()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    return RunConfig.from_text(text, base)
