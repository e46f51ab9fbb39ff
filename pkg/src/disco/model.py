"""The full DISCO network: base embeddings -> prototypes -> attention -> diagnosis."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autograd as ag
from .association import AttentionParams, ContrastiveConfig, combined_cl_loss, level_attention, \
    level_contrastive_loss
from .autograd import Tensor
from .base_embed import ACTIVATIONS, embed_mf, propagate_lightgcn, propagate_ngcf
from .diagnosis import DiagnosisHead, diagnose_level, main_loss, total_loss
from .disentangle import LevelEncoder, encode_prototypes, make_encoders, make_projectors, project_levels
from .optim import xavier_init

__all__ = ["BASE_MODELS", "DiscoNetwork", "ForwardResult", "NetworkConfig"]

BASE_MODELS = ("mf", "ngcf", "lightgcn")


@dataclass(frozen=True)
class NetworkConfig:
    base_model: str = "ngcf"
    d: int = 32
    d_h: int = 32
    n_layers: int = 2
    ngcf_activation: str = "leaky_relu"
    encoder_activation: str = "tanh"
    output_activation: str = "softmax"
    contrastive: ContrastiveConfig = field(default_factory=ContrastiveConfig)
    disable_sa: bool = False
    disable_cl: bool = False
    disable_id: bool = False
    attention_cross_side: bool = False

    def __post_init__(self):
        if self.base_model not in BASE_MODELS:
            raise ValueError(f"base_model must be one of {BASE_MODELS}, got {self.base_model!r}")
        if self.ngcf_activation not in ACTIVATIONS:
            raise ValueError(f"ngcf_activation must be one of {sorted(ACTIVATIONS)}")
        for name in ("d", "d_h"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.n_layers < 0 or (self.base_model == "ngcf" and self.n_layers < 1):
            raise ValueError("n_layers must be >= 1 for ngcf and >= 0 for lightgcn")

    @property
    def base_width(self) -> int:
        if self.base_model == "ngcf":
            return (self.n_layers + 1) * self.d
        return self.d


@dataclass
class ForwardResult:
    y: Tensor
    main: Tensor | None = None
    cl: Tensor | None = None
    total: Tensor | None = None


class DiscoNetwork:
    """Parameters plus the forward computation for a batch of (candidate, job) pairs.

    ``level_masks`` is the ``(M, L, d_z)`` per-level atomic mask tensor; its
    ``L`` decides how many levels are disentangled.
    """

    def __init__(self, config: NetworkConfig, n_candidates: int, n_jobs: int,
                 level_masks: np.ndarray, adjacency: np.ndarray | None, rng: np.random.Generator):
        self.config = config
        self.n_candidates = n_candidates
        self.n_jobs = n_jobs
        self.level_masks = np.asarray(level_masks, dtype=np.float64)
        if self.level_masks.shape[0] != n_jobs:
            raise ValueError(f"level masks cover {self.level_masks.shape[0]} jobs, expected {n_jobs}")
        self.n_levels = self.level_masks.shape[1]
        self.d_z = self.level_masks.shape[2]
        if adjacency is None:
            adjacency = np.zeros((n_candidates, n_jobs))
        self.adjacency = np.asarray(adjacency, dtype=np.float64)
        c = config
        L, d_z = self.n_levels, self.d_z

        self.C = xavier_init(n_candidates, c.d, rng, name="emb.C")
        self.J = xavier_init(n_jobs, c.d, rng, name="emb.J")
        self.ngcf_layers: list[tuple[Tensor, Tensor]] = []
        if c.base_model == "ngcf":
            self.ngcf_layers = [(xavier_init(c.d, c.d, rng), xavier_init(c.d, c.d, rng))
                                for _ in range(c.n_layers)]
        self.proj_c = make_projectors(L, c.base_width, c.d_h, rng, "c")
        self.proj_j = make_projectors(L, c.base_width, c.d_h, rng, "j")
        self.enc_c: list[LevelEncoder] = make_encoders(L, c.d_h, d_z, rng, c.encoder_activation)
        self.enc_j: list[LevelEncoder] = make_encoders(L, c.d_h, d_z, rng, c.encoder_activation)
        self.att_c = self.att_j = None
        if not c.disable_sa:
            self.att_c = AttentionParams.create(d_z, rng)
            self.att_j = AttentionParams.create(d_z, rng)
        head_in = (2 if c.disable_id else 1) * L * d_z
        self.head = DiagnosisHead.create(head_in, c.d_h, rng, c.output_activation)

    # ------------------------------------------------------------------
    def named_parameters(self) -> dict[str, Tensor]:
        out = {"emb.C": self.C, "emb.J": self.J}
        for k, (W1, W2) in enumerate(self.ngcf_layers):
            out[f"ngcf.{k}.W1"] = W1
            out[f"ngcf.{k}.W2"] = W2
        for l, W in enumerate(self.proj_c):
            out[f"proj.c.{l}"] = W
        for l, W in enumerate(self.proj_j):
            out[f"proj.j.{l}"] = W
        for l, enc in enumerate(self.enc_c):
            out.update(enc.named_parameters(f"enc.c.{l}"))
        for l, enc in enumerate(self.enc_j):
            out.update(enc.named_parameters(f"enc.j.{l}"))
        if self.att_c is not None:
            out.update(self.att_c.named_parameters("att.c"))
            out.update(self.att_j.named_parameters("att.j"))
        out.update(self.head.named_parameters("head"))
        for name, t in out.items():
            t.name = name
        return out

    def state_dict(self) -> dict[str, np.ndarray]:
        return {k: v.data.copy() for k, v in self.named_parameters().items()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        params = self.named_parameters()
        missing = set(params) - set(state)
        extra = set(state) - set(params)
        if missing or extra:
            raise KeyError(f"state mismatch: missing={sorted(missing)} unexpected={sorted(extra)}")
        for k, p in params.items():
            arr = np.asarray(state[k], dtype=np.float64)
            if arr.shape != p.shape:
                raise ValueError(f"parameter {k}: shape {arr.shape} != expected {p.shape}")
            p.data = arr.copy()

    # ------------------------------------------------------------------
    def base_embeddings(self) -> tuple[Tensor, Tensor] | None:
        """Full propagated tables for graph models; ``None`` for MF (rows are looked up lazily)."""
        c = self.config
        if c.base_model == "ngcf":
            return propagate_ngcf(self.adjacency, self.C, self.J, self.ngcf_layers, c.ngcf_activation)
        if c.base_model == "lightgcn":
            return propagate_lightgcn(self.adjacency, self.C, self.J, c.n_layers)
        return None

    def _rows(self, side: str, ids: np.ndarray, base) -> Tensor:
        if base is None and self.config.base_model != "mf":
            base = self.base_embeddings()
        if base is None:
            return embed_mf(self.C if side == "c" else self.J, ids)
        return ag.gather(base[0] if side == "c" else base[1], ids)

    def raw_prototypes(self, side: str, ids, base=None) -> Tensor:
        """``(len(ids), L, d_z)`` encoder outputs before attention."""
        ids = np.asarray(ids, dtype=np.int64)
        projectors = self.proj_c if side == "c" else self.proj_j
        encoders = self.enc_c if side == "c" else self.enc_j
        hidden = project_levels(self._rows(side, ids, base), projectors)
        return encode_prototypes(hidden, encoders)

    def _enhance(self, side: str, z: Tensor, values: Tensor | None = None) -> Tensor:
        if self.config.disable_sa:
            return z
        return level_attention(z, self.att_c if side == "c" else self.att_j, values=values)

    def enhanced_prototypes(self, side: str, ids, base=None) -> Tensor:
        """Attention-enhanced prototypes of each entity in ``ids``."""
        if side == "c" and self.config.attention_cross_side and not self.config.disable_sa:
            raise ValueError("candidate prototypes depend on the paired job under attention_cross_side; "
                             "use pair_prototypes")
        return self._enhance(side, self.raw_prototypes(side, ids, base))

    def pair_prototypes(self, pairs: np.ndarray, base=None):
        """Per-pair enhanced prototypes plus the per-entity tensors the contrastive loss needs."""
        cands, jobs = pairs[:, 0], pairs[:, 1]
        uj, inv_j = np.unique(jobs, return_inverse=True)
        zj_raw = self.raw_prototypes("j", uj, base)
        zj = self._enhance("j", zj_raw)
        j_tilde = ag.gather(zj, inv_j)
        if self.config.attention_cross_side and not self.config.disable_sa:
            zc_raw = self.raw_prototypes("c", cands, base)
            c_tilde = self._enhance("c", zc_raw, values=ag.gather(zj_raw, inv_j))
            _, first = np.unique(cands, return_index=True)
            zc = ag.gather(c_tilde, first)
        else:
            uc, inv_c = np.unique(cands, return_inverse=True)
            zc = self._enhance("c", self.raw_prototypes("c", uc, base))
            c_tilde = ag.gather(zc, inv_c)
        return c_tilde, j_tilde, zc, zj

    def _head_outputs(self, pairs: np.ndarray, base):
        c_tilde, j_tilde, zc, zj = self.pair_prototypes(pairs, base)
        B = len(pairs)
        if self.config.disable_id:
            h = ag.concat([ag.reshape(c_tilde, (B, -1)), ag.reshape(j_tilde, (B, -1))], axis=-1)
        else:
            masks = Tensor(self.level_masks[pairs[:, 1]])
            h = ag.reshape(diagnose_level(c_tilde, j_tilde, masks), (B, self.n_levels * self.d_z))
        return self.head(h), zc, zj

    def forward(self, pairs: np.ndarray, labels=None, noise_rng: np.random.Generator | None = None,
                ) -> ForwardResult:
        pairs = np.asarray(pairs, dtype=np.int64)
        y, zc, zj = self._head_outputs(pairs, self.base_embeddings())
        result = ForwardResult(y=y)
        if labels is None:
            return result
        result.main = main_loss(y, labels)
        cfg = self.config.contrastive
        if self.config.disable_cl or cfg.weight == 0:
            result.total = result.main
            return result
        rng = noise_rng if noise_rng is not None else np.random.default_rng(0)
        result.cl = combined_cl_loss(level_contrastive_loss(zc, cfg, rng), level_contrastive_loss(zj, cfg, rng))
        result.total = total_loss(result.main, result.cl, cfg.weight)
        return result

    def predict(self, pairs: np.ndarray, chunk: int = 4096) -> np.ndarray:
        """Class outputs ``(n, 4)`` without recording a graph."""
        pairs = np.asarray(pairs, dtype=np.int64)
        if not len(pairs):
            return np.zeros((0, 4))
        with ag.no_grad():
            base = self.base_embeddings()
            return np.concatenate([self._head_outputs(pairs[s:s + chunk], base)[0].data
                                   for s in range(0, len(pairs), chunk)], axis=0)
