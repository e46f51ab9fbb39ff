"""scikit-learn style estimator wrapping the DISCO network and its training loop."""

from __future__ import annotations

import logging
import os
from typing import Callable

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import autograd as ag
from .association import ContrastiveConfig
from .base_embed import BipartiteGraph
from .data import Behavior, QMatrix, SkillTaxonomy
from .diagnosis import match_score
from .metrics import lists_from_records, report_from_lists, score_lists
from .model import DiscoNetwork, NetworkConfig
from .optim import Adam

__all__ = ["DiscoRecommender", "check_pairs"]

log = logging.getLogger(__name__)

HISTORY_COLUMNS = ("epoch", "main_loss", "cl_loss", "val_auc", "val_hr5", "val_ndcg5")


def check_pairs(X, n_candidates: int | None = None, n_jobs: int | None = None) -> np.ndarray:
    """Validate an ``(n, 2)`` array of nonnegative (candidate_id, job_id) integers."""
    X = check_array(X, dtype=None, ensure_2d=True)
    if X.shape[1] != 2:
        raise ValueError(f"X must have 2 columns (candidate_id, job_id), got {X.shape[1]}")
    if not np.issubdtype(X.dtype, np.integer):
        as_int = X.astype(np.int64)
        if not np.array_equal(as_int, X):
            raise ValueError("X must contain integer ids")
        X = as_int
    X = X.astype(np.int64)
    if (X < 0).any():
        raise ValueError("ids must be nonnegative")
    if n_candidates is not None and X[:, 0].max(initial=-1) >= n_candidates:
        raise IndexError(f"candidate id out of range [0, {n_candidates})")
    if n_jobs is not None and X[:, 1].max(initial=-1) >= n_jobs:
        raise IndexError(f"job id out of range [0, {n_jobs})")
    return X


def _check_labels(y, n: int) -> np.ndarray:
    y = np.asarray(y)
    if y.shape != (n,):
        raise ValueError(f"y must have shape ({n},), got {y.shape}")
    if not np.isin(y, [b.value for b in Behavior]).all():
        raise ValueError("behavior labels must be integers 0..3")
    return y.astype(np.int64)


class DiscoRecommender(ClassifierMixin, BaseEstimator):
    """Hierarchical disentangled cognitive-diagnosis recommender.

    ``fit`` takes ``X`` as ``(n, 2)`` (candidate_id, job_id) pairs and ``y``
    as behavior codes 0..3 (Browse, Click, Chat, Match). The skill taxonomy
    and Q-matrix are structural inputs and are passed to the constructor.

    Parameters
    ----------
    taxonomy, qmatrix : SkillTaxonomy, QMatrix
        Skill hierarchy and job tags; ``qmatrix`` fixes the number of jobs.
    n_candidates : int, optional
        Size of the candidate table; inferred from ``X`` when omitted.
    base_model : {"mf", "ngcf", "lightgcn"}
    d, d_h : int
        Embedding width and hidden width.
    n_layers : int
        Propagation depth of the graph base models.
    output_activation : {"sigmoid", "softmax"}
    cl_weight, tau, epsilon : float
        Contrastive loss weight, temperature and noise radius.
    disable_hd, disable_sa, disable_cl, disable_id : bool
        Ablations: single granularity level, no level attention, no
        contrastive loss, plain prediction layer in place of the diagnosis
        interaction.
    attention_cross_side : bool
        Candidate attention takes its values from the paired job's prototypes.
    double_noise : bool
        Both contrastive views are noised instead of clean vs noisy.
    edge_rule : {"match", "all"}
        Which training records become graph edges.
    freeze_base : bool
        Keep embedding tables and propagation weights at their initial values.
    """

    def __init__(self, taxonomy: SkillTaxonomy | None = None, qmatrix: QMatrix | None = None,
                 n_candidates: int | None = None, base_model: str = "ngcf", d: int = 32, d_h: int = 32,
                 n_layers: int = 2, ngcf_activation: str = "leaky_relu", encoder_activation: str = "tanh",
                 output_activation: str = "softmax", learning_rate: float = 1e-3, cl_weight: float = 1e-3,
                 tau: float = 0.2, epsilon: float = 0.1, batch_size: int = 256, epochs: int = 100,
                 patience: int = 10, disable_hd: bool = False, disable_sa: bool = False,
                 disable_cl: bool = False, disable_id: bool = False, attention_cross_side: bool = False,
                 double_noise: bool = False, edge_rule: str = "match", freeze_base: bool = False,
                 random_state: int = 0, verbose: int = 0):
        self.taxonomy = taxonomy
        self.qmatrix = qmatrix
        self.n_candidates = n_candidates
        self.base_model = base_model
        self.d = d
        self.d_h = d_h
        self.n_layers = n_layers
        self.ngcf_activation = ngcf_activation
        self.encoder_activation = encoder_activation
        self.output_activation = output_activation
        self.learning_rate = learning_rate
        self.cl_weight = cl_weight
        self.tau = tau
        self.epsilon = epsilon
        self.batch_size = batch_size
        self.epochs = epochs
        self.patience = patience
        self.disable_hd = disable_hd
        self.disable_sa = disable_sa
        self.disable_cl = disable_cl
        self.disable_id = disable_id
        self.attention_cross_side = attention_cross_side
        self.double_noise = double_noise
        self.edge_rule = edge_rule
        self.freeze_base = freeze_base
        self.random_state = random_state
        self.verbose = verbose

    # ------------------------------------------------------------------
    # setup
    # ------------------------------------------------------------------
    def _network_config(self) -> NetworkConfig:
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1 or self.epochs < 0 or self.patience < 1:
            raise ValueError("batch_size and patience must be >= 1 and epochs >= 0")
        if self.edge_rule not in ("match", "all"):
            raise ValueError(f"edge_rule must be 'match' or 'all', got {self.edge_rule!r}")
        if self.output_activation not in ("sigmoid", "softmax"):
            raise ValueError(f"output_activation must be 'sigmoid' or 'softmax', got {self.output_activation!r}")
        return NetworkConfig(
            base_model=self.base_model, d=self.d, d_h=self.d_h, n_layers=self.n_layers,
            ngcf_activation=self.ngcf_activation, encoder_activation=self.encoder_activation,
            output_activation=self.output_activation,
            contrastive=ContrastiveConfig(self.tau, self.epsilon, self.cl_weight, self.double_noise),
            disable_sa=self.disable_sa, disable_cl=self.disable_cl, disable_id=self.disable_id,
            attention_cross_side=self.attention_cross_side,
        )

    def _level_masks(self) -> np.ndarray:
        if self.qmatrix is None or self.taxonomy is None:
            raise ValueError("taxonomy and qmatrix are required")
        masks = self.qmatrix.level_masks
        if masks.shape[1:] != (self.taxonomy.n_levels, self.taxonomy.n_atomic):
            raise ValueError(
                f"Q-matrix masks have shape {masks.shape[1:]} but the taxonomy has "
                f"{self.taxonomy.n_levels} levels and d_z={self.taxonomy.n_atomic}"
            )
        # a single granularity: the atomic level only
        return masks[:, -1:, :] if self.disable_hd else masks

    def _streams(self) -> list[np.random.Generator]:
        seqs = np.random.SeedSequence(self.random_state).spawn(4)
        return [np.random.default_rng(s) for s in seqs]

    def _build(self, edges: np.ndarray, n_candidates: int) -> None:
        config = self._network_config()
        masks = self._level_masks()
        n_jobs = masks.shape[0]
        self.n_candidates_ = int(n_candidates)
        self.n_jobs_ = int(n_jobs)
        self.graph_ = BipartiteGraph(self.n_candidates_, self.n_jobs_, np.asarray(edges, dtype=np.int64).reshape(-1, 2))
        init_rng, self._shuffle_rng, self._noise_rng, self._eval_rng = self._streams()
        self.network_ = DiscoNetwork(config, self.n_candidates_, self.n_jobs_, masks,
                                     self.graph_.normalized_adjacency(), init_rng)
        self.classes_ = np.arange(4)

    def _trainable(self) -> dict[str, ag.Tensor]:
        params = self.network_.named_parameters()
        if self.freeze_base:
            params = {k: v for k, v in params.items() if not k.startswith(("emb.", "ngcf."))}
        return params

    # ------------------------------------------------------------------
    # training
    # ------------------------------------------------------------------
    def fit(self, X, y, eval_set: tuple | None = None, known_positives: dict[int, set[int]] | None = None,
            callback: Callable[[dict], None] | None = None):
        """Minimise main + weighted contrastive loss with Adam; early-stop on validation AUC.

        ``eval_set=(X_val, y_val)`` enables per-epoch ranking validation;
        its negatives avoid ``known_positives[c]`` (defaults to the Matches
        seen in ``X``/``eval_set``). The best-validation weights are kept.
        """
        n_jobs = None if self.qmatrix is None else self.qmatrix.n_jobs
        X = check_pairs(X, self.n_candidates, n_jobs)
        y = _check_labels(y, len(X))
        if len(X) == 0:
            raise ValueError("cannot fit on zero records")
        n_candidates = self.n_candidates if self.n_candidates is not None else int(X[:, 0].max()) + 1
        sel = np.ones(len(X), dtype=bool) if self.edge_rule == "all" else y == Behavior.MATCH
        edges = np.unique(X[sel], axis=0) if sel.any() else np.zeros((0, 2), dtype=np.int64)
        self._build(edges, n_candidates)

        val_lists = None
        if eval_set is not None:
            Xv = check_pairs(eval_set[0], self.n_candidates_, self.n_jobs_)
            yv = _check_labels(eval_set[1], len(Xv))
            if known_positives is None:
                known_positives = {}
                for c, j in np.concatenate([X[y == 3], Xv[yv == 3]]):
                    known_positives.setdefault(int(c), set()).add(int(j))
            val_lists, _ = lists_from_records(Xv, yv, known_positives, self.n_jobs_, self._eval_rng)
            if not val_lists:
                val_lists = None

        opt = Adam(self._trainable(), lr=self.learning_rate)
        self.history_: list[dict] = []
        best_auc, best_state, stale = -np.inf, None, 0
        self.best_epoch_ = 0
        self.best_score_ = float("nan")
        use_cl = not self.disable_cl and self.cl_weight > 0
        for epoch in range(1, self.epochs + 1):
            order = self._shuffle_rng.permutation(len(X))
            main_sum = cl_sum = 0.0
            for s in range(0, len(X), self.batch_size):
                b = order[s:s + self.batch_size]
                res = self.network_.forward(X[b], y[b], noise_rng=self._noise_rng)
                ag.backward(res.total)
                opt.step()
                main_sum += res.main.item() * len(b)
                if res.cl is not None:
                    cl_sum += res.cl.item() * len(b)
            row = {"epoch": epoch, "main_loss": main_sum / len(X)}
            if use_cl:
                row["cl_loss"] = cl_sum / len(X)
            if val_lists is not None:
                score_lists(val_lists, self.decision_function)
                rep = report_from_lists(val_lists, ks=(5,))
                row.update(val_auc=rep["AUC"], val_hr5=rep["HR@5"], val_ndcg5=rep["NDCG@5"])
            self.history_.append(row)
            if callback is not None:
                callback(row)
            if self.verbose:
                log.info("epoch %d %s", epoch, {k: round(v, 5) for k, v in row.items() if k != "epoch"})
            if val_lists is not None:
                if row["val_auc"] > best_auc:
                    best_auc, stale = row["val_auc"], 0
                    best_state = self.network_.state_dict()
                    self.best_epoch_ = epoch
                    self.best_score_ = float(best_auc)
                else:
                    stale += 1
                    if stale >= self.patience:
                        break
        if best_state is not None:
            self.network_.load_state_dict(best_state)
        else:
            self.best_epoch_ = len(self.history_)
        self.n_epochs_ = len(self.history_)
        return self

    # ------------------------------------------------------------------
    # inference
    # ------------------------------------------------------------------
    def _check_X(self, X) -> np.ndarray:
        check_is_fitted(self, "network_")
        return check_pairs(X, self.n_candidates_, self.n_jobs_)

    def predict_proba(self, X) -> np.ndarray:
        """Per-class outputs ``(n, 4)``. Under the sigmoid head rows need not sum to 1."""
        return self.network_.predict(self._check_X(X))

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "network_")
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]

    def decision_function(self, X) -> np.ndarray:
        """Match-class score used for AUC and ranking."""
        return match_score(self.predict_proba(X))

    def profiles(self, side: str, ids) -> np.ndarray:
        """``sigmoid`` of the attention-enhanced prototypes, shape ``(len(ids), L, d_z)``."""
        check_is_fitted(self, "network_")
        if side not in ("candidate", "job"):
            raise ValueError(f"side must be 'candidate' or 'job', got {side!r}")
        ids = np.asarray(ids, dtype=np.int64).reshape(-1)
        limit = self.n_candidates_ if side == "candidate" else self.n_jobs_
        bad = ids[(ids < 0) | (ids >= limit)]
        if len(bad):
            raise KeyError(f"unknown {side} id {int(bad[0])}")
        with ag.no_grad():
            z = self.network_.enhanced_prototypes("c" if side == "candidate" else "j", ids)
            return ag.sigmoid(z).data

    # ------------------------------------------------------------------
    # persistence helpers (see disco.checkpoint)
    # ------------------------------------------------------------------
    def _restore(self, state: dict[str, np.ndarray], edges: np.ndarray, n_candidates: int) -> None:
        self._build(edges, n_candidates)
        self.network_.load_state_dict(state)

    def save(self, path: str | os.PathLike, **extra) -> None:
        from .checkpoint import save_checkpoint

        save_checkpoint(self, path, **extra)
