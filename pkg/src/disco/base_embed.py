"""Base embedding models: MF lookup, NGCF and LightGCN propagation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autograd as ag
from .autograd import Tensor
from .data import Behavior, InteractionDataset

__all__ = [
    "ACTIVATIONS",
    "BipartiteGraph",
    "build_graph",
    "embed_mf",
    "propagate_lightgcn",
    "propagate_ngcf",
]

ACTIVATIONS = {
    "leaky_relu": lambda x: ag.leaky_relu(x, 0.2),
    "tanh": ag.tanh,
    "sigmoid": ag.sigmoid,
    "identity": lambda x: x,
}


@dataclass(frozen=True)
class BipartiteGraph:
    """Undirected candidate-job graph with symmetric degree normalisation."""

    n_candidates: int
    n_jobs: int
    edges: np.ndarray  # (E, 2) unique (candidate, job) pairs

    @property
    def candidate_degree(self) -> np.ndarray:
        return np.bincount(self.edges[:, 0], minlength=self.n_candidates)

    @property
    def job_degree(self) -> np.ndarray:
        return np.bincount(self.edges[:, 1], minlength=self.n_jobs)

    def neighbors(self, candidate: int) -> np.ndarray:
        return self.edges[self.edges[:, 0] == candidate, 1]

    def job_neighbors(self, job: int) -> np.ndarray:
        return self.edges[self.edges[:, 1] == job, 0]

    def normalized_adjacency(self) -> np.ndarray:
        """Dense ``(N, M)`` matrix with ``1 / sqrt(|N_u| |N_v|)`` on every edge."""
        a = np.zeros((self.n_candidates, self.n_jobs))
        if len(self.edges):
            du = self.candidate_degree[self.edges[:, 0]]
            dv = self.job_degree[self.edges[:, 1]]
            a[self.edges[:, 0], self.edges[:, 1]] = 1.0 / np.sqrt(du * dv)
        return a


def build_graph(dataset: InteractionDataset, edge_rule: str = "match", splits=("train",)) -> BipartiteGraph:
    """Edges from the given splits: Match records only, or every behavior (``edge_rule="all"``)."""
    if edge_rule not in ("match", "all"):
        raise ValueError(f"edge_rule must be 'match' or 'all', got {edge_rule!r}")
    sel = np.ones(len(dataset), dtype=bool)
    if dataset.split is not None and splits is not None:
        sel &= np.isin(dataset.split, list(splits))
    if edge_rule == "match":
        sel &= dataset.behaviors == Behavior.MATCH
    pairs = np.column_stack([dataset.candidates[sel], dataset.jobs[sel]])
    edges = np.unique(pairs, axis=0) if len(pairs) else np.zeros((0, 2), dtype=np.int64)
    return BipartiteGraph(dataset.n_candidates, dataset.n_jobs, edges.astype(np.int64))


def embed_mf(table: Tensor, ids) -> Tensor:
    """Rows of the embedding table; MF applies no propagation."""
    return ag.gather(table, ids)


def propagate_ngcf(adjacency: np.ndarray, C: Tensor, J: Tensor, layers: list[tuple[Tensor, Tensor]],
                   activation: str = "leaky_relu") -> tuple[Tensor, Tensor]:
    """NGCF message passing; returns the concatenation of layers 0..K on each side.

    Per layer, with ``A`` the normalised adjacency and row-vector embeddings::

        c' = act(c W1 + (A j) W1 + ((A j) * c) W2)
        j' = act(j W1 + (A^T c) W1 + ((A^T c) * j) W2)

    which is the neighbour sum over ``W1 j_v + W2 (j_v * c_u)`` written in
    matrix form.
    """
    act = ACTIVATIONS[activation]
    A = Tensor(adjacency)
    At = Tensor(adjacency.T)
    c, j = C, J
    c_out, j_out = [c], [j]
    for W1, W2 in layers:
        agg_c = ag.matmul(A, j)
        agg_j = ag.matmul(At, c)
        c_next = act(ag.matmul(ag.add(c, agg_c), W1) + ag.matmul(ag.multiply(agg_c, c), W2))
        j_next = act(ag.matmul(ag.add(j, agg_j), W1) + ag.matmul(ag.multiply(agg_j, j), W2))
        c, j = c_next, j_next
        c_out.append(c)
        j_out.append(j)
    return ag.concat(c_out, axis=1), ag.concat(j_out, axis=1)


def propagate_lightgcn(adjacency: np.ndarray, C: Tensor, J: Tensor, n_layers: int) -> tuple[Tensor, Tensor]:
    """LightGCN: parameter-free normalised propagation, averaged over layers 0..K."""
    A = Tensor(adjacency)
    At = Tensor(adjacency.T)
    c, j = C, J
    c_sum, j_sum = c, j
    for _ in range(n_layers):
        c, j = ag.matmul(A, j), ag.matmul(At, c)
        c_sum = ag.add(c_sum, c)
        j_sum = ag.add(j_sum, j)
    k = 1.0 / (n_layers + 1)
    return ag.scale(c_sum, k), ag.scale(j_sum, k)
