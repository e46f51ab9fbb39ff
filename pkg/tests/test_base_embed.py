import numpy as np
import pytest

from disco import autograd as ag
from disco.autograd import Tensor
from disco.base_embed import BipartiteGraph, build_graph, embed_mf, propagate_lightgcn, propagate_ngcf
from disco.data import InteractionDataset, QMatrix, make_taxonomy


def random_graph(rng, n=5, m=6, p=0.4):
    mask = rng.random((n, m)) < p
    return BipartiteGraph(n, m, np.argwhere(mask))


def ngcf_loop(graph, C, J, layers, act):
    """Neighbour-by-neighbour NGCF message passing on plain arrays."""
    du, dv = graph.candidate_degree, graph.job_degree
    c, j = C.copy(), J.copy()
    outs_c, outs_j = [c], [j]
    for W1, W2 in layers:
        nc = np.zeros_like(c)
        nj = np.zeros_like(j)
        for u in range(graph.n_candidates):
            msg = c[u] @ W1
            for v in graph.neighbors(u):
                w = 1.0 / np.sqrt(du[u] * dv[v])
                msg = msg + w * (j[v] @ W1 + (j[v] * c[u]) @ W2)
            nc[u] = act(msg)
        for v in range(graph.n_jobs):
            msg = j[v] @ W1
            for u in graph.job_neighbors(v):
                w = 1.0 / np.sqrt(du[u] * dv[v])
                msg = msg + w * (c[u] @ W1 + (c[u] * j[v]) @ W2)
            nj[v] = act(msg)
        c, j = nc, nj
        outs_c.append(c)
        outs_j.append(j)
    return np.concatenate(outs_c, axis=1), np.concatenate(outs_j, axis=1)


def lrelu(x):
    return np.where(x > 0, x, 0.2 * x)


def test_ngcf_matches_neighbour_loop(rng):
    g = random_graph(rng)
    C, J = rng.normal(size=(5, 4)), rng.normal(size=(6, 4))
    layers = [(rng.normal(size=(4, 4)), rng.normal(size=(4, 4))) for _ in range(2)]
    got_c, got_j = propagate_ngcf(g.normalized_adjacency(), Tensor(C), Tensor(J),
                                  [(Tensor(a), Tensor(b)) for a, b in layers])
    want_c, want_j = ngcf_loop(g, C, J, layers, lrelu)
    np.testing.assert_allclose(got_c.data, want_c, atol=1e-12)
    np.testing.assert_allclose(got_j.data, want_j, atol=1e-12)
    assert got_c.shape == (5, 12)


def test_ngcf_single_edge_hand_case():
    g = BipartiteGraph(1, 1, np.array([[0, 0]]))
    c, j = np.array([[1.0, 2.0]]), np.array([[0.5, -1.0]])
    out_c, _ = propagate_ngcf(g.normalized_adjacency(), Tensor(c), Tensor(j),
                              [(Tensor(np.eye(2)), Tensor(np.zeros((2, 2))))], activation="identity")
    np.testing.assert_allclose(out_c.data[0, 2:], c[0] + j[0])


def test_ngcf_isolated_node_and_edgeless_identity(rng):
    g = BipartiteGraph(2, 2, np.zeros((0, 2), dtype=np.int64))
    C, J = rng.normal(size=(2, 3)), rng.normal(size=(2, 3))
    W1 = rng.normal(size=(3, 3))
    out_c, _ = propagate_ngcf(g.normalized_adjacency(), Tensor(C), Tensor(J),
                              [(Tensor(W1), Tensor(np.zeros((3, 3))))], activation="tanh")
    np.testing.assert_allclose(out_c.data[:, 3:], np.tanh(C @ W1), atol=1e-14)
    ident_c, _ = propagate_ngcf(g.normalized_adjacency(), Tensor(C), Tensor(J),
                                [(Tensor(np.eye(3)), Tensor(np.zeros((3, 3))))], activation="identity")
    np.testing.assert_allclose(ident_c.data[:, 3:], C)


def test_lightgcn_single_edge_and_zero_layers():
    g = BipartiteGraph(1, 1, np.array([[0, 0]]))
    c, j = np.array([[1.0, 0.0]]), np.array([[0.0, 3.0]])
    out_c, out_j = propagate_lightgcn(g.normalized_adjacency(), Tensor(c), Tensor(j), 1)
    np.testing.assert_allclose(out_c.data, (c + j) / 2)
    z_c, _ = propagate_lightgcn(g.normalized_adjacency(), Tensor(c), Tensor(j), 0)
    np.testing.assert_array_equal(z_c.data, c)


def test_lightgcn_linear_and_isolated(rng):
    g = BipartiteGraph(3, 3, np.array([[0, 0], [1, 0], [0, 1]]))
    C, J = rng.normal(size=(3, 4)), rng.normal(size=(3, 4))
    a, _ = propagate_lightgcn(g.normalized_adjacency(), Tensor(C), Tensor(J), 2)
    b, _ = propagate_lightgcn(g.normalized_adjacency(), Tensor(2.5 * C), Tensor(2.5 * J), 2)
    np.testing.assert_allclose(b.data, 2.5 * a.data, atol=1e-10)
    # candidate 2 has no edges: layers 1..K are zero, the mean keeps 1/(K+1) of itself
    np.testing.assert_allclose(a.data[2], C[2] / 3)


def test_symmetric_toy_graph_gives_symmetric_outputs(rng):
    g = BipartiteGraph(2, 2, np.array([[0, 0], [0, 1], [1, 0]]))
    E = rng.normal(size=(2, 3))
    W = [(Tensor(rng.normal(size=(3, 3))), Tensor(rng.normal(size=(3, 3))))]
    c, j = propagate_ngcf(g.normalized_adjacency(), Tensor(E), Tensor(E), W)
    np.testing.assert_allclose(c.data, j.data, atol=1e-12)


def test_normalized_adjacency_values():
    g = BipartiteGraph(2, 2, np.array([[0, 0], [0, 1], [1, 1]]))
    A = g.normalized_adjacency()
    np.testing.assert_allclose(A, [[1 / np.sqrt(2), 1 / 2], [0, 1 / np.sqrt(2)]])
    assert (g.candidate_degree == [len(g.neighbors(u)) for u in range(2)]).all()


def _dataset(behaviors, split):
    tax = make_taxonomy((1, 2))
    return InteractionDataset([0, 0, 1, 1], [0, 1, 0, 1], behaviors, 2, 2, tax,
                              QMatrix.from_raw(tax, np.zeros((2, 3))), split=split)


def test_build_graph_rules():
    ds = _dataset([3, 1, 0, 3], ["train", "train", "train", "test"])
    match = build_graph(ds)
    assert match.edges.tolist() == [[0, 0]]  # the test-split Match is excluded
    everything = build_graph(ds, edge_rule="all")
    assert len(everything.edges) == 3 >= len(match.edges)
    with pytest.raises(ValueError):
        build_graph(ds, edge_rule="some")


def test_mf_lookup_touches_only_selected_rows():
    table = Tensor(np.arange(8.0).reshape(4, 2), requires_grad=True)
    a, b = embed_mf(table, [1]), embed_mf(table, [1])
    np.testing.assert_array_equal(a.data, b.data)
    ag.backward(ag.sum(embed_mf(table, [1, 3])))
    assert table.grad[[0, 2]].sum() == 0 and table.grad[[1, 3]].sum() == 4
    one = Tensor(np.ones((1, 2)), requires_grad=True)
    assert embed_mf(one, [0]).shape == (1, 2)
    with pytest.raises(IndexError):
        embed_mf(table, [4])
