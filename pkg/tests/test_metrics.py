import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from disco.data import make_taxonomy, generate_synthetic, split_dataset
from disco.metrics import (
    MetricReport, RankedList, UndefinedMetricError, build_ranked_lists, compute_auc, compute_hr_ndcg, evaluate,
    positive_rank,
)


def brute_auc(scores, labels):
    pos = [s for s, l in zip(scores, labels) if l]
    neg = [s for s, l in zip(scores, labels) if not l]
    total = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in pos for n in neg)
    return total / (len(pos) * len(neg))


def test_auc_examples():
    assert compute_auc([0.9, 0.8, 0.7, 0.1], [1, 0, 1, 0]) == 0.75
    assert compute_auc([0.5] * 6, [1, 0] * 3) == 0.5
    assert compute_auc([3, 4, 1, 2], [1, 1, 0, 0]) == 1.0
    with pytest.raises(UndefinedMetricError):
        compute_auc([0.1, 0.2], [1, 1])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.booleans()), min_size=2, max_size=40)
       .filter(lambda xs: 0 < sum(l for _, l in xs) < len(xs)))
def test_auc_equals_brute_force_with_ties(pairs):
    scores = [s / 3 for s, _ in pairs]
    labels = [l for _, l in pairs]
    assert compute_auc(scores, labels) == brute_auc(scores, labels)


@pytest.mark.parametrize("rank, hr, ndcg", [(1, 1, 1.0), (3, 1, 0.5), (7, 0, 0.0)])
def test_hr_ndcg_examples(rank, hr, ndcg):
    assert compute_hr_ndcg(rank, 5) == (hr, ndcg)


def test_hr_ndcg_monotone_and_bounded():
    vals = [compute_hr_ndcg(r, 10) for r in range(1, 27)]
    assert all(0 <= g <= 1 and h in (0, 1) for h, g in vals)
    assert all(a[1] >= b[1] and a[0] >= b[0] for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        compute_hr_ndcg(1, 0)


def test_ties_break_toward_smaller_job_id():
    negs = np.array([2, 9])
    assert positive_rank(5, 0.5, negs, np.array([0.5, 0.5])) == 2
    assert positive_rank(1, 0.5, negs, np.array([0.5, 0.5])) == 1
    rl = RankedList(0, 5, negs, np.array([0.5, 0.9, 0.1]))
    assert rl.rank == 2


@pytest.fixture(scope="module")
def small():
    tax = make_taxonomy((2, 4, 10))
    ds, truth = generate_synthetic(40, 80, tax, 0.3, np.random.default_rng(0), requirement_range=(0.3, 1.0))
    return split_dataset(ds, np.random.default_rng(1)), truth


def test_lists_have_one_positive_and_clean_negatives(small):
    ds, _ = small
    lists, skipped = build_ranked_lists(ds, "test", np.random.default_rng(0))
    matches = ds.match_sets()
    assert skipped == 0 and len(lists) == int(((ds.split == "test") & (ds.behaviors == 3)).sum())
    for rl in lists:
        assert len(rl.negatives) == 25 == len(set(rl.negatives.tolist()))
        assert not set(rl.negatives.tolist()) & matches[rl.candidate]


def test_random_scores_hit_uniform_baseline():
    tax = make_taxonomy((2, 4))
    ds, _ = generate_synthetic(300, 400, tax, 0.3, np.random.default_rng(5))
    ds = split_dataset(ds, np.random.default_rng(6))
    rep = evaluate(lambda p: np.random.default_rng(7).random(len(p)), ds, "test", rng=np.random.default_rng(8))
    assert rep.n_lists >= 2000
    assert abs(rep["HR@5"] - 5 / 26) <= 0.03


def test_oracle_scores_reach_full_hr10(small):
    ds, truth = small
    rep = evaluate(lambda p: truth.coverage(p[:, 0], p[:, 1]), ds, "test", rng=np.random.default_rng(0))
    assert rep["HR@10"] == 1.0


def test_report_text_and_determinism(small, tmp_path):
    ds, truth = small

    def score(p):
        return truth.coverage(p[:, 0], p[:, 1]) + 1e-3 * p[:, 1]

    a = evaluate(score, ds, rng=np.random.default_rng(3))
    b = evaluate(score, ds, rng=np.random.default_rng(3))
    assert a.to_text() == b.to_text()
    names = [line.split("=")[0] for line in a.to_text().splitlines()]
    assert {"AUC", "HR@5", "HR@10", "NDCG@5", "NDCG@10"} <= set(names)
    a.write(tmp_path / "m.txt", tmp_path / "lists.tsv")
    assert (tmp_path / "lists.tsv").read_text().count("\n") == a.n_lists + 1


def test_skip_when_too_few_jobs():
    tax = make_taxonomy((2,))
    ds, _ = generate_synthetic(5, 20, tax, 0.9, np.random.default_rng(0))
    ds = split_dataset(ds, np.random.default_rng(0))
    rep = evaluate(lambda p: np.zeros(len(p)), ds)
    assert rep.n_lists == 0 and rep.skipped > 0
    assert isinstance(rep, MetricReport) and np.isnan(rep["AUC"])
