import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from disco.data import (
    Behavior, DataFormatError, PlantedGroundTruth, QMatrix, TaxonomyError, build_level_masks,
    coverage_labels, generate_synthetic, load_dataset, load_ground_truth, load_taxonomy,
    make_taxonomy, sample_negatives, save_dataset, split_dataset, taxonomy_from_records,
)


def write(tmp_path, text, name="tax.tsv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def small_taxonomy():
    # level 1: A=0, B=1; level 2: a1=2, a2=3 under A, b1=4 under B
    return taxonomy_from_records([(0, 1, None, "A"), (1, 1, None, "B"),
                                  (2, 2, 0, "a1"), (3, 2, 0, "a2"), (4, 2, 1, "b1")])


# -- taxonomy ---------------------------------------------------------------

def test_two_level_file(tmp_path):
    tax = load_taxonomy(write(tmp_path, "# id level parent name\n0\t1\t-\tA\n1\t2\t0\ta1\n2\t2\t0\ta2\n"))
    assert tax.n_levels == 2 and tax.n_atomic == 2
    assert tax.atomic_descendants(0) == {1, 2}
    assert tax.atomic_descendants(1) == {1}


def test_single_level_file(tmp_path):
    tax = load_taxonomy(write(tmp_path, "5\t1\t-\tx\n7\t1\t-\ty\n"))
    assert tax.n_levels == 1 and tax.parent == {} and tax.n_atomic == 2


@pytest.mark.parametrize("text, needle", [
    ("0\t1\t-\tA\n1\t2\t-\ta\n", "orphan"),
    ("0\t1\t-\tA\n0\t2\t0\ta\n", "duplicate"),
    ("0\t1\t-\tA\n1\t2\t9\ta\n", "unknown parent"),
    ("0\t1\t-\tA\n1\t2\t1\ta\n", "cycle"),
    ("0\t1\t-\tA\n1\t2\t0\ta\n2\t3\t0\tz\n", "expected 2"),
    ("0\t1\t-\tA\n1\t1\t-\tB\n2\t2\t0\ta\n", "no atomic descendants"),
    ("0\t1\tA\n", "4 columns"),
])
def test_taxonomy_errors_carry_location(tmp_path, text, needle):
    with pytest.raises(TaxonomyError, match=needle) as info:
        load_taxonomy(write(tmp_path, text))
    assert str(tmp_path) in str(info.value)


def test_error_reports_line_number(tmp_path):
    with pytest.raises(TaxonomyError) as info:
        load_taxonomy(write(tmp_path, "# header\n0\t1\t-\tA\n1\t2\t-\ta\n"))
    assert info.value.line == 3


def test_make_taxonomy_shape():
    tax = make_taxonomy((3, 9, 30))
    assert [len(l) for l in tax.levels] == [3, 9, 30]
    for s in tax.levels[1] + tax.levels[2]:
        assert tax.level_of[tax.parent[s]] == tax.level_of[s] - 1
    with pytest.raises(ValueError):
        make_taxonomy((4, 2))


# -- Q-matrix ---------------------------------------------------------------

def test_level_masks_expand_coarse_tags():
    tax = small_taxonomy()
    raw = np.array([1, 0, 0, 0, 1.0])  # tags A and b1
    m = build_level_masks(tax, raw)
    np.testing.assert_array_equal(m[0], [1, 1, 0])
    np.testing.assert_array_equal(m[1], [0, 0, 1])


def test_level_masks_edge_rows():
    tax = small_taxonomy()
    assert not build_level_masks(tax, np.zeros(5)).any()
    all_atomic = np.array([0, 0, 1, 1, 1.0])
    np.testing.assert_array_equal(build_level_masks(tax, all_atomic)[-1], np.ones(3))


def test_atomic_mask_equals_raw_atomic_tags(rng):
    tax = make_taxonomy((2, 5, 12))
    raw = (rng.random((20, tax.n_skills)) < 0.3).astype(float)
    q = QMatrix.from_raw(tax, raw)
    np.testing.assert_array_equal(q.level_masks[:, -1, :], raw[:, -tax.n_atomic:])


def test_qmatrix_rejects_non_binary():
    with pytest.raises(ValueError):
        QMatrix.from_raw(small_taxonomy(), np.full((1, 5), 0.5))


# -- split and negatives ----------------------------------------------------

@pytest.mark.parametrize("n, sizes", [(100, (70, 10, 20)), (10, (7, 1, 2))])
def test_split_ratio(n, sizes):
    tax = make_taxonomy((2, 4))
    ds, _ = generate_synthetic(10, 20, tax, n / 200, np.random.default_rng(0))
    assert len(ds) == n
    ds = split_dataset(ds, np.random.default_rng(1))
    assert tuple(int((ds.split == s).sum()) for s in ("train", "valid", "test")) == sizes


def test_split_deterministic():
    tax = make_taxonomy((2, 4))
    ds, _ = generate_synthetic(10, 20, tax, 0.5, np.random.default_rng(0))
    a = split_dataset(ds, np.random.default_rng(5)).split
    b = split_dataset(ds, np.random.default_rng(5)).split
    assert (a == b).all()


def test_split_rejects_empty():
    tax = make_taxonomy((2, 4))
    ds, _ = generate_synthetic(10, 20, tax, 0.5, np.random.default_rng(0))
    empty = type(ds)([], [], [], 10, 20, tax, ds.qmatrix)
    with pytest.raises(ValueError):
        split_dataset(empty, np.random.default_rng(0))


def test_sample_negatives_forced_and_insufficient():
    negs = sample_negatives(0, {0}, 26, np.random.default_rng(0))
    assert sorted(negs.tolist()) == list(range(1, 26))
    with pytest.raises(ValueError, match="smaller count"):
        sample_negatives(0, {0, 1}, 26, np.random.default_rng(0))


@settings(max_examples=60, deadline=None)
@given(st.integers(30, 80), st.sets(st.integers(0, 29), max_size=5), st.integers(0, 10_000))
def test_sample_negatives_property(m, positives, seed):
    negs = sample_negatives(3, positives, m, np.random.default_rng(seed))
    assert len(negs) == 25 == len(set(negs.tolist()))
    assert not set(negs.tolist()) & positives
    assert ((negs >= 0) & (negs < m)).all()


# -- planted generator ------------------------------------------------------

def test_coverage_boundaries():
    req = np.ones((1, 3)) * 0.5
    truth = PlantedGroundTruth(np.array([[1.0] * 3, [0.0] * 3]), req, np.ones((1, 3)))
    cov = truth.coverage(np.array([0, 1]), np.array([0, 0]))
    np.testing.assert_array_equal(cov, [1.0, 0.0])
    assert coverage_labels(cov).tolist() == [Behavior.MATCH, Behavior.BROWSE]
    assert coverage_labels(np.array([0.75, 0.74, 0.5, 0.25, 0.24])).tolist() == [3, 2, 2, 1, 0]


def test_labels_recomputed_from_truth_match_exactly():
    tax = make_taxonomy((3, 9, 30))
    ds, truth = generate_synthetic(100, 100, tax, 1.0, np.random.default_rng(3))
    assert len(ds) == 10_000
    np.testing.assert_array_equal(coverage_labels(truth.coverage(ds.candidates, ds.jobs)), ds.behaviors)


def test_jobs_carry_one_to_three_tags_per_level():
    tax = make_taxonomy((3, 9, 30))
    ds, truth = generate_synthetic(5, 200, tax, 0.5, np.random.default_rng(4))
    per_level = ds.qmatrix.level_masks.max(axis=2)  # any tag at that level
    assert per_level.all()
    atomic_tags = truth.required.sum(axis=1)
    assert atomic_tags.min() >= 1 and atomic_tags.max() <= 3
    np.testing.assert_array_equal(truth.required, ds.qmatrix.level_masks[:, -1, :])


def test_generator_is_deterministic():
    tax = make_taxonomy((2, 6))
    a, ta = generate_synthetic(20, 30, tax, 0.3, np.random.default_rng(9))
    b, tb = generate_synthetic(20, 30, tax, 0.3, np.random.default_rng(9))
    np.testing.assert_array_equal(a.pairs, b.pairs)
    np.testing.assert_array_equal(ta.proficiency, tb.proficiency)


def test_generator_contract_errors():
    with pytest.raises(ValueError):
        generate_synthetic(1, 5, make_taxonomy((2,)), 0.5, np.random.default_rng(0))
    with pytest.raises(ValueError):
        generate_synthetic(5, 5, make_taxonomy((2,)), 0.0, np.random.default_rng(0))


# -- persistence ------------------------------------------------------------

def test_dataset_roundtrip(tmp_path):
    tax = make_taxonomy((2, 4, 8))
    ds, truth = generate_synthetic(15, 25, tax, 0.4, np.random.default_rng(2))
    ds = split_dataset(ds, np.random.default_rng(3))
    save_dataset(ds, tmp_path, truth)
    back = load_dataset(tmp_path)
    np.testing.assert_array_equal(back.pairs, ds.pairs)
    np.testing.assert_array_equal(back.behaviors, ds.behaviors)
    assert (back.split == ds.split).all()
    np.testing.assert_array_equal(back.qmatrix.raw, ds.qmatrix.raw)
    assert back.taxonomy == ds.taxonomy
    t2 = load_ground_truth(tmp_path, tax.n_atomic)
    np.testing.assert_array_equal(t2.proficiency, truth.proficiency)
    np.testing.assert_array_equal(t2.requirement, truth.requirement)


def test_bad_interactions_line_reported(tmp_path):
    tax = make_taxonomy((2, 4))
    ds, _ = generate_synthetic(5, 5, tax, 0.5, np.random.default_rng(0))
    save_dataset(ds, tmp_path)
    with open(tmp_path / "interactions.tsv", "a") as fh:
        fh.write("1\t2\t7\n")
    with pytest.raises(DataFormatError, match="behavior") as info:
        load_dataset(tmp_path)
    assert info.value.line is not None


def test_match_sets_and_counts():
    tax = make_taxonomy((2, 4))
    ds, _ = generate_synthetic(10, 10, tax, 0.8, np.random.default_rng(0))
    counts = ds.behavior_counts()
    assert sum(counts.values()) == len(ds)
    ms = ds.match_sets()
    assert sum(len(v) for v in ms.values()) == counts["Match"]
