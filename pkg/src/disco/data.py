"""Skill taxonomy, Q-matrix, interaction records and the planted-signal generator.

On-disk formats (UTF-8, tab separated, ``#`` starts a comment line):

* ``taxonomy.tsv``: ``skill_id  level  parent_id  name``; ``parent_id`` is
  ``-`` for level-1 skills.
* ``qmatrix.tsv``: ``job_id  skill_id``.
* ``interactions.tsv``: ``candidate_id  job_id  behavior  [split]``.
* ``meta.tsv``: ``key  value`` lines holding ``n_candidates`` and ``n_jobs``.
* ``proficiency.tsv`` / ``requirement.tsv``: ground truth, one row per entity
  with ``d_z`` values.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Behavior",
    "DataFormatError",
    "InteractionDataset",
    "PlantedGroundTruth",
    "QMatrix",
    "SkillTaxonomy",
    "TaxonomyError",
    "build_level_masks",
    "coverage_labels",
    "generate_synthetic",
    "load_dataset",
    "load_taxonomy",
    "make_taxonomy",
    "sample_negatives",
    "save_dataset",
    "split_dataset",
]

SPLITS = ("train", "valid", "test")


class Behavior(IntEnum):
    BROWSE = 0
    CLICK = 1
    CHAT = 2
    MATCH = 3


class DataFormatError(ValueError):
    """A data file failed to parse; carries the file and line number."""

    def __init__(self, path, line: int | None, message: str):
        self.path = str(path)
        self.line = line
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {message}")


class TaxonomyError(DataFormatError):
    pass


# ----------------------------------------------------------------------------
# taxonomy
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class SkillTaxonomy:
    """An L-level skill forest.

    Skills are addressed by their external ids. ``levels[l]`` lists the ids of
    level ``l + 1`` in ascending order; position in ``levels[-1]`` is the
    atomic (prototype) dimension of a skill.
    """

    levels: tuple[tuple[int, ...], ...]
    parent: dict[int, int]
    names: dict[int, str]
    level_of: dict[int, int] = field(init=False, repr=False)
    atomic_index: dict[int, int] = field(init=False, repr=False)
    _descendants: dict[int, frozenset[int]] = field(init=False, repr=False)

    def __post_init__(self):
        level_of = {s: l for l, ids in enumerate(self.levels, start=1) for s in ids}
        object.__setattr__(self, "level_of", level_of)
        object.__setattr__(self, "atomic_index", {s: i for i, s in enumerate(self.levels[-1])})
        desc: dict[int, set[int]] = {s: {s} for s in self.levels[-1]}
        for l in range(len(self.levels) - 1, 0, -1):
            for s in self.levels[l - 1]:
                desc[s] = set()
            for child in self.levels[l]:
                desc[self.parent[child]] |= desc[child]
        object.__setattr__(self, "_descendants", {k: frozenset(v) for k, v in desc.items()})

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    @property
    def n_atomic(self) -> int:
        return len(self.levels[-1])

    @property
    def n_skills(self) -> int:
        return sum(len(ids) for ids in self.levels)

    @property
    def skill_ids(self) -> list[int]:
        return [s for ids in self.levels for s in ids]

    def atomic_descendants(self, skill: int) -> frozenset[int]:
        return self._descendants[skill]

    def descendant_matrix(self, level: int) -> np.ndarray:
        """Binary ``(|S_level|, d_z)`` matrix: row = skill, column = atomic descendant."""
        ids = self.levels[level - 1]
        out = np.zeros((len(ids), self.n_atomic))
        for r, s in enumerate(ids):
            for a in self._descendants[s]:
                out[r, self.atomic_index[a]] = 1.0
        return out

    def atomic_names(self) -> list[str]:
        return [self.names[s] for s in self.levels[-1]]

    def collapse(self) -> "SkillTaxonomy":
        """Single-level taxonomy over the atomic skills."""
        atomic = self.levels[-1]
        return SkillTaxonomy(levels=(atomic,), parent={}, names={s: self.names[s] for s in atomic})


def _validated_taxonomy(rows: Sequence[tuple[int, int, int | None, str, int | None]], path) -> SkillTaxonomy:
    by_id: dict[int, tuple[int, int | None, str, int | None]] = {}
    for sid, level, parent, name, line in rows:
        if sid in by_id:
            raise TaxonomyError(path, line, f"duplicate skill id {sid}")
        by_id[sid] = (level, parent, name, line)
    if not by_id:
        raise TaxonomyError(path, None, "taxonomy is empty")
    n_levels = max(v[0] for v in by_id.values())
    levels: list[list[int]] = [[] for _ in range(n_levels)]
    parent_map: dict[int, int] = {}
    for sid, (level, parent, name, line) in by_id.items():
        if level < 1:
            raise TaxonomyError(path, line, f"skill {sid}: level must be >= 1, got {level}")
        if level == 1:
            if parent is not None:
                raise TaxonomyError(path, line, f"skill {sid}: level-1 skill cannot have a parent")
        else:
            if parent is None:
                raise TaxonomyError(path, line, f"skill {sid}: orphan at level {level} (no parent)")
            if parent not in by_id:
                raise TaxonomyError(path, line, f"skill {sid}: unknown parent {parent}")
            if parent == sid:
                raise TaxonomyError(path, line, f"skill {sid}: cycle (is its own parent)")
            plevel = by_id[parent][0]
            if plevel != level - 1:
                raise TaxonomyError(
                    path, line,
                    f"skill {sid}: parent {parent} is at level {plevel}, expected {level - 1}",
                )
            parent_map[sid] = parent
        levels[level - 1].append(sid)
    for l, ids in enumerate(levels, start=1):
        if not ids:
            raise TaxonomyError(path, None, f"level {l} has no skills")
    has_child = set(parent_map.values())
    for l in range(n_levels - 1):
        for sid in levels[l]:
            if sid not in has_child:
                raise TaxonomyError(
                    path, by_id[sid][3],
                    f"skill {sid}: level-{l + 1} skill has no atomic descendants",
                )
    return SkillTaxonomy(
        levels=tuple(tuple(sorted(ids)) for ids in levels),
        parent=parent_map,
        names={sid: v[2] for sid, v in by_id.items()},
    )


def _data_lines(path: Path) -> Iterable[tuple[int, list[str]]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, line.split("\t")


def _parse_id(path, lineno: int, text: str, what: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise DataFormatError(path, lineno, f"{what} must be an integer, got {text!r}") from None
    if value < 0:
        raise DataFormatError(path, lineno, f"{what} must be nonnegative, got {value}")
    return value


def load_taxonomy(path: str | os.PathLike) -> SkillTaxonomy:
    path = Path(path)
    rows = []
    for lineno, cols in _data_lines(path):
        if len(cols) != 4:
            raise TaxonomyError(path, lineno, f"expected 4 columns, got {len(cols)}")
        sid = _parse_id(path, lineno, cols[0], "skill id")
        level = _parse_id(path, lineno, cols[1], "level")
        ptxt = cols[2].strip()
        parent = None if ptxt in ("-", "", "null", "None") else _parse_id(path, lineno, ptxt, "parent id")
        rows.append((sid, level, parent, cols[3], lineno))
    return _validated_taxonomy(rows, path)


def taxonomy_from_records(records: Iterable[tuple[int, int, int | None, str]]) -> SkillTaxonomy:
    return _validated_taxonomy([(*r, None) for r in records], "<records>")


def save_taxonomy(taxonomy: SkillTaxonomy, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# skill_id\tlevel\tparent_id\tname\n")
        for l, ids in enumerate(taxonomy.levels, start=1):
            for s in ids:
                p = taxonomy.parent.get(s)
                fh.write(f"{s}\t{l}\t{'-' if p is None else p}\t{taxonomy.names[s]}\n")


def make_taxonomy(skills_per_level: Sequence[int]) -> SkillTaxonomy:
    """Balanced forest with the given level sizes; children are dealt to parents round-robin."""
    sizes = [int(n) for n in skills_per_level]
    if not sizes or any(n < 1 for n in sizes):
        raise ValueError(f"every level needs at least one skill, got {sizes}")
    for a, b in zip(sizes, sizes[1:]):
        if b < a:
            raise ValueError(f"level sizes must be nondecreasing so every skill has a descendant, got {sizes}")
    records = []
    offset = 0
    prev: list[int] = []
    for l, n in enumerate(sizes, start=1):
        ids = list(range(offset, offset + n))
        for k, sid in enumerate(ids):
            parent = prev[k % len(prev)] if prev else None
            records.append((sid, l, parent, f"L{l}_S{k}"))
        prev = ids
        offset += n
    return taxonomy_from_records(records)


# ----------------------------------------------------------------------------
# Q-matrix
# ----------------------------------------------------------------------------


def build_level_masks(taxonomy: SkillTaxonomy, raw_row: np.ndarray) -> np.ndarray:
    """Per-level atomic masks for one job's raw Q row (ordered as ``taxonomy.skill_ids``).

    Returns an ``(L, d_z)`` binary array: entry ``(l, s)`` is 1 iff a tagged
    level-``l`` skill is an ancestor-or-self of atomic skill ``s``.
    """
    raw_row = np.asarray(raw_row, dtype=np.float64)
    if raw_row.shape != (taxonomy.n_skills,):
        raise ValueError(f"raw Q row must have length {taxonomy.n_skills}, got shape {raw_row.shape}")
    masks = np.zeros((taxonomy.n_levels, taxonomy.n_atomic))
    offset = 0
    for l in range(1, taxonomy.n_levels + 1):
        n = len(taxonomy.levels[l - 1])
        tags = raw_row[offset:offset + n]
        masks[l - 1] = np.minimum(1.0, tags @ taxonomy.descendant_matrix(l))
        offset += n
    return masks


@dataclass(frozen=True)
class QMatrix:
    """Binary job-by-skill tags with their per-level atomic expansions.

    ``raw`` columns follow ``taxonomy.skill_ids``; ``level_masks`` has shape
    ``(M, L, d_z)``.
    """

    raw: np.ndarray
    level_masks: np.ndarray

    @classmethod
    def from_raw(cls, taxonomy: SkillTaxonomy, raw: np.ndarray) -> "QMatrix":
        raw = np.asarray(raw, dtype=np.float64)
        if raw.ndim != 2 or raw.shape[1] != taxonomy.n_skills:
            raise ValueError(f"Q-matrix needs {taxonomy.n_skills} columns, got shape {raw.shape}")
        if not np.isin(raw, (0.0, 1.0)).all():
            raise ValueError("Q-matrix entries must be 0 or 1")
        masks = np.stack([build_level_masks(taxonomy, row) for row in raw]) if len(raw) else \
            np.zeros((0, taxonomy.n_levels, taxonomy.n_atomic))
        return cls(raw=raw, level_masks=masks)

    @classmethod
    def from_pairs(cls, taxonomy: SkillTaxonomy, pairs: Iterable[tuple[int, int]], n_jobs: int) -> "QMatrix":
        col = {s: i for i, s in enumerate(taxonomy.skill_ids)}
        raw = np.zeros((n_jobs, taxonomy.n_skills))
        for job, skill in pairs:
            raw[job, col[skill]] = 1.0
        return cls.from_raw(taxonomy, raw)

    @property
    def n_jobs(self) -> int:
        return self.raw.shape[0]

    def pairs(self, taxonomy: SkillTaxonomy) -> list[tuple[int, int]]:
        ids = taxonomy.skill_ids
        return [(int(j), ids[k]) for j, k in zip(*np.nonzero(self.raw))]


# ----------------------------------------------------------------------------
# interactions
# ----------------------------------------------------------------------------


@dataclass
class InteractionDataset:
    candidates: np.ndarray
    jobs: np.ndarray
    behaviors: np.ndarray
    n_candidates: int
    n_jobs: int
    taxonomy: SkillTaxonomy
    qmatrix: QMatrix
    split: np.ndarray | None = None

    def __post_init__(self):
        self.candidates = np.asarray(self.candidates, dtype=np.int64)
        self.jobs = np.asarray(self.jobs, dtype=np.int64)
        self.behaviors = np.asarray(self.behaviors, dtype=np.int64)
        n = len(self.candidates)
        if len(self.jobs) != n or len(self.behaviors) != n:
            raise ValueError("candidates, jobs and behaviors must have equal length")
        if n:
            if self.candidates.min() < 0 or self.candidates.max() >= self.n_candidates:
                raise ValueError(f"candidate ids must lie in [0, {self.n_candidates})")
            if self.jobs.min() < 0 or self.jobs.max() >= self.n_jobs:
                raise ValueError(f"job ids must lie in [0, {self.n_jobs})")
            if not np.isin(self.behaviors, [b.value for b in Behavior]).all():
                raise ValueError("behavior codes must be 0..3")
        if self.qmatrix.n_jobs != self.n_jobs:
            raise ValueError(f"Q-matrix has {self.qmatrix.n_jobs} rows but dataset has {self.n_jobs} jobs")
        if self.split is not None:
            self.split = np.asarray(self.split, dtype=object)
            if len(self.split) != n or not np.isin(self.split, SPLITS).all():
                raise ValueError(f"split must assign one of {SPLITS} to every record")

    def __len__(self) -> int:
        return len(self.candidates)

    @property
    def pairs(self) -> np.ndarray:
        return np.column_stack([self.candidates, self.jobs])

    def indices(self, split: str) -> np.ndarray:
        if self.split is None:
            raise ValueError("dataset has no split assignment")
        return np.flatnonzero(self.split == split)

    def subset(self, split: str) -> tuple[np.ndarray, np.ndarray]:
        """``(pairs, behaviors)`` of one split, in record order."""
        idx = self.indices(split)
        return self.pairs[idx], self.behaviors[idx]

    def match_sets(self, splits: Sequence[str] | None = None) -> dict[int, set[int]]:
        """Candidate -> jobs it matched with, over the given splits (all if None)."""
        sel = self.behaviors == Behavior.MATCH
        if splits is not None:
            sel &= np.isin(self.split, list(splits))
        out: dict[int, set[int]] = {}
        for c, j in zip(self.candidates[sel], self.jobs[sel]):
            out.setdefault(int(c), set()).add(int(j))
        return out

    def behavior_counts(self) -> dict[str, int]:
        counts = np.bincount(self.behaviors, minlength=4)
        return {b.name.title(): int(counts[b.value]) for b in Behavior}


def split_dataset(dataset: InteractionDataset, rng: np.random.Generator,
                  ratios: Sequence[float] = (7, 1, 2)) -> InteractionDataset:
    """Randomly assign records to train/valid/test in the given ratio."""
    n = len(dataset)
    if n == 0:
        raise ValueError("split_dataset: no records to split")
    if len(ratios) != 3 or any(r < 0 for r in ratios) or sum(ratios) <= 0:
        raise ValueError(f"ratios must be three nonnegative numbers, got {ratios}")
    frac = np.asarray(ratios, dtype=np.float64) / float(sum(ratios))
    n_train = int(round(n * frac[0]))
    n_valid = int(round(n * frac[1]))
    n_valid = min(n_valid, n - n_train)
    labels = np.empty(n, dtype=object)
    order = rng.permutation(n)
    labels[order[:n_train]] = "train"
    labels[order[n_train:n_train + n_valid]] = "valid"
    labels[order[n_train + n_valid:]] = "test"
    return InteractionDataset(
        dataset.candidates, dataset.jobs, dataset.behaviors, dataset.n_candidates,
        dataset.n_jobs, dataset.taxonomy, dataset.qmatrix, split=labels,
    )


def sample_negatives(candidate: int, positives: Iterable[int], n_jobs: int,
                     rng: np.random.Generator, count: int = 25) -> np.ndarray:
    """``count`` distinct jobs outside ``positives``, drawn uniformly."""
    pos = np.fromiter(set(positives), dtype=np.int64)
    pool = np.setdiff1d(np.arange(n_jobs), pos, assume_unique=True)
    if len(pool) < count:
        raise ValueError(
            f"candidate {candidate}: only {len(pool)} non-positive jobs available for "
            f"{count} negatives; use a smaller count"
        )
    return rng.choice(pool, size=count, replace=False)


# ----------------------------------------------------------------------------
# planted-signal generator
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class PlantedGroundTruth:
    proficiency: np.ndarray  # (N, d_z)
    requirement: np.ndarray  # (M, d_z)
    required: np.ndarray  # (M, d_z) binary: atomic skills a job is graded on

    def coverage(self, candidates: np.ndarray, jobs: np.ndarray) -> np.ndarray:
        req = self.required[jobs]
        ok = (self.proficiency[candidates] >= self.requirement[jobs]) * req
        return ok.sum(axis=1) / np.maximum(req.sum(axis=1), 1.0)


def coverage_labels(coverage: np.ndarray) -> np.ndarray:
    """Behavior bucket: Match >= 0.75 > Chat >= 0.5 > Click >= 0.25 > Browse."""
    coverage = np.asarray(coverage)
    return np.select(
        [coverage >= 0.75, coverage >= 0.5, coverage >= 0.25],
        [Behavior.MATCH, Behavior.CHAT, Behavior.CLICK],
        default=Behavior.BROWSE,
    ).astype(np.int64)


def generate_synthetic(n_candidates: int, n_jobs: int, taxonomy: SkillTaxonomy, density: float,
                       rng: np.random.Generator, requirement_range: tuple[float, float] = (0.0, 1.0),
                       ) -> tuple[InteractionDataset, PlantedGroundTruth]:
    """Sample interactions whose behavior is a fixed function of planted skill vectors.

    Each job tags 1-3 atomic skills plus their ancestors at every coarser
    level, so it carries 1-3 tags per level. A sampled pair's coverage is the
    share of the job's atomic tags where proficiency >= requirement, bucketed
    by :func:`coverage_labels`. ``density`` is the fraction of the N x M
    pairs that get a record (without replacement).
    """
    if n_candidates < 2 or n_jobs < 2:
        raise ValueError("need at least 2 candidates and 2 jobs")
    d_z = taxonomy.n_atomic
    if d_z == 0:
        raise ValueError("taxonomy has no atomic skills")
    if not 0 < density <= 1:
        raise ValueError(f"density must be in (0, 1], got {density}")
    lo, hi = requirement_range
    proficiency = rng.uniform(0.0, 1.0, size=(n_candidates, d_z))
    requirement = rng.uniform(lo, hi, size=(n_jobs, d_z))

    atomic = taxonomy.levels[-1]
    col = {s: i for i, s in enumerate(taxonomy.skill_ids)}
    raw = np.zeros((n_jobs, taxonomy.n_skills))
    required = np.zeros((n_jobs, d_z))
    for j in range(n_jobs):
        k = int(rng.integers(1, min(3, d_z) + 1))
        for a in rng.choice(d_z, size=k, replace=False):
            required[j, a] = 1.0
            s = atomic[a]
            raw[j, col[s]] = 1.0
            while s in taxonomy.parent:
                s = taxonomy.parent[s]
                raw[j, col[s]] = 1.0
    truth = PlantedGroundTruth(proficiency, requirement, required)

    n_pairs = n_candidates * n_jobs
    n_records = max(1, int(round(density * n_pairs)))
    flat = np.sort(rng.choice(n_pairs, size=n_records, replace=False))
    cands, jobs = np.divmod(flat, n_jobs)
    labels = coverage_labels(truth.coverage(cands, jobs))
    dataset = InteractionDataset(cands, jobs, labels, n_candidates, n_jobs, taxonomy,
                                 QMatrix.from_raw(taxonomy, raw))
    return dataset, truth


# ----------------------------------------------------------------------------
# persistence
# ----------------------------------------------------------------------------


def _write_matrix(path: Path, header: str, matrix: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {header}\n")
        for i, row in enumerate(matrix):
            fh.write(f"{i}\t" + "\t".join(repr(float(x)) for x in row) + "\n")


def _read_matrix(path: Path, n_cols: int) -> np.ndarray:
    rows = []
    for lineno, cols in _data_lines(path):
        if len(cols) != n_cols + 1:
            raise DataFormatError(path, lineno, f"expected {n_cols + 1} columns, got {len(cols)}")
        if _parse_id(path, lineno, cols[0], "row id") != len(rows):
            raise DataFormatError(path, lineno, "rows must be listed in id order")
        try:
            rows.append([float(x) for x in cols[1:]])
        except ValueError as exc:
            raise DataFormatError(path, lineno, str(exc)) from None
    return np.asarray(rows, dtype=np.float64).reshape(len(rows), n_cols)


def save_dataset(dataset: InteractionDataset, directory: str | os.PathLike,
                 truth: PlantedGroundTruth | None = None) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    save_taxonomy(dataset.taxonomy, d / "taxonomy.tsv")
    with open(d / "meta.tsv", "w", encoding="utf-8") as fh:
        fh.write(f"n_candidates\t{dataset.n_candidates}\nn_jobs\t{dataset.n_jobs}\n")
    with open(d / "qmatrix.tsv", "w", encoding="utf-8") as fh:
        fh.write("# job_id\tskill_id\n")
        for j, s in dataset.qmatrix.pairs(dataset.taxonomy):
            fh.write(f"{j}\t{s}\n")
    with open(d / "interactions.tsv", "w", encoding="utf-8") as fh:
        has_split = dataset.split is not None
        fh.write("# candidate_id\tjob_id\tbehavior" + ("\tsplit" if has_split else "") + "\n")
        for i in range(len(dataset)):
            row = f"{dataset.candidates[i]}\t{dataset.jobs[i]}\t{dataset.behaviors[i]}"
            if has_split:
                row += f"\t{dataset.split[i]}"
            fh.write(row + "\n")
    if truth is not None:
        _write_matrix(d / "proficiency.tsv", "candidate_id\tproficiency per atomic skill", truth.proficiency)
        _write_matrix(d / "requirement.tsv", "job_id\trequirement per atomic skill", truth.requirement)
        _write_matrix(d / "required.tsv", "job_id\tgraded atomic skills (0/1)", truth.required)


def load_dataset(directory: str | os.PathLike) -> InteractionDataset:
    d = Path(directory)
    taxonomy = load_taxonomy(d / "taxonomy.tsv")
    meta: dict[str, int] = {}
    for lineno, cols in _data_lines(d / "meta.tsv"):
        if len(cols) != 2:
            raise DataFormatError(d / "meta.tsv", lineno, "expected key and value")
        meta[cols[0]] = _parse_id(d / "meta.tsv", lineno, cols[1], cols[0])
    for key in ("n_candidates", "n_jobs"):
        if key not in meta:
            raise DataFormatError(d / "meta.tsv", None, f"missing {key}")
    n_jobs = meta["n_jobs"]
    qpath = d / "qmatrix.tsv"
    pairs = []
    for lineno, cols in _data_lines(qpath):
        if len(cols) != 2:
            raise DataFormatError(qpath, lineno, f"expected 2 columns, got {len(cols)}")
        job = _parse_id(qpath, lineno, cols[0], "job id")
        skill = _parse_id(qpath, lineno, cols[1], "skill id")
        if job >= n_jobs:
            raise DataFormatError(qpath, lineno, f"job id {job} out of range [0, {n_jobs})")
        if skill not in taxonomy.level_of:
            raise DataFormatError(qpath, lineno, f"unknown skill id {skill}")
        pairs.append((job, skill))
    qmatrix = QMatrix.from_pairs(taxonomy, pairs, n_jobs)

    ipath = d / "interactions.tsv"
    cands, jobs, behaviors, splits = [], [], [], []
    for lineno, cols in _data_lines(ipath):
        if len(cols) not in (3, 4):
            raise DataFormatError(ipath, lineno, f"expected 3 or 4 columns, got {len(cols)}")
        c = _parse_id(ipath, lineno, cols[0], "candidate id")
        j = _parse_id(ipath, lineno, cols[1], "job id")
        b = _parse_id(ipath, lineno, cols[2], "behavior")
        if c >= meta["n_candidates"] or j >= n_jobs:
            raise DataFormatError(ipath, lineno, "id out of range")
        if b > 3:
            raise DataFormatError(ipath, lineno, f"behavior must be 0..3, got {b}")
        if len(cols) == 4:
            if cols[3] not in SPLITS:
                raise DataFormatError(ipath, lineno, f"split must be one of {SPLITS}")
            splits.append(cols[3])
        cands.append(c)
        jobs.append(j)
        behaviors.append(b)
    if splits and len(splits) != len(cands):
        raise DataFormatError(ipath, None, "split column must be present on every line or none")
    return InteractionDataset(
        cands, jobs, behaviors, meta["n_candidates"], n_jobs, taxonomy, qmatrix,
        split=np.asarray(splits, dtype=object) if splits else None,
    )


def load_ground_truth(directory: str | os.PathLike, d_z: int) -> PlantedGroundTruth:
    d = Path(directory)
    return PlantedGroundTruth(
        proficiency=_read_matrix(d / "proficiency.tsv", d_z),
        requirement=_read_matrix(d / "requirement.tsv", d_z),
        required=_read_matrix(d / "required.tsv", d_z),
    )
