"""Record schema, JSON Lines I/O, dataset construction, and a seeded
synthetic generator.

A record couples one query image with one retrieved database candidate:
the matched inlier keypoints on both images, the pose estimated from
them, and (when available) the ground-truth pose used for labeling.
Files are newline-delimited JSON, one record per line; unknown keys are
ignored on input so augmented files (e.g. with a `confidence` field)
remain parseable.
"""

from __future__ import annotations

import json
import math
import os
import random
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .coverage import ImageDims, InlierSet
from .errors import (
    InvalidConfig,
    InvariantViolation,
    MissingGroundTruth,
    SchemaError,
    TooFewQueries,
)
from .pose_metrics import ErrorThreshold, Pose, is_correct, pose_error

MIN_CORRESPONDENCES = 3  # below this, estimation is trivially failed


@dataclass(frozen=True, eq=False)
class PoseRecord:
    """One (query image, database candidate) pair with its estimated pose."""

    query_id: str
    candidate_rank: int
    query_inliers: InlierSet
    db_inliers: InlierSet
    num_correspondences: int
    estimated_pose: Pose
    ground_truth_pose: Pose | None = None
    pv_score: float | None = None

    def __post_init__(self):
        if not isinstance(self.query_id, str):
            raise InvariantViolation("query_id must be a string")
        if self.candidate_rank < 1:
            raise InvariantViolation(
                f"candidate_rank must be >= 1, got {self.candidate_rank}"
            )
        if self.num_correspondences < 0:
            raise InvariantViolation(
                f"num_correspondences must be >= 0, got {self.num_correspondences}"
            )
        if len(self.query_inliers) != len(self.db_inliers):
            raise InvariantViolation(
                "inliers are matched pairs: query has "
                f"{len(self.query_inliers)}, db has {len(self.db_inliers)}"
            )
        if len(self.query_inliers) > self.num_correspondences:
            raise InvariantViolation(
                f"{len(self.query_inliers)} inliers exceed "
                f"{self.num_correspondences} correspondences"
            )
        if self.pv_score is not None and not math.isfinite(self.pv_score):
            raise InvariantViolation(f"pv_score must be finite, got {self.pv_score}")

    @property
    def query_dims(self) -> ImageDims:
        return self.query_inliers.dims

    @property
    def db_dims(self) -> ImageDims:
        return self.db_inliers.dims

    @property
    def inlier_count(self) -> int:
        return len(self.query_inliers)

    def has_ground_truth(self) -> bool:
        return self.ground_truth_pose is not None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PoseRecord):
            return NotImplemented
        return (
            self.query_id == other.query_id
            and self.candidate_rank == other.candidate_rank
            and self.query_inliers == other.query_inliers
            and self.db_inliers == other.db_inliers
            and self.num_correspondences == other.num_correspondences
            and self.estimated_pose == other.estimated_pose
            and self.ground_truth_pose == other.ground_truth_pose
            and self.pv_score == other.pv_score
        )


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.75
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.train_fraction < 1.0):
            raise InvalidConfig(
                f"train_fraction must lie in (0, 1), got {self.train_fraction}"
            )


# ---------------------------------------------------------------------------
# parsing


def _require(obj: Mapping, field: str, line: int):
    if field not in obj:
        raise SchemaError(line=line, field=field, message="missing required field")
    return obj[field]


def _as_int(value, field: str, line: int, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(line=line, field=field, message=f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise SchemaError(line=line, field=field, message=f"must be >= {minimum}, got {value}")
    return value


def _as_real(value, field: str, line: int) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(line=line, field=field, message=f"expected a number, got {value!r}")
    out = float(value)
    if not math.isfinite(out):
        raise SchemaError(line=line, field=field, message=f"must be finite, got {value!r}")
    return out


def _as_real_list(value, n: int, field: str, line: int) -> list[float]:
    if not isinstance(value, list) or len(value) != n:
        raise SchemaError(line=line, field=field, message=f"expected a list of {n} numbers")
    return [_as_real(v, field, line) for v in value]


def _as_point_list(value, field: str, line: int) -> np.ndarray:
    if not isinstance(value, list):
        raise SchemaError(line=line, field=field, message="expected a list of [x, y] pairs")
    points = np.zeros((len(value), 2), dtype=np.int64)
    for i, pair in enumerate(value):
        if not isinstance(pair, list) or len(pair) != 2:
            raise SchemaError(
                line=line, field=field, message=f"entry {i} is not an [x, y] pair"
            )
        for j in range(2):
            v = pair[j]
            if isinstance(v, bool) or not isinstance(v, int):
                raise SchemaError(
                    line=line,
                    field=field,
                    message=f"entry {i} coordinate {j} is not an integer: {v!r}",
                )
            points[i, j] = v
    return points


def _pose_from_lists(rotation: list[float], translation: list[float], line: int) -> Pose:
    matrix = np.asarray(rotation, dtype=np.float64).reshape(3, 3)  # row-major
    try:
        return Pose(matrix, np.asarray(translation, dtype=np.float64))
    except InvariantViolation as exc:
        raise InvariantViolation(exc.description, line=line) from None


def parse_record(obj: Mapping, line: int = 0) -> PoseRecord:
    """Build one validated record from a decoded JSON object."""
    if not isinstance(obj, Mapping):
        raise SchemaError(line=line, message="record must be a JSON object")
    query_id = _require(obj, "query_id", line)
    if not isinstance(query_id, str):
        raise SchemaError(line=line, field="query_id", message="expected a string")
    candidate_rank = _as_int(_require(obj, "candidate_rank", line), "candidate_rank", line, 1)
    query_dims = ImageDims(
        _as_int(_require(obj, "query_width", line), "query_width", line, 1),
        _as_int(_require(obj, "query_height", line), "query_height", line, 1),
    )
    db_dims = ImageDims(
        _as_int(_require(obj, "db_width", line), "db_width", line, 1),
        _as_int(_require(obj, "db_height", line), "db_height", line, 1),
    )
    num_correspondences = _as_int(
        _require(obj, "num_correspondences", line), "num_correspondences", line, 0
    )
    rotation = _as_real_list(_require(obj, "rotation", line), 9, "rotation", line)
    translation = _as_real_list(_require(obj, "translation", line), 3, "translation", line)

    has_gt_rot = "gt_rotation" in obj
    has_gt_trans = "gt_translation" in obj
    if has_gt_rot != has_gt_trans:
        raise SchemaError(
            line=line,
            field="gt_rotation" if has_gt_rot else "gt_translation",
            message="gt_rotation and gt_translation must be given together",
        )
    ground_truth = None
    if has_gt_rot:
        ground_truth = _pose_from_lists(
            _as_real_list(obj["gt_rotation"], 9, "gt_rotation", line),
            _as_real_list(obj["gt_translation"], 3, "gt_translation", line),
            line,
        )

    pv_score = None
    if obj.get("pv_score") is not None:
        pv_score = _as_real(obj["pv_score"], "pv_score", line)

    try:
        query_inliers = InlierSet(
            _as_point_list(_require(obj, "query_inliers", line), "query_inliers", line),
            query_dims,
        )
        db_inliers = InlierSet(
            _as_point_list(_require(obj, "db_inliers", line), "db_inliers", line),
            db_dims,
        )
        return PoseRecord(
            query_id=query_id,
            candidate_rank=candidate_rank,
            query_inliers=query_inliers,
            db_inliers=db_inliers,
            num_correspondences=num_correspondences,
            estimated_pose=_pose_from_lists(rotation, translation, line),
            ground_truth_pose=ground_truth,
            pv_score=pv_score,
        )
    except InvariantViolation as exc:
        if exc.line is None:
            raise InvariantViolation(exc.description, line=line) from None
        raise


def parse_records(lines: Iterable[str]) -> list[PoseRecord]:
    """Parse newline-delimited JSON records; blank lines are skipped.

    Any failure carries the 1-based line number it occurred on.
    """
    records = []
    for line_no, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise SchemaError(line=line_no, message=f"invalid JSON: {exc.msg}") from None
        records.append(parse_record(obj, line_no))
    return records


def read_records(path: str | os.PathLike) -> list[PoseRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_records(fh)


def serialize_record(record: PoseRecord, extra: Mapping | None = None) -> dict:
    """Record as a JSON-ready dict; optional fields omitted when absent.

    `extra` appends augmentation fields (e.g. a confidence score) after the
    schema fields.
    """
    obj = {
        "query_id": record.query_id,
        "candidate_rank": record.candidate_rank,
        "query_width": record.query_dims.width,
        "query_height": record.query_dims.height,
        "db_width": record.db_dims.width,
        "db_height": record.db_dims.height,
        "query_inliers": record.query_inliers.points.tolist(),
        "db_inliers": record.db_inliers.points.tolist(),
        "num_correspondences": record.num_correspondences,
        "rotation": [float(v) for v in record.estimated_pose.rotation.reshape(-1)],
        "translation": [float(v) for v in record.estimated_pose.translation],
    }
    gt = record.ground_truth_pose
    if gt is not None:
        obj["gt_rotation"] = [float(v) for v in gt.rotation.reshape(-1)]
        obj["gt_translation"] = [float(v) for v in gt.translation]
    if record.pv_score is not None:
        obj["pv_score"] = record.pv_score
    if extra:
        obj.update(extra)
    return obj


def record_lines(
    records: Sequence[PoseRecord], extras: Sequence[Mapping] | None = None
) -> Iterator[str]:
    for i, record in enumerate(records):
        extra = extras[i] if extras is not None else None
        yield json.dumps(serialize_record(record, extra), separators=(",", ":"))


def write_records(
    records: Sequence[PoseRecord],
    path: str | os.PathLike,
    extras: Sequence[Mapping] | None = None,
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in record_lines(records, extras):
            fh.write(line + "\n")


# ---------------------------------------------------------------------------
# dataset construction


def build_extended(records: Sequence[PoseRecord]) -> list[PoseRecord]:
    """Keep every candidate pair that has enough correspondences to pose.

    Pairs with fewer than MIN_CORRESPONDENCES matches cannot support an
    estimate and are dropped; order is preserved and the operation is
    idempotent.
    """
    return [r for r in records if r.num_correspondences >= MIN_CORRESPONDENCES]


def grouped_split(
    records: Sequence[PoseRecord], spec: SplitSpec = SplitSpec()
) -> tuple[list[PoseRecord], list[PoseRecord]]:
    """Split into train/test keeping each query's candidates together.

    Query ids are shuffled with a seeded Mersenne-Twister generator
    (random.Random) over the sorted id list, then assigned greedily to the
    train side until it holds at least train_fraction of the records.  If
    that greedy walk swallows every query, the last one added is moved back
    so the test side is never empty.
    """
    counts = Counter(r.query_id for r in records)
    ids = sorted(counts)
    if len(ids) < 2:
        raise TooFewQueries(f"grouped split needs >= 2 distinct queries, got {len(ids)}")
    rng = random.Random(spec.seed)
    rng.shuffle(ids)
    target = spec.train_fraction * len(records)
    train_ids: set[str] = set()
    accumulated = 0
    last_added = None
    for qid in ids:
        train_ids.add(qid)
        accumulated += counts[qid]
        last_added = qid
        if accumulated >= target:
            break
    if len(train_ids) == len(ids):
        train_ids.remove(last_added)
    train = [r for r in records if r.query_id in train_ids]
    test = [r for r in records if r.query_id not in train_ids]
    return train, test


def label_records(
    records: Sequence[PoseRecord], threshold: ErrorThreshold = ErrorThreshold()
) -> list[tuple[PoseRecord, int]]:
    """Pair each record with 1 if its pose is correct at the threshold, else 0."""
    labeled = []
    for record in records:
        if record.ground_truth_pose is None:
            raise MissingGroundTruth(record.query_id, record.candidate_rank)
        error = pose_error(record.estimated_pose, record.ground_truth_pose)
        labeled.append((record, int(is_correct(error, threshold))))
    return labeled


def labels_only(labeled: Sequence[tuple[PoseRecord, int]]) -> np.ndarray:
    return np.asarray([label for _, label in labeled], dtype=np.float64)


def group_by_query(records: Sequence[PoseRecord]) -> dict[str, list[PoseRecord]]:
    """Group records by query_id, preserving first-appearance order."""
    groups: dict[str, list[PoseRecord]] = {}
    for record in records:
        groups.setdefault(record.query_id, []).append(record)
    return groups


# ---------------------------------------------------------------------------
# synthetic data


@dataclass(frozen=True)
class SynthConfig:
    """Generator settings for the synthetic benchmark.

    Candidates fall into several regimes.  Correct poses come well-spread
    (dense), well-spread but few (sparse), or — rarely — clustered (hard:
    correct despite poor coverage).  Incorrect poses are either ordinary
    low-count failures (plain) or high-count/low-coverage decoys sized by
    adversarial_fraction, which exist so inlier count alone cannot
    separate the classes.  failed_query_fraction of the queries get no
    correct candidate at all, so best-candidate evaluation sees both
    labels.  junk_fraction emits under-correspondence pairs that the
    extended-dataset filter drops.
    """

    queries: int = 200
    candidates_per_query: int = 10
    width: int = 320
    height: int = 240
    correct_fraction: float = 0.45
    adversarial_fraction: float = 0.35
    sparse_correct_fraction: float = 0.25
    hard_correct_fraction: float = 0.1
    failed_query_fraction: float = 0.2
    junk_fraction: float = 0.0
    include_pv: bool = False
    threshold: ErrorThreshold = ErrorThreshold()

    def __post_init__(self):
        if self.queries < 0:
            raise InvalidConfig(f"queries must be >= 0, got {self.queries}")
        if self.candidates_per_query < 1:
            raise InvalidConfig(
                f"candidates_per_query must be >= 1, got {self.candidates_per_query}"
            )
        if self.width < 16 or self.height < 16:
            raise InvalidConfig(
                f"image dims must be >= 16x16, got {self.width}x{self.height}"
            )
        for name in (
            "correct_fraction",
            "adversarial_fraction",
            "sparse_correct_fraction",
            "hard_correct_fraction",
            "failed_query_fraction",
            "junk_fraction",
        ):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise InvalidConfig(f"{name} must lie in [0, 1], got {value}")
        if self.sparse_correct_fraction + self.hard_correct_fraction > 1.0:
            raise InvalidConfig(
                "sparse_correct_fraction + hard_correct_fraction exceeds 1"
            )


def _random_unit(rng: np.random.Generator, n: int = 3) -> np.ndarray:
    while True:
        v = rng.normal(size=n)
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            return v / norm


def _random_rotation(rng: np.random.Generator) -> np.ndarray:
    # uniform over SO(3) via a normalized quaternion
    w, x, y, z = _random_unit(rng, 4)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def _axis_angle(axis: np.ndarray, angle_rad: float) -> np.ndarray:
    k = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return np.eye(3) + math.sin(angle_rad) * k + (1.0 - math.cos(angle_rad)) * (k @ k)


def _pose_pair(
    rng: np.random.Generator,
    translation_error_m: float,
    rotation_error_deg: float,
) -> tuple[Pose, Pose]:
    """Ground-truth pose plus an estimate at exactly the requested errors."""
    r_gt = _random_rotation(rng)
    center = rng.uniform(0.0, 50.0, size=3)
    gt = Pose(r_gt, -r_gt @ center)
    center_est = center + translation_error_m * _random_unit(rng)
    r_est = _axis_angle(_random_unit(rng), math.radians(rotation_error_deg)) @ r_gt
    return Pose(r_est, -r_est @ center_est), gt


def _spread_points(
    rng: np.random.Generator, dims: ImageDims, count: int, spread: float
) -> np.ndarray:
    """Uniform points inside a randomly placed box covering `spread` of each axis."""
    if count == 0:
        return np.zeros((0, 2), dtype=np.int64)
    box_w = max(1, int(round(spread * dims.width)))
    box_h = max(1, int(round(spread * dims.height)))
    x0 = int(rng.integers(0, dims.width - box_w + 1))
    y0 = int(rng.integers(0, dims.height - box_h + 1))
    xs = rng.integers(x0, x0 + box_w, size=count)
    ys = rng.integers(y0, y0 + box_h, size=count)
    return np.stack([xs, ys], axis=1)


def _cluster_points(
    rng: np.random.Generator,
    dims: ImageDims,
    count: int,
    n_clusters: int,
    std_fraction: float,
) -> np.ndarray:
    """Points in a few tight blobs — large counts, tiny footprint."""
    if count == 0:
        return np.zeros((0, 2), dtype=np.int64)
    std = std_fraction * min(dims.width, dims.height)
    centers = np.stack(
        [
            rng.uniform(0, dims.width, size=n_clusters),
            rng.uniform(0, dims.height, size=n_clusters),
        ],
        axis=1,
    )
    assignment = rng.integers(0, n_clusters, size=count)
    pts = centers[assignment] + rng.normal(0.0, std, size=(count, 2))
    pts[:, 0] = np.clip(pts[:, 0], 0, dims.width - 1)
    pts[:, 1] = np.clip(pts[:, 1], 0, dims.height - 1)
    return np.floor(pts).astype(np.int64)


def _clip_int(rng: np.random.Generator, mean: float, std: float, lo: int, hi: int) -> int:
    return int(np.clip(round(rng.normal(mean, std)), lo, hi))


def _make_record(
    rng: np.random.Generator,
    query_id: str,
    rank: int,
    tag: str,
    qdims: ImageDims,
    ddims: ImageDims,
    config: SynthConfig,
) -> PoseRecord:
    max_t = config.threshold.max_translation_m
    max_r = config.threshold.max_rotation_deg
    pv = None

    if tag in ("dense", "sparse", "hard"):
        quality = rng.uniform(0.2, 1.0) if tag == "dense" else rng.uniform(0.55, 1.0)
        e_t = ((1.0 - quality) * 0.85 + 0.03) * max_t
        e_r = ((1.0 - quality) * 0.6 + 0.03) * max_r
        if tag == "dense":
            count = _clip_int(rng, 250 + 950 * quality, 90, 60, 2400)
            spread_q = float(
                np.clip(0.35 + 0.6 * quality + rng.uniform(-0.08, 0.08), 0.15, 1.0)
            )
        else:
            count = _clip_int(rng, 170, 50, 60, 320)
            spread_q = rng.uniform(0.75, 1.0)
        if tag == "hard":
            # correct pose whose inliers nonetheless sit in tight blobs;
            # count is the only feature that vouches for these
            count = _clip_int(rng, 650, 150, 300, 1100)
            k = int(rng.integers(1, 3))
            q_pts = _cluster_points(rng, qdims, count, k, rng.uniform(0.02, 0.05))
            d_pts = _cluster_points(rng, ddims, count, k, rng.uniform(0.02, 0.05))
        else:
            spread_d = float(np.clip(spread_q + rng.uniform(-0.12, 0.12), 0.15, 1.0))
            q_pts = _spread_points(rng, qdims, count, spread_q)
            d_pts = _spread_points(rng, ddims, count, spread_d)
        if config.include_pv:
            pv = float(np.clip(rng.normal(0.62 + 0.25 * quality, 0.10), 0.0, 1.0))
    elif tag == "decoy":
        e_t = rng.uniform(2.05, 40.0) * max_t
        e_r = rng.uniform(1.5, 17.0) * max_r
        count = _clip_int(rng, 900, 300, 250, 2500)
        k = int(rng.integers(1, 4))
        # half the decoys collapse on both images; the rest only on one
        # side, so each coverage feature has failures only it can flag
        sided = rng.random()
        if sided < 0.3:
            q_pts = _spread_points(rng, qdims, count, rng.uniform(0.25, 0.55))
            d_pts = _cluster_points(rng, ddims, count, k, rng.uniform(0.012, 0.025))
        elif sided < 0.6:
            q_pts = _cluster_points(rng, qdims, count, k, rng.uniform(0.012, 0.025))
            d_pts = _spread_points(rng, ddims, count, rng.uniform(0.25, 0.55))
        else:
            q_pts = _cluster_points(rng, qdims, count, k, rng.uniform(0.012, 0.025))
            d_pts = _cluster_points(rng, ddims, count, k, rng.uniform(0.012, 0.025))
        if config.include_pv:
            pv = float(np.clip(rng.normal(0.45, 0.12), 0.0, 1.0))
    elif tag == "plain":
        e_t = rng.uniform(2.05, 40.0) * max_t
        e_r = rng.uniform(1.5, 17.0) * max_r
        count = _clip_int(rng, 130, 70, 3, 380)
        k = int(rng.integers(1, 4))
        q_pts = _cluster_points(rng, qdims, count, k, rng.uniform(0.02, 0.06))
        d_pts = _cluster_points(rng, ddims, count, k, rng.uniform(0.02, 0.06))
        if config.include_pv:
            pv = float(np.clip(rng.normal(0.30, 0.12), 0.0, 1.0))
    else:  # junk: too few correspondences to estimate anything
        e_t = rng.uniform(2.05, 40.0) * max_t
        e_r = rng.uniform(1.5, 17.0) * max_r
        count = int(rng.integers(0, MIN_CORRESPONDENCES))
        q_pts = _spread_points(rng, qdims, count, 1.0)
        d_pts = _spread_points(rng, ddims, count, 1.0)
        if config.include_pv:
            pv = float(np.clip(rng.normal(0.2, 0.1), 0.0, 1.0))

    e_r = min(e_r, 179.0)
    estimated, ground_truth = _pose_pair(rng, e_t, e_r)
    if tag == "junk":
        num_correspondences = count
    else:
        num_correspondences = count + int(rng.integers(0, max(2, count // 3)))
    return PoseRecord(
        query_id=query_id,
        candidate_rank=rank,
        query_inliers=InlierSet(q_pts, qdims),
        db_inliers=InlierSet(d_pts, ddims),
        num_correspondences=num_correspondences,
        estimated_pose=estimated,
        ground_truth_pose=ground_truth,
        pv_score=pv,
    )


def synth_generate(config: SynthConfig, seed: int = 0) -> list[PoseRecord]:
    """Deterministic synthetic benchmark records (see SynthConfig).

    A failed-query subset gets only incorrect candidates; the remaining
    records draw from a fraction-sized regime pool that is shuffled so the
    regimes spread across queries.
    """
    total = config.queries * config.candidates_per_query
    if total == 0:
        return []
    rng = np.random.default_rng(seed)
    n_failed = int(round(config.failed_query_fraction * config.queries))
    failed_queries = set(rng.permutation(config.queries)[:n_failed].tolist())

    n_normal = (config.queries - n_failed) * config.candidates_per_query
    n_junk = int(round(config.junk_fraction * n_normal))
    n_correct = int(round(config.correct_fraction * (n_normal - n_junk)))
    n_incorrect = n_normal - n_junk - n_correct
    n_sparse = int(round(config.sparse_correct_fraction * n_correct))
    n_hard = int(round(config.hard_correct_fraction * n_correct))
    n_decoy = int(round(config.adversarial_fraction * n_incorrect))
    pool = (
        ["junk"] * n_junk
        + ["sparse"] * n_sparse
        + ["hard"] * n_hard
        + ["dense"] * (n_correct - n_sparse - n_hard)
        + ["decoy"] * n_decoy
        + ["plain"] * (n_incorrect - n_decoy)
    )
    order = rng.permutation(n_normal)
    pool = [pool[i] for i in order]

    qdims = ImageDims(config.width, config.height)
    ddims = ImageDims(config.width, config.height)
    records = []
    next_pooled = 0
    for qi in range(config.queries):
        query_id = f"q{qi:04d}"
        for rank in range(1, config.candidates_per_query + 1):
            if qi in failed_queries:
                tag = "decoy" if rng.random() < config.adversarial_fraction else "plain"
            else:
                tag = pool[next_pooled]
                next_pooled += 1
            records.append(_make_record(rng, query_id, rank, tag, qdims, ddims, config))
    return records
