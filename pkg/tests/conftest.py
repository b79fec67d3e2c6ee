"""Shared construction helpers for the test suite."""

from __future__ import annotations

import numpy as np

from poseconf.coverage import ImageDims, InlierSet
from poseconf.dataset_io import PoseRecord
from poseconf.pose_metrics import Pose


def rotation_about(axis, angle_deg: float) -> np.ndarray:
    """Rodrigues rotation matrix, built independently of library code."""
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    theta = np.radians(angle_deg)
    k = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return np.eye(3) + np.sin(theta) * k + (1.0 - np.cos(theta)) * (k @ k)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform random rotation from a normalized quaternion."""
    q = rng.normal(size=4)
    q = q / np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def pose_at(center, rotation: np.ndarray | None = None) -> Pose:
    """Pose whose camera center sits exactly at `center` (t = -R c)."""
    rot = np.eye(3) if rotation is None else np.asarray(rotation, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    return Pose(rot, -rot @ center)


def make_record(
    query_id: str = "q0",
    candidate_rank: int = 1,
    query_points=((4, 4), (10, 7), (20, 18)),
    db_points=((5, 5), (12, 9), (25, 20)),
    query_dims: tuple[int, int] = (32, 24),
    db_dims: tuple[int, int] = (32, 24),
    num_correspondences: int | None = None,
    estimated_pose: Pose | None = None,
    ground_truth_pose: Pose | None = None,
    pv_score: float | None = None,
) -> PoseRecord:
    """A valid record with just enough structure for unit tests."""
    query_inliers = InlierSet(np.asarray(query_points, dtype=np.float64), ImageDims(*query_dims))
    db_inliers = InlierSet(np.asarray(db_points, dtype=np.float64), ImageDims(*db_dims))
    if num_correspondences is None:
        num_correspondences = max(len(query_inliers), 3)
    return PoseRecord(
        query_id=query_id,
        candidate_rank=candidate_rank,
        query_inliers=query_inliers,
        db_inliers=db_inliers,
        num_correspondences=num_correspondences,
        estimated_pose=estimated_pose or pose_at((0.0, 0.0, 0.0)),
        ground_truth_pose=ground_truth_pose,
        pv_score=pv_score,
    )
