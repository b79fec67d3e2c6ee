"""Inlier coverage maps and coverage scores.

A pixel counts as covered when at least one inlier lies inside the
rectangular neighborhood centred on it, and the coverage score is the
covered fraction of the image.  The neighborhood defaults to roughly
1/15 of each image dimension, which penalizes inlier sets condensed
into a few small clusters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig, InvariantViolation

DEFAULT_NEIGHBORHOOD_FRACTION = 1.0 / 15.0


@dataclass(frozen=True)
class ImageDims:
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InvariantViolation(
                f"image dims must be >= 1, got {self.width}x{self.height}"
            )

    @property
    def pixel_count(self) -> int:
        return self.width * self.height


@dataclass(frozen=True)
class CoverageParams:
    neighborhood_fraction: float = DEFAULT_NEIGHBORHOOD_FRACTION
    min_half_extent: int = 1

    def __post_init__(self):
        if not 0 < self.neighborhood_fraction <= 1:
            raise InvalidConfig("neighborhood_fraction must be in (0, 1]")
        if self.min_half_extent < 1:
            raise InvalidConfig("min_half_extent must be >= 1")


@dataclass(frozen=True, eq=False)
class InlierSet:
    """Inlier pixel coordinates bound to the image they were detected in.

    Accepts float positions (floored to integer pixels, so feature values
    are deterministic) and duplicates (RANSAC can report coincident
    inliers).  Out-of-bounds points are rejected here, at construction.
    """

    points: np.ndarray  # (n, 2) int64, columns (x, y)
    dims: ImageDims

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.size == 0:
            pts = pts.reshape(0, 2)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise InvariantViolation(
                f"inlier points must have shape (n, 2), got {pts.shape}"
            )
        if not np.all(np.isfinite(pts)):
            raise InvariantViolation("inlier coordinates must be finite")
        pts = np.floor(pts).astype(np.int64)
        if len(pts):
            if (
                pts[:, 0].min() < 0
                or pts[:, 1].min() < 0
                or pts[:, 0].max() >= self.dims.width
                or pts[:, 1].max() >= self.dims.height
            ):
                raise InvariantViolation(
                    f"inlier outside {self.dims.width}x{self.dims.height} image"
                )
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, InlierSet):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.points, other.points)


@dataclass(frozen=True, eq=False)
class CoverageMap:
    dims: ImageDims
    covered: np.ndarray  # (height, width) bool

    def __post_init__(self):
        grid = np.asarray(self.covered, dtype=bool)
        if grid.shape != (self.dims.height, self.dims.width):
            raise InvariantViolation(
                f"coverage grid shape {grid.shape} does not match dims "
                f"{self.dims.height}x{self.dims.width}"
            )
        object.__setattr__(self, "covered", grid)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CoverageMap):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.covered, other.covered)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def neighborhood_half_extents(
    dims: ImageDims, params: CoverageParams = CoverageParams()
) -> tuple[int, int]:
    """Half extents (hx, hy) of the covering window, each >= min_half_extent.

    The full window spans (2*hx+1) x (2*hy+1) pixels, approximately
    `neighborhood_fraction` of each image dimension.  Half-up rounding is
    pinned for reproducibility; small variations in the window size do not
    change scores meaningfully.
    """
    hx = max(
        params.min_half_extent,
        _round_half_up(dims.width * params.neighborhood_fraction / 2.0),
    )
    hy = max(
        params.min_half_extent,
        _round_half_up(dims.height * params.neighborhood_fraction / 2.0),
    )
    return hx, hy


def coverage_map(
    inliers: InlierSet, params: CoverageParams = CoverageParams()
) -> CoverageMap:
    """Mark every pixel whose rectangular neighborhood contains an inlier.

    Equivalent to dilating the inlier mask by a (2*hx+1) x (2*hy+1)
    rectangle clipped at the image borders.  Runs in O(n + width*height):
    each inlier opens and closes a horizontal interval per row (difference
    array along x), then a cumulative-sum pass spreads rows vertically
    by hy (windowed-any along y).
    """
    dims = inliers.dims
    w, h = dims.width, dims.height
    hx, hy = neighborhood_half_extents(dims, params)
    if len(inliers) == 0:
        return CoverageMap(dims, np.zeros((h, w), dtype=bool))

    xs = inliers.points[:, 0]
    ys = inliers.points[:, 1]

    # Horizontal pass: per-row interval [x-hx, x+hx] via a difference array.
    # The -1 markers land in a sentinel column that is dropped before cumsum,
    # so intervals reaching the right edge stay open to the end of the row.
    row_diff = np.zeros((h, w + 1), dtype=np.int64)
    np.add.at(row_diff, (ys, np.maximum(xs - hx, 0)), 1)
    np.add.at(row_diff, (ys, np.minimum(xs + hx + 1, w)), -1)
    rows = np.cumsum(row_diff[:, :-1], axis=1) > 0

    # Vertical pass: pixel (x, y) is covered iff any marked row within
    # [y-hy, y+hy] covers column x.
    col_cum = np.zeros((h + 1, w), dtype=np.int64)
    col_cum[1:] = np.cumsum(rows, axis=0, dtype=np.int64)
    y_idx = np.arange(h)
    lo = np.maximum(y_idx - hy, 0)
    hi = np.minimum(y_idx + hy + 1, h)
    covered = (col_cum[hi] - col_cum[lo]) > 0
    return CoverageMap(dims, covered)


def coverage_score(cmap: CoverageMap) -> float:
    """Covered pixels divided by total pixels, in [0, 1]."""
    return float(np.count_nonzero(cmap.covered)) / cmap.dims.pixel_count


def write_pgm(cmap: CoverageMap, path) -> None:
    """Export as a binary P5 graymap for visual inspection (255 = covered)."""
    data = np.where(cmap.covered, 255, 0).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cmap.dims.width} {cmap.dims.height}\n255\n".encode("ascii"))
        fh.write(data.tobytes())
