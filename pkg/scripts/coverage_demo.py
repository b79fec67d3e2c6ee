#!/usr/bin/env python3
"""Visualize what the coverage score sees.

Renders coverage maps for three inlier layouts with the same point count
— spread across the frame, packed into one cluster, and split between
two clusters — then writes each map as a PGM image and prints the score.
The clustered layouts are exactly the ranking failures that make raw
inlier counts unreliable: many inliers, tiny footprint.
"""

import argparse
import os

import numpy as np

from poseconf.coverage import (
    CoverageParams,
    ImageDims,
    InlierSet,
    coverage_map,
    coverage_score,
    neighborhood_half_extents,
    write_pgm,
)


def layouts(dims: ImageDims, n: int, rng: np.random.Generator):
    spread = np.column_stack(
        [rng.uniform(0, dims.width, size=n), rng.uniform(0, dims.height, size=n)]
    )
    one_cluster = np.clip(
        rng.normal([dims.width * 0.5, dims.height * 0.5], dims.height * 0.04, (n, 2)),
        0,
        [dims.width - 1, dims.height - 1],
    )
    halves = np.vstack(
        [
            rng.normal([dims.width * 0.25, dims.height * 0.3], dims.height * 0.04, (n // 2, 2)),
            rng.normal([dims.width * 0.75, dims.height * 0.7], dims.height * 0.04, (n - n // 2, 2)),
        ]
    )
    two_clusters = np.clip(halves, 0, [dims.width - 1, dims.height - 1])
    return [("spread", spread), ("one_cluster", one_cluster), ("two_clusters", two_clusters)]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--width", type=int, default=320)
    parser.add_argument("--height", type=int, default=240)
    parser.add_argument("--inliers", type=int, default=400)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", default="coverage_out")
    args = parser.parse_args()

    dims = ImageDims(args.width, args.height)
    params = CoverageParams()
    hx, hy = neighborhood_half_extents(dims, params)
    print(f"image {dims.width}x{dims.height}, neighborhood half extents ({hx}, {hy})")

    os.makedirs(args.out_dir, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    for name, points in layouts(dims, args.inliers, rng):
        cmap = coverage_map(InlierSet(points, dims), params)
        path = os.path.join(args.out_dir, f"{name}.pgm")
        write_pgm(cmap, path)
        print(
            f"{name:<14s} {len(points):4d} inliers -> "
            f"coverage {coverage_score(cmap):.3f}  ({path})"
        )


if __name__ == "__main__":
    main()
