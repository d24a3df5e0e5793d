"""Shared builders for the test suite."""

import numpy as np

from mergeval import (
    AdjacencyMatrix,
    FrameRecord,
    SubmapDistanceMatrix,
    Trajectory,
    transitive_closure,
    validate_trajectory,
)

IDENTITY_Q = (1.0, 0.0, 0.0, 0.0)


def make_frames(submap_ids, timestamps=None, positions=None, descriptor_rows=None):
    n = len(submap_ids)
    if timestamps is None:
        timestamps = np.arange(n, dtype=float)
    if positions is None:
        positions = np.zeros((n, 3))
    rows = descriptor_rows if descriptor_rows is not None else [None] * n
    return [
        FrameRecord(timestamp=timestamps[k], position=positions[k],
                    orientation=IDENTITY_Q, submap_id=submap_ids[k],
                    descriptor_row=rows[k])
        for k in range(n)
    ]


def make_trajectory(submap_ids, **kwargs) -> Trajectory:
    return validate_trajectory(make_frames(submap_ids, **kwargs))


def span_trajectory(spans, frames_per_submap=2) -> Trajectory:
    """One submap per (start, end) time span, frames evenly spaced inside."""
    frames = []
    for sid, (start, end) in enumerate(spans):
        for t in np.linspace(start, end, frames_per_submap):
            frames.extend(make_frames([sid], timestamps=[t]))
    frames.sort(key=lambda f: f.timestamp)
    return validate_trajectory(frames)


def random_adjacency(rng, m, density=None) -> AdjacencyMatrix:
    density = rng.uniform(0.05, 0.6) if density is None else density
    upper = np.triu(rng.random((m, m)) < density, 1)
    return AdjacencyMatrix(values=upper | upper.T | np.eye(m, dtype=bool))


def random_reachability(rng, m):
    return transitive_closure(random_adjacency(rng, m))


def random_distance_matrix(rng, m, kind="vpr", scale=1.0) -> SubmapDistanceMatrix:
    upper = np.triu(rng.random((m, m)) * scale, 1)
    return SubmapDistanceMatrix(values=upper + upper.T, kind=kind)


def symmetric_pairs(matrix):
    """Off-diagonal true pairs (i < j) of a boolean matrix."""
    m = matrix.shape[0]
    return {(i, j) for i in range(m) for j in range(i + 1, m) if matrix[i, j]}
