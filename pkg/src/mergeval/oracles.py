"""Independent brute-force oracles for the closure and metric computations.

These deliberately avoid the matrix algebra used by the main implementations:
the closure oracle walks the graph, the metrics oracle enumerates frame pairs.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .errors import DegenerateEvaluation, DimensionMismatch
from .model import AdjacencyMatrix, ReachabilityMatrix, Trajectory


def closure_oracle(a: AdjacencyMatrix) -> ReachabilityMatrix:
    """Connected components by breadth-first search; reachable iff same component."""
    m = a.submap_count
    labels = np.full(m, -1, dtype=np.int64)
    component = 0
    for start in range(m):
        if labels[start] >= 0:
            continue
        queue = deque([start])
        labels[start] = component
        while queue:
            node = queue.popleft()
            for neighbor in np.flatnonzero(a.values[node]):
                if labels[neighbor] < 0:
                    labels[neighbor] = component
                    queue.append(neighbor)
        component += 1
    return ReachabilityMatrix(values=labels[:, None] == labels[None, :])


def metrics_oracle(
    r: ReachabilityMatrix,
    r_gt: ReachabilityMatrix,
    traj: Trajectory,
) -> tuple[float, float]:
    """Precision and coverage by enumerating every cross-submap frame pair.

    Each ordered frame pair in distinct submaps counts once; that reproduces
    the pair weights without ever forming the weight matrix.
    """
    if r.submap_count != r_gt.submap_count or r.submap_count != traj.submap_count:
        raise DimensionMismatch(
            f"inconsistent sizes: R {r.submap_count}, R_gt {r_gt.submap_count}, "
            f"trajectory {traj.submap_count}"
        )
    if traj.submap_count < 2:
        raise DegenerateEvaluation("metrics oracle needs at least 2 submaps")

    ids = traj.submap_ids
    cross = ids[:, None] != ids[None, :]
    reach_f = r.values[np.ix_(ids, ids)]
    gt_f = r_gt.values[np.ix_(ids, ids)]

    predicted = int((reach_f & cross).sum())
    total = int(cross.sum())
    if predicted == 0:
        return 1.0, 0.0
    tp = int((reach_f & gt_f & cross).sum())
    return tp / predicted, predicted / total
