"""Distance matrices: time gaps between submaps, descriptor distances between frames.

Everything is computed in float64 regardless of the float32 descriptor files;
aggregation then stays deterministic and the matrices are exactly symmetric.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import DimensionMismatch, MissingDescriptor, ZeroNormDescriptor
from .model import DescriptorSet, FrameDistanceMatrix, SubmapDistanceMatrix, Trajectory

DEFAULT_METRIC = "cosine"


def temporal_submap_distances(traj: Trajectory) -> SubmapDistanceMatrix:
    """Non-negative time gap between the spans of every submap pair.

    The gap runs from the last keyframe of the earlier submap to the first
    keyframe of the later one; overlapping spans get distance 0. This keeps
    the matrix symmetric for arbitrary pair order.
    """
    groups = traj.submap_frame_indices()
    starts = np.array([traj.timestamps[g[0]] for g in groups])
    ends = np.array([traj.timestamps[g[-1]] for g in groups])

    gaps = np.maximum.outer(starts, starts) - np.minimum.outer(ends, ends)
    np.maximum(gaps, 0.0, out=gaps)
    np.fill_diagonal(gaps, 0.0)
    return SubmapDistanceMatrix(values=gaps, kind="time")


def _block_ranges(n: int, block_rows: int):
    return [(s, min(s + block_rows, n)) for s in range(0, n, block_rows)]


def frame_descriptor_distances(
    descs: DescriptorSet,
    metric: str = DEFAULT_METRIC,
    block_rows: int = 1024,
    max_workers: int = 1,
) -> FrameDistanceMatrix:
    """Full pairwise descriptor distance matrix.

    metric "cosine" gives 1 - a.b/(|a||b|) in [0, 2]; "euclidean" gives |a-b|.
    Duplicate descriptor rows are collapsed before the Gram computation, so
    identical rows land at distance exactly 0. Row blocks may be computed on a
    thread pool; the block partition is fixed by block_rows, which makes the
    parallel and sequential results bit-identical.
    """
    if metric not in ("cosine", "euclidean"):
        raise ValueError(f"unknown metric {metric!r}")
    data = descs.data
    if descs.count < 1:
        raise ValueError("descriptor set is empty")

    if metric == "cosine":
        norms = np.linalg.norm(data, axis=1)
        zero = np.flatnonzero(norms == 0.0)
        if zero.size:
            raise ZeroNormDescriptor(int(zero[0]))

    uniq, inverse = np.unique(data, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    n = uniq.shape[0]

    if metric == "cosine":
        base = uniq / np.linalg.norm(uniq, axis=1, keepdims=True)
        sq = None
    else:
        base = uniq
        sq = np.einsum("ij,ij->i", base, base)

    out = np.empty((n, n), dtype=np.float64)

    def fill(span):
        lo, hi = span
        gram = base[lo:hi] @ base.T
        if metric == "cosine":
            block = 1.0 - np.clip(gram, -1.0, 1.0)
            np.clip(block, 0.0, 2.0, out=block)
        else:
            block = sq[lo:hi, None] + sq[None, :] - 2.0 * gram
            np.maximum(block, 0.0, out=block)
            np.sqrt(block, out=block)
        out[lo:hi] = block

    spans = _block_ranges(n, block_rows)
    if max_workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            list(pool.map(fill, spans))
    else:
        for span in spans:
            fill(span)

    # mirror the upper triangle for exact symmetry and an exact zero diagonal,
    # then expand from unique rows back to the original row order
    upper = np.triu(out, 1)
    sym = upper + upper.T
    full = sym[np.ix_(inverse, inverse)]
    return FrameDistanceMatrix(values=full)


def aggregate_to_submaps(fdm: FrameDistanceMatrix, traj: Trajectory) -> SubmapDistanceMatrix:
    """Submap visual distance: minimum frame distance over all cross pairs."""
    rows = traj.descriptor_rows
    missing = np.flatnonzero(rows < 0)
    if missing.size:
        raise MissingDescriptor(int(missing[0]))
    if int(rows.max()) >= fdm.frame_count:
        raise DimensionMismatch(
            f"descriptor_row {int(rows.max())} out of range for a "
            f"{fdm.frame_count}-frame distance matrix"
        )

    groups = [rows[g] for g in traj.submap_frame_indices()]
    m = traj.submap_count
    values = np.zeros((m, m), dtype=np.float64)
    for i in range(m):
        for j in range(i + 1, m):
            best = fdm.values[np.ix_(groups[i], groups[j])].min()
            values[i, j] = values[j, i] = best
    return SubmapDistanceMatrix(values=values, kind="vpr")


def format_distance_matrix(s: SubmapDistanceMatrix) -> str:
    """Row-major CSV dump with a '# M=<m> kind=<kind>' header line."""
    lines = [f"# M={s.submap_count} kind={s.kind}"]
    for row in s.values:
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"
