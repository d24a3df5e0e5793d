"""Merge rules: distance matrices -> boolean submap adjacency.

Thresholds are non-strict (<=): sweeping over the observed distance values
then flips each pair adjacent exactly at its own distance, which yields the
smoothest curves a sweep can produce.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionMismatch
from .ingest import AlignedTrajectory
from .model import AdjacencyMatrix, MergeRuleParams, SubmapDistanceMatrix

DEFAULT_EPS_DIST = 10.0  # meters
DEFAULT_EPS_ROT = 20.0   # degrees

# Named parameter presets for the combined time+visual rule.
RULE_PRESETS: dict[str, MergeRuleParams] = {
    "comb1": MergeRuleParams(kind="combined", tau_time=2.0, f_time=10.0, f_vpr=2.0),
    "comb2": MergeRuleParams(kind="combined", tau_time=0.5, f_time=10.0, f_vpr=4.0),
}


def threshold_adjacency(s: SubmapDistanceMatrix, tau: float) -> AdjacencyMatrix:
    """Submaps i != j adjacent iff s(i, j) <= tau; diagonal always true."""
    tau = float(tau)
    if math.isnan(tau):
        raise ValueError("threshold must not be NaN")
    values = s.values <= tau
    np.fill_diagonal(values, True)
    return AdjacencyMatrix(values=values)


def combined_adjacency(
    s_time: SubmapDistanceMatrix,
    s_vpr: SubmapDistanceMatrix,
    params: MergeRuleParams,
    tau_vpr: float,
) -> AdjacencyMatrix:
    """Adjacent iff visually close, temporally close, or moderately both.

    The three clauses: s_vpr <= tau_vpr, s_time <= tau_time, or
    (s_time <= f_time*tau_time and s_vpr <= f_vpr*tau_vpr).
    """
    if params.kind != "combined":
        raise ValueError(f"combined_adjacency needs combined params, got kind {params.kind!r}")
    if s_time.submap_count != s_vpr.submap_count:
        raise DimensionMismatch(
            f"time matrix is {s_time.submap_count}x{s_time.submap_count}, "
            f"vpr matrix is {s_vpr.submap_count}x{s_vpr.submap_count}"
        )
    tau_vpr = float(tau_vpr)
    if math.isnan(tau_vpr):
        raise ValueError("tau_vpr must not be NaN")

    strict_vpr = s_vpr.values <= tau_vpr
    strict_time = s_time.values <= params.tau_time
    relaxed = (s_time.values <= params.f_time * params.tau_time) & (
        s_vpr.values <= params.f_vpr * tau_vpr
    )
    values = strict_vpr | strict_time | relaxed
    np.fill_diagonal(values, True)
    return AdjacencyMatrix(values=values)


def quaternion_angle_deg(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    """Geodesic rotation angle between unit quaternions, in degrees.

    Broadcasts over leading axes; the last axis must be the 4 components.
    """
    dot = np.abs(np.sum(q1 * q2, axis=-1))
    return np.degrees(2.0 * np.arccos(np.clip(dot, 0.0, 1.0)))


def ground_truth_adjacency(
    aligned: AlignedTrajectory,
    eps_dist: float = DEFAULT_EPS_DIST,
    eps_rot: float = DEFAULT_EPS_ROT,
) -> AdjacencyMatrix:
    """Submaps adjacent iff some cross frame pair is close in position AND angle.

    Closeness is measured on the ground-truth poses: Euclidean distance
    <= eps_dist meters and geodesic rotation angle <= eps_rot degrees.
    """
    if not eps_dist > 0.0:
        raise ValueError("eps_dist must be > 0")
    if not 0.0 < eps_rot <= 180.0:
        raise ValueError("eps_rot must be in (0, 180]")

    traj = aligned.trajectory
    groups = traj.submap_frame_indices()
    m = traj.submap_count
    adj = np.eye(m, dtype=bool)
    eps_sq = eps_dist * eps_dist

    for i in range(m):
        pi = aligned.gt_positions[groups[i]]
        qi = aligned.gt_orientations[groups[i]]
        for j in range(i + 1, m):
            pj = aligned.gt_positions[groups[j]]
            delta = pi[:, None, :] - pj[None, :, :]
            near = np.einsum("abk,abk->ab", delta, delta) <= eps_sq
            if not near.any():
                continue
            qj = aligned.gt_orientations[groups[j]]
            angles = quaternion_angle_deg(qi[:, None, :], qj[None, :, :])
            if (near & (angles <= eps_rot)).any():
                adj[i, j] = adj[j, i] = True
    return AdjacencyMatrix(values=adj)


def format_adjacency(a: AdjacencyMatrix, rule: str, tau: float) -> str:
    """0/1 CSV dump with a '# M=<m> rule=<name> tau=<value>' header line."""
    lines = [f"# M={a.submap_count} rule={rule} tau={float(tau)!r}"]
    for row in a.values:
        lines.append(",".join("1" if v else "0" for v in row))
    return "\n".join(lines) + "\n"
