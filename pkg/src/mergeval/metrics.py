"""Reachability closure and the frame-weighted precision/coverage metrics.

Conventions used throughout: the diagonal is excluded from every sum (a
submap trivially reaches itself), and an empty prediction set scores
precision 1 at coverage 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateEvaluation,
    DimensionMismatch,
    MissingDescriptor,
    NoGroundTruthMatches,
)
from .ingest import AlignedTrajectory
from .model import (
    AdjacencyMatrix,
    Curve,
    CurvePoint,
    FrameDistanceMatrix,
    MergeRuleParams,
    ReachabilityMatrix,
    SubmapDistanceMatrix,
    Trajectory,
    WeightVector,
)
from .rules import (
    DEFAULT_EPS_DIST,
    DEFAULT_EPS_ROT,
    combined_adjacency,
    quaternion_angle_deg,
    threshold_adjacency,
)

DEFAULT_MIN_TIME_SEPARATION = 30.0  # seconds; suppresses trivial consecutive-frame matches

SWEEP_RULES = ("time", "vpr", "combined")


def transitive_closure(a: AdjacencyMatrix) -> ReachabilityMatrix:
    """Reflexive-transitive closure by repeated boolean squaring to a fixpoint.

    With a true diagonal, squaring never loses entries, so at most
    ceil(log2(M)) squarings reach the closure; i and j end up connected iff
    they share a connected component.
    """
    # float64 keeps path counts exact (< 2**53) and avoids integer wraparound
    reach = a.values.astype(np.float64)
    while True:
        nxt = ((reach @ reach) > 0.0).astype(np.float64)
        if np.array_equal(nxt, reach):
            break
        reach = nxt
    return ReachabilityMatrix(values=reach.astype(bool))


def weight_vector(traj: Trajectory) -> WeightVector:
    """Frames per submap; sums to the trajectory's frame count."""
    counts = np.bincount(traj.submap_ids, minlength=traj.submap_count)
    return WeightVector(counts=counts)


def precision_coverage(
    r: ReachabilityMatrix,
    r_gt: ReachabilityMatrix,
    weights: WeightVector,
) -> tuple[float, float, float, float]:
    """Frame-weighted precision and coverage of a reachability prediction.

    Off-diagonal sums with pair weights W = counts*counts^T:
    coverage = sum(R*W)/sum(W), precision = sum(R*R_gt*W)/sum(R*W).
    No off-diagonal reachability means precision 1 at coverage 0.

    Returns (precision, coverage, weighted_tp, weighted_fp).
    """
    m = r.submap_count
    if m != r_gt.submap_count or m != weights.submap_count:
        raise DimensionMismatch(
            f"inconsistent sizes: R {m}, R_gt {r_gt.submap_count}, weights {weights.submap_count}"
        )
    if m < 2:
        raise DegenerateEvaluation("precision/coverage needs at least 2 submaps")

    off = ~np.eye(m, dtype=bool)
    pair_w = weights.outer()
    total = float(pair_w[off].sum())
    predicted = float(pair_w[r.values & off].sum())
    if predicted == 0.0:
        return 1.0, 0.0, 0.0, 0.0
    tp = float(pair_w[r.values & r_gt.values & off].sum())
    return tp / predicted, predicted / total, tp, predicted - tp


def _integrate(points) -> float:
    """Trapezoidal area of precision over coverage on [0, max coverage].

    Coverage ties collapse to their maximum precision; the strictest point's
    precision extends back to coverage 0. No credit past achieved coverage.
    """
    pts = sorted(points, key=lambda p: p.coverage)
    if not pts:
        raise ValueError("cannot integrate an empty curve")
    cov, prec = [], []
    for p in pts:
        if cov and p.coverage == cov[-1]:
            prec[-1] = max(prec[-1], p.precision)
        else:
            cov.append(p.coverage)
            prec.append(p.precision)
    if cov[0] > 0.0:
        cov.insert(0, 0.0)
        prec.insert(0, prec[0])
    c = np.array(cov)
    p = np.array(prec)
    area = float(np.sum(0.5 * (p[1:] + p[:-1]) * np.diff(c)))
    return min(max(area, 0.0), 1.0)


def auc(curve: Curve) -> float:
    """Area under a precision-coverage curve."""
    return _integrate(curve.points)


def _off_diagonal_values(s: SubmapDistanceMatrix) -> np.ndarray:
    m = s.submap_count
    return np.unique(s.values[~np.eye(m, dtype=bool)])


def sweep_curve(
    rule: str,
    r_gt: ReachabilityMatrix,
    weights: WeightVector,
    s_time: SubmapDistanceMatrix | None = None,
    s_vpr: SubmapDistanceMatrix | None = None,
    params: MergeRuleParams | None = None,
) -> Curve:
    """Sweep the rule's threshold over every observed distance value.

    The sweep set is a -inf sentinel (empty prediction) plus the sorted unique
    off-diagonal values of the swept matrix: s_time for "time", s_vpr for
    "vpr" and for "combined" (whose fixed params come from `params`). Points
    come out sorted by coverage; AUC is attached.
    """
    if rule not in SWEEP_RULES:
        raise ValueError(f"unknown sweep rule {rule!r}; expected one of {SWEEP_RULES}")
    if rule == "time":
        swept = s_time
    else:
        swept = s_vpr
    if swept is None:
        raise ValueError(f"rule {rule!r} needs its distance matrix")
    if rule == "combined":
        if s_time is None:
            raise ValueError("combined rule needs s_time as well")
        if params is None:
            raise ValueError("combined rule needs fixed MergeRuleParams")

    if swept.submap_count != r_gt.submap_count:
        raise DimensionMismatch(
            f"distance matrix M={swept.submap_count} vs ground truth M={r_gt.submap_count}"
        )

    thresholds = [float("-inf")] + [float(v) for v in _off_diagonal_values(swept)]
    points = []
    for tau in thresholds:
        if rule == "combined":
            adjacency = combined_adjacency(s_time, swept, params, tau)
        else:
            adjacency = threshold_adjacency(swept, tau)
        reach = transitive_closure(adjacency)
        p, c, tp, fp = precision_coverage(reach, r_gt, weights)
        points.append(CurvePoint(threshold=tau, precision=p, coverage=c,
                                 weighted_tp=tp, weighted_fp=fp))

    points.sort(key=lambda pt: (pt.coverage, pt.threshold))
    return Curve(points=tuple(points), auc=_integrate(points))


@dataclass(frozen=True)
class FramePRPoint:
    """One operating point of a frame-level precision/recall sweep."""

    threshold: float
    precision: float
    recall: float

    def __post_init__(self):
        for name in ("threshold", "precision", "recall"):
            object.__setattr__(self, name, float(getattr(self, name)))


@dataclass(frozen=True, eq=False)
class FramePRCurve:
    """Frame-level precision/recall curve; recall grows with the threshold."""

    points: tuple[FramePRPoint, ...]

    def __post_init__(self):
        points = tuple(self.points)
        object.__setattr__(self, "points", points)
        if not points:
            raise ValueError("curve needs at least one point")
        rec = [p.recall for p in points]
        if any(b < a for a, b in zip(rec, rec[1:])):
            raise ValueError("recall must be non-decreasing along the curve")


def frame_precision_recall(
    fdm: FrameDistanceMatrix,
    aligned: AlignedTrajectory,
    eps_dist: float = DEFAULT_EPS_DIST,
    eps_rot: float = DEFAULT_EPS_ROT,
    min_time_separation: float = DEFAULT_MIN_TIME_SEPARATION,
) -> FramePRCurve:
    """Descriptor quality in isolation: frame-pair precision/recall.

    Only pairs at least min_time_separation apart in time qualify. A pair is
    a ground-truth match when its ground-truth poses are within eps_dist and
    eps_rot; it is predicted at threshold tau when its descriptor distance
    is <= tau. The sweep covers every qualifying distance value, preceded by
    the empty-prediction point (precision 1, recall 0).
    """
    traj = aligned.trajectory
    rows = traj.descriptor_rows
    missing = np.flatnonzero(rows < 0)
    if missing.size:
        raise MissingDescriptor(int(missing[0]))
    if int(rows.max()) >= fdm.frame_count:
        raise DimensionMismatch(
            f"descriptor_row {int(rows.max())} out of range for a "
            f"{fdm.frame_count}-frame distance matrix"
        )

    n = traj.frame_count
    ii, jj = np.triu_indices(n, k=1)
    qualifying = np.abs(traj.timestamps[ii] - traj.timestamps[jj]) >= min_time_separation
    ii, jj = ii[qualifying], jj[qualifying]
    if len(ii) == 0:
        raise NoGroundTruthMatches(
            "no frame pair satisfies the time separation; recall is undefined"
        )

    delta = aligned.gt_positions[ii] - aligned.gt_positions[jj]
    near = np.einsum("ij,ij->i", delta, delta) <= eps_dist * eps_dist
    angles = quaternion_angle_deg(aligned.gt_orientations[ii], aligned.gt_orientations[jj])
    is_match = near & (angles <= eps_rot)
    n_gt = int(is_match.sum())
    if n_gt == 0:
        raise NoGroundTruthMatches("no ground-truth frame matches; recall is undefined")

    dist = fdm.values[rows[ii], rows[jj]]
    order = np.argsort(dist, kind="stable")
    dist = dist[order]
    cum_tp = np.cumsum(is_match[order])

    # one point per distinct distance value: predictions = all pairs <= value
    last = np.flatnonzero(np.r_[dist[1:] != dist[:-1], True])
    points = [FramePRPoint(threshold=float("-inf"), precision=1.0, recall=0.0)]
    for k in last:
        predicted = int(k) + 1
        tp = int(cum_tp[k])
        points.append(
            FramePRPoint(
                threshold=float(dist[k]),
                precision=tp / predicted,
                recall=tp / n_gt,
            )
        )
    return FramePRCurve(points=tuple(points))


def format_curve_csv(
    curve: Curve,
    rule: str,
    submap_count: int,
    frame_count: int,
    params: MergeRuleParams | None = None,
) -> str:
    """Curve CSV: a '#' metadata line, a column header, one row per point."""
    meta = f"# rule={rule} M={submap_count} N={frame_count} auc={curve.auc!r}"
    if params is not None:
        meta += (
            f" tau_time={params.tau_time!r} f_time={params.f_time!r} f_vpr={params.f_vpr!r}"
        )
    lines = [meta, "threshold,precision,coverage,weighted_tp,weighted_fp"]
    for p in curve.points:
        lines.append(
            f"{p.threshold!r},{p.precision!r},{p.coverage!r},"
            f"{p.weighted_tp!r},{p.weighted_fp!r}"
        )
    return "\n".join(lines) + "\n"


def parse_curve_csv(text: str) -> tuple[Curve, dict]:
    """Inverse of format_curve_csv; returns the curve and the metadata dict."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 3 or not lines[0].startswith("#"):
        raise ValueError("not a curve CSV: missing metadata or points")
    meta = {}
    for token in lines[0].lstrip("#").split():
        key, _, value = token.partition("=")
        meta[key] = value
    points = []
    for row in lines[2:]:
        t, p, c, tp, fp = (float(v) for v in row.split(","))
        points.append(CurvePoint(threshold=t, precision=p, coverage=c,
                                 weighted_tp=tp, weighted_fp=fp))
    points.sort(key=lambda pt: (pt.coverage, pt.threshold))
    return Curve(points=tuple(points), auc=_integrate(points)), meta
