"""Core domain types: frames, trajectories, descriptors, and the matrix family.

All types are immutable after construction (frozen dataclasses, read-only
numpy buffers) and therefore safe to share across threads. Quaternions are
stored scalar-first (w, x, y, z) everywhere inside the package.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicateTimestamp,
    EmptyTrajectory,
    InvalidOrientation,
    NonMonotonicTimestamps,
)

# Sensor logs contain duplicated stamps; decreases up to this slack still count
# as non-decreasing.
TIMESTAMP_SLACK = 1.0e-9

# Quaternions off unit norm by more than this are treated as corrupt data;
# anything closer is file round-off and gets renormalized.
QUATERNION_NORM_TOLERANCE = 1.0e-3


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _unit_quaternion(raw, context: str) -> np.ndarray:
    q = np.asarray(raw, dtype=np.float64).reshape(4)
    norm = float(np.linalg.norm(q))
    if abs(norm - 1.0) > QUATERNION_NORM_TOLERANCE:
        raise InvalidOrientation(f"{context}: quaternion norm {norm:.6g} is not close to 1")
    # Only renormalize when the norm is visibly off; dividing an already-unit
    # quaternion by its ~1.0 norm would perturb bits and break round-trips.
    if abs(norm - 1.0) > 1.0e-9:
        q = q / norm
    return q


@dataclass(frozen=True, eq=False)
class FrameRecord:
    """One keyframe: timestamp [s], pose, owning submap, optional descriptor row."""

    timestamp: float
    position: np.ndarray        # (3,) meters
    orientation: np.ndarray     # (4,) unit quaternion, scalar first
    submap_id: int
    descriptor_row: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "timestamp", float(self.timestamp))
        pos = np.asarray(self.position, dtype=np.float64).reshape(3)
        quat = _unit_quaternion(self.orientation, "frame orientation")
        object.__setattr__(self, "position", _readonly(pos))
        object.__setattr__(self, "orientation", _readonly(quat))
        object.__setattr__(self, "submap_id", int(self.submap_id))
        if self.submap_id < 0:
            raise ValueError(f"submap_id must be >= 0, got {self.submap_id}")
        if self.descriptor_row is not None:
            object.__setattr__(self, "descriptor_row", int(self.descriptor_row))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Validated, time-ordered keyframe sequence with dense 0-based submap ids.

    Build instances through :func:`validate_trajectory`; the constructor
    re-checks the invariants but does not re-index anything.
    """

    frames: tuple[FrameRecord, ...]
    submap_count: int

    # columnar views, derived once for numpy consumers
    timestamps: np.ndarray = field(init=False, repr=False)
    positions: np.ndarray = field(init=False, repr=False)
    orientations: np.ndarray = field(init=False, repr=False)
    submap_ids: np.ndarray = field(init=False, repr=False)
    descriptor_rows: np.ndarray = field(init=False, repr=False)   # -1 where absent

    def __post_init__(self):
        frames = tuple(self.frames)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "submap_count", int(self.submap_count))
        if not frames:
            raise EmptyTrajectory("trajectory has no frames")

        ts = np.array([f.timestamp for f in frames], dtype=np.float64)
        drops = np.diff(ts)
        if drops.size and float(drops.min()) < -TIMESTAMP_SLACK:
            k = int(np.argmin(drops))
            raise NonMonotonicTimestamps(
                f"timestamp decreases from {ts[k]!r} to {ts[k + 1]!r} at frame {k + 1}"
            )

        ids = np.array([f.submap_id for f in frames], dtype=np.int64)
        m = self.submap_count
        if m < 1 or m > len(frames):
            raise ValueError(f"submap_count {m} invalid for {len(frames)} frames")
        counts = np.bincount(ids, minlength=m)
        if len(counts) != m or counts.min() < 1:
            raise ValueError("submap ids must cover {0,...,M-1} with every submap non-empty")

        rows = np.array(
            [-1 if f.descriptor_row is None else f.descriptor_row for f in frames],
            dtype=np.int64,
        )
        object.__setattr__(self, "timestamps", _readonly(ts))
        object.__setattr__(self, "positions", _readonly(np.stack([f.position for f in frames])))
        object.__setattr__(self, "orientations", _readonly(np.stack([f.orientation for f in frames])))
        object.__setattr__(self, "submap_ids", _readonly(ids))
        object.__setattr__(self, "descriptor_rows", _readonly(rows))

    @property
    def frame_count(self) -> int:
        return len(self.frames)

    def submap_frame_indices(self) -> list[np.ndarray]:
        """Frame indices grouped by submap id, trajectory order preserved."""
        return [np.flatnonzero(self.submap_ids == j) for j in range(self.submap_count)]


def validate_trajectory(frames) -> Trajectory:
    """Validate raw frames and re-index submap ids to dense 0-based integers.

    Ids are remapped in first-appearance order, so the result is deterministic
    and the function is idempotent. Raises EmptyTrajectory or
    NonMonotonicTimestamps (a decrease larger than the 1 ns slack).
    """
    frames = list(frames)
    if not frames:
        raise EmptyTrajectory("no frames to validate")

    mapping: dict[int, int] = {}
    remapped = []
    for f in frames:
        dense = mapping.setdefault(f.submap_id, len(mapping))
        remapped.append(f if dense == f.submap_id else dataclasses.replace(f, submap_id=dense))
    return Trajectory(frames=tuple(remapped), submap_count=len(mapping))


@dataclass(frozen=True, eq=False)
class DescriptorSet:
    """Per-frame holistic descriptors as a (count, dimension) float64 matrix."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValueError(f"descriptor data must be 2-D, got shape {data.shape}")
        if data.size and not np.isfinite(data).all():
            raise ValueError("descriptor data contains non-finite values")
        object.__setattr__(self, "data", _readonly(data))

    @property
    def count(self) -> int:
        return self.data.shape[0]

    @property
    def dimension(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True, eq=False)
class GroundTruthTrack:
    """Reference poses along the run, strictly increasing in time."""

    timestamps: np.ndarray    # (K,)
    positions: np.ndarray     # (K, 3)
    orientations: np.ndarray  # (K, 4) scalar-first unit quaternions

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.float64).reshape(-1)
        if len(ts) == 0:
            raise ValueError("ground-truth track is empty")
        pos = np.asarray(self.positions, dtype=np.float64).reshape(len(ts), 3)
        quats = np.stack(
            [_unit_quaternion(q, "ground-truth orientation")
             for q in np.asarray(self.orientations, dtype=np.float64).reshape(len(ts), 4)]
        )
        diffs = np.diff(ts)
        if diffs.size and float(diffs.min()) <= 0.0:
            k = int(np.argmin(diffs))
            if ts[k] == ts[k + 1]:
                raise DuplicateTimestamp(f"duplicate ground-truth timestamp {ts[k]!r}")
            raise ValueError("ground-truth timestamps must be strictly increasing")
        object.__setattr__(self, "timestamps", _readonly(ts))
        object.__setattr__(self, "positions", _readonly(pos))
        object.__setattr__(self, "orientations", _readonly(quats))

    @property
    def sample_count(self) -> int:
        return len(self.timestamps)


def _check_square(values: np.ndarray, name: str) -> None:
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ValueError(f"{name} must be square, got shape {values.shape}")


def _check_symmetric(values: np.ndarray, name: str) -> None:
    if not np.array_equal(values, values.T):
        raise ValueError(f"{name} must be exactly symmetric")


@dataclass(frozen=True, eq=False)
class SubmapDistanceMatrix:
    """Symmetric non-negative submap-to-submap distances, zero diagonal.

    kind is "time" (seconds between span ends) or "vpr" (descriptor distance
    units from min-aggregation over frame pairs).
    """

    values: np.ndarray
    kind: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        _check_square(values, "distance matrix")
        _check_symmetric(values, "distance matrix")
        if values.size and not np.isfinite(values).all():
            raise ValueError("distance matrix contains non-finite values")
        if values.size and float(values.min()) < 0.0:
            raise ValueError("distance matrix contains negative entries")
        if np.any(np.diagonal(values) != 0.0):
            raise ValueError("distance matrix diagonal must be zero")
        if self.kind not in ("time", "vpr"):
            raise ValueError(f"unknown distance kind {self.kind!r}")
        object.__setattr__(self, "values", _readonly(values))

    @property
    def submap_count(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class FrameDistanceMatrix:
    """Symmetric non-negative frame-to-frame descriptor distances, zero diagonal."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        _check_square(values, "frame distance matrix")
        _check_symmetric(values, "frame distance matrix")
        if values.size and not np.isfinite(values).all():
            raise ValueError("frame distance matrix contains non-finite values")
        if values.size and float(values.min()) < 0.0:
            raise ValueError("frame distance matrix contains negative entries")
        if np.any(np.diagonal(values) != 0.0):
            raise ValueError("frame distance matrix diagonal must be zero")
        object.__setattr__(self, "values", _readonly(values))

    @property
    def frame_count(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class AdjacencyMatrix:
    """Boolean symmetric submap adjacency; the diagonal is always true.

    Metrics exclude the diagonal, so the trivial self-adjacency carries no
    weight; keeping it true matches the convention that a submap's own
    transformation is known.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=bool)
        _check_square(values, "adjacency matrix")
        _check_symmetric(values, "adjacency matrix")
        if not np.diagonal(values).all():
            raise ValueError("adjacency diagonal must be true")
        object.__setattr__(self, "values", _readonly(values))

    @property
    def submap_count(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class ReachabilityMatrix:
    """Boolean symmetric reachability: transitively closed adjacency."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=bool)
        _check_square(values, "reachability matrix")
        _check_symmetric(values, "reachability matrix")
        if not np.diagonal(values).all():
            raise ValueError("reachability diagonal must be true")
        counts = values.astype(np.float64)
        step = (counts @ counts) > 0.0
        if not np.array_equal(step, values):
            raise ValueError("reachability matrix is not transitively closed")
        object.__setattr__(self, "values", _readonly(values))

    @property
    def submap_count(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Frame counts per submap; drives the pair-weight matrix counts * counts^T."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64).reshape(-1)
        if counts.size == 0 or int(counts.min()) < 1:
            raise ValueError("weight vector entries must be positive integers")
        object.__setattr__(self, "counts", _readonly(counts))

    @property
    def submap_count(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def outer(self) -> np.ndarray:
        """Pair-weight matrix W with W[i, j] = counts[i] * counts[j], float64."""
        w = self.counts.astype(np.float64)
        return np.outer(w, w)


@dataclass(frozen=True)
class MergeRuleParams:
    """Fixed parameters of a merge rule; the swept threshold stays a call argument."""

    kind: str                # "time" | "vpr" | "combined"
    tau_time: float = 0.0    # seconds
    f_time: float = 1.0      # relaxation factor for the time threshold
    f_vpr: float = 1.0       # relaxation factor for the visual threshold

    def __post_init__(self):
        if self.kind not in ("time", "vpr", "combined"):
            raise ValueError(f"unknown rule kind {self.kind!r}")
        object.__setattr__(self, "tau_time", float(self.tau_time))
        object.__setattr__(self, "f_time", float(self.f_time))
        object.__setattr__(self, "f_vpr", float(self.f_vpr))
        if self.tau_time < 0.0:
            raise ValueError("tau_time must be >= 0")
        if self.kind == "combined" and (self.f_time < 1.0 or self.f_vpr < 1.0):
            raise ValueError("relaxation factors must be >= 1 for combined rules")


@dataclass(frozen=True)
class CurvePoint:
    """One operating point of a precision-coverage sweep."""

    threshold: float
    precision: float
    coverage: float
    weighted_tp: float
    weighted_fp: float

    def __post_init__(self):
        for name in ("threshold", "precision", "coverage", "weighted_tp", "weighted_fp"):
            object.__setattr__(self, name, float(getattr(self, name)))


@dataclass(frozen=True, eq=False)
class Curve:
    """Precision-coverage curve: points sorted by coverage plus the AUC."""

    points: tuple[CurvePoint, ...]
    auc: float

    def __post_init__(self):
        points = tuple(self.points)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "auc", float(self.auc))
        if not points:
            raise ValueError("curve needs at least one point")
        cov = [p.coverage for p in points]
        if any(b < a for a, b in zip(cov, cov[1:])):
            raise ValueError("curve points must be sorted by coverage ascending")
        if not (0.0 <= self.auc <= 1.0):
            raise ValueError(f"auc {self.auc!r} outside [0, 1]")
