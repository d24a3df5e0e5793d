"""File formats and ground-truth association.

Two text formats live here and they use OPPOSITE quaternion conventions:

* submap trajectory file: ``timestamp submap_id tx ty tz qw qx qy qz``
  (scalar FIRST, one keyframe per line, '#' comments)
* ground-truth file: TUM trajectory format
  ``timestamp tx ty tz qx qy qz qw`` (scalar LAST)

Internally everything is scalar-first. Descriptor files are binary:
magic ``VPRD``, uint32 version=1, uint32 count, uint32 dimension, then
count*dimension little-endian float32 values in row-major order.
"""

from __future__ import annotations

import dataclasses
import logging
import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateTimestamp,
    EmptySubmapAfterAlignment,
    EmptyTrajectory,
    InvalidOrientation,
    NoOverlap,
    ParseError,
)
from .model import (
    DescriptorSet,
    FrameRecord,
    GroundTruthTrack,
    Trajectory,
    _readonly,
    validate_trajectory,
)

log = logging.getLogger(__name__)

DESCRIPTOR_MAGIC = b"VPRD"
DESCRIPTOR_VERSION = 1
DEFAULT_MAX_DT = 0.1  # seconds


def _data_lines(stream):
    """Yield (line_number, stripped_line) skipping blanks and '#' comments."""
    for number, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield number, line


def parse_trajectory(stream) -> Trajectory:
    """Parse a submap trajectory from a text stream (file object or lines).

    Submap ids in the file may be arbitrary integers; they are re-indexed to
    dense 0-based ids in first-appearance order.
    """
    raw = []
    for number, line in _data_lines(stream):
        fields = line.split()
        if len(fields) != 9:
            raise ParseError(f"expected 9 fields, got {len(fields)}", line=number)
        try:
            t = float(fields[0])
            submap_id = int(fields[1])
            values = [float(v) for v in fields[2:9]]
        except ValueError as exc:
            raise ParseError(str(exc), line=number) from None
        raw.append((number, t, submap_id, values))

    if not raw:
        raise EmptyTrajectory("trajectory file contains no data lines")

    # dense first-appearance ids before FrameRecord construction, so files with
    # negative raw ids still parse
    mapping: dict[int, int] = {}
    frames = []
    for number, t, submap_id, values in raw:
        dense = mapping.setdefault(submap_id, len(mapping))
        try:
            frames.append(
                FrameRecord(
                    timestamp=t,
                    position=values[0:3],
                    orientation=values[3:7],
                    submap_id=dense,
                )
            )
        except InvalidOrientation as exc:
            raise ParseError(str(exc), line=number) from None
    return validate_trajectory(frames)


def format_trajectory(traj: Trajectory) -> str:
    """Serialize a trajectory; floats use repr so a re-parse is bit-exact."""
    lines = ["# timestamp submap_id tx ty tz qw qx qy qz"]
    for f in traj.frames:
        p = [float(v) for v in f.position]
        q = [float(v) for v in f.orientation]
        lines.append(
            f"{f.timestamp!r} {f.submap_id} {p[0]!r} {p[1]!r} {p[2]!r} "
            f"{q[0]!r} {q[1]!r} {q[2]!r} {q[3]!r}"
        )
    return "\n".join(lines) + "\n"


def parse_descriptors(stream) -> DescriptorSet:
    """Parse a binary descriptor file from a byte stream."""
    blob = stream.read()
    header = struct.calcsize("<4sIII")
    if len(blob) < header:
        raise ParseError("descriptor file shorter than its header")
    magic, version, count, dim = struct.unpack_from("<4sIII", blob)
    if magic != DESCRIPTOR_MAGIC:
        raise ParseError(f"bad magic {magic!r}, expected {DESCRIPTOR_MAGIC!r}")
    if version != DESCRIPTOR_VERSION:
        raise ParseError(f"unsupported descriptor file version {version}")
    if dim < 1:
        raise ParseError("descriptor dimension must be >= 1")
    expected = count * dim * 4
    payload = blob[header:]
    if len(payload) != expected:
        raise ParseError(
            f"payload size mismatch: header promises {expected} bytes, found {len(payload)}"
        )
    data = np.frombuffer(payload, dtype="<f4").reshape(count, dim).astype(np.float64)
    if data.size and not np.isfinite(data).all():
        raise ParseError("descriptor payload contains non-finite values")
    return DescriptorSet(data=data)


def format_descriptors(descs: DescriptorSet) -> bytes:
    header = struct.pack("<4sIII", DESCRIPTOR_MAGIC, DESCRIPTOR_VERSION,
                         descs.count, descs.dimension)
    return header + descs.data.astype("<f4").tobytes(order="C")


def attach_descriptor_rows(traj: Trajectory, descs: DescriptorSet) -> Trajectory:
    """Pair the k-th descriptor row with the k-th frame.

    Both files come from the same extraction run, so order matching is the
    robust choice; a count mismatch means the inputs do not belong together.
    """
    if descs.count != traj.frame_count:
        raise DimensionMismatch(
            f"descriptor count {descs.count} != frame count {traj.frame_count}"
        )
    frames = tuple(
        dataclasses.replace(f, descriptor_row=k) for k, f in enumerate(traj.frames)
    )
    return Trajectory(frames=frames, submap_count=traj.submap_count)


def parse_ground_truth(stream) -> GroundTruthTrack:
    """Parse a TUM-format ground-truth file; output is sorted by timestamp."""
    rows = []
    for number, line in _data_lines(stream):
        fields = line.split()
        if len(fields) != 8:
            raise ParseError(f"expected 8 fields (TUM format), got {len(fields)}", line=number)
        try:
            values = [float(v) for v in fields]
        except ValueError as exc:
            raise ParseError(str(exc), line=number) from None
        rows.append(values)
    if not rows:
        raise ParseError("ground-truth file contains no data lines")

    data = np.array(rows, dtype=np.float64)
    order = np.argsort(data[:, 0], kind="stable")
    data = data[order]
    ts = data[:, 0]
    dup = np.flatnonzero(np.diff(ts) == 0.0)
    if dup.size:
        raise DuplicateTimestamp(f"duplicate ground-truth timestamp {ts[dup[0]]!r}")
    # file order is qx qy qz qw; store scalar-first
    quats = data[:, [7, 4, 5, 6]]
    try:
        return GroundTruthTrack(timestamps=ts, positions=data[:, 1:4], orientations=quats)
    except InvalidOrientation as exc:
        raise ParseError(str(exc)) from None


def format_ground_truth(track: GroundTruthTrack) -> str:
    lines = ["# timestamp tx ty tz qx qy qz qw"]
    for t, pos, quat in zip(track.timestamps, track.positions, track.orientations):
        p = [float(v) for v in pos]
        q = [float(v) for v in quat]
        lines.append(
            f"{float(t)!r} {p[0]!r} {p[1]!r} {p[2]!r} {q[1]!r} {q[2]!r} {q[3]!r} {q[0]!r}"
        )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class AlignedTrajectory:
    """Trajectory frames paired 1:1 with ground-truth poses.

    Frames with no ground-truth sample within max_dt are dropped entirely, so
    frame weights downstream reflect only evaluated frames.
    """

    trajectory: Trajectory
    gt_positions: np.ndarray     # (N, 3)
    gt_orientations: np.ndarray  # (N, 4) scalar-first
    dropped_frame_count: int

    def __post_init__(self):
        n = self.trajectory.frame_count
        pos = np.asarray(self.gt_positions, dtype=np.float64).reshape(n, 3)
        quat = np.asarray(self.gt_orientations, dtype=np.float64).reshape(n, 4)
        object.__setattr__(self, "gt_positions", _readonly(pos))
        object.__setattr__(self, "gt_orientations", _readonly(quat))
        object.__setattr__(self, "dropped_frame_count", int(self.dropped_frame_count))
        if self.dropped_frame_count < 0:
            raise ValueError("dropped_frame_count must be >= 0")


def associate_ground_truth(
    traj: Trajectory,
    gt: GroundTruthTrack,
    max_dt: float = DEFAULT_MAX_DT,
) -> AlignedTrajectory:
    """Pair each frame with the nearest-in-time ground-truth sample.

    Ties in |dt| resolve to the earlier sample. Frames farther than max_dt
    from any sample are dropped; a submap losing all its frames is an error
    because the metrics would silently change shape.
    """
    if not max_dt > 0.0:
        raise ValueError("max_dt must be > 0")

    ts = traj.timestamps
    gts = gt.timestamps
    right = np.searchsorted(gts, ts)
    left = np.clip(right - 1, 0, len(gts) - 1)
    right = np.clip(right, 0, len(gts) - 1)
    dt_left = np.abs(ts - gts[left])
    dt_right = np.abs(ts - gts[right])
    # earlier sample wins ties
    nearest = np.where(dt_left <= dt_right, left, right)
    best_dt = np.minimum(dt_left, dt_right)

    keep = best_dt <= max_dt
    if not keep.any():
        raise NoOverlap(
            f"no frame has a ground-truth sample within {max_dt!r} s"
        )
    retained = np.bincount(traj.submap_ids[keep], minlength=traj.submap_count)
    empty = np.flatnonzero(retained == 0)
    if empty.size:
        raise EmptySubmapAfterAlignment(int(empty[0]))

    dropped = int((~keep).sum())
    if dropped:
        log.info("dropped %d of %d frames with no ground truth within %g s",
                 dropped, traj.frame_count, max_dt)

    frames = tuple(f for f, k in zip(traj.frames, keep) if k)
    aligned_traj = Trajectory(frames=frames, submap_count=traj.submap_count)
    picked = nearest[keep]
    return AlignedTrajectory(
        trajectory=aligned_traj,
        gt_positions=gt.positions[picked],
        gt_orientations=gt.orientations[picked],
        dropped_frame_count=dropped,
    )
