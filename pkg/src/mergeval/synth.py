"""Synthetic multimap worlds with controllable revisit structure.

The world is a single corridor of places, 30 m apart, each with a fixed
latent unit descriptor. The agent walks the corridor one place per frame;
after every submap a dropout gap elapses. A revisiting submap starts at a
uniformly chosen already-visited place (and may run past the visited end),
otherwise it continues into fresh places. Frame descriptors are the latent
place descriptor plus isotropic Gaussian noise, renormalized.

The generator is a PCG64 stream seeded from the config, with a fixed draw
order (latents; then per submap: frame count, revisit coin, revisit start,
per-frame noise, dropout gap). The same seed therefore yields bit-identical
worlds, and changing only the noise scale keeps the walk identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig
from .model import (
    AdjacencyMatrix,
    DescriptorSet,
    FrameRecord,
    GroundTruthTrack,
    Trajectory,
    validate_trajectory,
)

PLACE_SPACING_M = 30.0  # distinct places never fall inside the default 10 m gate

_IDENTITY_QUAT = (1.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class WorldConfig:
    """Knobs of the synthetic world generator."""

    num_places: int
    num_submaps: int
    frames_per_submap: tuple[int, int]      # inclusive range
    revisit_probability: float
    descriptor_dim: int
    descriptor_noise_sigma: float
    dropout_gap: tuple[float, float]        # seconds, inclusive range
    frame_period: float                     # seconds between frames of a submap
    rng_seed: int

    def __post_init__(self):
        lo, hi = self.frames_per_submap
        gap_lo, gap_hi = self.dropout_gap
        if self.num_submaps < 1:
            raise InvalidConfig("num_submaps must be >= 1")
        if not (1 <= lo <= hi):
            raise InvalidConfig(f"bad frames_per_submap range ({lo}, {hi})")
        if not 0.0 <= self.revisit_probability <= 1.0:
            raise InvalidConfig("revisit_probability must be in [0, 1]")
        if self.descriptor_dim < 1:
            raise InvalidConfig("descriptor_dim must be >= 1")
        if self.descriptor_noise_sigma < 0.0:
            raise InvalidConfig("descriptor_noise_sigma must be >= 0")
        if not (0.0 < gap_lo <= gap_hi):
            raise InvalidConfig(
                f"bad dropout_gap range ({gap_lo}, {gap_hi}); gaps must be positive "
                "so timestamps stay strictly increasing"
            )
        if not self.frame_period > 0.0:
            raise InvalidConfig("frame_period must be > 0")
        if self.num_places < self.num_submaps * hi:
            raise InvalidConfig(
                f"num_places={self.num_places} cannot hold {self.num_submaps} submaps "
                f"of up to {hi} frames; need at least {self.num_submaps * hi}"
            )


@dataclass(frozen=True, eq=False)
class SyntheticWorld:
    """Generated world plus the generator's own truth about place sharing."""

    trajectory: Trajectory
    descriptors: DescriptorSet
    ground_truth: GroundTruthTrack
    true_adjacency: AdjacencyMatrix   # submaps share at least one place
    place_ids: np.ndarray             # (N,) place index per frame


def generate_world_detailed(cfg: WorldConfig) -> SyntheticWorld:
    rng = np.random.Generator(np.random.PCG64(cfg.rng_seed))
    lo, hi = cfg.frames_per_submap
    gap_lo, gap_hi = cfg.dropout_gap

    latents = rng.standard_normal((cfg.num_places, cfg.descriptor_dim))
    latents /= np.linalg.norm(latents, axis=1, keepdims=True)

    frames = []
    descriptors = []
    place_ids = []
    submap_places: list[set[int]] = []
    visited_high = 0
    t = 0.0
    for m in range(cfg.num_submaps):
        n = int(rng.integers(lo, hi + 1))
        start = visited_high
        if m > 0 and rng.random() < cfg.revisit_probability:
            start = int(rng.integers(0, visited_high))
        places = range(start, start + n)
        submap_places.append(set(places))
        visited_high = max(visited_high, start + n)

        for place in places:
            noise = rng.standard_normal(cfg.descriptor_dim)
            desc = latents[place] + cfg.descriptor_noise_sigma * noise
            norm = np.linalg.norm(desc)
            if norm < 1.0e-12:
                desc = latents[place]
                norm = 1.0
            descriptors.append(desc / norm)
            frames.append(
                FrameRecord(
                    timestamp=t,
                    position=(place * PLACE_SPACING_M, 0.0, 0.0),
                    orientation=_IDENTITY_QUAT,
                    submap_id=m,
                    descriptor_row=len(descriptors) - 1,
                )
            )
            place_ids.append(place)
            last_t = t
            t += cfg.frame_period
        if m < cfg.num_submaps - 1:
            t = last_t + float(rng.uniform(gap_lo, gap_hi))

    trajectory = validate_trajectory(frames)
    adjacency = np.eye(cfg.num_submaps, dtype=bool)
    for i in range(cfg.num_submaps):
        for j in range(i + 1, cfg.num_submaps):
            if submap_places[i] & submap_places[j]:
                adjacency[i, j] = adjacency[j, i] = True

    return SyntheticWorld(
        trajectory=trajectory,
        descriptors=DescriptorSet(data=np.vstack(descriptors)),
        ground_truth=GroundTruthTrack(
            timestamps=trajectory.timestamps,
            positions=trajectory.positions,
            orientations=trajectory.orientations,
        ),
        true_adjacency=AdjacencyMatrix(values=adjacency),
        place_ids=np.array(place_ids, dtype=np.int64),
    )


def generate_world(cfg: WorldConfig) -> tuple[Trajectory, DescriptorSet, GroundTruthTrack]:
    """Generate a world; the ground-truth track covers every frame exactly."""
    world = generate_world_detailed(cfg)
    return world.trajectory, world.descriptors, world.ground_truth
