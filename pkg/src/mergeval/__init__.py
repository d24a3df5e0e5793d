"""mergeval: evaluate submap-merging strategies for multimap visual SLAM.

The pipeline ingests a submap trajectory, precomputed holistic descriptors,
and a ground-truth track; predicts submap adjacency from time gaps and/or
descriptor distances; closes adjacency into reachability; and scores the
result with frame-weighted precision-coverage curves and their AUC.
"""

from .errors import (
    DegenerateEvaluation,
    DimensionMismatch,
    DuplicateTimestamp,
    EmptySubmapAfterAlignment,
    EmptyTrajectory,
    InvalidConfig,
    InvalidOrientation,
    MergeEvalError,
    MissingDescriptor,
    NoGroundTruthMatches,
    NonMonotonicTimestamps,
    NoOverlap,
    ParseError,
    ZeroNormDescriptor,
)
from .model import (
    AdjacencyMatrix,
    Curve,
    CurvePoint,
    DescriptorSet,
    FrameDistanceMatrix,
    FrameRecord,
    GroundTruthTrack,
    MergeRuleParams,
    ReachabilityMatrix,
    SubmapDistanceMatrix,
    Trajectory,
    WeightVector,
    validate_trajectory,
)
from .ingest import (
    AlignedTrajectory,
    associate_ground_truth,
    attach_descriptor_rows,
    format_descriptors,
    format_ground_truth,
    format_trajectory,
    parse_descriptors,
    parse_ground_truth,
    parse_trajectory,
)
from .distances import (
    aggregate_to_submaps,
    format_distance_matrix,
    frame_descriptor_distances,
    temporal_submap_distances,
)
from .rules import (
    RULE_PRESETS,
    combined_adjacency,
    format_adjacency,
    ground_truth_adjacency,
    quaternion_angle_deg,
    threshold_adjacency,
)
from .metrics import (
    FramePRCurve,
    FramePRPoint,
    auc,
    format_curve_csv,
    frame_precision_recall,
    parse_curve_csv,
    precision_coverage,
    sweep_curve,
    transitive_closure,
    weight_vector,
)
from .oracles import closure_oracle, metrics_oracle
from .synth import SyntheticWorld, WorldConfig, generate_world, generate_world_detailed

__version__ = "0.1.0"

__all__ = [
    "AdjacencyMatrix",
    "AlignedTrajectory",
    "Curve",
    "CurvePoint",
    "DegenerateEvaluation",
    "DescriptorSet",
    "DimensionMismatch",
    "DuplicateTimestamp",
    "EmptySubmapAfterAlignment",
    "EmptyTrajectory",
    "FrameDistanceMatrix",
    "FramePRCurve",
    "FramePRPoint",
    "FrameRecord",
    "GroundTruthTrack",
    "InvalidConfig",
    "InvalidOrientation",
    "MergeEvalError",
    "MergeRuleParams",
    "MissingDescriptor",
    "NoGroundTruthMatches",
    "NonMonotonicTimestamps",
    "NoOverlap",
    "ParseError",
    "ReachabilityMatrix",
    "RULE_PRESETS",
    "SubmapDistanceMatrix",
    "SyntheticWorld",
    "Trajectory",
    "WeightVector",
    "WorldConfig",
    "ZeroNormDescriptor",
    "aggregate_to_submaps",
    "associate_ground_truth",
    "attach_descriptor_rows",
    "auc",
    "closure_oracle",
    "combined_adjacency",
    "format_adjacency",
    "format_curve_csv",
    "format_descriptors",
    "format_distance_matrix",
    "format_ground_truth",
    "format_trajectory",
    "frame_descriptor_distances",
    "frame_precision_recall",
    "generate_world",
    "generate_world_detailed",
    "ground_truth_adjacency",
    "metrics_oracle",
    "parse_curve_csv",
    "parse_descriptors",
    "parse_ground_truth",
    "parse_trajectory",
    "precision_coverage",
    "quaternion_angle_deg",
    "sweep_curve",
    "temporal_submap_distances",
    "threshold_adjacency",
    "transitive_closure",
    "validate_trajectory",
    "weight_vector",
]
