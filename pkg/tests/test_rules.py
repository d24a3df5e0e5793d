import numpy as np
import pytest

from mergeval import (
    AlignedTrajectory,
    DimensionMismatch,
    MergeRuleParams,
    RULE_PRESETS,
    SubmapDistanceMatrix,
    combined_adjacency,
    format_adjacency,
    ground_truth_adjacency,
    quaternion_angle_deg,
    threshold_adjacency,
)

from helpers import make_trajectory, random_distance_matrix, symmetric_pairs


def _dist(values, kind="vpr"):
    return SubmapDistanceMatrix(values=np.asarray(values, dtype=float), kind=kind)


def test_threshold_basic():
    s = _dist([[0.0, 0.2, 0.8],
               [0.2, 0.0, 0.5],
               [0.8, 0.5, 0.0]])
    a = threshold_adjacency(s, 0.5)
    assert symmetric_pairs(a.values) == {(0, 1), (1, 2)}


def test_threshold_below_everything_gives_identity():
    s = _dist([[0.0, 0.2], [0.2, 0.0]])
    a = threshold_adjacency(s, -1.0)
    assert np.array_equal(a.values, np.eye(2, dtype=bool))


def test_threshold_at_max_connects_everything():
    s = _dist([[0.0, 0.2, 0.8], [0.2, 0.0, 0.5], [0.8, 0.5, 0.0]])
    a = threshold_adjacency(s, float(s.values.max()))
    assert a.values.all()


def test_threshold_monotone_in_tau():
    rng = np.random.default_rng(13)
    for _ in range(20):
        s = random_distance_matrix(rng, int(rng.integers(2, 9)))
        lo, hi = sorted(rng.uniform(0.0, 1.0, size=2))
        a_lo = threshold_adjacency(s, lo).values
        a_hi = threshold_adjacency(s, hi).values
        assert not np.any(a_lo & ~a_hi)


def _pair_matrices(s_time_val, s_vpr_val):
    s_time = _dist([[0.0, s_time_val], [s_time_val, 0.0]], kind="time")
    s_vpr = _dist([[0.0, s_vpr_val], [s_vpr_val, 0.0]])
    return s_time, s_vpr


def test_combined_time_clause():
    # Comb. 1 preset: tau_time=2 s, f_time=10, f_vpr=2
    params = RULE_PRESETS["comb1"]
    assert (params.tau_time, params.f_time, params.f_vpr) == (2.0, 10.0, 2.0)
    s_time, s_vpr = _pair_matrices(1.5, 1e9)
    a = combined_adjacency(s_time, s_vpr, params, tau_vpr=0.3)
    assert a.values[0, 1]


def test_combined_relaxed_clause():
    # hand evaluation: 15 <= 10*2 and 0.5 <= 2*0.3 -> adjacent
    s_time, s_vpr = _pair_matrices(15.0, 0.5)
    a = combined_adjacency(s_time, s_vpr, RULE_PRESETS["comb1"], tau_vpr=0.3)
    assert a.values[0, 1]
    # and not through either strict clause alone
    assert not (15.0 <= 2.0) and not (0.5 <= 0.3)


def test_comb2_preset_values():
    params = RULE_PRESETS["comb2"]
    assert (params.tau_time, params.f_time, params.f_vpr) == (0.5, 10.0, 4.0)


def test_combined_degenerates_to_vpr_rule():
    params = MergeRuleParams(kind="combined", tau_time=0.0, f_time=1.0, f_vpr=2.0)
    rng = np.random.default_rng(23)
    for _ in range(10):
        m = int(rng.integers(2, 8))
        s_vpr = random_distance_matrix(rng, m)
        s_time = random_distance_matrix(rng, m, kind="time", scale=9.0)
        if np.any(s_time.values[~np.eye(m, dtype=bool)] == 0.0):
            continue  # needs strictly positive off-diagonal time distances
        tau = float(rng.uniform(0.0, 1.0))
        a = combined_adjacency(s_time, s_vpr, params, tau)
        b = threshold_adjacency(s_vpr, tau)
        assert np.array_equal(a.values, b.values)


def test_combined_equals_or_of_clauses():
    rng = np.random.default_rng(29)
    for _ in range(20):
        m = int(rng.integers(2, 9))
        s_vpr = random_distance_matrix(rng, m)
        s_time = random_distance_matrix(rng, m, kind="time", scale=30.0)
        params = MergeRuleParams(
            kind="combined",
            tau_time=float(rng.uniform(0.0, 10.0)),
            f_time=float(rng.uniform(1.0, 10.0)),
            f_vpr=float(rng.uniform(1.0, 4.0)),
        )
        tau = float(rng.uniform(0.0, 1.0))
        clause1 = s_vpr.values <= tau
        clause2 = s_time.values <= params.tau_time
        clause3 = (s_time.values <= params.f_time * params.tau_time) & (
            s_vpr.values <= params.f_vpr * tau
        )
        want = clause1 | clause2 | clause3
        np.fill_diagonal(want, True)
        got = combined_adjacency(s_time, s_vpr, params, tau)
        assert np.array_equal(got.values, want)


def test_combined_dimension_mismatch():
    s_time = _dist(np.zeros((2, 2)), kind="time")
    s_vpr = _dist(np.zeros((3, 3)))
    with pytest.raises(DimensionMismatch):
        combined_adjacency(s_time, s_vpr, RULE_PRESETS["comb1"], 0.1)
    with pytest.raises(ValueError):
        combined_adjacency(s_time, _dist(np.zeros((2, 2))),
                           MergeRuleParams(kind="time"), 0.1)


def test_quaternion_angle():
    identity = np.array([1.0, 0, 0, 0])
    assert quaternion_angle_deg(identity, identity) == 0.0
    quarter_turn = np.array([np.cos(np.pi / 4), 0, 0, np.sin(np.pi / 4)])  # 90 deg about z
    assert quaternion_angle_deg(identity, quarter_turn) == pytest.approx(90.0, abs=1e-9)
    # q and -q represent the same rotation
    assert quaternion_angle_deg(identity, -identity) == 0.0


def _aligned(positions, quats, submap_ids):
    traj = make_trajectory(submap_ids)
    return AlignedTrajectory(
        trajectory=traj,
        gt_positions=np.asarray(positions, dtype=float),
        gt_orientations=np.asarray(quats, dtype=float),
        dropped_frame_count=0,
    )


def _z_rot(deg):
    half = np.radians(deg) / 2.0
    return [np.cos(half), 0.0, 0.0, np.sin(half)]


def test_gt_adjacency_identical_pose():
    aligned = _aligned([[0, 0, 0], [0, 0, 0]], [_z_rot(0), _z_rot(0)], [0, 1])
    a = ground_truth_adjacency(aligned)
    assert a.values[0, 1]


def test_gt_adjacency_rotation_gate():
    # 5 m apart passes the distance gate, 90 deg fails the rotation gate
    aligned = _aligned([[0, 0, 0], [5, 0, 0]], [_z_rot(0), _z_rot(90)], [0, 1])
    a = ground_truth_adjacency(aligned)
    assert not a.values[0, 1]


def test_gt_adjacency_distance_gate():
    aligned = _aligned([[0, 0, 0], [10.5, 0, 0]], [_z_rot(0), _z_rot(0)], [0, 1])
    assert not ground_truth_adjacency(aligned).values[0, 1]
    assert ground_truth_adjacency(aligned, eps_dist=11.0).values[0, 1]


def test_gt_adjacency_needs_both_gates_on_same_pair():
    # frame A of submap 1 is near in position but rotated; frame B is aligned
    # in rotation but far away -> no single pair passes both gates
    aligned = _aligned(
        [[0, 0, 0], [1, 0, 0], [100, 0, 0]],
        [_z_rot(0), _z_rot(90), _z_rot(0)],
        [0, 1, 1],
    )
    assert not ground_truth_adjacency(aligned).values[0, 1]


def test_gt_adjacency_rigid_transform_invariant():
    rng = np.random.default_rng(31)
    n, m = 24, 5
    ids = np.concatenate([np.arange(m), rng.integers(0, m, size=n - m)])
    positions = rng.uniform(-20, 20, size=(n, 3))
    quats = rng.standard_normal((n, 4))
    quats /= np.linalg.norm(quats, axis=1, keepdims=True)
    aligned = _aligned(positions, quats, ids.tolist())
    base = ground_truth_adjacency(aligned)

    # rigid transform: rotate 90 deg about z and translate
    rot = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    q_rot = np.array(_z_rot(90))

    def quat_mul(q1, q2):
        w1, x1, y1, z1 = q1
        w2, x2, y2, z2 = q2
        return np.array([
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ])

    moved = _aligned(
        positions @ rot.T + np.array([100.0, -50.0, 3.0]),
        np.stack([quat_mul(q_rot, q) for q in quats]),
        ids.tolist(),
    )
    assert np.array_equal(base.values, ground_truth_adjacency(moved).values)


def test_adjacency_dump_format():
    aligned = _aligned([[0, 0, 0], [0, 0, 0]], [_z_rot(0), _z_rot(0)], [0, 1])
    text = format_adjacency(ground_truth_adjacency(aligned), "gt", 10.0)
    lines = text.splitlines()
    assert lines[0] == "# M=2 rule=gt tau=10.0"
    assert lines[1] == "1,1"
