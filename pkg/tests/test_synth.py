import itertools

import numpy as np
import pytest

from mergeval import (
    AdjacencyMatrix,
    DegenerateEvaluation,
    InvalidConfig,
    WorldConfig,
    aggregate_to_submaps,
    associate_ground_truth,
    closure_oracle,
    frame_descriptor_distances,
    generate_world,
    generate_world_detailed,
    ground_truth_adjacency,
    metrics_oracle,
    precision_coverage,
    threshold_adjacency,
    transitive_closure,
    weight_vector,
)

from helpers import make_trajectory


def _cfg(**overrides):
    base = dict(
        num_places=60,
        num_submaps=3,
        frames_per_submap=(6, 8),
        revisit_probability=1.0,
        descriptor_dim=8,
        descriptor_noise_sigma=0.0,
        dropout_gap=(5.0, 10.0),
        frame_period=0.5,
        rng_seed=0,
    )
    base.update(overrides)
    return WorldConfig(**base)


def test_same_seed_is_bit_identical():
    a = generate_world_detailed(_cfg(descriptor_noise_sigma=0.2))
    b = generate_world_detailed(_cfg(descriptor_noise_sigma=0.2))
    assert np.array_equal(a.trajectory.timestamps, b.trajectory.timestamps)
    assert np.array_equal(a.trajectory.submap_ids, b.trajectory.submap_ids)
    assert np.array_equal(a.descriptors.data, b.descriptors.data)
    assert np.array_equal(a.ground_truth.positions, b.ground_truth.positions)
    assert np.array_equal(a.place_ids, b.place_ids)


def test_sigma_does_not_change_the_walk():
    quiet = generate_world_detailed(_cfg(descriptor_noise_sigma=0.0))
    noisy = generate_world_detailed(_cfg(descriptor_noise_sigma=0.5))
    assert np.array_equal(quiet.place_ids, noisy.place_ids)
    assert np.array_equal(quiet.trajectory.timestamps, noisy.trajectory.timestamps)


def test_noiseless_full_revisit_world():
    # seed 0 makes all three submaps pairwise share places
    world = generate_world_detailed(_cfg())
    traj = world.trajectory
    groups = [set(world.place_ids[traj.submap_ids == m]) for m in range(3)]
    for i, j in itertools.combinations(range(3), 2):
        assert groups[i] & groups[j]

    aligned = associate_ground_truth(traj, world.ground_truth)
    assert ground_truth_adjacency(aligned).values.all()

    fdm = frame_descriptor_distances(world.descriptors)
    s_vpr = aggregate_to_submaps(fdm, traj)
    for i, j in itertools.combinations(range(3), 2):
        assert s_vpr.values[i, j] == 0.0  # shared place, sigma 0


def test_no_revisit_world_has_identity_adjacency():
    world = generate_world_detailed(_cfg(revisit_probability=0.0))
    assert np.array_equal(world.true_adjacency.values, np.eye(3, dtype=bool))
    aligned = associate_ground_truth(world.trajectory, world.ground_truth)
    # places are 30 m apart, beyond the 10 m gate
    assert np.array_equal(
        ground_truth_adjacency(aligned).values, np.eye(3, dtype=bool)
    )


def test_noiseless_zero_threshold_recovers_truth():
    world = generate_world_detailed(_cfg(revisit_probability=0.6, num_submaps=6,
                                         num_places=100, rng_seed=5))
    fdm = frame_descriptor_distances(world.descriptors)
    s_vpr = aggregate_to_submaps(fdm, world.trajectory)
    recovered = threshold_adjacency(s_vpr, 0.0)
    assert np.array_equal(recovered.values, world.true_adjacency.values)


def test_ground_truth_covers_all_frames():
    world = generate_world_detailed(_cfg(descriptor_noise_sigma=0.1))
    assert np.array_equal(world.ground_truth.timestamps, world.trajectory.timestamps)
    for max_dt in (1e-6, 0.05, 10.0):
        aligned = associate_ground_truth(world.trajectory, world.ground_truth, max_dt)
        assert aligned.dropped_frame_count == 0


def test_descriptor_rows_are_a_bijection():
    world = generate_world_detailed(_cfg())
    rows = world.trajectory.descriptor_rows
    assert sorted(rows.tolist()) == list(range(world.trajectory.frame_count))
    assert world.descriptors.count == world.trajectory.frame_count


def test_frames_per_submap_within_range():
    world = generate_world_detailed(_cfg(num_submaps=8, num_places=200,
                                         frames_per_submap=(4, 9), rng_seed=2))
    counts = weight_vector(world.trajectory).counts
    assert counts.min() >= 4 and counts.max() <= 9


def test_long_gaps_shrink_time_rule_coverage_at_fixed_threshold():
    from mergeval import temporal_submap_distances

    tau_star = 5.0  # e.g. f_time * tau_time for comb2
    worlds = {}
    for name, gaps in (("short", (1.0, 2.0)), ("long", (60.0, 300.0))):
        world = generate_world_detailed(
            _cfg(revisit_probability=0.0, num_submaps=5, num_places=100,
                 dropout_gap=gaps, rng_seed=9)
        )
        aligned = associate_ground_truth(world.trajectory, world.ground_truth)
        r_gt = transitive_closure(ground_truth_adjacency(aligned))
        w = weight_vector(aligned.trajectory)
        s_time = temporal_submap_distances(aligned.trajectory)
        reach = transitive_closure(threshold_adjacency(s_time, tau_star))
        _, coverage, _, _ = precision_coverage(reach, r_gt, w)
        worlds[name] = coverage
    assert worlds["long"] < worlds["short"]
    assert worlds["long"] == 0.0 and worlds["short"] == 1.0


def test_invalid_configs():
    with pytest.raises(InvalidConfig):
        _cfg(num_places=10)  # cannot hold 3 submaps of up to 8 frames
    with pytest.raises(InvalidConfig):
        _cfg(frames_per_submap=(0, 4))
    with pytest.raises(InvalidConfig):
        _cfg(revisit_probability=1.5)
    with pytest.raises(InvalidConfig):
        _cfg(dropout_gap=(0.0, 5.0))  # zero gap would duplicate timestamps
    with pytest.raises(InvalidConfig):
        _cfg(frame_period=0.0)
    with pytest.raises(InvalidConfig):
        _cfg(descriptor_noise_sigma=-0.1)


def test_generate_world_returns_spec_triple():
    traj, descs, gt = generate_world(_cfg())
    assert traj.frame_count == descs.count == gt.sample_count


def test_closure_oracle_examples():
    identity = AdjacencyMatrix(values=np.eye(3, dtype=bool))
    assert np.array_equal(closure_oracle(identity).values, np.eye(3, dtype=bool))

    full = AdjacencyMatrix(values=np.ones((3, 3), dtype=bool))
    assert closure_oracle(full).values.all()

    cliques = np.eye(4, dtype=bool)
    cliques[0, 1] = cliques[1, 0] = True
    cliques[2, 3] = cliques[3, 2] = True
    r = closure_oracle(AdjacencyMatrix(values=cliques))
    assert r.values[0, 1] and r.values[2, 3]
    assert not r.values[0, 2] and not r.values[1, 3]


def test_metrics_oracle_mirrors_examples():
    from mergeval import WeightVector

    chain = np.eye(3, dtype=bool)
    chain[0, 1] = chain[1, 0] = True
    r = transitive_closure(AdjacencyMatrix(values=chain))
    traj = make_trajectory([0, 1, 1, 2, 2, 2])
    p, c = metrics_oracle(r, r, traj)
    pp, cc, _, _ = precision_coverage(r, r, WeightVector(counts=[1, 2, 3]))
    assert (p, c) == (pp, cc)


def test_metrics_oracle_degenerate():
    from mergeval import ReachabilityMatrix

    r = ReachabilityMatrix(values=np.eye(1, dtype=bool))
    with pytest.raises(DegenerateEvaluation):
        metrics_oracle(r, r, make_trajectory([0, 0]))
