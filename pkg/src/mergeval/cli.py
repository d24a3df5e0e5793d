"""Command-line surface: synth, eval, sweep, distmat, gt, report.

Option precedence is flags over config file over built-in defaults. The
config file is flat ``key=value`` text mirroring the flag names. All outputs
are written to a temp file first and renamed into place, so a failing run
never leaves partial files; identical inputs always produce byte-identical
CSV/JSON/SVG outputs.
"""

from __future__ import annotations

import contextlib
import json
import os
import tempfile
from pathlib import Path

import click

from . import __version__
from .distances import (
    aggregate_to_submaps,
    format_distance_matrix,
    frame_descriptor_distances,
    temporal_submap_distances,
)
from .errors import MergeEvalError
from .ingest import (
    DEFAULT_MAX_DT,
    associate_ground_truth,
    attach_descriptor_rows,
    format_descriptors,
    format_ground_truth,
    format_trajectory,
    parse_descriptors,
    parse_ground_truth,
    parse_trajectory,
)
from .metrics import (
    format_curve_csv,
    parse_curve_csv,
    sweep_curve,
    transitive_closure,
    weight_vector,
)
from .model import MergeRuleParams
from .rules import (
    DEFAULT_EPS_DIST,
    DEFAULT_EPS_ROT,
    RULE_PRESETS,
    format_adjacency,
    ground_truth_adjacency,
)
from .svgplot import render_curves_svg
from .synth import WorldConfig, generate_world_detailed

RULE_CHOICES = ("time", "vpr", "comb1", "comb2", "custom")
RULES_NEEDING_DESCRIPTORS = ("vpr", "comb1", "comb2", "custom")

DEFAULTS = {
    "rule": "time,vpr,comb1,comb2",
    "metric": "cosine",
    "eps_dist": DEFAULT_EPS_DIST,
    "eps_rot": DEFAULT_EPS_ROT,
    "max_dt": DEFAULT_MAX_DT,
    "tau_time": 2.0,
    "f_time": 10.0,
    "f_vpr": 2.0,
    "out": "out",
    "seed": 0,
    # synth knobs
    "num_submaps": 12,
    "num_places": None,  # derived from num_submaps * frames_max when unset
    "frames_min": 5,
    "frames_max": 15,
    "revisit_prob": 0.5,
    "descriptor_dim": 16,
    "noise_sigma": 0.1,
    "gap_min": 30.0,
    "gap_max": 120.0,
    "frame_period": 0.5,
}


def _load_config_file(path: str | None) -> dict[str, str]:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise click.UsageError(f"config file not found: {path}")
    values = {}
    for raw in p.read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise click.UsageError(f"config line is not key=value: {line!r}")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


class _Settings:
    """Flag > config file > defaults, with type casts on the config strings."""

    def __init__(self, flags: dict, config_path: str | None):
        self.flags = flags
        self.config = _load_config_file(config_path)

    def get(self, key: str, cast=str):
        flag = self.flags.get(key)
        if flag is not None:
            return flag
        if key in self.config:
            raw = self.config[key]
            try:
                return cast(raw) if cast is not bool else raw.lower() in ("1", "true", "yes")
            except ValueError:
                raise click.UsageError(f"config value {key}={raw!r} is not a valid {cast.__name__}")
        return DEFAULTS.get(key)

    def path(self, key: str, required: bool) -> Path | None:
        value = self.get(key)
        if value is None:
            if required:
                raise click.UsageError(f"missing required input: --{key.replace('_', '-')}")
            return None
        p = Path(value)
        if not p.is_file():
            raise click.UsageError(f"--{key.replace('_', '-')}: file not found: {p}")
        return p


@contextlib.contextmanager
def _stage(name: str):
    """Map pipeline failures to exit code 1 with the failing stage named."""
    try:
        yield
    except (MergeEvalError, OSError, ValueError) as exc:
        click.echo(f"error [{name}]: {exc}", err=True)
        raise SystemExit(1)


def _write_atomic(path: Path, payload: str | bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(payload, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode) as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _parse_rules(value: str) -> tuple[str, ...]:
    rules = tuple(r.strip() for r in value.split(",") if r.strip())
    if not rules:
        raise click.UsageError("no rules requested")
    for r in rules:
        if r not in RULE_CHOICES:
            raise click.UsageError(f"unknown rule {r!r}; choose from {', '.join(RULE_CHOICES)}")
    return rules


def _rule_params(rule: str, settings: _Settings) -> MergeRuleParams | None:
    """Sweep parameters for a named rule; None for the single-threshold rules."""
    if rule in ("time", "vpr"):
        return None
    if rule in RULE_PRESETS:
        return RULE_PRESETS[rule]
    return MergeRuleParams(
        kind="combined",
        tau_time=settings.get("tau_time", float),
        f_time=settings.get("f_time", float),
        f_vpr=settings.get("f_vpr", float),
    )


def _json_bytes(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _summary_entry(rule, params, curve, m, n) -> dict:
    return {
        "rule": rule,
        "params": None if params is None else {
            "tau_time": params.tau_time,
            "f_time": params.f_time,
            "f_vpr": params.f_vpr,
        },
        "auc": curve.auc,
        "num_points": len(curve.points),
        "M": m,
        "N": n,
    }


@click.group()
@click.version_option(version=__version__, prog_name="mergeval")
def main():
    """Evaluate submap-merging strategies on multimap SLAM trajectories."""


@main.command("eval")
@click.option("--trajectory", type=str, default=None, help="Submap trajectory file.")
@click.option("--descriptors", type=str, default=None, help="Binary descriptor file (VPRD).")
@click.option("--gt", type=str, default=None, help="Ground-truth file, TUM format.")
@click.option("--rule", "rules", type=str, default=None,
              help="Comma-separated rules: time,vpr,comb1,comb2,custom.")
@click.option("--tau-time", type=float, default=None, help="Strict time threshold [s] (custom rule).")
@click.option("--f-time", type=float, default=None, help="Time relaxation factor (custom rule).")
@click.option("--f-vpr", type=float, default=None, help="Visual relaxation factor (custom rule).")
@click.option("--metric", type=click.Choice(["cosine", "euclidean"]), default=None,
              help="Descriptor distance metric.")
@click.option("--eps-dist", type=float, default=None, help="Ground-truth distance gate [m].")
@click.option("--eps-rot", type=float, default=None, help="Ground-truth rotation gate [deg].")
@click.option("--max-dt", type=float, default=None, help="Ground-truth association window [s].")
@click.option("--out", type=str, default=None, help="Output directory.")
@click.option("--config", "config_path", type=str, default=None, help="key=value config file.")
def cmd_eval(config_path, rules, **flags):
    """Run the full pipeline and write curves, a summary, and a plot."""
    settings = _Settings(flags, config_path)
    rule_names = _parse_rules(rules if rules is not None else settings.get("rule"))
    out_dir = Path(settings.get("out"))
    needs_vpr = any(r in RULES_NEEDING_DESCRIPTORS for r in rule_names)

    trajectory_path = settings.path("trajectory", required=True)
    gt_path = settings.path("gt", required=True)
    descriptor_path = settings.path("descriptors", required=needs_vpr)

    with _stage("ingest"):
        with open(trajectory_path) as fh:
            traj = parse_trajectory(fh)
        with open(gt_path) as fh:
            track = parse_ground_truth(fh)
        if needs_vpr:
            with open(descriptor_path, "rb") as fh:
                descriptors = parse_descriptors(fh)
            traj = attach_descriptor_rows(traj, descriptors)

    with _stage("ground-truth"):
        aligned = associate_ground_truth(traj, track, max_dt=settings.get("max_dt", float))
        if aligned.dropped_frame_count:
            click.echo(f"dropped {aligned.dropped_frame_count} frames without ground truth")
        a_gt = ground_truth_adjacency(
            aligned,
            eps_dist=settings.get("eps_dist", float),
            eps_rot=settings.get("eps_rot", float),
        )
        r_gt = transitive_closure(a_gt)
        weights = weight_vector(aligned.trajectory)

    with _stage("distances"):
        s_time = temporal_submap_distances(aligned.trajectory)
        s_vpr = None
        if needs_vpr:
            fdm = frame_descriptor_distances(descriptors, metric=settings.get("metric"))
            s_vpr = aggregate_to_submaps(fdm, aligned.trajectory)

    curves = {}
    params_by_rule = {}
    with _stage("sweep"):
        for rule in rule_names:
            params = _rule_params(rule, settings)
            params_by_rule[rule] = params
            kind = "time" if rule == "time" else ("vpr" if rule == "vpr" else "combined")
            curves[rule] = sweep_curve(
                kind, r_gt, weights, s_time=s_time, s_vpr=s_vpr, params=params,
            )

    m = aligned.trajectory.submap_count
    n = aligned.trajectory.frame_count
    with _stage("write"):
        for rule, curve in curves.items():
            path = out_dir / f"curve_{rule}.csv"
            _write_atomic(path, format_curve_csv(curve, rule, m, n, params_by_rule[rule]))
            click.echo(f"wrote {path}")
        # entries sorted by rule name so `report` reproduces the same summary
        summary = {
            "M": m,
            "N": n,
            "rules": [_summary_entry(r, params_by_rule[r], curves[r], m, n)
                      for r in sorted(rule_names)],
        }
        _write_atomic(out_dir / "summary.json", _json_bytes(summary))
        click.echo(f"wrote {out_dir / 'summary.json'}")
        _write_atomic(out_dir / "pc_curves.svg", render_curves_svg(curves))
        click.echo(f"wrote {out_dir / 'pc_curves.svg'}")
    for rule in rule_names:
        click.echo(f"auc[{rule}] = {curves[rule].auc:.6f}")


@main.command("sweep")
@click.option("--trajectory", type=str, default=None)
@click.option("--descriptors", type=str, default=None)
@click.option("--gt", type=str, default=None)
@click.option("--rule", type=str, default=None, help="Single rule to sweep.")
@click.option("--tau-time", type=float, default=None)
@click.option("--f-time", type=float, default=None)
@click.option("--f-vpr", type=float, default=None)
@click.option("--metric", type=click.Choice(["cosine", "euclidean"]), default=None)
@click.option("--eps-dist", type=float, default=None)
@click.option("--eps-rot", type=float, default=None)
@click.option("--max-dt", type=float, default=None)
@click.option("--out", type=str, default=None)
@click.option("--config", "config_path", type=str, default=None)
def cmd_sweep(config_path, rule, **flags):
    """Sweep one rule and write its curve CSV."""
    settings = _Settings(flags, config_path)
    if rule is None:
        rule = settings.get("rule")
        if "," in rule:
            raise click.UsageError("sweep takes exactly one rule")
    if rule not in RULE_CHOICES:
        raise click.UsageError(f"unknown rule {rule!r}")
    out_dir = Path(settings.get("out"))
    needs_vpr = rule in RULES_NEEDING_DESCRIPTORS

    trajectory_path = settings.path("trajectory", required=True)
    gt_path = settings.path("gt", required=True)
    descriptor_path = settings.path("descriptors", required=needs_vpr)

    with _stage("ingest"):
        with open(trajectory_path) as fh:
            traj = parse_trajectory(fh)
        with open(gt_path) as fh:
            track = parse_ground_truth(fh)
        if needs_vpr:
            with open(descriptor_path, "rb") as fh:
                descriptors = parse_descriptors(fh)
            traj = attach_descriptor_rows(traj, descriptors)

    with _stage("ground-truth"):
        aligned = associate_ground_truth(traj, track, max_dt=settings.get("max_dt", float))
        a_gt = ground_truth_adjacency(
            aligned,
            eps_dist=settings.get("eps_dist", float),
            eps_rot=settings.get("eps_rot", float),
        )
        r_gt = transitive_closure(a_gt)
        weights = weight_vector(aligned.trajectory)

    with _stage("distances"):
        s_time = temporal_submap_distances(aligned.trajectory)
        s_vpr = None
        if needs_vpr:
            fdm = frame_descriptor_distances(descriptors, metric=settings.get("metric"))
            s_vpr = aggregate_to_submaps(fdm, aligned.trajectory)

    with _stage("sweep"):
        params = _rule_params(rule, settings)
        kind = "time" if rule == "time" else ("vpr" if rule == "vpr" else "combined")
        curve = sweep_curve(kind, r_gt, weights, s_time=s_time, s_vpr=s_vpr, params=params)

    with _stage("write"):
        path = out_dir / f"curve_{rule}.csv"
        _write_atomic(
            path,
            format_curve_csv(curve, rule, aligned.trajectory.submap_count,
                             aligned.trajectory.frame_count, params),
        )
        click.echo(f"wrote {path}")
    click.echo(f"auc[{rule}] = {curve.auc:.6f}")


@main.command("distmat")
@click.option("--trajectory", type=str, default=None)
@click.option("--descriptors", type=str, default=None)
@click.option("--kind", type=click.Choice(["time", "vpr"]), required=True)
@click.option("--metric", type=click.Choice(["cosine", "euclidean"]), default=None)
@click.option("--out", type=str, default=None)
@click.option("--config", "config_path", type=str, default=None)
def cmd_distmat(config_path, kind, **flags):
    """Compute one submap distance matrix (on the raw trajectory) and dump it."""
    settings = _Settings(flags, config_path)
    out_dir = Path(settings.get("out"))
    trajectory_path = settings.path("trajectory", required=True)
    descriptor_path = settings.path("descriptors", required=(kind == "vpr"))

    with _stage("ingest"):
        with open(trajectory_path) as fh:
            traj = parse_trajectory(fh)
        if kind == "vpr":
            with open(descriptor_path, "rb") as fh:
                descriptors = parse_descriptors(fh)
            traj = attach_descriptor_rows(traj, descriptors)

    with _stage("distances"):
        if kind == "time":
            matrix = temporal_submap_distances(traj)
        else:
            fdm = frame_descriptor_distances(descriptors, metric=settings.get("metric"))
            matrix = aggregate_to_submaps(fdm, traj)

    with _stage("write"):
        path = out_dir / f"s_{kind}.csv"
        _write_atomic(path, format_distance_matrix(matrix))
        click.echo(f"wrote {path}")


@main.command("gt")
@click.option("--trajectory", type=str, default=None)
@click.option("--gt", type=str, default=None)
@click.option("--eps-dist", type=float, default=None)
@click.option("--eps-rot", type=float, default=None)
@click.option("--max-dt", type=float, default=None)
@click.option("--out", type=str, default=None)
@click.option("--config", "config_path", type=str, default=None)
def cmd_gt(config_path, **flags):
    """Compute the ground-truth adjacency matrix and dump it as 0/1 CSV."""
    settings = _Settings(flags, config_path)
    out_dir = Path(settings.get("out"))
    trajectory_path = settings.path("trajectory", required=True)
    gt_path = settings.path("gt", required=True)
    eps_dist = settings.get("eps_dist", float)

    with _stage("ingest"):
        with open(trajectory_path) as fh:
            traj = parse_trajectory(fh)
        with open(gt_path) as fh:
            track = parse_ground_truth(fh)

    with _stage("ground-truth"):
        aligned = associate_ground_truth(traj, track, max_dt=settings.get("max_dt", float))
        if aligned.dropped_frame_count:
            click.echo(f"dropped {aligned.dropped_frame_count} frames without ground truth")
        a_gt = ground_truth_adjacency(
            aligned, eps_dist=eps_dist, eps_rot=settings.get("eps_rot", float),
        )

    with _stage("write"):
        path = out_dir / "a_gt.csv"
        # tau records the distance gate; the rotation gate rides in the rule name
        _write_atomic(path, format_adjacency(a_gt, "gt", eps_dist))
        click.echo(f"wrote {path}")


@main.command("synth")
@click.option("--out", type=str, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--num-submaps", type=int, default=None)
@click.option("--num-places", type=int, default=None)
@click.option("--frames-min", type=int, default=None)
@click.option("--frames-max", type=int, default=None)
@click.option("--revisit-prob", type=float, default=None)
@click.option("--descriptor-dim", type=int, default=None)
@click.option("--noise-sigma", type=float, default=None)
@click.option("--gap-min", type=float, default=None)
@click.option("--gap-max", type=float, default=None)
@click.option("--frame-period", type=float, default=None)
@click.option("--config", "config_path", type=str, default=None)
def cmd_synth(config_path, **flags):
    """Generate a synthetic world and write the three input files + truth sidecar."""
    settings = _Settings(flags, config_path)
    out_dir = Path(settings.get("out"))
    num_submaps = settings.get("num_submaps", int)
    frames_max = settings.get("frames_max", int)
    num_places = settings.get("num_places", int)
    if num_places is None:
        num_places = num_submaps * frames_max

    with _stage("synth"):
        cfg = WorldConfig(
            num_places=num_places,
            num_submaps=num_submaps,
            frames_per_submap=(settings.get("frames_min", int), frames_max),
            revisit_probability=settings.get("revisit_prob", float),
            descriptor_dim=settings.get("descriptor_dim", int),
            descriptor_noise_sigma=settings.get("noise_sigma", float),
            dropout_gap=(settings.get("gap_min", float), settings.get("gap_max", float)),
            frame_period=settings.get("frame_period", float),
            rng_seed=settings.get("seed", int),
        )
        world = generate_world_detailed(cfg)

    with _stage("write"):
        _write_atomic(out_dir / "trajectory.txt", format_trajectory(world.trajectory))
        _write_atomic(out_dir / "descriptors.vprd", format_descriptors(world.descriptors))
        _write_atomic(out_dir / "ground_truth.txt", format_ground_truth(world.ground_truth))
        sidecar = {
            "M": world.trajectory.submap_count,
            "adjacency": world.true_adjacency.values.astype(int).tolist(),
        }
        _write_atomic(out_dir / "true_adjacency.json", _json_bytes(sidecar))
        for name in ("trajectory.txt", "descriptors.vprd", "ground_truth.txt",
                     "true_adjacency.json"):
            click.echo(f"wrote {out_dir / name}")
    click.echo(
        f"world: {world.trajectory.frame_count} frames in "
        f"{world.trajectory.submap_count} submaps"
    )


@main.command("report")
@click.option("--out", type=str, default=None,
              help="Directory holding curve_*.csv files; summary and plot land there too.")
@click.option("--config", "config_path", type=str, default=None)
def cmd_report(config_path, **flags):
    """Rebuild summary.json and pc_curves.svg from existing curve CSVs."""
    settings = _Settings(flags, config_path)
    out_dir = Path(settings.get("out"))

    with _stage("report"):
        paths = sorted(out_dir.glob("curve_*.csv"))
        if not paths:
            raise ValueError(f"no curve_*.csv files in {out_dir}")
        curves = {}
        metas = {}
        for path in paths:
            curve, meta = parse_curve_csv(path.read_text())
            if "M" not in meta or "N" not in meta:
                raise ValueError(f"{path} is missing M/N metadata")
            rule = meta.get("rule", path.stem.removeprefix("curve_"))
            curves[rule] = curve
            metas[rule] = meta
        sizes = {(int(meta["M"]), int(meta["N"])) for meta in metas.values()}
        if len(sizes) != 1:
            raise ValueError(f"curve CSVs disagree on M/N: {sorted(sizes)}")
        (m, n), = sizes

    with _stage("write"):
        entries = []
        for rule in sorted(curves):
            meta = metas[rule]
            params = None
            if "tau_time" in meta:
                params = MergeRuleParams(
                    kind="combined",
                    tau_time=float(meta["tau_time"]),
                    f_time=float(meta["f_time"]),
                    f_vpr=float(meta["f_vpr"]),
                )
            entries.append(_summary_entry(rule, params, curves[rule], m, n))
        summary = {"M": m, "N": n, "rules": entries}
        _write_atomic(out_dir / "summary.json", _json_bytes(summary))
        _write_atomic(out_dir / "pc_curves.svg", render_curves_svg(curves))
        click.echo(f"wrote {out_dir / 'summary.json'}")
        click.echo(f"wrote {out_dir / 'pc_curves.svg'}")


if __name__ == "__main__":
    main()
