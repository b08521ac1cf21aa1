"""Batch command-line entry point chaining the pipeline stages.

Every subcommand is re-runnable from its serialized inputs and exits
nonzero with a single-line ``error: ...`` message on contract violations.
An optional config file (flat ``key=value`` lines mirroring the flags)
supplies defaults via ``--config``.
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click

from .contributions import ContributionMatrix, LabelMask, accumulate_contributions
from .editing import remove_objects
from .maskrender import DEFAULT_TAU, render_binary_mask, render_scene_mask
from .masks import load_mask_png, save_mask_png, save_mask_preview
from .metrics import evaluate_mask_dirs
from .ply import export_ply, load_scene_ply
from .rasterizer import DEFAULT_BLEND, EXACT_BLEND
from .scene import load_cameras
from .solver import Assignment, assign_binary, assign_scene
from .synth import make_random, make_two_cluster, write_fixture


def _load_config(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    values: dict[str, str] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line is not key=value: {line!r}")
        key, _, val = line.partition("=")
        values[key.strip().replace("-", "_")] = val.strip().strip('"')
    return values


def _fail_cleanly(fn):
    """Turn contract violations into one-line machine-parseable errors."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, LookupError, OSError) as exc:
            message = " ".join(str(exc).split())
            click.echo(f"error: {message}", err=True)
            sys.exit(2)

    return wrapper


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="key=value file of flag defaults")
@click.pass_context
def main(ctx: click.Context, config_path: str | None) -> None:
    """Lift 2D masks onto Gaussian splat scenes and back."""
    try:
        cfg = _load_config(config_path)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    if cfg:
        ctx.default_map = {name: dict(cfg) for name in main.commands}


def _read_masks(masks_dir: str, views) -> list:
    """Pair views with {view_id}.png masks; missing files mean no mask."""
    pairs = []
    for view in views:
        path = Path(masks_dir) / f"{view.view_id}.png"
        if path.exists():
            pairs.append(
                (view, LabelMask(view_id=view.view_id,
                                 labels=load_mask_png(path))))
    return pairs


@main.command()
@click.argument("scene_ply", type=click.Path(exists=True))
@click.argument("cameras_json", type=click.Path(exists=True))
@click.argument("masks_dir", type=click.Path(exists=True))
@click.option("--num-objects", "-e", type=int, required=True,
              help="object count E including background")
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--exact", is_flag=True,
              help="disable blending floors (oracle-grade accumulation)")
@_fail_cleanly
def accumulate(scene_ply, cameras_json, masks_dir, num_objects, out_path, exact):
    """Accumulate per-(label, Gaussian) contributions into a matrix file."""
    scene = load_scene_ply(scene_ply)
    views = load_cameras(cameras_json)
    pairs = _read_masks(masks_dir, views)
    if not pairs:
        raise ValueError(f"no {{view_id}}.png masks found in {masks_dir}")
    blend = EXACT_BLEND if exact else DEFAULT_BLEND
    matrix = accumulate_contributions(scene, pairs, num_objects, blend)
    matrix.save(out_path)
    click.echo(f"accumulated {len(pairs)} masked views -> {out_path} "
               f"(E={matrix.num_objects}, N={matrix.num_gaussians})")


@main.command()
@click.argument("matrix_file", type=click.Path(exists=True))
@click.option("--gamma", type=float, default=0.0, show_default=True,
              help="background bias in [-1, 1]")
@click.option("--mode", type=click.Choice(["binary", "scene"]),
              default="binary", show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@_fail_cleanly
def assign(matrix_file, gamma, mode, out_path):
    """Solve the closed-form label assignment from a contribution matrix."""
    matrix = ContributionMatrix.load(matrix_file)
    assignment = (assign_binary(matrix, gamma) if mode == "binary"
                  else assign_scene(matrix, gamma))
    assignment.save(out_path)
    counts = assignment.member_counts()
    for obj, count in enumerate(counts):
        click.echo(f"object {obj}: {count} members")


@main.command("render-mask")
@click.argument("scene_ply", type=click.Path(exists=True))
@click.argument("assignment_file", type=click.Path(exists=True))
@click.argument("cameras_json", type=click.Path(exists=True))
@click.option("--views", "view_spec", default="all", show_default=True,
              help="comma-separated view ids or 'all'")
@click.option("--tau", type=float, default=DEFAULT_TAU, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--preview", is_flag=True, help="also write color previews")
@_fail_cleanly
def render_mask(scene_ply, assignment_file, cameras_json, view_spec, tau,
                out_dir, preview):
    """Render assignment masks for the requested views as 16-bit PNGs."""
    scene = load_scene_ply(scene_ply)
    assignment = Assignment.load(assignment_file)
    views = load_cameras(cameras_json)
    if view_spec != "all":
        wanted = {int(x) for x in view_spec.split(",") if x.strip()}
        missing = wanted - {v.view_id for v in views}
        if missing:
            raise ValueError(f"unknown view ids: {sorted(missing)}")
        views = [v for v in views if v.view_id in wanted]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for view in views:
        if assignment.mode == "binary":
            rendered = render_binary_mask(scene, assignment, view, tau)
        else:
            rendered = render_scene_mask(scene, assignment, view, tau)
        save_mask_png(out / f"{view.view_id}.png", rendered.labels)
        if preview:
            save_mask_preview(out / f"{view.view_id}_preview.png",
                              rendered.labels)
    click.echo(f"rendered {len(views)} mask(s) -> {out}")


@main.command()
@click.argument("scene_ply", type=click.Path(exists=True))
@click.argument("assignment_file", type=click.Path(exists=True))
@click.option("--objects", "object_spec", required=True,
              help="comma-separated object ids to delete")
@click.option("--out", "out_path", type=click.Path(), required=True)
@_fail_cleanly
def remove(scene_ply, assignment_file, object_spec, out_path):
    """Delete the given objects' Gaussians and export the edited scene."""
    scene = load_scene_ply(scene_ply)
    assignment = Assignment.load(assignment_file)
    ids = [int(x) for x in object_spec.split(",") if x.strip()]
    edited, kept = remove_objects(scene, assignment, ids)
    export_ply(edited, out_path)
    click.echo(f"kept {len(kept)}/{len(scene)} gaussians -> {out_path}")


@main.command("eval")
@click.argument("pred_dir", type=click.Path(exists=True))
@click.argument("gt_dir", type=click.Path(exists=True))
@_fail_cleanly
def eval_masks(pred_dir, gt_dir):
    """Per-view IoU/accuracy table plus mIoU and mAcc."""
    report = evaluate_mask_dirs(pred_dir, gt_dir)
    for score in report.per_view:
        click.echo(f"view {score.view_id}: iou={100.0 * score.iou:.2f} "
                   f"acc={100.0 * score.accuracy:.2f}")
    click.echo(f"mIoU {report.miou:.2f}")
    click.echo(f"mAcc {report.macc:.2f}")


@main.command()
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--gaussians", "-n", type=int, default=2000, show_default=True)
@click.option("--views", "-v", type=int, default=12, show_default=True)
@click.option("--preset", type=click.Choice(["two-cluster", "random"]),
              default="two-cluster", show_default=True)
@click.option("--width", type=int, default=128, show_default=True)
@click.option("--height", type=int, default=128, show_default=True)
@click.option("--mask-views", type=int, default=6, show_default=True,
              help="number of views that keep a training mask")
@click.option("--num-objects", "-e", type=int, default=2, show_default=True,
              help="object count for the random preset")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@_fail_cleanly
def synth(seed, gaussians, views, preset, width, height, mask_views,
          num_objects, out_dir):
    """Generate a seeded synthetic fixture (scene + cameras + GT masks)."""
    if preset == "two-cluster":
        fixture = make_two_cluster(
            seed=seed, n_gaussians=gaussians, n_views=views, width=width,
            height=height, n_mask_views=mask_views)
    else:
        fixture = make_random(
            seed=seed, n_gaussians=gaussians, n_views=views, width=width,
            height=height, num_objects=num_objects)
    write_fixture(fixture, out_dir)
    click.echo(f"wrote fixture ({preset}, seed {seed}, N={gaussians}, "
               f"{views} views) -> {out_dir}")


@main.command()
@click.argument("scene_ply", type=click.Path(exists=True))
@click.argument("cameras_json", type=click.Path(exists=True))
@click.option("--matrix", "matrix_file", type=click.Path(exists=True),
              default=None, help="precomputed contribution matrix")
@click.option("--output-dir", type=click.Path(), default=".",
              show_default=True, help="where /remove writes edited scenes")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8787, show_default=True)
@_fail_cleanly
def serve(scene_ply, cameras_json, matrix_file, output_dir, host, port):
    """Run the local HTTP service for interactive gamma/tau tuning."""
    import uvicorn

    from .service import create_app

    scene = load_scene_ply(scene_ply)
    views = load_cameras(cameras_json)
    matrix = ContributionMatrix.load(matrix_file) if matrix_file else None
    app = create_app(scene, views, matrix, output_dir=output_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
