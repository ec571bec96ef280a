"""Command-line entry points: predict, eval, synth, serve."""

import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from .errors import PointsegError
from .evaluator import iou, reproject_mask, run_benchmark
from .floodfill import FillParams
from .scoring import AdaptiveConfig
from .segmenter import PipelineConfig, PromptPoint, Session
from .tensor_io import load_bundle, load_mask_png, save_mask_png


def _parse_points(spec: str):
    points = []
    for chunk in spec.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 3:
            raise click.UsageError(f"bad point {chunk!r}, expected x,y,label")
        try:
            x, y, label = (int(v) for v in parts)
        except ValueError as e:
            raise click.UsageError(f"bad point {chunk!r}: {e}") from e
        if label not in (0, 1):
            raise click.UsageError(f"label must be 0 or 1 in {chunk!r}")
        points.append(PromptPoint(x=x, y=y, label=label))
    if not points:
        raise click.UsageError("no points given")
    return points


def _config(no_adaptive: bool, no_depth: bool) -> PipelineConfig:
    cfg = PipelineConfig()
    if no_adaptive:
        cfg.adaptive = AdaptiveConfig(use_adaptive=False)
    if no_depth:
        cfg.fill = FillParams(depth_weight=0.0)
    return cfg


@click.group()
def main():
    """Point-prompt interactive segmentation engine."""


@main.command()
@click.option("--bundle", "bundle_dir", required=True, type=click.Path(exists=True))
@click.option("--points", "points_spec", required=True,
              help='Click sequence "x,y,l;x,y,l;..."')
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--gt", "gt_path", type=click.Path(exists=True), default=None)
@click.option("--no-adaptive", is_flag=True, default=False)
@click.option("--no-depth", is_flag=True, default=False)
def predict(bundle_dir, points_spec, out_path, gt_path, no_adaptive, no_depth):
    """Run a click sequence through one session and write the mask."""
    points = _parse_points(points_spec)
    try:
        bundle = load_bundle(bundle_dir)
        session = Session(bundle, _config(no_adaptive, no_depth))
        for p in points:
            session.add_prompt(p)
    except PointsegError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    save_mask_png(session.prev_seg.mask, out_path)
    click.echo(f"wrote {out_path} (area {session.prev_seg.area})")
    if gt_path:
        gt = load_mask_png(gt_path)
        score = iou(reproject_mask(session.prev_seg.mask, gt.shape), gt)
        click.echo(f"iou {score:.6f}")


@main.command("eval")
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(exists=True))
@click.option("--strategy", type=click.Choice(["center", "random"]), default="center")
@click.option("--max-clicks", default=20, show_default=True)
@click.option("--report", "report_path", required=True, type=click.Path())
@click.option("--csv", "csv_path", type=click.Path(), default=None)
@click.option("--seed", default=0, show_default=True)
@click.option("--no-adaptive", is_flag=True, default=False,
              help="Replace the adaptive area gate with the constant size prior.")
@click.option("--no-depth", is_flag=True, default=False,
              help="Disable depth guidance in the flood fill (depth weight 0).")
def eval_cmd(dataset_dir, strategy, max_clicks, report_path, csv_path, seed,
             no_adaptive, no_depth):
    """Simulated-click benchmark over a dataset of bundles."""
    report = run_benchmark(dataset_dir, strategy=strategy,
                           config=_config(no_adaptive, no_depth),
                           max_clicks=max_clicks, rng_seed=seed)
    Path(report_path).write_text(report.to_json())
    if csv_path:
        report.write_csv(csv_path)
    click.echo(f"instances {len(report.trajectories)}  "
               f"noc90 {report.noc90:.3f}  noc95 {report.noc95:.3f}  "
               f"miou@1 {report.miou_at[1]:.3f}")


@main.command()
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--scenes", default=10, show_default=True)
@click.option("--kind", type=click.Choice(["mixed", "overlap-same-class"]),
              default="mixed", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--dims", default="48x48", show_default=True)
@click.option("--coarse", default="12x12", show_default=True)
def synth(out_dir, scenes, kind, seed, dims, coarse):
    """Generate a synthetic bundle dataset."""
    from .synth import make_suite
    try:
        H, W = (int(v) for v in dims.split("x"))
        h, w = (int(v) for v in coarse.split("x"))
    except ValueError as e:
        raise click.UsageError(f"bad dims: {e}") from e
    make_suite(out_dir, scenes, kind=kind, seed=seed, dims=(H, W),
               coarse_dims=(h, w))
    click.echo(f"wrote {scenes} scenes to {out_dir}")


@main.command()
@click.option("--data", "data_dir", default=None, type=click.Path(),
              help="Bundle directory (default $POINTSEG_DATA).")
@click.option("--port", default=None, type=int,
              help="Port (default $POINTSEG_PORT or 8000).")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--static", "static_dir", default=None, type=click.Path(),
              help="Directory with the built browser UI.")
def serve(data_dir, port, host, static_dir):
    """Start the interactive HTTP service."""
    import uvicorn

    from .server import create_app
    data_dir = data_dir or os.environ.get("POINTSEG_DATA", "data")
    port = port or int(os.environ.get("POINTSEG_PORT", "8000"))
    app = create_app(data_dir, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
