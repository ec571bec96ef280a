"""`extract` command."""

import sys

import click

from .backbones import (ATTENTION_BACKBONES, DEPTH_BACKBONES, BackboneConfig,
                        ModelLoadError, SD_TIMESTEP_DEFAULT)
from .extract import extract


@click.command()
@click.option("--image", "image_path", required=True,
              type=click.Path(exists=True))
@click.option("--attn", "attention", default="stub", show_default=True,
              type=click.Choice(ATTENTION_BACKBONES))
@click.option("--depth", default="stub", show_default=True,
              type=click.Choice(DEPTH_BACKBONES))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--tta/--no-tta", default=True, show_default=True,
              help="Average with the horizontally flipped image.")
@click.option("--max-side", default=1024, show_default=True,
              help="Shortest-side cap for the working image.")
@click.option("--timestep", default=SD_TIMESTEP_DEFAULT, show_default=True,
              help="Denoising timestep for SD attention capture.")
def main(image_path, attention, depth, out_dir, tta, max_side, timestep):
    """Run the backbones on one image and write an interchange bundle."""
    try:
        cfg = BackboneConfig(attention=attention, depth=depth, tta=tta,
                             max_side=max_side, sd_timestep=timestep)
        out = extract(image_path, cfg, out_dir)
    except (ModelLoadError, ValueError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    click.echo(f"wrote {out}")


if __name__ == "__main__":
    main()
