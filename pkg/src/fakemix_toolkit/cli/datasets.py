"""
Dataset commands: ingest, gen-boundary and synth.
"""

import argparse
import logging
from pathlib import Path
from typing import Optional

from fakemix_toolkit.boundary import BoundaryBandConfig, boundary_band
from fakemix_toolkit.cli.model import RunConfig, resolve_run_config
from fakemix_toolkit.common.error_handling import BadInputError, NotFoundError
from fakemix_toolkit.common.staging import OutputStage
from fakemix_toolkit.manifest import (
    MANIFEST_NAME,
    Manifest,
    ManifestEntry,
    ManifestHeader,
    compute_channel_means,
)
from fakemix_toolkit.raster import read_mask, write_mask
from fakemix_toolkit.synth import SynthConfig, write_dataset

LOGGER = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")
BOUNDARY_DIR = "boundaries"


def _by_stem(directory: Path, suffixes: tuple[str, ...]) -> dict[str, Path]:
    if not Path(directory).is_dir():
        raise NotFoundError(detail=f"Directory {directory} does not exist")
    return {
        path.stem: path
        for path in sorted(Path(directory).iterdir())
        if path.suffix.lower() in suffixes
    }


def cmd_ingest(image_dir: Path, mask_dir: Path, out_manifest: Path) -> Manifest:
    """
    Pair images and masks by file stem, compute the per-channel means and
    write a manifest. Unpaired files are an error.
    """
    images = _by_stem(image_dir, IMAGE_SUFFIXES)
    masks = _by_stem(mask_dir, (".png",))
    if not images and not masks:
        raise NotFoundError(
            detail=f"No images in {image_dir} and no masks in {mask_dir}"
        )
    missing_mask = sorted(set(images) - set(masks))
    missing_image = sorted(set(masks) - set(images))
    if missing_mask or missing_image:
        raise NotFoundError(
            detail=f"Unpaired files: no mask for {missing_mask}, "
            f"no image for {missing_image}"
        )

    manifest = Manifest()
    manifest.root = Path(out_manifest).parent
    manifest.entries = [
        ManifestEntry(
            id=stem,
            image=manifest.relative(images[stem]),
            seg=manifest.relative(masks[stem]),
        )
        for stem in sorted(images)
    ]
    manifest.header = ManifestHeader(
        channel_means=compute_channel_means(images.values()),
        count=len(manifest.entries),
    )
    manifest.save(out_manifest)
    LOGGER.info("Ingested %d samples into %s", len(manifest.entries), out_manifest)
    return manifest


def cmd_gen_boundary(
    manifest_path: Path, thickness: Optional[int] = None
) -> Manifest:
    """
    Generate the boundary label of every entry into boundaries/ next to the
    manifest and record the paths. Re-running rewrites identical files.
    """
    manifest = Manifest.load(manifest_path, check_files=False)
    target = manifest.root / BOUNDARY_DIR
    names = [f"{entry.id}.png" for entry in manifest.entries]
    with OutputStage(target, known_files=names) as stage:
        for entry in manifest.entries:
            seg = read_mask(manifest.resolve(entry.seg))
            band = (
                BoundaryBandConfig(thickness=thickness)
                if thickness is not None
                else BoundaryBandConfig.for_size(seg.height, seg.width)
            )
            name = f"{entry.id}.png"
            write_mask(stage.path / name, boundary_band(seg, band))
            entry.boundary = f"{BOUNDARY_DIR}/{name}"
        stage.commit()
    manifest.save(manifest_path)
    LOGGER.info("Generated %d boundary labels in %s", len(manifest.entries), target)
    return manifest


def cmd_synth(
    count: int,
    size: int,
    seed: int,
    out_dir: Path,
    thickness: Optional[int] = None,
) -> Manifest:
    """Write a deterministic synthetic dataset with its manifest to out_dir."""
    cfg = SynthConfig(count=count, size=size, seed=seed)
    band = BoundaryBandConfig(thickness=thickness) if thickness is not None else None
    with OutputStage(Path(out_dir), marker=MANIFEST_NAME) as stage:
        manifest = write_dataset(stage.path, cfg, band)
        stage.commit()
    manifest.root = Path(out_dir)
    return manifest


def _require_out(config: RunConfig, what: str) -> Path:
    if config.out is None:
        raise BadInputError(detail=f"{what} needs --out")
    return config.out


def _run_ingest(args: argparse.Namespace) -> int:
    out = _require_out(resolve_run_config(args), "ingest")
    if out.suffix != ".jsonl":
        out = out / MANIFEST_NAME
    cmd_ingest(args.image_dir, args.mask_dir, out)
    return 0


def _run_gen_boundary(args: argparse.Namespace) -> int:
    config = resolve_run_config(args)
    cmd_gen_boundary(args.manifest, config.thickness)
    return 0


def _run_synth(args: argparse.Namespace) -> int:
    config = resolve_run_config(args)
    out = _require_out(config, "synth")
    cmd_synth(args.count, args.size, config.seed, out, config.thickness)
    return 0


def register(subparsers, parents: list[argparse.ArgumentParser]) -> None:
    ingest = subparsers.add_parser(
        "ingest", parents=parents, help="pair images and masks into a manifest"
    )
    ingest.add_argument("image_dir", type=Path)
    ingest.add_argument("mask_dir", type=Path)
    ingest.set_defaults(handler=_run_ingest)

    gen_boundary = subparsers.add_parser(
        "gen-boundary", parents=parents, help="generate boundary labels"
    )
    gen_boundary.add_argument("manifest", type=Path)
    gen_boundary.set_defaults(handler=_run_gen_boundary)

    synth = subparsers.add_parser(
        "synth", parents=parents, help="generate a synthetic dataset"
    )
    synth.add_argument("--count", type=int, default=20)
    synth.add_argument("--size", type=int, default=64)
    synth.set_defaults(handler=_run_synth)
