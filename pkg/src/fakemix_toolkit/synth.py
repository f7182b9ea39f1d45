"""
Desk scale synthetic stand-in for a transparent object dataset.

Every sample is a smooth textured background with one to three ellipses or
polygons marked as transparent regions. Region interiors differ from the
background only slightly and their rims are brightened, so the contour is
the main visual cue, as it is for glass.
"""

import logging
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image, ImageDraw
from pydantic import Field

from fakemix_toolkit.boundary import BoundaryBandConfig, boundary_band
from fakemix_toolkit.common.model import AppModel
from fakemix_toolkit.imagecore import (
    BinaryMask,
    ImageTensor,
    SeededRng,
    dilate,
)
from fakemix_toolkit.manifest import (
    MANIFEST_NAME,
    Manifest,
    ManifestEntry,
    ManifestHeader,
    compute_channel_means,
)
from fakemix_toolkit.raster import write_image, write_mask

LOGGER = logging.getLogger(__name__)

INTERIOR_BLEND = 0.15
RIM_GAIN = 0.25
NOISE_SIGMA = 0.02


class SynthConfig(AppModel):
    count: int = Field(default=20, ge=0)
    size: int = Field(default=64, ge=8)
    seed: int = Field(default=0, ge=0)
    max_shapes: int = Field(default=3, ge=1)


def _background(size: int, generator: np.random.Generator) -> np.ndarray:
    start, end = generator.uniform(0.15, 0.85, size=(2, 3))
    angle = generator.uniform(0.0, 2.0 * np.pi)
    yy, xx = np.mgrid[0:size, 0:size] / max(size - 1, 1)
    ramp = np.cos(angle) * xx + np.sin(angle) * yy
    ramp = (ramp - ramp.min()) / max(ramp.max() - ramp.min(), 1e-12)
    image = start + ramp[:, :, np.newaxis] * (end - start)
    return image + generator.normal(0.0, NOISE_SIGMA, size=image.shape)


def _draw_shape(draw: ImageDraw.ImageDraw, size: int, generator: np.random.Generator):
    radius = generator.uniform(size / 8.0, size / 3.0)
    cx, cy = generator.uniform(radius, size - radius, size=2)
    if generator.random() < 0.5:
        ry = radius * generator.uniform(0.5, 1.0)
        draw.ellipse([cx - radius, cy - ry, cx + radius, cy + ry], fill=1)
        return
    corners = int(generator.integers(3, 8))
    angles = np.sort(generator.uniform(0.0, 2.0 * np.pi, size=corners))
    radii = radius * generator.uniform(0.6, 1.0, size=corners)
    points = [
        (float(cx + r * np.cos(a)), float(cy + r * np.sin(a)))
        for a, r in zip(angles, radii)
    ]
    draw.polygon(points, fill=1)


def generate_sample(
    index: int, cfg: SynthConfig
) -> tuple[ImageTensor, BinaryMask, str]:
    """
    Build sample `index`. Samples depend only on (seed, index), so any subset
    can be regenerated on its own.
    """
    generator = SeededRng(seed=cfg.seed, stream_id=index).derive("synth").generator
    size = cfg.size

    canvas = Image.new("L", (size, size), 0)
    draw = ImageDraw.Draw(canvas)
    shapes = int(generator.integers(1, cfg.max_shapes + 1))
    for _ in range(shapes):
        _draw_shape(draw, size, generator)
    region = np.asarray(canvas) != 0
    if not region.any():
        # degenerate polygon: fall back to a centred square
        quarter = size // 4
        region[quarter : size - quarter, quarter : size - quarter] = True
    mask = BinaryMask(region)

    image = _background(size, generator)
    tint = generator.uniform(0.0, 1.0, size=3)
    inside = mask.as_bool()
    image[inside] = (1.0 - INTERIOR_BLEND) * image[inside] + INTERIOR_BLEND * tint
    rim = dilate(mask, 1).as_bool() & ~inside
    image[rim] = image[rim] + RIM_GAIN * (1.0 - image[rim])

    split = "easy" if shapes == 1 else "hard"
    return ImageTensor(np.clip(image, 0.0, 1.0)), mask, split


def write_dataset(
    root: Path, cfg: SynthConfig, band: Optional[BoundaryBandConfig] = None
) -> Manifest:
    """
    Write images/, masks/, boundaries/ and the manifest below root (which
    is expected to be a staging directory).
    """
    root = Path(root)
    for sub in ("images", "masks", "boundaries"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    band = band or BoundaryBandConfig.for_size(cfg.size, cfg.size)

    entries = []
    for index in range(cfg.count):
        image, mask, split = generate_sample(index, cfg)
        stem = f"{index:06d}"
        write_image(root / "images" / f"{stem}.png", image)
        write_mask(root / "masks" / f"{stem}.png", mask)
        write_mask(root / "boundaries" / f"{stem}.png", boundary_band(mask, band))
        entries.append(
            ManifestEntry(
                id=stem,
                image=f"images/{stem}.png",
                seg=f"masks/{stem}.png",
                boundary=f"boundaries/{stem}.png",
                split=split,
            )
        )

    means = compute_channel_means(root / e.image for e in entries)
    manifest = Manifest(
        header=ManifestHeader(channel_means=means, count=len(entries)), entries=entries
    )
    manifest.root = root
    manifest.save(root / MANIFEST_NAME)
    LOGGER.info("Generated %d synthetic samples of %dpx", cfg.count, cfg.size)
    return manifest

