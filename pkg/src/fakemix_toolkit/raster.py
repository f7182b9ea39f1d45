"""
8-bit PNG reading and writing.

Images are RGB and map to [0, 1] by /255. Masks are single channel; any
nonzero value reads as 1 and written masks hold exactly {0, 255}. Class masks
keep their raw 8-bit ids.
"""

import io
import logging
from pathlib import Path

import numpy as np
from PIL import Image

from fakemix_toolkit.common.error_handling import BadInputError, NotFoundError
from fakemix_toolkit.common.staging import atomic_write_bytes
from fakemix_toolkit.imagecore import BinaryMask, ClassMask, ImageTensor

LOGGER = logging.getLogger(__name__)


def _open(path: Path) -> Image.Image:
    try:
        with Image.open(path) as img:
            img.load()
            # detached from the file handle, which closes with the block
            return img.copy()
    except FileNotFoundError as err:
        raise NotFoundError(detail=f"Raster {path} does not exist") from err
    except OSError as err:
        raise BadInputError(detail=f"Raster {path} could not be decoded: {err}")


def _single_channel(img: Image.Image, path: Path) -> np.ndarray:
    if img.mode in ("L", "P", "1"):
        return np.asarray(img if img.mode != "1" else img.convert("L"))
    if img.mode in ("I", "I;16"):
        return np.asarray(img).astype(np.int64)
    if img.mode in ("RGB", "RGBA", "LA"):
        # grey masks saved as RGB: take the first band
        return np.asarray(img.getchannel(0))
    raise BadInputError(detail=f"Unsupported mask mode {img.mode} in {path}")


def read_image(path: Path) -> ImageTensor:
    img = _open(Path(path))
    rgb = np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
    return ImageTensor(rgb)


def read_mask(path: Path) -> BinaryMask:
    img = _open(Path(path))
    return BinaryMask(_single_channel(img, Path(path)) != 0)


def read_class_mask(path: Path) -> ClassMask:
    img = _open(Path(path))
    return ClassMask(_single_channel(img, Path(path)))


def read_gray(path: Path) -> np.ndarray:
    """Single channel PNG as an H x W float array in [0, 1]."""
    img = _open(Path(path))
    return _single_channel(img, Path(path)).astype(np.float64) / 255.0


def quantize(image: ImageTensor) -> np.ndarray:
    image.require_unit_range()
    return np.rint(image.data * 255.0).astype(np.uint8)


def _png_bytes(img: Image.Image) -> bytes:
    buffer = io.BytesIO()
    img.save(buffer, format="PNG")
    return buffer.getvalue()


def write_image(path: Path, image: ImageTensor) -> None:
    """Write an RGB (or single channel) image; quantisation happens only here."""
    pixels = quantize(image)
    if image.channels == 1:
        img = Image.fromarray(pixels[:, :, 0], mode="L")
    elif image.channels == 3:
        img = Image.fromarray(pixels, mode="RGB")
    else:
        raise BadInputError(
            detail=f"Only 1 or 3 channel images can be written, got {image.channels}"
        )
    atomic_write_bytes(Path(path), _png_bytes(img))


def write_mask(path: Path, mask: BinaryMask) -> None:
    img = Image.fromarray((mask.data * 255).astype(np.uint8), mode="L")
    atomic_write_bytes(Path(path), _png_bytes(img))


def write_class_mask(path: Path, mask: ClassMask) -> None:
    if mask.data.max(initial=0) > 255:
        raise BadInputError(detail="Class ids above 255 do not fit an 8-bit PNG")
    img = Image.fromarray(mask.data.astype(np.uint8), mode="L")
    atomic_write_bytes(Path(path), _png_bytes(img))
