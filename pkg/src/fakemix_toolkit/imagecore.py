"""
Dense array types and the pixel level operations everything else builds on.

Images and feature maps are ImageTensors (height x width x channels, float64),
masks are BinaryMasks (height x width, {0,1}) and segmentation labels are
ClassMasks (height x width, non-negative class ids). All three are immutable:
the wrapped arrays are copied on construction and marked read-only.
"""

import logging
import zlib
from dataclasses import dataclass, field
from typing import TypeVar, Union

import numpy as np
from scipy import ndimage

from fakemix_toolkit.common.error_handling import BadInputError, ShapeMismatchError

LOGGER = logging.getLogger(__name__)

UINT64_LIMIT = 2**64


def _frozen(array: np.ndarray, dtype) -> np.ndarray:
    frozen = np.array(array, dtype=dtype, copy=True, order="C")
    frozen.flags.writeable = False
    return frozen


@dataclass(frozen=True, eq=False)
class ImageTensor:
    """
    Dense H x W x C map of reals. Image role tensors hold values in [0, 1];
    feature maps are unrestricted.
    """

    data: np.ndarray

    def __post_init__(self):
        array = np.asarray(self.data)
        if array.ndim == 2:
            array = array[:, :, np.newaxis]
        if array.ndim != 3:
            raise ShapeMismatchError(
                detail=f"ImageTensor needs a 2D or 3D array, got shape {array.shape}"
            )
        if min(array.shape) < 1:
            raise ShapeMismatchError(
                detail=f"ImageTensor dimensions must all be >= 1, got {array.shape}"
            )
        object.__setattr__(self, "data", _frozen(array, np.float64))

    @classmethod
    def zeros(cls, height: int, width: int, channels: int = 1) -> "ImageTensor":
        return cls(np.zeros((height, width, channels)))

    @classmethod
    def full(
        cls, height: int, width: int, channels: int, value: float
    ) -> "ImageTensor":
        return cls(np.full((height, width, channels), value, dtype=np.float64))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def in_unit_range(self) -> bool:
        return bool(np.all((self.data >= 0.0) & (self.data <= 1.0)))

    def require_unit_range(self) -> "ImageTensor":
        if not self.in_unit_range():
            raise BadInputError(
                detail="Image values must lie in [0, 1] "
                f"(found [{self.data.min()}, {self.data.max()}])"
            )
        return self

    def same_as(self, other: "ImageTensor") -> bool:
        """Bit-identical comparison."""
        return self.shape == other.shape and np.array_equal(self.data, other.data)


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """H x W map holding exactly 0 or 1 per pixel."""

    data: np.ndarray

    def __post_init__(self):
        array = np.asarray(self.data)
        if array.ndim != 2 or min(array.shape) < 1:
            raise ShapeMismatchError(
                detail=f"BinaryMask needs a non-empty 2D array, got shape {array.shape}"
            )
        if array.dtype == bool:
            array = array.astype(np.uint8)
        elif not np.all((array == 0) | (array == 1)):
            raise BadInputError(detail="BinaryMask values must be exactly 0 or 1")
        object.__setattr__(self, "data", _frozen(array, np.uint8))

    @classmethod
    def zeros(cls, height: int, width: int) -> "BinaryMask":
        return cls(np.zeros((height, width), dtype=np.uint8))

    @classmethod
    def ones(cls, height: int, width: int) -> "BinaryMask":
        return cls(np.ones((height, width), dtype=np.uint8))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def as_bool(self) -> np.ndarray:
        return self.data.astype(bool)

    def count(self) -> int:
        return int(self.data.sum())

    def same_as(self, other: "BinaryMask") -> bool:
        return self.shape == other.shape and np.array_equal(self.data, other.data)


@dataclass(frozen=True, eq=False)
class ClassMask:
    """H x W map of class ids, 0 being background."""

    data: np.ndarray

    def __post_init__(self):
        array = np.asarray(self.data)
        if array.ndim != 2 or min(array.shape) < 1:
            raise ShapeMismatchError(
                detail=f"ClassMask needs a non-empty 2D array, got shape {array.shape}"
            )
        if not np.issubdtype(array.dtype, np.integer) and array.dtype != bool:
            if not np.all(np.equal(np.mod(array, 1), 0)):
                raise BadInputError(detail="ClassMask values must be integers")
        if np.any(array < 0):
            raise BadInputError(detail="ClassMask values must be >= 0")
        object.__setattr__(self, "data", _frozen(array, np.int64))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def same_as(self, other: "ClassMask") -> bool:
        return self.shape == other.shape and np.array_equal(self.data, other.data)


@dataclass(frozen=True)
class TranslationVector:
    dx: int
    dy: int

    def __neg__(self) -> "TranslationVector":
        return TranslationVector(dx=-self.dx, dy=-self.dy)


@dataclass(frozen=True, eq=False)
class SeededRng:
    """
    Counter based random stream keyed by (seed, stream id, purpose).

    The same key yields the same draws on every platform and independently
    of how many other streams exist, so samples can be processed in any
    order or in parallel. Instances hold state and must not be shared.
    """

    seed: int
    stream_id: int = 0
    purpose: int = 0
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("seed", "stream_id", "purpose"):
            value = getattr(self, name)
            if not 0 <= int(value) < UINT64_LIMIT:
                raise BadInputError(
                    detail=f"SeededRng {name} must be an unsigned 64 bit integer, "
                    f"got {value}"
                )
        sequence = np.random.SeedSequence(
            entropy=int(self.seed), spawn_key=(int(self.stream_id), int(self.purpose))
        )
        object.__setattr__(
            self, "generator", np.random.Generator(np.random.Philox(sequence))
        )

    def derive(self, purpose: str) -> "SeededRng":
        """A fresh, independent stream for another purpose of the same sample."""
        return SeededRng(
            seed=self.seed,
            stream_id=self.stream_id,
            purpose=zlib.crc32(purpose.encode("utf-8")),
        )

    def random(self) -> float:
        return float(self.generator.random())

    def uniform(self, low: float, high: float) -> float:
        return float(self.generator.uniform(low, high))

    def integers(self, low: int, high: int) -> int:
        """Uniform integer in [low, high)."""
        return int(self.generator.integers(low, high))

    def beta(self, alpha: float, beta: float) -> float:
        return float(self.generator.beta(alpha, beta))


MaskLike = Union[BinaryMask, ClassMask]
Raster = TypeVar("Raster", ImageTensor, BinaryMask, ClassMask)


def round_half_away(value: float) -> int:
    """Round to the nearest integer, ties away from zero."""
    return int(np.sign(value) * np.floor(abs(value) + 0.5))


def check_same_size(*items, what: str = "inputs") -> tuple[int, int]:
    sizes = {(item.height, item.width) for item in items}
    if len(sizes) != 1:
        raise ShapeMismatchError(
            detail=f"Height/width of {what} differ: {sorted(sizes)}"
        )
    return sizes.pop()


def translate_zero_fill(src: Raster, d: TranslationVector) -> Raster:
    """
    Shift src by d; out[y][x] = src[y - dy][x - dx] where that index exists,
    zero elsewhere.
    """
    height, width = src.height, src.width
    out = np.zeros_like(src.data)
    dx, dy = int(d.dx), int(d.dy)
    if abs(dx) < width and abs(dy) < height:
        dst_y = slice(max(dy, 0), height + min(dy, 0))
        dst_x = slice(max(dx, 0), width + min(dx, 0))
        src_y = slice(max(-dy, 0), height + min(-dy, 0))
        src_x = slice(max(-dx, 0), width + min(-dx, 0))
        out[dst_y, dst_x] = src.data[src_y, src_x]
    return type(src)(out)


def sample_translation(
    w: int, h: int, translate_ratio: float, rng: SeededRng
) -> TranslationVector:
    """
    Draw D = (dx, dy) with dx ~ U(-lambda*w, lambda*w), dy ~ U(-lambda*h, lambda*h),
    rounded to whole pixels and kept inside the (inclusive) bounds.
    """
    if not 0.0 <= translate_ratio <= 1.0:
        raise BadInputError(
            detail=f"Translation ratio must lie in [0, 1], got {translate_ratio}"
        )
    reach_x = translate_ratio * w
    reach_y = translate_ratio * h
    dx = round_half_away(rng.uniform(-reach_x, reach_x)) if reach_x > 0 else 0
    dy = round_half_away(rng.uniform(-reach_y, reach_y)) if reach_y > 0 else 0
    limit_x, limit_y = int(np.floor(reach_x)), int(np.floor(reach_y))
    return TranslationVector(
        dx=int(np.clip(dx, -limit_x, limit_x)), dy=int(np.clip(dy, -limit_y, limit_y))
    )


def _square(radius: int) -> np.ndarray:
    return np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)


def _check_radius(radius: int) -> int:
    if radius < 0:
        raise BadInputError(
            detail=f"Structuring element radius must be >= 0, got {radius}"
        )
    return int(radius)


def dilate(mask: BinaryMask, radius: int) -> BinaryMask:
    """Binary dilation with a (2r+1)^2 square; outside the image is background."""
    radius = _check_radius(radius)
    if radius == 0:
        return BinaryMask(mask.data)
    return BinaryMask(
        ndimage.binary_dilation(
            mask.as_bool(), structure=_square(radius), border_value=0
        )
    )


def erode(mask: BinaryMask, radius: int) -> BinaryMask:
    """Binary erosion with a (2r+1)^2 square; outside the image is background."""
    radius = _check_radius(radius)
    if radius == 0:
        return BinaryMask(mask.data)
    return BinaryMask(
        ndimage.binary_erosion(
            mask.as_bool(), structure=_square(radius), border_value=0
        )
    )


def complement(mask: BinaryMask) -> BinaryMask:
    return BinaryMask(1 - mask.data)


def _corner_aligned(old: int, new: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if new == 1 or old == 1:
        coords = np.zeros(new)
    else:
        coords = np.arange(new) * ((old - 1) / (new - 1))
    lower = np.clip(np.floor(coords).astype(np.int64), 0, old - 1)
    upper = np.minimum(lower + 1, old - 1)
    return lower, upper, coords - lower


def upsample_bilinear(src: ImageTensor, new_h: int, new_w: int) -> ImageTensor:
    """
    Channel-wise bilinear resampling with corner aligned sampling
    (works for shrinking as well). Same size is an exact passthrough.
    """
    if new_h < 1 or new_w < 1:
        raise BadInputError(detail=f"Target size must be >= 1, got {new_h}x{new_w}")
    if (new_h, new_w) == (src.height, src.width):
        return ImageTensor(src.data)

    y0, y1, ty = _corner_aligned(src.height, new_h)
    x0, x1, tx = _corner_aligned(src.width, new_w)
    ty = ty[:, np.newaxis, np.newaxis]
    tx = tx[np.newaxis, :, np.newaxis]

    data = src.data
    # a + t * (b - a) keeps constant regions exactly constant
    top = data[y0][:, x0] + tx * (data[y0][:, x1] - data[y0][:, x0])
    bottom = data[y1][:, x0] + tx * (data[y1][:, x1] - data[y1][:, x0])
    return ImageTensor(top + ty * (bottom - top))


def resize_nearest(mask: MaskLike, new_h: int, new_w: int) -> MaskLike:
    if new_h < 1 or new_w < 1:
        raise BadInputError(detail=f"Target size must be >= 1, got {new_h}x{new_w}")
    rows = np.minimum((np.arange(new_h) * mask.height) // new_h, mask.height - 1)
    cols = np.minimum((np.arange(new_w) * mask.width) // new_w, mask.width - 1)
    return type(mask)(mask.data[rows][:, cols])


def elementwise_mul(a: ImageTensor, b: Union[BinaryMask, ImageTensor]) -> ImageTensor:
    """
    Pixel-wise product. A BinaryMask or single channel tensor broadcasts
    across the channels of a.
    """
    check_same_size(a, b, what="elementwise_mul operands")
    if isinstance(b, BinaryMask):
        other = b.data[:, :, np.newaxis].astype(np.float64)
    else:
        if b.channels not in (1, a.channels):
            raise ShapeMismatchError(
                detail=f"Cannot broadcast {b.channels} channels onto {a.channels}"
            )
        other = b.data
    return ImageTensor(a.data * other)


def clip_unit(image: ImageTensor) -> ImageTensor:
    return ImageTensor(np.clip(image.data, 0.0, 1.0))
