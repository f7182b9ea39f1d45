"""
FakeMix and the Mixup / Cutout / CutMix baselines.

FakeMix pastes the boundary band content of a randomly chosen donor sample,
moved by a random translation, onto a base image while leaving the base
labels untouched:

    RB2  = GB2 * I2                      (extract_t_boundary)
    RB2' = T_D(RB2), GB2' = T_D(GB2)     (same D for both)
    I1'  = (1 - GB2') * I1 + RB2'        (hard switch per pixel)

and keeps the original image with probability p.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np
from pydantic import Field, model_validator

from fakemix_toolkit.boundary import (
    BoundaryBandConfig,
    boundary_band,
    multiclass_to_binary,
)
from fakemix_toolkit.common.error_handling import (
    BadInputError,
    NotFoundError,
    ShapeMismatchError,
    UnprocessableError,
)
from fakemix_toolkit.common.model import AppModel
from fakemix_toolkit.imagecore import (
    BinaryMask,
    ClassMask,
    ImageTensor,
    MaskLike,
    SeededRng,
    TranslationVector,
    check_same_size,
    clip_unit,
    elementwise_mul,
    resize_nearest,
    sample_translation,
    translate_zero_fill,
    upsample_bilinear,
)

LOGGER = logging.getLogger(__name__)


class ContentMode(str, Enum):
    BOUNDARY = "boundary"
    ZERO = "zero"
    MEAN = "mean"
    RANDOM = "random"


class DonorPolicy(str, Enum):
    FRESH = "fresh"
    SINGLE = "single"


class FakeMixConfig(AppModel):
    translate_ratio: float = Field(default=0.5, ge=0.0, le=1.0)
    keep_prob: float = Field(default=0.5, ge=0.0, le=1.0)
    repetitions: int = Field(default=3, ge=0)
    content_mode: ContentMode = ContentMode.BOUNDARY
    donor_policy: DonorPolicy = DonorPolicy.FRESH
    channel_mean: Optional[list[float]] = None

    @model_validator(mode="after")
    def _mean_needs_stats(self) -> "FakeMixConfig":
        if self.content_mode == ContentMode.MEAN and not self.channel_mean:
            raise ValueError("content_mode 'mean' needs channel_mean to be set")
        return self


@dataclass(frozen=True, eq=False)
class Sample:
    """An (image, segmentation label, boundary label) training triple."""

    image: ImageTensor
    seg: MaskLike
    boundary: BinaryMask

    def __post_init__(self):
        check_same_size(self.image, self.seg, self.boundary, what="sample members")

    @classmethod
    def from_seg(
        cls,
        image: ImageTensor,
        seg: MaskLike,
        band: Optional[BoundaryBandConfig] = None,
    ) -> "Sample":
        """Build a sample whose boundary label is generated from seg."""
        band = band or BoundaryBandConfig.for_size(image.height, image.width)
        binary = multiclass_to_binary(seg) if isinstance(seg, ClassMask) else seg
        return cls(image=image, seg=seg, boundary=boundary_band(binary, band))

    @property
    def height(self) -> int:
        return self.image.height

    @property
    def width(self) -> int:
        return self.image.width

    def labels_same_as(self, other: "Sample") -> bool:
        return (
            type(self.seg) is type(other.seg)
            and self.seg.same_as(other.seg)
            and self.boundary.same_as(other.boundary)
        )

    def same_as(self, other: "Sample") -> bool:
        return self.image.same_as(other.image) and self.labels_same_as(other)


class DonorSource:
    """
    Indexable pool of donor samples. Samples are produced on demand by the
    loader, so a large dataset never has to sit in memory. The base sample
    itself can be excluded so that a donor is always 'another' sample.
    """

    def __init__(
        self,
        ids: Sequence[str],
        loader: Callable[[int], Sample],
        exclude: Optional[int] = None,
    ):
        self.ids = list(ids)
        self._loader = loader
        self._candidates = [i for i in range(len(self.ids)) if i != exclude]
        if not self._candidates and self.ids:
            # a single sample pool donates to itself
            self._candidates = list(range(len(self.ids)))
        self._index_of = {donor_id: i for i, donor_id in enumerate(self.ids)}

    @classmethod
    def from_samples(
        cls,
        samples: Sequence[Sample],
        ids: Optional[Sequence[str]] = None,
        exclude: Optional[int] = None,
    ) -> "DonorSource":
        ids = list(ids) if ids is not None else [str(i) for i in range(len(samples))]
        return cls(ids, lambda index: samples[index], exclude=exclude)

    def __len__(self) -> int:
        return len(self._candidates)

    def pick(self, rng: SeededRng) -> tuple[str, Sample]:
        if not self._candidates:
            raise UnprocessableError(detail="Donor pool is empty")
        index = self._candidates[rng.integers(0, len(self._candidates))]
        return self.ids[index], self._loader(index)

    def get(self, donor_id: str) -> Sample:
        try:
            return self._loader(self._index_of[donor_id])
        except KeyError as err:
            raise NotFoundError(detail=f"Donor {donor_id} is not in the pool") from err


@dataclass(frozen=True)
class Paste:
    """One pasted fake boundary: which donor, where it moved, content offset."""

    donor_id: str
    dx: int
    dy: int
    shift_x: int = 0
    shift_y: int = 0

    @property
    def translation(self) -> TranslationVector:
        return TranslationVector(dx=self.dx, dy=self.dy)

    def to_record(self) -> dict:
        record = {"id": self.donor_id, "dx": self.dx, "dy": self.dy}
        if self.shift_x or self.shift_y:
            record.update(shift_x=self.shift_x, shift_y=self.shift_y)
        return record

    @classmethod
    def from_record(cls, record: dict) -> "Paste":
        return cls(
            donor_id=str(record["id"]),
            dx=int(record["dx"]),
            dy=int(record["dy"]),
            shift_x=int(record.get("shift_x", 0)),
            shift_y=int(record.get("shift_y", 0)),
        )


@dataclass
class FakeMixOutcome:
    sample: Sample
    applied: bool
    pastes: list[Paste] = field(default_factory=list)

    @property
    def outcome(self) -> str:
        return "augmented" if self.applied else "original"


def extract_t_boundary(donor: Sample) -> ImageTensor:
    """RB2 = GB2 * I2: the donor image restricted to its boundary band."""
    return elementwise_mul(donor.image, donor.boundary)


def normalize_donor(donor: Sample, height: int, width: int) -> Sample:
    """Resize a donor to the base size: bilinear image, nearest neighbour masks."""
    if (donor.height, donor.width) == (height, width):
        return donor
    LOGGER.debug(
        "Resizing donor from %dx%d to %dx%d", donor.height, donor.width, height, width
    )
    return Sample(
        image=clip_unit(upsample_bilinear(donor.image, height, width)),
        seg=resize_nearest(donor.seg, height, width),
        boundary=resize_nearest(donor.boundary, height, width),
    )


def _fake_content(
    donor: Sample,
    moved_band: BinaryMask,
    paste: Paste,
    cfg: FakeMixConfig,
) -> ImageTensor:
    """RB2' for the configured content mode; always zero outside GB2'."""
    if cfg.content_mode == ContentMode.BOUNDARY:
        return translate_zero_fill(extract_t_boundary(donor), paste.translation)
    if cfg.content_mode == ContentMode.ZERO:
        return ImageTensor.zeros(donor.height, donor.width, donor.image.channels)
    if cfg.content_mode == ContentMode.MEAN:
        mean = np.asarray(cfg.channel_mean, dtype=np.float64)
        if mean.shape != (donor.image.channels,):
            raise ShapeMismatchError(
                detail=f"channel_mean has {mean.size} values for "
                f"{donor.image.channels} channels"
            )
        fill = np.broadcast_to(mean, donor.image.shape)
        return elementwise_mul(ImageTensor(fill), moved_band)
    region = np.roll(donor.image.data, (paste.shift_y, paste.shift_x), axis=(0, 1))
    return elementwise_mul(ImageTensor(region), moved_band)


def _paste(image: ImageTensor, donor: Sample, paste: Paste, cfg: FakeMixConfig):
    if image.shape != donor.image.shape:
        raise ShapeMismatchError(
            detail=f"Base image {image.shape} and donor image {donor.image.shape} "
            "differ; normalise the donor first"
        )
    moved_band = translate_zero_fill(donor.boundary, paste.translation)
    content = _fake_content(donor, moved_band, paste, cfg)
    # (1 - GB2') * I1 + RB2' with RB2' zero outside GB2', written as a switch
    # so every pixel comes from exactly one source
    switch = moved_band.as_bool()[:, :, np.newaxis]
    return ImageTensor(np.where(switch, content.data, image.data))


def _draw_paste(
    donor_id: str, donor: Sample, cfg: FakeMixConfig, rng: SeededRng
) -> Paste:
    d = sample_translation(donor.width, donor.height, cfg.translate_ratio, rng)
    shift_x = shift_y = 0
    if cfg.content_mode == ContentMode.RANDOM:
        shift_y = rng.integers(0, donor.height)
        shift_x = rng.integers(0, donor.width)
    return Paste(donor_id=donor_id, dx=d.dx, dy=d.dy, shift_x=shift_x, shift_y=shift_y)


def fakemix_once(
    base: Sample,
    donor: Sample,
    cfg: FakeMixConfig,
    rng: SeededRng,
    donor_id: str = "donor",
) -> Sample:
    """
    Paste one translated boundary band of donor onto base. The labels of
    the result are base's labels.
    """
    check_same_size(base, donor, what="base and donor")
    paste = _draw_paste(donor_id, donor, cfg, rng)
    image = _paste(base.image, donor, paste, cfg)
    return Sample(image=image, seg=base.seg, boundary=base.boundary)


def run_fakemix(
    base: Sample, donors: DonorSource, cfg: FakeMixConfig, rng: SeededRng
) -> FakeMixOutcome:
    """
    The full FakeMix draw with its trace. The Bernoulli trial comes first,
    so keeping the original performs no donor reads.
    """
    if cfg.repetitions > 0 and len(donors) == 0:
        raise UnprocessableError(
            detail="FakeMix needs a non-empty donor pool when repetitions > 0"
        )
    if rng.random() < cfg.keep_prob:
        return FakeMixOutcome(sample=base, applied=False)

    image = base.image
    pastes = []
    donor_id, donor = None, None
    for _ in range(cfg.repetitions):
        if donor is None or cfg.donor_policy == DonorPolicy.FRESH:
            donor_id, donor = donors.pick(rng)
            donor = normalize_donor(donor, base.height, base.width)
        paste = _draw_paste(donor_id, donor, cfg, rng)
        image = _paste(image, donor, paste, cfg)
        pastes.append(paste)

    LOGGER.debug("FakeMix pasted %d fake boundaries", len(pastes))
    return FakeMixOutcome(
        sample=Sample(image=image, seg=base.seg, boundary=base.boundary),
        applied=True,
        pastes=pastes,
    )


def fakemix(
    base: Sample, donors: DonorSource, cfg: FakeMixConfig, rng: SeededRng
) -> Sample:
    return run_fakemix(base, donors, cfg, rng).sample


def replay_fakemix(
    base: Sample,
    donors: DonorSource,
    cfg: FakeMixConfig,
    pastes: Sequence[Paste],
) -> Sample:
    """Rebuild a FakeMix composite from its recorded pastes."""
    image = base.image
    for paste in pastes:
        donor = normalize_donor(donors.get(paste.donor_id), base.height, base.width)
        image = _paste(image, donor, paste, cfg)
    return Sample(image=image, seg=base.seg, boundary=base.boundary)


# Baselines


@dataclass(frozen=True)
class CutBox:
    """Half-open pixel rectangle [top, bottom) x [left, right)."""

    top: int
    left: int
    bottom: int
    right: int

    @property
    def area(self) -> int:
        return max(0, self.bottom - self.top) * max(0, self.right - self.left)

    def slices(self) -> tuple[slice, slice]:
        return slice(self.top, self.bottom), slice(self.left, self.right)

    def to_record(self) -> dict:
        return {
            "top": self.top,
            "left": self.left,
            "bottom": self.bottom,
            "right": self.right,
        }


def _check_pair(a: Sample, b: Sample) -> None:
    if a.image.shape != b.image.shape:
        raise ShapeMismatchError(
            detail=f"Samples differ in shape: {a.image.shape} vs {b.image.shape}"
        )


def draw_mix_ratio(alpha: float, rng: SeededRng) -> float:
    if alpha <= 0:
        raise BadInputError(detail=f"Mixup alpha must be > 0, got {alpha}")
    return rng.beta(alpha, alpha)


def mixup(
    a: Sample,
    b: Sample,
    alpha: float,
    rng: SeededRng,
    mix_ratio: Optional[float] = None,
) -> Sample:
    """
    image = lam * a + (1 - lam) * b with lam ~ Beta(alpha, alpha). The labels
    come from the dominant sample (lam >= 0.5 keeps a's labels).
    """
    _check_pair(a, b)
    lam = draw_mix_ratio(alpha, rng) if mix_ratio is None else float(mix_ratio)
    if not 0.0 <= lam <= 1.0:
        raise BadInputError(detail=f"Mix ratio must lie in [0, 1], got {lam}")
    mixed = np.clip(lam * a.image.data + (1.0 - lam) * b.image.data, 0.0, 1.0)
    labels = a if lam >= 0.5 else b
    return Sample(image=ImageTensor(mixed), seg=labels.seg, boundary=labels.boundary)


def draw_cutout_box(
    height: int,
    width: int,
    hole_size: int,
    rng: SeededRng,
    center: Optional[tuple[int, int]] = None,
) -> CutBox:
    if hole_size < 0:
        raise BadInputError(detail=f"Cutout hole size must be >= 0, got {hole_size}")
    if center is None:
        center = (rng.integers(0, height), rng.integers(0, width))
    cy, cx = center
    top, left = cy - hole_size // 2, cx - hole_size // 2
    return CutBox(
        top=int(np.clip(top, 0, height)),
        left=int(np.clip(left, 0, width)),
        bottom=int(np.clip(top + hole_size, 0, height)),
        right=int(np.clip(left + hole_size, 0, width)),
    )


def cutout(
    a: Sample,
    hole_size: int,
    rng: SeededRng,
    center: Optional[tuple[int, int]] = None,
) -> Sample:
    """Zero a square hole (clipped to the image) at a uniform random center."""
    box = draw_cutout_box(a.height, a.width, hole_size, rng, center)
    image = a.image.data.copy()
    image[box.slices()] = 0.0
    return Sample(image=ImageTensor(image), seg=a.seg, boundary=a.boundary)


def draw_cutmix_box(
    height: int,
    width: int,
    rng: SeededRng,
    area_ratio: Optional[float] = None,
) -> CutBox:
    """
    A box with area ratio r ~ U(0, 1) and the image aspect, placed uniformly
    inside the image.
    """
    ratio = rng.random() if area_ratio is None else float(area_ratio)
    if not 0.0 <= ratio <= 1.0:
        raise BadInputError(detail=f"CutMix area ratio must lie in [0, 1], got {ratio}")
    cut_h = int(np.floor(height * np.sqrt(ratio)))
    cut_w = int(np.floor(width * np.sqrt(ratio)))
    top = rng.integers(0, height - cut_h + 1)
    left = rng.integers(0, width - cut_w + 1)
    return CutBox(top=top, left=left, bottom=top + cut_h, right=left + cut_w)


def cutmix(
    a: Sample,
    b: Sample,
    rng: SeededRng,
    area_ratio: Optional[float] = None,
    box: Optional[CutBox] = None,
) -> Sample:
    """Copy a rectangle of b into a, for image, seg and boundary together."""
    _check_pair(a, b)
    if type(a.seg) is not type(b.seg):
        raise ShapeMismatchError(
            detail="CutMix needs both samples to use one label type"
        )
    box = box or draw_cutmix_box(a.height, a.width, rng, area_ratio)
    region = box.slices()

    image = a.image.data.copy()
    image[region] = b.image.data[region]
    seg = a.seg.data.copy()
    seg[region] = b.seg.data[region]
    bnd = a.boundary.data.copy()
    bnd[region] = b.boundary.data[region]
    return Sample(
        image=ImageTensor(image), seg=type(a.seg)(seg), boundary=BinaryMask(bnd)
    )


@dataclass
class BaselineOutcome:
    """A baseline result together with the draws needed to replay it."""

    sample: Sample
    partner_id: Optional[str] = None
    details: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        record = dict(self.details)
        if self.partner_id is not None:
            record["partner"] = self.partner_id
        return record


def _box_from_record(record: dict) -> CutBox:
    return CutBox(
        top=int(record["top"]),
        left=int(record["left"]),
        bottom=int(record["bottom"]),
        right=int(record["right"]),
    )


def run_mixup(
    base: Sample, donors: DonorSource, alpha: float, rng: SeededRng
) -> BaselineOutcome:
    partner_id, partner = donors.pick(rng)
    partner = normalize_donor(partner, base.height, base.width)
    lam = draw_mix_ratio(alpha, rng)
    return BaselineOutcome(
        sample=mixup(base, partner, alpha, rng, mix_ratio=lam),
        partner_id=partner_id,
        details={"mix_ratio": lam},
    )


def run_cutout(base: Sample, hole_size: int, rng: SeededRng) -> BaselineOutcome:
    box = draw_cutout_box(base.height, base.width, hole_size, rng)
    image = base.image.data.copy()
    image[box.slices()] = 0.0
    return BaselineOutcome(
        sample=Sample(image=ImageTensor(image), seg=base.seg, boundary=base.boundary),
        details={"box": box.to_record()},
    )


def run_cutmix(base: Sample, donors: DonorSource, rng: SeededRng) -> BaselineOutcome:
    partner_id, partner = donors.pick(rng)
    partner = normalize_donor(partner, base.height, base.width)
    box = draw_cutmix_box(base.height, base.width, rng)
    return BaselineOutcome(
        sample=cutmix(base, partner, rng, box=box),
        partner_id=partner_id,
        details={"box": box.to_record()},
    )


def replay_baseline(
    method: str, base: Sample, donors: DonorSource, record: dict
) -> Sample:
    """Rebuild a Mixup / Cutout / CutMix result from its provenance record."""
    if method == "cutout":
        image = base.image.data.copy()
        image[_box_from_record(record["box"]).slices()] = 0.0
        return Sample(image=ImageTensor(image), seg=base.seg, boundary=base.boundary)

    partner = normalize_donor(donors.get(record["partner"]), base.height, base.width)
    # the recorded draws make the rng irrelevant
    rng = SeededRng(seed=0)
    if method == "mixup":
        return mixup(base, partner, 1.0, rng, mix_ratio=float(record["mix_ratio"]))
    if method == "cutmix":
        return cutmix(base, partner, rng, box=_box_from_record(record["box"]))
    raise BadInputError(detail=f"Unknown baseline method '{method}'")
