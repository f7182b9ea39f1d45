"""
Dual-branch decoder fusion. Stage 4 is the coarsest; each finer stage adds
the upsampled output of the stage above it. The segmentation branch also
attends to the boundary features: F(Z^s + Z^s * Z^b [+ UP(M^s_above)]).
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from fakemix_toolkit.common.error_handling import ShapeMismatchError
from fakemix_toolkit.imagecore import ImageTensor, check_same_size, upsample_bilinear
from fakemix_toolkit.neuralref.conv import ConvParams, dilated_conv

LOGGER = logging.getLogger(__name__)

STAGES = 4


@dataclass
class DecoderState:
    """Per-stage features, index 0 holding stage 1 (the finest)."""

    z_seg: list[ImageTensor]
    z_bnd: list[ImageTensor]
    m_seg: list[Optional[ImageTensor]] = field(default_factory=list)
    m_bnd: list[Optional[ImageTensor]] = field(default_factory=list)

    def __post_init__(self):
        if len(self.z_seg) != len(self.z_bnd):
            raise ShapeMismatchError(detail="Both branches need the same stage count")
        for finer, coarser in zip(self.z_seg, self.z_seg[1:]):
            if (
                (finer.height + 1) // 2 != coarser.height
                or (finer.width + 1) // 2 != coarser.width
            ):
                raise ShapeMismatchError(
                    detail=f"Stage sizes must halve: {finer.shape} -> {coarser.shape}"
                )
        for seg, bnd in zip(self.z_seg, self.z_bnd):
            check_same_size(seg, bnd, what="segmentation and boundary stage features")
        if not self.m_seg:
            self.m_seg = [None] * len(self.z_seg)
        if not self.m_bnd:
            self.m_bnd = [None] * len(self.z_bnd)


def _add_upsampled(inner: np.ndarray, m_above: Optional[ImageTensor]) -> np.ndarray:
    if m_above is None:
        return inner
    up = upsample_bilinear(m_above, inner.shape[0], inner.shape[1])
    if up.channels != inner.shape[2]:
        raise ShapeMismatchError(
            detail=f"Stage above has {up.channels} channels, "
            f"this stage {inner.shape[2]}"
        )
    return inner + up.data


def decoder_fuse_seg(
    z_s: ImageTensor,
    z_b: ImageTensor,
    m_above: Optional[ImageTensor],
    f: ConvParams,
) -> ImageTensor:
    check_same_size(z_s, z_b, what="z_s and z_b")
    if z_b.channels not in (1, z_s.channels):
        raise ShapeMismatchError(
            detail=f"Cannot attend {z_s.channels} channels with {z_b.channels}"
        )
    inner = z_s.data + z_s.data * z_b.data
    return dilated_conv(ImageTensor(_add_upsampled(inner, m_above)), f)


def decoder_fuse_bnd(
    z_b: ImageTensor, m_above: Optional[ImageTensor], f: ConvParams
) -> ImageTensor:
    return dilated_conv(ImageTensor(_add_upsampled(z_b.data, m_above)), f)


def decoder_forward(
    z_seg: Sequence[ImageTensor],
    z_bnd: Sequence[ImageTensor],
    f_seg: Sequence[ConvParams],
    f_bnd: Sequence[ConvParams],
) -> DecoderState:
    """Integrate the stages bottom (coarsest) to top in both branches."""
    state = DecoderState(z_seg=list(z_seg), z_bnd=list(z_bnd))
    stages = len(state.z_seg)
    if len(f_seg) != stages or len(f_bnd) != stages:
        raise ShapeMismatchError(detail=f"Need one F per stage ({stages}) per branch")

    above_seg = above_bnd = None
    for p in reversed(range(stages)):
        above_seg = decoder_fuse_seg(
            state.z_seg[p], state.z_bnd[p], above_seg, f_seg[p]
        )
        above_bnd = decoder_fuse_bnd(state.z_bnd[p], above_bnd, f_bnd[p])
        state.m_seg[p] = above_seg
        state.m_bnd[p] = above_bnd
    LOGGER.debug("Decoded %d stages, finest output %s", stages, above_seg.shape)
    return state


def visualize_features(m: ImageTensor) -> ImageTensor:
    """
    Channel-wise max, min-max normalised to [0, 1] for rendering. A constant
    map has no range and renders all zero.
    """
    peak = m.data.max(axis=2)
    low, high = peak.min(), peak.max()
    if high - low <= 0:
        return ImageTensor(np.zeros_like(peak))
    return ImageTensor((peak - low) / (high - low))
