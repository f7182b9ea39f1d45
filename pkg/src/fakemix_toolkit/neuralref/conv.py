import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from fakemix_toolkit.common.error_handling import BadInputError, ShapeMismatchError
from fakemix_toolkit.imagecore import ImageTensor

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ConvParams:
    """
    Weights of a same-size 2D cross-correlation.

    weight has shape (out_channels, in_channels // groups, k, k) with k odd;
    groups=1 is a dense convolution, groups=in_channels a depthwise one.
    """

    weight: np.ndarray
    bias: np.ndarray
    dilation: int = 1
    groups: int = 1

    def __post_init__(self):
        weight = np.array(self.weight, dtype=np.float64)
        bias = np.array(self.bias, dtype=np.float64).reshape(-1)
        if weight.ndim != 4 or weight.shape[2] != weight.shape[3]:
            raise ShapeMismatchError(
                detail=f"Conv weight must be (out, in, k, k), got {weight.shape}"
            )
        if weight.shape[2] % 2 != 1:
            raise BadInputError(
                detail=f"Kernel size must be odd, got {weight.shape[2]}"
            )
        if bias.shape != (weight.shape[0],):
            raise ShapeMismatchError(
                detail=f"Conv bias needs {weight.shape[0]} values, got {bias.size}"
            )
        if self.dilation < 1:
            raise BadInputError(detail=f"Dilation must be >= 1, got {self.dilation}")
        if self.groups < 1 or weight.shape[0] % self.groups:
            raise BadInputError(
                detail=f"{weight.shape[0]} output channels cannot split "
                f"into {self.groups} groups"
            )
        weight.flags.writeable = False
        bias.flags.writeable = False
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "bias", bias)

    @classmethod
    def identity(cls, channels: int) -> "ConvParams":
        weight = np.eye(channels)[:, :, np.newaxis, np.newaxis]
        return cls(weight=weight, bias=np.zeros(channels))

    @property
    def out_channels(self) -> int:
        return self.weight.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weight.shape[1] * self.groups

    @property
    def kernel_size(self) -> int:
        return self.weight.shape[2]

    @property
    def padding(self) -> int:
        """Zero padding that keeps the output the size of the input."""
        return self.dilation * (self.kernel_size - 1) // 2


@dataclass(frozen=True, eq=False)
class SeparableConv:
    """Depthwise dilated convolution followed by a pointwise 1x1 one."""

    depthwise: ConvParams
    pointwise: ConvParams

    def __post_init__(self):
        if self.depthwise.groups != self.depthwise.in_channels:
            raise BadInputError(detail="Separable depthwise stage must be depthwise")
        if self.pointwise.kernel_size != 1:
            raise BadInputError(detail="Separable pointwise stage must be 1x1")
        if self.pointwise.in_channels != self.depthwise.out_channels:
            raise ShapeMismatchError(
                detail="Separable pointwise input does not match depthwise output"
            )

    @property
    def dilation(self) -> int:
        return self.depthwise.dilation

    @property
    def in_channels(self) -> int:
        return self.depthwise.in_channels

    @property
    def out_channels(self) -> int:
        return self.pointwise.out_channels


AnyConv = Union[ConvParams, SeparableConv]


def dilated_conv(x: ImageTensor, p: ConvParams) -> ImageTensor:
    """
    Same-size dilated cross-correlation with zero padding:

        out[y, x, o] = bias[o]
            + sum_{c,i,j} w[o, c, i, j] * in[y + d*i - pad, x + d*j - pad, c]
    """
    if x.channels != p.in_channels:
        raise ShapeMismatchError(
            detail=f"Input has {x.channels} channels, conv expects {p.in_channels}"
        )
    pad, d, k = p.padding, p.dilation, p.kernel_size
    height, width = x.height, x.width
    padded = np.pad(x.data, ((pad, pad), (pad, pad), (0, 0)))
    out = np.zeros((height, width, p.out_channels))
    in_group = p.in_channels // p.groups
    out_group = p.out_channels // p.groups

    for i in range(k):
        for j in range(k):
            window = padded[i * d : i * d + height, j * d : j * d + width, :]
            for g in range(p.groups):
                taps = p.weight[g * out_group : (g + 1) * out_group, :, i, j]
                out[:, :, g * out_group : (g + 1) * out_group] += (
                    window[:, :, g * in_group : (g + 1) * in_group] @ taps.T
                )
    return ImageTensor(out + p.bias)


def apply_conv(x: ImageTensor, p: AnyConv) -> ImageTensor:
    if isinstance(p, SeparableConv):
        return dilated_conv(dilated_conv(x, p.depthwise), p.pointwise)
    return dilated_conv(x, p)
