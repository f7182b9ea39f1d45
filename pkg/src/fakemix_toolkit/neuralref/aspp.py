"""
Reference forward pass of the adaptive atrous pyramid.

    Y_i   = F_i(X)                        dilated conv per rate
    y_i   = mean(Y_i)                     one scalar per branch
    s^k   = clamp01(max(tanh(G^k(y)), 0)) G^k = FC-ReLU-FC, k in {seg, bnd}
    Z^k   = Y * s^k + Y                   residual enhancement
    out^k = squeeze^k(Z^k)                optional 1x1 conv per modality
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from pydantic import Field, model_validator

from fakemix_toolkit.common.error_handling import BadInputError, ShapeMismatchError
from fakemix_toolkit.common.model import AppModel
from fakemix_toolkit.imagecore import ImageTensor
from fakemix_toolkit.neuralref.conv import AnyConv, ConvParams, apply_conv, dilated_conv

LOGGER = logging.getLogger(__name__)

DEFAULT_DILATION_RATES = (1, 2, 4, 6, 8, 12, 18)


class AsppConfig(AppModel):
    branch_count: int = Field(default=len(DEFAULT_DILATION_RATES), ge=1)
    dilation_rates: list[int] = Field(
        default_factory=lambda: list(DEFAULT_DILATION_RATES)
    )
    branch_channels: int = Field(default=8, ge=1)
    hidden_width: Optional[int] = Field(default=None, ge=1)
    separable: bool = False

    @model_validator(mode="after")
    def _rates_match_branches(self) -> "AsppConfig":
        if len(self.dilation_rates) != self.branch_count:
            raise ValueError(
                f"{self.branch_count} branches need {self.branch_count} dilation "
                f"rates, got {len(self.dilation_rates)}"
            )
        if any(rate < 1 for rate in self.dilation_rates):
            raise ValueError("dilation rates must be >= 1")
        if any(b <= a for a, b in zip(self.dilation_rates, self.dilation_rates[1:])):
            raise ValueError("dilation rates must be strictly increasing")
        return self

    @property
    def transform_width(self) -> int:
        return self.hidden_width or self.branch_count

    def kernel_size(self, rate: int) -> int:
        """Rate 1 branches are 1x1, the dilated ones 3x3."""
        return 1 if rate == 1 else 3


@dataclass(frozen=True, eq=False)
class TransformParams:
    """FC-ReLU-FC block: fc1 maps N -> H, fc2 maps H -> N (row vector convention)."""

    fc1_weight: np.ndarray
    fc1_bias: np.ndarray
    fc2_weight: np.ndarray
    fc2_bias: np.ndarray

    def __post_init__(self):
        arrays = {
            name: np.array(getattr(self, name), dtype=np.float64)
            for name in ("fc1_weight", "fc1_bias", "fc2_weight", "fc2_bias")
        }
        n, hidden = arrays["fc1_weight"].shape
        expected = {
            "fc1_bias": (hidden,),
            "fc2_weight": (hidden, n),
            "fc2_bias": (n,),
        }
        for name, shape in expected.items():
            if arrays[name].shape != shape:
                raise ShapeMismatchError(
                    detail=f"{name} must have shape {shape}, got {arrays[name].shape}"
                )
        for name, array in arrays.items():
            array.flags.writeable = False
            object.__setattr__(self, name, array)

    @classmethod
    def zeros(cls, branch_count: int, hidden_width: Optional[int] = None):
        hidden = hidden_width or branch_count
        return cls(
            fc1_weight=np.zeros((branch_count, hidden)),
            fc1_bias=np.zeros(hidden),
            fc2_weight=np.zeros((hidden, branch_count)),
            fc2_bias=np.zeros(branch_count),
        )

    @property
    def branch_count(self) -> int:
        return self.fc1_weight.shape[0]


@dataclass(frozen=True, eq=False)
class ImportanceVector:
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if np.any(~np.isfinite(values)) or np.any((values < 0.0) | (values > 1.0)):
            raise BadInputError(
                detail=f"Importance scores must lie in [0, 1]: {values}"
            )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, branch_count: int, value: float) -> "ImportanceVector":
        return cls(np.full(branch_count, value))

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class AsppParams:
    branches: Sequence[AnyConv]
    squeeze_seg: Optional[ConvParams] = None
    squeeze_bnd: Optional[ConvParams] = None


@dataclass(frozen=True, eq=False)
class AsppTrace:
    ys: list[ImageTensor]
    descriptor: np.ndarray
    s_seg: ImportanceVector
    s_bnd: ImportanceVector
    enhanced_seg: ImageTensor
    enhanced_bnd: ImageTensor
    z_seg: ImageTensor
    z_bnd: ImageTensor


def aspp_branches(
    x: ImageTensor, cfg: AsppConfig, params: Sequence[AnyConv]
) -> list[ImageTensor]:
    if len(params) != cfg.branch_count:
        raise ShapeMismatchError(
            detail=f"{cfg.branch_count} branches configured, {len(params)} given"
        )
    ys = []
    for rate, conv in zip(cfg.dilation_rates, params):
        if conv.dilation != rate:
            raise BadInputError(
                detail=f"Branch conv has dilation {conv.dilation}, configured {rate}"
            )
        ys.append(apply_conv(x, conv))
    return ys


def pooled_descriptor(ys: Sequence[ImageTensor]) -> np.ndarray:
    """Average pool every branch over channels and pixels: y_i = mean(Y_i)."""
    return np.array([y.data.mean() for y in ys], dtype=np.float64)


def clipped_tanh(v: np.ndarray) -> np.ndarray:
    return np.maximum(np.tanh(np.asarray(v, dtype=np.float64)), 0.0)


def _check_transform(y: np.ndarray, t: TransformParams) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if y.size != t.branch_count:
        raise ShapeMismatchError(
            detail=f"Descriptor has {y.size} entries, "
            f"transform expects {t.branch_count}"
        )
    return y


def importance_scores(y: np.ndarray, t: TransformParams) -> ImportanceVector:
    y = _check_transform(y, t)
    hidden = np.maximum(y @ t.fc1_weight + t.fc1_bias, 0.0)
    scores = clipped_tanh(hidden @ t.fc2_weight + t.fc2_bias)
    # max(tanh, 0) already lands in [0, 1); the clamp is the normalisation step
    return ImportanceVector(np.clip(scores, 0.0, 1.0))


def importance_scores_vjp(
    y: np.ndarray, t: TransformParams, cotangent: np.ndarray
) -> np.ndarray:
    """Gradient of <cotangent, importance_scores(y)> with respect to y."""
    y = _check_transform(y, t)
    pre_hidden = y @ t.fc1_weight + t.fc1_bias
    hidden = np.maximum(pre_hidden, 0.0)
    logits = hidden @ t.fc2_weight + t.fc2_bias
    tanh = np.tanh(logits)
    grad_logits = np.asarray(cotangent, dtype=np.float64) * (1.0 - tanh**2) * (tanh > 0)
    grad_hidden = (grad_logits @ t.fc2_weight.T) * (pre_hidden > 0)
    return grad_hidden @ t.fc1_weight.T


def enhance(ys: Sequence[ImageTensor], s: ImportanceVector) -> ImageTensor:
    """Z = Y * s + Y per branch, concatenated along channels (before squeezing)."""
    if len(ys) != len(s):
        raise ShapeMismatchError(
            detail=f"{len(ys)} branches but {len(s)} importance scores"
        )
    scaled = [y.data * score + y.data for y, score in zip(ys, s.values)]
    return ImageTensor(np.concatenate(scaled, axis=2))


def squeeze(z: ImageTensor, conv: Optional[ConvParams]) -> ImageTensor:
    if conv is None:
        return z
    if conv.kernel_size != 1:
        raise BadInputError(detail="The squeeze convolution must be 1x1")
    return dilated_conv(z, conv)


def adaptive_aspp_trace(
    x: ImageTensor,
    cfg: AsppConfig,
    params: AsppParams,
    t_seg: TransformParams,
    t_bnd: TransformParams,
) -> AsppTrace:
    ys = aspp_branches(x, cfg, params.branches)
    descriptor = pooled_descriptor(ys)
    s_seg = importance_scores(descriptor, t_seg)
    s_bnd = importance_scores(descriptor, t_bnd)
    enhanced_seg = enhance(ys, s_seg)
    enhanced_bnd = enhance(ys, s_bnd)
    LOGGER.debug("AdaptiveASPP scores seg=%s bnd=%s", s_seg.values, s_bnd.values)
    return AsppTrace(
        ys=ys,
        descriptor=descriptor,
        s_seg=s_seg,
        s_bnd=s_bnd,
        enhanced_seg=enhanced_seg,
        enhanced_bnd=enhanced_bnd,
        z_seg=squeeze(enhanced_seg, params.squeeze_seg),
        z_bnd=squeeze(enhanced_bnd, params.squeeze_bnd),
    )


def adaptive_aspp_forward(
    x: ImageTensor,
    cfg: AsppConfig,
    params: AsppParams,
    t_seg: TransformParams,
    t_bnd: TransformParams,
) -> tuple[ImageTensor, ImageTensor]:
    """Shared pyramid, per-modality scores and squeeze: returns (Z^s, Z^b)."""
    trace = adaptive_aspp_trace(x, cfg, params, t_seg, t_bnd)
    return trace.z_seg, trace.z_bnd
