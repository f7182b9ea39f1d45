"""
JSON parameter fixtures for the AdaptiveASPP reference.

Every array is stored as its shape fields plus a flat row-major list of
weights, so the same fixture can be loaded by an oracle in any language:

    conv       {in_channels, out_channels, kernel_size, dilation, groups,
                weight[out * (in / groups) * k * k], bias[out]}
    separable  {depthwise: conv, pointwise: conv}
    transform  {branch_count, hidden_width, fc1_weight[N * H], fc1_bias[H],
                fc2_weight[H * N], fc2_bias[N]}
    tensor     {height, width, channels, data[H * W * C]}
"""

import logging
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
from pydantic import Field, model_validator

from fakemix_toolkit.common.error_handling import BadInputError, NotFoundError
from fakemix_toolkit.common.model import AppModel
from fakemix_toolkit.imagecore import ImageTensor, SeededRng
from fakemix_toolkit.neuralref.aspp import AsppConfig, AsppParams, TransformParams
from fakemix_toolkit.neuralref.conv import ConvParams, SeparableConv

LOGGER = logging.getLogger(__name__)

FIXTURE_SCHEMA_VERSION = 1


def _flat(array: np.ndarray) -> list[float]:
    return [float(v) for v in np.asarray(array, dtype=np.float64).reshape(-1)]


class ConvFixture(AppModel):
    in_channels: int = Field(ge=1)
    out_channels: int = Field(ge=1)
    kernel_size: int = Field(ge=1)
    dilation: int = Field(default=1, ge=1)
    groups: int = Field(default=1, ge=1)
    weight: list[float]
    bias: list[float]

    @model_validator(mode="after")
    def _sizes(self) -> "ConvFixture":
        expected = (
            self.out_channels
            * (self.in_channels // self.groups)
            * self.kernel_size
            * self.kernel_size
        )
        if len(self.weight) != expected or len(self.bias) != self.out_channels:
            raise ValueError(
                f"conv fixture needs {expected} weights and {self.out_channels} "
                f"biases, got {len(self.weight)} and {len(self.bias)}"
            )
        return self

    def to_params(self) -> ConvParams:
        shape = (
            self.out_channels,
            self.in_channels // self.groups,
            self.kernel_size,
            self.kernel_size,
        )
        return ConvParams(
            weight=np.reshape(self.weight, shape),
            bias=np.asarray(self.bias),
            dilation=self.dilation,
            groups=self.groups,
        )

    @classmethod
    def from_params(cls, params: ConvParams) -> "ConvFixture":
        return cls(
            in_channels=params.in_channels,
            out_channels=params.out_channels,
            kernel_size=params.kernel_size,
            dilation=params.dilation,
            groups=params.groups,
            weight=_flat(params.weight),
            bias=_flat(params.bias),
        )


class SeparableFixture(AppModel):
    depthwise: ConvFixture
    pointwise: ConvFixture

    def to_params(self) -> SeparableConv:
        return SeparableConv(
            depthwise=self.depthwise.to_params(), pointwise=self.pointwise.to_params()
        )


class TransformFixture(AppModel):
    branch_count: int = Field(ge=1)
    hidden_width: int = Field(ge=1)
    fc1_weight: list[float]
    fc1_bias: list[float]
    fc2_weight: list[float]
    fc2_bias: list[float]

    def to_params(self) -> TransformParams:
        n, hidden = self.branch_count, self.hidden_width
        try:
            return TransformParams(
                fc1_weight=np.reshape(self.fc1_weight, (n, hidden)),
                fc1_bias=np.asarray(self.fc1_bias),
                fc2_weight=np.reshape(self.fc2_weight, (hidden, n)),
                fc2_bias=np.asarray(self.fc2_bias),
            )
        except ValueError as err:
            raise BadInputError(detail=f"Transform fixture has bad sizes: {err}")

    @classmethod
    def from_params(cls, params: TransformParams) -> "TransformFixture":
        return cls(
            branch_count=params.fc1_weight.shape[0],
            hidden_width=params.fc1_weight.shape[1],
            fc1_weight=_flat(params.fc1_weight),
            fc1_bias=_flat(params.fc1_bias),
            fc2_weight=_flat(params.fc2_weight),
            fc2_bias=_flat(params.fc2_bias),
        )


class TensorFixture(AppModel):
    height: int = Field(ge=1)
    width: int = Field(ge=1)
    channels: int = Field(ge=1)
    data: list[float]

    def to_tensor(self) -> ImageTensor:
        if len(self.data) != self.height * self.width * self.channels:
            raise BadInputError(detail="Tensor fixture data does not match its shape")
        shape = (self.height, self.width, self.channels)
        return ImageTensor(np.reshape(self.data, shape))

    @classmethod
    def from_tensor(cls, tensor: ImageTensor) -> "TensorFixture":
        return cls(
            height=tensor.height,
            width=tensor.width,
            channels=tensor.channels,
            data=_flat(tensor.data),
        )


class AsppFixture(AppModel):
    schema_version: Literal[1] = FIXTURE_SCHEMA_VERSION
    config: AsppConfig
    input: TensorFixture
    branches: list[Union[ConvFixture, SeparableFixture]]
    transform_seg: TransformFixture
    transform_bnd: TransformFixture
    squeeze_seg: Optional[ConvFixture] = None
    squeeze_bnd: Optional[ConvFixture] = None

    def to_params(self) -> AsppParams:
        return AsppParams(
            branches=[branch.to_params() for branch in self.branches],
            squeeze_seg=self.squeeze_seg.to_params() if self.squeeze_seg else None,
            squeeze_bnd=self.squeeze_bnd.to_params() if self.squeeze_bnd else None,
        )

    def save(self, path: Path) -> None:
        Path(path).write_text(self.model_dump_json(indent=2), encoding="utf-8")

    @classmethod
    def load(cls, path: Path) -> "AsppFixture":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except FileNotFoundError as err:
            raise NotFoundError(detail=f"Fixture {path} does not exist") from err
        except UnicodeDecodeError as err:
            raise BadInputError(
                detail=f"Fixture {path} is not UTF-8 text: {err}"
            ) from err
        return cls.model_validate_json(text)


def _random_conv(
    generator: np.random.Generator,
    in_channels: int,
    out_channels: int,
    kernel_size: int,
    dilation: int = 1,
    groups: int = 1,
) -> ConvParams:
    fan_in = (in_channels // groups) * kernel_size * kernel_size
    shape = (out_channels, in_channels // groups, kernel_size, kernel_size)
    return ConvParams(
        weight=generator.normal(0.0, np.sqrt(2.0 / fan_in), size=shape),
        bias=generator.normal(0.0, 0.1, size=out_channels),
        dilation=dilation,
        groups=groups,
    )


def _random_transform(
    generator: np.random.Generator, branch_count: int, hidden_width: int
) -> TransformParams:
    return TransformParams(
        fc1_weight=generator.normal(0.0, 1.0, size=(branch_count, hidden_width)),
        fc1_bias=generator.normal(0.0, 0.5, size=hidden_width),
        fc2_weight=generator.normal(0.0, 1.0, size=(hidden_width, branch_count)),
        fc2_bias=generator.normal(0.0, 0.5, size=branch_count),
    )


def default_fixture(
    seed: int = 0,
    cfg: Optional[AsppConfig] = None,
    height: int = 16,
    width: int = 16,
    in_channels: int = 4,
    zero_transforms: bool = False,
    with_squeeze: bool = True,
) -> AsppFixture:
    """A randomly initialised, fully reproducible fixture at toy scale."""
    cfg = cfg or AsppConfig()
    generator = SeededRng(seed=seed).derive("aspp-fixture").generator
    channels = cfg.branch_channels

    branches = []
    for rate in cfg.dilation_rates:
        k = cfg.kernel_size(rate)
        if cfg.separable:
            branches.append(
                SeparableFixture(
                    depthwise=ConvFixture.from_params(
                        _random_conv(
                            generator, in_channels, in_channels, k, rate, in_channels
                        )
                    ),
                    pointwise=ConvFixture.from_params(
                        _random_conv(generator, in_channels, channels, 1)
                    ),
                )
            )
        else:
            branches.append(
                ConvFixture.from_params(
                    _random_conv(generator, in_channels, channels, k, rate)
                )
            )

    n, hidden = cfg.branch_count, cfg.transform_width
    if zero_transforms:
        t_seg = t_bnd = TransformParams.zeros(n, hidden)
    else:
        t_seg = _random_transform(generator, n, hidden)
        t_bnd = _random_transform(generator, n, hidden)

    squeeze_seg = squeeze_bnd = None
    if with_squeeze:
        squeeze_seg = ConvFixture.from_params(
            _random_conv(generator, n * channels, channels, 1)
        )
        squeeze_bnd = ConvFixture.from_params(
            _random_conv(generator, n * channels, channels, 1)
        )

    x = ImageTensor(generator.normal(0.0, 1.0, size=(height, width, in_channels)))
    return AsppFixture(
        config=cfg,
        input=TensorFixture.from_tensor(x),
        branches=branches,
        transform_seg=TransformFixture.from_params(t_seg),
        transform_bnd=TransformFixture.from_params(t_bnd),
        squeeze_seg=squeeze_seg,
        squeeze_bnd=squeeze_bnd,
    )
