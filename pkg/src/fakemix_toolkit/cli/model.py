"""
Run configuration shared by the subcommands, and its resolution from
defaults, a --config file, FAKEMIX_* variables and command line flags.
"""

import argparse
import logging
from enum import Enum
from pathlib import Path
from typing import Optional

from pydantic import Field

from fakemix_toolkit.augment import ContentMode, DonorPolicy, FakeMixConfig
from fakemix_toolkit.boundary import BoundaryBandConfig
from fakemix_toolkit.common.config import env_overrides, load_config_file
from fakemix_toolkit.common.model import AppModel
from fakemix_toolkit.imagecore import UINT64_LIMIT

LOGGER = logging.getLogger(__name__)


class AugmentMethod(str, Enum):
    FAKEMIX = "fakemix"
    MIXUP = "mixup"
    CUTOUT = "cutout"
    CUTMIX = "cutmix"


class RunConfig(AppModel):
    seed: int = Field(default=0, ge=0, lt=UINT64_LIMIT)
    workers: int = Field(default=1, ge=1)
    method: AugmentMethod = AugmentMethod.FAKEMIX
    translate_ratio: float = Field(default=0.5, ge=0.0, le=1.0)
    keep_prob: float = Field(default=0.5, ge=0.0, le=1.0)
    repetitions: int = Field(default=3, ge=0)
    content_mode: ContentMode = ContentMode.BOUNDARY
    donor_policy: DonorPolicy = DonorPolicy.FRESH
    alpha: float = Field(default=1.0, gt=0.0)
    hole_size: int = Field(default=16, ge=0)
    thickness: Optional[int] = Field(default=None, ge=1)
    out: Optional[Path] = None

    def fakemix_config(
        self, channel_mean: Optional[list[float]] = None
    ) -> FakeMixConfig:
        if self.content_mode != ContentMode.MEAN:
            channel_mean = None
        return FakeMixConfig(
            translate_ratio=self.translate_ratio,
            keep_prob=self.keep_prob,
            repetitions=self.repetitions,
            content_mode=self.content_mode,
            donor_policy=self.donor_policy,
            channel_mean=channel_mean,
        )

    def band(self) -> Optional[BoundaryBandConfig]:
        """The configured band, or None for the size-scaled default."""
        if self.thickness is None:
            return None
        return BoundaryBandConfig(thickness=self.thickness)


# argparse dest -> RunConfig field
FLAG_FIELDS = {
    "seed": "seed",
    "workers": "workers",
    "method": "method",
    "lambda_": "translate_ratio",
    "prob": "keep_prob",
    "reps": "repetitions",
    "content": "content_mode",
    "donor_policy": "donor_policy",
    "alpha": "alpha",
    "hole_size": "hole_size",
    "thickness": "thickness",
    "out": "out",
}


def run_options_parser() -> argparse.ArgumentParser:
    """Parent parser carrying the options every subcommand accepts."""
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group("run options")
    group.add_argument("--config", type=Path, help="flat JSON file of option values")
    group.add_argument("--verbose", action="store_true", help="log at DEBUG level")
    group.add_argument("--seed", type=int, help="master seed (default 0)")
    group.add_argument("--workers", type=int, help="worker processes (default 1)")
    group.add_argument(
        "--method",
        choices=[method.value for method in AugmentMethod],
        help="augmentation method (default fakemix)",
    )
    group.add_argument(
        "--lambda",
        dest="lambda_",
        type=float,
        help="FakeMix translation ratio in [0, 1] (default 0.5)",
    )
    group.add_argument(
        "--prob", type=float, help="probability of keeping the original (default 0.5)"
    )
    group.add_argument("--reps", type=int, help="FakeMix pastes per sample (default 3)")
    group.add_argument(
        "--content",
        choices=[mode.value for mode in ContentMode],
        help="content pasted into the moved band (default boundary)",
    )
    group.add_argument(
        "--donor-policy",
        choices=[policy.value for policy in DonorPolicy],
        help="fresh donor per paste or a single donor per sample (default fresh)",
    )
    group.add_argument("--alpha", type=float, help="Mixup Beta(alpha, alpha) parameter")
    group.add_argument("--hole-size", type=int, help="Cutout hole side in pixels")
    group.add_argument("--thickness", type=int, help="boundary band radius in pixels")
    group.add_argument("--out", type=Path, help="output file or directory")
    return parser


def resolve_run_config(
    args: argparse.Namespace, environ: Optional[dict[str, str]] = None
) -> RunConfig:
    """
    Merge the configuration sources; later ones win:
    defaults < --config file < FAKEMIX_* environment < explicit flags.
    """
    values = load_config_file(getattr(args, "config", None))
    values.update(env_overrides(environ))
    values.update(
        {
            field: getattr(args, dest)
            for dest, field in FLAG_FIELDS.items()
            if getattr(args, dest, None) is not None
        }
    )
    config = RunConfig.model_validate(values)
    LOGGER.debug("Resolved run configuration: %s", config.model_dump(mode="json"))
    return config
