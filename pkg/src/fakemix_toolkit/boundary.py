"""
Boundary label generation: the band GB straddling the contour of the
segmentation label GS.
"""

import logging

import numpy as np
from pydantic import Field

from fakemix_toolkit.common.model import AppModel
from fakemix_toolkit.imagecore import (
    BinaryMask,
    ClassMask,
    dilate,
    erode,
    round_half_away,
)

LOGGER = logging.getLogger(__name__)

REFERENCE_SIZE = 512
DEFAULT_THICKNESS = 4


class BoundaryBandConfig(AppModel):
    thickness: int = Field(default=DEFAULT_THICKNESS, ge=1)

    @classmethod
    def for_size(
        cls, height: int, width: int, base: int = DEFAULT_THICKNESS
    ) -> "BoundaryBandConfig":
        """Scale the thickness chosen for 512x512 to another working size."""
        scaled = round_half_away(base * min(height, width) / REFERENCE_SIZE)
        return cls(thickness=max(1, scaled))


def multiclass_to_binary(gs: ClassMask) -> BinaryMask:
    return BinaryMask(gs.data != 0)


def boundary_band(gs: BinaryMask, cfg: BoundaryBandConfig) -> BinaryMask:
    """
    dilate(gs, t) AND NOT erode(gs, t): a band about 2t wide around every
    region boundary. The image border counts as background, so regions
    touching it get a band along the border too.
    """
    if isinstance(gs, ClassMask):
        gs = multiclass_to_binary(gs)
    grown = dilate(gs, cfg.thickness).as_bool()
    shrunk = erode(gs, cfg.thickness).as_bool()
    band = BinaryMask(grown & ~shrunk)
    LOGGER.debug(
        "Boundary band t=%d covers %d of %d pixels",
        cfg.thickness,
        band.count(),
        int(np.prod(gs.shape)),
    )
    return band
