"""
Utility functions to be used in tests
"""

import hashlib
import json
import os.path
from pathlib import Path
from typing import Optional

import numpy as np
from deepdiff import DeepDiff

from fakemix_toolkit.augment import Sample
from fakemix_toolkit.imagecore import BinaryMask, ClassMask, ImageTensor, SeededRng


def assert_json_is_equal(json_a, json_b, exclude_paths=None):
    """
    Utility function to compare two JSON objects
    """
    # key/values in the generated JSON do not necessarily have the same order
    # as the expected string, even though they are equivalent JSON objects.
    # Ensure a stable test by comparing the JSON objects themselves.
    obj_a = json.loads(json_a)
    obj_b = json.loads(json_b)
    try:
        assert obj_a == obj_b
    except AssertionError:
        # raise a more useful exception that shows *where* the JSON differs
        diff = DeepDiff(obj_a, obj_b, ignore_order=True, exclude_paths=exclude_paths)
        assert {} == diff, f"JSON not equal: {diff}"


def load_string_from_file(filename):
    """
    Return a file from the current directory as a string
    """
    cwd, _ = os.path.split(__file__)
    path = os.path.join(cwd, filename)
    with open(path, "r", encoding="utf-8") as json_file:
        json_data = json_file.read()
        return json_data


def tree_digest(root: Path) -> dict[str, str]:
    """SHA-256 of every file below root, keyed by relative path."""
    root = Path(root)
    return {
        path.relative_to(root).as_posix(): hashlib.sha256(path.read_bytes()).hexdigest()
        for path in sorted(root.rglob("*"))
        if path.is_file()
    }


class TestDataFactory:
    @staticmethod
    def square_mask(
        height: int = 8, width: int = 8, top: int = 2, left: int = 2, size: int = 4
    ) -> BinaryMask:
        data = np.zeros((height, width), dtype=np.uint8)
        data[top : top + size, left : left + size] = 1
        return BinaryMask(data)

    @staticmethod
    def random_image(
        height: int = 8, width: int = 8, channels: int = 3, seed: int = 0
    ) -> ImageTensor:
        generator = SeededRng(seed=seed).generator
        return ImageTensor(generator.random((height, width, channels)))

    @staticmethod
    def sample(
        height: int = 8,
        width: int = 8,
        seed: int = 0,
        boundary: Optional[BinaryMask] = None,
        class_labels: bool = True,
    ) -> Sample:
        """
        A random image with a square object. The boundary defaults to the
        square's outline.
        """
        top, left = height // 4, width // 4
        mask = TestDataFactory.square_mask(height, width, top, left, height // 2)
        if boundary is None:
            inner = np.zeros_like(mask.data)
            inner[top + 1 : 3 * height // 4 - 1, left + 1 : 3 * width // 4 - 1] = 1
            boundary = BinaryMask(mask.data & (1 - inner))
        seg = ClassMask(mask.data) if class_labels else mask
        return Sample(
            image=TestDataFactory.random_image(height, width, seed=seed),
            seg=seg,
            boundary=boundary,
        )

    @staticmethod
    def solid_sample(height: int, width: int, value: float, band: BinaryMask) -> Sample:
        return Sample(
            image=ImageTensor.full(height, width, 3, value),
            seg=ClassMask(band.data),
            boundary=band,
        )


SMALL_ASPP_FIXTURE_JSON = load_string_from_file("files/aspp_fixture_small.json")
