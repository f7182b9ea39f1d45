"""
Unit tests for the Mixup, Cutout and CutMix baselines
"""

import numpy as np
import pytest

from fakemix_toolkit.augment import (
    BaselineOutcome,
    CutBox,
    DonorSource,
    cutmix,
    cutout,
    draw_cutmix_box,
    draw_cutout_box,
    mixup,
    replay_baseline,
    run_cutmix,
    run_cutout,
    run_mixup,
)
from fakemix_toolkit.common.error_handling import BadInputError, ShapeMismatchError
from fakemix_toolkit.imagecore import SeededRng
from tests.unit.util import TestDataFactory


@pytest.fixture(name="pair")
def pair_fixture():
    return (
        TestDataFactory.sample(16, 16, seed=1),
        TestDataFactory.sample(16, 16, seed=2),
    )


class TestMixup:
    def test_ratio_one_returns_first_sample(self, pair):
        a, b = pair

        result = mixup(a, b, 1.0, SeededRng(seed=0), mix_ratio=1.0)

        assert result.same_as(a)

    def test_ratio_zero_returns_second_sample(self, pair):
        a, b = pair

        result = mixup(a, b, 1.0, SeededRng(seed=0), mix_ratio=0.0)

        assert result.same_as(b)

    def test_labels_follow_the_dominant_sample(self, pair):
        a, b = pair

        result = mixup(a, b, 1.0, SeededRng(seed=0), mix_ratio=0.3)

        np.testing.assert_allclose(
            result.image.data, 0.3 * a.image.data + 0.7 * b.image.data
        )
        assert result.labels_same_as(b)

    def test_alpha_must_be_positive(self, pair):
        a, b = pair

        with pytest.raises(BadInputError):
            mixup(a, b, 0.0, SeededRng(seed=0))

    def test_shapes_must_match(self, pair):
        a, _ = pair

        with pytest.raises(ShapeMismatchError):
            mixup(a, TestDataFactory.sample(8, 8), 1.0, SeededRng(seed=0))


class TestCutout:
    def test_zero_hole_is_identity(self, pair):
        a, _ = pair

        result = cutout(a, 0, SeededRng(seed=0))

        assert result.same_as(a)

    def test_hole_is_clipped_to_the_image(self, pair):
        a, _ = pair

        box = draw_cutout_box(16, 16, 4, SeededRng(seed=0), center=(0, 0))
        result = cutout(a, 4, SeededRng(seed=0), center=(0, 0))

        assert box == CutBox(top=0, left=0, bottom=2, right=2)
        assert np.all(result.image.data[0:2, 0:2] == 0.0)
        np.testing.assert_array_equal(result.image.data[2:], a.image.data[2:])
        assert result.labels_same_as(a)

    def test_hole_size_must_not_be_negative(self, pair):
        a, _ = pair

        with pytest.raises(BadInputError):
            cutout(a, -1, SeededRng(seed=0))


class TestCutMix:
    def test_zero_area_is_identity(self, pair):
        a, b = pair

        result = cutmix(a, b, SeededRng(seed=0), area_ratio=0.0)

        assert result.same_as(a)

    def test_full_area_is_the_second_sample(self, pair):
        a, b = pair

        result = cutmix(a, b, SeededRng(seed=0), area_ratio=1.0)

        assert result.same_as(b)

    def test_box_area_follows_the_ratio(self):
        box = draw_cutmix_box(16, 16, SeededRng(seed=0), area_ratio=0.25)

        assert box.area == 64
        assert 0 <= box.top and box.bottom <= 16
        assert 0 <= box.left and box.right <= 16

    def test_labels_are_cut_with_the_image(self, pair):
        a, b = pair
        box = CutBox(top=0, left=0, bottom=8, right=16)

        result = cutmix(a, b, SeededRng(seed=0), box=box)

        np.testing.assert_array_equal(result.seg.data[:8], b.seg.data[:8])
        np.testing.assert_array_equal(result.seg.data[8:], a.seg.data[8:])
        np.testing.assert_array_equal(result.boundary.data[:8], b.boundary.data[:8])
        np.testing.assert_array_equal(result.image.data[8:], a.image.data[8:])

    def test_label_types_must_match(self, pair):
        a, _ = pair
        binary = TestDataFactory.sample(16, 16, class_labels=False)

        with pytest.raises(ShapeMismatchError):
            cutmix(a, binary, SeededRng(seed=0))


class TestBaselineReplay:
    @pytest.fixture(name="donors")
    def donors_fixture(self):
        samples = [TestDataFactory.sample(16, 16, seed=seed) for seed in range(3)]
        return samples, DonorSource.from_samples(samples, exclude=0)

    def test_mixup_replay(self, donors):
        samples, pool = donors

        outcome = run_mixup(samples[0], pool, 0.4, SeededRng(seed=1))
        record = outcome.to_record()

        assert set(record) == {"mix_ratio", "partner"}
        replayed = replay_baseline("mixup", samples[0], pool, record)
        assert replayed.same_as(outcome.sample)

    def test_cutout_replay(self, donors):
        samples, pool = donors

        outcome = run_cutout(samples[0], 6, SeededRng(seed=1))
        record = outcome.to_record()

        assert set(record) == {"box"}
        replayed = replay_baseline("cutout", samples[0], pool, record)
        assert replayed.same_as(outcome.sample)

    def test_cutmix_replay(self, donors):
        samples, pool = donors

        outcome = run_cutmix(samples[0], pool, SeededRng(seed=1))
        record = outcome.to_record()

        assert set(record) == {"box", "partner"}
        replayed = replay_baseline("cutmix", samples[0], pool, record)
        assert replayed.same_as(outcome.sample)

    def test_unknown_method_is_rejected(self, donors):
        samples, pool = donors
        record = BaselineOutcome(sample=samples[0], partner_id="1").to_record()

        with pytest.raises(BadInputError):
            replay_baseline("mosaic", samples[0], pool, record)
