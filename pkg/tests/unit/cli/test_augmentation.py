"""
Unit tests for the augment command
"""

import json

import numpy as np
import pytest

from fakemix_toolkit.augment import ContentMode
from fakemix_toolkit.cli.augmentation import (
    PROVENANCE_NAME,
    augment_entry,
    cmd_augment,
    replay_entry,
)
from fakemix_toolkit.cli.model import AugmentMethod, RunConfig
from fakemix_toolkit.common.error_handling import BadInputError, UnprocessableError
from fakemix_toolkit.manifest import MANIFEST_NAME, Manifest
from fakemix_toolkit.raster import quantize, read_image


class TestAugmentEntry:
    def test_fakemix_record(self, synth_manifest):
        config = RunConfig(keep_prob=0.0, repetitions=2)

        sample, record = augment_entry(synth_manifest, 1, config)

        assert record["entry-id"] == "000001"
        assert record["index"] == 1
        assert record["method"] == "fakemix"
        assert record["outcome"] == "augmented"
        assert record["content"] == "boundary"
        assert len(record["donors"]) == 2
        assert all(donor["id"] != "000001" for donor in record["donors"])
        assert sample.labels_same_as(synth_manifest.load_sample(1))

    def test_kept_original_has_no_donors(self, synth_manifest):
        sample, record = augment_entry(synth_manifest, 0, RunConfig(keep_prob=1.0))

        assert record["outcome"] == "original"
        assert record["donors"] == []
        assert sample.same_as(synth_manifest.load_sample(0))

    def test_entry_stream_is_fixed_by_seed_and_index(self, synth_manifest):
        config = RunConfig(seed=6, keep_prob=0.0)

        first = augment_entry(synth_manifest, 2, config)
        second = augment_entry(synth_manifest, 2, config)

        assert first[1] == second[1]
        assert first[0].same_as(second[0])

    @pytest.mark.parametrize(
        "method,keys",
        [
            (AugmentMethod.MIXUP, {"partner", "mix_ratio"}),
            (AugmentMethod.CUTOUT, {"box"}),
            (AugmentMethod.CUTMIX, {"partner", "box"}),
        ],
    )
    def test_baseline_records(self, synth_manifest, method, keys):
        config = RunConfig(method=method, hole_size=4)

        _, record = augment_entry(synth_manifest, 0, config)

        base_keys = {"entry-id", "index", "method", "outcome", "donors"}
        assert set(record) == base_keys | keys
        assert record["method"] == method.value

    @pytest.mark.parametrize("method", list(AugmentMethod))
    def test_replay_rebuilds_the_sample(self, synth_manifest, method):
        config = RunConfig(method=method, keep_prob=0.0, seed=2)

        sample, record = augment_entry(synth_manifest, 3, config)
        record = json.loads(json.dumps(record))

        assert replay_entry(synth_manifest, record, config).same_as(sample)

    def test_replay_uses_the_recorded_content_mode(self, synth_manifest):
        config = RunConfig(content_mode=ContentMode.ZERO, keep_prob=0.0)
        sample, record = augment_entry(synth_manifest, 1, config)

        replayed = replay_entry(synth_manifest, record, RunConfig())

        assert replayed.same_as(sample)

    def test_replay_checks_the_entry_id(self, synth_manifest):
        _, record = augment_entry(synth_manifest, 1, RunConfig())
        record["index"] = 2

        with pytest.raises(UnprocessableError):
            replay_entry(synth_manifest, record, RunConfig())

    def test_mean_content_uses_manifest_statistics(self, synth_manifest):
        config = RunConfig(content_mode=ContentMode.MEAN, keep_prob=0.0)

        sample, record = augment_entry(synth_manifest, 0, config)

        assert record["content"] == "mean"
        assert sample.image.in_unit_range()


class TestCmdAugment:
    def test_output_tree(self, synth_manifest, tmp_path):
        out = tmp_path / "augmented"
        config = RunConfig(keep_prob=0.0, out=out)

        manifest = cmd_augment(synth_manifest.root / MANIFEST_NAME, config)

        loaded = Manifest.load(out / MANIFEST_NAME)
        assert loaded.ids == synth_manifest.ids
        assert [e.split for e in loaded.entries] == [
            e.split for e in synth_manifest.entries
        ]
        assert manifest.root == out
        records = [
            json.loads(line)
            for line in (out / PROVENANCE_NAME).read_text(encoding="utf-8").splitlines()
        ]
        assert [r["index"] for r in records] == [0, 1, 2, 3]
        assert [r["entry-id"] for r in records] == synth_manifest.ids
        assert all("id" not in r for r in records)

    def test_written_images_match_replay(self, synth_manifest, tmp_path):
        out = tmp_path / "augmented"
        config = RunConfig(keep_prob=0.0, seed=5)
        cmd_augment(synth_manifest.root / MANIFEST_NAME, config, out)

        for line in (out / PROVENANCE_NAME).read_text(encoding="utf-8").splitlines():
            record = json.loads(line)
            replayed = replay_entry(synth_manifest, record, config)
            written = read_image(out / "images" / f"{record['entry-id']}.png")
            np.testing.assert_array_equal(
                np.rint(written.data * 255.0), quantize(replayed.image)
            )

    def test_output_directory_is_required(self, synth_manifest):
        with pytest.raises(BadInputError):
            cmd_augment(synth_manifest.root / MANIFEST_NAME, RunConfig())
