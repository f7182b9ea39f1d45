"""
Unit tests for the dataset manifest
"""

import json
import logging
from unittest import mock

import numpy as np
import pytest

from fakemix_toolkit import oracles
from fakemix_toolkit.augment import Sample
from fakemix_toolkit.common.error_handling import (
    BadInputError,
    NotFoundError,
    UnprocessableError,
)
from fakemix_toolkit.imagecore import ClassMask
from fakemix_toolkit.manifest import (
    MANIFEST_NAME,
    Manifest,
    ManifestEntry,
    ManifestHeader,
    _check_means,
    compute_channel_means,
    validate_manifest,
)
from fakemix_toolkit.raster import read_image


def _write_lines(path, *records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")


def test_load_resolves_paths_against_the_manifest_directory(synth_manifest):
    assert synth_manifest.ids == ["000000", "000001", "000002", "000003"]
    assert synth_manifest.header.count == 4
    assert synth_manifest.resolve("images/000000.png").is_file()


def test_load_sample_reads_all_three_labels(synth_manifest):
    sample = synth_manifest.load_sample(1)

    assert isinstance(sample, Sample)
    assert isinstance(sample.seg, ClassMask)
    assert sample.image.shape == (16, 16, 3)
    assert sample.boundary.count() > 0


def test_missing_boundary_is_generated_with_a_warning(synth_manifest, caplog):
    synth_manifest.entries[0].boundary = None

    with caplog.at_level(logging.WARNING):
        sample = synth_manifest.load_sample(0)

    assert sample.boundary.count() > 0
    assert "no boundary label" in caplog.text


def test_saved_manifest_loads_back(synth_manifest, tmp_path):
    synth_manifest.entries[2].split = None
    path = synth_manifest.root / "copy.jsonl"

    synth_manifest.save(path)
    loaded = Manifest.load(path)

    assert loaded.model_dump() == synth_manifest.model_dump()
    assert "split" not in path.read_text(encoding="utf-8").splitlines()[3]


def test_header_count_follows_the_entries(tmp_path):
    manifest = Manifest(
        entries=[ManifestEntry(id="a", image="a.png", seg="a_mask.png")]
    )

    header = json.loads(manifest.dumps().splitlines()[0])

    assert header == {"format_version": 1, "channel_means": [], "count": 1}


def test_missing_manifest_is_not_found(tmp_path):
    with pytest.raises(NotFoundError):
        Manifest.load(tmp_path / MANIFEST_NAME)


def test_empty_manifest_is_unprocessable(tmp_path):
    (tmp_path / MANIFEST_NAME).write_text("\n", encoding="utf-8")

    with pytest.raises(UnprocessableError):
        Manifest.load(tmp_path / MANIFEST_NAME)


def test_unknown_format_version_is_unprocessable(tmp_path):
    _write_lines(tmp_path / MANIFEST_NAME, {"format_version": 99, "count": 0})

    with pytest.raises(UnprocessableError):
        Manifest.load(tmp_path / MANIFEST_NAME)


def test_non_utf8_manifest_is_bad_input(tmp_path):
    (tmp_path / MANIFEST_NAME).write_bytes(b'{"format_version": 1}\n\xff\xfe\n')

    with pytest.raises(BadInputError):
        Manifest.load(tmp_path / MANIFEST_NAME)


def test_malformed_entry_is_bad_input(tmp_path):
    _write_lines(
        tmp_path / MANIFEST_NAME,
        {"format_version": 1},
        {"id": "a", "image": "a.png"},
    )

    with pytest.raises(BadInputError):
        Manifest.load(tmp_path / MANIFEST_NAME, check_files=False)


def test_duplicate_ids_are_bad_input(tmp_path):
    entry = {"id": "a", "image": "a.png", "seg": "m.png"}
    _write_lines(tmp_path / MANIFEST_NAME, {"format_version": 1}, entry, entry)

    with pytest.raises(BadInputError):
        Manifest.load(tmp_path / MANIFEST_NAME, check_files=False)


def test_missing_files_are_reported(tmp_path):
    _write_lines(
        tmp_path / MANIFEST_NAME,
        {"format_version": 1},
        {"id": "a", "image": "a.png", "seg": "m.png"},
    )

    with pytest.raises(NotFoundError):
        Manifest.load(tmp_path / MANIFEST_NAME)
    manifest = Manifest.load(tmp_path / MANIFEST_NAME, check_files=False)
    report = validate_manifest(manifest)

    assert not report.valid
    assert set(report.messages) == {"missing_image_a", "missing_seg_a"}


def test_validate_runs_functions():
    fakes = [
        mock.Mock(return_value={"result1": "bad1"}),
        mock.Mock(return_value={"result2": "bad2"}),
    ]
    with mock.patch("fakemix_toolkit.manifest.MANIFEST_CHECK_FNS", fakes):
        fake_manifest = mock.Mock()
        result = validate_manifest(fake_manifest)
    for fn in fakes:
        fn.assert_called_once_with(fake_manifest)
    assert result.messages == {"result1": "bad1", "result2": "bad2"}
    assert not result.valid


def test_channel_means_out_of_range():
    manifest = Manifest(header=ManifestHeader(channel_means=[0.5, 1.5, 0.2]))

    assert set(_check_means(manifest)) == {"channel_means_range"}


def test_channel_means_match_oracle(synth_manifest):
    paths = [synth_manifest.resolve(entry.image) for entry in synth_manifest.entries]

    means = compute_channel_means(paths)

    expected = oracles.channel_means_oracle([read_image(p).data for p in paths])
    np.testing.assert_allclose(means, expected, rtol=0, atol=1e-12)
    np.testing.assert_allclose(
        synth_manifest.header.channel_means, expected, atol=1e-12
    )


def test_channel_means_of_nothing():
    assert compute_channel_means([]) == []


def test_relative_paths_use_forward_slashes(tmp_path):
    manifest = Manifest()
    manifest.root = tmp_path / "out"

    assert manifest.relative(tmp_path / "data" / "a.png") == "../data/a.png"


def test_splits_skip_untagged_entries(synth_manifest):
    synth_manifest.entries[0].split = None

    splits = synth_manifest.splits()

    assert "000000" not in splits
    assert set(splits.values()) <= {"easy", "hard"}
