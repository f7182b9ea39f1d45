import json

from fakemix_toolkit.cli.evaluation import cmd_eval
from fakemix_toolkit.imagecore import BinaryMask
from fakemix_toolkit.manifest import MANIFEST_NAME
from fakemix_toolkit.raster import write_mask
from fakemix_toolkit.selfcheck import metric_fixture_masks


def _write_fixture_pairs(tmp_path):
    masks = metric_fixture_masks()
    gt = BinaryMask(masks["gt"])
    write_mask(tmp_path / "pred" / "000000.png", gt)
    write_mask(tmp_path / "gt" / "000000.png", gt)
    write_mask(tmp_path / "pred" / "000001.png", BinaryMask(masks["acc_pred"]))
    write_mask(tmp_path / "gt" / "000001.png", gt)


def test_report_is_written_as_json(tmp_path):
    _write_fixture_pairs(tmp_path)

    report = cmd_eval(
        tmp_path / "pred", tmp_path / "gt", 2, report_path=tmp_path / "report.json"
    )

    document = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    assert document["acc"] == report.acc == 87.5
    assert document["images"] == 2
    assert "splits" in document


def test_report_goes_to_stdout_without_a_path(tmp_path, capsys):
    _write_fixture_pairs(tmp_path)

    cmd_eval(tmp_path / "pred", tmp_path / "gt", 2)

    document = json.loads(capsys.readouterr().out)
    assert document["miou"] > 0.0


def test_manifest_splits_group_the_images(tmp_path, synth_manifest):
    _write_fixture_pairs(tmp_path)

    report = cmd_eval(
        tmp_path / "pred",
        tmp_path / "gt",
        2,
        manifest_path=synth_manifest.root / MANIFEST_NAME,
    )

    expected = {synth_manifest.splits()[stem] for stem in ("000000", "000001")}
    assert set(report.splits) == expected
    assert sum(split.images for split in report.splits.values()) == 2
