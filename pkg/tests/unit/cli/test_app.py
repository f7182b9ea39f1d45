"""
Unit tests for the fakemix entry point
"""

from unittest import mock

import pytest

from fakemix_toolkit.app import create_parser, main
from fakemix_toolkit.common.error_handling import ExitCode, NotFoundError
from fakemix_toolkit.selfcheck import SuiteResult


@pytest.fixture(autouse=True)
def no_logging_setup():
    with mock.patch("fakemix_toolkit.app.configure_logging") as configure:
        yield configure


def test_every_command_is_registered():
    parser = create_parser()

    for command in (
        "ingest",
        "gen-boundary",
        "augment",
        "eval",
        "aspp-demo",
        "synth",
        "selfcheck",
    ):
        args = parser.parse_args(
            {
                "ingest": [command, "images", "masks"],
                "gen-boundary": [command, "manifest.jsonl"],
                "augment": [command, "manifest.jsonl"],
                "eval": [command, "pred", "gt"],
            }.get(command, [command])
        )
        assert callable(args.handler)


def test_a_command_is_required():
    with pytest.raises(SystemExit):
        create_parser().parse_args([])


@mock.patch("fakemix_toolkit.cli.diagnostics.run_selfcheck")
def test_passing_selfcheck_exits_ok(mock_run, capsys):
    mock_run.return_value = [SuiteResult(name="losses", passed=True, messages={})]

    assert main(["selfcheck"]) == ExitCode.OK
    assert "PASS" in capsys.readouterr().out


@mock.patch("fakemix_toolkit.cli.diagnostics.run_selfcheck")
def test_failing_selfcheck_exits_with_failure(mock_run):
    mock_run.return_value = [
        SuiteResult(name="losses", passed=False, messages={"ce": "bad"})
    ]

    assert main(["selfcheck", "--seed", "4"]) == ExitCode.FAILURE
    mock_run.assert_called_once_with(seed=4)


def test_verbose_logs_at_debug(no_logging_setup):
    with mock.patch("fakemix_toolkit.cli.diagnostics.run_selfcheck", return_value=[]):
        main(["selfcheck", "--verbose"])

    no_logging_setup.assert_called_once_with(level="DEBUG")


def test_missing_out_is_bad_input(capsys):
    code = main(["synth"])

    assert code == ExitCode.BAD_INPUT
    assert '"status": 2' in capsys.readouterr().err


@mock.patch("fakemix_toolkit.cli.augmentation.cmd_augment")
def test_toolkit_errors_map_to_exit_codes(mock_augment, capsys):
    mock_augment.side_effect = NotFoundError("Manifest m.jsonl does not exist")

    code = main(["augment", "m.jsonl"])

    assert code == ExitCode.NOT_FOUND
    assert "m.jsonl does not exist" in capsys.readouterr().err


@mock.patch("fakemix_toolkit.cli.datasets.cmd_synth")
def test_unexpected_errors_outside_production(mock_synth, capsys, tmp_path):
    mock_synth.side_effect = RuntimeError("boom")

    code = main(["synth", "--out", str(tmp_path)], production=False)

    assert code == ExitCode.INTERNAL_ERROR
    assert "full_traceback" in capsys.readouterr().err


@mock.patch("fakemix_toolkit.cli.datasets.cmd_synth")
def test_unexpected_errors_propagate_in_production(mock_synth, tmp_path):
    mock_synth.side_effect = RuntimeError("boom")

    with pytest.raises(RuntimeError):
        main(["synth", "--out", str(tmp_path)], production=True)
