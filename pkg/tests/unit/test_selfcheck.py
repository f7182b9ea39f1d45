from unittest import mock

import pytest

from fakemix_toolkit.imagecore import SeededRng, TranslationVector
from fakemix_toolkit.selfcheck import (
    SELFCHECK_SUITES,
    SuiteResult,
    _check_sampling,
    format_table,
    run_selfcheck,
    selfcheck_report,
)


def test_selfcheck_runs_functions():
    fakes = {
        "first": mock.Mock(return_value={}),
        "second": mock.Mock(return_value={"result2": "bad2"}),
    }

    results = run_selfcheck(seed=3, suites=fakes)

    for fn in fakes.values():
        fn.assert_called_once_with(mock.ANY)
        (rng,), _ = fn.call_args
        assert isinstance(rng, SeededRng)
        assert rng.seed == 3
    assert results == [
        SuiteResult(name="first", passed=True, messages={}),
        SuiteResult(name="second", passed=False, messages={"result2": "bad2"}),
    ]


def test_every_suite_gets_its_own_stream():
    fakes = {"a": mock.Mock(return_value={}), "b": mock.Mock(return_value={})}

    run_selfcheck(seed=0, suites=fakes)

    purposes = {fn.call_args.args[0].purpose for fn in fakes.values()}
    assert len(purposes) == 2


def test_report_flattens_suite_messages():
    results = [
        SuiteResult(name="losses", passed=False, messages={"ce": "bad ce"}),
        SuiteResult(name="morphology", passed=True, messages={}),
    ]

    report = selfcheck_report(results)

    assert not report.valid
    assert report.messages == {"losses:ce": "bad ce"}


def test_table_lists_every_suite():
    results = [
        SuiteResult(name="losses", passed=False, messages={"ce": "bad ce"}),
        SuiteResult(name="morphology", passed=True, messages={}),
    ]

    table = format_table(results)

    lines = table.splitlines()
    assert lines[2].startswith("losses") and lines[2].endswith("FAIL")
    assert lines[3].strip() == "bad ce"
    assert lines[4].startswith("morphology") and lines[4].endswith("PASS")


@pytest.mark.parametrize("name", list(SELFCHECK_SUITES))
def test_suite_passes(name):
    messages = SELFCHECK_SUITES[name](SeededRng(seed=0).derive(name))

    assert messages == {}


@mock.patch("fakemix_toolkit.selfcheck.sample_translation")
def test_sampling_reports_the_largest_magnitude(mock_sample):
    mock_sample.return_value = TranslationVector(dx=-300, dy=0)

    messages = _check_sampling(SeededRng(seed=0))

    assert messages == {"translation_bound": "translation beyond +-256: 300"}
