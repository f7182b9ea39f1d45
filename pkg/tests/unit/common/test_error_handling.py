import io
import json

import pytest
from pydantic import ValidationError

from fakemix_toolkit.augment import FakeMixConfig
from fakemix_toolkit.common.error_handling import (
    BadInputError,
    ExitCode,
    NotFoundError,
    ShapeMismatchError,
    ToolkitError,
    cli_error_handler,
    dangerous_internal_error_handler,
)


def _document(stream: io.StringIO) -> dict:
    return json.loads(stream.getvalue())["detail"]


def test_toolkit_error_is_reported_with_its_code():
    stream = io.StringIO()

    code = cli_error_handler(NotFoundError("Manifest m.jsonl does not exist"), stream)

    assert code == ExitCode.NOT_FOUND == 3
    assert _document(stream) == {
        "status": 3,
        "title": "Not Found",
        "detail": "Manifest m.jsonl does not exist",
    }


def test_shape_mismatch_is_bad_input():
    stream = io.StringIO()

    code = cli_error_handler(ShapeMismatchError("sizes differ"), stream)

    assert code == ExitCode.BAD_INPUT
    assert _document(stream)["title"] == "Bad Input"


def test_error_without_detail_uses_the_phrase():
    assert BadInputError().detail == "Bad Input"
    assert ToolkitError(code=ExitCode.INTERNAL_ERROR).code == ExitCode.INTERNAL_ERROR


def test_validation_error_is_bad_input():
    with pytest.raises(ValidationError) as excinfo:
        FakeMixConfig(keep_prob=2.0)
    stream = io.StringIO()

    code = cli_error_handler(excinfo.value, stream)

    assert code == ExitCode.BAD_INPUT
    assert "keep_prob" in _document(stream)["detail"]


def test_other_errors_are_not_handled():
    with pytest.raises(RuntimeError):
        cli_error_handler(RuntimeError("boom"), io.StringIO())


def test_dangerous_handler_includes_the_traceback():
    stream = io.StringIO()
    try:
        raise RuntimeError("boom")
    except RuntimeError as err:
        code = dangerous_internal_error_handler(err, stream)

    document = _document(stream)
    assert code == ExitCode.INTERNAL_ERROR == 70
    assert document["detail"] == "RuntimeError('boom')"
    assert document["traceback"]["type"] == "<class 'RuntimeError'>"
    assert "raise RuntimeError" in document["traceback"]["full_traceback"]


def test_bad_input_is_also_a_value_error():
    assert isinstance(BadInputError("x"), ValueError)
