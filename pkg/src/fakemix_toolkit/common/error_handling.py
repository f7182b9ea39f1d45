import json
import logging
import sys
from enum import IntEnum
from traceback import format_exc
from typing import Optional, TextIO

from pydantic import ValidationError

from fakemix_toolkit.common.model import ErrorDetails, ErrorResponseTraceback

LOGGER = logging.getLogger(__name__)


class ExitCode(IntEnum):
    """Process exit codes, playing the role HTTP statuses play for a service"""

    OK = 0
    FAILURE = 1
    BAD_INPUT = 2
    NOT_FOUND = 3
    INTERNAL_ERROR = 70

    @property
    def phrase(self) -> str:
        return self.name.replace("_", " ").title()


class ToolkitError(Exception):
    """Custom base class to ensure our errors are reported consistently"""

    code = ExitCode.FAILURE

    def __init__(self, detail: Optional[str] = None, code: Optional[int] = None):
        self.code = ExitCode(code) if code is not None else self.code
        self.detail = detail or self.code.phrase
        super().__init__(self.detail)


class BadInputError(ToolkitError, ValueError):
    code = ExitCode.BAD_INPUT

    def __init__(self, detail: Optional[str] = None):
        super().__init__(detail=detail)


class ShapeMismatchError(BadInputError):
    pass


class UnprocessableError(BadInputError):
    pass


class NotFoundError(ToolkitError):
    code = ExitCode.NOT_FOUND

    def __init__(self, detail: Optional[str] = None):
        super().__init__(detail=detail)


def error_details(
    code: ExitCode,
    title: str,
    detail: str,
    traceback: Optional[ErrorResponseTraceback],
) -> dict:
    return ErrorDetails(
        status=code, title=title, detail=detail, traceback=traceback
    ).model_dump(mode="json", exclude_none=True)


def _report(
    code: ExitCode,
    detail: str,
    traceback: Optional[ErrorResponseTraceback] = None,
    stream: Optional[TextIO] = None,
) -> int:
    """
    Utility helper to write a JSON error document and return the exit code.
    """
    details = error_details(code, title=code.phrase, detail=detail, traceback=traceback)
    print(json.dumps({"detail": details}, indent=2), file=stream or sys.stderr)
    return int(code)


def cli_error_handler(err: Exception, stream: Optional[TextIO] = None) -> int:
    """
    Map an exception raised by a command to an error document and exit code.

    ToolkitErrors carry their own code, pydantic ValidationErrors from config
    models are bad input and anything else is left to the caller.
    """
    if isinstance(err, ToolkitError):
        return _report(err.code, err.detail, stream=stream)
    if isinstance(err, ValidationError):
        return _report(ExitCode.BAD_INPUT, str(err), stream=stream)
    raise err


def dangerous_internal_error_handler(
    err: Exception, stream: Optional[TextIO] = None
) -> int:
    """
    A handler that reports an unexpected exception together with its full
    traceback.

    This is a 'DANGEROUS' handler because it exposes internal implementation
    details. Production runs should leave FAKEMIX_PRODUCTION=true.
    """
    return _report(
        ExitCode.INTERNAL_ERROR,
        detail=repr(err),
        traceback=ErrorResponseTraceback(
            key=ExitCode.INTERNAL_ERROR.phrase,
            type=str(type(err)),
            full_traceback=format_exc(),
        ),
        stream=stream,
    )
