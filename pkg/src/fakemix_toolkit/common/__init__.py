from .error_handling import (
    BadInputError,
    ExitCode,
    NotFoundError,
    ShapeMismatchError,
    ToolkitError,
    UnprocessableError,
    cli_error_handler,
    dangerous_internal_error_handler,
)
from .staging import OutputStage, atomic_write_bytes
