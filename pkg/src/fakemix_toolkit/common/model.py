from typing import Optional

from pydantic import BaseModel, ConfigDict


class AppModel(BaseModel):
    """Base class for toolkit data models - configs, manifests and reports"""

    model_config = ConfigDict(
        extra="forbid", validate_default=True, validate_assignment=True
    )


class CheckReport(AppModel):
    valid: bool
    messages: dict[str, str]


class ErrorResponseTraceback(AppModel):
    key: str
    type: str
    full_traceback: str


class ErrorDetails(AppModel):
    status: int
    title: str
    detail: str
    traceback: Optional[ErrorResponseTraceback] = None
