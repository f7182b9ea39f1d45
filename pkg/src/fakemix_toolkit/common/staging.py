import logging
import os
import shutil
import tempfile
import uuid
from pathlib import Path
from typing import Iterable, Optional

from fakemix_toolkit.common.error_handling import BadInputError

LOGGER = logging.getLogger(__name__)


class OutputStage:
    """
    A lightweight unit of work for an output directory.

    Everything is written below a hidden staging directory next to the
    target and only becomes visible when committed:

        with OutputStage(out_dir) as stage:
            write_png(stage.path / "images" / "a.png", ...)
            stage.commit()

    Leaving the block without committing discards the staged files, so a
    crashed or interrupted run never leaves a half-written tree behind and a
    rerun never mixes outputs from two runs.

    An existing target is only replaced when it is recognisably an earlier
    output: it holds the `marker` file, or every file in it is one of
    `known_files`. Anything else is refused with a BadInputError and left
    untouched.
    """

    def __init__(
        self,
        target: Path,
        marker: Optional[str] = None,
        known_files: Optional[Iterable[str]] = None,
    ):
        self.target = Path(target)
        self.marker = marker
        self.known_files = None if known_files is None else set(known_files)
        self.path: Optional[Path] = None
        self.committed = False

    def __enter__(self) -> "OutputStage":
        self._check_replaceable()
        self.target.parent.mkdir(parents=True, exist_ok=True)
        self.path = self._sibling("staging")
        self.path.mkdir()
        LOGGER.debug("Staging output for %s in %s", self.target, self.path)
        return self

    def _check_replaceable(self) -> None:
        if not self.target.exists():
            return
        if not self.target.is_dir():
            raise BadInputError(
                detail=f"Output {self.target} exists and is not a directory"
            )
        contents = [
            path.relative_to(self.target).as_posix()
            for path in self.target.rglob("*")
            if not path.is_dir()
        ]
        if not contents:
            return
        if self.marker is not None and (self.target / self.marker).is_file():
            return
        if self.known_files is not None and set(contents) <= self.known_files:
            return
        raise BadInputError(
            detail=f"Output directory {self.target} holds files this tool did not "
            "write; choose an empty or new directory"
        )

    def _sibling(self, kind: str) -> Path:
        return self.target.parent / f".{self.target.name}.{kind}-{uuid.uuid4().hex}"

    def __exit__(self, exc_type, exc, tb) -> None:
        if not self.committed and self.path is not None and self.path.exists():
            LOGGER.debug("Discarding uncommitted stage %s", self.path)
            shutil.rmtree(self.path, ignore_errors=True)

    def commit(self) -> None:
        if self.path is None:
            raise RuntimeError("OutputStage.commit called outside of a with block")
        retired = None
        if self.target.exists():
            retired = self._sibling("retired")
            os.replace(self.target, retired)
        os.replace(self.path, self.target)
        self.committed = True
        if retired is not None:
            shutil.rmtree(retired, ignore_errors=True)
        LOGGER.debug("Committed output to %s", self.target)


def atomic_write_bytes(path: Path, payload: bytes) -> None:
    """
    Write a single file by writing a temporary sibling and renaming it over
    the destination.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as tmp_file:
            tmp_file.write(payload)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
