"""
Dataset manifest: JSON lines, UTF-8. The first line is a header with the
format version and dataset statistics, every following line one entry.
Paths are relative to the directory holding the manifest.
"""

import json
import logging
import os
from collections import Counter
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
from pydantic import Field, PrivateAttr, ValidationError, model_validator

from fakemix_toolkit.augment import Sample
from fakemix_toolkit.boundary import BoundaryBandConfig
from fakemix_toolkit.common.error_handling import (
    BadInputError,
    NotFoundError,
    UnprocessableError,
)
from fakemix_toolkit.common.model import AppModel, CheckReport
from fakemix_toolkit.common.staging import atomic_write_bytes
from fakemix_toolkit.raster import read_class_mask, read_image, read_mask

LOGGER = logging.getLogger(__name__)

FORMAT_VERSION = 1
SUPPORTED_VERSIONS = (FORMAT_VERSION,)
MANIFEST_NAME = "manifest.jsonl"


class ManifestHeader(AppModel):
    format_version: int = FORMAT_VERSION
    channel_means: list[float] = Field(default_factory=list)
    count: int = Field(default=0, ge=0)


class ManifestEntry(AppModel):
    id: str = Field(min_length=1)
    image: str
    seg: str
    boundary: Optional[str] = None
    split: Optional[str] = None


class Manifest(AppModel):
    header: ManifestHeader = Field(default_factory=ManifestHeader)
    entries: list[ManifestEntry] = Field(default_factory=list)
    _root: Path = PrivateAttr(default=Path("."))

    @model_validator(mode="after")
    def _unique_ids(self) -> "Manifest":
        tally = Counter(entry.id for entry in self.entries)
        duplicates = sorted(key for key, count in tally.items() if count > 1)
        if duplicates:
            raise ValueError(f"duplicate manifest ids: {duplicates}")
        return self

    @property
    def root(self) -> Path:
        return self._root

    @root.setter
    def root(self, value: Path) -> None:
        self._root = Path(value)

    @property
    def ids(self) -> list[str]:
        return [entry.id for entry in self.entries]

    def resolve(self, relative: str) -> Path:
        return self._root / relative

    def relative(self, path: Path) -> str:
        relative = os.path.relpath(Path(path).resolve(), self._root.resolve())
        return Path(relative).as_posix()

    def splits(self) -> dict[str, str]:
        return {entry.id: entry.split for entry in self.entries if entry.split}

    @classmethod
    def load(cls, path: Path, check_files: bool = True) -> "Manifest":
        path = Path(path)
        try:
            lines = [
                line
                for line in path.read_text(encoding="utf-8").splitlines()
                if line.strip()
            ]
        except FileNotFoundError as err:
            raise NotFoundError(detail=f"Manifest {path} does not exist") from err
        except UnicodeDecodeError as err:
            raise BadInputError(
                detail=f"Manifest {path} is not UTF-8 text: {err}"
            ) from err
        if not lines:
            raise UnprocessableError(detail=f"Manifest {path} has no header line")

        try:
            header = ManifestHeader.model_validate_json(lines[0])
            if header.format_version not in SUPPORTED_VERSIONS:
                raise UnprocessableError(
                    detail=f"Manifest format version {header.format_version} is not "
                    f"recognised (supported: {SUPPORTED_VERSIONS})"
                )
            manifest = cls(
                header=header,
                entries=[ManifestEntry.model_validate_json(line) for line in lines[1:]],
            )
        except ValidationError as err:
            raise BadInputError(detail=f"Manifest {path} is malformed: {err}")
        manifest.root = path.parent

        if check_files:
            report = validate_manifest(manifest)
            if not report.valid:
                raise NotFoundError(
                    detail=f"Manifest {path} references missing files: "
                    + "; ".join(report.messages.values())
                )
        LOGGER.debug("Loaded manifest %s with %d entries", path, len(manifest.entries))
        return manifest

    def dumps(self) -> str:
        header = self.header.model_copy(update={"count": len(self.entries)})
        lines = [header.model_dump_json()]
        lines.extend(
            entry.model_dump_json(exclude_none=True) for entry in self.entries
        )
        return "\n".join(lines) + "\n"

    def save(self, path: Path) -> None:
        atomic_write_bytes(Path(path), self.dumps().encode("utf-8"))

    def load_sample(self, index: int, band: Optional[BoundaryBandConfig] = None):
        entry = self.entries[index]
        image = read_image(self.resolve(entry.image))
        seg = read_class_mask(self.resolve(entry.seg))
        if entry.boundary:
            return Sample(
                image=image, seg=seg, boundary=read_mask(self.resolve(entry.boundary))
            )
        LOGGER.warning(
            "Entry %s has no boundary label, generating one on the fly", entry.id
        )
        return Sample.from_seg(image, seg, band)


def _check_files_exist(manifest: Manifest) -> dict[str, str]:
    messages = {}
    for entry in manifest.entries:
        for role in ("image", "seg", "boundary"):
            relative = getattr(entry, role)
            if relative and not manifest.resolve(relative).is_file():
                messages[f"missing_{role}_{entry.id}"] = (
                    f"{role} file '{relative}' of entry '{entry.id}' does not exist"
                )
    return messages


def _check_means(manifest: Manifest) -> dict[str, str]:
    means = manifest.header.channel_means
    if means and any(not 0.0 <= value <= 1.0 for value in means):
        return {"channel_means_range": f"Channel means {means} are not within [0, 1]"}
    return {}


MANIFEST_CHECK_FNS = [_check_files_exist, _check_means]


def validate_manifest(manifest: Manifest) -> CheckReport:
    """
    Apply every manifest check and flatten the messages into one report.
    """
    messages = {
        key: message
        for result in [fn(manifest) for fn in MANIFEST_CHECK_FNS]
        for key, message in result.items()
    }
    return CheckReport(valid=not messages, messages=messages)


def compute_channel_means(image_paths: Iterable[Path]) -> list[float]:
    """Per-channel mean over every pixel of every image, in [0, 1]."""
    totals = np.zeros(3, dtype=np.float64)
    pixels = 0
    for path in sorted(Path(p) for p in image_paths):
        image = read_image(path)
        totals += image.data.reshape(-1, image.channels).sum(axis=0)
        pixels += image.height * image.width
    if pixels == 0:
        return []
    return [float(value) for value in totals / pixels]


def write_manifest_lines(path: Path, records: Iterable[dict]) -> None:
    """Write plain JSON lines (used for provenance sidecars)."""
    payload = "".join(json.dumps(record, sort_keys=True) + "\n" for record in records)
    atomic_write_bytes(Path(path), payload.encode("utf-8"))
