"""
The augment command: one augmented copy of every manifest entry, written
with a provenance sidecar that is enough to rebuild each output.

Every entry owns the random stream keyed by (seed, entry index), so the
output tree depends on the seed, the manifest and the configuration only,
never on the worker count or on scheduling.
"""

import argparse
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import Callable, Optional

from fakemix_toolkit.augment import (
    ContentMode,
    DonorSource,
    FakeMixConfig,
    Paste,
    Sample,
    replay_baseline,
    replay_fakemix,
    run_cutmix,
    run_cutout,
    run_fakemix,
    run_mixup,
)
from fakemix_toolkit.cli.model import AugmentMethod, RunConfig, resolve_run_config
from fakemix_toolkit.common.error_handling import BadInputError, UnprocessableError
from fakemix_toolkit.common.staging import OutputStage
from fakemix_toolkit.imagecore import SeededRng
from fakemix_toolkit.manifest import (
    MANIFEST_NAME,
    Manifest,
    ManifestEntry,
    ManifestHeader,
    compute_channel_means,
    write_manifest_lines,
)
from fakemix_toolkit.raster import write_class_mask, write_image, write_mask

LOGGER = logging.getLogger(__name__)

PROVENANCE_NAME = "provenance.jsonl"
ENTRY_ID_KEY = "entry-id"


@dataclass(frozen=True)
class AugmentJob:
    manifest: Manifest
    index: int
    config: RunConfig
    stage: Path


def _sample_loader(manifest: Manifest, config: RunConfig) -> Callable[[int], Sample]:
    return partial(manifest.load_sample, band=config.band())


def _fakemix_config(manifest: Manifest, config: RunConfig) -> FakeMixConfig:
    return config.fakemix_config(manifest.header.channel_means or None)


def augment_entry(
    manifest: Manifest, index: int, config: RunConfig
) -> tuple[Sample, dict]:
    """Augment one entry and return the result with its provenance record."""
    entry = manifest.entries[index]
    load = _sample_loader(manifest, config)
    base = load(index)
    donors = DonorSource(manifest.ids, load, exclude=index)
    rng = SeededRng(seed=config.seed, stream_id=index)
    record = {ENTRY_ID_KEY: entry.id, "index": index, "method": config.method.value}

    if config.method == AugmentMethod.FAKEMIX:
        outcome = run_fakemix(
            base, donors, _fakemix_config(manifest, config), rng.derive("fakemix")
        )
        record.update(
            outcome=outcome.outcome,
            content=config.content_mode.value,
            donors=[paste.to_record() for paste in outcome.pastes],
        )
        return outcome.sample, record

    if config.method == AugmentMethod.MIXUP:
        result = run_mixup(base, donors, config.alpha, rng.derive("mixup"))
    elif config.method == AugmentMethod.CUTOUT:
        result = run_cutout(base, config.hole_size, rng.derive("cutout"))
    else:
        result = run_cutmix(base, donors, rng.derive("cutmix"))
    record.update(outcome="augmented", donors=[], **result.to_record())
    return result.sample, record


def replay_entry(manifest: Manifest, record: dict, config: RunConfig) -> Sample:
    """Rebuild an augmented sample from the source manifest and its record."""
    index = int(record["index"])
    if manifest.entries[index].id != record[ENTRY_ID_KEY]:
        raise UnprocessableError(
            detail=f"Record {record[ENTRY_ID_KEY]} does not match "
            f"manifest entry {index}"
        )
    load = _sample_loader(manifest, config)
    base = load(index)
    donors = DonorSource(manifest.ids, load, exclude=index)
    method = record.get("method", AugmentMethod.FAKEMIX.value)
    if method == AugmentMethod.FAKEMIX.value:
        content = ContentMode(record.get("content", config.content_mode.value))
        recorded = config.model_copy(update={"content_mode": content})
        pastes = [Paste.from_record(item) for item in record["donors"]]
        return replay_fakemix(
            base, donors, _fakemix_config(manifest, recorded), pastes
        )
    return replay_baseline(method, base, donors, record)


def _augment_job(job: AugmentJob) -> tuple[dict, ManifestEntry]:
    sample, record = augment_entry(job.manifest, job.index, job.config)
    entry = job.manifest.entries[job.index]
    name = f"{entry.id}.png"
    write_image(job.stage / "images" / name, sample.image)
    write_class_mask(job.stage / "segs" / name, sample.seg)
    write_mask(job.stage / "boundaries" / name, sample.boundary)
    return record, ManifestEntry(
        id=entry.id,
        image=f"images/{name}",
        seg=f"segs/{name}",
        boundary=f"boundaries/{name}",
        split=entry.split,
    )


def cmd_augment(
    manifest_path: Path, config: RunConfig, out_dir: Optional[Path] = None
) -> Manifest:
    """
    Augment every entry of the manifest into out_dir (images/, segs/,
    boundaries/, provenance.jsonl and manifest.jsonl), all staged and
    committed together.
    """
    out_dir = Path(out_dir or config.out or "")
    if not out_dir.name:
        raise BadInputError(detail="augment needs an output directory (--out)")
    manifest = Manifest.load(manifest_path)
    LOGGER.info(
        "Augmenting %d entries with %s using %d worker(s)",
        len(manifest.entries),
        config.method.value,
        config.workers,
    )

    with OutputStage(out_dir, marker=MANIFEST_NAME) as stage:
        for sub in ("images", "segs", "boundaries"):
            (stage.path / sub).mkdir()
        jobs = [
            AugmentJob(manifest=manifest, index=index, config=config, stage=stage.path)
            for index in range(len(manifest.entries))
        ]
        if config.workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                results = list(pool.map(_augment_job, jobs))
        else:
            results = [_augment_job(job) for job in jobs]

        # results come back in manifest order whatever the scheduling
        records = [record for record, _ in results]
        entries = [entry for _, entry in results]
        write_manifest_lines(stage.path / PROVENANCE_NAME, records)
        augmented = Manifest(
            header=ManifestHeader(
                channel_means=compute_channel_means(
                    stage.path / entry.image for entry in entries
                ),
                count=len(entries),
            ),
            entries=entries,
        )
        augmented.save(stage.path / MANIFEST_NAME)
        stage.commit()

    augmented.root = out_dir
    applied = sum(record["outcome"] == "augmented" for record in records)
    LOGGER.info("Wrote %d samples (%d augmented) to %s", len(records), applied, out_dir)
    return augmented


def _run_augment(args: argparse.Namespace) -> int:
    config = resolve_run_config(args)
    cmd_augment(args.manifest, config)
    return 0


def register(subparsers, parents: list[argparse.ArgumentParser]) -> None:
    augment = subparsers.add_parser(
        "augment", parents=parents, help="augment every sample of a manifest"
    )
    augment.add_argument("manifest", type=Path)
    augment.set_defaults(handler=_run_augment)
