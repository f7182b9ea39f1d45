"""
The eval command: score a directory of predictions against labels.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional

from fakemix_toolkit.cli.model import resolve_run_config
from fakemix_toolkit.common.staging import atomic_write_bytes
from fakemix_toolkit.manifest import Manifest
from fakemix_toolkit.metrics import MetricsReport, evaluate_dataset

LOGGER = logging.getLogger(__name__)


def cmd_eval(
    pred_dir: Path,
    gt_dir: Path,
    classes: int,
    report_path: Optional[Path] = None,
    manifest_path: Optional[Path] = None,
    workers: int = 1,
) -> MetricsReport:
    """
    Evaluate and write the report as pretty JSON. With a manifest, images
    are also grouped by the split tags of its entries.
    """
    split_of = None
    if manifest_path is not None:
        split_of = Manifest.load(manifest_path, check_files=False).splits()
    report = evaluate_dataset(pred_dir, gt_dir, classes, split_of, workers)
    document = report.model_dump_json(indent=2, exclude_none=True)
    if report_path is not None:
        atomic_write_bytes(Path(report_path), document.encode("utf-8"))
        LOGGER.info("Wrote metrics report to %s", report_path)
    else:
        print(document, file=sys.stdout)
    LOGGER.info("Acc %.2f mIoU %.2f MAE %.4f", report.acc, report.miou, report.mae)
    return report


def _run_eval(args: argparse.Namespace) -> int:
    config = resolve_run_config(args)
    cmd_eval(
        args.pred_dir,
        args.gt_dir,
        args.classes,
        config.out,
        args.manifest,
        config.workers,
    )
    return 0


def register(subparsers, parents: list[argparse.ArgumentParser]) -> None:
    evaluate = subparsers.add_parser(
        "eval", parents=parents, help="score predictions against labels"
    )
    evaluate.add_argument("pred_dir", type=Path)
    evaluate.add_argument("gt_dir", type=Path)
    evaluate.add_argument("--classes", type=int, default=2)
    evaluate.add_argument(
        "--manifest", type=Path, help="manifest whose split tags group the images"
    )
    evaluate.set_defaults(handler=_run_eval)
