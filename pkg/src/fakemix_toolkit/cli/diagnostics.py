"""
Diagnostic commands: aspp-demo and selfcheck.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from fakemix_toolkit import oracles
from fakemix_toolkit.cli.model import resolve_run_config
from fakemix_toolkit.common.error_handling import ExitCode
from fakemix_toolkit.common.model import AppModel
from fakemix_toolkit.common.staging import atomic_write_bytes
from fakemix_toolkit.neuralref import (
    ImportanceVector,
    SeparableConv,
    TransformParams,
    adaptive_aspp_trace,
    enhance,
)
from fakemix_toolkit.neuralref.fixtures import AsppFixture, default_fixture
from fakemix_toolkit.selfcheck import format_table, run_selfcheck

LOGGER = logging.getLogger(__name__)

ORACLE_TOLERANCE = 1e-6


class AsppDemoReport(AppModel):
    dilation_rates: list[int]
    descriptor: list[float]
    s_seg: list[float]
    s_bnd: list[float]
    z_seg_shape: list[int]
    z_bnd_shape: list[int]
    checks: dict[str, bool]
    passed: bool


def _is_zero(t: TransformParams) -> bool:
    return not any(
        np.any(array) for array in (t.fc1_weight, t.fc1_bias, t.fc2_weight, t.fc2_bias)
    )


def _branch_oracle(x: np.ndarray, conv) -> np.ndarray:
    stages = [conv]
    if isinstance(conv, SeparableConv):
        stages = [conv.depthwise, conv.pointwise]
    for stage in stages:
        x = oracles.conv_oracle(
            x, stage.weight, stage.bias, stage.dilation, stage.groups
        )
    return x


def cmd_aspp_demo(
    fixture_path: Optional[Path] = None,
    seed: int = 0,
    zero_transforms: bool = False,
) -> AsppDemoReport:
    """
    Run the adaptive pyramid on a fixture and report both importance
    vectors with the results of its invariant and oracle checks.
    """
    if fixture_path is not None:
        fixture = AsppFixture.load(fixture_path)
    else:
        fixture = default_fixture(seed=seed, zero_transforms=zero_transforms)
    x = fixture.input.to_tensor()
    params = fixture.to_params()
    t_seg = fixture.transform_seg.to_params()
    t_bnd = fixture.transform_bnd.to_params()
    trace = adaptive_aspp_trace(x, fixture.config, params, t_seg, t_bnd)

    stacked = np.concatenate([y.data for y in trace.ys], axis=2)
    count = len(trace.ys)
    checks = {
        "scores_in_range": all(
            0.0 <= v <= 1.0 for s in (trace.s_seg, trace.s_bnd) for v in s.values
        ),
        "residual_identity": bool(
            np.array_equal(
                enhance(trace.ys, ImportanceVector.constant(count, 0.0)).data, stacked
            )
            and np.allclose(
                enhance(trace.ys, ImportanceVector.constant(count, 1.0)).data,
                2.0 * stacked,
                rtol=0.0,
                atol=1e-12,
            )
        ),
        "branch_oracle": all(
            np.abs(y.data - _branch_oracle(x.data, conv)).max() <= ORACLE_TOLERANCE
            for y, conv in zip(trace.ys, params.branches)
        ),
        "score_oracle": all(
            np.abs(
                s.values
                - oracles.importance_oracle(
                    trace.descriptor, t.fc1_weight, t.fc1_bias, t.fc2_weight, t.fc2_bias
                )
            ).max()
            <= 1e-12
            for s, t in ((trace.s_seg, t_seg), (trace.s_bnd, t_bnd))
        ),
    }
    if _is_zero(t_seg) and _is_zero(t_bnd):
        checks["zero_transform"] = bool(
            not trace.s_seg.values.any()
            and not trace.s_bnd.values.any()
            and np.array_equal(trace.enhanced_seg.data, trace.enhanced_bnd.data)
        )

    report = AsppDemoReport(
        dilation_rates=fixture.config.dilation_rates,
        descriptor=[float(v) for v in trace.descriptor],
        s_seg=[float(v) for v in trace.s_seg.values],
        s_bnd=[float(v) for v in trace.s_bnd.values],
        z_seg_shape=list(trace.z_seg.shape),
        z_bnd_shape=list(trace.z_bnd.shape),
        checks=checks,
        passed=all(checks.values()),
    )
    LOGGER.info("AdaptiveASPP demo checks: %s", checks)
    return report


def cmd_selfcheck(seed: int = 0) -> bool:
    """Run every oracle suite and print a pass/fail table."""
    results = run_selfcheck(seed=seed)
    print(format_table(results), file=sys.stdout)
    return all(result.passed for result in results)


def _run_aspp_demo(args: argparse.Namespace) -> int:
    config = resolve_run_config(args)
    report = cmd_aspp_demo(args.fixture, config.seed, args.zero_transforms)
    document = report.model_dump_json(indent=2)
    if config.out is not None:
        atomic_write_bytes(config.out, document.encode("utf-8"))
    else:
        print(document, file=sys.stdout)
    return int(ExitCode.OK if report.passed else ExitCode.FAILURE)


def _run_selfcheck(args: argparse.Namespace) -> int:
    config = resolve_run_config(args)
    return int(ExitCode.OK if cmd_selfcheck(config.seed) else ExitCode.FAILURE)


def register(subparsers, parents: list[argparse.ArgumentParser]) -> None:
    demo = subparsers.add_parser(
        "aspp-demo", parents=parents, help="run the adaptive pyramid on a fixture"
    )
    demo.add_argument("--fixture", type=Path, help="JSON parameter fixture")
    demo.add_argument(
        "--zero-transforms",
        action="store_true",
        help="zero both score transforms of the generated fixture",
    )
    demo.set_defaults(handler=_run_aspp_demo)

    selfcheck = subparsers.add_parser(
        "selfcheck", parents=parents, help="run every oracle suite"
    )
    selfcheck.set_defaults(handler=_run_selfcheck)
