"""
Oracle suites run by the selfcheck command.

The functions should all return the same type - a dict of failure messages
with unique keys. Each one checks an isolated part of the toolkit against a
brute force oracle, a closed form or a statistical test. They are then all
applied and the results combined, so one report covers the whole toolkit.
"""

import logging
from typing import Callable, Optional

import numpy as np

from fakemix_toolkit import oracles
from fakemix_toolkit.augment import (
    DonorSource,
    FakeMixConfig,
    Paste,
    Sample,
    replay_fakemix,
    run_fakemix,
)
from fakemix_toolkit.common.model import AppModel, CheckReport
from fakemix_toolkit.imagecore import (
    BinaryMask,
    ClassMask,
    ImageTensor,
    SeededRng,
    dilate,
    erode,
    sample_translation,
    upsample_bilinear,
)
from fakemix_toolkit.metrics import (
    ConfusionCounts,
    ber,
    confusion_counts,
    iou,
    mae,
    pixel_accuracy,
)
from fakemix_toolkit.neuralref import (
    ConvParams,
    ImportanceVector,
    TransformParams,
    clipped_tanh,
    cross_entropy_loss,
    dice_loss,
    dice_loss_grad,
    dilated_conv,
    enhance,
    finite_diff_check,
    importance_scores,
    importance_scores_vjp,
)
from fakemix_toolkit.synth import SynthConfig, generate_sample

LOGGER = logging.getLogger(__name__)

SIGNIFICANCE = 0.01
CONV_TOLERANCE = 1e-6
GRAD_TOLERANCE = 1e-4

COMPOSITE_SAMPLES = 1000
COMPOSITE_SIZE = 64
TRANSLATION_DRAWS = 100_000
CONV_CASES = 200
RESIDUAL_CASES = 100
IMPORTANCE_CASES = 1000

CheckFn = Callable[[SeededRng], dict[str, str]]


class SuiteResult(AppModel):
    name: str
    passed: bool
    messages: dict[str, str]


def _check_morphology(rng: SeededRng) -> dict[str, str]:
    messages = {}
    for case in range(20):
        height, width = rng.integers(1, 14), rng.integers(1, 14)
        mask = (rng.generator.random((height, width)) < 0.5).astype(np.uint8)
        radius = rng.integers(0, 4)
        if not np.array_equal(
            dilate(BinaryMask(mask), radius).data, oracles.dilate_oracle(mask, radius)
        ):
            messages[f"dilate_{case}"] = (
                f"dilate differs on {height}x{width}, r={radius}"
            )
        if not np.array_equal(
            erode(BinaryMask(mask), radius).data, oracles.erode_oracle(mask, radius)
        ):
            messages[f"erode_{case}"] = f"erode differs on {height}x{width}, r={radius}"
    return messages


def _check_convolution(rng: SeededRng) -> dict[str, str]:
    messages = {}
    gen = rng.generator
    for case in range(CONV_CASES):
        size, channels = rng.integers(3, 17), rng.integers(1, 9)
        out_channels, k = rng.integers(1, 9), (1, 3)[rng.integers(0, 2)]
        dilation = rng.integers(1, 5)
        x = gen.normal(size=(size, size, channels))
        weight = gen.normal(size=(out_channels, channels, k, k))
        bias = gen.normal(size=out_channels)
        got = dilated_conv(ImageTensor(x), ConvParams(weight, bias, dilation)).data
        error = np.abs(got - oracles.conv_oracle(x, weight, bias, dilation)).max()
        if error > CONV_TOLERANCE:
            messages[f"conv_{case}"] = (
                f"dilated_conv deviates by {error:.3e} (k={k}, d={dilation})"
            )
    x = gen.random((5, 7, 2))
    got = upsample_bilinear(ImageTensor(x), 9, 4).data
    if np.abs(got - oracles.bilinear_oracle(x, 9, 4)).max() > 1e-12:
        messages["bilinear"] = "upsample_bilinear differs from the per-pixel oracle"
    return messages


def _check_composite(rng: SeededRng) -> dict[str, str]:
    """Single pastes against the per-pixel oracle; labels must survive."""
    messages = {}
    cfg = FakeMixConfig(keep_prob=0.0, repetitions=1)
    synth = SynthConfig(size=COMPOSITE_SIZE, seed=rng.seed)
    samples = [
        Sample.from_seg(*generate_sample(i, synth)[:2])
        for i in range(COMPOSITE_SAMPLES)
    ]
    for index, base in enumerate(samples):
        donors = DonorSource.from_samples(samples, exclude=index)
        outcome = run_fakemix(base, donors, cfg, rng.derive(f"composite-{index}"))
        paste = outcome.pastes[0]
        donor = samples[int(paste.donor_id)]
        expected = oracles.composite_oracle(
            base.image.data, donor.image.data, donor.boundary.data, paste.dx, paste.dy
        )
        if not np.array_equal(outcome.sample.image.data, expected):
            messages[f"composite_{index}"] = f"composite of sample {index} is not exact"
        if not outcome.sample.labels_same_as(base):
            messages[f"labels_{index}"] = f"labels of sample {index} changed"
        pastes = [Paste.from_record(paste.to_record())]
        replayed = replay_fakemix(base, donors, cfg, pastes)
        if not replayed.same_as(outcome.sample):
            messages[f"replay_{index}"] = f"replay of sample {index} differs"
    return messages


def _check_sampling(rng: SeededRng) -> dict[str, str]:
    messages = {}
    reach = 256
    vectors = (
        sample_translation(512, 512, 0.5, rng) for _ in range(TRANSLATION_DRAWS)
    )
    draws = np.array([(d.dx, d.dy) for d in vectors])
    if np.abs(draws).max() > reach:
        messages["translation_bound"] = (
            f"translation beyond +-{reach}: {np.abs(draws).max()}"
        )
        return messages
    for axis, name in ((0, "dx"), (1, "dy")):
        pvalue = oracles.translation_uniformity_pvalue(draws[:, axis], reach)
        if pvalue < SIGNIFICANCE:
            messages[f"translation_uniform_{name}"] = (
                f"{name} fails the uniformity test (p={pvalue:.4f})"
            )
    return messages


def _gating_frequency(keep_prob: float, trials: int, rng: SeededRng) -> float:
    base = Sample(
        image=ImageTensor.zeros(6, 6, 3),
        seg=BinaryMask.zeros(6, 6),
        boundary=BinaryMask.zeros(6, 6),
    )
    band = np.zeros((6, 6), dtype=np.uint8)
    band[2:4, 2:4] = 1
    donor = Sample(
        image=ImageTensor.full(6, 6, 3, 1.0),
        seg=BinaryMask(band),
        boundary=BinaryMask(band),
    )
    donors = DonorSource.from_samples([donor])
    cfg = FakeMixConfig(translate_ratio=0.0, keep_prob=keep_prob, repetitions=1)
    unchanged = sum(
        run_fakemix(base, donors, cfg, rng).sample.image.same_as(base.image)
        for _ in range(trials)
    )
    return unchanged / trials


def _check_gating(rng: SeededRng) -> dict[str, str]:
    messages = {}
    frequency = _gating_frequency(0.5, 10000, rng.derive("half"))
    if not 0.48 <= frequency <= 0.52:
        messages["gating_half"] = (
            f"p=0.5 keeps the original {frequency:.4f} of the time"
        )
    for keep_prob in (0.0, 1.0):
        frequency = _gating_frequency(keep_prob, 200, rng.derive(f"p{keep_prob}"))
        if frequency != keep_prob:
            messages[f"gating_{keep_prob}"] = (
                f"p={keep_prob} keeps the original {frequency:.4f} of the time"
            )
    return messages


def _check_residual_identity(rng: SeededRng) -> dict[str, str]:
    messages = {}
    for case in range(RESIDUAL_CASES):
        count = rng.integers(1, 8)
        ys = [ImageTensor(rng.generator.normal(size=(4, 5, 3))) for _ in range(count)]
        stacked = np.concatenate([y.data for y in ys], axis=2)
        kept = enhance(ys, ImportanceVector.constant(count, 0.0)).data
        if not np.array_equal(kept, stacked):
            messages[f"enhance_zero_{case}"] = "enhance with s=0 is not the identity"
        doubled = enhance(ys, ImportanceVector.constant(count, 1.0)).data
        if np.abs(doubled - 2.0 * stacked).max() > 1e-12:
            messages[f"enhance_one_{case}"] = "enhance with s=1 does not double"
    return messages


def _check_importance_range(rng: SeededRng) -> dict[str, str]:
    messages = {}
    if clipped_tanh(np.array([-1.0, 0.0])).tolist() != [0.0, 0.0]:
        messages["clipped_tanh_zero"] = "clipped tanh of -1 and 0 must be exactly 0"
    gen = rng.generator
    for case in range(IMPORTANCE_CASES):
        t = TransformParams(
            fc1_weight=gen.normal(0, 3, (7, 7)),
            fc1_bias=gen.normal(0, 3, 7),
            fc2_weight=gen.normal(0, 3, (7, 7)),
            fc2_bias=gen.normal(0, 3, 7),
        )
        values = importance_scores(gen.normal(0, 3, 7), t).values
        if values.size != 7 or values.min() < 0.0 or values.max() > 1.0:
            messages[f"importance_{case}"] = f"scores out of range: {values}"
    return messages


def _check_losses(rng: SeededRng) -> dict[str, str]:
    messages = {}
    gen = rng.generator
    gt = BinaryMask(gen.random((512, 512)) < 0.5)
    if dice_loss(gt.data.astype(np.float64), gt) >= 1e-3:
        messages["dice_perfect"] = "dice loss of a perfect prediction is not ~0"
    uniform = ImageTensor.zeros(8, 8, 2)
    labels = ClassMask(gen.integers(0, 2, size=(8, 8)))
    if abs(cross_entropy_loss(uniform, labels) - np.log(2.0)) > 1e-6:
        messages["ce_uniform"] = "cross entropy of uniform logits is not ln 2"

    small = BinaryMask(gen.random((4, 4)) < 0.5)
    point = gen.uniform(0.1, 0.9, size=(4, 4))
    error = finite_diff_check(
        lambda p: dice_loss(p, small), point, lambda p: dice_loss_grad(p, small)
    )
    if error > GRAD_TOLERANCE:
        messages["dice_grad"] = f"dice gradient check error {error:.3e}"

    # positive weights keep ReLU and tanh in their active regions
    t = TransformParams(
        fc1_weight=gen.uniform(0.1, 0.3, (7, 7)),
        fc1_bias=np.full(7, 0.05),
        fc2_weight=gen.uniform(0.1, 0.3, (7, 7)),
        fc2_bias=np.full(7, 0.05),
    )
    cotangent = gen.normal(size=7)
    error = finite_diff_check(
        lambda y: float(cotangent @ importance_scores(y, t).values),
        gen.uniform(0.1, 0.5, size=7),
        lambda y: importance_scores_vjp(y, t, cotangent),
    )
    if error > GRAD_TOLERANCE:
        messages["transform_grad"] = f"transform gradient check error {error:.3e}"
    return messages


def metric_fixture_masks() -> dict[str, np.ndarray]:
    """Hand built 4x4 masks with known Acc, IoU and MAE."""
    gt = np.zeros((4, 4), dtype=np.int64)
    gt[0, 0:3] = 1
    iou_pred = np.zeros((4, 4), dtype=np.int64)
    iou_pred[0, 0:2] = 1
    iou_pred[1, 0] = 1
    acc_pred = gt.copy()
    acc_pred[3, :] = 1
    return {"gt": gt, "iou_pred": iou_pred, "acc_pred": acc_pred}


def _check_metric_fixtures(rng: SeededRng) -> dict[str, str]:
    messages = {}
    masks = metric_fixture_masks()
    gt = masks["gt"]
    fg_iou = iou(confusion_counts(masks["iou_pred"], gt, 2))[1]
    if fg_iou != 50.0:
        messages["iou_fixture"] = f"IoU fixture gives {fg_iou}, expected 50.0"
    acc = pixel_accuracy(masks["acc_pred"], gt)
    if acc != 75.0:
        messages["acc_fixture"] = f"Acc fixture gives {acc}, expected 75.0"
    half = mae(np.full((4, 4), 0.5), BinaryMask(gt != 0))
    if half != 0.5:
        messages["mae_fixture"] = f"MAE fixture gives {half}, expected 0.5"
    counts = ConfusionCounts(
        tp=np.array([3]), tn=np.array([2]), fp=np.array([2]), fn=np.array([1])
    )
    balanced = ber(counts)[0]
    if balanced != 37.5:
        messages["ber_fixture"] = f"BER fixture gives {balanced}, expected 37.5"
    pred = rng.generator.integers(0, 3, size=(8, 8))
    gt = rng.generator.integers(0, 3, size=(8, 8))
    tally = oracles.confusion_oracle(pred, gt, 3)
    counts = confusion_counts(pred, gt, 3)
    stacked = np.stack([counts.tp, counts.tn, counts.fp, counts.fn], 1)
    if not np.array_equal(stacked, tally):
        messages["confusion_oracle"] = (
            "confusion counts differ from the per-pixel tally"
        )
    return messages


SELFCHECK_SUITES: dict[str, CheckFn] = {
    "morphology": _check_morphology,
    "convolution": _check_convolution,
    "composite": _check_composite,
    "translation sampling": _check_sampling,
    "keep gating": _check_gating,
    "residual identity": _check_residual_identity,
    "importance range": _check_importance_range,
    "losses": _check_losses,
    "metric fixtures": _check_metric_fixtures,
}


def run_selfcheck(
    seed: int = 0, suites: Optional[dict[str, CheckFn]] = None
) -> list[SuiteResult]:
    suites = SELFCHECK_SUITES if suites is None else suites
    results = []
    for name, fn in suites.items():
        LOGGER.info("Running selfcheck suite '%s'", name)
        messages = fn(SeededRng(seed=seed).derive(name))
        results.append(SuiteResult(name=name, passed=not messages, messages=messages))
    return results


def selfcheck_report(results: list[SuiteResult]) -> CheckReport:
    """Flatten the suite results into one report."""
    messages = {
        f"{result.name}:{key}": message
        for result in results
        for key, message in result.messages.items()
    }
    return CheckReport(valid=not messages, messages=messages)


def format_table(results: list[SuiteResult]) -> str:
    width = max([len(result.name) for result in results] + [5])
    lines = [f"{'suite'.ljust(width)}  result", f"{'-' * width}  ------"]
    for result in results:
        verdict = "PASS" if result.passed else "FAIL"
        lines.append(f"{result.name.ljust(width)}  {verdict}")
        for message in result.messages.values():
            lines.append(f"{' ' * width}    {message}")
    return "\n".join(lines)
