"""
Brute force reference implementations.

These loop over pixels and taps the way the formulas are written down and
are used to check the vectorised operations, both by the test suite and by
the selfcheck command. They are slow; keep inputs small.
"""

import numpy as np
from scipy import stats


def conv_oracle(
    x: np.ndarray,
    weight: np.ndarray,
    bias: np.ndarray,
    dilation: int = 1,
    groups: int = 1,
) -> np.ndarray:
    """Direct summation of a same-size, zero padded, dilated cross-correlation."""
    height, width, in_channels = x.shape
    out_channels, group_in, k, _ = weight.shape
    pad = dilation * (k - 1) // 2
    group_out = out_channels // groups
    out = np.zeros((height, width, out_channels))
    for y in range(height):
        for xx in range(width):
            for o in range(out_channels):
                g = o // group_out
                total = bias[o]
                for i in range(k):
                    for j in range(k):
                        sy = y + dilation * i - pad
                        sx = xx + dilation * j - pad
                        if 0 <= sy < height and 0 <= sx < width:
                            pixel = x[sy, sx, g * group_in : (g + 1) * group_in]
                            for c in range(group_in):
                                total += weight[o, c, i, j] * pixel[c]
                out[y, xx, o] = total
    return out


def _window(mask: np.ndarray, y: int, x: int, radius: int) -> tuple[np.ndarray, bool]:
    height, width = mask.shape
    top, bottom = y - radius, y + radius + 1
    left, right = x - radius, x + radius + 1
    inside = top >= 0 and left >= 0 and bottom <= height and right <= width
    window = mask[max(top, 0) : min(bottom, height), max(left, 0) : min(right, width)]
    return window, inside


def dilate_oracle(mask: np.ndarray, radius: int) -> np.ndarray:
    out = np.zeros(mask.shape, dtype=np.uint8)
    for y in range(mask.shape[0]):
        for x in range(mask.shape[1]):
            window, _ = _window(mask, y, x, radius)
            out[y, x] = 1 if window.any() else 0
    return out


def erode_oracle(mask: np.ndarray, radius: int) -> np.ndarray:
    """Pixels outside the image count as background."""
    out = np.zeros(mask.shape, dtype=np.uint8)
    for y in range(mask.shape[0]):
        for x in range(mask.shape[1]):
            window, inside = _window(mask, y, x, radius)
            out[y, x] = 1 if inside and window.all() else 0
    return out


def translate_oracle(src: np.ndarray, dx: int, dy: int) -> np.ndarray:
    out = np.zeros_like(src)
    height, width = src.shape[:2]
    for y in range(height):
        for x in range(width):
            sy, sx = y - dy, x - dx
            if 0 <= sy < height and 0 <= sx < width:
                out[y, x] = src[sy, sx]
    return out


def bilinear_oracle(src: np.ndarray, new_h: int, new_w: int) -> np.ndarray:
    """Corner aligned bilinear interpolation, one output pixel at a time."""
    height, width, channels = src.shape
    out = np.zeros((new_h, new_w, channels))
    for y in range(new_h):
        fy = 0.0 if new_h == 1 or height == 1 else y * (height - 1) / (new_h - 1)
        y0 = min(int(np.floor(fy)), height - 1)
        y1 = min(y0 + 1, height - 1)
        ty = fy - y0
        for x in range(new_w):
            fx = 0.0 if new_w == 1 or width == 1 else x * (width - 1) / (new_w - 1)
            x0 = min(int(np.floor(fx)), width - 1)
            x1 = min(x0 + 1, width - 1)
            tx = fx - x0
            out[y, x] = (
                (1 - ty) * (1 - tx) * src[y0, x0]
                + (1 - ty) * tx * src[y0, x1]
                + ty * (1 - tx) * src[y1, x0]
                + ty * tx * src[y1, x1]
            )
    return out


def composite_oracle(
    base: np.ndarray, donor: np.ndarray, band: np.ndarray, dx: int, dy: int
) -> np.ndarray:
    """
    One boundary-content paste, pixel by pixel: where the moved band is set
    the output is the moved donor pixel, elsewhere the base pixel.
    """
    out = base.copy()
    height, width = band.shape
    for y in range(height):
        for x in range(width):
            sy, sx = y - dy, x - dx
            if 0 <= sy < height and 0 <= sx < width and band[sy, sx]:
                out[y, x] = donor[sy, sx]
    return out


def confusion_oracle(pred: np.ndarray, gt: np.ndarray, classes: int) -> np.ndarray:
    """(classes, 4) array of TP, TN, FP, FN counted pixel by pixel."""
    counts = np.zeros((classes, 4), dtype=np.int64)
    for p, g in zip(pred.reshape(-1), gt.reshape(-1)):
        for c in range(classes):
            if p == c and g == c:
                counts[c, 0] += 1
            elif p != c and g != c:
                counts[c, 1] += 1
            elif p == c:
                counts[c, 2] += 1
            else:
                counts[c, 3] += 1
    return counts


def channel_means_oracle(images: list[np.ndarray]) -> np.ndarray:
    totals = np.zeros(images[0].shape[2]) if images else np.zeros(0)
    pixels = 0
    for image in images:
        for row in image:
            for pixel in row:
                totals += pixel
                pixels += 1
    return totals / pixels if pixels else totals


def translation_pmf(reach: float) -> np.ndarray:
    """
    Exact distribution of round(U(-reach, reach)) clipped to +-floor(reach),
    over the values -floor(reach) .. floor(reach).
    """
    limit = int(np.floor(reach))
    values = np.arange(-limit, limit + 1)
    lower = np.where(values == -limit, -reach, values - 0.5)
    upper = np.where(values == limit, reach, values + 0.5)
    lengths = np.clip(np.minimum(upper, reach) - np.maximum(lower, -reach), 0.0, None)
    return lengths / lengths.sum()


def translation_uniformity_pvalue(
    draws: np.ndarray, reach: float, bins: int = 32
) -> float:
    """Chi-squared goodness of fit of integer translation draws, binned."""
    limit = int(np.floor(reach))
    pmf = translation_pmf(reach)
    counts = np.bincount(np.asarray(draws) + limit, minlength=pmf.size)
    groups = np.array_split(np.arange(pmf.size), min(bins, pmf.size))
    observed = np.array([counts[g].sum() for g in groups], dtype=np.float64)
    expected = np.array([pmf[g].sum() for g in groups]) * observed.sum()
    return float(stats.chisquare(observed, f_exp=expected).pvalue)


def importance_oracle(
    y: np.ndarray,
    fc1_weight: np.ndarray,
    fc1_bias: np.ndarray,
    fc2_weight: np.ndarray,
    fc2_bias: np.ndarray,
) -> np.ndarray:
    """FC-ReLU-FC followed by max(tanh, 0), one scalar at a time."""
    n, hidden_width = fc1_weight.shape
    hidden = [0.0] * hidden_width
    for h in range(hidden_width):
        total = fc1_bias[h]
        for i in range(n):
            total += y[i] * fc1_weight[i, h]
        hidden[h] = total if total > 0 else 0.0
    scores = np.zeros(n)
    for i in range(n):
        total = fc2_bias[i]
        for h in range(hidden_width):
            total += hidden[h] * fc2_weight[h, i]
        scores[i] = max(float(np.tanh(total)), 0.0)
    return scores
