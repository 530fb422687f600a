"""Dense image grids, 3x3 kernels and same-size convolution with its adjoint.

Images are plain 2D ``float64`` arrays indexed ``[row, col]``. Kernels are
3x3 arrays indexed ``[row offset + 1, col offset + 1]``.

Convolution is a true convolution (kernel flipped) with zero padding::

    out[r, c] = sum_{a, b in {-1, 0, 1}} k[a + 1, b + 1] * img[r - a, c - b]
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, ParameterError

_OFFSETS = np.array([-1.0, 0.0, 1.0])


def as_image(img, name="img"):
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"{name} must be non-empty, got shape {arr.shape}")
    return arr


def as_kernel(k):
    arr = np.asarray(k, dtype=np.float64)
    if arr.shape != (3, 3):
        raise DimensionError(f"kernel must be 3x3, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError("kernel taps must be finite")
    return arr


def _check_sigma(sigma):
    if not (np.isfinite(sigma) and sigma > 0):
        raise ParameterError(f"sigma must be a positive finite number, got {sigma!r}")


def _gaussian_weights(sigma):
    di = _OFFSETS[:, None]
    dj = _OFFSETS[None, :]
    return np.exp(-(di * di + dj * dj) / (2.0 * sigma * sigma)), dj


def gaussian_kernel3(sigma=1.0):
    """Normalized 3x3 Gaussian window (taps sum to one)."""
    _check_sigma(sigma)
    w, _ = _gaussian_weights(sigma)
    return w / w.sum()


def gaussian_derivative_kernels3(sigma=1.0):
    """Return ``(kx, ky)``, the 3x3 x- and y-derivative-of-Gaussian kernels.

    ``kx`` differentiates along columns and ``ky = kx.T`` along rows. Both are
    scaled so the largest absolute tap is 1. Under the true-convolution
    orientation a ramp increasing with column index gives a positive ``kx``
    response.
    """
    _check_sigma(sigma)
    w, dj = _gaussian_weights(sigma)
    kx = -dj * w
    kx = kx / np.abs(kx).max()
    # exact zeros in the center column, exact antisymmetry otherwise
    kx[:, 1] = 0.0
    kx[:, 0] = -kx[:, 2]
    return kx, kx.T.copy()


def _check_conv_input(img):
    img = as_image(img)
    if img.shape[0] < 3 or img.shape[1] < 3:
        raise DimensionError(f"image must be at least 3x3, got shape {img.shape}")
    return img


# taps paired with their point reflection; antisymmetric kernels then cancel
# exactly on constant input
_TAP_PAIRS = (((0, 0), (2, 2)), ((0, 1), (2, 1)), ((0, 2), (2, 0)), ((1, 0), (1, 2)))


def _accumulate(k, shifted, shape):
    out = np.zeros(shape)
    for (i1, j1), (i2, j2) in _TAP_PAIRS:
        t1, t2 = k[i1, j1], k[i2, j2]
        if t1 != 0.0 or t2 != 0.0:
            out += t1 * shifted(i1, j1) + t2 * shifted(i2, j2)
    if k[1, 1] != 0.0:
        out += k[1, 1] * shifted(1, 1)
    return out


def convolve_same(img, k):
    """Same-size 2D convolution of ``img`` with a 3x3 kernel, zero borders."""
    img = _check_conv_input(img)
    k = as_kernel(k)
    h, w = img.shape
    padded = np.pad(img, 1)
    return _accumulate(k, lambda i, j: padded[2 - i : 2 - i + h, 2 - j : 2 - j + w], img.shape)


def convolve_same_pullback(img, k, upstream):
    """Gradient of ``<upstream, convolve_same(img, k)>`` with respect to ``img``.

    This is the correlation of ``upstream`` with ``k``; ``img`` only fixes the
    expected shape since the map is linear.
    """
    img = _check_conv_input(img)
    k = as_kernel(k)
    upstream = as_image(upstream, "upstream")
    if upstream.shape != img.shape:
        raise DimensionError(f"upstream shape {upstream.shape} != image shape {img.shape}")
    h, w = img.shape
    padded = np.pad(upstream, 1)
    return _accumulate(k, lambda i, j: padded[i : i + h, j : j + w], img.shape)
