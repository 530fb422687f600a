import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from edgesplat.errors import DimensionError, ParameterError
from edgesplat.raster import (
    convolve_same,
    convolve_same_pullback,
    gaussian_derivative_kernels3,
    gaussian_kernel3,
)
from oracles import central_gradient, convolve_loops

IDENTITY = np.array([[0.0, 0, 0], [0, 1, 0], [0, 0, 0]])


def test_gaussian_kernel_uniform_limit():
    # at sigma=100 the taps still sit ~7.4e-6 from 1/9; they converge as sigma grows
    total = 1 + 4 * math.exp(-1 / 2e4) + 4 * math.exp(-2 / 2e4)
    assert gaussian_kernel3(100.0)[1, 1] == pytest.approx(1 / total, rel=1e-14)
    np.testing.assert_allclose(gaussian_kernel3(100.0), 1 / 9, atol=1e-5)
    np.testing.assert_allclose(gaussian_kernel3(300.0), 1 / 9, atol=1e-6)


def test_gaussian_kernel_shape_and_sum():
    k = gaussian_kernel3(1.0)
    assert k[1, 1] == k.max()
    assert k[0, 0] == k[0, 2] == k[2, 0] == k[2, 2]
    assert abs(k.sum() - 1.0) <= 1e-12
    assert np.all(k > 0)


@pytest.mark.parametrize("sigma", [0.0, -1.0, float("nan")])
def test_kernels_reject_bad_sigma(sigma):
    with pytest.raises(ParameterError):
        gaussian_kernel3(sigma)
    with pytest.raises(ParameterError):
        gaussian_derivative_kernels3(sigma)


@pytest.mark.parametrize("sigma", [0.3, 1.0, 2.5])
def test_derivative_kernels(sigma):
    kx, ky = gaussian_derivative_kernels3(sigma)
    assert abs(kx.sum()) <= 1e-12
    assert abs(ky.sum()) <= 1e-12
    np.testing.assert_array_equal(ky, kx.T)
    np.testing.assert_array_equal(kx[:, 1], 0.0)
    assert np.abs(kx).max() == 1.0


def test_derivative_kernel_taps_follow_gaussian_profile():
    kx, _ = gaussian_derivative_kernels3(1.0)
    # column offset -1 is positive, rows weighted by exp(-di^2 / 2)
    assert kx[1, 0] == 1.0
    assert kx[0, 0] == pytest.approx(math.exp(-0.5), rel=1e-15)
    assert kx[1, 2] == -1.0


def test_derivative_kernel_sign_on_ramp():
    kx, ky = gaussian_derivative_kernels3(1.0)
    ramp = np.tile(np.arange(7.0), (7, 1))
    assert np.all(convolve_same(ramp, kx)[1:-1, 1:-1] > 0)
    np.testing.assert_array_equal(convolve_same(ramp, ky)[1:-1, 1:-1], 0.0)


def test_constant_image_zero_sum_kernel():
    kx, ky = gaussian_derivative_kernels3(1.0)
    img = np.full((6, 7), 3.7)
    assert np.all(convolve_same(img, kx)[1:-1, 1:-1] == 0.0)
    assert np.all(convolve_same(img, ky)[1:-1, 1:-1] == 0.0)


def test_identity_kernel():
    img = np.random.default_rng(0).normal(size=(5, 8))
    np.testing.assert_array_equal(convolve_same(img, IDENTITY), img)


def test_hand_computed_interior_pixel():
    img = (np.arange(25.0) ** 2).reshape(5, 5)
    out = convolve_same(img, gaussian_kernel3(1.0))
    e1, e2 = math.exp(-0.5), math.exp(-1.0)
    # neighbors of (2,2): center 144, edges 49+121+169+289, corners 36+64+256+324
    expected = (144 + 628 * e1 + 680 * e2) / (1 + 4 * e1 + 4 * e2)
    assert out[2, 2] == pytest.approx(expected, rel=1e-14)


def test_matches_loop_oracle_including_borders():
    rng = np.random.default_rng(1)
    img = rng.normal(size=(6, 9))
    k = rng.normal(size=(3, 3))
    np.testing.assert_allclose(convolve_same(img, k), convolve_loops(img, k), rtol=1e-13, atol=1e-13)


def test_orientation_is_true_convolution():
    impulse = np.zeros((5, 5))
    impulse[2, 2] = 1.0
    k = np.arange(9.0).reshape(3, 3)
    # convolving an impulse reproduces the kernel unflipped
    np.testing.assert_array_equal(convolve_same(impulse, k)[1:4, 1:4], k)


def test_dimension_errors():
    with pytest.raises(DimensionError):
        convolve_same(np.zeros((2, 5)), IDENTITY)
    with pytest.raises(DimensionError):
        convolve_same(np.zeros((5, 5)), np.zeros((2, 2)))
    with pytest.raises(DimensionError):
        convolve_same_pullback(np.zeros((5, 5)), IDENTITY, np.zeros((5, 4)))


def test_pullback_zero_and_identity():
    img = np.random.default_rng(2).normal(size=(5, 5))
    up = np.random.default_rng(3).normal(size=(5, 5))
    assert np.all(convolve_same_pullback(img, gaussian_kernel3(1.0), np.zeros((5, 5))) == 0)
    np.testing.assert_array_equal(convolve_same_pullback(img, IDENTITY, up), up)


def test_pullback_matches_finite_differences():
    rng = np.random.default_rng(4)
    img = rng.normal(size=(6, 6))
    up = rng.normal(size=(6, 6))
    k = gaussian_kernel3(1.0)
    fd = central_gradient(lambda x: float(np.sum(up * convolve_same(x, k))), img)
    np.testing.assert_allclose(convolve_same_pullback(img, k, up), fd, rtol=1e-5, atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), a=st.floats(-10, 10), b=st.floats(-10, 10))
def test_linearity(seed, a, b):
    rng = np.random.default_rng(seed)
    h, w = rng.integers(3, 9, size=2)
    A, B, k = rng.normal(size=(h, w)), rng.normal(size=(h, w)), rng.normal(size=(3, 3))
    lhs = convolve_same(a * A + b * B, k)
    rhs = a * convolve_same(A, k) + b * convolve_same(B, k)
    np.testing.assert_allclose(lhs, rhs, atol=1e-10 * (1 + abs(a) + abs(b)) * 10)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_adjoint_identity(seed):
    rng = np.random.default_rng(seed)
    h, w = rng.integers(3, 12, size=2)
    A, U, k = rng.normal(size=(h, w)), rng.normal(size=(h, w)), rng.normal(size=(3, 3))
    lhs = np.sum(U * convolve_same(A, k))
    rhs = np.sum(convolve_same_pullback(A, k, U) * A)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_outputs_finite(seed):
    rng = np.random.default_rng(seed)
    img = rng.normal(scale=1e6, size=(7, 7))
    assert np.all(np.isfinite(convolve_same(img, gaussian_kernel3(0.7))))
