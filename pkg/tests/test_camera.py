import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from edgesplat.camera import (
    CameraIntrinsics,
    ViewSpec,
    default_pool,
    normalize_cloud,
    project,
    project_pullback,
    rotation_from_view,
    sample_views,
)
from edgesplat.errors import DegenerateCloudError, DimensionError, ParameterError, ProjectionError
from oracles import central_gradient

K = CameraIntrinsics()
FRONT = ViewSpec(0.0, 0.0, 2.5)


def test_default_intrinsics_matrix():
    np.testing.assert_array_equal(K.matrix, [[120, 0, -32], [0, 120, -32], [0, 0, 1]])
    assert FRONT.translation.tolist() == [0.0, 0.0, 2.5]


def test_rotation_identity_at_zero():
    np.testing.assert_array_equal(rotation_from_view(FRONT), np.eye(3))


def test_rotation_azimuth_90():
    r = rotation_from_view(ViewSpec(90.0, 0.0))
    np.testing.assert_allclose(r @ [1.0, 0, 0], [0, 0, -1], atol=1e-15)


def test_rotation_order_elevation_after_azimuth():
    r = rotation_from_view(ViewSpec(90.0, 90.0))
    # Ry(90) sends x to -z, then Rx(90) sends -z to +y
    np.testing.assert_allclose(r @ [1.0, 0, 0], [0, 1, 0], atol=1e-15)


@settings(max_examples=100, deadline=None)
@given(az=st.floats(-720, 720), el=st.floats(-90, 90))
def test_rotation_orthonormal(az, el):
    r = rotation_from_view(ViewSpec(az, el))
    np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-12)
    assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize(
    "point, u, v",
    [((0.0, 0.0, 0.0), 32.0, 32.0), ((0.5, 0.0, 0.0), 8.0, 32.0), ((-0.5, 0.0, 0.0), 56.0, 32.0),
     ((0.0, 0.5, 0.0), 32.0, 8.0)],
)
def test_projection_hand_cases(point, u, v):
    pc = project(np.array([point]), FRONT, K)
    assert pc.uv[0, 0] == pytest.approx(u, abs=1e-9)
    assert pc.uv[0, 1] == pytest.approx(v, abs=1e-9)
    assert pc.depth[0] == pytest.approx(2.5 + point[2], abs=1e-12)


def test_front_view_depth_is_z_plus_distance_exactly():
    cloud = np.random.default_rng(0).uniform(-0.5, 0.5, size=(200, 3))
    pc = project(cloud, FRONT, K)
    np.testing.assert_array_equal(pc.depth, cloud[:, 2] + 2.5)


def test_front_view_unit_cube_lands_in_image():
    cloud = np.random.default_rng(1).uniform(-0.5, 0.5, size=(1000, 3))
    uv = project(cloud, FRONT, K).uv
    assert uv.min() >= 0 and uv.max() <= 64
    # bounding-box corners give the extreme values 2 and 62
    corners = np.array([[x, y, z] for x in (-.5, .5) for y in (-.5, .5) for z in (-.5, .5)])
    uv = project(corners, FRONT, K).uv
    assert uv.min() == pytest.approx(2.0) and uv.max() == pytest.approx(62.0)


def test_permutation_equivariance():
    rng = np.random.default_rng(2)
    cloud = rng.uniform(-0.5, 0.5, size=(30, 3))
    perm = rng.permutation(30)
    view = ViewSpec(33.0, 12.0)
    a = project(cloud, view, K)
    b = project(cloud[perm], view, K)
    np.testing.assert_array_equal(a.uv[perm], b.uv)
    np.testing.assert_array_equal(a.depth[perm], b.depth)


def test_point_behind_camera_is_reported_by_index():
    cloud = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -3.0]])
    with pytest.raises(ProjectionError) as err:
        project(cloud, FRONT, K)
    assert err.value.index == 1


def test_pullback_zero_upstream():
    cloud = np.random.default_rng(3).uniform(-0.5, 0.5, size=(5, 3))
    assert np.all(project_pullback(cloud, FRONT, K, np.zeros((5, 2))) == 0)


def test_pullback_single_point_du_dx():
    p = np.array([[0.1, -0.2, 0.3]])
    g = project_pullback(p, FRONT, K, np.array([[1.0, 0.0]]))
    assert g[0, 0] == pytest.approx(-120.0 / 2.8, rel=1e-12)
    fd = central_gradient(lambda x: project(x, FRONT, K).uv[0, 0], p)
    np.testing.assert_allclose(g, fd, rtol=1e-6, atol=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_pullback_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    cloud = rng.uniform(-0.5, 0.5, size=(16, 3))
    view = ViewSpec(rng.uniform(0, 360), rng.uniform(-40, 40))
    up = rng.normal(size=(16, 2))
    fd = central_gradient(lambda x: float(np.sum(up * project(x, view, K).uv)), cloud)
    np.testing.assert_allclose(project_pullback(cloud, view, K, up), fd, rtol=1e-5, atol=1e-7)


def test_pullback_dimension_error():
    with pytest.raises(DimensionError):
        project_pullback(np.zeros((3, 3)), FRONT, K, np.zeros((2, 2)))


def test_normalize_examples():
    np.testing.assert_array_equal(normalize_cloud([[0, 0, 0], [2, 0, 0]]), [[-0.5, 0, 0], [0.5, 0, 0]])
    cube = np.array([[-0.5, -0.3, 0.4], [0.5, 0.3, -0.4], [0.0, 0.1, 0.0]])
    np.testing.assert_allclose(normalize_cloud(cube), cube, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(1e-3, 1e3))
def test_normalize_postcondition(seed, scale):
    rng = np.random.default_rng(seed)
    cloud = rng.normal(size=(rng.integers(2, 50), 3)) * scale + rng.normal(size=3) * 10
    out = normalize_cloud(cloud)
    lo, hi = out.min(axis=0), out.max(axis=0)
    assert (hi - lo).max() == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose((lo + hi) / 2, 0.0, atol=1e-9)


def test_normalize_degenerate():
    with pytest.raises(DegenerateCloudError):
        normalize_cloud([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]])


def test_sample_views_contract():
    pool = default_pool()
    assert len(pool) == 16 and len(set(pool)) == 16
    full = sample_views(pool, 16, seed=5)
    assert sorted(full, key=pool.index) == pool
    assert sample_views(pool, 4, seed=9) == sample_views(pool, 4, seed=9)
    with pytest.raises(ParameterError):
        sample_views(pool, 17, seed=0)


def test_sample_views_uniform():
    pool = default_pool()
    rng = np.random.default_rng(123)
    counts = {v: 0 for v in pool}
    for _ in range(10_000):
        counts[sample_views(pool, 1, rng)[0]] += 1
    assert all(525 <= c <= 725 for c in counts.values())


def test_view_and_intrinsics_validation():
    with pytest.raises(ParameterError):
        ViewSpec(0, 0, 0.0)
    with pytest.raises(ParameterError):
        CameraIntrinsics(fx=0.0)
