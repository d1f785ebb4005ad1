import numpy as np
import pytest

from mrgap.point_cloud import (
    CsvFormatError,
    NoiseSpec,
    PointCloud,
    add_gaussian_noise,
    gen_cassini,
    gen_ellipsoid_embedded,
    gen_torus,
    load_csv,
    random_rotation,
    save_csv,
)
from mrgap.evaluation import grmse


def test_cloud_rejects_nonfinite():
    with pytest.raises(ValueError):
        PointCloud(np.array([[1.0, np.nan]]))
    with pytest.raises(ValueError):
        PointCloud(np.array([[np.inf, 0.0]]))


def test_cloud_is_immutable():
    cloud = PointCloud(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        cloud.points[0, 0] = 1.0


def test_noise_spec_rejects_negative_sigma():
    with pytest.raises(ValueError):
        NoiseSpec(sigma=-0.1)


class TestCsv:
    def test_basic_parse(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("1,2,3\n4,5,6\n")
        cloud = load_csv(p)
        assert cloud.n == 2 and cloud.ambient_dim == 3
        np.testing.assert_allclose(cloud.points, [[1, 2, 3], [4, 5, 6]])

    def test_header_autodetect(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("x,y\n1,2\n3,4\n")
        assert load_csv(p).n == 2

    def test_empty_file(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("")
        with pytest.raises(CsvFormatError):
            load_csv(p)

    def test_ragged_row_named(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("1,2\n3,4,5\n")
        with pytest.raises(CsvFormatError, match="row 2"):
            load_csv(p)

    def test_non_numeric_named(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("1,2\n3,oops\n")
        with pytest.raises(CsvFormatError, match="row 2, column 2"):
            load_csv(p)

    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        cloud = PointCloud(rng.normal(size=(10, 3)))
        p = tmp_path / "c.csv"
        save_csv(cloud, p)
        back = load_csv(p)
        np.testing.assert_allclose(back.points, cloud.points, atol=1e-12)

    def test_empty_cloud_round_trip_fails_on_reload(self, tmp_path):
        cloud = PointCloud(np.empty((0, 3)))
        p = tmp_path / "c.csv"
        save_csv(cloud, p)
        with pytest.raises(CsvFormatError):
            load_csv(p)

    def test_cassini_round_trip_grmse_zero(self, tmp_path):
        cloud = gen_cassini(50, seed=1)
        p = tmp_path / "c.csv"
        save_csv(cloud, p)
        back = load_csv(p)
        assert grmse(cloud, back).value == 0.0


class TestCassini:
    def test_theta_zero(self):
        # X(0) = sqrt(1 + sqrt(1.2)), Y = Z = 0
        from mrgap.point_cloud import _cassini_xyz

        pt = _cassini_xyz(np.array([0.0]))[0]
        np.testing.assert_allclose(
            pt, [np.sqrt(1 + np.sqrt(1.2)), 0.0, 0.0], atol=1e-15
        )

    def test_theta_half_pi(self):
        from mrgap.point_cloud import _cassini_xyz

        pt = _cassini_xyz(np.array([np.pi / 2]))[0]
        assert abs(pt[0]) < 1e-15
        np.testing.assert_allclose(pt[2], -0.3, atol=1e-15)

    def test_paper_scale(self):
        cloud = gen_cassini(102, seed=3)
        assert cloud.n == 102 and cloud.ambient_dim == 3

    def test_n_zero_rejected(self):
        with pytest.raises(ValueError):
            gen_cassini(0)


class TestTorus:
    def test_implicit_equation(self):
        cloud = gen_torus(500, seed=2)
        x, y, z = cloud.points.T
        lhs = (np.sqrt(x ** 2 + y ** 2) - 2.0) ** 2 + z ** 2
        np.testing.assert_allclose(lhs, 0.64, atol=1e-12)

    def test_paper_scale(self):
        assert gen_torus(558, seed=1).n == 558

    def test_n_zero_rejected(self):
        with pytest.raises(ValueError):
            gen_torus(0)


class TestEllipsoid:
    def test_implicit_equation_after_rotation(self):
        cloud = gen_ellipsoid_embedded(200, ambient_dim=30, seed=5)
        resid = _ellipsoid_residual(cloud)
        np.testing.assert_allclose(resid, 1.0, atol=1e-10)

    def test_fitted_form_has_ellipsoid_axes(self):
        # rotation-invariant check: the recovered quadratic form must have
        # eigenvalues 1/4, 1/2.25, 1
        cloud = gen_ellipsoid_embedded(400, ambient_dim=20, seed=11)
        Q = _ellipsoid_form(cloud)
        np.testing.assert_allclose(
            np.sort(np.linalg.eigvalsh(Q)), [0.25, 1 / 2.25, 1.0], atol=1e-8
        )

    def test_zero_padding(self):
        cloud = gen_ellipsoid_embedded(50, ambient_dim=30, seed=5)
        outside = np.delete(cloud.points, [13, 14, 15], axis=1)
        assert np.all(outside == 0.0)

    def test_paper_scale(self):
        cloud = gen_ellipsoid_embedded(800, ambient_dim=30, seed=0)
        assert cloud.n == 800 and cloud.ambient_dim == 30

    def test_rotation_is_orthogonal(self):
        R = random_rotation(np.random.default_rng(7))
        np.testing.assert_allclose(R.T @ R, np.eye(3), atol=1e-12)

    def test_low_ambient_dim_rejected(self):
        with pytest.raises(ValueError):
            gen_ellipsoid_embedded(10, ambient_dim=2, seed=0)


def _ellipsoid_form(cloud):
    # Recover the rotated quadratic form x^T Q x = 1 from the point set
    # itself by least squares (rotation-free implicit-equation oracle).
    block = cloud.points[:, 13:16]
    rows = []
    for x in block:
        outer = np.outer(x, x)
        rows.append(
            [outer[0, 0], outer[1, 1], outer[2, 2],
             2 * outer[0, 1], 2 * outer[0, 2], 2 * outer[1, 2]]
        )
    coef, *_ = np.linalg.lstsq(np.asarray(rows), np.ones(len(rows)), rcond=None)
    return np.array(
        [[coef[0], coef[3], coef[4]],
         [coef[3], coef[1], coef[5]],
         [coef[4], coef[5], coef[2]]]
    )


def _ellipsoid_residual(cloud):
    block = cloud.points[:, 13:16]
    Q = _ellipsoid_form(cloud)
    return np.einsum("ij,jk,ik->i", block, Q, block)


class TestNoise:
    def test_zero_sigma_identity(self):
        cloud = gen_cassini(20, seed=0)
        out = add_gaussian_noise(cloud, NoiseSpec(0.0, 42))
        assert out is cloud

    def test_seed_determinism(self):
        cloud = gen_cassini(20, seed=0)
        a = add_gaussian_noise(cloud, NoiseSpec(0.1, 42))
        b = add_gaussian_noise(cloud, NoiseSpec(0.1, 42))
        np.testing.assert_array_equal(a.points, b.points)

    def test_sample_variance(self):
        cloud = PointCloud(np.zeros((10_000, 3)))
        noisy = add_gaussian_noise(cloud, NoiseSpec(0.04, 9))
        var = noisy.points.var(axis=0)
        np.testing.assert_allclose(var, 0.0016, rtol=0.05)
