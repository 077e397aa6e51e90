import numpy as np
import pytest

from homecage.embed import pca_fit, pca_transform


class TestPcaFit:
    def test_line_y_equals_x(self, rng):
        t = rng.normal(size=200)
        points = np.stack([t, t], axis=1)
        model = pca_fit(points, dims=1)
        np.testing.assert_allclose(
            np.abs(model.components[0]), [1 / np.sqrt(2)] * 2, atol=1e-12
        )
        assert model.components[0][0] > 0  # sign convention
        assert model.explained_variance_fraction[0] == pytest.approx(1.0)

    def test_transform_of_mean_is_origin(self, rng):
        points = rng.normal(size=(50, 6)) + 3.0
        model = pca_fit(points, dims=2)
        out = pca_transform(model, points.mean(axis=0, keepdims=True))
        np.testing.assert_allclose(out, 0.0, atol=1e-9)

    def test_components_orthonormal(self, rng):
        points = rng.normal(size=(80, 10))
        model = pca_fit(points, dims=4)
        gram = model.components @ model.components.T
        np.testing.assert_allclose(gram, np.eye(4), atol=1e-8)

    def test_variance_fractions_descending_and_bounded(self, rng):
        points = rng.normal(size=(100, 8)) * rng.uniform(0.1, 5.0, 8)
        model = pca_fit(points, dims=5)
        fr = model.explained_variance_fraction
        assert (np.diff(fr) <= 1e-12).all()
        assert fr.sum() <= 1.0 + 1e-12

    def test_reconstruction_error_equals_discarded_eigenvalues(self, rng):
        for _ in range(10):
            n, d, dims = 60, 7, 3
            points = rng.normal(size=(n, d)) @ rng.normal(size=(d, d))
            model = pca_fit(points, dims=dims)
            centered = points - model.mean
            recon = pca_transform(model, points) @ model.components
            err = ((centered - recon) ** 2).sum() / (n - 1)

            cov = centered.T @ centered / (n - 1)
            eigvals = np.sort(np.linalg.eigvalsh(cov))[::-1]
            assert err == pytest.approx(eigvals[dims:].sum(), abs=1e-8)

    def test_sign_deterministic_across_runs(self, rng):
        points = rng.normal(size=(40, 5))
        m1 = pca_fit(points, dims=3)
        m2 = pca_fit(points.copy(), dims=3)
        np.testing.assert_array_equal(m1.components, m2.components)

    def test_dims_exceeding_input_rejected(self, rng):
        with pytest.raises(ValueError, match="dims"):
            pca_fit(rng.normal(size=(10, 3)), dims=4)

    def test_needs_two_samples(self):
        with pytest.raises(ValueError, match="2 samples"):
            pca_fit(np.zeros((1, 3)))

    def test_transform_dimension_checked(self, rng):
        model = pca_fit(rng.normal(size=(20, 4)), dims=2)
        with pytest.raises(ValueError, match="dimension"):
            pca_transform(model, np.zeros((2, 5)))
