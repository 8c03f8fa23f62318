import math

import numpy as np
import pytest

from simplex_spectra.frame import Frame, build_frame, gram

TRIANGLE = np.array([[0.0, math.sqrt(3) / 2, -math.sqrt(3) / 2],
                     [1.0, -0.5, -0.5]])


class TestBuildFrame:
    @pytest.mark.parametrize("n", range(3, 13))
    def test_identities(self, n):
        f = build_frame(n)
        W = f.W
        assert W.shape == (n - 1, n)
        np.testing.assert_allclose(np.linalg.norm(W, axis=0), 1.0, atol=1e-12)
        G = W.T @ W
        off = G[~np.eye(n, dtype=bool)]
        np.testing.assert_allclose(off, -1 / (n - 1), atol=1e-12)
        assert np.linalg.norm(W @ W.T - n / (n - 1) * np.eye(n - 1)) < 1e-12
        assert np.max(np.abs(W @ np.ones(n))) < 1e-12
        assert max(f.check().values()) < 1e-12

    def test_triangle_gram(self):
        np.testing.assert_allclose(gram(build_frame(3)), TRIANGLE.T @ TRIANGLE, atol=1e-12)

    def test_tight_n4(self):
        W = build_frame(4).W
        np.testing.assert_allclose(W @ W.T, 4 / 3 * np.eye(3), atol=1e-12)

    def test_deterministic(self):
        assert np.array_equal(build_frame(7).W, build_frame(7).W)

    @pytest.mark.parametrize("n", [2, 1, 0])
    def test_rejects_small(self, n):
        with pytest.raises(ValueError):
            build_frame(n)

    def test_read_only(self):
        with pytest.raises(ValueError):
            build_frame(4).W[0, 0] = 1.0

    def test_vector_and_dim(self):
        f = build_frame(5)
        assert f.dim == 4
        np.testing.assert_array_equal(f.vector(2), f.W[:, 2])

    def test_check_rejects_bad_frame(self):
        with pytest.raises(ValueError):
            Frame(3, np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])).check()

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            Frame(4, np.zeros((2, 4)))


class TestGram:
    def test_n3(self):
        G = gram(build_frame(3))
        np.testing.assert_allclose(np.diag(G), 1.0, atol=1e-12)
        np.testing.assert_allclose(G[0, 1], -0.5, atol=1e-12)

    def test_n4_offdiagonal(self):
        assert gram(build_frame(4))[1, 3] == pytest.approx(-1 / 3, abs=1e-12)

    @pytest.mark.parametrize("n", range(3, 13))
    def test_formula_and_nullspace(self, n):
        G = gram(build_frame(n))
        np.testing.assert_allclose(G, n / (n - 1) * (np.eye(n) - np.ones((n, n)) / n), atol=1e-12)
        np.testing.assert_allclose(G @ np.ones(n), 0.0, atol=1e-12)
        ev, V = np.linalg.eigh(G)
        assert ev[0] == pytest.approx(0.0, abs=1e-12)
        assert np.all(ev[1:] > 1e-6)
        assert abs(abs(V[:, 0] @ np.ones(n)) / math.sqrt(n) - 1.0) < 1e-12
