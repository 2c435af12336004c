import numpy as np
import pytest

from lusvar import impulse, linalg, structural
from lusvar.errors import NegativeVarianceError
from lusvar.impulse import (
    companion_matrix,
    confidence_bands,
    irf,
    jacobian_irf,
    jacobian_total_effect,
    lag_blocks,
    oirf,
    total_effect_irf,
)

from conftest import make_feasible_instance


class TestRecursion:
    def test_horizon_zero_is_identity(self, rng):
        b = rng.normal(size=(3, 7))
        psi = irf(b, 3, 2, h_max=0)
        assert len(psi) == 1
        assert np.array_equal(psi[0], np.eye(3))

    def test_var_one_powers(self):
        b1 = np.array([[0.3, 0.2], [0.15, 0.35]])
        b = np.column_stack([np.zeros(2), b1])
        psi = irf(b, 2, 1, h_max=2)
        assert np.allclose(psi[1], b1, atol=1e-15)
        assert np.allclose(
            psi[2], [[0.12, 0.13], [0.0975, 0.1525]], atol=1e-12
        )

    def test_intercept_is_ignored(self, rng):
        b = rng.normal(size=(2, 5))
        b_shift = b.copy()
        b_shift[:, 0] += 10.0
        for x, y in zip(irf(b, 2, 2, 6), irf(b_shift, 2, 2, 6)):
            assert np.array_equal(x, y)

    def test_matches_companion_powers(self, rng):
        for _ in range(10):
            k = int(rng.integers(2, 5))
            p = int(rng.integers(1, 4))
            _, _, _, b = make_feasible_instance(rng, k, p)
            lam = companion_matrix(b, k, p)
            power = np.eye(k * p)
            for h, psi_h in enumerate(irf(b, k, p, 20)):
                if h > 0:
                    power = power @ lam
                assert np.allclose(psi_h, power[:k, :k], atol=1e-12)

    def test_stationary_decay(self, rng):
        _, _, _, b = make_feasible_instance(rng, 3, 2)
        psi = irf(b, 3, 2, 60)
        assert np.abs(psi[60]).max() < np.abs(psi[1]).max()
        assert np.abs(psi[60]).max() < 1e-2


class TestCompanion:
    def test_shape_and_blocks(self, rng):
        k, p = 2, 3
        b = rng.normal(size=(k, 1 + k * p))
        lam = companion_matrix(b, k, p)
        assert lam.shape == (k * p, k * p)
        blocks = lag_blocks(b, k, p)
        for s, blk in enumerate(blocks):
            assert np.array_equal(lam[:k, s * k : (s + 1) * k], blk)
        assert np.array_equal(lam[k:, : k * (p - 1)], np.eye(k * (p - 1)))
        assert np.allclose(lam[k:, k * (p - 1) :], 0.0)


class TestOrthogonalized:
    def test_identity_sigma(self, rng):
        _, _, _, b = make_feasible_instance(rng, 2, 1)
        psi = irf(b, 2, 1, 3)
        for x, y in zip(oirf(psi, np.eye(2)), psi):
            assert np.allclose(x, y, atol=1e-14)

    def test_horizon_zero_is_lower_factor(self):
        sigma = np.array([[4.0, 2.0], [2.0, 5.0]])
        out = oirf([np.eye(2)], sigma)
        # unit lower-triangular factor of sigma has l21 = 0.5
        assert np.allclose(out[0], [[1.0, 0.0], [0.5, 1.0]], atol=1e-14)


class TestTotalEffect:
    def test_identity_q(self, rng):
        psi = [rng.normal(size=(3, 3)) for _ in range(3)]
        for x, y in zip(total_effect_irf(psi, np.eye(3)), psi):
            assert np.array_equal(x, y)

    def test_horizon_zero_is_q(self):
        q = np.array([[1.0, 0.0], [0.7, 1.0]])
        out = total_effect_irf([np.eye(2)], q)
        assert np.allclose(out[0], q, atol=1e-15)


class TestIrfJacobian:
    def test_intercept_columns_are_zero(self, rng):
        _, _, _, b = make_feasible_instance(rng, 2, 2)
        j4 = jacobian_irf(b, 2, 2, 3)
        # intercept coordinates are the first k entries of vec(B)
        assert np.allclose(j4[:, :2], 0.0)

    def test_horizon_one_selects_lag_one(self, rng):
        k, p = 2, 1
        _, _, _, b = make_feasible_instance(rng, k, p)
        j4 = jacobian_irf(b, k, p, 1)
        # psi_1 = B_1, so the jacobian picks out the lag-1 coordinates
        expected = np.zeros((k * k, b.size))
        expected[:, k:] = np.eye(k * k)
        assert np.allclose(j4, expected, atol=1e-14)

    def test_horizon_zero_is_zero(self, rng):
        _, _, _, b = make_feasible_instance(rng, 3, 1)
        assert np.allclose(jacobian_irf(b, 3, 1, 0), 0.0)

    def test_analytic_matches_finite_differences(self, rng):
        for _ in range(5):
            k = int(rng.integers(2, 4))
            p = int(rng.integers(1, 3))
            _, _, _, b = make_feasible_instance(rng, k, p)
            for h in (2, 5):
                ja = jacobian_irf(b, k, p, h)
                jf = jacobian_irf(b, k, p, h, method="fd")
                assert np.abs(ja - jf).max() < 1e-6 * max(1.0, np.abs(ja).max())


class TestTotalEffectJacobian:
    def test_horizon_zero_matches_q_jacobian(self, rng):
        _, _, sel, b = make_feasible_instance(rng, 3, 2)
        j5 = jacobian_total_effect(b, sel, 0)
        j1, _, _ = structural.jacobians(b, sel)
        assert np.allclose(j5, j1, atol=1e-12)

    def test_analytic_matches_finite_differences(self, rng):
        for _ in range(5):
            k = int(rng.integers(2, 4))
            p = int(rng.integers(1, 3))
            _, _, sel, b = make_feasible_instance(rng, k, p)
            for h in (1, 4):
                ja = jacobian_total_effect(b, sel, h)
                jf = jacobian_total_effect(b, sel, h, method="fd")
                assert np.abs(ja - jf).max() < 1e-6 * max(1.0, np.abs(ja).max())


class TestConfidenceBands:
    def test_half_width(self):
        point = np.zeros((1, 1))
        lo, hi = confidence_bands(point, np.eye(1), 0.95, 100)
        assert hi[0, 0] == pytest.approx(0.1959964, abs=1e-6)
        assert lo[0, 0] == pytest.approx(-hi[0, 0])

    def test_zero_variance_collapses(self, rng):
        point = rng.normal(size=(2, 2))
        lo, hi = confidence_bands(point, np.zeros((4, 4)), 0.95, 50)
        assert np.array_equal(lo, point)
        assert np.array_equal(hi, point)

    def test_nested_levels(self, rng):
        point = rng.normal(size=(2, 2))
        sigma = np.diag(rng.uniform(0.5, 2.0, 4))
        lo95, hi95 = confidence_bands(point, sigma, 0.95, 80)
        lo99, hi99 = confidence_bands(point, sigma, 0.99, 80)
        assert np.all(lo99 <= lo95)
        assert np.all(hi99 >= hi95)

    def test_roundoff_negatives_clipped(self):
        point = np.zeros((1, 1))
        lo, hi = confidence_bands(point, np.array([[-1e-13]]), 0.95, 10)
        assert hi[0, 0] == 0.0

    def test_negative_variance_raises(self):
        with pytest.raises(NegativeVarianceError):
            confidence_bands(np.zeros((1, 1)), np.array([[-1e-6]]), 0.95, 10)

    def test_bad_level(self):
        with pytest.raises(ValueError):
            confidence_bands(np.zeros((1, 1)), np.eye(1), 1.5, 10)

    def test_variance_layout_matches_vec(self, rng):
        # diagonal of sigma follows the column-major vec of the point matrix
        point = np.zeros((2, 3))
        variances = np.arange(1.0, 7.0)
        sigma = np.diag(variances)
        _, hi = confidence_bands(point, sigma, 0.95, 1)
        assert np.allclose(linalg.vec(hi) ** 2, 1.959964 ** 2 * variances, rtol=1e-6)
