import numpy as np
import pytest

from lusvar import simulation, structural, var
from lusvar.errors import ColumnSelectionError, SingularMinorError
from lusvar.structural import (
    ColumnSelection,
    delta_covariances,
    estimate_structure,
    identify,
    jacobians,
    select_columns,
)

from conftest import make_feasible_instance


class TestColumnSelection:
    def test_basic(self):
        sel = ColumnSelection((3, 1, 2))
        assert sel.k == 3
        assert np.array_equal(sel.zero_based(), [2, 0, 1])

    def test_duplicates_rejected(self):
        with pytest.raises(ColumnSelectionError):
            ColumnSelection((2, 2, 3))

    def test_out_of_range(self):
        with pytest.raises(ColumnSelectionError):
            ColumnSelection((0, 1))
        with pytest.raises(ColumnSelectionError):
            ColumnSelection((1, 2)).validate_for(2, 1)

    def test_wrong_length(self):
        with pytest.raises(ColumnSelectionError):
            ColumnSelection((1, 2, 3)).validate_for(2, 5)

    def test_select_columns_orders_by_tuple(self):
        b = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
        out = select_columns(b, (3, 1))
        assert np.array_equal(out, [[3.0, 1.0], [6.0, 4.0]])


class TestIdentify:
    def test_upper_triangular_block_gives_identity_q(self):
        b = np.array([[0.1, 0.5, 0.2], [0.3, 0.0, 0.4]])
        sf = identify(b, (2, 3))
        assert np.array_equal(sf.q_hat, np.eye(2))
        assert np.allclose(sf.a0_hat, 0.0)
        assert np.array_equal(sf.a_hat, b)

    def test_two_by_two_hand_values(self):
        c = np.array([[0.3, 0.2], [0.15, 0.35]])
        b = np.column_stack([np.zeros(2), c])
        sf = identify(b, (2, 3))
        assert sf.q_hat[1, 0] == pytest.approx(0.5, abs=1e-14)
        assert sf.a0_hat[1, 0] == pytest.approx(0.5, abs=1e-14)
        assert np.allclose(sf.u_hat, [[0.3, 0.2], [0.0, 0.25]], atol=1e-14)

    def test_exact_recovery(self, rng):
        for _ in range(20):
            k = int(rng.integers(2, 6))
            p = int(rng.integers(1, 4))
            a0, a, sel, b = make_feasible_instance(rng, k, p)
            sf = identify(b, sel)
            assert np.allclose(sf.a0_hat, a0, atol=1e-10)
            assert np.allclose(sf.a_hat, a, atol=1e-10)
            # reconstruction: Q g(A) = g(B)
            assert np.allclose(
                sf.q_hat @ select_columns(sf.a_hat, sel),
                select_columns(b, sel),
                atol=1e-12,
            )

    def test_singular_tuple_raises(self):
        b = np.array([[0.1, 0.0, 1.0], [0.2, 1.0, 1.0]])
        with pytest.raises(SingularMinorError):
            identify(b, (2, 3))

    def test_tuple_order_changes_answer(self):
        b = np.array([[0.0, 0.4, 0.2], [0.0, 0.3, 0.5]])
        sf_a = identify(b, (2, 3))
        sf_b = identify(b, (3, 2))
        assert not np.allclose(sf_a.q_hat, sf_b.q_hat)


class TestJacobians:
    def test_hand_values(self):
        c = np.array([[0.3, 0.2], [0.15, 0.35]])
        b = np.column_stack([np.array([0.1, -0.2]), c])
        j1, j2, j3 = jacobians(b, (2, 3))
        # row for q_21 (vec index 1), columns indexed by vec(B)
        assert j1[1, 2] == pytest.approx(-5.0 / 3.0, abs=1e-12)
        assert j1[1, 3] == pytest.approx(10.0 / 3.0, abs=1e-12)
        # intercept column of B never enters the selected block
        assert np.allclose(j1[:, :2], 0.0)
        assert np.allclose(j2[:, :2], 0.0)

    def test_fixed_coordinates_have_zero_rows(self, rng):
        a0, a, sel, b = make_feasible_instance(rng, 3, 2)
        j1, j2, j3 = jacobians(b, sel)
        k = 3
        for j in range(k):
            for i in range(j + 1):
                # diagonal and upper part of Q and A0 are constant
                assert np.allclose(j1[j * k + i], 0.0)
                assert np.allclose(j2[j * k + i], 0.0)

    def test_analytic_matches_finite_differences(self, rng):
        for _ in range(8):
            k = int(rng.integers(2, 5))
            p = int(rng.integers(1, 3))
            _, _, sel, b = make_feasible_instance(rng, k, p)
            analytic = jacobians(b, sel, method="analytic")
            fd = jacobians(b, sel, method="fd")
            for ja, jf in zip(analytic, fd):
                scale = max(1.0, np.abs(ja).max())
                assert np.abs(ja - jf).max() < 1e-6 * scale

    def test_j3_identity_block_when_q_is_identity(self, rng):
        # with an upper triangular selected block at directions outside the
        # selection, A = B so dA/dB is the identity on those coordinates
        b = np.array([[0.1, 0.5, 0.2, 0.3], [0.3, 0.0, 0.4, -0.2]])
        _, _, j3 = jacobians(b, (2, 3))
        assert np.allclose(j3[:, 0], np.eye(8)[:, 0])
        assert np.allclose(j3[:, 6], np.eye(8)[:, 6])

    def test_unknown_method(self, rng):
        _, _, sel, b = make_feasible_instance(rng, 2, 1)
        with pytest.raises(ValueError):
            jacobians(b, sel, method="autodiff")


class TestDeltaCovariances:
    def test_identity_sigma_b(self, rng):
        _, _, sel, b = make_feasible_instance(rng, 3, 1)
        jacs = jacobians(b, sel)
        kr = b.size
        covs = delta_covariances(jacs, np.eye(kr))
        for j, s in zip(jacs, covs):
            assert np.allclose(s, j @ j.T, atol=1e-12)
            assert np.allclose(s, s.T)
            assert np.linalg.eigvalsh(s).min() > -1e-10

    def test_zero_rows_for_fixed_coordinates(self, rng):
        _, _, sel, b = make_feasible_instance(rng, 3, 2)
        jacs = jacobians(b, sel)
        sigma_b = np.eye(b.size)
        s1, s2, s3 = delta_covariances(jacs, sigma_b)
        k = 3
        fixed = [j * k + i for j in range(k) for i in range(j + 1)]
        assert np.allclose(s1[fixed], 0.0)
        assert np.allclose(s1[:, fixed], 0.0)
        assert np.allclose(s2[fixed], 0.0)


class TestEstimateStructure:
    def test_fills_all_fields(self, rng):
        panel = simulation.generate_svar(simulation.reference_dgp(), 200, seed=7)
        fit = var.ols_fit(var.build_design(panel, 5))
        sf = estimate_structure(fit, simulation.REFERENCE_SELECTION)
        k = 5
        assert sf.q_hat.shape == (k, k)
        for attr in ("j1", "j2", "j3", "sigma1", "sigma2", "sigma3"):
            assert getattr(sf, attr) is not None
        assert sf.sigma1.shape == (k * k, k * k)
        assert sf.sigma3.shape == (fit.b_hat.size, fit.b_hat.size)

    def test_scale_equivariance(self, rng):
        # rescaling series i by c_i maps Q to D Q D^-1 and A0 to D A0 D^-1
        values = rng.normal(size=(80, 3)) @ np.array(
            [[1.0, 0.2, 0.0], [0.0, 1.0, 0.3], [0.1, 0.0, 1.0]]
        )
        d = np.diag([2.0, 0.5, 3.0])
        sel = (2, 3, 4)
        fit = var.ols_fit(var.build_design(var.TimeSeriesPanel(values), 1))
        fit_s = var.ols_fit(var.build_design(var.TimeSeriesPanel(values @ d), 1))
        sf = identify(fit, sel)
        sf_s = identify(fit_s, sel)
        d_inv = np.diag(1.0 / np.diag(d))
        assert np.allclose(sf_s.q_hat, d @ sf.q_hat @ d_inv, atol=1e-9)
        assert np.allclose(sf_s.a0_hat, d @ sf.a0_hat @ d_inv, atol=1e-9)

    def test_covariance_against_monte_carlo(self):
        # empirical variance of sqrt(T) (q21_hat - q21) should match the
        # delta-method variance estimate
        a0 = np.array([[0.0, 0.0], [0.2, 0.0]])
        a = np.array([[0.1, 0.5, 0.2], [-0.1, 0.0, 0.4]])
        a_w = np.array([[0.3], [-0.3]])
        dgp = simulation.SvarDgp(a0=a0, a=a, a_w=a_w)
        sel = (2, 3)
        t_obs = 1000
        reps = 2000
        draws = np.empty(reps)
        sig = np.empty(reps)
        for rep in range(reps):
            panel = simulation.generate_svar(
                dgp, t_obs, burn_in=200, seed=(404, rep)
            )
            fit = var.ols_fit(var.build_design(panel, 1))
            sf = estimate_structure(fit, sel)
            draws[rep] = sf.q_hat[1, 0]
            sig[rep] = sf.sigma1[1, 1]
        empirical = t_obs * draws.var()
        assert empirical == pytest.approx(sig.mean(), rel=0.15)
