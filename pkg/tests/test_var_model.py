#!/usr/bin/env python3
"""
VAR dynamics: companion form, Lyapunov autocovariances, fitting, PID and NuMIT
"""

import numpy as np
import pytest
from scipy import stats

from core.exceptions import (
    InconsistentInformation,
    NegativeInformation,
    RankDeficientRegressors,
    SampleRejected,
    TargetUnreachable,
    TooShortEpoch,
    UnstableSystem,
    ZeroDynamics,
    ZeroTmi,
)
from core.gaussian import CovMatrix
from core.var_model import (
    Partition,
    TimeSeries,
    VarModel,
    autocov_sequence,
    companion_matrix,
    fit_var,
    numit_normalize_var,
    sample_null_var,
    simulate_var,
    solve_g_var,
    solve_lyapunov,
    spectral_radius,
    var_pid,
    var_tmi,
)


class TestCompanionMatrix:
    def test_single_lag_is_coefficient(self, coupled_var):
        np.testing.assert_array_equal(companion_matrix(coupled_var), coupled_var.coeffs[0])

    def test_two_lag_scalar(self):
        m = VarModel.build([[[0.5]], [[0.2]]], [[1.0]])
        np.testing.assert_array_equal(companion_matrix(m), [[0.5, 0.2], [1.0, 0.0]])

    def test_eigenvalue(self):
        m = VarModel.build([[[0.9]]], [[1.0]])
        assert spectral_radius(companion_matrix(m)) == pytest.approx(0.9)


class TestSpectralRadius:
    def test_nilpotent(self):
        assert spectral_radius([[0.0, 1.0], [0.0, 0.0]]) == 0.0

    def test_diagonal(self):
        assert spectral_radius(np.diag([0.3, -0.8])) == pytest.approx(0.8, abs=1e-12)

    def test_rotation(self):
        theta = 0.7
        rot = 0.7 * np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
        assert spectral_radius(rot) == pytest.approx(0.7, abs=1e-12)


class TestSolveLyapunov:
    """Gamma = A Gamma A^T + W"""

    def test_no_dynamics(self):
        w = np.array([[2.0, 0.3], [0.3, 1.0]])
        np.testing.assert_allclose(solve_lyapunov(np.zeros((2, 2)), w).entries, w, atol=1e-14)

    def test_scalar(self):
        assert solve_lyapunov([[0.5]], [[1.0]]).entries[0, 0] == pytest.approx(4.0 / 3.0, abs=1e-12)

    def test_unit_root_raises(self):
        with pytest.raises(UnstableSystem):
            solve_lyapunov([[1.0]], [[1.0]])

    def test_residual_on_random_models(self, rng, make_stable_var):
        for _ in range(100):
            n, p = int(rng.integers(1, 7)), int(rng.integers(1, 4))
            m = make_stable_var(rng, n, p)
            comp = companion_matrix(m)
            w = np.zeros_like(comp)
            w[:n, :n] = m.resid_cov.entries
            gamma = solve_lyapunov(comp, w).entries
            residual = np.max(np.abs(gamma - comp @ gamma @ comp.T - w))
            assert residual < 1e-10 * np.max(np.abs(gamma))


class TestAutocovSequence:
    def test_scalar_closed_form(self, scalar_var):
        gammas = autocov_sequence(scalar_var, 2)
        np.testing.assert_allclose(np.ravel(gammas), [4 / 3, 2 / 3, 1 / 3], atol=1e-12)

    def test_no_dynamics(self):
        m = VarModel.build([np.zeros((2, 2))], np.eye(2))
        gammas = autocov_sequence(m, 2)
        np.testing.assert_allclose(gammas[0], np.eye(2), atol=1e-14)
        np.testing.assert_allclose(gammas[1], 0.0, atol=1e-14)

    def test_yule_walker_recursion(self, rng, make_stable_var):
        """Gamma_k = sum_l A_l Gamma_{k-l}, Gamma_{-j} = Gamma_j^T, V added at lag 0"""
        for _ in range(30):
            n, p = int(rng.integers(1, 5)), int(rng.integers(1, 4))
            m = make_stable_var(rng, n, p)
            gammas = autocov_sequence(m, p + 3)

            def lagged(k):
                return gammas[k] if k >= 0 else gammas[-k].T

            scale = np.max(np.abs(gammas[0]))
            for k in range(0, p + 4):
                rhs = sum(m.coeffs[lag] @ lagged(k - lag - 1) for lag in range(p))
                if k == 0:
                    rhs = rhs + m.resid_cov.entries
                np.testing.assert_allclose(gammas[k], rhs, atol=1e-9 * max(1.0, scale))

    def test_unstable_raises(self):
        with pytest.raises(UnstableSystem):
            autocov_sequence(VarModel.build([[[1.1]]], [[1.0]]), 1)


class TestSimulateAndFit:
    def test_white_noise_covariance(self, rng):
        v = np.array([[1.0, 0.4], [0.4, 2.0]])
        ts = simulate_var(VarModel.build([np.zeros((2, 2))], v), 50_000, 0, rng)
        np.testing.assert_allclose(np.cov(ts.epochs[0].T), v, atol=0.05)

    def test_replay(self, scalar_var):
        a = simulate_var(scalar_var, 100, 10, np.random.default_rng(3))
        b = simulate_var(scalar_var, 100, 10, np.random.default_rng(3))
        np.testing.assert_array_equal(a.epochs[0], b.epochs[0])

    def test_epochs(self, scalar_var, rng):
        ts = simulate_var(scalar_var, 200, 50, rng, epochs=4)
        assert len(ts.epochs) == 4
        assert ts.epochs[0].shape == (200, 1)

    def test_unstable_raises(self, rng):
        with pytest.raises(UnstableSystem):
            simulate_var(VarModel.build([[[1.0]]], [[1.0]]), 10, 0, rng)

    def test_scalar_fit(self, scalar_var, rng):
        ts = simulate_var(scalar_var, 100_000, 500, rng)
        assert np.var(ts.epochs[0]) == pytest.approx(4.0 / 3.0, rel=0.03)
        fitted = fit_var(ts, 1)
        assert fitted.coeffs[0][0, 0] == pytest.approx(0.5, abs=0.01)

    def test_bivariate_round_trip(self, rng):
        a = np.array([[0.5, 0.2], [-0.3, 0.4]])
        v = np.array([[1.0, 0.3], [0.3, 0.5]])
        ts = simulate_var(VarModel.build([a], v), 100_000, 500, rng)
        fitted = fit_var(ts, 1)
        assert np.max(np.abs(fitted.coeffs[0] - a)) < 0.02
        assert np.max(np.abs(fitted.resid_cov.entries - v) / np.abs(v)) < 0.05

    def test_error_shrinks_with_length(self, rng):
        a = np.array([[0.5, 0.2], [-0.3, 0.4]])
        model = VarModel.build([a], np.eye(2))
        errors = []
        for steps in (10_000, 100_000):
            runs = [np.max(np.abs(fit_var(simulate_var(model, steps, 200, rng), 1).coeffs[0] - a))
                    for _ in range(3)]
            errors.append(np.mean(runs))
        assert errors[1] < errors[0]

    def test_pooled_epochs_do_not_cross_boundaries(self, rng):
        ts = simulate_var(VarModel.build([[[0.6]]], [[1.0]]), 400, 100, rng, epochs=50)
        assert fit_var(ts, 1).coeffs[0][0, 0] == pytest.approx(0.6, abs=0.03)

    def test_constant_series_is_rank_deficient(self):
        with pytest.raises(RankDeficientRegressors):
            fit_var(TimeSeries((np.zeros((50, 2)),)), 1)

    def test_short_epoch(self):
        with pytest.raises(TooShortEpoch):
            fit_var(TimeSeries((np.ones((3, 1)),)), 2)


class TestVarPid:
    """Past of each source group against the joint future"""

    def test_scalar_tmi(self, scalar_var):
        assert var_tmi(scalar_var) == pytest.approx(0.5 * np.log(4.0 / 3.0), abs=1e-12)

    def test_strong_scalar_tmi(self):
        m = VarModel.build([[[0.9]]], [[1.0]])
        assert var_tmi(m) == pytest.approx(0.5 * np.log(1.0 / 0.19), abs=1e-9)

    def test_no_dynamics(self, split_pair):
        atoms = var_pid(VarModel.build([np.zeros((2, 2))], np.eye(2)), split_pair)
        np.testing.assert_allclose(atoms.atoms(), 0.0, atol=1e-12)

    def test_independent_channels(self, diagonal_var, split_pair):
        half = 0.5 * np.log(4.0 / 3.0)
        atoms = var_pid(diagonal_var, split_pair)
        assert atoms.tmi == pytest.approx(2 * half, abs=1e-12)
        assert atoms.red == pytest.approx(half, abs=1e-12)
        assert atoms.un_x == pytest.approx(0.0, abs=1e-12)
        assert atoms.un_y == pytest.approx(0.0, abs=1e-12)
        assert atoms.syn == pytest.approx(half, abs=1e-12)

    def test_cross_coupling_is_synergistic(self, coupled_var, split_pair):
        atoms = var_pid(coupled_var, split_pair)
        assert atoms.syn > 0
        assert atoms.syn == pytest.approx(0.5 * np.log(1 / 0.64), abs=1e-9)

    def test_scale_invariance(self, rng, make_stable_var):
        part = Partition.of([0, 2], 4)
        for _ in range(10):
            m = make_stable_var(rng, 4, 2)
            base = var_pid(m, part)
            for c in (0.1, 10.0):
                scaled = var_pid(m.with_resid_cov(m.resid_cov.scaled(c)), part)
                np.testing.assert_allclose(scaled.atoms(), base.atoms(), atol=1e-9)

    def test_partition_size_must_match(self, diagonal_var):
        with pytest.raises(ValueError):
            var_pid(diagonal_var, Partition.of([0], 3))

    def test_multi_lag_atoms_sum(self, rng, make_stable_var):
        m = make_stable_var(rng, 3, 3)
        atoms = var_pid(m, Partition.of([1], 3))
        assert sum(atoms.atoms()) == pytest.approx(atoms.tmi, abs=1e-9)


class TestPartition:
    def test_of_fills_complement(self):
        part = Partition.of([2, 0], 4)
        assert part.x_vars.indices == (0, 2)
        assert part.y_vars.indices == (1, 3)

    def test_lagged_indices(self):
        x, y = Partition.of([0], 2).lagged(2)
        assert x.indices == (0, 2)
        assert y.indices == (1, 3)

    def test_empty_side_rejected(self):
        with pytest.raises(ValueError):
            Partition.of([0, 1], 2)


class TestVarNullModel:
    """Spectral-radius null family"""

    def test_null_moments(self, rng):
        draws = [sample_null_var(2, rng) for _ in range(10_000)]
        mean_v = np.mean([v.entries for _, v in draws], axis=0)
        var_a = np.var([a for a, _ in draws])
        np.testing.assert_allclose(mean_v, 2.0 * np.eye(2), atol=0.1)
        assert var_a == pytest.approx(1.0, rel=0.05)

    def test_scalar_closed_form(self):
        g = solve_g_var(np.array([[1.0]]), CovMatrix([[1.0]]), 0.5 * np.log(4.0 / 3.0))
        assert g == pytest.approx(0.5, abs=1e-7)

    def test_unreachable_target(self):
        with pytest.raises(TargetUnreachable):
            solve_g_var(np.array([[1.0]]), CovMatrix([[1.0]]), 50.0)

    def test_zero_dynamics(self):
        with pytest.raises(ZeroDynamics):
            solve_g_var(np.zeros((2, 2)), CovMatrix(np.eye(2)), 0.5)

    def test_tmi_increases_with_radius(self, rng):
        a_raw, v = sample_null_var(3, rng)
        direction = a_raw / spectral_radius(a_raw)
        values = [var_tmi(VarModel((g * direction,), v)) for g in np.linspace(0.01, 0.99, 50)]
        assert np.all(np.diff(values) > 0)

    def test_solution_hits_target(self, rng):
        for _ in range(50):
            a_raw, v = sample_null_var(3, rng)
            target = rng.uniform(0.05, 1.0)
            try:
                g = solve_g_var(a_raw, v, target)
            except TargetUnreachable:
                continue
            m = VarModel((g / spectral_radius(a_raw) * a_raw,), v)
            assert 0 < g < 1
            assert abs(var_tmi(m) - target) < 1e-9


class TestNumitNormalizeVar:
    def test_zero_dynamics_raises(self, split_pair):
        with pytest.raises(ZeroTmi):
            numit_normalize_var(VarModel.build([np.zeros((2, 2))], np.eye(2)), split_pair, 10)

    def test_scale_invariance(self, rng, make_stable_var, split_pair):
        m = make_stable_var(rng, 2, 1, radius=0.7)
        base = numit_normalize_var(m, split_pair, 60, seed=5)
        scaled = numit_normalize_var(m.with_resid_cov(m.resid_cov.scaled(10.0)), split_pair, 60, seed=5)
        np.testing.assert_allclose(list(scaled.as_dict().values()), list(base.as_dict().values()), atol=1e-9)

    def test_metadata(self, coupled_var, split_pair):
        q = numit_normalize_var(coupled_var, split_pair, 30, seed=1)
        assert q.ensemble_meta.family == "var"
        assert q.ensemble_meta.target_tmi == pytest.approx(np.log(1 / 0.64), abs=1e-9)

    @pytest.mark.slow
    def test_null_drawn_models_are_calibrated(self, rng, split_pair):
        """A VAR(1) drawn from the null family lands uniformly among fresh nulls"""
        quantiles = []
        for k in range(300):
            a_raw, v = sample_null_var(2, rng)
            try:
                g = solve_g_var(a_raw, v, rng.uniform(0.1, 1.0))
                model = VarModel((g / spectral_radius(a_raw) * a_raw,), v)
                q = numit_normalize_var(model, split_pair, 300, seed=1000 + k)
            except (SampleRejected, InconsistentInformation, NegativeInformation):
                continue
            quantiles.append(q.syn_q)
        assert len(quantiles) > 250
        assert stats.kstest(quantiles, "uniform").statistic < 0.15
