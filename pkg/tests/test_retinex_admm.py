# tests/test_retinex_admm.py
import numpy as np
import pytest

from src.data_processing import MissingWeightsError, WeightArchive
from src.pipeline.verification import subproblem_gradient
from src.retinex_admm import (
    AdmmState,
    ConvergenceMonitor,
    NonFiniteStateError,
    PriorEvaluationError,
    SolverConfig,
    compose_output,
    init_decomposition_entries,
    initialize_decomposition,
    run_unfolding,
    update_L,
    update_multipliers,
    update_P,
    update_Q,
    update_R,
)
from src.tensor_core import DimensionError, ImageTensor


def full(value, shape=(2, 2, 3)):
    return ImageTensor(np.full(shape, value, dtype=np.float32))


def state_with(mu=1.0, shape=(2, 2, 3), **values):
    tensors = {name: full(values.get(name, 0.0), shape) for name in ("R", "L", "P", "Q", "Y1", "Y2")}
    return AdmmState(mu=mu, **tensors)


def random_state(rng, shape=(8, 8, 3)):
    def img():
        return ImageTensor(rng.random(shape, dtype=np.float32))

    def signed():
        return ImageTensor(rng.uniform(-0.5, 0.5, shape).astype(np.float32))

    return AdmmState(R=img(), L=img(), P=img(), Q=img(), Y1=signed(), Y2=signed(), mu=float(rng.uniform(0.1, 10)))


def zero_prior(x, context=None):
    return ImageTensor.zeros(*x.shape)


# =============================================================================
# Configuration and state
# =============================================================================

class TestSolverConfig:
    def test_defaults(self):
        config = SolverConfig()
        assert (config.lam, config.gamma, config.mu0, config.rho, config.iterations) == (0.1, 0.05, 1.0, 1.0, 3)
        assert config.exposure_gamma == 1.0 and config.epsilon == 1e-6

    @pytest.mark.parametrize("bad", [
        {"lam": 0.0}, {"gamma": -1.0}, {"mu0": 0.0}, {"rho": 0.5}, {"iterations": 0}, {"exposure_gamma": 0.0},
    ])
    def test_invalid(self, bad):
        with pytest.raises(ValueError):
            SolverConfig(**bad)

    def test_prior_options(self):
        config = SolverConfig(box_radius=2, tv_steps=4, tv_weight=0.05)
        assert config.prior_options("box_residual") == {"radius": 2}
        assert config.prior_options("tv_residual") == {"steps": 4, "weight": 0.05}
        assert config.prior_options("zero") == {}


class TestAdmmState:
    def test_initial_state(self, random_image):
        R0, L0 = random_image(), random_image()
        state = AdmmState.initial(R0, L0, 2.0)
        assert state.P is R0 and state.Q is L0
        assert np.all(state.Y1.data == 0.0) and state.mu == 2.0 and state.k == 0

    def test_shape_mismatch(self, random_image):
        with pytest.raises(DimensionError):
            AdmmState.initial(random_image(4, 4), random_image(4, 5), 1.0)

    def test_mu_positive(self, random_image):
        with pytest.raises(ValueError):
            AdmmState.initial(random_image(), random_image(), 0.0)


# =============================================================================
# Decomposition
# =============================================================================

class TestDecomposition:
    def test_classical_gray(self):
        R0, L0 = initialize_decomposition(full(0.4, (3, 3, 3)))
        np.testing.assert_allclose(L0.data, 0.4)
        np.testing.assert_allclose(R0.data, 1.0, atol=1e-5)

    def test_classical_pixel(self):
        I = ImageTensor(np.array([[[0.2, 0.6, 0.4]]], dtype=np.float32))
        R0, L0 = initialize_decomposition(I)
        np.testing.assert_allclose(L0.data[0, 0], [0.6, 0.6, 0.6])
        np.testing.assert_allclose(R0.data[0, 0], [1 / 3, 1.0, 2 / 3], atol=1e-5)

    def test_black_pixel_stays_finite(self):
        R0, L0 = initialize_decomposition(ImageTensor.zeros(2, 2, 3))
        assert R0.is_finite() and np.all(R0.data == 0.0)

    def test_learned_zero_weights(self, random_image):
        R0, L0 = initialize_decomposition(random_image(), WeightArchive(init_decomposition_entries()))
        assert np.all(R0.data == 0.5) and np.all(L0.data == 0.5)

    def test_learned_missing_weights_listed(self, random_image):
        entries = init_decomposition_entries()
        del entries["decom/conv2.w"], entries["decom/conv3.b"]
        with pytest.raises(MissingWeightsError) as info:
            initialize_decomposition(random_image(), WeightArchive(entries))
        assert info.value.missing == ["decom/conv2.w", "decom/conv3.b"]

    def test_learned_outputs_in_unit_range(self, rng, random_image):
        R0, L0 = initialize_decomposition(random_image(), WeightArchive(init_decomposition_entries(rng, std=0.5)))
        for t in (R0, L0):
            assert t.shape == (8, 8, 3) and t.data.min() >= 0.0 and t.data.max() <= 1.0

    def test_requires_rgb(self, random_image):
        with pytest.raises(DimensionError):
            initialize_decomposition(random_image(4, 4, 1))

    def test_nan_pixel_counted_by_monitor(self):
        data = np.full((2, 2, 3), 0.5, dtype=np.float32)
        data[0, 0, 0] = np.nan
        monitor = ConvergenceMonitor()
        R0, L0 = initialize_decomposition(ImageTensor(data), monitor=monitor)
        assert R0.is_finite() and L0.is_finite()
        assert dict(monitor.nan_events) == {"R0": 3, "L0": 3}


# =============================================================================
# Subproblems
# =============================================================================

class TestUpdateR:
    def test_scalar_case(self):
        state = state_with(L=1.0, P=0.5, mu=1.0)
        np.testing.assert_allclose(update_R(state, full(0.5)).data, 0.5, rtol=1e-5)

    def test_large_penalty_pins_to_P(self):
        state = state_with(L=0.3, P=0.7, mu=1e6)
        np.testing.assert_allclose(update_R(state, full(0.9)).data, 0.7, atol=1e-3)

    def test_stationarity(self, rng):
        for _ in range(20):
            state = random_state(rng)
            I = ImageTensor.random(rng, 8, 8)
            R = update_R(state, I)
            grad = subproblem_gradient(R.data, I.data, state.L.data, state.P.data, state.Y1.data, state.mu)
            assert np.abs(grad).max() < 1e-3

    def test_pixel_local(self, rng):
        state = random_state(rng)
        I = ImageTensor.random(rng, 8, 8)
        perm = rng.permutation(64)

        def shuffle(t):
            return ImageTensor(t.data.reshape(64, 3)[perm].reshape(8, 8, 3))

        shuffled = AdmmState(**{n: shuffle(getattr(state, n)) for n in ("R", "L", "P", "Q", "Y1", "Y2")}, mu=state.mu)
        np.testing.assert_array_equal(update_R(shuffled, shuffle(I)).data, shuffle(update_R(state, I)).data)

    def test_doubling_mu_matches_closed_form(self, rng):
        state = random_state(rng)
        I = ImageTensor.random(rng, 8, 8)
        doubled = state.update(mu=2 * state.mu)
        expected = (2 * I.data * state.L.data + doubled.mu * state.P.data - state.Y1.data) / (
            2 * state.L.data ** 2 + doubled.mu + 1e-6)
        np.testing.assert_allclose(update_R(doubled, I).data, expected, rtol=1e-5)

    def test_guard_adds_epsilon_to_denominator(self):
        state = state_with(L=0.0, P=0.0, Y1=-1e-6, mu=1e-6)
        np.testing.assert_allclose(update_R(state, full(0.5)).data, 0.5, rtol=1e-3)
        np.testing.assert_allclose(update_R(state, full(0.5), epsilon=3e-6).data, 0.25, rtol=1e-3)


class TestUpdateL:
    def test_scalar_case(self):
        state = state_with(R=0.5, Q=1.0, mu=1.0)
        np.testing.assert_allclose(update_L(state, full(0.5)).data, 1.0, rtol=1e-5)

    def test_zero_reflectance(self):
        state = state_with(R=0.0, Q=0.3, mu=1.0)
        np.testing.assert_allclose(update_L(state, full(0.8)).data, 0.3, rtol=1e-5)

    def test_stationarity(self, rng):
        for _ in range(20):
            state = random_state(rng)
            I = ImageTensor.random(rng, 8, 8)
            L = update_L(state, I)
            grad = subproblem_gradient(L.data, I.data, state.R.data, state.Q.data, state.Y2.data, state.mu)
            assert np.abs(grad).max() < 1e-3


class TestUpdatePQ:
    def test_zero_prior_returns_noisy_input(self, rng):
        state = random_state(rng)
        M = state.R.data + state.Y1.data / np.float32(state.mu)
        assert np.array_equal(update_P(state, zero_prior, 0.1).data, M)

    def test_negative_identity_prior(self):
        state = state_with(R=0.4, Y1=0.2, mu=1.0)
        P = update_P(state, lambda x, context=None: ImageTensor(-x.data), lam=1.0)
        assert np.all(P.data == 0.0)

    def test_unit_prior(self):
        state = state_with(R=0.5, mu=1.0)
        P = update_P(state, lambda x, context=None: full(1.0), lam=0.1)
        np.testing.assert_allclose(P.data, 0.6, rtol=1e-5)

    def test_P_prior_receives_illumination(self):
        state = state_with(L=0.25)
        seen = []
        update_P(state, lambda x, context=None: seen.append(context) or ImageTensor.zeros(*x.shape), lam=0.1)
        assert seen[0] is state.L

    def test_Q_zero_prior(self, rng):
        state = random_state(rng)
        N = state.L.data + state.Y2.data / np.float32(state.mu)
        assert np.array_equal(update_Q(state, zero_prior, 0.05).data, N)

    def test_Q_negative_prior(self):
        state = state_with(L=0.8, mu=0.5)
        Q = update_Q(state, lambda x, context=None: full(-1.0), gamma=0.05)
        np.testing.assert_allclose(Q.data, 0.7, rtol=1e-5)

    def test_prior_failure_has_context(self):
        def broken(x, context=None):
            raise RuntimeError("boom")

        with pytest.raises(PriorEvaluationError, match="Q-subproblem"):
            update_Q(state_with(), broken, 0.05)
        with pytest.raises(PriorEvaluationError, match="P-subproblem"):
            update_P(state_with(), broken, 0.1)


class TestMultipliers:
    def test_zero_residual_keeps_multipliers(self, rng):
        state = random_state(rng)
        state = state.update(P=state.R, Q=state.L)
        Y1, Y2, _ = update_multipliers(state)
        assert np.array_equal(Y1.data, state.Y1.data) and np.array_equal(Y2.data, state.Y2.data)

    def test_dual_ascent_step(self):
        state = state_with(R=0.3, P=0.2, mu=2.0)
        Y1, _, _ = update_multipliers(state)
        np.testing.assert_allclose(Y1.data, 0.2, rtol=1e-5)

    def test_mu_schedule(self):
        _, _, mu = update_multipliers(state_with(mu=0.4), rho=1.5)
        assert mu == pytest.approx(0.6)


# =============================================================================
# Unfolding
# =============================================================================

class TestRunUnfolding:
    def test_identity_round_trip(self, rng):
        config = SolverConfig(mu0=1e4, iterations=1)
        for _ in range(3):
            I = ImageTensor.random(rng, 64, 64)
            out = run_unfolding(I, config).output
            assert (out - I).frobenius_norm() / I.frobenius_norm() < 1e-2

    def test_history_length_and_columns(self, random_image):
        result = run_unfolding(random_image(), SolverConfig(iterations=4))
        assert len(result.history) == 4
        assert [row["iteration"] for row in result.history] == [1, 2, 3, 4]
        assert set(result.history[0]) == {"iteration", "r_minus_p", "l_minus_q", "recon_error", "mu"}

    @pytest.mark.parametrize("mu0", [0.1, 1.0, 10.0])
    def test_residuals_non_increasing(self, rng, mu0):
        for _ in range(2):
            history = run_unfolding(ImageTensor.random(rng, 16, 16), SolverConfig(mu0=mu0, iterations=10)).history
            for key in ("r_minus_p", "l_minus_q"):
                values = [row[key] for row in history]
                assert all(b <= a + 1e-7 for a, b in zip(values, values[1:]))

    def test_mu_grows_with_rho(self, random_image):
        history = run_unfolding(random_image(), SolverConfig(rho=1.5, iterations=3)).history
        np.testing.assert_allclose([row["mu"] for row in history], [1.0, 1.5, 2.25])

    def test_exposure_gamma_one_is_plain_product(self, random_image):
        result = run_unfolding(random_image(), SolverConfig())
        expected = np.clip(result.P.data * result.Q.data, 0.0, 1.0)
        np.testing.assert_array_equal(result.output.data, expected)

    def test_exposure_gamma_brightens(self, random_image):
        P, Q = full(0.8, (4, 4, 3)), full(0.25, (4, 4, 3))
        np.testing.assert_allclose(compose_output(P, Q, exposure_gamma=2.0).data, 0.4, rtol=1e-5)

    def test_deterministic(self, random_image):
        I = random_image(16, 16)
        config = SolverConfig(prior_r="box_residual", prior_l="tv_residual")
        assert np.array_equal(run_unfolding(I, config).output.data, run_unfolding(I, config).output.data)

    def test_learned_priors(self, init_archive, random_image):
        config = SolverConfig(prior_r="ifbmamba_unet", prior_l="mamba_block", iterations=1)
        result = run_unfolding(random_image(8, 8), config, init_archive)
        assert result.output.shape == (8, 8, 3) and result.output.is_finite()

    def test_explicit_prior_override(self, random_image):
        calls = []

        def counting(x, context=None):
            calls.append(x.shape)
            return ImageTensor.zeros(*x.shape)

        run_unfolding(random_image(), SolverConfig(iterations=2), prior_r=counting, prior_l=counting)
        assert len(calls) == 4

    def test_nan_aborts_with_context(self, random_image):
        def poisoned(x, context=None):
            return ImageTensor(np.full(x.shape, np.nan, dtype=np.float32))

        with pytest.raises(NonFiniteStateError) as info:
            run_unfolding(random_image(), SolverConfig(iterations=2), prior_r=poisoned)
        assert info.value.iteration == 1 and info.value.tensor_name == "P"

    def test_monitor_counts_nan(self):
        monitor = ConvergenceMonitor()
        monitor.record_nan(3, "output")
        monitor.record_nan(2, "R0")
        assert monitor.nan_count == 5

    def test_rejects_grayscale(self, random_image):
        with pytest.raises(DimensionError):
            run_unfolding(random_image(4, 4, 1))
