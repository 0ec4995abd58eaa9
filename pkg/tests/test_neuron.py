"""LIF dynamics: current gathering, single steps, whole-window simulation."""

import numpy as np
import pytest

from spikefuse import (
    ConfigurationError,
    LifLayerState,
    LifParams,
    Modality,
    ModalSpikeTrains,
    NumericError,
    SpikeTrain,
    StructuralError,
    SynapseMatrix,
    build_time_grid,
    gather_current,
    lif_step,
    simulate_window,
)

GRID = build_time_grid(100.0, 1.0)


def matrix(modality, values, w_min=0.0, w_max=1.0):
    return SynapseMatrix(modality, np.asarray(values, dtype=np.float64), w_min, w_max)


class TestLifParams:
    def test_validation(self):
        with pytest.raises(ConfigurationError):
            LifParams(-1.0, 1.0)
        with pytest.raises(ConfigurationError):
            LifParams(10.0, 0.0, 0.5)  # v_th below v_reset
        with pytest.raises(ConfigurationError):
            LifParams(10.0, 1.0, 0.0, -1)

    def test_stability_guard(self):
        coarse = build_time_grid(100.0, 2.0)
        with pytest.raises(ConfigurationError, match="tau_m"):
            LifParams(10.0, 1.0).validate_against(coarse)


class TestGatherCurrent:
    W_IM = matrix(Modality.IMAGE, np.full((4, 2), 0.5))
    W_AU = matrix(Modality.AUDIO, np.full((3, 2), 0.25))

    def test_no_input_no_current(self):
        current = gather_current(self.W_IM, np.zeros(4), self.W_AU, np.zeros(3))
        np.testing.assert_array_equal(current, [0.0, 0.0])

    def test_single_spike_single_term(self):
        s_im = np.array([0.0, 1.0, 0.0, 0.0])
        current = gather_current(self.W_IM, s_im, self.W_AU, np.zeros(3))
        np.testing.assert_array_equal(current, [0.5, 0.5])

    def test_explicit_three_spike_sum(self):
        # Two image spikes (weights 0.3, 0.2) plus one audio spike (0.4);
        # the oracle is the explicit sum of the stored weights.
        w_im = matrix(Modality.IMAGE, np.array([[0.3], [0.2]]))
        w_au = matrix(Modality.AUDIO, np.array([[0.4]]))
        current = gather_current(w_im, np.ones(2), w_au, np.ones(1))
        oracle = float(w_im.weights_f64[0, 0] + w_im.weights_f64[1, 0] + w_au.weights_f64[0, 0])
        np.testing.assert_allclose(current, [oracle], rtol=1e-15)
        np.testing.assert_allclose(current, [0.9], rtol=1e-6)  # float32 storage

    def test_superposition(self):
        rng = np.random.default_rng(3)
        w_im = matrix(Modality.IMAGE, rng.random((6, 5)))
        w_au = matrix(Modality.AUDIO, rng.random((4, 5)))
        s_im = rng.integers(0, 2, 6).astype(float)
        s_au = rng.integers(0, 2, 4).astype(float)
        both = gather_current(w_im, s_im, w_au, s_au)
        image_only = gather_current(w_im, s_im, w_au, np.zeros(4))
        audio_only = gather_current(w_im, np.zeros(6), w_au, s_au)
        np.testing.assert_array_equal(both, image_only + audio_only)

    def test_dimension_mismatch_messages(self):
        with pytest.raises(StructuralError, match="image indicator"):
            gather_current(self.W_IM, np.zeros(5), self.W_AU, np.zeros(3))
        with pytest.raises(StructuralError, match="audio indicator"):
            gather_current(self.W_IM, np.zeros(4), self.W_AU, np.zeros(9))
        w_au_bad = matrix(Modality.AUDIO, np.zeros((3, 7)))
        with pytest.raises(StructuralError, match="n_post"):
            gather_current(self.W_IM, np.zeros(4), w_au_bad, np.zeros(3))


class TestLifStep:
    PARAMS = LifParams(tau_m_ms=10.0, v_th=1.0, v_reset=0.0, refractory_steps=2)

    def test_charging_step(self):
        state = LifLayerState(np.array([0.0]), np.array([0]))
        new, spiked = lif_step(state, self.PARAMS, np.array([1.0]), GRID)
        np.testing.assert_allclose(new.v, [0.1], rtol=1e-12)
        assert not spiked[0]

    def test_pure_decay_step(self):
        state = LifLayerState(np.array([1.0]), np.array([0]))
        new, spiked = lif_step(state, self.PARAMS, np.array([0.0]), GRID)
        np.testing.assert_allclose(new.v, [0.9], rtol=1e-12)
        assert not spiked[0]

    def test_threshold_crossing_resets_and_arms_refractory(self):
        state = LifLayerState(np.array([0.95]), np.array([0]))
        new, spiked = lif_step(state, self.PARAMS, np.array([2.0]), GRID)
        assert spiked[0]
        assert new.v[0] == self.PARAMS.v_reset
        assert new.refrac_remaining[0] == 2

    def test_spike_on_exact_equality(self):
        # 0.9*0 + 0.1*10 == 1.0 == v_th exactly: H(0) = 1.
        state = LifLayerState(np.array([0.0]), np.array([0]))
        _, spiked = lif_step(state, self.PARAMS, np.array([10.0]), GRID)
        assert spiked[0]

    def test_refractory_holds_and_counts_down(self):
        state = LifLayerState(np.array([0.0]), np.array([2]))
        new, spiked = lif_step(state, self.PARAMS, np.array([50.0]), GRID)
        assert not spiked[0]
        assert new.v[0] == self.PARAMS.v_reset
        assert new.refrac_remaining[0] == 1

    def test_non_finite_current_fails_fast(self):
        state = LifLayerState(np.array([0.0]), np.array([0]))
        with pytest.raises(NumericError):
            lif_step(state, self.PARAMS, np.array([np.nan]), GRID)
        with pytest.raises(NumericError):
            lif_step(state, self.PARAMS, np.array([np.inf]), GRID)

    def test_free_decay_matches_closed_form_exactly(self):
        params = LifParams(20.0, 5.0)
        v0 = 0.8
        state = LifLayerState(np.array([v0]), np.array([0]))
        alpha = GRID.dt_ms / params.tau_m_ms
        oracle = v0
        factor = 1.0 - alpha
        for k in range(1, 61):
            state, _ = lif_step(state, params, np.array([0.0]), GRID)
            oracle = oracle * factor
            assert state.v[0] == oracle, f"diverged at step {k}"

    def test_free_decay_euler_error_bound(self):
        params = LifParams(20.0, 5.0)
        v0 = 1.5
        alpha = GRID.dt_ms / params.tau_m_ms
        state = LifLayerState(np.array([v0]), np.array([0]))
        for k in range(1, 101):
            state, _ = lif_step(state, params, np.array([0.0]), GRID)
            exact = v0 * np.exp(-k * alpha)
            assert abs(state.v[0] - exact) <= v0 * k * alpha**2


class TestSimulateWindow:
    PARAMS = LifParams(tau_m_ms=10.0, v_th=1.0, v_reset=0.0, refractory_steps=2)

    def _nets(self, w_im_vals, w_au_vals):
        return (
            matrix(Modality.IMAGE, w_im_vals),
            matrix(Modality.AUDIO, w_au_vals),
        )

    def test_no_input_stays_silent(self):
        w_im, w_au = self._nets(np.full((2, 3), 0.5), np.full((2, 3), 0.5))
        record = simulate_window(
            w_im,
            w_au,
            self.PARAMS,
            ModalSpikeTrains.empty(Modality.IMAGE, 2, GRID),
            ModalSpikeTrains.empty(Modality.AUDIO, 2, GRID),
            GRID,
            record_v=True,
        )
        assert record.counts().sum() == 0
        assert np.all(record.v_trace == 0.0)

    def test_matches_independent_scalar_oracle(self):
        """Step-by-step scalar simulation, written with plain Python floats.

        All weights are dyadic rationals so every partial sum is exact and
        summation order cannot matter.
        """
        w_im_vals = np.array([[1.625], [1.25], [0.1875]])
        w_au_vals = np.array([[0.75], [0.5]])
        w_im = matrix(Modality.IMAGE, w_im_vals, w_max=2.0)
        w_au = matrix(Modality.AUDIO, w_au_vals, w_max=2.0)
        im_steps = [list(range(0, 100, 2)), [3, 9, 27], [5, 50, 95]]
        au_steps = [[2, 30], [4]]
        inputs_im = ModalSpikeTrains(
            Modality.IMAGE, tuple(SpikeTrain(s) for s in im_steps), GRID
        )
        inputs_au = ModalSpikeTrains(
            Modality.AUDIO, tuple(SpikeTrain(s) for s in au_steps), GRID
        )
        record = simulate_window(
            w_im, w_au, self.PARAMS, inputs_im, inputs_au, GRID, record_v=True
        )

        alpha = GRID.dt_ms / self.PARAMS.tau_m_ms
        v, refrac, spikes, trace = 0.0, 0, [], []
        weights = [1.625, 1.25, 0.1875, 0.75, 0.5]
        trains = [set(s) for s in im_steps + au_steps]
        for t in range(GRID.n_steps):
            current = 0.0
            for w, steps in zip(weights, trains):
                if t in steps:
                    current += w
            if refrac > 0:
                v = self.PARAMS.v_reset
                refrac -= 1
            else:
                v = (1.0 - alpha) * v + alpha * current
                if v >= self.PARAMS.v_th:
                    spikes.append(t)
                    v = self.PARAMS.v_reset
                    refrac = self.PARAMS.refractory_steps
            trace.append(v)

        assert len(spikes) > 0, "oracle scenario should actually fire"
        np.testing.assert_array_equal(record.trains[0].spikes, spikes)
        np.testing.assert_allclose(record.v_trace[:, 0], trace, rtol=0, atol=1e-12)

    def test_strong_periodic_drive_fires_periodically(self):
        # One pre neuron spiking every step with drive above threshold:
        # the neuron settles into a fixed inter-spike interval governed by
        # tau_m, v_th, and the refractory period.
        w = 1.5
        w_im = matrix(Modality.IMAGE, np.array([[w]]), w_max=2.0)
        w_au = matrix(Modality.AUDIO, np.zeros((1, 1)), w_max=2.0)
        every_step = ModalSpikeTrains(
            Modality.IMAGE, (SpikeTrain(np.arange(GRID.n_steps)),), GRID
        )
        silent = ModalSpikeTrains.empty(Modality.AUDIO, 1, GRID)
        record = simulate_window(w_im, w_au, self.PARAMS, every_step, silent, GRID)
        isis = np.diff(record.trains[0].spikes)
        assert len(record.trains[0]) >= 3
        assert len(set(isis.tolist())) == 1  # strictly periodic
        # Oracle for the ISI: refractory gap, then charge from reset toward
        # steady state V = w until v_th is reached.
        alpha = 0.1
        v, steps = 0.0, self.PARAMS.refractory_steps
        while v < self.PARAMS.v_th:
            v = (1.0 - alpha) * v + alpha * w
            steps += 1
        assert isis[0] == steps

    def test_masked_audio_equals_zeroed_audio_weights(self):
        rng = np.random.default_rng(11)
        w_im, w_au = self._nets(rng.random((5, 4)), rng.random((3, 4)))
        w_au_zero = matrix(Modality.AUDIO, np.zeros((3, 4)))
        inputs_im = ModalSpikeTrains(
            Modality.IMAGE,
            tuple(SpikeTrain(np.sort(rng.choice(100, 12, replace=False))) for _ in range(5)),
            GRID,
        )
        inputs_au_real = ModalSpikeTrains(
            Modality.AUDIO,
            tuple(SpikeTrain(np.sort(rng.choice(100, 4, replace=False))) for _ in range(3)),
            GRID,
        )
        silent_au = ModalSpikeTrains.empty(Modality.AUDIO, 3, GRID)
        masked = simulate_window(
            w_im, w_au, self.PARAMS, inputs_im, silent_au, GRID, record_v=True
        )
        zeroed = simulate_window(
            w_im, w_au_zero, self.PARAMS, inputs_im, inputs_au_real, GRID, record_v=True
        )
        np.testing.assert_array_equal(masked.v_trace, zeroed.v_trace)
        for a, b in zip(masked.trains, zeroed.trains):
            np.testing.assert_array_equal(a.spikes, b.spikes)

    def test_audio_dirac_single_spike_accounting(self):
        # A single audio spike perturbs the trajectory at its step by
        # exactly (dt/tau_m) * w_au relative to the silent simulation.
        w_val = 0.25  # exactly representable
        w_im, w_au = self._nets(np.zeros((1, 1)), np.array([[w_val]]))
        spike_step = 40
        one_spike = ModalSpikeTrains(Modality.AUDIO, (SpikeTrain([spike_step]),), GRID)
        silent_au = ModalSpikeTrains.empty(Modality.AUDIO, 1, GRID)
        silent_im = ModalSpikeTrains.empty(Modality.IMAGE, 1, GRID)
        params = LifParams(10.0, 5.0)
        with_spike = simulate_window(
            w_im, w_au, params, silent_im, one_spike, GRID, record_v=True
        )
        without = simulate_window(
            w_im, w_au, params, silent_im, silent_au, GRID, record_v=True
        )
        delta = with_spike.v_trace[:, 0] - without.v_trace[:, 0]
        expected = (GRID.dt_ms / params.tau_m_ms) * w_val
        assert delta[spike_step] == expected
        assert np.all(delta[:spike_step] == 0.0)

    def test_refractory_neurons_never_fire(self):
        # Randomized hammering: no inter-spike interval may undercut the
        # refractory period.
        grid = build_time_grid(200.0, 1.0)
        params = LifParams(10.0, 0.6, 0.0, 3)
        for trial in range(100):
            rng = np.random.default_rng(trial)
            w_im = matrix(Modality.IMAGE, rng.random((8, 32)))
            w_au = matrix(Modality.AUDIO, rng.random((8, 32)))
            inputs_im = ModalSpikeTrains(
                Modality.IMAGE,
                tuple(
                    SpikeTrain(np.flatnonzero(rng.random(grid.n_steps) < 0.4))
                    for _ in range(8)
                ),
                grid,
            )
            inputs_au = ModalSpikeTrains(
                Modality.AUDIO,
                tuple(
                    SpikeTrain(np.flatnonzero(rng.random(grid.n_steps) < 0.2))
                    for _ in range(8)
                ),
                grid,
            )
            record = simulate_window(w_im, w_au, params, inputs_im, inputs_au, grid)
            assert record.counts().sum() > 0
            for train in record.trains:
                if len(train) > 1:
                    assert np.diff(train.spikes).min() >= params.refractory_steps + 1

    def test_deterministic(self):
        rng = np.random.default_rng(2)
        w_im, w_au = self._nets(rng.random((4, 3)), rng.random((2, 3)))
        inputs_im = ModalSpikeTrains(
            Modality.IMAGE,
            tuple(SpikeTrain(np.sort(rng.choice(100, 20, replace=False))) for _ in range(4)),
            GRID,
        )
        inputs_au = ModalSpikeTrains(
            Modality.AUDIO,
            tuple(SpikeTrain(np.sort(rng.choice(100, 3, replace=False))) for _ in range(2)),
            GRID,
        )
        a = simulate_window(w_im, w_au, self.PARAMS, inputs_im, inputs_au, GRID, record_v=True)
        b = simulate_window(w_im, w_au, self.PARAMS, inputs_im, inputs_au, GRID, record_v=True)
        np.testing.assert_array_equal(a.v_trace, b.v_trace)
        for ta, tb in zip(a.trains, b.trains):
            np.testing.assert_array_equal(ta.spikes, tb.spikes)

    def test_swapped_modalities_rejected(self):
        w_im, w_au = self._nets(np.zeros((2, 3)), np.zeros((2, 3)))
        im_in = ModalSpikeTrains.empty(Modality.IMAGE, 2, GRID)
        au_in = ModalSpikeTrains.empty(Modality.AUDIO, 2, GRID)
        with pytest.raises(StructuralError):
            simulate_window(w_au, w_im, self.PARAMS, au_in, im_in, GRID)
        with pytest.raises(StructuralError):
            simulate_window(w_im, w_au, self.PARAMS, au_in, im_in, GRID)
