import numpy as np
import pytest

from ofdmlink.channel import DEFAULT_TAPS, static_multipath
from ofdmlink.equalizer import (LmsState, PilotLmsEstimator, equalize_pre_fft,
                                instantaneous_covariance, lms_step,
                                sweep_step_size)
from ofdmlink.errors import DivergenceError
from ofdmlink.modem import constellation, map_bits
from ofdmlink.numerics import fft
from ofdmlink.ofdm import assemble, default_grid

GRID = default_grid()


def lms_transcription(w, x, d, mu):
    """Independent restatement of the update equations."""
    y = np.sum(np.conj(w) * x)
    e = d - y
    w_next = w + mu * x * np.conj(e)
    return y, e, w_next


def test_scalar_hand_example():
    state = LmsState.zeros(1, 0.5)
    y, e = lms_step(state, [1.0], 1.0)
    assert y == 0 and e == 1.0
    assert state.weights[0] == pytest.approx(0.5)
    y, e = lms_step(state, [1.0], 1.0)
    assert y == pytest.approx(0.5)
    assert e == pytest.approx(0.5)
    assert state.weights[0] == pytest.approx(0.75)


def test_scalar_channel_fixed_point():
    h = 2.0 + 0j
    state = LmsState.zeros(1, 0.1)
    rng = np.random.default_rng(0)
    for _ in range(500):
        d = np.exp(2j * np.pi * rng.random())
        lms_step(state, [h * d], d)
    assert abs(np.conj(state.weights[0]) * h - 1.0) < 1e-3


def test_micro_correctness_10k_random():
    rng = np.random.default_rng(1)
    for _ in range(10_000):
        n = rng.integers(1, 6)
        w = rng.normal(size=n) + 1j * rng.normal(size=n)
        x = rng.normal(size=n) + 1j * rng.normal(size=n)
        d = complex(rng.normal(), rng.normal())
        mu = rng.uniform(0.001, 0.5)
        state = LmsState(w.copy(), mu)
        y, e = lms_step(state, x, d)
        y_ref, e_ref, w_ref = lms_transcription(w, x, d, mu)
        assert abs(y - y_ref) < 1e-12
        assert abs(e - e_ref) < 1e-12
        assert np.max(np.abs(state.weights - w_ref)) < 1e-12


def test_zero_error_leaves_weights_unchanged():
    rng = np.random.default_rng(2)
    w = rng.normal(size=4) + 1j * rng.normal(size=4)
    x = rng.normal(size=4) + 1j * rng.normal(size=4)
    d = np.sum(np.conj(w) * x)  # d = w^H x, so e = 0
    state = LmsState(w.copy(), 0.3)
    _, e = lms_step(state, x, d)
    assert abs(e) < 1e-15
    assert np.array_equal(state.weights, w)


def test_covariance_hand_example():
    R, r = instantaneous_covariance([1.0, 0.0], 1.0)
    assert np.array_equal(R, [[1, 0], [0, 0]])
    assert np.array_equal(r, [1, 0])


def test_covariance_hermitian_rank_one():
    rng = np.random.default_rng(3)
    x = rng.normal(size=5) + 1j * rng.normal(size=5)
    R, _ = instantaneous_covariance(x, 0.7 - 0.2j)
    assert np.allclose(R, R.conj().T)
    assert np.linalg.matrix_rank(R) <= 1


def test_update_equals_steepest_descent_step():
    rng = np.random.default_rng(4)
    for _ in range(100):
        w = rng.normal(size=3) + 1j * rng.normal(size=3)
        x = rng.normal(size=3) + 1j * rng.normal(size=3)
        d = complex(rng.normal(), rng.normal())
        mu = 0.05
        R, r = instantaneous_covariance(x, d)
        expected = w + mu * (r - R @ w)
        state = LmsState(w.copy(), mu)
        lms_step(state, x, d)
        assert np.max(np.abs(state.weights - expected)) < 1e-12


def test_scalar_stability_boundary():
    # constant-power regressor: converges below 2/P, diverges above
    power = 4.0
    x_mag = np.sqrt(power)
    bound = 2.0 / power

    def run(mu, steps=2000):
        state = LmsState.zeros(1, mu)
        rng = np.random.default_rng(5)
        for _ in range(steps):
            phase = np.exp(2j * np.pi * rng.random())
            lms_step(state, [x_mag * phase], 0.5 * x_mag * phase)
        return state.weights[0]

    w = run(0.5 * bound)
    assert abs(np.conj(w) - 0.5) < 1e-6
    with pytest.raises(DivergenceError):
        run(4.0 * bound)


def test_windowed_mse_non_increasing_on_identification():
    # noiseless plant identification: error decays to zero monotonically
    rng = np.random.default_rng(6)
    plant = rng.normal(size=4) + 1j * rng.normal(size=4)
    state = LmsState.zeros(4, 0.05)
    sq = []
    for _ in range(2000):
        x = rng.normal(size=4) + 1j * rng.normal(size=4)
        d = np.sum(np.conj(plant) * x)
        _, e = lms_step(state, x, d)
        sq.append(abs(e) ** 2)
    win = np.array(sq).reshape(-1, 100).mean(axis=1)
    assert np.all(np.diff(win[1:]) <= 1e-12)


def test_pre_fft_identity_channel():
    rng = np.random.default_rng(7)
    tx = (rng.normal(size=2000) + 1j * rng.normal(size=2000)) / np.sqrt(2)
    out, trace = equalize_pre_fft(tx, tx, 1, 0.1)
    assert abs(trace.final_weights[0] - 1.0) < 1e-3
    assert np.mean(np.abs(out[500:] - tx[500:]) ** 2) < 1e-3


def test_pre_fft_scalar_gain_channel():
    rng = np.random.default_rng(8)
    tx = (rng.normal(size=3000) + 1j * rng.normal(size=3000)) / np.sqrt(2)
    out, trace = equalize_pre_fft(0.5 * tx, tx, 1, 0.2)
    assert abs(trace.final_weights[0] - 2.0) < 1e-2
    assert np.mean(np.abs(out[1000:] - tx[1000:]) ** 2) < 1e-2


def _training_signal(n_frames, seed):
    spec = constellation("qpsk")
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, n_frames * 200 * 2).astype(np.uint8)
    syms = map_bits(bits, spec).reshape(n_frames, 200)
    return assemble(syms[:, :175], syms[:, 175:], GRID).ravel()


def test_pre_fft_table_channel_convergence():
    # 2 training frames; step size picked by the sweep
    tx = _training_signal(2, seed=3)
    taps = DEFAULT_TAPS / np.linalg.norm(DEFAULT_TAPS)
    rx = static_multipath(tx, taps)

    def final_mse(mu):
        _, trace = equalize_pre_fft(rx, tx, 11, mu)
        return float(trace.squared_errors[-100:].mean())

    mu, final = sweep_step_size(final_mse)
    assert final < 0.01
    initial = np.mean(np.abs(tx[:100]) ** 2)  # MSE with the initial zero weights
    assert final < 0.01 * initial


def test_pilot_estimator_flat_channel():
    est = PilotLmsEstimator(GRID, 0.5)
    pilot_tx = np.ones(25, complex)
    for _ in range(20):
        h = est.update(2.0 * pilot_tx, pilot_tx)
    assert np.max(np.abs(h - 2.0)) < 1e-3


def test_pilot_estimator_one_step_mu_one():
    est = PilotLmsEstimator(GRID, 1.0)
    rng = np.random.default_rng(9)
    pilot_rx = rng.normal(size=25) + 1j * rng.normal(size=25)
    pilot_tx = np.ones(25, complex)
    est.update(pilot_rx, pilot_tx)
    assert np.max(np.abs(est.pilot_estimates - pilot_rx / pilot_tx)) < 1e-12


def test_pilot_estimator_static_table_channel():
    taps = DEFAULT_TAPS / np.linalg.norm(DEFAULT_TAPS)
    padded = np.zeros(256, complex)
    padded[:4] = taps
    h_true = fft(padded)
    est = PilotLmsEstimator(GRID, 0.5)
    pilot_tx = np.ones(25, complex)
    for _ in range(40):
        h_active = est.update(h_true[GRID.pilot_bins] * pilot_tx, pilot_tx)
    # fixed point exact at the pilot bins
    assert np.max(np.abs(est.pilot_estimates - h_true[GRID.pilot_bins])) < 1e-3
    # interpolation bias small on pilot-covered data bins; the few edge bins
    # extended by the nearest pilot value carry a larger, bounded error
    h_data = h_active[GRID.data_positions]
    rel = np.abs(h_data - h_true[GRID.data_bins]) / np.abs(h_true[GRID.data_bins])
    shifted = np.where(GRID.data_bins > 128, GRID.data_bins - 256, GRID.data_bins)
    pilot_shifted = np.where(GRID.pilot_bins > 128, GRID.pilot_bins - 256,
                             GRID.pilot_bins)
    covered = (shifted >= pilot_shifted.min()) & (shifted <= pilot_shifted.max())
    assert np.max(rel[covered]) < 0.05
    assert np.max(rel) < 0.25


def test_divergence_reports_step_index():
    state = LmsState.zeros(1, 10.0)
    with pytest.raises(DivergenceError) as exc:
        for i in range(1000):
            lms_step(state, [2.0], 1.0)
    assert exc.value.step > 0
