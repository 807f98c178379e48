"""LMS adaptive filtering: the core engine plus its two receiver wrappers.

The engine uses the standard complex LMS convention

    y(n) = w^H x(n)
    e(n) = d(n) - y(n)
    w(n+1) = w(n) + mu x(n) e*(n)

which is equivalent to a steepest-descent step with the rank-one
instantaneous covariance estimates R(n) = x x^H and r(n) = d* x
(``instantaneous_covariance`` exposes those for direct verification).

Two wrappers are built on the engine:

* ``equalize_pre_fft`` -- a time-domain transversal equalizer running ahead
  of the receiver FFT, trained on known transmitted samples, then either
  frozen or switched to decision-directed updates.
* ``PilotLmsEstimator`` -- a bank of one-tap LMS trackers on the comb-pilot
  bins, linearly interpolated across the data bins.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DivergenceError

__all__ = [
    "LmsState",
    "LmsTrace",
    "lms_step",
    "instantaneous_covariance",
    "equalize_pre_fft",
    "PilotLmsEstimator",
    "sweep_step_size",
    "DEFAULT_STEP_SWEEP",
]

_DIVERGENCE_LIMIT = 1e6

DEFAULT_STEP_SWEEP = (1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1)


@dataclass
class LmsState:
    weights: np.ndarray
    step_size: float
    update_count: int = 0

    @classmethod
    def zeros(cls, n_taps, step_size):
        if step_size <= 0:
            raise ConfigurationError(f"step size must be > 0, got {step_size}")
        return cls(np.zeros(n_taps, dtype=np.complex128), step_size)


@dataclass
class LmsTrace:
    """Per-step squared error plus the final weights."""

    squared_errors: np.ndarray
    final_weights: np.ndarray

    def windowed_mse(self, window=100):
        n = len(self.squared_errors) // window
        return self.squared_errors[: n * window].reshape(n, window).mean(axis=1)


def lms_step(state, x, d):
    """One LMS update.  Returns (y, e); the state is advanced in place."""
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != state.weights.shape:
        raise ConfigurationError(
            f"regressor length {x.size} != weight length {state.weights.size}"
        )
    y = np.vdot(state.weights, x)
    e = d - y
    state.weights = state.weights + state.step_size * x * np.conj(e)
    state.update_count += 1
    if not np.all(np.abs(state.weights) <= _DIVERGENCE_LIMIT):
        raise DivergenceError(state.update_count, state.step_size)
    return y, e


def instantaneous_covariance(x, d):
    """Rank-one estimates R = x x^H and r = d* x used by the LMS gradient."""
    x = np.asarray(x, dtype=np.complex128)
    return np.outer(x, np.conj(x)), np.conj(d) * x


def equalize_pre_fft(rx, training, n_taps, step_size,
                     mode="train_then_freeze", decision_fn=None):
    """Adaptive transversal equalizer ahead of the FFT.

    The regressor at step n is [rx[n], rx[n-1], ..., rx[n-n_taps+1]] and the
    desired sample is training[n - delay] with delay = n_taps // 2.  After
    the training span the weights are frozen, or (decision-directed mode)
    updates continue with d = decision_fn(y).

    Returns (equalized, trace); equalized[m] estimates the transmitted
    sample m, same length as rx.
    """
    rx = np.asarray(rx, dtype=np.complex128)
    training = np.asarray(training, dtype=np.complex128)
    if len(training) < n_taps:
        raise ConfigurationError("training shorter than the filter")
    if mode not in ("train_then_freeze", "train_then_decision_directed"):
        raise ConfigurationError(f"unknown mode {mode!r}")
    if mode == "train_then_decision_directed" and decision_fn is None:
        raise ConfigurationError("decision-directed mode needs a decision_fn")

    delay = n_taps // 2
    state = LmsState.zeros(n_taps, step_size)
    padded = np.concatenate(
        [np.zeros(n_taps - 1, dtype=np.complex128), rx,
         np.zeros(delay, dtype=np.complex128)]
    )
    out = np.zeros(len(rx), dtype=np.complex128)
    sq_errors = []
    for n in range(len(rx) + delay):
        m = n - delay
        if m < 0:
            continue
        x = padded[n : n + n_taps][::-1]
        if m < len(training):
            y, e = lms_step(state, x, training[m])
            sq_errors.append(abs(e) ** 2)
        elif mode == "train_then_decision_directed":
            d = decision_fn(np.vdot(state.weights, x))
            y, e = lms_step(state, x, d)
            sq_errors.append(abs(e) ** 2)
        else:
            y = np.vdot(state.weights, x)
        out[m] = y
    trace = LmsTrace(np.array(sq_errors), state.weights.copy())
    return out, trace


class PilotLmsEstimator:
    """Comb-pilot frequency-domain channel tracker.

    One one-tap LMS per pilot bin with regressor x = transmitted pilot and
    desired d = received pilot value, so the fixed point of each tracker is
    the true bin response.  Data-bin estimates are linear interpolation
    between neighboring pilot estimates; edge bins copy the nearest pilot.
    """

    def __init__(self, grid, step_size):
        if step_size <= 0:
            raise ConfigurationError(f"step size must be > 0, got {step_size}")
        self.grid = grid
        self.step_size = step_size
        self.weights = np.zeros(len(grid.pilot_bins), dtype=np.complex128)
        self.update_count = 0

    @property
    def pilot_estimates(self):
        return np.conj(self.weights)

    def update(self, pilot_rx, pilot_tx):
        """One OFDM symbol's worth of updates; returns the active-bin estimate."""
        pilot_rx = np.asarray(pilot_rx, dtype=np.complex128)
        pilot_tx = np.asarray(pilot_tx, dtype=np.complex128)
        if pilot_rx.shape != self.weights.shape:
            raise ConfigurationError(
                f"expected {self.weights.size} pilot values, got {pilot_rx.size}"
            )
        y = np.conj(self.weights) * pilot_tx
        e = pilot_rx - y
        self.weights = self.weights + self.step_size * pilot_tx * np.conj(e)
        self.update_count += 1
        bad = np.nonzero(np.abs(self.weights) > _DIVERGENCE_LIMIT)[0]
        if len(bad):
            raise DivergenceError(
                self.update_count, self.step_size,
                detail=f"pilot bin {self.grid.pilot_bins[bad[0]]}",
            )
        return self.interpolate()

    def interpolate(self):
        """Current channel estimate on every active bin.

        Linear interpolation between neighboring pilot estimates on the
        signed-frequency axis (bins above fft_size/2 are negative
        frequencies, so the active band is contiguous around DC); bins
        outside the pilot span copy the nearest pilot.
        """
        half = self.grid.fft_size // 2

        def signed(bins):
            return np.where(bins > half, bins - self.grid.fft_size, bins)

        freq_active = signed(self.grid.active_bins)
        freq_pilot = signed(self.grid.pilot_bins)
        order = np.argsort(freq_pilot)
        est = self.pilot_estimates[order]
        freq_pilot = freq_pilot[order]
        out_order = np.argsort(freq_active)
        re = np.interp(freq_active[out_order], freq_pilot, est.real)
        im = np.interp(freq_active[out_order], freq_pilot, est.imag)
        result = np.empty(self.grid.n_active, dtype=np.complex128)
        result[out_order] = re + 1j * im
        return result


def sweep_step_size(run_fn, candidates=DEFAULT_STEP_SWEEP):
    """Pick the step size with the lowest final training MSE.

    run_fn(mu) must return a final-MSE figure; divergent candidates may
    raise DivergenceError and are skipped.
    """
    best_mu, best_mse = None, np.inf
    for mu in candidates:
        try:
            mse = run_fn(mu)
        except DivergenceError:
            continue
        if np.isfinite(mse) and mse < best_mse:
            best_mu, best_mse = mu, mse
    if best_mu is None:
        raise DivergenceError(0, 0.0, detail="every candidate step size diverged")
    return best_mu, best_mse
