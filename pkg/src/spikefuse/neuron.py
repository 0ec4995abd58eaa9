"""Leaky integrate-and-fire layer driven by two synapse matrices.

The membrane update is forward Euler on
``tau_m * dV/dt = -V + I`` with the per-step input current

    I_j = sum_i w_im[i, j] * s_im[i] + sum_i w_au[i, j] * s_au[i]

where the spike indicators are 1 exactly at a presynaptic spike's step,
so a single audio impulse injects its weight once through the same
``dt/tau_m`` scaling as image spikes. A neuron spikes when V reaches
threshold (spike on exact equality), then resets and sits refractory
for a configurable number of steps.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import Modality, ModalSpikeTrains, SpikeTrain, TimeGrid
from .errors import ConfigurationError, NumericError, StructuralError, ValidationError

__all__ = [
    "LifParams",
    "SynapseMatrix",
    "LifLayerState",
    "SpikeRecord",
    "gather_current",
    "lif_step",
    "simulate_window",
]


@dataclass(frozen=True)
class LifParams:
    """Membrane constants; reset and refractory complete the fire rule."""

    tau_m_ms: float
    v_th: float
    v_reset: float = 0.0
    refractory_steps: int = 0

    def __post_init__(self) -> None:
        if not (self.tau_m_ms > 0):
            raise ConfigurationError(f"tau_m_ms must be > 0, got {self.tau_m_ms}")
        if not (self.v_th > self.v_reset):
            raise ConfigurationError(
                f"v_th ({self.v_th}) must exceed v_reset ({self.v_reset})"
            )
        if self.refractory_steps < 0:
            raise ConfigurationError(
                f"refractory_steps must be >= 0, got {self.refractory_steps}"
            )

    def validate_against(self, grid: TimeGrid) -> None:
        # Forward-Euler stability guard.
        if grid.dt_ms > self.tau_m_ms / 10.0:
            raise ConfigurationError(
                f"dt_ms ({grid.dt_ms}) must be <= tau_m_ms/10 "
                f"({self.tau_m_ms / 10.0}) for stable integration"
            )


def _quantize_weights(values: np.ndarray, w_min: float, w_max: float) -> np.ndarray:
    """Clip to bounds and narrow to float32 without escaping the bounds."""
    arr = np.clip(np.asarray(values, dtype=np.float64), w_min, w_max)
    out = arr.astype(np.float32)
    # float32 rounding can step just past a bound that is not exactly
    # representable; nudge those entries back inside.
    hi = np.float32(w_max)
    if float(hi) > w_max:
        hi = np.nextafter(hi, np.float32(-np.inf))
    lo = np.float32(w_min)
    if float(lo) < w_min:
        lo = np.nextafter(lo, np.float32(np.inf))
    return np.clip(out, lo, hi)


@dataclass(frozen=True, eq=False)
class SynapseMatrix:
    """Dense pre-by-post weights for one modality, clipped to [w_min, w_max].

    Weights are stored as float32 (the same width they persist at, so a
    save/load round trip is bit-exact); dynamics and learning upcast to
    float64 internally.
    """

    modality: Modality
    weights: np.ndarray
    w_min: float
    w_max: float

    def __post_init__(self) -> None:
        if not (self.w_min < self.w_max):
            raise ConfigurationError(
                f"w_min ({self.w_min}) must be < w_max ({self.w_max})"
            )
        arr = np.asarray(self.weights)
        if arr.ndim != 2:
            raise StructuralError(f"weights must be 2-D, got shape {arr.shape}")
        arr = arr.astype(np.float32, copy=True)
        wide = arr.astype(np.float64)
        if np.any(wide < self.w_min) or np.any(wide > self.w_max):
            raise ValidationError(
                f"{self.modality.value} weights fall outside "
                f"[{self.w_min}, {self.w_max}]"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "weights", arr)

    @property
    def n_pre(self) -> int:
        return self.weights.shape[0]

    @property
    def n_post(self) -> int:
        return self.weights.shape[1]

    @cached_property
    def weights_f64(self) -> np.ndarray:
        wide = self.weights.astype(np.float64)
        wide.flags.writeable = False
        return wide

    def with_weights(self, values: np.ndarray) -> "SynapseMatrix":
        """New matrix with the same bounds; values are clipped and narrowed."""
        return SynapseMatrix(
            self.modality,
            _quantize_weights(values, self.w_min, self.w_max),
            self.w_min,
            self.w_max,
        )


@dataclass(frozen=True, eq=False)
class LifLayerState:
    """Per-neuron membrane potentials and remaining refractory steps."""

    v: np.ndarray
    refrac_remaining: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.v, dtype=np.float64).copy()
        refrac = np.asarray(self.refrac_remaining, dtype=np.int64).copy()
        if v.shape != refrac.shape or v.ndim != 1:
            raise StructuralError(
                f"state arrays must be matching 1-D, got {v.shape} and {refrac.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise NumericError("membrane potentials must be finite")
        if np.any(refrac < 0):
            raise ValidationError("refractory counters must be >= 0")
        v.flags.writeable = False
        refrac.flags.writeable = False
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "refrac_remaining", refrac)

    @property
    def n_neurons(self) -> int:
        return int(self.v.size)

    @classmethod
    def resting(cls, n_neurons: int, params: LifParams) -> "LifLayerState":
        return cls(
            np.full(n_neurons, params.v_reset, dtype=np.float64),
            np.zeros(n_neurons, dtype=np.int64),
        )


@dataclass(frozen=True, eq=False)
class SpikeRecord:
    """Output spikes of one simulation window, optionally with the V trace.

    ``v_trace[t]`` holds the end-of-step potentials (after any reset).
    """

    trains: tuple[SpikeTrain, ...]
    grid: TimeGrid
    v_trace: np.ndarray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "trains", tuple(self.trains))
        for train in self.trains:
            train.validate_on(self.grid)

    @property
    def n_neurons(self) -> int:
        return len(self.trains)

    def counts(self) -> np.ndarray:
        return np.array([len(t) for t in self.trains], dtype=np.int64)


def gather_current(
    w_im: SynapseMatrix,
    spikes_im: np.ndarray,
    w_au: SynapseMatrix,
    spikes_au: np.ndarray,
) -> np.ndarray:
    """Summed synaptic drive from both modalities' spike indicators."""
    s_im = np.asarray(spikes_im, dtype=np.float64).reshape(-1)
    s_au = np.asarray(spikes_au, dtype=np.float64).reshape(-1)
    if s_im.size != w_im.n_pre:
        raise StructuralError(
            f"image indicator length {s_im.size} != n_pre {w_im.n_pre}"
        )
    if s_au.size != w_au.n_pre:
        raise StructuralError(
            f"audio indicator length {s_au.size} != n_pre {w_au.n_pre}"
        )
    if w_im.n_post != w_au.n_post:
        raise StructuralError(
            f"matrices disagree on n_post: {w_im.n_post} vs {w_au.n_post}"
        )
    return w_im.weights_f64.T @ s_im + w_au.weights_f64.T @ s_au


def lif_step(
    state: LifLayerState,
    params: LifParams,
    current: np.ndarray,
    grid: TimeGrid,
) -> tuple[LifLayerState, np.ndarray]:
    """Advance the layer one step; returns (new state, spike indicator).

    Non-refractory neurons integrate ``V += (dt/tau_m) * (-V + I)`` and
    spike when V >= v_th, resetting to v_reset and arming the refractory
    counter. Refractory neurons skip integration, hold V = v_reset, and
    count down.
    """
    params.validate_against(grid)
    drive = np.asarray(current, dtype=np.float64).reshape(-1)
    if drive.size != state.n_neurons:
        raise StructuralError(
            f"current length {drive.size} != layer size {state.n_neurons}"
        )
    if not np.all(np.isfinite(drive)):
        raise NumericError("input current contains non-finite values")

    active = state.refrac_remaining == 0
    alpha = grid.dt_ms / params.tau_m_ms
    # (1-a)*V + a*I is the Euler step V + a*(-V + I) arranged so that
    # zero-input decay is one multiply, matching the closed form bit for bit.
    v = np.where(active, (1.0 - alpha) * state.v + alpha * drive, params.v_reset)

    spiked = active & (v >= params.v_th)
    v = np.where(spiked, params.v_reset, v)
    refrac = np.where(
        spiked,
        params.refractory_steps,
        np.where(active, 0, state.refrac_remaining - 1),
    )
    return LifLayerState(v, refrac), spiked


def simulate_window(
    w_im: SynapseMatrix,
    w_au: SynapseMatrix,
    params: LifParams,
    inputs_im: ModalSpikeTrains,
    inputs_au: ModalSpikeTrains,
    grid: TimeGrid,
    record_v: bool = False,
) -> SpikeRecord:
    """Run the layer over the whole window from a resting start."""
    params.validate_against(grid)
    if inputs_im.modality is not Modality.IMAGE or w_im.modality is not Modality.IMAGE:
        raise StructuralError("first inputs/matrix pair must be the image modality")
    if inputs_au.modality is not Modality.AUDIO or w_au.modality is not Modality.AUDIO:
        raise StructuralError("second inputs/matrix pair must be the audio modality")
    if inputs_im.grid != grid or inputs_au.grid != grid:
        raise StructuralError("input trains were built on a different time grid")
    if inputs_im.n_neurons != w_im.n_pre:
        raise StructuralError(
            f"image inputs ({inputs_im.n_neurons}) != w_im n_pre ({w_im.n_pre})"
        )
    if inputs_au.n_neurons != w_au.n_pre:
        raise StructuralError(
            f"audio inputs ({inputs_au.n_neurons}) != w_au n_pre ({w_au.n_pre})"
        )
    if w_im.n_post != w_au.n_post:
        raise StructuralError(
            f"matrices disagree on n_post: {w_im.n_post} vs {w_au.n_post}"
        )

    n_post = w_im.n_post
    n_steps = grid.n_steps
    dense_im = inputs_im.to_dense()
    dense_au = inputs_au.to_dense()

    state = LifLayerState.resting(n_post, params)
    fired = np.zeros((n_steps, n_post), dtype=bool)
    trace = np.empty((n_steps, n_post)) if record_v else None
    for t in range(n_steps):
        current = gather_current(w_im, dense_im[t], w_au, dense_au[t])
        state, spiked = lif_step(state, params, current, grid)
        fired[t] = spiked
        if trace is not None:
            trace[t] = state.v

    trains = tuple(SpikeTrain(np.flatnonzero(fired[:, j])) for j in range(n_post))
    return SpikeRecord(trains, grid, trace)
