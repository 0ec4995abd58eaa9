"""Input encoders: rate coding for images, time-to-first-spike for audio.

Rate coding maps a normalized pixel intensity ``p`` to a target firing
rate ``p * f_max_hz`` and lays spikes out either on a regular lattice
(periodic mode, deterministic) or as a Bernoulli process per step
(poisson mode, seeded). TTFS coding races each spectrogram cell value
against an exponentially decaying threshold ``theta0 * exp(-t/tau_th)``
and emits a single spike at the first grid step where the value wins.

Audio ingestion (waveform to spectrogram) also lives here.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import Modality, ModalSpikeTrains, RngSeed, SpikeTrain, TimeGrid, as_seed
from .errors import ConfigurationError, IngestionError, ValidationError

__all__ = [
    "IntensityGrid",
    "RateMode",
    "RateEncoderConfig",
    "TtfsEncoderConfig",
    "SpectrogramConfig",
    "rate_encode",
    "ttfs_encode",
    "compute_spectrogram",
]


@dataclass(frozen=True, eq=False)
class IntensityGrid:
    """2-D array of normalized intensities in [0, 1].

    Flattening is row-major everywhere, matching synapse indexing.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2:
            raise ValidationError(f"intensity grid must be 2-D, got shape {arr.shape}")
        bad = ~((arr >= 0.0) & (arr <= 1.0))
        if np.any(bad):
            r, c = np.argwhere(bad)[0]
            raise ValidationError(
                f"intensity at cell ({r}, {c}) is {arr[r, c]!r}, outside [0, 1]"
            )
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def size(self) -> int:
        return int(self.values.size)

    def flatten(self) -> np.ndarray:
        return self.values.reshape(-1)


class RateMode(Enum):
    PERIODIC = "periodic"
    POISSON = "poisson"


@dataclass(frozen=True)
class RateEncoderConfig:
    """Intensity-to-rate mapping: intensity 1.0 fires at ``f_max_hz``."""

    f_max_hz: float
    mode: RateMode = RateMode.PERIODIC

    def __post_init__(self) -> None:
        if not (self.f_max_hz > 0):
            raise ConfigurationError(f"f_max_hz must be > 0, got {self.f_max_hz}")

    def validate_against(self, grid: TimeGrid) -> None:
        # One spike per step caps the representable rate at 1000/dt_ms.
        cap = 1000.0 / grid.dt_ms
        if self.f_max_hz > cap:
            raise ConfigurationError(
                f"f_max_hz ({self.f_max_hz}) exceeds 1000/dt_ms ({cap}) for "
                f"dt_ms={grid.dt_ms}"
            )


@dataclass(frozen=True)
class TtfsEncoderConfig:
    """Decaying-threshold parameters for first-spike latency coding."""

    theta0: float
    tau_th_ms: float

    def __post_init__(self) -> None:
        if not (self.theta0 > 0):
            raise ConfigurationError(f"theta0 must be > 0, got {self.theta0}")
        if not (self.tau_th_ms > 0):
            raise ConfigurationError(f"tau_th_ms must be > 0, got {self.tau_th_ms}")


@dataclass(frozen=True)
class SpectrogramConfig:
    """Short-time Fourier parameters for waveform ingestion."""

    window_len_samples: int
    hop_samples: int
    log_compress: bool = False

    def __post_init__(self) -> None:
        w = self.window_len_samples
        if w < 2 or (w & (w - 1)) != 0:
            raise ConfigurationError(
                f"window_len_samples must be a power of two >= 2, got {w}"
            )
        if not (0 < self.hop_samples <= w):
            raise ConfigurationError(
                f"hop_samples must be in (0, {w}], got {self.hop_samples}"
            )


def _trains_from_columns(steps: np.ndarray, counts: np.ndarray) -> tuple[SpikeTrain, ...]:
    """Split a neuron-major flat step array into per-neuron trains."""
    splits = np.split(steps, np.cumsum(counts)[:-1])
    return tuple(SpikeTrain(s) for s in splits)


def rate_encode(
    image: IntensityGrid,
    cfg: RateEncoderConfig,
    grid: TimeGrid,
    seed: int | RngSeed,
) -> ModalSpikeTrains:
    """Encode pixel intensities as firing rates.

    Periodic mode places spikes at steps ``floor(k * 1000/(rate*dt_ms))``
    starting at step 0, so the realized count matches ``rate * duration``
    to within one spike. Poisson mode fires each step independently with
    probability ``min(1, rate*dt_ms/1000)`` from the given seed; periodic
    mode never touches the seed.
    """
    cfg.validate_against(grid)
    rates = image.flatten() * cfg.f_max_hz
    n_px = rates.size
    n_steps = grid.n_steps

    if cfg.mode is RateMode.PERIODIC:
        trains: list[SpikeTrain] = [SpikeTrain.empty()] * n_px
        active = np.flatnonzero(rates > 0)
        if active.size:
            # Step period per active pixel; >= 1 because f_max <= 1000/dt.
            q = 1000.0 / (rates[active] * grid.dt_ms)
            k_max = int(n_steps / q.min()) + 1
            ks = np.arange(k_max + 1, dtype=np.float64)
            lattice = np.floor(ks[:, None] * q[None, :])
            counts = (lattice < n_steps).sum(axis=0)
            for col, px in enumerate(active):
                trains[px] = SpikeTrain(lattice[: counts[col], col].astype(np.int64))
        return ModalSpikeTrains(Modality.IMAGE, tuple(trains), grid)

    prob = np.minimum(1.0, rates * grid.dt_ms / 1000.0)
    rng = as_seed(seed).generator()
    fired = rng.random((n_steps, n_px)) < prob[None, :]
    neuron_ids, steps = np.nonzero(fired.T)
    counts = np.bincount(neuron_ids, minlength=n_px)
    return ModalSpikeTrains(Modality.IMAGE, _trains_from_columns(steps, counts), grid)


def ttfs_encode(
    spectrogram: IntensityGrid,
    cfg: TtfsEncoderConfig,
    grid: TimeGrid,
) -> ModalSpikeTrains:
    """Encode each cell as at most one spike at its threshold-crossing step.

    A cell value ``x >= theta0`` fires at step 0 (saturation). For
    ``0 < x < theta0`` the closed-form crossing time is
    ``tau_th_ms * ln(theta0 / x)``, rounded up to the next grid step; the
    rounding carries a 1e-9 snap so values that cross exactly on a step
    do not land one step late from float noise. Cells at 0, or whose
    crossing falls outside the window, stay silent.
    """
    x = spectrogram.flatten()
    n_steps = grid.n_steps

    steps = np.full(x.size, -1, dtype=np.int64)
    steps[x >= cfg.theta0] = 0
    racing = (x > 0) & (x < cfg.theta0)
    if np.any(racing):
        t_star = cfg.tau_th_ms * np.log(cfg.theta0 / x[racing])
        ratio = t_star / grid.dt_ms
        crossing = np.ceil(ratio - 1e-9 * np.maximum(1.0, ratio)).astype(np.int64)
        crossing = np.where(crossing < n_steps, crossing, -1)
        steps[racing] = crossing

    trains = tuple(
        SpikeTrain(np.array([s], dtype=np.int64)) if s >= 0 else SpikeTrain.empty()
        for s in steps
    )
    return ModalSpikeTrains(Modality.AUDIO, trains, grid)


def compute_spectrogram(
    waveform: np.ndarray,
    sample_rate_hz: float,
    cfg: SpectrogramConfig,
) -> IntensityGrid:
    """Hann-windowed short-time Fourier magnitude, rescaled to [0, 1].

    Rows are frequency bins (0 .. window/2), columns are frames. With
    ``log_compress`` the magnitude passes through log(1 + |X|) before
    rescaling by the grid's own maximum; an all-zero waveform yields an
    all-zero grid.
    """
    wav = np.asarray(waveform, dtype=np.float64).reshape(-1)
    if sample_rate_hz <= 0:
        raise IngestionError(f"sample_rate_hz must be > 0, got {sample_rate_hz}")
    win = cfg.window_len_samples
    if wav.size < win:
        raise IngestionError(
            f"waveform has {wav.size} samples but at least {win} are required"
        )

    hann = np.hanning(win)
    n_frames = (wav.size - win) // cfg.hop_samples + 1
    n_bins = win // 2 + 1
    spec = np.empty((n_bins, n_frames))
    for frame in range(n_frames):
        start = frame * cfg.hop_samples
        spec[:, frame] = np.abs(np.fft.rfft(wav[start : start + win] * hann))

    if cfg.log_compress:
        spec = np.log1p(spec)
    peak = spec.max()
    if peak > 0:
        spec = spec / peak
    return IntensityGrid(np.clip(spec, 0.0, 1.0))
