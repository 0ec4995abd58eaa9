"""Time discretization, spike-train containers, and seeded randomness.

Every spike time in the package is a discrete step index on a fixed
:class:`TimeGrid`; physical quantities (time constants, window lengths)
stay in milliseconds. A neuron emits at most one spike per step, so a
spike train is simply a strictly increasing sequence of step indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigurationError, StructuralError, ValidationError

__all__ = [
    "Modality",
    "TimeGrid",
    "SpikeTrain",
    "ModalSpikeTrains",
    "RngSeed",
    "as_seed",
    "build_time_grid",
    "spike_count",
]

_MAX_SEED = 2**64 - 1


class Modality(Enum):
    """The two input channels the network fuses."""

    IMAGE = "image"
    AUDIO = "audio"


@dataclass(frozen=True)
class TimeGrid:
    """Fixed-step simulation window.

    Step index ``s`` corresponds to physical time ``s * dt_ms``. The
    number of steps is ``ceil(duration_ms / dt_ms)``, with quotients
    within 1e-9 of an integer snapped down to that integer so that
    decimal inputs like (94.8, 0.1) do not gain a phantom step.
    """

    duration_ms: float
    dt_ms: float

    def __post_init__(self) -> None:
        if not (self.duration_ms > 0):
            raise ConfigurationError(
                f"duration_ms must be > 0, got {self.duration_ms}"
            )
        if not (self.dt_ms > 0):
            raise ConfigurationError(f"dt_ms must be > 0, got {self.dt_ms}")
        if self.dt_ms > self.duration_ms:
            raise ConfigurationError(
                f"dt_ms ({self.dt_ms}) must not exceed duration_ms "
                f"({self.duration_ms})"
            )

    @property
    def n_steps(self) -> int:
        ratio = self.duration_ms / self.dt_ms
        nearest = round(ratio)
        if nearest >= 1 and abs(ratio - nearest) < 1e-9 * max(1.0, ratio):
            return int(nearest)
        return int(math.ceil(ratio))

    @property
    def duration_s(self) -> float:
        return self.duration_ms / 1000.0

    def step_to_ms(self, step: int | np.ndarray) -> float | np.ndarray:
        return step * self.dt_ms


def build_time_grid(duration_ms: float, dt_ms: float) -> TimeGrid:
    """Construct a validated :class:`TimeGrid`."""
    return TimeGrid(float(duration_ms), float(dt_ms))


@dataclass(frozen=True, eq=False)
class SpikeTrain:
    """Strictly increasing step indices of one neuron's spikes.

    The underlying array is normalized to int64 and frozen. Range
    validation against a particular grid happens in ``validate_on``
    because a train does not carry its grid.
    """

    spikes: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.spikes)
        if arr.ndim != 1:
            raise ValidationError(f"spike train must be 1-D, got shape {arr.shape}")
        if arr.size and not np.issubdtype(arr.dtype, np.integer):
            if not np.all(arr == np.floor(arr)):
                raise ValidationError("spike steps must be integers")
        arr = arr.astype(np.int64, copy=True)
        if arr.size:
            if arr[0] < 0:
                raise ValidationError(f"negative spike step {arr[0]}")
            if np.any(np.diff(arr) <= 0):
                raise ValidationError("spike steps must be strictly increasing")
        arr.flags.writeable = False
        object.__setattr__(self, "spikes", arr)

    def __len__(self) -> int:
        return int(self.spikes.size)

    def validate_on(self, grid: TimeGrid) -> None:
        """Reject (never clip) trains that overrun the grid."""
        if self.spikes.size and self.spikes[-1] >= grid.n_steps:
            raise ValidationError(
                f"spike step {int(self.spikes[-1])} outside grid with "
                f"{grid.n_steps} steps"
            )

    @classmethod
    def empty(cls) -> "SpikeTrain":
        return cls(np.empty(0, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class ModalSpikeTrains:
    """One spike train per input neuron of a single modality."""

    modality: Modality
    trains: tuple[SpikeTrain, ...]
    grid: TimeGrid

    def __post_init__(self) -> None:
        object.__setattr__(self, "trains", tuple(self.trains))
        for train in self.trains:
            train.validate_on(self.grid)

    @property
    def n_neurons(self) -> int:
        return len(self.trains)

    def to_dense(self) -> np.ndarray:
        """Binary indicator matrix of shape (n_steps, n_neurons)."""
        dense = np.zeros((self.grid.n_steps, self.n_neurons))
        counts = [len(t) for t in self.trains]
        if sum(counts):
            rows = np.concatenate([t.spikes for t in self.trains])
            cols = np.repeat(np.arange(self.n_neurons), counts)
            dense[rows, cols] = 1.0
        return dense

    @classmethod
    def empty(cls, modality: Modality, n_neurons: int, grid: TimeGrid) -> "ModalSpikeTrains":
        """All-silent trains, used when a modality is masked out."""
        return cls(modality, tuple(SpikeTrain.empty() for _ in range(n_neurons)), grid)


@dataclass(frozen=True)
class RngSeed:
    """64-bit seed; equal seeds give bit-identical streams everywhere.

    ``derive`` maps (seed, labels...) to a child seed through a seed
    sequence, so independent consumers (weight init, shuffling, each
    per-sample encode) get decorrelated but reproducible streams.
    """

    seed: int

    def __post_init__(self) -> None:
        if not (0 <= self.seed <= _MAX_SEED):
            raise ConfigurationError(
                f"seed must be an unsigned 64-bit integer, got {self.seed}"
            )

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def derive(self, *keys: int | str) -> "RngSeed":
        entropy = [self.seed]
        for key in keys:
            if isinstance(key, str):
                entropy.append(int.from_bytes(key.encode("utf-8"), "little"))
            else:
                entropy.append(int(key))
        seq = np.random.SeedSequence(entropy)
        return RngSeed(int(seq.generate_state(1, np.uint64)[0]))


def as_seed(seed: int | RngSeed) -> RngSeed:
    if isinstance(seed, RngSeed):
        return seed
    return RngSeed(int(seed))


def spike_count(train: SpikeTrain, window: TimeGrid) -> int:
    """Number of spikes in the window; divide by duration for the mean rate."""
    if not isinstance(train, SpikeTrain):
        raise StructuralError(f"expected SpikeTrain, got {type(train).__name__}")
    train.validate_on(window)
    return len(train)
