"""STDP rules for each modality and the combined, clipped weight update.

Image synapses follow the rate-coded rule

    dw = +a_plus  * exp(-dt / tau_plus)   for dt > 0
    dw = -a_minus * exp(-|dt| / tau_minus) for dt < 0

and audio synapses the temporally faded rule

    dw = +/- b * (1 - t_post / T) * exp(-|dt| / tau_minus)

with dt = t_post - t_pre in milliseconds. Coincident spikes (dt = 0)
contribute nothing. The depression branches use |dt| so the exponential
decays on both sides; the combined update scales each synapse's summed
deltas by its modality's learning rate and clips into [w_min, w_max].
Because every synapse carries exactly one modality, the additive fusion
of the two rules reduces per synapse to its own modality's term.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import Modality, ModalSpikeTrains, RngSeed, SpikeTrain, TimeGrid, as_seed
from .errors import ConfigurationError, StructuralError, ValidationError
from .neuron import SpikeRecord, SynapseMatrix, _quantize_weights

__all__ = [
    "RateStdpParams",
    "TemporalStdpParams",
    "PairingPolicy",
    "CombinedUpdateParams",
    "SpikePair",
    "pair_spikes",
    "rate_stdp_delta",
    "temporal_stdp_delta",
    "apply_combined_update",
    "initial_synapses",
]


@dataclass(frozen=True)
class RateStdpParams:
    """Potentiation/depression amplitudes and decay constants (image rule)."""

    a_plus: float
    a_minus: float
    tau_plus_ms: float
    tau_minus_ms: float

    def __post_init__(self) -> None:
        for name in ("a_plus", "a_minus", "tau_plus_ms", "tau_minus_ms"):
            if not (getattr(self, name) > 0):
                raise ConfigurationError(f"{name} must be > 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class TemporalStdpParams:
    """Amplitudes and the single decay constant of the audio rule."""

    b_plus: float
    b_minus: float
    tau_minus_ms: float

    def __post_init__(self) -> None:
        for name in ("b_plus", "b_minus", "tau_minus_ms"):
            if not (getattr(self, name) > 0):
                raise ConfigurationError(f"{name} must be > 0, got {getattr(self, name)}")


class PairingPolicy(Enum):
    NEAREST_NEIGHBOR = "nearest_neighbor"
    ALL_PAIRS = "all_pairs"


@dataclass(frozen=True)
class CombinedUpdateParams:
    """Per-modality learning rates; zero rates make the update a no-op."""

    eta_im: float
    eta_au: float
    pairing: PairingPolicy = PairingPolicy.NEAREST_NEIGHBOR

    def __post_init__(self) -> None:
        if self.eta_im < 0 or self.eta_au < 0:
            raise ConfigurationError(
                f"learning rates must be >= 0, got eta_im={self.eta_im}, "
                f"eta_au={self.eta_au}"
            )


@dataclass(frozen=True)
class SpikePair:
    """One matched (pre, post) spike pair in physical milliseconds."""

    delta_t_ms: float
    t_post_ms: float


def pair_spikes(
    pre: SpikeTrain,
    post: SpikeTrain,
    policy: PairingPolicy,
    grid: TimeGrid,
) -> list[SpikePair]:
    """Match spikes across one synapse.

    Nearest-neighbor pairs every post spike with its closest pre spike
    (ties toward the earlier pre spike); all-pairs takes the full cross
    product. Either train empty yields no pairs.
    """
    pre.validate_on(grid)
    post.validate_on(grid)
    dt = grid.dt_ms
    if len(pre) == 0 or len(post) == 0:
        return []

    if policy is PairingPolicy.ALL_PAIRS:
        return [
            SpikePair((int(p) - int(r)) * dt, int(p) * dt)
            for p in post.spikes
            for r in pre.spikes
        ]

    pairs = []
    idx = np.searchsorted(pre.spikes, post.spikes)
    for p, i in zip(post.spikes, idx):
        left = int(pre.spikes[i - 1]) if i > 0 else None
        right = int(pre.spikes[i]) if i < len(pre) else None
        if left is None:
            chosen = right
        elif right is None:
            chosen = left
        else:
            # Strict < keeps the tie on the earlier (left) spike.
            chosen = right if (right - int(p)) < (int(p) - left) else left
        pairs.append(SpikePair((int(p) - chosen) * dt, int(p) * dt))
    return pairs


def rate_stdp_delta(delta_t_ms, params: RateStdpParams):
    """Rate-coded STDP kernel; accepts scalars or arrays."""
    dt = np.asarray(delta_t_ms, dtype=np.float64)
    decay_pot = np.exp(-np.abs(dt) / params.tau_plus_ms)
    decay_dep = np.exp(-np.abs(dt) / params.tau_minus_ms)
    out = np.where(
        dt > 0,
        params.a_plus * decay_pot,
        np.where(dt < 0, -params.a_minus * decay_dep, 0.0),
    )
    return out if out.ndim else float(out)


def temporal_stdp_delta(
    delta_t_ms,
    t_post_ms,
    params: TemporalStdpParams,
    grid: TimeGrid,
):
    """Temporal STDP kernel with the (1 - t_post/T) fade; array friendly."""
    dt = np.asarray(delta_t_ms, dtype=np.float64)
    t_post = np.asarray(t_post_ms, dtype=np.float64)
    if np.any(t_post < 0) or np.any(t_post > grid.duration_ms):
        raise ValidationError(
            f"t_post_ms must lie in [0, {grid.duration_ms}], got {t_post_ms!r}"
        )
    fade = 1.0 - t_post / grid.duration_ms
    decay = np.exp(-np.abs(dt) / params.tau_minus_ms)
    out = np.where(
        dt > 0,
        params.b_plus * fade * decay,
        np.where(dt < 0, -params.b_minus * fade * decay, 0.0),
    )
    return out if out.ndim else float(out)


def _nearest_pre_tables(dense: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per (step, pre-neuron): latest spike step <= t and earliest >= t."""
    n_steps, _ = dense.shape
    steps = np.arange(n_steps, dtype=np.float64)[:, None]
    marked = dense > 0
    prev = np.maximum.accumulate(np.where(marked, steps, -np.inf), axis=0)
    nxt = np.minimum.accumulate(np.where(marked, steps, np.inf)[::-1], axis=0)[::-1]
    return prev, nxt


def _accumulate_deltas(
    pre: ModalSpikeTrains,
    post: SpikeRecord,
    policy: PairingPolicy,
    grid: TimeGrid,
    delta_fn,
) -> np.ndarray:
    """Sum delta_fn over matched pairs for every (pre, post) synapse.

    delta_fn(dt_ms_array, t_post_ms_scalar) evaluates the STDP kernel
    elementwise; pairing semantics are identical to pair_spikes.
    """
    n_pre = pre.n_neurons
    n_post = post.n_neurons
    dw = np.zeros((n_pre, n_post))
    dense = pre.to_dense()

    if policy is PairingPolicy.NEAREST_NEIGHBOR:
        prev, nxt = _nearest_pre_tables(dense)
        for j, train in enumerate(post.trains):
            for p in train.spikes:
                left = prev[p]
                right = nxt[p]
                take_right = (right - p) < (p - left)
                chosen = np.where(take_right, right, left)
                has_pair = np.isfinite(chosen)
                if not np.any(has_pair):
                    continue
                dt_ms = (p - chosen[has_pair]) * grid.dt_ms
                dw[has_pair, j] += delta_fn(dt_ms, p * grid.dt_ms)
    else:
        dense_t = dense.T
        step_ms = np.arange(grid.n_steps, dtype=np.float64) * grid.dt_ms
        for j, train in enumerate(post.trains):
            for p in train.spikes:
                kernel = delta_fn(p * grid.dt_ms - step_ms, p * grid.dt_ms)
                dw[:, j] += dense_t @ kernel
    return dw


def apply_combined_update(
    w_im: SynapseMatrix,
    w_au: SynapseMatrix,
    pre_im: ModalSpikeTrains,
    pre_au: ModalSpikeTrains,
    post: SpikeRecord,
    rate_params: RateStdpParams,
    temp_params: TemporalStdpParams,
    comb: CombinedUpdateParams,
    grid: TimeGrid,
) -> tuple[SynapseMatrix, SynapseMatrix]:
    """One learning step over a simulated window; returns new matrices.

    Image synapses accumulate the rate rule, audio synapses the temporal
    rule, each scaled by its learning rate and clipped to the matrix
    bounds. Zero learning rates return the inputs bit-identically.
    """
    if pre_im.n_neurons != w_im.n_pre or pre_au.n_neurons != w_au.n_pre:
        raise StructuralError(
            f"pre train counts ({pre_im.n_neurons}, {pre_au.n_neurons}) do not "
            f"match matrices ({w_im.n_pre}, {w_au.n_pre})"
        )
    if w_im.n_post != w_au.n_post or post.n_neurons != w_im.n_post:
        raise StructuralError(
            f"post dimension mismatch: record {post.n_neurons}, "
            f"w_im {w_im.n_post}, w_au {w_au.n_post}"
        )

    def rate_fn(dt_ms, _t_post_ms):
        return rate_stdp_delta(dt_ms, rate_params)

    def temp_fn(dt_ms, t_post_ms):
        return temporal_stdp_delta(dt_ms, t_post_ms, temp_params, grid)

    new_im = w_im
    if comb.eta_im > 0:
        dw = comb.eta_im * _accumulate_deltas(pre_im, post, comb.pairing, grid, rate_fn)
        new_im = w_im.with_weights(w_im.weights_f64 + dw)
    new_au = w_au
    if comb.eta_au > 0:
        dw = comb.eta_au * _accumulate_deltas(pre_au, post, comb.pairing, grid, temp_fn)
        new_au = w_au.with_weights(w_au.weights_f64 + dw)
    return new_im, new_au


def initial_synapses(
    modality: Modality,
    n_pre: int,
    n_post: int,
    w_min: float,
    w_max: float,
    seed: int | RngSeed,
) -> SynapseMatrix:
    """Seeded mid-range start: uniform over the central 20% of the bounds."""
    if n_pre < 1 or n_post < 1:
        raise ConfigurationError(
            f"synapse matrix needs positive dimensions, got {n_pre}x{n_post}"
        )
    span = w_max - w_min
    rng = as_seed(seed).generator()
    values = rng.uniform(w_min + 0.4 * span, w_min + 0.6 * span, size=(n_pre, n_post))
    return SynapseMatrix(modality, _quantize_weights(values, w_min, w_max), w_min, w_max)
