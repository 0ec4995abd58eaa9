"""Multimodal network assembly, training, class readout, and biased decoding.

A single trainable layer receives rate-coded image spikes and TTFS-coded
audio spikes and serves as the readout population. Masking a modality
replaces its spike trains with silence, which is how the unimodal
accuracies a_im and a_au are measured; those accuracies yield the
normalized bias pair used by the fused decoder

    C = argmax_c (b_im * counts_im[c] + b_au * counts_au[c])

where counts_* are per-class spike-count sums from the two masked passes.
All argmax ties (class assignment, evaluation, decoding) break toward the
lowest class id for total determinism.

Seed discipline: operations that iterate a dataset derive one child seed
per sample, ``seed.derive("eval", index)`` for evaluation-style passes
and ``seed.derive("fwd", epoch, slot)`` inside training, so that any
stochastic encoder draws are reproducible and masked passes over the
same sample see identical inputs.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .core import Modality, ModalSpikeTrains, RngSeed, TimeGrid, as_seed
from .encoding import IntensityGrid, RateEncoderConfig, TtfsEncoderConfig, rate_encode, ttfs_encode
from .errors import ConfigurationError, StateError, StructuralError, ValidationError
from .neuron import LifParams, SpikeRecord, SynapseMatrix, simulate_window
from .plasticity import (
    CombinedUpdateParams,
    RateStdpParams,
    TemporalStdpParams,
    apply_combined_update,
    initial_synapses,
)

__all__ = [
    "MaskMode",
    "Sample",
    "EncoderSettings",
    "BiasTerms",
    "EvalReport",
    "MultimodalNetwork",
    "build_network",
    "forward",
    "train",
    "assign_classes",
    "evaluate",
    "compute_bias",
    "fused_scores",
    "biased_classify",
    "classify_dataset",
]

UNASSIGNED = -1


class MaskMode(Enum):
    """Which modality's input spikes are silenced during a forward pass."""

    NONE = "none"
    MASK_IMAGE = "image"
    MASK_AUDIO = "audio"


@dataclass(frozen=True, eq=False)
class Sample:
    """One paired stimulus: an image and an audio spectrogram."""

    image: IntensityGrid
    audio: IntensityGrid
    label: int | None = None


@dataclass(frozen=True)
class EncoderSettings:
    """Encoder configuration pair used by every forward pass."""

    rate: RateEncoderConfig
    ttfs: TtfsEncoderConfig


@dataclass(frozen=True)
class BiasTerms:
    """Accuracy-proportional fusion weights, normalized to sum to 1."""

    b_im: float
    b_au: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.b_im <= 1.0 and 0.0 <= self.b_au <= 1.0):
            raise ValidationError(
                f"bias terms must lie in [0, 1], got ({self.b_im}, {self.b_au})"
            )
        if abs(self.b_im + self.b_au - 1.0) > 1e-9:
            raise ValidationError(
                f"bias terms must sum to 1, got {self.b_im + self.b_au}"
            )


@dataclass(frozen=True, eq=False)
class EvalReport:
    """Accuracy plus confusion counts for one masked evaluation."""

    accuracy: float
    confusion: np.ndarray
    mask: MaskMode

    def __post_init__(self) -> None:
        conf = np.asarray(self.confusion, dtype=np.int64).copy()
        if conf.ndim != 2 or conf.shape[0] != conf.shape[1]:
            raise StructuralError(f"confusion matrix must be square, got {conf.shape}")
        conf.flags.writeable = False
        object.__setattr__(self, "confusion", conf)

    @property
    def n_classes(self) -> int:
        return self.confusion.shape[0]


@dataclass(frozen=True, eq=False)
class MultimodalNetwork:
    """Both synapse matrices, shared neuron parameters, and the class map."""

    w_im: SynapseMatrix
    w_au: SynapseMatrix
    lif: LifParams
    grid: TimeGrid
    class_of_neuron: np.ndarray | None = None
    n_classes: int | None = None

    def __post_init__(self) -> None:
        if self.w_im.modality is not Modality.IMAGE:
            raise StructuralError("w_im must carry the image modality")
        if self.w_au.modality is not Modality.AUDIO:
            raise StructuralError("w_au must carry the audio modality")
        if self.w_im.n_post != self.w_au.n_post:
            raise StructuralError(
                f"matrices disagree on n_post: {self.w_im.n_post} vs {self.w_au.n_post}"
            )
        self.lif.validate_against(self.grid)
        if self.class_of_neuron is not None:
            if self.n_classes is None or self.n_classes < 1:
                raise StructuralError("assigned network must carry n_classes >= 1")
            classes = np.asarray(self.class_of_neuron, dtype=np.int64).copy()
            if classes.shape != (self.n_post,):
                raise StructuralError(
                    f"class map must have length {self.n_post}, got {classes.shape}"
                )
            if np.any((classes < 0) | (classes >= self.n_classes)):
                raise ValidationError(
                    f"class labels must lie in [0, {self.n_classes})"
                )
            classes.flags.writeable = False
            object.__setattr__(self, "class_of_neuron", classes)

    @property
    def n_post(self) -> int:
        return self.w_im.n_post

    @property
    def is_assigned(self) -> bool:
        return self.class_of_neuron is not None


def build_network(
    n_pre_im: int,
    n_pre_au: int,
    n_post: int,
    lif: LifParams,
    grid: TimeGrid,
    w_min: float,
    w_max: float,
    seed: int | RngSeed,
) -> MultimodalNetwork:
    """Fresh untrained network with seeded mid-range weights."""
    root = as_seed(seed)
    w_im = initial_synapses(
        Modality.IMAGE, n_pre_im, n_post, w_min, w_max, root.derive("w_im")
    )
    w_au = initial_synapses(
        Modality.AUDIO, n_pre_au, n_post, w_min, w_max, root.derive("w_au")
    )
    return MultimodalNetwork(w_im, w_au, lif, grid)


def _check_sample(net: MultimodalNetwork, sample: Sample) -> None:
    if sample.image.size != net.w_im.n_pre:
        raise StructuralError(
            f"image has {sample.image.size} pixels but the network expects "
            f"{net.w_im.n_pre}"
        )
    if sample.audio.size != net.w_au.n_pre:
        raise StructuralError(
            f"spectrogram has {sample.audio.size} cells but the network expects "
            f"{net.w_au.n_pre}"
        )


def forward(
    net: MultimodalNetwork,
    sample: Sample,
    mask: MaskMode,
    enc: EncoderSettings,
    seed: int | RngSeed,
) -> SpikeRecord:
    """Encode a sample (honoring the mask) and simulate one window."""
    _check_sample(net, sample)
    if mask is MaskMode.MASK_IMAGE:
        trains_im = ModalSpikeTrains.empty(Modality.IMAGE, net.w_im.n_pre, net.grid)
    else:
        trains_im = rate_encode(sample.image, enc.rate, net.grid, seed)
    if mask is MaskMode.MASK_AUDIO:
        trains_au = ModalSpikeTrains.empty(Modality.AUDIO, net.w_au.n_pre, net.grid)
    else:
        trains_au = ttfs_encode(sample.audio, enc.ttfs, net.grid)
    return simulate_window(
        net.w_im, net.w_au, net.lif, trains_im, trains_au, net.grid
    )


def train(
    net: MultimodalNetwork,
    dataset: Sequence[Sample],
    epochs: int,
    rate_params: RateStdpParams,
    temp_params: TemporalStdpParams,
    comb: CombinedUpdateParams,
    enc: EncoderSettings,
    seed: int | RngSeed,
) -> MultimodalNetwork:
    """Unsupervised STDP training over seed-shuffled epochs.

    Each visited sample runs an unmasked forward pass followed by the
    combined weight update; the class map of the input network (if any)
    is dropped because weights change.
    """
    if epochs < 1:
        raise ConfigurationError(f"epochs must be >= 1, got {epochs}")
    if not dataset:
        raise ConfigurationError("training dataset must be nonempty")
    for sample in dataset:
        _check_sample(net, sample)

    root = as_seed(seed)
    shuffle_rng = root.derive("shuffle").generator()
    w_im, w_au = net.w_im, net.w_au
    current = MultimodalNetwork(w_im, w_au, net.lif, net.grid)
    for epoch in range(epochs):
        order = shuffle_rng.permutation(len(dataset))
        for slot, idx in enumerate(order):
            sample = dataset[int(idx)]
            # Unmasked forward pass, decomposed so the encoded trains are
            # reused by the weight update.
            trains_im = rate_encode(
                sample.image, enc.rate, net.grid, root.derive("fwd", epoch, slot)
            )
            trains_au = ttfs_encode(sample.audio, enc.ttfs, net.grid)
            record = simulate_window(
                current.w_im, current.w_au, net.lif, trains_im, trains_au, net.grid
            )
            w_im, w_au = apply_combined_update(
                current.w_im,
                current.w_au,
                trains_im,
                trains_au,
                record,
                rate_params,
                temp_params,
                comb,
                net.grid,
            )
            current = MultimodalNetwork(w_im, w_au, net.lif, net.grid)
    return current


def _require_labels(dataset: Sequence[Sample]) -> np.ndarray:
    labels = []
    for i, sample in enumerate(dataset):
        if sample.label is None:
            raise ValidationError(f"sample {i} has no label")
        labels.append(int(sample.label))
    return np.asarray(labels, dtype=np.int64)


def assign_classes(
    net: MultimodalNetwork,
    dataset: Sequence[Sample],
    enc: EncoderSettings,
    seed: int | RngSeed,
    n_classes: int | None = None,
) -> MultimodalNetwork:
    """Label each neuron with the class it fires most for, on average.

    Runs unmasked forward passes over the labeled dataset, averages each
    neuron's spike count per class, and assigns the argmax (lowest class
    id on ties, so silent neurons land on class 0).
    """
    if not dataset:
        raise ConfigurationError("class assignment needs a nonempty dataset")
    labels = _require_labels(dataset)
    if n_classes is None:
        n_classes = int(labels.max()) + 1
    if labels.min() < 0 or labels.max() >= n_classes:
        raise ValidationError(
            f"labels must lie in [0, {n_classes}), got range "
            f"[{labels.min()}, {labels.max()}]"
        )
    per_class = np.bincount(labels, minlength=n_classes)
    missing = np.flatnonzero(per_class == 0)
    if missing.size:
        raise ConfigurationError(
            f"class {int(missing[0])} has no samples in the assignment dataset"
        )

    root = as_seed(seed)
    totals = np.zeros((n_classes, net.n_post))
    for idx, sample in enumerate(dataset):
        record = forward(net, sample, MaskMode.NONE, enc, root.derive("assign", idx))
        totals[labels[idx]] += record.counts()
    means = totals / per_class[:, None]
    assigned = np.argmax(means, axis=0).astype(np.int64)
    return dataclasses.replace(net, class_of_neuron=assigned, n_classes=n_classes)


def _class_counts(net: MultimodalNetwork, record: SpikeRecord) -> np.ndarray:
    return np.bincount(
        net.class_of_neuron, weights=record.counts(), minlength=net.n_classes
    )


def evaluate(
    net: MultimodalNetwork,
    dataset: Sequence[Sample],
    mask: MaskMode,
    enc: EncoderSettings,
    seed: int | RngSeed,
) -> EvalReport:
    """Accuracy under a mask: per sample, argmax of class spike-count sums."""
    if not net.is_assigned:
        raise StateError("evaluate requires a network with assigned classes")
    if not dataset:
        raise ConfigurationError("evaluation dataset must be nonempty")
    labels = _require_labels(dataset)
    if labels.min() < 0 or labels.max() >= net.n_classes:
        raise ValidationError(
            f"labels must lie in [0, {net.n_classes}), got range "
            f"[{labels.min()}, {labels.max()}]"
        )

    root = as_seed(seed)
    confusion = np.zeros((net.n_classes, net.n_classes), dtype=np.int64)
    for idx, sample in enumerate(dataset):
        record = forward(net, sample, mask, enc, root.derive("eval", idx))
        predicted = int(np.argmax(_class_counts(net, record)))
        confusion[labels[idx], predicted] += 1
    accuracy = float(np.trace(confusion) / len(dataset))
    return EvalReport(accuracy, confusion, mask)


def compute_bias(a_im: float, a_au: float) -> BiasTerms:
    """Normalize the two unimodal accuracies into fusion weights."""
    if not (0.0 <= a_im <= 1.0):
        raise ValidationError(f"a_im must lie in [0, 1], got {a_im}")
    if not (0.0 <= a_au <= 1.0):
        raise ValidationError(f"a_au must lie in [0, 1], got {a_au}")
    total = a_im + a_au
    if total == 0.0:
        return BiasTerms(0.5, 0.5)
    return BiasTerms(a_im / total, a_au / total)


def fused_scores(counts_im, counts_au, b_im: float, b_au: float) -> np.ndarray:
    """Per-class decoder scores b_im*counts_im + b_au*counts_au.

    Exposed separately because the argmax is invariant under scaling both
    weights by any positive factor.
    """
    return b_im * np.asarray(counts_im, dtype=np.float64) + b_au * np.asarray(
        counts_au, dtype=np.float64
    )


def biased_classify(
    net: MultimodalNetwork,
    sample: Sample,
    bias: BiasTerms,
    enc: EncoderSettings,
    seed: int | RngSeed,
) -> int:
    """Fused prediction from two masked passes weighted by the bias pair."""
    if not net.is_assigned:
        raise StateError("biased_classify requires a network with assigned classes")
    record_im = forward(net, sample, MaskMode.MASK_AUDIO, enc, seed)
    record_au = forward(net, sample, MaskMode.MASK_IMAGE, enc, seed)
    scores = fused_scores(
        _class_counts(net, record_im), _class_counts(net, record_au), bias.b_im, bias.b_au
    )
    return int(np.argmax(scores))


def classify_dataset(
    net: MultimodalNetwork,
    dataset: Sequence[Sample],
    bias: BiasTerms,
    enc: EncoderSettings,
    seed: int | RngSeed,
) -> tuple[np.ndarray, float]:
    """Biased predictions for a labeled dataset, plus their accuracy.

    Per-sample seeds follow evaluate's derivation, so a degenerate bias
    of (1, 0) reproduces the mask-audio evaluation exactly.
    """
    if not dataset:
        raise ConfigurationError("classification dataset must be nonempty")
    labels = _require_labels(dataset)
    root = as_seed(seed)
    predictions = np.empty(len(dataset), dtype=np.int64)
    for idx, sample in enumerate(dataset):
        predictions[idx] = biased_classify(
            net, sample, bias, enc, root.derive("eval", idx)
        )
    accuracy = float(np.mean(predictions == labels))
    return predictions, accuracy
