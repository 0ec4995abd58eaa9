"""Synthetic paired audio-visual datasets and their binary file format.

Each class owns a deterministic prototype per modality: images get a
bright horizontal block, spectrograms a bright frequency band (distinct
row ranges per class, so class patterns are spatially disjoint). A sample
mixes its prototype with a seeded uniform field,

    sample = clip(informative * prototype + (1 - informative) * U
                  + noise * (U' - 0.5), 0, 1)

so ``informative`` controls how visible the prototype is and ``noise``
adds independent per-cell jitter on top.

File format (magic ``SFD1``, all integers u32 little-endian, all floats
f32 little-endian):

    SFD1 | n_samples n_classes img_h img_w spc_h spc_w
    per sample: label | img_h*img_w floats row-major | spc_h*spc_w floats
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import as_seed
from .encoding import IntensityGrid
from .errors import ConfigurationError, FormatError, IngestionError, ValidationError
from .network import Sample

__all__ = [
    "SyntheticDatasetSpec",
    "class_prototypes",
    "generate_samples",
    "generate_dataset",
    "write_dataset",
    "read_dataset",
]

DATASET_MAGIC = b"SFD1"


@dataclass(frozen=True)
class SyntheticDatasetSpec:
    """Generation recipe; identical specs produce byte-identical files."""

    n_classes: int
    samples_per_class: int
    image_size: tuple[int, int]
    spect_size: tuple[int, int]
    image_informative: float
    audio_informative: float
    noise: float
    seed: int

    def __post_init__(self) -> None:
        if self.n_classes < 2:
            raise ConfigurationError(f"n_classes must be >= 2, got {self.n_classes}")
        if self.samples_per_class < 1:
            raise ConfigurationError(
                f"samples_per_class must be >= 1, got {self.samples_per_class}"
            )
        for name, (h, w) in (("image_size", self.image_size), ("spect_size", self.spect_size)):
            if h < 2 or w < 2:
                raise ConfigurationError(f"{name} must be at least 2x2, got {h}x{w}")
        for name in ("image_informative", "audio_informative", "noise"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ConfigurationError(f"{name} must lie in [0, 1], got {value}")


def _band_prototype(height: int, width: int, cls: int, n_classes: int) -> np.ndarray:
    """Bright horizontal band in the class's own row range."""
    band = height // n_classes
    if band < 1:
        raise ConfigurationError(
            f"height {height} cannot host {n_classes} distinct class bands"
        )
    proto = np.zeros((height, width))
    proto[cls * band : (cls + 1) * band, :] = 1.0
    return proto


def class_prototypes(spec: SyntheticDatasetSpec) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Per-class (image, spectrogram) prototype arrays."""
    images = [
        _band_prototype(*spec.image_size, cls, spec.n_classes)
        for cls in range(spec.n_classes)
    ]
    spects = [
        _band_prototype(*spec.spect_size, cls, spec.n_classes)
        for cls in range(spec.n_classes)
    ]
    return images, spects


def _mix(proto: np.ndarray, informative: float, noise: float, rng: np.random.Generator) -> np.ndarray:
    field = rng.random(proto.shape)
    jitter = rng.random(proto.shape) - 0.5
    return np.clip(informative * proto + (1.0 - informative) * field + noise * jitter, 0.0, 1.0)


def generate_samples(spec: SyntheticDatasetSpec) -> list[Sample]:
    """Deterministic class-major sample list for the spec."""
    rng = as_seed(spec.seed).generator()
    image_protos, spect_protos = class_prototypes(spec)
    samples = []
    for cls in range(spec.n_classes):
        for _ in range(spec.samples_per_class):
            image = _mix(image_protos[cls], spec.image_informative, spec.noise, rng)
            audio = _mix(spect_protos[cls], spec.audio_informative, spec.noise, rng)
            samples.append(Sample(IntensityGrid(image), IntensityGrid(audio), cls))
    return samples


def generate_dataset(spec: SyntheticDatasetSpec, path: str | Path) -> Path:
    """Generate and write one dataset file; returns the path written."""
    path = Path(path)
    write_dataset(path, generate_samples(spec), spec.n_classes)
    return path


def _atomic_write(path: Path, payload: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload)
    os.replace(tmp, path)


def write_dataset(path: str | Path, samples: list[Sample], n_classes: int) -> None:
    """Serialize labeled samples; dimensions must agree across samples."""
    if not samples:
        raise ValidationError("cannot write an empty dataset")
    img_shape = samples[0].image.values.shape
    spc_shape = samples[0].audio.values.shape
    chunks = [DATASET_MAGIC, struct.pack("<6I", len(samples), n_classes, *img_shape, *spc_shape)]
    for i, sample in enumerate(samples):
        if sample.label is None:
            raise ValidationError(f"sample {i} has no label")
        if not (0 <= sample.label < n_classes):
            raise ValidationError(
                f"sample {i} label {sample.label} outside [0, {n_classes})"
            )
        if sample.image.values.shape != img_shape or sample.audio.values.shape != spc_shape:
            raise ValidationError(f"sample {i} dimensions differ from sample 0")
        chunks.append(struct.pack("<I", sample.label))
        chunks.append(sample.image.values.astype("<f4").tobytes(order="C"))
        chunks.append(sample.audio.values.astype("<f4").tobytes(order="C"))
    _atomic_write(Path(path), b"".join(chunks))


def _check_magic(blob: bytes, expected: bytes, path: Path) -> None:
    if len(blob) < 4:
        raise FormatError(f"{path}: file too short to hold a header")
    magic = blob[:4]
    if magic == expected:
        return
    if magic[:3] == expected[:3]:
        raise FormatError(
            f"{path}: format version {magic[3:].decode('ascii', 'replace')} "
            f"is not supported (expected version {expected[3:].decode('ascii')})"
        )
    raise FormatError(f"{path}: bad magic {magic!r}, expected {expected!r}")


def read_dataset(path: str | Path) -> tuple[list[Sample], int]:
    """Load a dataset file; returns (samples, n_classes)."""
    path = Path(path)
    try:
        blob = path.read_bytes()
    except FileNotFoundError:
        raise IngestionError(f"dataset file not found: {path}") from None
    _check_magic(blob, DATASET_MAGIC, path)
    header = struct.calcsize("<6I")
    if len(blob) < 4 + header:
        raise FormatError(f"{path}: truncated header")
    n_samples, n_classes, img_h, img_w, spc_h, spc_w = struct.unpack_from("<6I", blob, 4)
    img_n, spc_n = img_h * img_w, spc_h * spc_w
    record = 4 + 4 * (img_n + spc_n)
    expected_len = 4 + header + n_samples * record
    if len(blob) != expected_len:
        raise FormatError(
            f"{path}: expected {expected_len} bytes for {n_samples} samples, "
            f"found {len(blob)}"
        )
    samples = []
    offset = 4 + header
    for i in range(n_samples):
        (label,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        if label >= n_classes:
            raise FormatError(f"{path}: sample {i} label {label} >= n_classes {n_classes}")
        image = np.frombuffer(blob, "<f4", img_n, offset).reshape(img_h, img_w)
        offset += 4 * img_n
        audio = np.frombuffer(blob, "<f4", spc_n, offset).reshape(spc_h, spc_w)
        offset += 4 * spc_n
        samples.append(
            Sample(IntensityGrid(image.astype(np.float64)),
                   IntensityGrid(audio.astype(np.float64)), int(label))
        )
    return samples, n_classes
