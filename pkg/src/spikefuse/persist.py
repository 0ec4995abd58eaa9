"""On-disk formats: trained networks, bias terms, reports, and rasters.

The network file (magic ``SFN1``) stores, little-endian:

    SFN1 | u32: n_pre_im n_pre_au n_post n_classes(0 = unassigned)
         | f64: duration_ms dt_ms tau_m_ms v_th v_reset refractory_steps
                w_min_im w_max_im w_min_au w_max_au
         | f32 image weights (pre-major) | f32 audio weights (pre-major)
         | u32 class per neuron (0xFFFFFFFF = unassigned)

Weights live in memory as float32, so save/load round trips are
bit-exact. JSON artifacts carry a ``format`` version tag and are written
with sorted keys so identical inputs give identical bytes.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .core import Modality, TimeGrid
from .errors import FormatError, IngestionError
from .network import BiasTerms, EvalReport, MaskMode, MultimodalNetwork
from .neuron import LifParams, SpikeRecord, SynapseMatrix
from .datasets import _atomic_write, _check_magic

__all__ = [
    "save_network",
    "load_network",
    "write_bias",
    "read_bias",
    "write_eval_report",
    "write_predictions",
    "write_classify_summary",
    "write_raster",
]

NETWORK_MAGIC = b"SFN1"
UNASSIGNED_U32 = 0xFFFFFFFF

BIAS_FORMAT = "spikefuse-bias/1"
EVAL_FORMAT = "spikefuse-eval/1"
CLASSIFY_FORMAT = "spikefuse-classify/1"


def _dump_json(path: Path, payload: dict) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    _atomic_write(path, text.encode("utf-8"))


def _load_json(path: Path, expected_format: str) -> dict:
    try:
        payload = json.loads(path.read_text("utf-8"))
    except FileNotFoundError:
        raise IngestionError(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from None
    found = payload.get("format")
    if found != expected_format:
        raise FormatError(
            f"{path}: format tag {found!r} is not supported (expected "
            f"{expected_format!r})"
        )
    return payload


def save_network(path: str | Path, net: MultimodalNetwork) -> None:
    classes = net.class_of_neuron
    n_classes = net.n_classes if net.is_assigned else 0
    header = struct.pack(
        "<4I",
        net.w_im.n_pre,
        net.w_au.n_pre,
        net.n_post,
        n_classes,
    )
    params = struct.pack(
        "<10d",
        net.grid.duration_ms,
        net.grid.dt_ms,
        net.lif.tau_m_ms,
        net.lif.v_th,
        net.lif.v_reset,
        float(net.lif.refractory_steps),
        net.w_im.w_min,
        net.w_im.w_max,
        net.w_au.w_min,
        net.w_au.w_max,
    )
    if classes is None:
        class_arr = np.full(net.n_post, UNASSIGNED_U32, dtype="<u4")
    else:
        class_arr = classes.astype("<u4")
    payload = b"".join(
        [
            NETWORK_MAGIC,
            header,
            params,
            net.w_im.weights.astype("<f4").tobytes(order="C"),
            net.w_au.weights.astype("<f4").tobytes(order="C"),
            class_arr.tobytes(),
        ]
    )
    _atomic_write(Path(path), payload)


def load_network(path: str | Path) -> MultimodalNetwork:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except FileNotFoundError:
        raise IngestionError(f"network file not found: {path}") from None
    _check_magic(blob, NETWORK_MAGIC, path)
    offset = 4
    n_pre_im, n_pre_au, n_post, n_classes = struct.unpack_from("<4I", blob, offset)
    offset += struct.calcsize("<4I")
    (
        duration_ms,
        dt_ms,
        tau_m_ms,
        v_th,
        v_reset,
        refractory,
        w_min_im,
        w_max_im,
        w_min_au,
        w_max_au,
    ) = struct.unpack_from("<10d", blob, offset)
    offset += struct.calcsize("<10d")
    expected = offset + 4 * (n_pre_im * n_post + n_pre_au * n_post + n_post)
    if len(blob) != expected:
        raise FormatError(f"{path}: expected {expected} bytes, found {len(blob)}")
    if refractory != int(refractory) or refractory < 0:
        raise FormatError(f"{path}: refractory_steps field {refractory} is not valid")

    w_im = np.frombuffer(blob, "<f4", n_pre_im * n_post, offset).reshape(n_pre_im, n_post)
    offset += 4 * n_pre_im * n_post
    w_au = np.frombuffer(blob, "<f4", n_pre_au * n_post, offset).reshape(n_pre_au, n_post)
    offset += 4 * n_pre_au * n_post
    class_arr = np.frombuffer(blob, "<u4", n_post, offset)

    grid = TimeGrid(duration_ms, dt_ms)
    lif = LifParams(tau_m_ms, v_th, v_reset, int(refractory))
    m_im = SynapseMatrix(Modality.IMAGE, w_im, w_min_im, w_max_im)
    m_au = SynapseMatrix(Modality.AUDIO, w_au, w_min_au, w_max_au)
    if n_classes == 0:
        if np.any(class_arr != UNASSIGNED_U32):
            raise FormatError(f"{path}: class labels present but n_classes is 0")
        return MultimodalNetwork(m_im, m_au, lif, grid)
    if np.any(class_arr == UNASSIGNED_U32):
        raise FormatError(f"{path}: unassigned neuron in a classed network")
    return MultimodalNetwork(
        m_im, m_au, lif, grid,
        class_of_neuron=class_arr.astype(np.int64),
        n_classes=int(n_classes),
    )


def write_bias(path: str | Path, bias: BiasTerms, a_im: float, a_au: float) -> None:
    _dump_json(
        Path(path),
        {
            "format": BIAS_FORMAT,
            "a_im": a_im,
            "a_au": a_au,
            "b_im": bias.b_im,
            "b_au": bias.b_au,
        },
    )


def read_bias(path: str | Path) -> BiasTerms:
    payload = _load_json(Path(path), BIAS_FORMAT)
    return BiasTerms(float(payload["b_im"]), float(payload["b_au"]))


def write_eval_report(path: str | Path, report: EvalReport) -> None:
    _dump_json(
        Path(path),
        {
            "format": EVAL_FORMAT,
            "mask": report.mask.value,
            "accuracy": report.accuracy,
            "n_samples": int(report.confusion.sum()),
            "confusion": report.confusion.tolist(),
        },
    )


def write_predictions(path: str | Path, labels, predictions) -> None:
    lines = ["index,label,predicted"]
    for i, (label, pred) in enumerate(zip(labels, predictions)):
        lines.append(f"{i},{int(label)},{int(pred)}")
    _atomic_write(Path(path), ("\n".join(lines) + "\n").encode("utf-8"))


def write_classify_summary(path: str | Path, accuracy: float, n_samples: int) -> None:
    _dump_json(
        Path(path),
        {"format": CLASSIFY_FORMAT, "accuracy": accuracy, "n_samples": n_samples},
    )


def write_raster(path: str | Path, record: SpikeRecord) -> None:
    """Per-neuron spike times as CSV rows of (neuron, step, time_ms)."""
    lines = ["neuron,step,time_ms"]
    for neuron, train in enumerate(record.trains):
        for step in train.spikes:
            lines.append(f"{neuron},{int(step)},{record.grid.step_to_ms(int(step))!r}")
    _atomic_write(Path(path), ("\n".join(lines) + "\n").encode("utf-8"))


# Re-exported for callers that only deal in file mask names.
MASK_BY_NAME = {mode.value: mode for mode in MaskMode}
