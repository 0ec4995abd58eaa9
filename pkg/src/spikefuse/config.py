"""Flat ``key = value`` run configuration.

Lines hold one ``key = value`` pair each; ``#`` starts a comment and
blank lines are ignored. Every key mirrors one documented parameter and
has a default; unknown or duplicate keys are rejected so typos fail
loudly. Relative paths under ``paths.*`` resolve against the directory
containing the config file.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .core import RngSeed, TimeGrid
from .datasets import SyntheticDatasetSpec
from .encoding import RateEncoderConfig, RateMode, TtfsEncoderConfig
from .errors import ConfigurationError
from .network import EncoderSettings
from .neuron import LifParams
from .plasticity import CombinedUpdateParams, PairingPolicy, RateStdpParams, TemporalStdpParams

__all__ = ["RunConfig", "CONFIG_SCHEMA"]

# key -> (type, default). type is int, float, str, or a tuple of choices.
CONFIG_SCHEMA: dict[str, tuple] = {
    "seed": (int, 0),
    "grid.duration_ms": (float, 100.0),
    "grid.dt_ms": (float, 1.0),
    "encode.f_max_hz": (float, 100.0),
    "encode.rate_mode": (("periodic", "poisson"), "periodic"),
    "encode.theta0": (float, 1.0),
    "encode.tau_th_ms": (float, 20.0),
    "lif.tau_m_ms": (float, 10.0),
    "lif.v_th": (float, 1.0),
    "lif.v_reset": (float, 0.0),
    "lif.refractory_steps": (int, 2),
    "net.n_neurons": (int, 30),
    "net.w_min": (float, 0.0),
    "net.w_max": (float, 1.0),
    "stdp.a_plus": (float, 0.01),
    "stdp.a_minus": (float, 0.0085),
    "stdp.tau_plus_ms": (float, 20.0),
    "stdp.tau_minus_ms": (float, 20.0),
    "stdp.b_plus": (float, 0.01),
    "stdp.b_minus": (float, 0.0085),
    "stdp.b_tau_minus_ms": (float, 20.0),
    "stdp.eta_im": (float, 1.0),
    "stdp.eta_au": (float, 1.0),
    "stdp.pairing": (("nearest_neighbor", "all_pairs"), "nearest_neighbor"),
    "train.epochs": (int, 3),
    "data.n_classes": (int, 3),
    "data.samples_per_class": (int, 60),
    "data.eval_samples_per_class": (int, 30),
    "data.image_h": (int, 16),
    "data.image_w": (int, 16),
    "data.spect_h": (int, 16),
    "data.spect_w": (int, 16),
    "data.image_informative": (float, 0.9),
    "data.audio_informative": (float, 0.7),
    "data.noise": (float, 0.2),
    "paths.train_data": (str, "train.sfd"),
    "paths.eval_data": (str, "eval.sfd"),
    "paths.network": (str, "network.sfn"),
    "paths.bias": (str, "bias.json"),
    "raster.sample_index": (int, 0),
    "raster.source": (("train", "eval"), "eval"),
}


def _convert(key: str, raw: str):
    kind, _default = CONFIG_SCHEMA[key]
    if kind is int:
        try:
            return int(raw)
        except ValueError:
            raise ConfigurationError(f"key {key!r} needs an integer, got {raw!r}") from None
    if kind is float:
        try:
            return float(raw)
        except ValueError:
            raise ConfigurationError(f"key {key!r} needs a number, got {raw!r}") from None
    if kind is str:
        return raw
    if raw not in kind:
        raise ConfigurationError(
            f"key {key!r} must be one of {', '.join(kind)}, got {raw!r}"
        )
    return raw


@dataclass(frozen=True)
class RunConfig:
    """Parsed configuration plus the directory paths resolve against."""

    values: dict
    base_dir: Path

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        try:
            text = path.read_text("utf-8")
        except FileNotFoundError:
            raise ConfigurationError(f"config file not found: {path}") from None
        values = {key: default for key, (_, default) in CONFIG_SCHEMA.items()}
        seen: set[str] = set()
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigurationError(
                    f"{path}:{lineno}: expected 'key = value', got {line!r}"
                )
            key, raw = (part.strip() for part in stripped.split("=", 1))
            if key not in CONFIG_SCHEMA:
                raise ConfigurationError(f"{path}:{lineno}: unknown key {key!r}")
            if key in seen:
                raise ConfigurationError(f"{path}:{lineno}: duplicate key {key!r}")
            seen.add(key)
            values[key] = _convert(key, raw)
        return cls(values, path.resolve().parent)

    def __getitem__(self, key: str):
        return self.values[key]

    def path(self, key: str) -> Path:
        raw = Path(self.values[key])
        return raw if raw.is_absolute() else self.base_dir / raw

    # Builders for the domain objects a run needs.

    def time_grid(self) -> TimeGrid:
        return TimeGrid(self["grid.duration_ms"], self["grid.dt_ms"])

    def encoder_settings(self) -> EncoderSettings:
        return EncoderSettings(
            rate=RateEncoderConfig(
                self["encode.f_max_hz"], RateMode(self["encode.rate_mode"])
            ),
            ttfs=TtfsEncoderConfig(self["encode.theta0"], self["encode.tau_th_ms"]),
        )

    def lif_params(self) -> LifParams:
        return LifParams(
            self["lif.tau_m_ms"],
            self["lif.v_th"],
            self["lif.v_reset"],
            self["lif.refractory_steps"],
        )

    def rate_stdp(self) -> RateStdpParams:
        return RateStdpParams(
            self["stdp.a_plus"],
            self["stdp.a_minus"],
            self["stdp.tau_plus_ms"],
            self["stdp.tau_minus_ms"],
        )

    def temporal_stdp(self) -> TemporalStdpParams:
        return TemporalStdpParams(
            self["stdp.b_plus"], self["stdp.b_minus"], self["stdp.b_tau_minus_ms"]
        )

    def combined_update(self) -> CombinedUpdateParams:
        return CombinedUpdateParams(
            self["stdp.eta_im"],
            self["stdp.eta_au"],
            PairingPolicy(self["stdp.pairing"]),
        )

    def dataset_spec(self, samples_per_class: int, seed: RngSeed) -> SyntheticDatasetSpec:
        return SyntheticDatasetSpec(
            n_classes=self["data.n_classes"],
            samples_per_class=samples_per_class,
            image_size=(self["data.image_h"], self["data.image_w"]),
            spect_size=(self["data.spect_h"], self["data.spect_w"]),
            image_informative=self["data.image_informative"],
            audio_informative=self["data.audio_informative"],
            noise=self["data.noise"],
            seed=seed.seed,
        )
