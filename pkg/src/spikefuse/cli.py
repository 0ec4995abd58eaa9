"""Command-line workflow around the library.

Subcommands:

    gen-data       write synthetic train/eval dataset files
    train          train a network on the train split and assign classes
    eval           masked or unmasked accuracy on the eval split
    bias           both unimodal accuracies -> normalized bias terms
    classify       bias-weighted fused predictions over the eval split
    export-raster  spike times of one forward pass as CSV

Every command takes ``--config PATH`` and ``--out DIR`` plus an optional
``--seed N`` override; ``eval`` adds ``--mask {none|image|audio}`` naming
the modality to silence. Input locations come from the config's
``paths.*`` keys (resolved relative to the config file), outputs land in
``--out`` under fixed names, and each run drops a ``<command>-manifest``
next to them. Identical inputs and seed reproduce every data artifact
byte for byte.
"""

from __future__ import annotations

import argparse
import sys
from datetime import datetime, timezone
from pathlib import Path

from .config import RunConfig
from .core import RngSeed, as_seed
from .datasets import generate_samples, read_dataset, write_dataset
from .errors import ConfigurationError, SpikeFuseError
from .network import (
    MaskMode,
    assign_classes,
    build_network,
    classify_dataset,
    compute_bias,
    evaluate,
    forward,
)
from .network import train as train_network
from .persist import (
    read_bias,
    save_network,
    load_network,
    write_bias,
    write_classify_summary,
    write_eval_report,
    write_predictions,
    write_raster,
    _dump_json,
)

__all__ = ["run_command", "main"]

MANIFEST_FORMAT = "spikefuse-manifest/1"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spikefuse",
        description="Multimodal spiking network: synthesize data, train, evaluate, decode.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = [
        ("gen-data", "generate synthetic train/eval dataset files"),
        ("train", "train on the train split and write the network file"),
        ("eval", "evaluate the eval split under a mask"),
        ("bias", "compute bias terms from both unimodal accuracies"),
        ("classify", "bias-weighted classification of the eval split"),
        ("export-raster", "write one sample's output spikes as CSV"),
    ]
    for name, help_text in specs:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="run configuration file")
        cmd.add_argument("--seed", type=int, default=None, help="override the config seed")
        cmd.add_argument("--out", required=True, help="output directory")
        if name == "eval":
            cmd.add_argument(
                "--mask",
                choices=["none", "image", "audio"],
                default="none",
                help="modality to silence during the forward passes",
            )
    return parser


def _write_manifest(out: Path, command: str, config: str, seed: RngSeed, artifacts: list[str]) -> None:
    _dump_json(
        out / f"{command}-manifest.json",
        {
            "format": MANIFEST_FORMAT,
            "command": command,
            "config": config,
            "seed": seed.seed,
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "artifacts": artifacts,
        },
    )


def _cmd_gen_data(cfg: RunConfig, seed: RngSeed, out: Path) -> list[str]:
    train_spec = cfg.dataset_spec(cfg["data.samples_per_class"], seed.derive("train-data"))
    eval_spec = cfg.dataset_spec(cfg["data.eval_samples_per_class"], seed.derive("eval-data"))
    train_samples = generate_samples(train_spec)
    eval_samples = generate_samples(eval_spec)
    write_dataset(out / "train.sfd", train_samples, train_spec.n_classes)
    write_dataset(out / "eval.sfd", eval_samples, eval_spec.n_classes)
    return ["train.sfd", "eval.sfd"]


def _cmd_train(cfg: RunConfig, seed: RngSeed, out: Path) -> list[str]:
    samples, n_classes = read_dataset(cfg.path("paths.train_data"))
    grid = cfg.time_grid()
    net = build_network(
        samples[0].image.size,
        samples[0].audio.size,
        cfg["net.n_neurons"],
        cfg.lif_params(),
        grid,
        cfg["net.w_min"],
        cfg["net.w_max"],
        seed.derive("init"),
    )
    enc = cfg.encoder_settings()
    trained = train_network(
        net,
        samples,
        cfg["train.epochs"],
        cfg.rate_stdp(),
        cfg.temporal_stdp(),
        cfg.combined_update(),
        enc,
        seed.derive("train"),
    )
    assigned = assign_classes(trained, samples, enc, seed.derive("assign"), n_classes)
    save_network(out / "network.sfn", assigned)
    return ["network.sfn"]


def _cmd_eval(cfg: RunConfig, seed: RngSeed, out: Path, mask_name: str) -> list[str]:
    net = load_network(cfg.path("paths.network"))
    samples, _ = read_dataset(cfg.path("paths.eval_data"))
    mask = MaskMode(mask_name)
    report = evaluate(net, samples, mask, cfg.encoder_settings(), seed.derive("evaluate"))
    name = f"eval_{mask_name}.json"
    write_eval_report(out / name, report)
    return [name]


def _cmd_bias(cfg: RunConfig, seed: RngSeed, out: Path) -> list[str]:
    net = load_network(cfg.path("paths.network"))
    samples, _ = read_dataset(cfg.path("paths.eval_data"))
    enc = cfg.encoder_settings()
    image_only = evaluate(net, samples, MaskMode.MASK_AUDIO, enc, seed.derive("evaluate"))
    audio_only = evaluate(net, samples, MaskMode.MASK_IMAGE, enc, seed.derive("evaluate"))
    bias = compute_bias(image_only.accuracy, audio_only.accuracy)
    write_bias(out / "bias.json", bias, image_only.accuracy, audio_only.accuracy)
    return ["bias.json"]


def _cmd_classify(cfg: RunConfig, seed: RngSeed, out: Path) -> list[str]:
    net = load_network(cfg.path("paths.network"))
    bias = read_bias(cfg.path("paths.bias"))
    samples, _ = read_dataset(cfg.path("paths.eval_data"))
    predictions, accuracy = classify_dataset(
        net, samples, bias, cfg.encoder_settings(), seed.derive("evaluate")
    )
    labels = [sample.label for sample in samples]
    write_predictions(out / "predictions.csv", labels, predictions)
    write_classify_summary(out / "classify.json", accuracy, len(samples))
    return ["predictions.csv", "classify.json"]


def _cmd_export_raster(cfg: RunConfig, seed: RngSeed, out: Path) -> list[str]:
    net = load_network(cfg.path("paths.network"))
    source = "paths.train_data" if cfg["raster.source"] == "train" else "paths.eval_data"
    samples, _ = read_dataset(cfg.path(source))
    idx = cfg["raster.sample_index"]
    if not (0 <= idx < len(samples)):
        raise ConfigurationError(
            f"raster.sample_index {idx} outside dataset of {len(samples)} samples"
        )
    record = forward(
        net,
        samples[idx],
        MaskMode.NONE,
        cfg.encoder_settings(),
        seed.derive("evaluate").derive("eval", idx),
    )
    write_raster(out / "raster.csv", record)
    return ["raster.csv"]


def run_command(argv: list[str]) -> int:
    """Run one subcommand; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        cfg = RunConfig.from_file(args.config)
        seed = as_seed(args.seed if args.seed is not None else cfg["seed"])
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)

        if args.command == "gen-data":
            artifacts = _cmd_gen_data(cfg, seed, out)
        elif args.command == "train":
            artifacts = _cmd_train(cfg, seed, out)
        elif args.command == "eval":
            artifacts = _cmd_eval(cfg, seed, out, args.mask)
        elif args.command == "bias":
            artifacts = _cmd_bias(cfg, seed, out)
        elif args.command == "classify":
            artifacts = _cmd_classify(cfg, seed, out)
        else:
            artifacts = _cmd_export_raster(cfg, seed, out)
        _write_manifest(out, args.command, args.config, seed, artifacts)
    except (SpikeFuseError, OSError) as exc:
        print(f"spikefuse {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
