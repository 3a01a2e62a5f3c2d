"""Command-line front end.

Subcommands: rdf-curve (code rate along a sampling grid), min-rate
(minimum sampling rate under a channel capacity), sample (training
datasets), emulate (data-based trajectory emulation).  All outputs are CSV
or key=value lines; every command is a pure function of its config, input
files and seed.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .coderate import NotNeeded, min_sampling_rate, rate_curve
from .csvio import (
    format_float,
    load_family,
    read_trajectories,
    write_rate_curve,
    write_trajectories,
)
from .emulation import emulate
from .errors import LincoderError
from .linearsystem import LinearSystemModel, sample_paths
from .presets import demo_model, demo_names
from .ratedistortion import GaussianSource, rdf
from .trajectories import TrajectoryDataset


class ConfigError(Exception):
    pass


def _load_config(path) -> dict:
    try:
        with open(path) as handle:
            config = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return config


def _require(config: dict, key: str):
    if key not in config:
        raise ConfigError(f"config is missing required key {key!r}")
    return config[key]


def _model_from_config(spec) -> LinearSystemModel:
    if isinstance(spec, str):
        if spec not in demo_names():
            raise ConfigError(f"unknown system preset {spec!r}; choose from {sorted(demo_names())}")
        return demo_model(spec)
    if isinstance(spec, dict):
        if "preset" in spec:
            return _model_from_config(spec["preset"])
        if "A" in spec and "N" in spec:
            try:
                return LinearSystemModel.constant(
                    np.asarray(spec["A"], dtype=float), np.asarray(spec["N"], dtype=float)
                )
            except ValueError as exc:
                raise ConfigError(f"invalid system matrices: {exc}") from exc
    raise ConfigError("system must be a preset name or an object with A and N matrices")


def _grid_from_config(spec) -> tuple[np.ndarray, str]:
    if not isinstance(spec, dict):
        raise ConfigError("grid must be an object with min, max and points")
    axis = spec.get("axis", "dt")
    if axis not in ("dt", "fs"):
        raise ConfigError("grid axis must be 'dt' or 'fs'")
    try:
        low = float(_require(spec, "min"))
        high = float(_require(spec, "max"))
        points = int(_require(spec, "points"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid grid specification: {exc}") from exc
    log = bool(spec.get("log", True))
    if points < 1 or low <= 0.0 or (points > 1 and high <= low):
        raise ConfigError("grid needs points >= 1 and 0 < min < max")
    if points == 1:
        axis_values = np.array([low])
    elif log:
        axis_values = np.logspace(np.log10(low), np.log10(high), points)
    else:
        axis_values = np.linspace(low, high, points)
    dts = axis_values if axis == "dt" else np.sort(1.0 / axis_values)
    return dts, axis


def _distortion_from_config(config: dict) -> float:
    value = float(_require(config, "distortion"))
    if value < 0.0:
        raise ConfigError("distortion must be nonnegative")
    return value


def _cmd_rdf_curve(args) -> int:
    config = _load_config(args.config)
    model = _model_from_config(_require(config, "system"))
    distortion = _distortion_from_config(config)
    dts, axis = _grid_from_config(_require(config, "grid"))
    out = args.out or config.get("out")
    if not out:
        raise ConfigError("no output path: pass --out or set 'out' in the config")
    curve = rate_curve(model, distortion, dts, axis=axis)
    write_rate_curve(curve, out)
    if curve.asymptote_bits is not None:
        print(f"asymptote_bits={format_float(curve.asymptote_bits)}")
    print(f"out={out}")
    return 0


def _cmd_min_rate(args) -> int:
    config = _load_config(args.config)
    model = _model_from_config(_require(config, "system"))
    distortion = _distortion_from_config(config)
    capacity = float(_require(config, "capacity_bits"))
    result = min_sampling_rate(model, distortion, capacity)
    if isinstance(result, NotNeeded):
        ceiling = "none" if result.ceiling_bits is None else format_float(result.ceiling_bits)
        print(f"not_needed ceiling_bits={ceiling} zero_rate={int(result.zero_rate)}")
    else:
        print(f"fs_min={format_float(result)}")
    return 0


def _cmd_sample(args) -> int:
    config = _load_config(args.config)
    model = _model_from_config(_require(config, "system"))
    if "dt" in config:
        dt = float(config["dt"])
    elif "fs" in config:
        dt = 1.0 / float(config["fs"])
    else:
        raise ConfigError("config needs 'dt' or 'fs'")
    x0 = np.asarray(_require(config, "x0"), dtype=float)
    steps = int(_require(config, "steps"))
    trials = int(_require(config, "trials"))
    out = args.out or config.get("out")
    if not out:
        raise ConfigError("no output path: pass --out or set 'out' in the config")
    dataset = sample_paths(model, x0, dt, steps, trials, args.seed)
    write_trajectories(dataset, out)
    print(f"trials={dataset.trials} steps={dataset.steps} out={out}")
    return 0


def _cmd_emulate(args) -> int:
    dataset = read_trajectories(args.dataset)
    family = load_family(args.family)
    result = emulate(dataset, family, args.resolution, args.seed)
    write_trajectories(TrajectoryDataset(dataset.dt, result.states[np.newaxis]), args.out)

    increments = dataset.increments()
    emu_increments = np.diff(result.states, axis=0)
    gap = emu_increments - increments.mean(axis=0)
    scale = np.sqrt(np.mean(np.sum(increments**2, axis=2), axis=0)) + 1e-300
    mean_discrepancy = float(np.sqrt(np.mean((np.linalg.norm(gap, axis=1) / scale) ** 2)))

    lines = [
        f"steps={dataset.steps}",
        f"trials={dataset.trials}",
        f"infeasible_increments={result.infeasible_count}",
        f"mean_discrepancy_rms={format_float(mean_discrepancy)}",
    ]
    if dataset.trials >= 2 and family.is_constant:
        # Per-step gap between the training covariance and the covariance the
        # multinomial replay implies at the reported resolution.
        vectors = family.field_matrix()
        cov_gaps = []
        for k in range(dataset.steps):
            train_cov = np.cov(increments[:, k, :], rowvar=False)
            p = result.codes.probabilities[k]
            z = result.codes.flow_times[k]
            mean_field = vectors @ p
            model_cov = (z**2 / args.resolution) * (
                (vectors * p) @ vectors.T - np.outer(mean_field, mean_field)
            )
            cov_gaps.append(
                np.linalg.norm(model_cov - train_cov) / (np.linalg.norm(train_cov) + 1e-300)
            )
        lines.append(
            f"cov_discrepancy_rms={format_float(float(np.sqrt(np.mean(np.square(cov_gaps)))))}"
        )
    pooled = _pooled_increment_covariance(increments)
    if pooled is not None:
        rate = rdf(GaussianSource(np.zeros(dataset.dimension), pooled), args.distortion)
        lines.append(f"distortion={format_float(args.distortion)}")
        lines.append(f"rate_bits_at_distortion={format_float(rate.rate_bits)}")
    lines.append(f"out={args.out}")
    print("\n".join(lines))
    return 0


def _pooled_increment_covariance(increments: np.ndarray):
    """Average per-step increment covariance estimated from the trials."""
    trials = increments.shape[0]
    if trials < 2:
        return None
    centered = increments - increments.mean(axis=0, keepdims=True)
    pooled = np.einsum("lkn,lkm->nm", centered, centered) / (
        increments.shape[1] * (trials - 1)
    )
    return 0.5 * (pooled + pooled.T)


def _seed_type(value: str) -> int:
    seed = int(value)
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return seed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lincoder",
        description="Code rates of linear stochastic systems and data-based emulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    curve = sub.add_parser("rdf-curve", help="code rate along a sampling grid")
    curve.add_argument("--config", required=True)
    curve.add_argument("--out")
    curve.add_argument("--seed", type=_seed_type, default=0, help="unused; accepted for uniformity")
    curve.set_defaults(handler=_cmd_rdf_curve)

    rate = sub.add_parser("min-rate", help="minimum sampling rate under a capacity")
    rate.add_argument("--config", required=True)
    rate.add_argument("--seed", type=_seed_type, default=0, help="unused; accepted for uniformity")
    rate.set_defaults(handler=_cmd_min_rate)

    sample = sub.add_parser("sample", help="generate a training dataset")
    sample.add_argument("--config", required=True)
    sample.add_argument("--out")
    sample.add_argument("--seed", type=_seed_type, required=True)
    sample.set_defaults(handler=_cmd_sample)

    emu = sub.add_parser("emulate", help="emulate a trajectory from a dataset")
    emu.add_argument("dataset", help="training dataset CSV")
    emu.add_argument("family", help="vector-field family JSON")
    emu.add_argument("--resolution", type=int, required=True, help="multinomial resolution")
    emu.add_argument("--seed", type=_seed_type, required=True)
    emu.add_argument("--out", required=True)
    emu.add_argument("--distortion", type=float, default=0.01)
    emu.set_defaults(handler=_cmd_emulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (LincoderError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
