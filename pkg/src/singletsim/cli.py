"""Command line entry point.

Verbs:

* ``run <config.toml>``: execute the configured protocol once, print the
  resolved setup and the metrics, optionally write result files.
* ``sweep <config.toml>``: execute once per grid point of the ``[sweep]``
  table, print one metrics row per point.
* ``presets list`` / ``presets dump <name>``: inspect the bundled presets;
  ``dump`` emits a runnable TOML config.
* ``validate <config.toml>``: parse and cross-check a config, print the
  resolved summary.

Exit codes: 0 on success, 2 on configuration or usage errors, 1 on
runtime failures. Output files are deterministic, plain-text CSV and
state files; they are written only when ``--out`` is given or the config
carries an ``[output]`` table.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from dataclasses import replace

from .analysis import simulate_spectrum
from .config import (
    ConfigError,
    RunConfig,
    apply_sweep_value,
    config_summary,
    load_config,
    preset_to_toml,
    save_state,
    write_metrics,
    write_populations,
    write_spectrum,
    write_sweep_metrics,
)
from .presets import get_preset, preset_names
from .protocols import initialize_2q, initialize_3q, initialize_nq, prepare_bell

__all__ = ["main", "execute_config"]


def execute_config(config: RunConfig):
    """Dispatch a resolved RunConfig to the matching protocol driver."""
    system, model = config.system, config.model
    if config.kind == "prepare-bell":
        return prepare_bell(
            system, model, config.variant, config.locks[0], ideal=config.ideal
        )
    if config.kind == "initialize-2q":
        return initialize_2q(
            system, model, config.locks[0],
            ideal=config.ideal, strict_gradient=config.strict_gradient,
        )
    if config.kind == "initialize-3q":
        return initialize_3q(
            system, model, config.locks,
            cnot_fidelity=config.cnot_fidelity,
            ideal=config.ideal, strict_gradient=config.strict_gradient,
        )
    return initialize_nq(
        system, model,
        locks=config.locks,
        cnot_fidelity=config.cnot_fidelity,
        h_fidelity=config.h_fidelity,
        target=config.target or None,
        ideal=config.ideal, strict_gradient=config.strict_gradient,
    )


def _load_with_flags(args) -> RunConfig:
    try:
        config = load_config(args.config)
    except FileNotFoundError as exc:
        raise ConfigError("(file)", f"cannot read {args.config}: {exc}") from exc
    return replace(
        config,
        ideal=config.ideal or args.ideal,
        strict_gradient=config.strict_gradient or args.strict_gradient,
    )


def _out_directory(args, config: RunConfig) -> str:
    if args.out:
        return args.out
    if config.output.enabled:
        return config.output.directory
    return None


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "-", label).strip("-").lower()


def _write_run_outputs(directory: str, config: RunConfig, result) -> None:
    os.makedirs(directory, exist_ok=True)
    write_metrics(os.path.join(directory, "metrics.csv"), result.metrics)
    save_state(os.path.join(directory, "final_state.txt"), result.final)
    write_populations(
        os.path.join(directory, "populations.csv"), result.final, config.system.n
    )
    if config.output.snapshots:
        for k, (label, state) in enumerate(result.snapshots):
            name = f"state_{k:02d}_{_slug(label)}.txt"
            save_state(os.path.join(directory, name), state)
    if config.output.spectra:
        spectrum = simulate_spectrum(result.final, config.system)
        write_spectrum(os.path.join(directory, "spectrum.csv"), spectrum)


def _print_metrics(metrics: dict) -> None:
    for key in sorted(metrics):
        print(f"{key} = {metrics[key]!r}")


def cmd_run(args) -> int:
    config = _load_with_flags(args)
    print(config_summary(config))
    result = execute_config(config)
    print(f"target: {result.target_label or '(none)'}")
    _print_metrics(result.metrics)
    directory = _out_directory(args, config)
    if directory:
        _write_run_outputs(directory, config, result)
        print(f"wrote {directory}/")
    return 0


def cmd_sweep(args) -> int:
    config = _load_with_flags(args)
    if config.sweep is None:
        raise ConfigError("sweep", "sweep command needs a [sweep] table")
    print(config_summary(config))
    rows = []
    for k, value in enumerate(config.sweep.values):
        result = execute_config(apply_sweep_value(config, value))
        row = {"index": k, "value": value}
        row.update(result.metrics)
        rows.append(row)
        cells = ", ".join(f"{key}={result.metrics[key]:.6f}" for key in sorted(result.metrics))
        print(f"[{k}] {config.sweep.parameter} = {value:g}: {cells}")
    directory = _out_directory(args, config)
    if directory:
        os.makedirs(directory, exist_ok=True)
        write_sweep_metrics(
            os.path.join(directory, "sweep.csv"), config.sweep.parameter, rows
        )
        print(f"wrote {directory}/sweep.csv")
    return 0


def cmd_presets(args) -> int:
    if args.action == "list":
        for name in preset_names():
            print(f"{name}: {get_preset(name).description}")
        return 0
    try:
        preset = get_preset(args.name)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 2
    print(preset_to_toml(preset))
    return 0


def cmd_validate(args) -> int:
    try:
        config = load_config(args.config)
    except FileNotFoundError as exc:
        raise ConfigError("(file)", f"cannot read {args.config}: {exc}") from exc
    print(config_summary(config))
    print("ok")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="singletsim",
        description="Density-matrix simulator of singlet-state initialization "
        "protocols for small NMR registers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_flags(p):
        p.add_argument("config", help="TOML run configuration")
        p.add_argument("--out", help="directory for result files", default=None)
        p.add_argument(
            "--ideal", action="store_true",
            help="replace locks by the projective filter and make gates exact",
        )
        p.add_argument(
            "--strict-gradient", action="store_true",
            help="gradient crush removes zero-quantum coherences too",
        )

    p_run = sub.add_parser("run", help="execute a configured protocol once")
    add_run_flags(p_run)
    p_run.set_defaults(handler=cmd_run)

    p_sweep = sub.add_parser("sweep", help="execute over the [sweep] grid")
    add_run_flags(p_sweep)
    p_sweep.set_defaults(handler=cmd_sweep)

    p_presets = sub.add_parser("presets", help="inspect bundled presets")
    sub_presets = p_presets.add_subparsers(dest="action", required=True)
    p_list = sub_presets.add_parser("list", help="list preset names")
    p_list.set_defaults(handler=cmd_presets)
    p_dump = sub_presets.add_parser("dump", help="emit a preset as a TOML config")
    p_dump.add_argument("name")
    p_dump.set_defaults(handler=cmd_presets)

    p_val = sub.add_parser("validate", help="parse and cross-check a config")
    p_val.add_argument("config")
    p_val.set_defaults(handler=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
