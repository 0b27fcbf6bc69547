"""Run configuration: TOML schema, validation, and structured text output.

The accepted schema (see README for the full field reference):

* ``[system]``: n, shifts, couplings (full matrix), optional epsilon.
* ``[model]``: t1, t2, optional t_lock_coh, and one ``[[model.singlet_pairs]]``
  per locked pair with pair, ts, optional t_lock_triplet.
* ``[protocol]``: either ``preset = "<name>"`` or ``kind`` plus
  ``[[protocol.locks]]``; optional cnot_fidelity, h_fidelity, target,
  variant (Bell preparation).
* ``[options]``: ideal, strict_gradient.
* ``[sweep]``: parameter plus either values or start/stop/step.
* ``[output]``: directory, spectra, snapshots.

All output files are plain text and deterministic for a given config.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .channels import RelaxationModel, SpinLockSpec
from .presets import Preset, get_preset
from .spinsystem import DensityMatrix, SpinSystem, as_matrix, basis_label

__all__ = [
    "ConfigError",
    "RunConfig",
    "SweepSpec",
    "OutputSpec",
    "load_config",
    "parse_config",
    "sweep_values",
    "apply_sweep_value",
    "preset_to_toml",
    "config_summary",
    "save_state",
    "load_state",
    "write_metrics",
    "write_sweep_metrics",
    "write_populations",
    "write_spectrum",
]

PROTOCOL_KINDS = ("initialize-2q", "initialize-3q", "initialize-nq", "prepare-bell")

SWEEP_PARAMETERS = (
    "lock.duration",
    "lock1.duration",
    "lock2.duration",
    "model.ts",
    "model.t_lock_coh",
    "model.t_lock_triplet",
    "gate.cnot_fidelity",
    "gate.h_fidelity",
)


class ConfigError(Exception):
    """A schema or invariant violation, naming the offending field."""

    def __init__(self, fieldname: str, message: str):
        self.fieldname = fieldname
        super().__init__(f"config error in '{fieldname}': {message}")


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "out"
    spectra: bool = False
    snapshots: bool = False
    enabled: bool = False  # True when the config file carries an [output] table


@dataclass(frozen=True)
class RunConfig:
    system: SpinSystem
    model: RelaxationModel
    kind: str
    locks: tuple
    cnot_fidelity: float = 1.0
    h_fidelity: float = 1.0
    target: str = None
    variant: str = None
    ideal: bool = False
    strict_gradient: bool = False
    sweep: SweepSpec = None
    output: OutputSpec = field(default_factory=OutputSpec)
    preset_name: str = None


def _require(table: Mapping, key: str, where: str):
    if key not in table:
        raise ConfigError(f"{where}.{key}" if where else key, "missing required field")
    return table[key]


def _system_from_table(table: Mapping) -> SpinSystem:
    n = _require(table, "n", "system")
    shifts = _require(table, "shifts", "system")
    couplings = _require(table, "couplings", "system")
    epsilon = table.get("epsilon")
    try:
        return SpinSystem(n=int(n), shifts=shifts, couplings=couplings, epsilon=epsilon)
    except ValueError as exc:
        raise ConfigError("system", str(exc)) from exc


def _model_from_table(table: Mapping) -> RelaxationModel:
    t1 = _require(table, "t1", "model")
    t2 = _require(table, "t2", "model")
    pairs = table.get("singlet_pairs", [])
    ts = {}
    t_lock_triplet = {}
    for k, entry in enumerate(pairs):
        pair = _require(entry, "pair", f"model.singlet_pairs[{k}]")
        value = _require(entry, "ts", f"model.singlet_pairs[{k}]")
        ts[tuple(int(p) for p in pair)] = float(value)
        if "t_lock_triplet" in entry:
            t_lock_triplet[tuple(int(p) for p in pair)] = float(entry["t_lock_triplet"])
    try:
        return RelaxationModel(
            t1=t1,
            t2=t2,
            ts=ts,
            t_lock_coh=table.get("t_lock_coh"),
            t_lock_triplet=t_lock_triplet or None,
        )
    except ValueError as exc:
        raise ConfigError("model", str(exc)) from exc


def _locks_from_table(entries: Sequence[Mapping]) -> tuple:
    locks = []
    for k, entry in enumerate(entries):
        where = f"protocol.locks[{k}]"
        pairs = _require(entry, "pairs", where)
        duration = _require(entry, "duration", where)
        try:
            locks.append(
                SpinLockSpec(
                    pairs=tuple(tuple(int(p) for p in pair) for pair in pairs),
                    duration=float(duration),
                    amplitude=float(entry.get("amplitude", 2000.0)),
                    sequence_label=str(entry.get("sequence", "WALTZ-16")),
                )
            )
        except ValueError as exc:
            raise ConfigError(where, str(exc)) from exc
    return tuple(locks)


def _config_from_preset(preset: Preset) -> RunConfig:
    return RunConfig(
        system=preset.system,
        model=preset.model,
        kind=preset.protocol,
        locks=preset.locks,
        cnot_fidelity=preset.cnot_fidelity,
        h_fidelity=preset.h_fidelity,
        target=preset.target or None,
        preset_name=preset.name,
    )


def parse_config(raw: Mapping) -> RunConfig:
    """Validate a parsed TOML table into a RunConfig with defaults resolved."""
    protocol = raw.get("protocol", {})
    config = None
    if "preset" in protocol:
        name = protocol["preset"]
        try:
            config = _config_from_preset(get_preset(name))
        except KeyError as exc:
            raise ConfigError("protocol.preset", str(exc.args[0])) from exc
    if "system" in raw:
        system = _system_from_table(raw["system"])
        if config is None:
            config = RunConfig(system=system, model=None, kind="", locks=())
        else:
            config = replace(config, system=system)
    elif config is None:
        raise ConfigError("system", "missing required table (no preset given)")
    if "model" in raw:
        config = replace(config, model=_model_from_table(raw["model"]))
    elif config.model is None:
        raise ConfigError("model", "missing required table (no preset given)")

    if "kind" in protocol:
        kind = protocol["kind"]
        if kind not in PROTOCOL_KINDS:
            raise ConfigError(
                "protocol.kind", f"unknown kind {kind!r}, expected one of {PROTOCOL_KINDS}"
            )
        config = replace(config, kind=kind)
    if not config.kind:
        raise ConfigError("protocol.kind", "missing (give a preset or a kind)")
    if "locks" in protocol:
        config = replace(config, locks=_locks_from_table(protocol["locks"]))
    if not config.locks:
        raise ConfigError("protocol.locks", "at least one lock is required")
    if "cnot_fidelity" in protocol:
        config = replace(config, cnot_fidelity=float(protocol["cnot_fidelity"]))
    if "h_fidelity" in protocol:
        config = replace(config, h_fidelity=float(protocol["h_fidelity"]))
    if "target" in protocol:
        target = str(protocol["target"])
        if len(target) != config.system.n or any(c not in "01" for c in target):
            raise ConfigError("protocol.target", f"not a {config.system.n}-bit basis label")
        config = replace(config, target=target)
    if "variant" in protocol:
        variant = str(protocol["variant"])
        if variant not in ("psi+", "phi+", "phi-"):
            raise ConfigError("protocol.variant", "expected psi+, phi+ or phi-")
        config = replace(config, variant=variant)
    if config.kind == "prepare-bell" and config.variant is None:
        raise ConfigError("protocol.variant", "prepare-bell needs a Bell variant")

    for fid_name in ("cnot_fidelity", "h_fidelity"):
        value = getattr(config, fid_name)
        if not 0.0 < value <= 1.0:
            raise ConfigError(f"protocol.{fid_name}", "must lie in (0, 1]")

    # Cross checks: lock pairs must exist in the model and fit the register.
    n = config.system.n
    for k, lock in enumerate(config.locks):
        for pair in lock.pairs:
            if max(pair) > n:
                raise ConfigError(f"protocol.locks[{k}]", f"pair {pair} exceeds n={n}")
            try:
                config.model.ts_for(pair)
            except ValueError as exc:
                raise ConfigError("model.singlet_pairs", str(exc)) from exc

    needed_n = {"initialize-2q": 2, "initialize-3q": 3, "prepare-bell": 2}.get(config.kind)
    if needed_n is not None and n != needed_n:
        raise ConfigError("protocol.kind", f"{config.kind} needs n={needed_n}, got n={n}")
    expected_locks = {"initialize-2q": 1, "initialize-3q": 2}.get(config.kind)
    if config.kind == "initialize-nq":
        expected_locks = 1 if n == 2 else 2
    if expected_locks is not None and len(config.locks) != expected_locks:
        raise ConfigError(
            "protocol.locks",
            f"{config.kind} with n={n} takes exactly {expected_locks} lock(s), "
            f"got {len(config.locks)}",
        )

    options = raw.get("options", {})
    config = replace(
        config,
        ideal=bool(options.get("ideal", False)),
        strict_gradient=bool(options.get("strict_gradient", False)),
    )

    if "sweep" in raw:
        config = replace(config, sweep=_sweep_from_table(raw["sweep"]))

    out = raw.get("output", {})
    config = replace(
        config,
        output=OutputSpec(
            directory=str(out.get("directory", "out")),
            spectra=bool(out.get("spectra", False)),
            snapshots=bool(out.get("snapshots", False)),
            enabled="output" in raw,
        ),
    )
    return config


def _sweep_from_table(table: Mapping) -> SweepSpec:
    parameter = _require(table, "parameter", "sweep")
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigError(
            "sweep.parameter",
            f"unknown parameter {parameter!r}, expected one of {SWEEP_PARAMETERS}",
        )
    if "values" in table:
        values = tuple(float(v) for v in table["values"])
    else:
        try:
            start = float(_require(table, "start", "sweep"))
            stop = float(_require(table, "stop", "sweep"))
            step = float(_require(table, "step", "sweep"))
        except ConfigError:
            raise ConfigError("sweep", "give either values or start/stop/step") from None
        if step <= 0:
            raise ConfigError("sweep.step", "must be positive")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        values = tuple(start + k * step for k in range(count))
    if not values:
        raise ConfigError("sweep.values", "empty grid")
    return SweepSpec(parameter=parameter, values=values)


def sweep_values(config: RunConfig) -> tuple:
    if config.sweep is None:
        raise ConfigError("sweep", "config has no sweep table")
    return config.sweep.values


def apply_sweep_value(config: RunConfig, value: float) -> RunConfig:
    """A copy of the config with the sweep parameter set to ``value``."""
    parameter = config.sweep.parameter
    if parameter.startswith("lock"):
        head = parameter.split(".")[0]
        which = None if head == "lock" else int(head[4:]) - 1
        locks = []
        for k, lock in enumerate(config.locks):
            if which is None or which == k:
                locks.append(replace(lock, duration=float(value)))
            else:
                locks.append(lock)
        if which is not None and which >= len(config.locks):
            raise ConfigError("sweep.parameter", f"{parameter}: no lock {which + 1}")
        return replace(config, locks=tuple(locks))
    if parameter == "model.ts":
        ts = {pair: float(value) for pair in config.model.ts}
        return replace(config, model=replace(config.model, ts=ts))
    if parameter == "model.t_lock_coh":
        return replace(config, model=replace(config.model, t_lock_coh=float(value)))
    if parameter == "model.t_lock_triplet":
        return replace(config, model=replace(config.model, t_lock_triplet=float(value)))
    if parameter == "gate.cnot_fidelity":
        return replace(config, cnot_fidelity=float(value))
    if parameter == "gate.h_fidelity":
        return replace(config, h_fidelity=float(value))
    raise ConfigError("sweep.parameter", f"unhandled parameter {parameter!r}")


def load_config(path) -> RunConfig:
    """Parse and validate a TOML run configuration file."""
    with open(path, "rb") as handle:
        try:
            raw = tomllib.load(handle)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError("(toml)", str(exc)) from exc
    return parse_config(raw)


# ---------------------------------------------------------------------------
# Serialization helpers (deterministic plain text, diff-friendly).


def _toml_scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        text = repr(float(value))
        return text
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_toml_scalar(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def preset_to_toml(preset: Preset) -> str:
    """A complete, runnable TOML config equivalent to the preset."""
    lines = [f"# preset {preset.name}: {preset.description}"]
    for key, note in sorted(dict(preset.notes).items()):
        lines.append(f"# note {key}: {note}")
    lines += [
        "",
        "[system]",
        f"n = {preset.system.n}",
        f"shifts = {_toml_scalar(preset.system.shifts)}",
        f"couplings = {_toml_scalar([row for row in preset.system.couplings])}",
        f"epsilon = {_toml_scalar(preset.system.epsilon)}",
        "",
        "[model]",
        f"t1 = {_toml_scalar(preset.model.t1)}",
        f"t2 = {_toml_scalar(preset.model.t2)}",
    ]
    if preset.model.t_lock_coh is not None:
        lines.append(f"t_lock_coh = {_toml_scalar(preset.model.t_lock_coh)}")
    for pair in sorted(preset.model.ts):
        lines += [
            "",
            "[[model.singlet_pairs]]",
            f"pair = {_toml_scalar(list(pair))}",
            f"ts = {_toml_scalar(preset.model.ts[pair])}",
        ]
        triplet = preset.model.t_lock_triplet
        if isinstance(triplet, dict) and pair in triplet:
            lines.append(f"t_lock_triplet = {_toml_scalar(triplet[pair])}")
    lines += [
        "",
        "[protocol]",
        f"kind = {_toml_scalar(preset.protocol)}",
    ]
    if preset.cnot_fidelity != 1.0:
        lines.append(f"cnot_fidelity = {_toml_scalar(preset.cnot_fidelity)}")
    if preset.h_fidelity != 1.0:
        lines.append(f"h_fidelity = {_toml_scalar(preset.h_fidelity)}")
    if preset.target:
        lines.append(f"target = {_toml_scalar(preset.target)}")
    for lock in preset.locks:
        lines += [
            "",
            "[[protocol.locks]]",
            f"pairs = {_toml_scalar([list(p) for p in lock.pairs])}",
            f"duration = {_toml_scalar(lock.duration)}",
            f"amplitude = {_toml_scalar(lock.amplitude)}",
            f"sequence = {_toml_scalar(lock.sequence_label)}",
        ]
    lines.append("")
    return "\n".join(lines)


def config_summary(config: RunConfig) -> str:
    """Human-readable echo of a resolved configuration."""
    lines = [
        f"protocol: {config.kind}"
        + (f" (preset {config.preset_name})" if config.preset_name else ""),
        f"register: n={config.system.n}, "
        f"shifts={[float(s) for s in config.system.shifts]} Hz",
        f"model: t1={config.model.t1}, t2={config.model.t2}, ts={config.model.ts}",
    ]
    for k, lock in enumerate(config.locks, start=1):
        lines.append(
            f"lock {k}: pairs={lock.pairs}, duration={lock.duration} s, "
            f"amplitude={lock.amplitude} Hz ({lock.sequence_label})"
        )
    if config.kind == "prepare-bell":
        lines.append(f"bell variant: {config.variant}")
    elif config.target:
        lines.append(f"target: |{config.target}>")
    lines.append(
        f"fidelities: cnot={config.cnot_fidelity}, h={config.h_fidelity}; "
        f"ideal={config.ideal}, strict_gradient={config.strict_gradient}"
    )
    if config.sweep:
        lines.append(
            f"sweep: {config.sweep.parameter} over {len(config.sweep.values)} values "
            f"{list(config.sweep.values)}"
        )
    lines.append(f"output: {config.output.directory}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# State and metrics files.

_STATE_HEADER = "# singletsim density matrix"


def save_state(path, state) -> None:
    """Write a density matrix as plain text, one element per line.

    Format: a header, ``dim D``, then ``row col real imag`` with full-float
    repr values, so a read back reproduces the matrix exactly.
    """
    data = as_matrix(state)
    d = data.shape[0]
    lines = [_STATE_HEADER, f"dim {d}"]
    for a in range(d):
        for b in range(d):
            value = complex(data[a, b])
            lines.append(f"{a} {b} {value.real!r} {value.imag!r}")
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")


def load_state(path) -> DensityMatrix:
    with open(path) as handle:
        lines = [line.strip() for line in handle if line.strip()]
    if not lines or lines[0] != _STATE_HEADER:
        raise ValueError(f"{path}: not a singletsim state file")
    if not lines[1].startswith("dim "):
        raise ValueError(f"{path}: missing dim line")
    d = int(lines[1].split()[1])
    data = np.zeros((d, d), dtype=complex)
    for line in lines[2:]:
        a, b, re, im = line.split()
        data[int(a), int(b)] = float(re) + 1j * float(im)
    return DensityMatrix(data)


def write_metrics(path, metrics: Mapping) -> None:
    lines = ["name,value"]
    for key in sorted(metrics):
        lines.append(f"{key},{metrics[key]!r}")
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")


def write_sweep_metrics(path, parameter: str, rows: Sequence[Mapping]) -> None:
    keys = sorted({k for row in rows for k in row if k not in ("index", "value")})
    header = ["index", parameter] + keys
    lines = [",".join(header)]
    for row in rows:
        cells = [str(row["index"]), repr(row["value"])]
        cells += [repr(row.get(k, float("nan"))) for k in keys]
        lines.append(",".join(cells))
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")


def write_populations(path, state, n: int) -> None:
    pops = np.real(np.diag(as_matrix(state)))
    lines = ["index,label,population"]
    for k, p in enumerate(pops):
        lines.append(f"{k},{basis_label(k, n)},{float(p)!r}")
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")


def write_spectrum(path, spectrum) -> None:
    lines = ["frequency_hz,real,imag"]
    for f, a in zip(spectrum.frequencies, spectrum.amplitudes):
        lines.append(f"{float(f)!r},{float(a.real)!r},{float(a.imag)!r}")
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")
