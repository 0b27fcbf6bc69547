"""Named register presets bundling system, relaxation model, and schedule.

Shift and coupling values in these presets are PLACEHOLDERS, not measured
molecular parameters: they are chosen to be plausible for the named proton
systems and to keep every protocol result insensitive to their exact
values (the composite gates are exact by construction). Replace them per
experiment through the config file when line positions matter.

Relaxation constants and lock durations are the calibrated operating
points this package's reference bands are checked at; see each preset's
notes for the free parameters that were calibrated (t_lock_triplet, the
3-spin spectator t1) and why.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .channels import RelaxationModel, SpinLockSpec
from .protocols import (
    ProtocolResult,
    build_standard_schedule,
    initialize_2q,
    initialize_3q,
    initialize_nq,
    prepare_bell,
    standard_target,
)
from .spinsystem import SpinSystem

__all__ = ["Preset", "preset_names", "get_preset", "run_preset"]


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    system: SpinSystem
    model: RelaxationModel
    locks: tuple
    protocol: str  # 'initialize-2q' | 'initialize-3q' | 'initialize-nq'
    cnot_fidelity: float = 1.0
    h_fidelity: float = 1.0
    target: str = ""
    notes: Mapping = field(default_factory=dict)

    def schedule(self):
        return build_standard_schedule(
            self.system.n,
            self.locks,
            cnot_fidelity=self.cnot_fidelity,
            h_fidelity=self.h_fidelity,
        )


def _two_spin() -> Preset:
    system = SpinSystem(
        n=2,
        shifts=(112.5, -112.5),
        couplings=((0.0, 4.0), (4.0, 0.0)),
        epsilon=(1e-4, 1e-4),
    )
    model = RelaxationModel(
        t1=(5.4, 5.4),
        t2=(2.0, 2.0),
        ts={(1, 2): 16.2},
        t_lock_triplet={(1, 2): 4.5},
    )
    lock = SpinLockSpec(pairs=((1, 2),), duration=12.4, amplitude=2000.0)
    return Preset(
        name="2q-bromothiophene",
        description="Two-proton register; singlet pair (1,2), one 12.4 s lock, target |01>.",
        system=system,
        model=model,
        locks=(lock,),
        protocol="initialize-2q",
        target="01",
        notes={
            "placeholders": "shifts and J are plausible placeholders, not measured values",
            "t_lock_triplet": "4.5 s, calibrated; the lock dissipates triplet imbalance "
            "faster than plain t1 would",
        },
    )


def _three_spin() -> Preset:
    system = SpinSystem(
        n=3,
        shifts=(180.0, 0.0, -180.0),
        couplings=(
            (0.0, 1.5, 11.6),
            (1.5, 0.0, 17.9),
            (11.6, 17.9, 0.0),
        ),
        epsilon=(1e-4, 1e-4, 1e-4),
    )
    model = RelaxationModel(
        t1=(6.0, 6.0, 6.0),
        t2=(2.0, 2.0, 2.0),
        ts={(1, 2): 18.0},
        t_lock_triplet={(1, 2): 2.5},
    )
    locks = (
        SpinLockSpec(pairs=((1, 2),), duration=6.3, amplitude=500.0),
        SpinLockSpec(pairs=((1, 2),), duration=6.3, amplitude=500.0),
    )
    return Preset(
        name="3q-acrylonitrile",
        description="Three-proton register; singlet pair (1,2), spectator-controlled NOT "
        "between two 6.3 s locks, target |010>.",
        system=system,
        model=model,
        locks=locks,
        protocol="initialize-3q",
        cnot_fidelity=0.96,
        target="010",
        notes={
            "placeholders": "shifts and J are plausible placeholders, not measured values",
            "spectator_t1": "6 s for spin 3, a free parameter (only the pair's t1 is "
            "pinned at roughly a third of the 18 s singlet constant)",
            "t_lock_triplet": "2.5 s, calibrated; the model's diagonal-correlation "
            "ceiling over both free parameters is about 0.983 (see README)",
        },
    )


def _four_spin() -> Preset:
    system = SpinSystem(
        n=4,
        shifts=(150.0, 50.0, -50.0, -150.0),
        couplings=(
            (0.0, 8.0, 0.5, 0.3),
            (8.0, 0.0, 1.5, 0.5),
            (0.5, 1.5, 0.0, 8.0),
            (0.3, 0.5, 8.0, 0.0),
        ),
        epsilon=(1e-4, 1e-4, 1e-4, 1e-4),
    )
    model = RelaxationModel(
        t1=(3.0, 3.0, 3.0, 3.0),
        t2=(1.5, 1.5, 1.5, 1.5),
        ts={(1, 2): 6.0, (3, 4): 6.0},
        t_lock_triplet={(1, 2): 0.4, (3, 4): 0.4},
    )
    locks = (
        SpinLockSpec(pairs=((1, 2), (3, 4)), duration=4.5, amplitude=2000.0),
        SpinLockSpec(pairs=((1, 2), (3, 4)), duration=2.0, amplitude=2000.0),
    )
    return Preset(
        name="aspirin-4q",
        description="Four-proton register; pairs (1,2) and (3,4) locked together, "
        "boundary gate block, target |1001>.",
        system=system,
        model=model,
        locks=locks,
        protocol="initialize-nq",
        cnot_fidelity=0.94,
        h_fidelity=0.98,
        target="1001",
        notes={
            "placeholders": "shifts and J are plausible placeholders, not measured values",
            "h_gate_duration_s": "8.2 (metadata only; gate durations never enter the "
            "relaxation model, only lock durations do)",
            "t_lock_triplet": "0.4 s, calibrated; see README for the correlation ceiling "
            "of this schedule",
            "lock_order": "the longer lock (4.5 s) runs before the gate block, the "
            "shorter (2 s) after it",
        },
    )


_PRESETS = {p.name: p for p in (_two_spin(), _three_spin(), _four_spin())}


def preset_names() -> list:
    return sorted(_PRESETS)


def get_preset(name: str) -> Preset:
    if name not in _PRESETS:
        known = ", ".join(preset_names())
        raise KeyError(f"unknown preset {name!r}; known presets: {known}")
    return _PRESETS[name]


def run_preset(
    name: str,
    ideal: bool = False,
    strict_gradient: bool = False,
    bell_variant: str = None,
) -> ProtocolResult:
    """Execute a preset's protocol and return the result.

    ``bell_variant`` switches a 2-spin preset to Bell-state preparation.
    """
    preset = get_preset(name)
    if bell_variant is not None:
        if preset.system.n != 2:
            raise ValueError("Bell preparation needs a 2-spin preset")
        return prepare_bell(
            preset.system, preset.model, bell_variant, preset.locks[0], ideal=ideal
        )
    if preset.protocol == "initialize-2q":
        return initialize_2q(
            preset.system, preset.model, preset.locks[0],
            ideal=ideal, strict_gradient=strict_gradient,
        )
    if preset.protocol == "initialize-3q":
        return initialize_3q(
            preset.system, preset.model, preset.locks,
            cnot_fidelity=preset.cnot_fidelity,
            ideal=ideal, strict_gradient=strict_gradient,
        )
    return initialize_nq(
        preset.system, preset.model,
        locks=preset.locks,
        cnot_fidelity=preset.cnot_fidelity,
        h_fidelity=preset.h_fidelity,
        target=preset.target or standard_target(preset.system.n),
        ideal=ideal, strict_gradient=strict_gradient,
    )
