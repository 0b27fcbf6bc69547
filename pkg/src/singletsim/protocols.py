"""Initialization protocols: scripted sequences of gates, locks, and the
gradient crush, with snapshot capture and standard metrics.

The standard sequence family:

* 2 spins: singlet preparation on (1,2), one lock, conversion to ``|01>``,
  gradient.
* 3 spins: singlet preparation on (1,2), lock, a controlled NOT from the
  spectator spin 3 onto spin 2, second lock, conversion, gradient.
  Target ``|010>``.
* even n: singlet preparation on every neighboring pair, a simultaneous
  lock, a boundary gate block (controlled NOTs with open-circle polarity
  plus one pseudo-Hadamard per boundary), a second simultaneous lock,
  conversion on every pair with a refocusing NOT on pair one, gradient.
  Target ``|1001>`` for n = 4, extrapolated for larger even registers
  (validated against reference behavior only up to n = 4).

During every lock stage the spins outside the locked pairs relax freely
for the lock duration. In ideal mode locks become projective singlet
filters, gate fidelities are forced to 1, and spectator relaxation is
skipped, which drives each protocol to its exact target.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analysis import (
    correlation,
    diagonal_correlation,
    epsilon_prime,
    singlet_content,
)
from .channels import (
    RelaxationModel,
    SpinLockSpec,
    free_relaxation,
    gradient_crush,
    ideal_singlet_filter,
    noisy_gate,
    spin_lock,
)
from .dynamics import (
    bell_rotation,
    bell_rotation_via_shift,
    cnot,
    not_gate,
    pseudo_hadamard,
    singlet_order_preparation,
    singlet_readout,
    singlet_to_pseudopure,
)
from .spinsystem import (
    DensityMatrix,
    SpinSystem,
    basis_index,
    bell_state,
    equilibrium_state,
    pseudopure_state,
)

__all__ = [
    "Stage",
    "ProtocolResult",
    "build_standard_schedule",
    "standard_target",
    "execute_schedule",
    "initialize_2q",
    "initialize_3q",
    "initialize_nq",
    "prepare_bell",
    "detect_singlet",
]


@dataclass(frozen=True)
class Stage:
    """One declarative protocol step.

    kind is one of 'prepare', 'lock', 'gate', 'convert', 'crush'. The other
    fields are read per kind: pairs for prepare/convert, lock for lock,
    gate ('cnot' | 'h' | 'not') with its wiring and fidelity for gate.
    """

    kind: str
    pairs: tuple = ()
    lock: SpinLockSpec = None
    gate: str = ""
    control: int = 0
    target: int = 0
    polarity: str = "on-1"
    spins: tuple = ()
    fidelity: float = 1.0
    label: str = ""

    def describe(self) -> str:
        if self.label:
            return self.label
        if self.kind == "prepare":
            return "prepare" + "".join(str(p) for p in self.pairs)
        if self.kind == "lock":
            return f"lock[{self.lock.duration:g}s]"
        if self.kind == "gate":
            if self.gate == "cnot":
                return f"cnot[{self.control}->{self.target},{self.polarity}]"
            if self.gate == "h":
                return f"h[{self.target}]"
            return f"not{self.spins}"
        if self.kind == "convert":
            return "convert" + "".join(str(p) for p in self.pairs)
        return self.kind


@dataclass
class ProtocolResult:
    """Final state, labeled intermediate snapshots, and scalar metrics."""

    final: DensityMatrix
    snapshots: list
    metrics: dict
    target_label: str = ""

    def snapshot(self, label: str) -> DensityMatrix:
        for name, state in self.snapshots:
            if name == label:
                return state
        raise KeyError(f"no snapshot labeled {label!r}")


def _neighbor_pairs(n: int) -> tuple:
    return tuple((2 * k + 1, 2 * k + 2) for k in range(n // 2))


def standard_target(n: int) -> str:
    """Basis label the standard n-spin sequence initializes."""
    if n == 2:
        return "01"
    if n == 3:
        return "010"
    if n >= 4 and n % 2 == 0:
        return "10" + "01" * (n // 2 - 1)
    raise ValueError(f"no standard sequence for n={n}")


def build_standard_schedule(
    n: int,
    locks: Sequence[SpinLockSpec],
    cnot_fidelity: float = 1.0,
    h_fidelity: float = 1.0,
) -> tuple:
    """The standard stage list for a register of n spins.

    Two-spin registers take one lock; larger registers take two. The lock
    specs' pairs must cover the register's neighboring pairs (pair (1,2)
    for n = 3).
    """
    locks = tuple(locks)
    if n == 2:
        if len(locks) != 1:
            raise ValueError("the 2-spin sequence takes exactly one lock")
        return (
            Stage("prepare", pairs=((1, 2),)),
            Stage("lock", lock=locks[0], label="lock-1"),
            Stage("convert", pairs=((1, 2),)),
            Stage("crush"),
        )
    if len(locks) != 2:
        raise ValueError("sequences beyond 2 spins take exactly two locks")
    if n == 3:
        return (
            Stage("prepare", pairs=((1, 2),)),
            Stage("lock", lock=locks[0], label="lock-1"),
            Stage(
                "gate", gate="cnot", control=3, target=2, polarity="on-1",
                fidelity=cnot_fidelity,
            ),
            Stage("lock", lock=locks[1], label="lock-2"),
            Stage("convert", pairs=((1, 2),)),
            Stage("crush"),
        )
    if n % 2 != 0:
        raise ValueError(f"no standard sequence for odd n={n} beyond 3")
    pairs = _neighbor_pairs(n)
    stages = [
        Stage("prepare", pairs=pairs),
        Stage("lock", lock=locks[0], label="lock-1"),
    ]
    # Boundary block: join pair k to pair k+1 through the first spin of
    # pair k+1. Open-circle controlled NOTs; the pseudo-Hadamard reroutes
    # the shared spin between them.
    for k in range(len(pairs) - 1):
        left_last = pairs[k][1]
        right_first = pairs[k + 1][0]
        right_last = pairs[k + 1][1]
        stages.append(
            Stage(
                "gate", gate="cnot", control=left_last, target=right_first,
                polarity="on-0", fidelity=cnot_fidelity,
            )
        )
        stages.append(Stage("gate", gate="h", target=right_first, fidelity=h_fidelity))
        stages.append(
            Stage(
                "gate", gate="cnot", control=right_last, target=right_first,
                polarity="on-0", fidelity=cnot_fidelity,
            )
        )
    stages.append(Stage("lock", lock=locks[1], label="lock-2"))
    # Conversion with the refocusing NOT on pair one, which lands pair one
    # on |10> instead of |01>.
    stages.append(Stage("convert", pairs=(pairs[0],)))
    stages.append(Stage("gate", gate="not", spins=pairs[0]))
    for pair in pairs[1:]:
        stages.append(Stage("convert", pairs=(pair,)))
    stages.append(Stage("crush"))
    return tuple(stages)


def _apply_stage(
    rho: DensityMatrix,
    stage: Stage,
    system: SpinSystem,
    model: RelaxationModel,
    ideal: bool,
    strict_gradient: bool,
) -> DensityMatrix:
    if stage.kind == "prepare":
        for pair in stage.pairs:
            rho = rho.transformed(singlet_order_preparation(system, pair))
        return rho
    if stage.kind == "lock":
        spec = stage.lock
        if ideal:
            return ideal_singlet_filter(rho, spec.pairs)
        rho = spin_lock(rho, spec, model)
        spectators = [s for s in range(1, system.n + 1) if s not in spec.spins()]
        if spectators:
            rho = free_relaxation(rho, spec.duration, model, spins=spectators)
        return rho
    if stage.kind == "gate":
        if stage.gate == "cnot":
            u = cnot(system, stage.control, stage.target, stage.polarity)
        elif stage.gate == "h":
            u = pseudo_hadamard(system, stage.target)
        elif stage.gate == "not":
            u = not_gate(system, stage.spins)
        else:
            raise ValueError(f"unknown gate kind {stage.gate!r}")
        fid = 1.0 if ideal else stage.fidelity
        return noisy_gate(rho, u, fid)
    if stage.kind == "convert":
        for pair in stage.pairs:
            rho = rho.transformed(singlet_to_pseudopure(system, pair))
        return rho
    if stage.kind == "crush":
        return gradient_crush(rho, strict=strict_gradient)
    raise ValueError(f"unknown stage kind {stage.kind!r}")


def execute_schedule(
    system: SpinSystem,
    model: RelaxationModel,
    schedule: Sequence[Stage],
    target: str = None,
    ideal: bool = False,
    strict_gradient: bool = False,
) -> ProtocolResult:
    """Run a stage list from thermal equilibrium and collect metrics.

    Metrics always include the correlation and diagonal correlation against
    the pseudopure target (when given) and the retained polarization
    eps_prime of the final state.
    """
    rho = equilibrium_state(system)
    snapshots = [("equilibrium", rho)]
    for stage in schedule:
        if stage.lock is not None:
            for pair in stage.lock.pairs:
                system.check_pair(pair)
        rho = _apply_stage(rho, stage, system, model, ideal, strict_gradient)
        snapshots.append((stage.describe(), rho))
    metrics = {}
    if target is not None:
        idx = basis_index(target)
        reference = pseudopure_state(idx, system.n, 0.5)
        metrics["correlation"] = correlation(rho, reference)
        metrics["diagonal_correlation"] = diagonal_correlation(rho, reference)
        metrics["epsilon_prime"] = epsilon_prime(rho, idx)
    return ProtocolResult(rho, snapshots, metrics, target_label=target or "")


def _singlet_reference(pair, n: int) -> DensityMatrix:
    """Pure singlet density matrix on the pair, maximally mixed elsewhere."""
    from .spinsystem import singlet_projector

    proj = singlet_projector(pair, n).data
    d = 1 << n
    # Rank 2^(n-2) projector; normalize the pair part, keep spectators mixed.
    return DensityMatrix(proj / (d // 4) if n > 2 else proj)


def initialize_2q(
    system: SpinSystem,
    model: RelaxationModel,
    lock: SpinLockSpec,
    ideal: bool = False,
    strict_gradient: bool = False,
) -> ProtocolResult:
    """Two-spin initialization to the pseudopure ``|01>`` state."""
    if system.n != 2:
        raise ValueError("initialize_2q needs a 2-spin system")
    schedule = build_standard_schedule(2, [lock])
    result = execute_schedule(
        system, model, schedule, target="01", ideal=ideal, strict_gradient=strict_gradient
    )
    post_lock = result.snapshot("lock-1")
    result.metrics["singlet_correlation_post_lock"] = correlation(
        post_lock, _singlet_reference((1, 2), 2)
    )
    result.metrics["singlet_content_post_lock"] = singlet_content(post_lock, (1, 2))
    return result


def initialize_3q(
    system: SpinSystem,
    model: RelaxationModel,
    locks: Sequence[SpinLockSpec],
    cnot_fidelity: float = 0.96,
    ideal: bool = False,
    strict_gradient: bool = False,
) -> ProtocolResult:
    """Three-spin initialization to the pseudopure ``|010>`` state.

    The singlet pair is (1,2); spin 3 controls the NOT on spin 2 between
    the two locks. Metrics include the spectator populations p0 and p1
    entering the controlled-NOT branch split.
    """
    if system.n != 3:
        raise ValueError("initialize_3q needs a 3-spin system")
    schedule = build_standard_schedule(3, list(locks), cnot_fidelity=cnot_fidelity)
    result = execute_schedule(
        system, model, schedule, target="010", ideal=ideal, strict_gradient=strict_gradient
    )
    post_lock = result.snapshot("lock-1")
    from .spinsystem import partial_trace

    spectator = np.real(np.diag(partial_trace(post_lock.data, [3], 3)))
    result.metrics["p0"] = float(spectator[0])
    result.metrics["p1"] = float(spectator[1])
    result.metrics["singlet_content_post_lock"] = singlet_content(post_lock, (1, 2))
    return result


def initialize_nq(
    system: SpinSystem,
    model: RelaxationModel,
    schedule: Sequence[Stage] = None,
    locks: Sequence[SpinLockSpec] = None,
    cnot_fidelity: float = 1.0,
    h_fidelity: float = 1.0,
    target: str = None,
    ideal: bool = False,
    strict_gradient: bool = False,
) -> ProtocolResult:
    """General n-spin initialization from a declarative schedule.

    Either pass an explicit ``schedule`` or the ``locks`` (and fidelities)
    from which the standard schedule for system.n is built. The default
    target is :func:`standard_target`.
    """
    if schedule is None:
        if locks is None:
            raise ValueError("initialize_nq needs a schedule or lock specs")
        schedule = build_standard_schedule(
            system.n, list(locks), cnot_fidelity=cnot_fidelity, h_fidelity=h_fidelity
        )
    if target is None:
        target = standard_target(system.n)
    return execute_schedule(
        system, model, schedule, target=target, ideal=ideal, strict_gradient=strict_gradient
    )


def prepare_bell(
    system: SpinSystem,
    model: RelaxationModel,
    variant: str,
    lock: SpinLockSpec,
    ideal: bool = False,
    via_shift: bool = False,
) -> ProtocolResult:
    """Two-spin Bell-state preparation: through the lock, then a rotation.

    No gradient is applied (it would destroy the Bell coherences) and the
    conversion stage is skipped; the singlet is rotated directly. The
    metric is the deviation correlation against the pure Bell state.
    """
    if system.n != 2:
        raise ValueError("prepare_bell needs a 2-spin system")
    schedule = (
        Stage("prepare", pairs=((1, 2),)),
        Stage("lock", lock=lock, label="lock-1"),
    )
    result = execute_schedule(system, model, schedule, target=None, ideal=ideal)
    rotation = (
        bell_rotation_via_shift(system, variant)
        if via_shift
        else bell_rotation(system, variant)
    )
    final = result.final.transformed(rotation)
    result.snapshots.append((f"bell[{variant}]", final))
    result.final = final
    ket = bell_state(variant)
    result.metrics["correlation"] = correlation(final, DensityMatrix(np.outer(ket, ket.conj())))
    result.target_label = variant
    return result


def detect_singlet(rho, system: SpinSystem, pair) -> DensityMatrix:
    """Apply the readout transformation that exposes singlet order as
    observable single-quantum coherence; feed the result to the spectrum
    simulator."""
    rho = rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)
    return rho.transformed(singlet_readout(system, pair))
