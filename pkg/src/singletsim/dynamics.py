"""Hamiltonians, propagators, and the composite gate library.

Products written here follow the standard propagator convention: in
``a @ b @ c`` the rightmost factor acts first on the state. Global phases
are never normalized away; state comparisons elsewhere always go through
overlap magnitudes or deviation correlations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .spinsystem import (
    SpinSystem,
    _spin_count,
    collective_operator,
    spin_operator,
)

__all__ = [
    "Hamiltonian",
    "Propagator",
    "zeeman_hamiltonian",
    "effective_hamiltonian",
    "propagate",
    "pulse",
    "zz_evolution",
    "differential_z_rotation",
    "singlet_order_preparation",
    "singlet_readout",
    "singlet_to_pseudopure",
    "bell_rotation",
    "bell_rotation_via_shift",
    "cnot",
    "pseudo_hadamard",
    "pseudo_hadamard_inverse",
    "not_gate",
]

UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class Hamiltonian:
    """Hermitian generator in Hz units, with a provenance label."""

    data: np.ndarray
    label: str = ""

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise ValueError("hamiltonian must be square")
        if np.max(np.abs(data - data.conj().T)) > 1e-12:
            raise ValueError("hamiltonian is not Hermitian within 1e-12")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class Propagator:
    """Unitary evolution operator with a provenance label."""

    data: np.ndarray
    label: str = ""

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise ValueError("propagator must be square")
        d = data.shape[0]
        if np.max(np.abs(data @ data.conj().T - np.eye(d))) > UNITARITY_TOL:
            raise ValueError("propagator is not unitary within 1e-10")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def inverse(self) -> "Propagator":
        return Propagator(self.data.conj().T, label=f"inverse({self.label})")

    def __matmul__(self, other: "Propagator") -> "Propagator":
        return Propagator(self.data @ other.data, label=f"{self.label} . {other.label}")


def _generator_exponential(generator: np.ndarray, angle: float, label: str) -> Propagator:
    """exp(-i angle G) for Hermitian G, via eigendecomposition."""
    w, v = np.linalg.eigh(generator)
    data = (v * np.exp(-1j * angle * w)) @ v.conj().T
    return Propagator(data, label=label)


def zeeman_hamiltonian(system: SpinSystem, weak_coupling: bool = True) -> Hamiltonian:
    """Rotating-frame shift Hamiltonian, sum_j nu_j I_z^j, in Hz.

    With ``weak_coupling`` the secular coupling term sum_{j<k} J_jk I_z^j I_z^k
    is included; that is the form the spectrum simulator evolves under.
    """
    n = system.n
    h = np.zeros((system.dim, system.dim), dtype=complex)
    for j in range(1, n + 1):
        h += system.shifts[j - 1] * spin_operator(n, j, "z").data
    label = "zeeman"
    if weak_coupling:
        for j in range(1, n + 1):
            for k in range(j + 1, n + 1):
                jjk = system.couplings[j - 1, k - 1]
                if jjk != 0.0:
                    h += jjk * (
                        spin_operator(n, j, "z").data @ spin_operator(n, k, "z").data
                    )
        label = "zeeman+weak-j"
    return Hamiltonian(h, label=label)


def effective_hamiltonian(system: SpinSystem, pair: Sequence[int], rf_amplitude: float) -> Hamiltonian:
    """Pair Hamiltonian in the frame of an RF field at the pair's mean shift.

    (dnu/2)(I_z^i - I_z^j) + J I^i . I^j + rf_amplitude I_x^{i,j}, in Hz,
    identity on all spectators. dnu is the shift difference of the pair.
    With dnu = 0 and no RF this is the equivalence Hamiltonian J I^i . I^j,
    whose eigenbasis is the singlet/triplet quartet.
    """
    i, j = system.check_pair(pair)
    n = system.n
    dnu = system.shifts[i - 1] - system.shifts[j - 1]
    jij = system.couplings[i - 1, j - 1]
    h = 0.5 * dnu * (spin_operator(n, i, "z").data - spin_operator(n, j, "z").data)
    dot = np.zeros_like(h)
    for axis in ("x", "y", "z"):
        dot += spin_operator(n, i, axis).data @ spin_operator(n, j, axis).data
    h = h + jij * dot
    if rf_amplitude != 0.0:
        h = h + rf_amplitude * collective_operator(n, (i, j), "x").data
    return Hamiltonian(h, label=f"effective({i},{j})")


def propagate(h: Hamiltonian, t: float) -> Propagator:
    """exp(-i 2 pi H t) for H in Hz and t in seconds."""
    if t < 0:
        raise ValueError("evolution time must be >= 0")
    return _generator_exponential(h.data, 2.0 * np.pi * t, label=f"evolve[{h.label}, t={t}]")


def pulse(system, spins: Sequence[int], axis: str, angle: float) -> Propagator:
    """Ideal RF rotation exp(-i angle I_axis^{spins}); sign rides on the angle."""
    n = _spin_count(system)
    gen = collective_operator(n, spins, axis).data
    return _generator_exponential(gen, angle, label=f"pulse[{axis},{angle:g}]")


def zz_evolution(system, pair: Sequence[int], angle: float) -> Propagator:
    """Bilinear evolution exp(-i angle I_z^i I_z^j), implemented exactly.

    Equals free evolution under the weak-coupling term J I_z^i I_z^j for
    time angle / (2 pi J); the composite gates below use angle = pi, i.e.
    the 1/(2J) evolution.
    """
    n = _spin_count(system)
    i, j = (int(p) for p in pair)
    gen = spin_operator(n, i, "z").data @ spin_operator(n, j, "z").data
    return _generator_exponential(gen, angle, label=f"zz[{i},{j},{angle:g}]")


def differential_z_rotation(system, pair: Sequence[int], angle: float) -> Propagator:
    """exp(-i angle (I_z^i - I_z^j)), the pair's internal z rotation."""
    n = _spin_count(system)
    i, j = (int(p) for p in pair)
    gen = spin_operator(n, i, "z").data - spin_operator(n, j, "z").data
    return _generator_exponential(gen, angle, label=f"dz[{i},{j},{angle:g}]")


def singlet_order_preparation(system, pair: Sequence[int]) -> Propagator:
    """Five-factor pulse-and-delay product that turns longitudinal order of
    a pair into singlet-minus-central-triplet order.

    Acting by conjugation it maps I_z^i + I_z^j exactly onto
    P_singlet - P_triplet0, and it takes ``|00>`` to the singlet state.
    Factors act right to left.
    """
    n = _spin_count(system)
    i, j = (int(p) for p in pair)
    u = (
        differential_z_rotation(n, (i, j), np.pi / 4.0).data
        @ pulse(n, (i, j), "y", np.pi / 2.0).data
        @ differential_z_rotation(n, (i, j), np.pi / 2.0).data
        @ zz_evolution(n, (i, j), np.pi).data
        @ pulse(n, (i, j), "x", np.pi / 2.0).data
    )
    return Propagator(u, label=f"singlet-prep[{i},{j}]")


def singlet_readout(system, pair: Sequence[int]) -> Propagator:
    """Two-factor product that lifts singlet order into observable
    single-quantum coherence (a detection-side transformation)."""
    n = _spin_count(system)
    i, j = (int(p) for p in pair)
    u = (
        pulse(n, (i, j), "x", np.pi / 2.0).data
        @ differential_z_rotation(n, (i, j), np.pi / 4.0).data
    )
    return Propagator(u, label=f"singlet-readout[{i},{j}]")


def singlet_to_pseudopure(system, pair: Sequence[int]) -> Propagator:
    """Zero-quantum rotation taking the singlet onto the ``|01>`` basis state.

    Built as exp(+i pi/2 (I_x^i I_x^j + I_y^i I_y^j)) following a pair z
    rotation. It fixes both outer triplets, sends the central triplet onto
    ``|10>``, and satisfies |<01|U|S0>| = 1.
    """
    n = _spin_count(system)
    i, j = (int(p) for p in pair)
    gen = (
        spin_operator(n, i, "x").data @ spin_operator(n, j, "x").data
        + spin_operator(n, i, "y").data @ spin_operator(n, j, "y").data
    )
    zq = _generator_exponential(gen, -np.pi / 2.0, label="zq-rotation")
    u = zq.data @ differential_z_rotation(n, (i, j), np.pi / 4.0).data
    return Propagator(u, label=f"singlet-to-pseudopure[{i},{j}]")


def bell_rotation(system, variant: str, spin: int = 1) -> Propagator:
    """Rotation taking the singlet onto the requested Bell state.

    psi+ is a z rotation of one pair member; phi+ and phi- add or use a
    single-spin x rotation. Outputs are exact up to global phase.
    """
    n = _spin_count(system)
    z_half_turn = _generator_exponential(spin_operator(n, spin, "z").data, -np.pi, "z-pi")
    x_half_turn = _generator_exponential(spin_operator(n, spin, "x").data, -np.pi, "x-pi")
    if variant == "psi+":
        data = z_half_turn.data
    elif variant == "phi+":
        data = x_half_turn.data @ z_half_turn.data
    elif variant == "phi-":
        data = x_half_turn.data
    else:
        raise ValueError(f"unknown Bell variant {variant!r}, expected psi+, phi+ or phi-")
    return Propagator(data, label=f"bell[{variant}]")


def bell_rotation_via_shift(system: SpinSystem, variant: str, pair: Sequence[int] = (1, 2)) -> Propagator:
    """Bell rotation with the z part realized by chemical-shift evolution.

    Free evolution under the shifts alone for 1/(2 dnu) implements the pair's
    internal z half-turn up to phases outside the zero-quantum sector, so on
    the singlet manifold this agrees with :func:`bell_rotation` exactly.
    Requires a nonzero shift difference on the pair.
    """
    i, j = system.check_pair(pair)
    dnu = system.shifts[i - 1] - system.shifts[j - 1]
    if dnu == 0.0:
        raise ValueError("shift difference of the pair is zero, no shift-evolution z rotation")
    shift_only = zeeman_hamiltonian(system, weak_coupling=False)
    z_turn = propagate(shift_only, 1.0 / (2.0 * abs(dnu)))
    if variant == "psi+":
        data = z_turn.data
    elif variant == "phi+":
        x_half_turn = _generator_exponential(spin_operator(system.n, i, "x").data, -np.pi, "x-pi")
        data = x_half_turn.data @ z_turn.data
    elif variant == "phi-":
        data = _generator_exponential(spin_operator(system.n, i, "x").data, -np.pi, "x-pi").data
    else:
        raise ValueError(f"unknown Bell variant {variant!r}, expected psi+, phi+ or phi-")
    return Propagator(data, label=f"bell-shift[{variant}]")


def cnot(system, control: int, target: int, polarity: str = "on-1") -> Propagator:
    """Controlled NOT as an exact permutation matrix.

    ``polarity='on-1'`` flips the target when the control is ``|1>``;
    ``'on-0'`` (the open-circle convention) flips when the control is ``|0>``.
    """
    n = _spin_count(system)
    control, target = int(control), int(target)
    for s in (control, target):
        if not 1 <= s <= n:
            raise ValueError(f"spin index {s} out of range 1..{n}")
    if control == target:
        raise ValueError("control and target must differ")
    if polarity not in ("on-1", "on-0"):
        raise ValueError("polarity must be 'on-1' or 'on-0'")
    fire = 1 if polarity == "on-1" else 0
    d = 1 << n
    src = np.arange(d)
    cbit = (src >> (n - control)) & 1
    dst = np.where(cbit == fire, src ^ (1 << (n - target)), src)
    u = np.zeros((d, d), dtype=complex)
    u[dst, src] = 1.0
    return Propagator(u, label=f"cnot[{control}->{target},{polarity}]")


_PSEUDO_H = np.array([[1.0, 1.0], [-1.0, 1.0]], dtype=complex) / np.sqrt(2.0)


def pseudo_hadamard(system, spin: int) -> Propagator:
    """The h gate: |0> -> (|0> - |1>)/sqrt2, |1> -> (|0> + |1>)/sqrt2.

    Realized as exp(+i pi/2 I_y) on the target spin.
    """
    n = _spin_count(system)
    if not 1 <= spin <= n:
        raise ValueError(f"spin index {spin} out of range 1..{n}")
    from .spinsystem import _embed_single

    return Propagator(_embed_single(n, spin, _PSEUDO_H), label=f"h[{spin}]")


def pseudo_hadamard_inverse(system, spin: int) -> Propagator:
    return Propagator(pseudo_hadamard(system, spin).data.conj().T, label=f"h-inv[{spin}]")


def not_gate(system, spins: Sequence[int]) -> Propagator:
    """Simultaneous pi x pulse on the given spins (refocusing NOT)."""
    n = _spin_count(system)
    return Propagator(pulse(n, spins, "x", np.pi).data, label=f"not{tuple(spins)}")
