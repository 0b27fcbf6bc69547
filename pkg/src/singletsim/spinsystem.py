"""Spin-register description, spin operators, and the standard states.

Conventions, fixed across the whole package:

* Spin 1 is the leftmost tensor factor, so it is the most significant bit
  of a computational basis index: ``|010>`` means spin 1 in ``|0>``, spin 2
  in ``|1>``, spin 3 in ``|0>``.
* ``|0>`` is the +1/2 eigenstate of I_z.
* Spin operators are one-half Pauli matrices; a 2*pi rotation therefore
  picks up the spin-1/2 spinor sign.
* All frequencies are plain Hz. Time evolution is exp(-i 2 pi H t), see
  :mod:`singletsim.dynamics`.
* Full density matrices are carried, identity background included. The
  traceless deviation is a view (:meth:`DensityMatrix.deviation`), never
  the stored representation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "MAX_SPINS",
    "SpinSystem",
    "DensityMatrix",
    "Operator",
    "SingletTripletBasis",
    "spin_operator",
    "collective_operator",
    "equilibrium_state",
    "pseudopure_state",
    "singlet_triplet_states",
    "pair_state_projector",
    "singlet_projector",
    "embed_pair_operator",
    "partial_trace",
    "basis_index",
    "basis_label",
    "bell_state",
]

# Dense matrices are the contract; 2^8 = 256 is the largest dimension we accept.
MAX_SPINS = 8

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-10

_PAULI_HALF = {
    "x": 0.5 * np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": 0.5 * np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "z": 0.5 * np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


def _frozen_array(values, dtype=float) -> np.ndarray:
    out = np.array(values, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SpinSystem:
    """Static description of a register of coupled spin-1/2 nuclei.

    Parameters
    ----------
    n:
        Spin count, 1 <= n <= 8.
    shifts:
        Chemical-shift offsets in Hz, one per spin (rotating-frame values).
        Defaults to all zero.
    couplings:
        Symmetric n x n scalar-coupling matrix in Hz with zero diagonal.
        Defaults to all zero.
    epsilon:
        Signed per-spin polarization factors. Positive epsilon means surplus
        population in ``|0>`` (the I_z = +1/2 state). Defaults to 1e-4 each.
    """

    n: int
    shifts: np.ndarray = None
    couplings: np.ndarray = None
    epsilon: np.ndarray = None

    def __post_init__(self):
        n = self.n
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise ValueError("spin count n must be an integer >= 1")
        if n > MAX_SPINS:
            raise ValueError(
                f"registers larger than {MAX_SPINS} spins are refused: "
                f"n={n} means a dense {2 ** n} x {2 ** n} state"
            )
        shifts = np.zeros(n) if self.shifts is None else np.asarray(self.shifts, dtype=float)
        if shifts.shape != (n,):
            raise ValueError(f"shifts must have length n={n}")
        couplings = (
            np.zeros((n, n)) if self.couplings is None else np.asarray(self.couplings, dtype=float)
        )
        if couplings.shape != (n, n):
            raise ValueError(f"couplings must be an {n} x {n} matrix")
        if not np.allclose(couplings, couplings.T, atol=1e-12):
            raise ValueError("couplings must be symmetric")
        if np.any(np.abs(np.diag(couplings)) > 1e-12):
            raise ValueError("couplings must have zero diagonal")
        epsilon = (
            np.full(n, 1e-4) if self.epsilon is None else np.asarray(self.epsilon, dtype=float)
        )
        if epsilon.shape != (n,):
            raise ValueError(f"epsilon must have length n={n}")
        object.__setattr__(self, "shifts", _frozen_array(shifts))
        object.__setattr__(self, "couplings", _frozen_array(couplings))
        object.__setattr__(self, "epsilon", _frozen_array(epsilon))

    @property
    def dim(self) -> int:
        return 1 << self.n

    def check_spin(self, j: int) -> int:
        if not 1 <= j <= self.n:
            raise ValueError(f"spin index {j} out of range 1..{self.n}")
        return int(j)

    def check_pair(self, pair: Sequence[int]) -> tuple:
        i, j = (int(p) for p in pair)
        self.check_spin(i)
        self.check_spin(j)
        if i == j:
            raise ValueError("pair indices must be distinct")
        return (i, j)

    def coupling(self, i: int, j: int) -> float:
        i, j = self.check_pair((i, j))
        return float(self.couplings[i - 1, j - 1])


def _spin_count(system) -> int:
    """Accept a SpinSystem or a bare spin count where only n matters."""
    if isinstance(system, SpinSystem):
        return system.n
    n = int(system)
    if not 1 <= n <= MAX_SPINS:
        raise ValueError(f"spin count must be in 1..{MAX_SPINS}")
    return n


def as_matrix(obj) -> np.ndarray:
    """Unwrap a DensityMatrix/Operator/Propagator-style ``.data`` holder.

    Plain ndarrays pass through unchanged (``ndarray.data`` is a memoryview,
    so a bare hasattr check would misfire on them).
    """
    if not isinstance(obj, np.ndarray) and isinstance(getattr(obj, "data", None), np.ndarray):
        obj = obj.data
    return np.asarray(obj, dtype=complex)


@dataclass(frozen=True)
class DensityMatrix:
    """A 2^n x 2^n state. Hermitian, unit trace, positive semidefinite.

    The invariants are enforced at construction so every channel output is
    re-checked; violations raise ValueError naming the broken invariant.
    """

    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise ValueError("density matrix must be square")
        dim = data.shape[0]
        n = dim.bit_length() - 1
        if dim != 1 << n or n < 1 or n > MAX_SPINS:
            raise ValueError(f"dimension {dim} is not 2^n with 1 <= n <= {MAX_SPINS}")
        if np.max(np.abs(data - data.conj().T)) > HERMITICITY_TOL:
            raise ValueError("density matrix is not Hermitian within 1e-12")
        if abs(np.trace(data) - 1.0) > TRACE_TOL:
            raise ValueError("density matrix trace differs from 1 by more than 1e-12")
        if np.linalg.eigvalsh(data).min() < EIGENVALUE_FLOOR:
            raise ValueError("density matrix has an eigenvalue below -1e-10")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.dim.bit_length() - 1

    def deviation(self) -> np.ndarray:
        """Traceless part, the only part visible to NMR observables."""
        return self.data - np.eye(self.dim) / self.dim

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.data)).copy()

    def transformed(self, u) -> "DensityMatrix":
        """Unitary conjugation U rho U+. ``u`` is a Propagator or matrix."""
        m = as_matrix(u)
        return DensityMatrix(m @ self.data @ m.conj().T)


@dataclass(frozen=True)
class Operator:
    """A plain operator with an optional Hermiticity promise."""

    data: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise ValueError("operator must be square")
        if self.hermitian and np.max(np.abs(data - data.conj().T)) > HERMITICITY_TOL:
            raise ValueError("operator flagged hermitian is not Hermitian within 1e-12")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return self.data.shape[0]


def _embed_single(n: int, j: int, mat2: np.ndarray) -> np.ndarray:
    left = np.eye(1 << (j - 1))
    right = np.eye(1 << (n - j))
    return np.kron(np.kron(left, mat2), right)


def spin_operator(system, j: int, axis: str) -> Operator:
    """Single-spin operator I_axis on spin j (1-based), identity elsewhere."""
    n = _spin_count(system)
    if not 1 <= j <= n:
        raise ValueError(f"spin index {j} out of range 1..{n}")
    if axis not in _PAULI_HALF:
        raise ValueError("axis must be one of 'x', 'y', 'z'")
    return Operator(_embed_single(n, j, _PAULI_HALF[axis]), hermitian=True)


def collective_operator(system, spins: Iterable[int], axis: str) -> Operator:
    """Sum of spin_operator over a non-empty subset of spins."""
    n = _spin_count(system)
    spins = sorted({int(s) for s in spins})
    if not spins:
        raise ValueError("spins subset must be non-empty")
    total = np.zeros((1 << n, 1 << n), dtype=complex)
    for j in spins:
        total += spin_operator(n, j, axis).data
    return Operator(total, hermitian=True)


def equilibrium_state(system: SpinSystem) -> DensityMatrix:
    """Thermal state in linearized form, 2^-n (1 + sum_j epsilon_j I_z^j).

    The identity background is kept explicitly. Positive epsilon puts the
    surplus population in ``|0>``.
    """
    n = system.n
    d = system.dim
    data = np.eye(d, dtype=complex)
    for j in range(1, n + 1):
        data += system.epsilon[j - 1] * spin_operator(n, j, "z").data
    return DensityMatrix(data / d)


def basis_index(label: str) -> int:
    """Computational basis index of a bitstring label, spin 1 leftmost."""
    if not label or any(c not in "01" for c in label):
        raise ValueError(f"not a basis label: {label!r}")
    return int(label, 2)


def basis_label(index: int, n: int) -> str:
    if not 0 <= index < (1 << n):
        raise ValueError(f"basis index {index} out of range for n={n}")
    return format(index, f"0{n}b")


def pseudopure_state(ket, n: int, eps_prime: float) -> DensityMatrix:
    """State 2^-n [(1 - eps') 1 + 2^n eps' |k><k|].

    ``ket`` is a basis index or a bitstring like ``"010"``. One population
    exceeds all the others, which stay equal; eps' = 0 gives the maximally
    mixed state and eps' = 1 the pure projector.
    """
    if isinstance(ket, str):
        ket = basis_index(ket)
    d = 1 << n
    if not 0 <= ket < d:
        raise ValueError(f"ket index {ket} out of range for n={n}")
    if not 0.0 <= eps_prime <= 1.0:
        raise ValueError("eps_prime must lie in [0, 1]")
    data = np.eye(d, dtype=complex) * (1.0 - eps_prime) / d
    data[ket, ket] += eps_prime
    return DensityMatrix(data)


@dataclass(frozen=True)
class SingletTripletBasis:
    """The four two-spin states, as vectors over the pair's own basis.

    Ordering of the 4-dim coordinates is the pair computational basis
    ``|00>, |01>, |10>, |11>`` with the first pair index as the high bit.
    """

    singlet: np.ndarray
    triplet_plus: np.ndarray
    triplet_zero: np.ndarray
    triplet_minus: np.ndarray

    def states(self) -> tuple:
        return (self.singlet, self.triplet_plus, self.triplet_zero, self.triplet_minus)


def singlet_triplet_states(pair: Sequence[int], n: int) -> SingletTripletBasis:
    """Singlet and triplet states of a pair inside an n-spin register.

    The vectors live on the pair subspace; use :func:`pair_state_projector`
    to embed them as full-register projectors (identity on spectators).
    """
    i, j = (int(p) for p in pair)
    if i == j:
        raise ValueError("pair indices must be distinct")
    for p in (i, j):
        if not 1 <= p <= n:
            raise ValueError(f"pair index {p} out of range 1..{n}")
    s = 1.0 / np.sqrt(2.0)
    return SingletTripletBasis(
        singlet=_frozen_array([0.0, s, -s, 0.0], dtype=complex),
        triplet_plus=_frozen_array([1.0, 0.0, 0.0, 0.0], dtype=complex),
        triplet_zero=_frozen_array([0.0, s, s, 0.0], dtype=complex),
        triplet_minus=_frozen_array([0.0, 0.0, 0.0, 1.0], dtype=complex),
    )


def _pair_subindices(n: int, pair: Sequence[int]):
    """For each full basis index: the pair's 2-bit subindex and the rest.

    Returns (r, s) where r in 0..3 encodes the pair bits (first pair index
    is the high bit of r) and s is the full index with the pair bits cleared,
    a stable key for the spectator configuration.
    """
    i, j = (int(p) for p in pair)
    d = 1 << n
    idx = np.arange(d)
    bi = (idx >> (n - i)) & 1
    bj = (idx >> (n - j)) & 1
    r = (bi << 1) | bj
    s = idx & ~((1 << (n - i)) | (1 << (n - j)))
    return r, s


def embed_pair_operator(mat4: np.ndarray, pair: Sequence[int], n: int) -> np.ndarray:
    """Lift a two-spin operator onto the full register, identity elsewhere.

    Works for any pair positions and ordering; the 4-dim basis is ordered
    with the first element of ``pair`` as the high bit.
    """
    mat4 = np.asarray(mat4, dtype=complex)
    if mat4.shape != (4, 4):
        raise ValueError("expected a 4 x 4 pair operator")
    r, s = _pair_subindices(n, pair)
    same_spectator = s[:, None] == s[None, :]
    return np.where(same_spectator, mat4[r[:, None], r[None, :]], 0.0)


def pair_state_projector(state, pair: Sequence[int], n: int) -> Operator:
    """Projector |v><v| on the pair subspace, tensor identity on spectators."""
    v = np.asarray(state, dtype=complex).reshape(4)
    return Operator(embed_pair_operator(np.outer(v, v.conj()), pair, n), hermitian=True)


def singlet_projector(pair: Sequence[int], n: int) -> Operator:
    basis = singlet_triplet_states(pair, n)
    return pair_state_projector(basis.singlet, pair, n)


def partial_trace(rho, keep: Sequence[int], n: int = None) -> np.ndarray:
    """Reduced matrix over the kept spins (1-based), in the order given."""
    data = as_matrix(rho)
    if n is None:
        n = data.shape[0].bit_length() - 1
    keep = [int(k) for k in keep]
    if len(set(keep)) != len(keep) or not keep:
        raise ValueError("keep must be a non-empty list of distinct spins")
    for k in keep:
        if not 1 <= k <= n:
            raise ValueError(f"spin index {k} out of range 1..{n}")
    tensor = data.reshape((2,) * (2 * n))
    drop = [j for j in range(1, n + 1) if j not in keep]
    for j in sorted(drop, reverse=True):
        tensor = np.trace(tensor, axis1=j - 1, axis2=j - 1 + tensor.ndim // 2)
    # Axes now follow the original relative order of the kept spins.
    remaining = sorted(keep)
    m = len(keep)
    perm = [remaining.index(k) for k in keep]
    tensor = tensor.transpose(perm + [m + p for p in perm])
    return tensor.reshape((1 << m, 1 << m))


def bell_state(variant: str) -> np.ndarray:
    """Two-spin Bell state vector: 'psi+', 'phi+' or 'phi-'."""
    s = 1.0 / np.sqrt(2.0)
    table = {
        "psi+": [0.0, s, s, 0.0],
        "phi+": [s, 0.0, 0.0, s],
        "phi-": [s, 0.0, 0.0, -s],
    }
    if variant not in table:
        raise ValueError(f"unknown Bell variant {variant!r}, expected psi+, phi+ or phi-")
    return _frozen_array(table[variant], dtype=complex)
