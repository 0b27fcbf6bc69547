"""Independent reference implementations backing the test suite.

Nothing in this module imports the package under test. Exponentials go
through scipy.linalg.expm, embeddings are explicit Kronecker chains, and
classifiers are plain loops, so agreement between package and oracle is
meaningful rather than circular.

Conventions mirror the package contract: spin 1 is the leftmost tensor
factor (most significant bit), |0> is the I_z +1/2 state, spin operators
are half Pauli matrices.
"""

import numpy as np
from scipy.linalg import expm

SX = 0.5 * np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SY = 0.5 * np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SZ = 0.5 * np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
ID2 = np.eye(2, dtype=complex)
PAULI_HALF = {"x": SX, "y": SY, "z": SZ}

SINGLET = np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / np.sqrt(2.0)
TRIPLET_PLUS = np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)
TRIPLET_ZERO = np.array([0.0, 1.0, 1.0, 0.0], dtype=complex) / np.sqrt(2.0)
TRIPLET_MINUS = np.array([0.0, 0.0, 0.0, 1.0], dtype=complex)


def kron_chain(mats):
    out = np.array([[1.0]], dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def embedded(n, j, mat2):
    """mat2 on spin j (1-based, spin 1 leftmost), identity on the rest."""
    return kron_chain([mat2 if k == j else ID2 for k in range(1, n + 1)])


def single_spin(n, j, axis):
    return embedded(n, j, PAULI_HALF[axis])


def collective(n, spins, axis):
    total = np.zeros((1 << n, 1 << n), dtype=complex)
    for j in spins:
        total = total + single_spin(n, j, axis)
    return total


def dot_coupling(n, i, j):
    """I^i . I^j embedded in an n-spin register."""
    total = np.zeros((1 << n, 1 << n), dtype=complex)
    for axis in ("x", "y", "z"):
        total = total + single_spin(n, i, axis) @ single_spin(n, j, axis)
    return total


def rotation_of(generator, angle):
    """exp(-i angle G), the pulse convention, via scipy."""
    return expm(-1j * angle * np.asarray(generator, dtype=complex))


def evolution_of(hamiltonian_hz, t_seconds):
    """exp(-i 2 pi H t), the free-evolution convention, via scipy."""
    return expm(-2j * np.pi * t_seconds * np.asarray(hamiltonian_hz, dtype=complex))


def basis_ket(n, label):
    v = np.zeros(1 << n, dtype=complex)
    v[int(label, 2)] = 1.0
    return v


def projector(vec):
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj())


def random_density(rng, dim):
    """Full-rank random state (Wishart construction)."""
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_pure_density(rng, dim):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    return projector(v)


def random_hermitian(rng, dim, scale=1.0):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * 0.5 * (a + a.conj().T)


def cnot_truth_table(n, control, target, fire):
    """Controlled NOT from its truth table: flip target when the control
    bit equals ``fire``. Bit 1 is the leftmost (most significant)."""
    d = 1 << n
    u = np.zeros((d, d), dtype=complex)
    for src in range(d):
        bits = [(src >> (n - k)) & 1 for k in range(1, n + 1)]
        if bits[control - 1] == fire:
            bits[target - 1] ^= 1
        dst = 0
        for b in bits:
            dst = (dst << 1) | b
        u[dst, src] = 1.0
    return u


def coherence_order_of(n, a, b):
    """Order of matrix element (a, b): z quantum number of ket a minus
    that of ket b. Bit value 0 counts +1/2, bit value 1 counts -1/2."""
    za = sum(1 if ((a >> (n - k)) & 1) == 0 else -1 for k in range(1, n + 1))
    zb = sum(1 if ((b >> (n - k)) & 1) == 0 else -1 for k in range(1, n + 1))
    return (za - zb) // 2


def crush_by_orders(rho, n):
    """Keep only coherence-order-zero elements, one element at a time."""
    out = np.array(rho, dtype=complex)
    d = 1 << n
    for a in range(d):
        for b in range(d):
            if coherence_order_of(n, a, b) != 0:
                out[a, b] = 0.0
    return out


def same_up_to_phase(u, v, d=None):
    """|tr(U V+)| / d, which is 1 exactly when U = e^{i phi} V."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if d is None:
        d = u.shape[0]
    return abs(np.trace(u @ v.conj().T)) / d


def max_abs(a):
    return float(np.max(np.abs(a)))


def is_density(rho, atol=1e-10):
    rho = np.asarray(rho, dtype=complex)
    if max_abs(rho - rho.conj().T) > 1e-12:
        return False
    if abs(np.trace(rho) - 1.0) > 1e-12:
        return False
    return np.linalg.eigvalsh(rho).min() >= -atol


def weak_coupling_hamiltonian(n, shifts, couplings):
    """Diagonal rotating-frame Hamiltonian with secular couplings, in Hz."""
    h = np.zeros((1 << n, 1 << n), dtype=complex)
    for j in range(1, n + 1):
        h = h + shifts[j - 1] * single_spin(n, j, "z")
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            h = h + couplings[i - 1][j - 1] * (
                single_spin(n, i, "z") @ single_spin(n, j, "z")
            )
    return h


def expected_line_positions(n, shifts, couplings, populated):
    """Single-quantum transition frequencies out of the populated levels.

    For the diagonal weak-coupling Hamiltonian a line sits at E_up - E_down
    for every pair of levels differing in exactly one bit, where "up" is the
    level with the flipped spin in |0> (I_z = +1/2). A two-spin register with
    positive shifts then puts the spin-1 doublet of |01> at nu_1 - J/2, the
    usual sign convention. Only transitions touching a populated level count.
    """
    h = weak_coupling_hamiltonian(n, shifts, couplings)
    energies = np.real(np.diag(h))
    lines = set()
    for a in populated:
        for k in range(1, n + 1):
            b = a ^ (1 << (n - k))
            up, down = (a, b) if ((a >> (n - k)) & 1) == 0 else (b, a)
            lines.add(round(float(energies[up] - energies[down]), 9))
    return sorted(lines)
