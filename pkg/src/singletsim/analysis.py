"""Readout and metrics: deviation correlations, singlet content, coherence
orders, small-flip-angle spectra, and diagonal tomography."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import pulse, zeeman_hamiltonian
from .spinsystem import (
    DensityMatrix,
    SpinSystem,
    as_matrix,
    collective_operator,
    partial_trace,
    singlet_triplet_states,
)

__all__ = [
    "Spectrum",
    "correlation",
    "diagonal_correlation",
    "singlet_content",
    "coherence_orders",
    "simulate_spectrum",
    "spectrum_peaks",
    "diagonal_tomography",
    "epsilon_prime",
]


def _matrix(state) -> np.ndarray:
    return as_matrix(state)


def _deviation(state) -> np.ndarray:
    m = _matrix(state)
    d = m.shape[0]
    return m - np.trace(m) * np.eye(d) / d


def correlation(rho, target, use_deviation: bool = True) -> float:
    """Normalized overlap tr(a b) / sqrt(tr(a^2) tr(b^2)) of two states.

    By default both operands are reduced to their traceless deviation parts,
    the quantity the uniform background cannot influence. Raises if either
    deviation vanishes (the correlation is undefined, never NaN).
    ``use_deviation=False`` compares the full matrices, for diagnostics.
    """
    a = _deviation(rho) if use_deviation else _matrix(rho)
    b = _deviation(target) if use_deviation else _matrix(target)
    if a.shape != b.shape:
        raise ValueError("state dimensions differ")
    na = np.sqrt(np.real(np.sum(a * a.conj())))
    nb = np.sqrt(np.real(np.sum(b * b.conj())))
    if na < 1e-300 or nb < 1e-300:
        raise ValueError("correlation undefined: a deviation matrix is zero")
    return float(np.real(np.trace(a @ b)) / (na * nb))


def diagonal_correlation(rho, target) -> float:
    """Correlation restricted to the diagonal (population) parts."""
    a = np.real(np.diag(_matrix(rho))).copy()
    b = np.real(np.diag(_matrix(target))).copy()
    if a.size != b.size:
        raise ValueError("state dimensions differ")
    a -= a.mean()
    b -= b.mean()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na < 1e-300 or nb < 1e-300:
        raise ValueError("diagonal correlation undefined: a diagonal deviation is zero")
    return float(a @ b / (na * nb))


def singlet_content(rho, pair) -> float:
    """Population of the singlet state on the pair's reduced matrix."""
    m = _matrix(rho)
    n = m.shape[0].bit_length() - 1
    reduced = partial_trace(m, list(pair), n)
    s0 = singlet_triplet_states((1, 2), 2).singlet
    return float(np.real(s0.conj() @ reduced @ s0))


def coherence_orders(rho) -> dict:
    """Split a matrix by coherence order; parts sum back to the input.

    Order of element (a, b) is the total I_z quantum number of a minus that
    of b; populations and zero-quantum terms sit at order 0.
    """
    m = _matrix(rho)
    n = m.shape[0].bit_length() - 1
    idx = np.arange(m.shape[0])
    ones = np.array([bin(i).count("1") for i in idx])
    m2 = n - 2 * ones
    grid = (m2[:, None] - m2[None, :]) // 2
    parts = {}
    for p in range(-n, n + 1):
        mask = grid == p
        if mask.any():
            part = np.where(mask, m, 0.0)
            if np.any(part):
                parts[p] = part
    if not parts:
        parts[0] = np.zeros_like(m)
    return parts


@dataclass(frozen=True)
class Spectrum:
    """Frequency grid (Hz) and complex amplitudes of a simulated spectrum.

    The real part holds the absorptive component; lines from a positive
    longitudinal deviation come out positive.
    """

    frequencies: np.ndarray
    amplitudes: np.ndarray
    line_width: float
    flip_angle: float

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        a = np.asarray(self.amplitudes, dtype=complex)
        if f.shape != a.shape:
            raise ValueError("frequency and amplitude grids differ in length")
        if self.line_width <= 0:
            raise ValueError("line width must be positive")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "amplitudes", a)


def _auto_sweep_width(system: SpinSystem, line_width: float) -> float:
    span = float(np.max(np.abs(system.shifts))) if system.n else 0.0
    j_half = 0.5 * float(np.max(np.sum(np.abs(system.couplings), axis=1), initial=0.0))
    return 4.0 * (span + j_half + 25.0 * line_width)


def simulate_spectrum(
    rho,
    system: SpinSystem,
    flip_angle: float = np.pi / 36.0,
    line_width: float = 1.0,
    n_points: int = 4096,
    sweep_width: float = None,
) -> Spectrum:
    """Small-flip-angle readout spectrum of a state.

    A collective y rotation by ``flip_angle`` is applied, the state evolves
    under the shift plus weak-coupling Hamiltonian, and the transverse
    signal tr(rho(t) sum_j (I_x^j + i I_y^j)) is sampled, apodized with
    exp(-pi line_width t), and Fourier transformed. The linear response
    regime holds for flip angles up to about pi/18.
    """
    if line_width <= 0:
        raise ValueError("line width must be positive")
    if n_points < 2 or (n_points & (n_points - 1)) != 0:
        raise ValueError("n_points must be a power of two, at least 2")
    if sweep_width is None:
        sweep_width = _auto_sweep_width(system, line_width)
    if sweep_width <= 0:
        raise ValueError("sweep width must be positive")

    m = _matrix(rho)
    tip = pulse(system, range(1, system.n + 1), "y", float(flip_angle))
    state = tip.data @ m @ tip.data.conj().T

    h = zeeman_hamiltonian(system, weak_coupling=True)
    w, v = np.linalg.eigh(h.data)
    ladder = (
        collective_operator(system, range(1, system.n + 1), "x").data
        + 1j * collective_operator(system, range(1, system.n + 1), "y").data
    )
    state_e = v.conj().T @ state @ v
    detect_e = v.conj().T @ ladder @ v
    amp = state_e * detect_e.T  # element (a,b): rho_ab * D_ba

    dt = 1.0 / sweep_width
    times = np.arange(n_points) * dt
    phases = np.exp(-2j * np.pi * np.outer(times, w))
    signal = np.einsum("ka,ab,kb->k", phases, amp, phases.conj(), optimize=True)
    signal = signal * np.exp(-np.pi * line_width * times)

    spectrum = np.fft.fftshift(np.fft.fft(signal))
    freqs = np.fft.fftshift(np.fft.fftfreq(n_points, dt))
    return Spectrum(freqs, spectrum, float(line_width), float(flip_angle))


def spectrum_peaks(spectrum: Spectrum, rel_height: float = 0.05) -> list:
    """Local maxima of the magnitude spectrum above a relative threshold.

    Returns (frequency, complex amplitude) tuples, strongest first.
    """
    mag = np.abs(spectrum.amplitudes)
    top = mag.max()
    if top <= 0.0:
        return []
    floor = rel_height * top
    peaks = []
    for k in range(1, len(mag) - 1):
        if mag[k] >= floor and mag[k] > mag[k - 1] and mag[k] >= mag[k + 1]:
            peaks.append((float(spectrum.frequencies[k]), complex(spectrum.amplitudes[k])))
    peaks.sort(key=lambda item: -abs(item[1]))
    return peaks


def diagonal_tomography(rho) -> np.ndarray:
    """Computational-basis populations (direct extraction)."""
    return np.real(np.diag(_matrix(rho))).copy()


def epsilon_prime(rho, target) -> float:
    """Retained polarization of a pseudopure-like state.

    Target population minus the mean of the others, which recovers eps'
    exactly on an ideal pseudopure state.
    """
    pops = diagonal_tomography(rho)
    if isinstance(target, str):
        target = int(target, 2)
    others = np.delete(pops, target)
    return float(pops[target] - others.mean())
