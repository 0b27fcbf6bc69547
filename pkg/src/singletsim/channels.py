"""Non-unitary evolution: spin-lock purification, free relaxation, gradient
coherence crushing, depolarizing gate noise, and the ideal lock filter.

All channels preserve trace and Hermiticity exactly (up to roundoff) and
return validated :class:`~singletsim.spinsystem.DensityMatrix` values.
The relaxation fixed point is the maximally mixed state, a deliberate
simplification: protocol durations are short against the rebuild of
equilibrium polarization, and the correlation metrics ignore the uniform
background anyway.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .spinsystem import (
    DensityMatrix,
    as_matrix,
    embed_pair_operator,
    singlet_triplet_states,
    _pair_subindices,
)

__all__ = [
    "RelaxationModel",
    "SpinLockSpec",
    "spin_lock",
    "free_relaxation",
    "gradient_crush",
    "noisy_gate",
    "ideal_singlet_filter",
]


def _pair_key(pair) -> tuple:
    i, j = (int(p) for p in pair)
    if i == j:
        raise ValueError("pair indices must be distinct")
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class RelaxationModel:
    """Phenomenological decay constants, all in seconds.

    Parameters
    ----------
    t1, t2:
        Per-spin longitudinal and transverse constants. A scalar value is
        broadcast to every spin at lookup time.
    ts:
        Per-pair decay constant of singlet order during a spin lock,
        keyed by spin pairs, e.g. ``{(1, 2): 16.2}``.
    t_lock_coh:
        Decay constant of every coherence during a spin lock. Default None
        resolves to the smallest t2 among the locked spins.
    t_lock_triplet:
        Decay constant of the non-singlet population imbalance during a
        spin lock. Default None resolves to the mean t1 of the pair, the
        plain longitudinal choice; a rotating-frame lock is usually faster
        than that, so presets may override it per pair (calibration knob).
    """

    t1: object
    t2: object
    ts: Mapping[tuple, float] = field(default_factory=dict)
    t_lock_coh: float = None
    t_lock_triplet: object = None

    def __post_init__(self):
        ts = {}
        for pair, value in dict(self.ts or {}).items():
            value = float(value)
            if value <= 0:
                raise ValueError("ts constants must be positive")
            ts[_pair_key(pair)] = value
        object.__setattr__(self, "ts", ts)
        if self.t_lock_coh is not None and float(self.t_lock_coh) <= 0:
            raise ValueError("t_lock_coh must be positive")
        if isinstance(self.t_lock_triplet, Mapping):
            tl = {}
            for pair, value in self.t_lock_triplet.items():
                value = float(value)
                if value <= 0:
                    raise ValueError("t_lock_triplet constants must be positive")
                tl[_pair_key(pair)] = value
            object.__setattr__(self, "t_lock_triplet", tl)
        elif self.t_lock_triplet is not None and float(self.t_lock_triplet) <= 0:
            raise ValueError("t_lock_triplet must be positive")

    def _per_spin(self, values, j: int, name: str) -> float:
        if np.isscalar(values):
            out = float(values)
        else:
            arr = np.asarray(values, dtype=float)
            if j > arr.size:
                raise ValueError(f"{name} has no entry for spin {j}")
            out = float(arr[j - 1])
        if out <= 0:
            raise ValueError(f"{name} constants must be positive")
        return out

    def t1_for(self, j: int) -> float:
        return self._per_spin(self.t1, j, "t1")

    def t2_for(self, j: int) -> float:
        return self._per_spin(self.t2, j, "t2")

    def ts_for(self, pair) -> float:
        key = _pair_key(pair)
        if key not in self.ts:
            raise ValueError(f"no singlet decay constant ts for pair {key}")
        return self.ts[key]

    def lock_coh_for(self, pairs) -> float:
        if self.t_lock_coh is not None:
            return float(self.t_lock_coh)
        spins = sorted({s for pair in pairs for s in pair})
        return min(self.t2_for(s) for s in spins)

    def lock_triplet_for(self, pair) -> float:
        key = _pair_key(pair)
        if isinstance(self.t_lock_triplet, dict):
            if key in self.t_lock_triplet:
                return self.t_lock_triplet[key]
        elif self.t_lock_triplet is not None:
            return float(self.t_lock_triplet)
        return 0.5 * (self.t1_for(key[0]) + self.t1_for(key[1]))


@dataclass(frozen=True)
class SpinLockSpec:
    """One spin-lock period: which pairs are locked, for how long.

    ``pairs`` may be a single pair ``(1, 2)`` or a tuple of disjoint pairs
    locked simultaneously. Amplitude and sequence label are metadata only;
    the lock is modeled as an effective channel, not a waveform.
    """

    pairs: tuple
    duration: float
    amplitude: float = 2000.0
    sequence_label: str = "WALTZ-16"

    def __post_init__(self):
        pairs = self.pairs
        if len(pairs) == 2 and all(isinstance(p, (int, np.integer)) for p in pairs):
            pairs = (tuple(pairs),)
        pairs = tuple(_pair_key(p) for p in pairs)
        seen = set()
        for pair in pairs:
            if seen & set(pair):
                raise ValueError("locked pairs must be disjoint")
            seen |= set(pair)
        if not pairs:
            raise ValueError("at least one locked pair is required")
        object.__setattr__(self, "pairs", pairs)
        if self.duration < 0:
            raise ValueError("lock duration must be >= 0")

    def spins(self) -> tuple:
        return tuple(sorted(s for pair in self.pairs for s in pair))


def _as_density(rho) -> DensityMatrix:
    return rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)


def _st_transform(n: int, pairs) -> np.ndarray:
    """Unitary whose columns are the joint basis: singlet/triplet quartet on
    each locked pair (ordered S0, T+, T0, T-), computational on the rest."""
    d = 1 << n
    v = np.eye(d, dtype=complex)
    for pair in pairs:
        basis = singlet_triplet_states(pair, n)
        w = np.column_stack(basis.states())
        v = v @ embed_pair_operator(w, pair, n)
    return v


def _check_pairs(n: int, pairs):
    for pair in pairs:
        for s in pair:
            if not 1 <= s <= n:
                raise ValueError(f"locked spin {s} out of range 1..{n}")


def spin_lock(rho, spec: SpinLockSpec, model: RelaxationModel) -> DensityMatrix:
    """Effective spin-lock channel over the locked pairs.

    In the joint singlet/triplet basis of the locked pairs: every coherence
    decays with t_lock_coh; within each population fiber (fixed spectator
    configuration) the mean is preserved, the singlet-pattern imbalance
    decays with ts of the pair, and the remaining (triplet) imbalance decays
    with t_lock_triplet. Fixed point: maximally mixed on each locked pair,
    tensor the spectator marginal. Spectators are untouched apart from the
    global coherence decay; protocol code composes spectator relaxation
    separately.
    """
    rho = _as_density(rho)
    n = rho.n
    _check_pairs(n, spec.pairs)
    tau = float(spec.duration)
    if tau == 0.0:
        return rho
    for pair in spec.pairs:
        model.ts_for(pair)  # raise early if the model lacks the pair
    v = _st_transform(n, spec.pairs)
    sigma = v.conj().T @ rho.data @ v

    coh = np.exp(-tau / model.lock_coh_for(spec.pairs))
    pops = np.real(np.diag(sigma)).copy()
    sigma = coh * sigma
    np.fill_diagonal(sigma, 0.0)

    for pair in spec.pairs:
        es = np.exp(-tau / model.ts_for(pair))
        et = np.exp(-tau / model.lock_triplet_for(pair))
        r, s = _pair_subindices(n, pair)
        order = np.lexsort((r, s))
        grid = order.reshape(-1, 4)  # rows: one spectator fiber, digits S,T+,T0,T-
        fibers = pops[grid]
        mean = fibers.mean(axis=1, keepdims=True)
        dev = fibers - mean
        singlet_dev = dev[:, :1]
        q_component = np.hstack([singlet_dev, np.repeat(-singlet_dev / 3.0, 3, axis=1)])
        residue = dev - q_component
        pops[grid] = mean + es * q_component + et * residue

    sigma[np.diag_indices_from(sigma)] = pops
    out = v @ sigma @ v.conj().T
    out = 0.5 * (out + out.conj().T)  # scrub roundoff from the basis changes
    return DensityMatrix(out)


def free_relaxation(rho, duration: float, model: RelaxationModel, spins: Sequence[int] = None) -> DensityMatrix:
    """Computational-basis relaxation toward the maximally mixed state.

    Tensor product of per-spin channels. For each relaxing spin: elements
    whose bit for that spin differs between bra and ket decay with
    exp(-t/t2_j) (so a multi-spin coherence picks up the product of its
    single-spin factors), and elements whose bit agrees average toward
    their bit-flipped partner, the imbalance decaying with exp(-t/t1_j).
    On the diagonal the second part is the usual T1 approach to an even
    split; extending it to whole same-bit blocks is what keeps the channel
    completely positive for any input.

    ``spins`` restricts the channel to a subset, used for spectator
    relaxation while other spins sit inside a lock. Complete positivity
    needs t2 <= 2 t1 per spin, the physical regime; the bound is not
    enforced.
    """
    rho = _as_density(rho)
    if duration < 0:
        raise ValueError("duration must be >= 0")
    n = rho.n
    d = rho.dim
    if spins is None:
        spins = range(1, n + 1)
    spins = sorted({int(s) for s in spins})
    for s in spins:
        if not 1 <= s <= n:
            raise ValueError(f"spin index {s} out of range 1..{n}")
    if duration == 0.0 or not spins:
        return rho

    idx = np.arange(d)
    out = np.array(rho.data)
    for j in spins:
        e2 = np.exp(-duration / model.t2_for(j))
        e1 = np.exp(-duration / model.t1_for(j))
        bit = (idx >> (n - j)) & 1
        differs = bit[:, None] != bit[None, :]
        flip = idx ^ (1 << (n - j))
        partner = out[np.ix_(flip, flip)]
        mixed = 0.5 * (1.0 + e1) * out + 0.5 * (1.0 - e1) * partner
        out = np.where(differs, e2 * out, mixed)
    return DensityMatrix(out)


def _coherence_order_grid(n: int) -> np.ndarray:
    """order[a, b] = total I_z quantum number of a minus that of b."""
    idx = np.arange(1 << n)
    ones = np.array([bin(i).count("1") for i in idx])
    m2 = n - 2 * ones  # twice the total z quantum number
    return (m2[:, None] - m2[None, :]) // 2


def gradient_crush(rho, strict: bool = False) -> DensityMatrix:
    """Destroy coherences the way a strong field gradient does.

    Zeroes every element whose coherence order is nonzero. Zero-quantum
    elements are gradient-immune and survive; ``strict`` zeroes all
    off-diagonal elements instead (idealized runs). Idempotent.
    """
    rho = _as_density(rho)
    if strict:
        keep = np.eye(rho.dim, dtype=bool)
    else:
        keep = _coherence_order_grid(rho.n) == 0
    return DensityMatrix(np.where(keep, rho.data, 0.0))


def noisy_gate(rho, u, fidelity: float) -> DensityMatrix:
    """Apply a gate, then global depolarizing noise of the given fidelity.

    rho -> (1 - lam) U rho U+ + lam 1/d with lam = (1 - f) d^2 / (d^2 - 1)
    clipped to [0, 1], which makes the process fidelity of the channel equal
    to f. For a pure input the output state fidelity is (1 - lam) + lam/d.
    fidelity = 1 is exact conjugation.
    """
    rho = _as_density(rho)
    if not 0.0 < fidelity <= 1.0:
        raise ValueError("fidelity must lie in (0, 1]")
    mat = as_matrix(u)
    d = rho.dim
    lam = (1.0 - fidelity) * d * d / (d * d - 1.0)
    lam = min(max(lam, 0.0), 1.0)
    rotated = mat @ rho.data @ mat.conj().T
    out = (1.0 - lam) * rotated + lam * np.eye(d) / d
    return DensityMatrix(out)


def ideal_singlet_filter(rho, pairs) -> DensityMatrix:
    """Idealized lock: a projective filter instead of exponential decay.

    In the joint singlet/triplet basis of the locked pairs, every coherence
    is removed; each population whose pairs are all in the singlet state is
    kept when it exceeds the mean of the other populations in its spectator
    block, and every other population is pooled to one uniform level. This
    is the infinite-ts, instant-coherence-decay, instant-triplet-decay limit
    of :func:`spin_lock` (exactly so for a single pair with no spectators),
    extended so that repeated lock stages purify multi-pair registers all
    the way to exact targets.
    """
    rho = _as_density(rho)
    n = rho.n
    if len(pairs) == 2 and all(isinstance(p, (int, np.integer)) for p in pairs):
        pairs = (tuple(pairs),)
    pairs = tuple(_pair_key(p) for p in pairs)
    _check_pairs(n, pairs)
    d = rho.dim
    v = _st_transform(n, pairs)
    pops = np.real(np.diag(v.conj().T @ rho.data @ v)).copy()

    # Spectator block key: clear all pair bits; all-singlet flag: digit 0 on
    # every locked pair.
    idx = np.arange(d)
    block = idx.copy()
    all_singlet = np.ones(d, dtype=bool)
    for pair in pairs:
        r, s = _pair_subindices(n, pair)
        i, j = pair
        block = block & ~((1 << (n - i)) | (1 << (n - j)))
        all_singlet &= r == 0

    kept = np.zeros(d, dtype=bool)
    for key in np.unique(block):
        members = idx[block == key]
        for m in members[all_singlet[members]]:
            others = members[members != m]
            if pops[m] - pops[others].mean() > 0.0:
                kept[m] = True

    kept_total = pops[kept].sum()
    pool = (1.0 - kept_total) / (d - kept.sum()) if kept.sum() < d else 0.0
    new_pops = np.full(d, pool)
    new_pops[kept] = pops[kept]

    out = v @ np.diag(new_pops.astype(complex)) @ v.conj().T
    out = 0.5 * (out + out.conj().T)
    return DensityMatrix(out)
