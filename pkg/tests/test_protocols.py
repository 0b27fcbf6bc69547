"""End-to-end protocol behavior: full initialization runs, Bell-state
preparation, schedule construction, and the singlet detection readout.

Ideal-mode runs must hit their targets exactly; lossy runs are checked
against the shipped preset calibrations. Branch identities across the
controlled NOT are checked against hand-built separable states.
"""

import numpy as np
import pytest

import helpers as hp
from singletsim import (
    DensityMatrix,
    RelaxationModel,
    SpinLockSpec,
    SpinSystem,
    Stage,
    basis_index,
    bell_state,
    build_standard_schedule,
    coherence_orders,
    correlation,
    detect_singlet,
    epsilon_prime,
    equilibrium_state,
    execute_schedule,
    get_preset,
    gradient_crush,
    initialize_2q,
    initialize_3q,
    initialize_nq,
    partial_trace,
    prepare_bell,
    pseudopure_state,
    run_preset,
    simulate_spectrum,
    singlet_order_preparation,
    singlet_to_pseudopure,
    spectrum_peaks,
    standard_target,
)

TWO = get_preset("2q-bromothiophene")
THREE = get_preset("3q-acrylonitrile")
FOUR = get_preset("aspirin-4q")


# ---------------------------------------------------------------- ideal mode

def test_ideal_two_spin_run_is_exact():
    result = run_preset("2q-bromothiophene", ideal=True)
    assert abs(result.metrics["correlation"] - 1.0) < 1e-6
    assert abs(result.metrics["diagonal_correlation"] - 1.0) < 1e-6


def test_ideal_three_spin_run_is_exact():
    result = run_preset("3q-acrylonitrile", ideal=True)
    assert abs(result.metrics["correlation"] - 1.0) < 1e-6
    assert abs(result.metrics["diagonal_correlation"] - 1.0) < 1e-6


def test_ideal_four_spin_run_is_exact():
    result = run_preset("aspirin-4q", ideal=True)
    assert abs(result.metrics["correlation"] - 1.0) < 1e-6
    assert abs(result.metrics["diagonal_correlation"] - 1.0) < 1e-6


def test_ideal_three_spin_spectator_reduced_state():
    # The final pseudopure |010> leaves spin 3 as a pseudopure |0>: its
    # reduced deviation is eps' * (|0><0| - 1/2).
    result = run_preset("3q-acrylonitrile", ideal=True)
    eps = result.metrics["epsilon_prime"]
    reduced = partial_trace(result.final.data, [3], 3)
    deviation = reduced - np.eye(2) / 2.0
    assert hp.max_abs(deviation - eps * np.diag([0.5, -0.5])) < 1e-9


# ------------------------------------------------------------- lossy presets

def test_two_spin_preset_correlation_band():
    result = run_preset("2q-bromothiophene")
    assert result.metrics["correlation"] >= 0.99
    assert result.metrics["diagonal_correlation"] >= 0.99
    assert result.metrics["epsilon_prime"] > 0.0


def test_two_spin_post_lock_singlet_correlation_band():
    result = run_preset("2q-bromothiophene")
    assert abs(result.metrics["singlet_correlation_post_lock"] - 0.991) <= 0.03


def test_zero_duration_lock_baseline():
    # With no purification at all, the converted and crushed thermal state
    # correlates with the target at exactly sqrt(2/3).
    lock = SpinLockSpec(pairs=((1, 2),), duration=0.0, amplitude=2000.0)
    result = initialize_2q(TWO.system, TWO.model, lock)
    assert abs(result.metrics["correlation"] - np.sqrt(2.0 / 3.0)) < 1e-9


def test_longer_locks_purify_more():
    values = []
    for duration in (0.0, 2.0, 6.0, 12.4, 20.0):
        lock = SpinLockSpec(pairs=((1, 2),), duration=duration, amplitude=2000.0)
        values.append(initialize_2q(TWO.system, TWO.model, lock).metrics["correlation"])
    assert all(b > a for a, b in zip(values, values[1:]))


def test_three_spin_preset_correlation_bands():
    result = run_preset("3q-acrylonitrile")
    assert 0.93 <= result.metrics["correlation"] <= 0.99
    assert result.metrics["diagonal_correlation"] >= 0.97


def test_three_spin_spectator_populations_balance():
    # The spectator rides out the first lock untouched by the lock itself;
    # its populations stay within thermal distance of an even split.
    result = run_preset("3q-acrylonitrile")
    p0, p1 = result.metrics["p0"], result.metrics["p1"]
    assert abs(p0 + p1 - 1.0) < 1e-12
    assert p0 > 0.5 > p1
    assert abs(p0 - 0.5) < 1e-4


def test_four_spin_preset_correlation_band():
    result = run_preset("aspirin-4q")
    diag = result.metrics["diagonal_correlation"]
    assert 0.96 <= diag <= 0.99, (
        f"diagonal correlation {diag:.9f} fell outside the 0.96..0.99 band; "
        "the relaxation model caps this sequence near 0.9370 (see README)"
    )


# ------------------------------------------------- branch split at the cNOT

def test_cnot_splits_separable_singlet_exactly():
    # Singlet pair against a diagonal spectator: the conditional gate leaves
    # the |0> branch alone and rotates the |1> branch onto the other Bell
    # state, with the spectator weights carried through unchanged.
    p0, p1 = 0.62, 0.38
    s0 = hp.SINGLET
    phim = bell_state("phi-")
    rho = np.kron(hp.projector(s0), np.diag([p0, p1]))
    system = SpinSystem(n=3, shifts=THREE.system.shifts, couplings=THREE.system.couplings)
    from singletsim import cnot

    out = DensityMatrix(rho).transformed(cnot(system, 3, 2, "on-1"))
    expected = p0 * hp.projector(np.kron(s0, [1.0, 0.0])) + p1 * hp.projector(
        np.kron(phim, [0.0, 1.0])
    )
    assert hp.max_abs(out.data - expected) < 1e-10


def test_noisy_cnot_branch_bookkeeping_in_full_run():
    # Across the protocol's own gate stage the singlet-sector weights map
    # onto the Bell-sector weights through the depolarizing mix alone.
    result = run_preset("3q-acrylonitrile")
    pre = result.snapshot("lock-1").data
    post = result.snapshot("cnot[3->2,on-1]").data
    v_s0_0 = np.kron(hp.SINGLET, [1.0, 0.0])
    v_s0_1 = np.kron(hp.SINGLET, [0.0, 1.0])
    v_phim_1 = np.kron(bell_state("phi-"), [0.0, 1.0])
    a0 = (v_s0_0.conj() @ pre @ v_s0_0).real
    a1 = (v_s0_1.conj() @ pre @ v_s0_1).real
    b0 = (v_s0_0.conj() @ post @ v_s0_0).real
    b_phi = (v_phim_1.conj() @ post @ v_phim_1).real
    lam = (1.0 - THREE.cnot_fidelity) * 64.0 / 63.0
    assert abs(b0 - ((1.0 - lam) * a0 + lam / 8.0)) < 1e-12
    assert abs(b_phi - ((1.0 - lam) * a1 + lam / 8.0)) < 1e-12


def test_conversion_tail_maps_pure_singlet_to_target():
    rho = DensityMatrix(hp.projector(hp.SINGLET))
    rho = rho.transformed(singlet_to_pseudopure(TWO.system, (1, 2)))
    rho = gradient_crush(rho)
    reference = pseudopure_state(basis_index("01"), 2, 0.5)
    assert abs(correlation(rho, reference) - 1.0) < 1e-10


# ------------------------------------------------------------- entry points

def test_initialize_nq_matches_initialize_2q():
    direct = initialize_2q(TWO.system, TWO.model, TWO.locks[0])
    general = initialize_nq(TWO.system, TWO.model, locks=TWO.locks)
    assert hp.max_abs(direct.final.data - general.final.data) < 1e-14
    assert abs(direct.metrics["correlation"] - general.metrics["correlation"]) < 1e-14


def test_initialize_entry_points_reject_wrong_sizes():
    with pytest.raises(ValueError, match="2-spin"):
        initialize_2q(THREE.system, THREE.model, TWO.locks[0])
    with pytest.raises(ValueError, match="3-spin"):
        initialize_3q(TWO.system, TWO.model, THREE.locks)
    with pytest.raises(ValueError, match="schedule or lock"):
        initialize_nq(TWO.system, TWO.model)


def test_strict_gradient_leaves_a_diagonal_state():
    result = run_preset("2q-bromothiophene", strict_gradient=True)
    off = result.final.data - np.diag(np.diag(result.final.data))
    assert hp.max_abs(off) == 0.0
    # For this sequence nothing coherent survives the plain crush either,
    # so the score is unchanged.
    plain = run_preset("2q-bromothiophene")
    assert abs(result.metrics["correlation"] - plain.metrics["correlation"]) < 1e-12


# ---------------------------------------------------------------- Bell pairs

def test_bell_preparation_ideal_is_exact():
    for variant in ("psi+", "phi+", "phi-"):
        result = prepare_bell(TWO.system, TWO.model, variant, TWO.locks[0], ideal=True)
        assert abs(result.metrics["correlation"] - 1.0) < 1e-6


def test_bell_preparation_lossy_band():
    for variant in ("psi+", "phi+", "phi-"):
        result = prepare_bell(TWO.system, TWO.model, variant, TWO.locks[0])
        assert result.metrics["correlation"] >= 0.95


def test_bell_via_shift_matches_direct_rotation():
    for variant in ("psi+", "phi+", "phi-"):
        direct = prepare_bell(TWO.system, TWO.model, variant, TWO.locks[0])
        shifted = prepare_bell(TWO.system, TWO.model, variant, TWO.locks[0], via_shift=True)
        assert hp.max_abs(direct.final.data - shifted.final.data) < 1e-9


def test_bell_family_pairwise_deviation_correlations():
    # Four mutually orthogonal maximally entangled states: every pair of
    # deviation matrices correlates at exactly -1/3.
    family = [DensityMatrix(hp.projector(hp.SINGLET))]
    for variant in ("psi+", "phi+", "phi-"):
        family.append(
            prepare_bell(TWO.system, TWO.model, variant, TWO.locks[0], ideal=True).final
        )
    for i in range(4):
        for j in range(i + 1, 4):
            assert abs(correlation(family[i], family[j]) + 1.0 / 3.0) < 1e-6


def test_run_preset_bell_variant_needs_two_spins():
    with pytest.raises(ValueError, match="2-spin"):
        run_preset("aspirin-4q", bell_variant="psi+")


# ----------------------------------------------------------- singlet readout

def test_detect_singlet_leaves_mixed_state_invariant():
    mixed = DensityMatrix(np.eye(4) / 4.0)
    out = detect_singlet(mixed, TWO.system, (1, 2))
    assert hp.max_abs(out.data - mixed.data) < 1e-12


def test_detect_singlet_exposes_single_quantum_coherence():
    out = detect_singlet(DensityMatrix(hp.projector(hp.SINGLET)), TWO.system, (1, 2))
    orders = coherence_orders(out.data - np.eye(4) / 4.0)
    weight = sum(np.abs(block).sum() for q, block in orders.items() if abs(q) == 1)
    assert weight > 0.2


def test_detect_singlet_spectrum_is_antiphase():
    rho = equilibrium_state(TWO.system).transformed(
        singlet_order_preparation(TWO.system, (1, 2))
    )
    spec = simulate_spectrum(detect_singlet(rho, TWO.system, (1, 2)), TWO.system, flip_angle=0.0)
    peaks = spectrum_peaks(spec)
    amps = np.array([amp.real for _, amp in peaks])
    assert len(peaks) == 4
    assert (amps > 0).sum() == 2 and (amps < 0).sum() == 2
    assert np.abs(amps).min() > 0.5 * np.abs(amps).max()
    # Antiphase pattern: the absorptive signal integrates to zero.
    real = spec.amplitudes.real
    assert abs(real.sum()) < 1e-8 * np.abs(real).sum()


# -------------------------------------------------------- schedule plumbing

def test_snapshots_conserve_trace_and_follow_the_schedule():
    result = run_preset("3q-acrylonitrile")
    labels = [name for name, _ in result.snapshots]
    assert labels == [
        "equilibrium",
        "prepare(1, 2)",
        "lock-1",
        "cnot[3->2,on-1]",
        "lock-2",
        "convert(1, 2)",
        "crush",
    ]
    for _, state in result.snapshots:
        assert abs(np.trace(state.data) - 1.0) < 1e-10


def test_snapshot_lookup_raises_on_unknown_label():
    result = run_preset("2q-bromothiophene")
    with pytest.raises(KeyError, match="no snapshot"):
        result.snapshot("anneal")


def test_standard_target_labels():
    assert standard_target(2) == "01"
    assert standard_target(3) == "010"
    assert standard_target(4) == "1001"
    assert standard_target(6) == "100101"
    for n in (5, 7):
        with pytest.raises(ValueError, match="no standard sequence"):
            standard_target(n)


def test_standard_schedule_three_spin_structure():
    schedule = build_standard_schedule(3, THREE.locks, cnot_fidelity=0.96)
    assert [stage.kind for stage in schedule] == [
        "prepare", "lock", "gate", "lock", "convert", "crush",
    ]
    gate = schedule[2]
    assert (gate.gate, gate.control, gate.target, gate.polarity) == ("cnot", 3, 2, "on-1")
    assert gate.fidelity == 0.96


def test_standard_schedule_four_spin_structure():
    schedule = build_standard_schedule(4, FOUR.locks, cnot_fidelity=0.94, h_fidelity=0.98)
    kinds = [stage.kind for stage in schedule]
    assert kinds == [
        "prepare", "lock", "gate", "gate", "gate", "lock",
        "convert", "gate", "convert", "crush",
    ]
    assert schedule[0].pairs == ((1, 2), (3, 4))
    # Boundary block joins the pairs through spin 3 with open-circle NOTs.
    first, mid, second = schedule[2], schedule[3], schedule[4]
    assert (first.control, first.target, first.polarity) == (2, 3, "on-0")
    assert (mid.gate, mid.target) == ("h", 3)
    assert (second.control, second.target, second.polarity) == (4, 3, "on-0")
    # Pair one converts first and is inverted onto |10> by the NOT.
    assert schedule[6].pairs == ((1, 2),)
    assert (schedule[7].gate, schedule[7].spins) == ("not", (1, 2))
    assert schedule[8].pairs == ((3, 4),)


def test_standard_schedule_lock_count_validation():
    with pytest.raises(ValueError, match="exactly one lock"):
        build_standard_schedule(2, THREE.locks)
    with pytest.raises(ValueError, match="exactly two locks"):
        build_standard_schedule(3, TWO.locks)
    with pytest.raises(ValueError, match="odd n=5"):
        build_standard_schedule(5, THREE.locks)


def test_execute_schedule_without_target_reports_no_metrics():
    schedule = (Stage("prepare", pairs=((1, 2),)),)
    result = execute_schedule(TWO.system, TWO.model, schedule, target=None)
    assert result.metrics == {}
    assert result.target_label == ""
