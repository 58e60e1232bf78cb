import numpy as np
import pytest

from catloop.fock import (FockCutoff, PureState, apply_gate, annihilation,
                          build_beamsplitter, build_cz, build_displacement,
                          build_rotation, build_squeeze, fock_state, overlap,
                          product_state, squeeze_unitary, squeezed_vacuum,
                          vacuum)

CUT = FockCutoff(16)
GUARD = 5


def _rand_state(rng, cutoff, modes=1):
    d = cutoff.dim ** modes
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureState(v / np.linalg.norm(v), cutoff, modes)


def test_all_gates_unitary_on_guarded_block():
    gates = [
        build_squeeze(0.9, cutoff=CUT),
        build_rotation(0.7, CUT),
        build_beamsplitter(0.6, CUT),
        build_cz(1.0, CUT),
        build_displacement(0.8, CUT),
    ]
    for g in gates:
        assert g.unitarity_defect(guard=GUARD) <= 1e-8, g.label


def test_beamsplitter_identity_at_tau_one():
    bs = build_beamsplitter(1.0, CUT)
    assert np.max(np.abs(bs.matrix - np.eye(CUT.dim ** 2))) < 1e-10


def test_beamsplitter_swap_at_tau_zero_single_photon_block():
    bs = build_beamsplitter(0.0, CUT)
    ten = product_state(fock_state(1, CUT), fock_state(0, CUT))
    out = apply_gate(ten, bs).amplitudes.reshape(CUT.dim, CUT.dim)
    # |1,0> -> -|0,1> under the convention (full reflection, sign fixed)
    assert abs(abs(out[0, 1]) - 1.0) < 1e-12
    assert abs(out[1, 0]) < 1e-12


def test_beamsplitter_single_photon_balanced_split():
    bs = build_beamsplitter(1.0 / np.sqrt(2.0), CUT)
    ten = product_state(fock_state(1, CUT), fock_state(0, CUT))
    out = apply_gate(ten, bs).amplitudes.reshape(CUT.dim, CUT.dim)
    # equal 1/2 weights; relative sign from U|1,0> = tau|1,0> - rho|0,1>
    assert abs(abs(out[1, 0]) ** 2 - 0.5) < 1e-12
    assert abs(abs(out[0, 1]) ** 2 - 0.5) < 1e-12
    assert np.sign(out[1, 0].real) != np.sign(out[0, 1].real)


def test_beamsplitter_total_photon_block_structure_exact():
    bs = build_beamsplitter(0.37, CUT)
    d = CUT.dim
    n = np.arange(d)
    total = (n[:, None] + n[None, :]).reshape(-1)
    mism = total[:, None] != total[None, :]
    assert np.max(np.abs(bs.matrix[mism])) == 0.0


def test_beamsplitter_flush_semantics():
    # at tau=1 the fresh input crosses fully into the kept arm (mode 0 out)
    sv = squeezed_vacuum(1.0, 0.0, CUT)
    two = product_state(sv, fock_state(2, CUT))
    out = apply_gate(two, build_beamsplitter(1.0, CUT))
    m = out.amplitudes.reshape(CUT.dim, CUT.dim)
    # detector arm (mode 1) carries the old resident |2>
    assert abs(np.linalg.norm(m[:, 2]) - 1.0) < 1e-10
    kept = m[:, 2] / np.linalg.norm(m[:, 2])
    assert abs(np.vdot(sv.amplitudes, kept)) ** 2 > 1.0 - 1e-10


def test_rotation_full_turn_identity():
    rho = _rand_state(np.random.default_rng(3), CUT).to_density()
    rot = build_rotation(2 * np.pi, CUT)
    out = apply_gate(rho, rot)
    assert np.max(np.abs(out.matrix - rho.matrix)) < 1e-12
    psi = _rand_state(np.random.default_rng(4), CUT)
    out_psi = apply_gate(psi, rot)
    assert abs(abs(psi.inner(out_psi)) - 1.0) < 1e-12  # equal up to global phase


def test_squeeze_gate_matches_analytic_amplitudes():
    # dual route: matrix exponential on |0> vs the closed-form amplitudes
    big = FockCutoff(60)
    gate = squeeze_unitary(1.0, big.dim)
    via_gate = gate @ vacuum(big).amplitudes
    analytic = squeezed_vacuum(1.0, 0.0, big)
    assert abs(np.vdot(analytic.amplitudes, via_gate)) ** 2 > 1.0 - 1e-8


def test_cz_zero_gain_identity():
    cz = build_cz(0.0, CUT)
    assert np.max(np.abs(cz.matrix - np.eye(CUT.dim ** 2))) < 1e-10


def test_cz_symmetric_under_mode_exchange():
    cz = build_cz(1.0, CUT).matrix
    d = CUT.dim
    swapped = cz.reshape(d, d, d, d).transpose(1, 0, 3, 2).reshape(d * d, d * d)
    assert np.max(np.abs(cz - swapped)) < 1e-10


def test_cz_active_on_vacuum():
    two = product_state(vacuum(CUT), vacuum(CUT))
    out = apply_gate(two, build_cz(1.0, CUT))
    assert out.mean_photon() > 1e-3


def test_displacement_moves_x_expectation():
    d = FockCutoff(40)
    beta = 0.9
    out = apply_gate(vacuum(d), build_displacement(beta, d))
    a = annihilation(d.dim)
    x_op = (a + a.conj().T) / np.sqrt(2)
    x_mean = np.real(np.vdot(out.amplitudes, x_op @ out.amplitudes))
    assert abs(x_mean - np.sqrt(2) * beta) < 1e-8


def test_apply_gate_single_mode_targeting():
    rng = np.random.default_rng(7)
    a, b = _rand_state(rng, CUT), _rand_state(rng, CUT)
    two = product_state(a, b)
    rot = build_rotation(0.5, CUT)
    out = apply_gate(two, rot, mode=1)
    m = out.amplitudes.reshape(CUT.dim, CUT.dim)
    # mode 0 reduced state unchanged
    red0 = m @ m.conj().T
    ref0 = np.outer(a.amplitudes, a.amplitudes.conj())
    assert np.max(np.abs(red0 - ref0)) < 1e-12


def test_apply_gate_mode_out_of_range():
    two = product_state(vacuum(CUT), vacuum(CUT))
    with pytest.raises(ValueError):
        apply_gate(two, build_rotation(0.3, CUT), mode=2)


def test_apply_gate_dimension_mismatch():
    with pytest.raises(ValueError):
        apply_gate(vacuum(CUT), build_beamsplitter(0.5, CUT))
