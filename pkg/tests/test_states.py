import numpy as np
import pytest

from catloop.errors import TruncationError, ZeroNormError
from catloop.fock import (FockCutoff, coherent_state, fidelity, fock_state,
                          gkp_delta, gkp_state, overlap, squeezed_cat,
                          squeezed_vacuum, vacuum)

CUT30 = FockCutoff(30)


def test_cutoff_rejects_tiny_dim():
    with pytest.raises(ValueError):
        FockCutoff(1)


def test_squeezed_vacuum_r0_is_vacuum():
    sv = squeezed_vacuum(0.0, 0.0, CUT30)
    assert abs(sv.amplitudes[0] - 1.0) < 1e-12
    assert np.max(np.abs(sv.amplitudes[1:])) < 1e-12


def test_squeezed_vacuum_p0_matches_cosh():
    # unnormalized |c0|^2 = 1/cosh(r); the stored state is renormalized over
    # the cutoff, so scale back with the recorded deficit
    sv = squeezed_vacuum(1.38, 0.0, CUT30)
    p0 = abs(sv.amplitudes[0]) ** 2 * (1.0 - sv.truncation_deficit)
    assert abs(p0 - 1.0 / np.cosh(1.38)) < 1e-12
    # and at a generous cutoff the renormalized value converges to 1/cosh
    sv_big = squeezed_vacuum(1.38, 0.0, FockCutoff(120))
    assert abs(abs(sv_big.amplitudes[0]) ** 2 - 1.0 / np.cosh(1.38)) < 1e-7


def test_squeezed_vacuum_odd_amplitudes_vanish():
    sv = squeezed_vacuum(1.38, 0.0, CUT30)
    assert np.max(np.abs(sv.amplitudes[1::2])) == 0.0


def test_squeezed_vacuum_norm_after_normalize():
    for r in (0.3, 0.9, 1.38):
        sv = squeezed_vacuum(r, 0.0, CUT30)
        assert abs(sv.norm() - 1.0) <= 1e-9


def test_squeezed_vacuum_truncation_signal():
    with pytest.raises(TruncationError):
        squeezed_vacuum(2.5, 0.0, FockCutoff(6), max_deficit=1e-6)


def test_squeezed_vacuum_theta_changes_phase_only():
    sv0 = squeezed_vacuum(1.0, 0.0, CUT30)
    svp = squeezed_vacuum(1.0, np.pi, CUT30)
    assert np.allclose(np.abs(sv0.amplitudes), np.abs(svp.amplitudes))
    # theta=pi flips the sign of c_2 relative to c_0
    assert np.sign(svp.amplitudes[2].real) == -np.sign(sv0.amplitudes[2].real)


def test_coherent_state_mean_photon():
    c = coherent_state(2.0, FockCutoff(40))
    assert abs(c.mean_photon() - 4.0) < 1e-6


def test_squeezed_cat_trivial_vacuum():
    cat = squeezed_cat(0.0, 0.0, +1, CUT30)
    assert overlap(cat, vacuum(CUT30)) > 1.0 - 1e-12


def test_squeezed_cat_parity_support():
    even = squeezed_cat(3.0, 1.38, +1, CUT30)
    odd = squeezed_cat(3.0, 1.38, -1, CUT30)
    assert np.max(np.abs(even.amplitudes[1::2])) < 1e-12
    assert np.max(np.abs(odd.amplitudes[0::2])) < 1e-12


def test_squeezed_cat_opposite_parity_orthogonal():
    even = squeezed_cat(3.0, 1.38, +1, CUT30)
    odd = squeezed_cat(3.0, 1.38, -1, CUT30)
    assert fidelity(even, odd) < 1e-20


def test_squeezed_cat_zero_norm_odd():
    with pytest.raises(ZeroNormError):
        squeezed_cat(0.0, 0.5, -1, CUT30)


def test_squeezed_cat_small_alpha_odd_is_squeezed_single_photon():
    # alpha -> 0 limit of the odd cat is S(r)|1>
    from catloop.fock import squeeze_unitary

    cat = squeezed_cat(1e-3, 0.7, -1, FockCutoff(40))
    ref = squeeze_unitary(0.7, 40) @ fock_state(1, FockCutoff(40)).amplitudes
    assert abs(np.vdot(ref, cat.amplitudes)) ** 2 > 1.0 - 1e-5


def test_gkp_delta_conversion():
    assert abs(gkp_delta(6.25) - np.sqrt(10 ** -0.625)) < 1e-15
    assert abs(gkp_delta(6.25) - 0.48696752516586236) < 1e-12


def test_gkp_zero_logical_even_support():
    g = gkp_state("0", 6.25, FockCutoff(50))
    assert np.sum(np.abs(g.amplitudes[1::2]) ** 2) < 1e-20


def test_gkp_self_fidelity():
    g = gkp_state("0+i1", 6.25, FockCutoff(50))
    assert abs(fidelity(g, g) - 1.0) < 1e-12


def test_gkp_logicals_nearly_orthogonal():
    g0 = gkp_state("0", 9.0, FockCutoff(60))
    g1 = gkp_state("1", 9.0, FockCutoff(60))
    assert fidelity(g0, g1) < 1e-3


def test_gkp_cutoff_too_small_signals():
    with pytest.raises(TruncationError):
        gkp_state("0", 12.0, FockCutoff(12))


def test_two_mode_product_state_shapes():
    from catloop.fock import product_state

    two = product_state(vacuum(CUT30), squeezed_vacuum(1.0, 0.0, CUT30))
    assert two.modes == 2
    assert two.amplitudes.shape == (900,)
    probs = two.probabilities()
    assert probs.shape == (30, 30)
    assert abs(probs.sum() - 1.0) < 1e-9


def test_states_are_immutable():
    sv = squeezed_vacuum(1.0, 0.0, CUT30)
    with pytest.raises(ValueError):
        sv.amplitudes[0] = 0.0
