import numpy as np
import pytest

from catloop.errors import ZeroProbabilityError
from catloop.fock import FockCutoff, annihilation, squeezed_vacuum
from catloop.onestep import (CatFitter, average_fidelity, default_tau_grid,
                             fixed_target_sweep, fringe_period,
                             interior_local_maxima, moving_target_sweep,
                             one_step_outputs, one_step_state, optimize_target,
                             plot_average, plot_fixed_sweep, plot_moving_sweep,
                             relevant_optimum)

CUT = FockCutoff(24)


def _closed_form_heralded(tau_sq, n, r0, dim):
    """Independent oracle for the vacuum-resident circuit:
    heralded(n) proportional to kappa^{n_hat} a^n S(r0)|0>, kappa^2 = tau_sq."""
    a = annihilation(dim)
    v = squeezed_vacuum(r0, 0.0, FockCutoff(dim)).amplitudes.copy()
    for _ in range(n):
        v = a @ v
    v = np.sqrt(tau_sq) ** np.arange(dim) * v
    return v / np.linalg.norm(v)


def test_heralded_state_matches_closed_form():
    for tau_sq in (0.13, 0.5, 0.87):
        for n in (1, 2, 3):
            state, p = one_step_state(tau_sq, n, 1.38, CUT, resident="vacuum")
            oracle = _closed_form_heralded(tau_sq, n, 1.38, CUT.dim)
            assert abs(np.vdot(oracle, state.amplitudes)) ** 2 > 1.0 - 1e-10, (tau_sq, n)
            assert 0.0 < p < 1.0


def test_probabilities_sum_to_one():
    for resident in ("vacuum", "orthogonal"):
        for tau_sq in (0.0, 0.146, 0.7, 1.0):
            p, _ = one_step_outputs(tau_sq, 1.38, CUT, resident)
            assert abs(p.sum() - 1.0) < 2e-2  # within the truncation deficit
            assert p.sum() <= 1.0 + 1e-9


def test_tau_zero_detector_decoupled_from_resident():
    # vacuum resident at tau_sq=0: every heralded output is the vacuum itself
    p, states = one_step_outputs(0.0, 1.38, CUT, "vacuum")
    for n in range(1, 6):
        if states[n] is None:
            continue
        assert abs(states[n].amplitudes[0]) > 1.0 - 1e-9


def test_tau_one_detector_sees_resident_vacuum():
    # full cross-coupling: the fresh state lands in the kept arm, the detector
    # reads the old vacuum resident, so n>0 never fires
    p, states = one_step_outputs(1.0, 1.38, CUT, "vacuum")
    assert abs(p[0] - 1.0) < 1e-9
    assert all(s is None for s in states[1:])
    with pytest.raises(ZeroProbabilityError):
        one_step_state(1.0, 2, 1.38, CUT, "vacuum")


def test_parity_selection_rule():
    for resident in ("vacuum", "orthogonal"):
        _, states = one_step_outputs(0.3, 1.38, CUT, resident)
        for n in range(1, 7):
            if states[n] is None:
                continue
            wrong = states[n].amplitudes[(n + 1) % 2::2]
            assert np.max(np.abs(wrong)) < 1e-8, (resident, n)


def test_fixed_sweep_columns_and_averages():
    grid = np.array([0.1, 0.13, 0.2])
    table = fixed_target_sweep(grid, n_max=8, cutoff=FockCutoff(26))
    assert table.fid_fixed.shape == (3, 8)
    avg = table.average_fixed()
    # convex-combination bound: average <= max_n F_n at every tau
    assert np.all(avg <= table.fid_fixed.max(axis=1) + 1e-12)
    assert np.all((0 <= table.fid_fixed) & (table.fid_fixed <= 1))


def test_average_fidelity_at_tau_zero_outputs_vacuum():
    # all heralded outputs are vacuum; the average reduces to (1-p0)*F(vacuum)
    val = average_fidelity(0.0, cutoff=FockCutoff(26))
    from catloop.env import EnvConfig, RewardModel
    from catloop.fock import vacuum
    rm = RewardModel(EnvConfig(dim=26))
    p, _ = one_step_outputs(0.0, 1.38, FockCutoff(26), "vacuum")
    expected = p[1:13].sum() * rm.best_fidelity(vacuum(FockCutoff(26)))
    assert abs(val - expected) < 1e-9


def test_smoothness_near_operating_point():
    grid = np.round(np.arange(0.10, 0.165, 0.005), 6)
    table = fixed_target_sweep(grid, n_max=8, cutoff=FockCutoff(26))
    diffs = np.abs(np.diff(table.fid_fixed, axis=0))
    assert np.max(diffs) < 0.05


def test_optimizer_dominates_grid_and_fixed():
    cut = FockCutoff(30)
    fitter = CatFitter(cut)
    table = moving_target_sweep(np.array([0.12, 0.146]), n_max=6, cutoff=cut,
                                fitter=fitter)
    assert np.all(table.fid_opt + 1e-9 >= table.fid_fixed)
    # dominance over the fitter's own coarse grid
    _, states = one_step_outputs(0.146, 1.38, cut, "orthogonal")
    bank, _ = fitter._bank(+1)
    coarse_best = float(np.max(np.abs(bank.conj() @ states[2].amplitudes) ** 2))
    f, a, r = optimize_target(0.146, 2, 1.38, cut)
    assert f + 1e-12 >= coarse_best


def test_moving_fit_n1_exact_family_on_vacuum_resident():
    # closed family: heralded n=1 is exactly a squeezed single photon with
    # tanh(r') = tau_sq tanh(r0); truncation blurs it slightly at large tau_sq
    cut = FockCutoff(30)
    for tau_sq, floor in ((0.1, 0.999999), (0.45, 0.999999), (0.85, 0.999)):
        f, a, r = optimize_target(tau_sq, 1, 1.38, cut, resident="vacuum")
        assert f > floor, tau_sq
        assert a <= 1.0
        if tau_sq <= 0.5:
            assert abs(r - np.arctanh(tau_sq * np.tanh(1.38))) < 0.01


def test_fringe_period_formula():
    assert abs(fringe_period(3.0, 1.38) - np.pi * np.exp(2.76) / 12.0) < 1e-12


def test_fringe_diagnostic_on_high_fidelity_cells():
    # best-fit cats of high fixed-fidelity cells share the target's fringe scale
    cut = FockCutoff(30)
    table = moving_target_sweep(np.array([0.12, 0.146]), n_max=6, cutoff=cut)
    xi_target = fringe_period(3.0, 1.38)
    hits = 0
    for i in range(table.fid_fixed.shape[0]):
        for j in range(table.fid_fixed.shape[1]):
            if table.fid_fixed[i, j] >= 0.95:
                xi = fringe_period(table.alpha_opt[i, j], table.r_opt[i, j])
                assert abs(xi - xi_target) / xi_target < 0.2
                hits += 1
    assert hits > 0


def test_local_maxima_helpers():
    xs = np.array([0.0, 0.05, 0.1, 0.15, 0.2, 0.25])
    ys = np.array([0.0, 0.3, 0.5, 0.4, 0.45, 0.1])
    maxima = interior_local_maxima(xs, ys)
    assert (0.1, 0.5) in maxima
    assert relevant_optimum(xs, ys) == (0.1, 0.5)


def test_sweep_csv_round_trip_and_plots(tmp_path):
    table = moving_target_sweep(np.array([0.14]), n_max=4, cutoff=FockCutoff(24))
    csv = tmp_path / "sweep.csv"
    table.to_csv(csv)
    text = csv.read_text().splitlines()
    assert text[1] == "tau_sq,n,p_n,fid_fixed,fid_opt,alpha_opt,r_opt"
    assert len(text) == 2 + 5  # header rows + n=0 line + 4 n-rows
    plot_fixed_sweep(table, tmp_path / "fixed.png")
    plot_moving_sweep(table, tmp_path / "moving.png")
    plot_average(table.tau_sq, table.average_fixed(), tmp_path / "avg.png")
    for f in ("fixed.png", "moving.png", "avg.png"):
        assert (tmp_path / f).stat().st_size > 0


def test_default_grid_resolution():
    grid = default_tau_grid()
    assert len(grid) == 201
    assert abs(grid[1] - grid[0] - 0.005) < 1e-12
