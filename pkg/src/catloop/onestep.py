"""Single-step heralded-state analysis: sweeps, averages, moving-target fits.

The single-step circuit sends a fresh squeezed vacuum |0, r0> through the
variable beamsplitter whose cross-coupling power is tau_sq; the resident arm
holds either vacuum (the loop's first step) or the orthogonally squeezed
partner |0, r0, theta=pi>. A PNR outcome n on the detector arm heralds the
kept state.

Fidelity columns:
    fid_fixed: best fidelity against the four fixed cat targets
               (alpha, r) plus their pi/2 rotations, parity-selected
               automatically by orthogonality.
    fid_opt:   fidelity maximized over squeezed-cat parameters (alpha, r),
               cat parity matched to the parity of n.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import ZeroProbabilityError
from .fock.basis import FockCutoff, PureState, squeezed_cat, squeezed_vacuum, vacuum, product_state
from .fock.gates import apply_gate, build_beamsplitter, build_rotation

RESIDENTS = ("vacuum", "orthogonal")
ODD_ALPHA_FLOOR = 0.02


def fringe_period(alpha, r):
    """Interference-fringe spacing of a squeezed cat, pi e^{2r} / (4 alpha)."""
    return float(np.pi * np.exp(2.0 * r) / (4.0 * alpha))


def _circuit_inputs(resident, r0, cutoff):
    """(injected, resident) pair; the injected state crosses with amplitude
    sqrt(tau_sq) into the kept arm, the resident survives there with the
    complement. In the orthogonal variant the resident is the x-squeezed
    state and the injected one is squeezed along p."""
    if resident == "vacuum":
        return squeezed_vacuum(r0, 0.0, cutoff, max_deficit=None), vacuum(cutoff)
    if resident == "orthogonal":
        return (squeezed_vacuum(r0, np.pi, cutoff, max_deficit=None),
                squeezed_vacuum(r0, 0.0, cutoff, max_deficit=None))
    raise ValueError(f"resident must be one of {RESIDENTS}, got {resident!r}")


def one_step_outputs(tau_sq, r0, cutoff, resident="vacuum"):
    """All heralded states and their probabilities in one beamsplitter pass.

    Returns (p, states): p[n] is the probability of detecting n photons and
    states[n] the corresponding normalized kept state (None for numerically
    impossible outcomes).
    """
    fresh, res = _circuit_inputs(resident, r0, cutoff)
    two = product_state(fresh, res)
    two = apply_gate(two, build_beamsplitter(np.sqrt(tau_sq), cutoff))
    d = cutoff.dim
    m = two.amplitudes.reshape(d, d)
    p = np.sum(np.abs(m) ** 2, axis=0)
    states = []
    for n in range(d):
        if p[n] < 1e-14:
            states.append(None)
        else:
            states.append(PureState(m[:, n] / np.sqrt(p[n]), cutoff, 1, two.truncation_deficit))
    return p, states


def one_step_state(tau_sq, n, r0, cutoff, resident="vacuum"):
    """Heralded state for one detector outcome; returns (state, probability)."""
    if n < 0:
        raise ValueError("photon count must be non-negative")
    p, states = one_step_outputs(tau_sq, r0, cutoff, resident)
    if states[n] is None:
        raise ZeroProbabilityError(f"outcome n={n} at tau_sq={tau_sq} has probability {p[n]:.3e}")
    return states[n], float(p[n])


def fixed_targets(alpha, r, cutoff):
    plus = squeezed_cat(alpha, r, +1, cutoff, max_deficit=None)
    minus = squeezed_cat(alpha, r, -1, cutoff, max_deficit=None)
    rot = build_rotation(np.pi / 2, cutoff)
    return [plus, minus, apply_gate(plus, rot), apply_gate(minus, rot)]


def _best_fixed_fidelity(state, targets):
    return max(abs(np.vdot(t.amplitudes, state.amplitudes)) ** 2 for t in targets)


class CatFitter:
    """Two-stage (coarse grid + simplex) squeezed-cat fit at a fixed cutoff."""

    def __init__(self, cutoff, alpha_grid=None, r_grid=None,
                 alpha_bounds=(0.0, 6.0), r_bounds=(-1.5, 2.5), fatol=1e-10):
        self.cutoff = cutoff
        self.alpha_grid = alpha_grid if alpha_grid is not None else np.arange(0.0, 4.0001, 0.1)
        self.r_grid = r_grid if r_grid is not None else np.arange(-0.5, 2.0001, 0.1)
        self.alpha_bounds = alpha_bounds
        self.r_bounds = r_bounds
        self.fatol = fatol
        self._banks = {}

    def _bank(self, parity):
        if parity not in self._banks:
            vecs, params = [], []
            for a in self.alpha_grid:
                if parity < 0 and a < ODD_ALPHA_FLOOR:
                    a = ODD_ALPHA_FLOOR
                for r in self.r_grid:
                    vecs.append(squeezed_cat(float(a), float(r), parity, self.cutoff,
                                             max_deficit=None).amplitudes)
                    params.append((float(a), float(r)))
            self._banks[parity] = (np.stack(vecs), params)
        return self._banks[parity]

    def _cat_vec(self, alpha, r, parity):
        return squeezed_cat(alpha, r, parity, self.cutoff, max_deficit=None).amplitudes

    def fit(self, state, parity, extra_seeds=()):
        """Maximize |<cat(alpha, r, parity)|state>|^2.

        Returns (fidelity, alpha, r, converged). Falls back to the best grid
        point (converged=False) if the simplex never improves on it.
        """
        alpha_min = ODD_ALPHA_FLOOR if parity < 0 else 0.0
        bank, params = self._bank(parity)
        scores = np.abs(bank.conj() @ state.amplitudes) ** 2
        k = int(np.argmax(scores))
        best = (float(scores[k]), params[k][0], params[k][1])

        def neg(x):
            a = float(np.clip(x[0], alpha_min, self.alpha_bounds[1]))
            r = float(np.clip(x[1], *self.r_bounds))
            vec = self._cat_vec(a, r, parity)
            return -abs(np.vdot(vec, state.amplitudes)) ** 2

        seeds = [best[1:]] + list(extra_seeds)
        result, converged = best, False
        for seed in seeds:
            res = minimize(neg, list(seed), method="Nelder-Mead",
                           options={"fatol": self.fatol, "xatol": 1e-8, "maxfev": 600})
            if -res.fun > result[0]:
                a = float(np.clip(res.x[0], alpha_min, self.alpha_bounds[1]))
                r = float(np.clip(res.x[1], *self.r_bounds))
                result = (-res.fun, a, r)
                converged = bool(res.success)
        return result[0], result[1], result[2], converged or result[0] >= best[0]


def optimize_target(tau_sq, n, r0, cutoff, resident="orthogonal", fitter=None):
    """Best squeezed-cat description of one heralded state.

    Returns (fid_opt, alpha_opt, r_opt). The trial-cat parity matches the
    parity of n (the heralded state is an exact parity eigenstate).
    """
    if n < 1:
        raise ValueError("optimize_target needs n >= 1")
    state, _ = one_step_state(tau_sq, n, r0, cutoff, resident)
    fitter = fitter or CatFitter(cutoff)
    parity = +1 if n % 2 == 0 else -1
    extra = []
    if n == 1:
        # exact family point of the vacuum-resident circuit; a good seed always
        extra.append((ODD_ALPHA_FLOOR, float(np.arctanh(min(tau_sq * np.tanh(r0), 0.999)))))
    f, a, r, _ = fitter.fit(state, parity, extra_seeds=extra)
    return f, a, r


@dataclass
class SweepTable:
    """Per-(tau_sq, n) heralding data backing the sweep figures."""

    tau_sq: np.ndarray
    n_values: np.ndarray
    p: np.ndarray            # (n_tau, n_max+1) outcome probabilities incl. n=0
    tail: np.ndarray         # (n_tau,) probability mass beyond n_max
    fid_fixed: np.ndarray    # (n_tau, n_max) for n = 1..n_max
    fid_opt: np.ndarray | None = None
    alpha_opt: np.ndarray | None = None
    r_opt: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def average_fixed(self):
        """Per-tau average of fid_fixed over p_n, n >= 1; tail mass counts as 0."""
        return np.sum(self.p[:, 1:] * self.fid_fixed, axis=1)

    def average_opt(self):
        if self.fid_opt is None:
            raise ValueError("table has no moving-target columns")
        return np.sum(self.p[:, 1:] * self.fid_opt, axis=1)

    def to_csv(self, path):
        cols = ["tau_sq", "n", "p_n", "fid_fixed"]
        moving = self.fid_opt is not None
        if moving:
            cols += ["fid_opt", "alpha_opt", "r_opt"]
        with open(path, "w") as fh:
            fh.write("# " + json.dumps(self.metadata, sort_keys=True) + "\n")
            fh.write(",".join(cols) + "\n")
            for i, ts in enumerate(self.tau_sq):
                fh.write(f"{ts!r},0,{self.p[i, 0]!r},\n")
                for j, n in enumerate(self.n_values):
                    row = [repr(float(ts)), str(int(n)), repr(float(self.p[i, j + 1])),
                           repr(float(self.fid_fixed[i, j]))]
                    if moving:
                        row += [repr(float(self.fid_opt[i, j])),
                                repr(float(self.alpha_opt[i, j])),
                                repr(float(self.r_opt[i, j]))]
                    fh.write(",".join(row) + "\n")


def default_tau_grid(step=0.005):
    return np.round(np.arange(0.0, 1.0 + step / 2, step), 10)


def fixed_target_sweep(tau_grid=None, n_max=12, target_alpha=3.0, target_r=1.38,
                       r0=1.38, cutoff=None, resident="vacuum"):
    """Fidelity-vs-tau_sq table against the fixed four-target set."""
    cutoff = cutoff or FockCutoff(30)
    tau_grid = default_tau_grid() if tau_grid is None else np.asarray(tau_grid, dtype=float)
    targets = fixed_targets(target_alpha, target_r, cutoff)
    n_vals = np.arange(1, n_max + 1)
    p_out = np.zeros((len(tau_grid), n_max + 1))
    tail = np.zeros(len(tau_grid))
    ff = np.zeros((len(tau_grid), n_max))
    for i, ts in enumerate(tau_grid):
        p, states = one_step_outputs(ts, r0, cutoff, resident)
        p_out[i] = p[:n_max + 1]
        tail[i] = max(0.0, 1.0 - float(p[:n_max + 1].sum()))
        for j, n in enumerate(n_vals):
            ff[i, j] = _best_fixed_fidelity(states[n], targets) if states[n] is not None else 0.0
    meta = {"kind": "fixed", "resident": resident, "r0": r0, "dim": cutoff.dim,
            "target_alpha": target_alpha, "target_r": target_r, "n_max": n_max,
            "convention": "tau_sq = cross-coupling power of the variable beamsplitter"}
    return SweepTable(tau_grid, n_vals, p_out, tail, ff, metadata=meta)


def moving_target_sweep(tau_grid=None, n_max=12, target_alpha=3.0, target_r=1.38,
                        r0=1.38, cutoff=None, resident="orthogonal", fitter=None):
    """Fixed-target table plus per-cell optimal squeezed-cat fits."""
    cutoff = cutoff or FockCutoff(40)
    table = fixed_target_sweep(tau_grid, n_max, target_alpha, target_r, r0, cutoff, resident)
    fitter = fitter or CatFitter(cutoff)
    n_tau, n_cols = table.fid_fixed.shape
    fo = np.zeros((n_tau, n_cols))
    ao = np.zeros((n_tau, n_cols))
    ro = np.zeros((n_tau, n_cols))
    for i, ts in enumerate(table.tau_sq):
        p, states = one_step_outputs(ts, r0, cutoff, resident)
        for j, n in enumerate(table.n_values):
            if states[n] is None:
                fo[i, j] = np.nan
                continue
            parity = +1 if n % 2 == 0 else -1
            extra = []
            if n == 1:
                extra.append((ODD_ALPHA_FLOOR, float(np.arctanh(min(ts * np.tanh(r0), 0.999)))))
            f, a, r, _ = fitter.fit(states[n], parity, extra_seeds=extra)
            fo[i, j], ao[i, j], ro[i, j] = f, a, r
    table.fid_opt, table.alpha_opt, table.r_opt = fo, ao, ro
    table.metadata["kind"] = "moving"
    table.metadata["resident"] = resident
    return table


def average_fidelity(tau_sq, r0=1.38, cutoff=None, n_max=12, target_alpha=3.0,
                     target_r=1.38, resident="vacuum"):
    """Probability-weighted fixed-target fidelity at one tau_sq (n=0 excluded)."""
    cutoff = cutoff or FockCutoff(30)
    table = fixed_target_sweep(np.array([tau_sq]), n_max, target_alpha, target_r,
                               r0, cutoff, resident)
    return float(table.average_fixed()[0])


def average_optimal_fidelity(tau_sq, r0=1.38, cutoff=None, n_max=12,
                             resident="orthogonal", fitter=None):
    """Probability-weighted optimal-cat fidelity at one tau_sq (n=0 excluded)."""
    cutoff = cutoff or FockCutoff(40)
    table = moving_target_sweep(np.array([tau_sq]), n_max, r0=r0, cutoff=cutoff,
                                resident=resident, fitter=fitter)
    vals = np.nan_to_num(table.fid_opt, nan=0.0)
    return float(np.sum(table.p[0, 1:] * vals[0]))


def interior_local_maxima(tau_sq, values, lo=0.02, hi=0.9):
    """Strict interior local maxima of a sampled curve inside [lo, hi]."""
    out = []
    for i in range(1, len(tau_sq) - 1):
        if lo <= tau_sq[i] <= hi and values[i] >= values[i - 1] and values[i] >= values[i + 1]:
            out.append((float(tau_sq[i]), float(values[i])))
    return out


def relevant_optimum(tau_sq, values, lo=0.02, hi=0.9):
    """Largest interior local maximum of the average curve (degenerate
    boundary behavior near tau_sq -> 0 and -> 1 excluded)."""
    maxima = interior_local_maxima(tau_sq, values, lo, hi)
    if not maxima:
        return None
    return max(maxima, key=lambda m: m[1])


def plot_fixed_sweep(table, path, reference_tau_sq=0.12):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for j, n in enumerate(table.n_values):
        ax.plot(table.tau_sq, table.fid_fixed[:, j], lw=1, label=f"n={n}")
    ax.axvline(reference_tau_sq, ls="-.", color="k", lw=1)
    ax.set_xlabel(r"$\tau^2$")
    ax.set_ylabel("fidelity to fixed target")
    ax.legend(fontsize=6, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata={"Software": "catloop"})
    plt.close(fig)


def plot_average(tau_sq, values, path, label="average fidelity", mark_argmax=True):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(tau_sq, values, lw=1.2)
    if mark_argmax and len(values):
        best = relevant_optimum(tau_sq, values) or (tau_sq[int(np.argmax(values))],
                                                    float(np.max(values)))
        ax.axvline(best[0], ls="-.", color="k", lw=1)
        ax.annotate(f"optimum at {best[0]:.3f}", (best[0], best[1]),
                    textcoords="offset points", xytext=(6, -12), fontsize=8)
    ax.set_xlabel(r"$\tau^2$")
    ax.set_ylabel(label)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata={"Software": "catloop"})
    plt.close(fig)


def plot_moving_sweep(table, path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(3, 1, figsize=(6, 8), sharex=True)
    panels = [("fid_opt", table.fid_opt, "optimal fidelity"),
              ("alpha_opt", table.alpha_opt, r"$\alpha_{opt}$"),
              ("r_opt", table.r_opt, r"$r_{opt}$")]
    for ax, (_, data, title) in zip(axes, panels):
        for j, n in enumerate(table.n_values):
            ax.plot(table.tau_sq, data[:, j], lw=1, label=f"n={n}")
        ax.set_ylabel(title)
    axes[0].legend(fontsize=6, ncol=2)
    axes[-1].set_xlabel(r"$\tau^2$")
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata={"Software": "catloop"})
    plt.close(fig)
