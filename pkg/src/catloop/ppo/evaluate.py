"""Deterministic-policy evaluation: histograms, success rate, lookup appends."""
from __future__ import annotations

import json
import os

import numpy as np

from ..env import LoopEnv, classify_output, EpisodeRecord
from ..fock.basis import FockCutoff
from ..fock.gates import apply_gate, build_rotation
from ..fock.basis import PureState
from ..lookup import LookupTable
from ..onestep import CatFitter

RESET_TAU = 0.99


def reset_statistics(tau_sequence, reset_threshold=RESET_TAU):
    """Reset count and the step gaps between resets.

    A reset is a step with tau >= reset_threshold. Gaps measure the number of
    steps from the previous reset (or the episode start) up to and including
    each reset step; the trailing segment after the last reset is not a gap.
    """
    resets = [i for i, t in enumerate(tau_sequence) if t >= reset_threshold]
    gaps = []
    prev = -1
    for i in resets:
        gaps.append(i - prev)
        prev = i
    return len(resets), gaps


def episode_success(env, record, fitter, threshold=0.95, fourier_aware=True):
    """Whether the final state is any well-separated squeezed cat.

    The candidate family has the parity classified from the detection record
    and alpha >= 1; fourier-classified episodes are rotated back by pi/2
    before fitting.
    """
    state = env.loop_state()
    if not isinstance(state, PureState):
        return False, 0.0
    parity_label, kind = classify_output(record)
    parity = +1 if parity_label == "even" else -1
    if fourier_aware and kind == "fourier":
        state = apply_gate(state, build_rotation(-np.pi / 2, state.cutoff))
    f, a, r, _ = fitter.fit(state, parity)
    return bool(f >= threshold and a >= 1.0), float(f)


def evaluate(agent, env_config, episodes_per_seed, seeds, lookup_path=None,
             success_threshold=0.95, eval_horizon=None):
    """Run deterministic episodes over several seeds and aggregate statistics.

    Returns a report dict with the four histogram datasets (final fidelity,
    photons per episode, steps per episode, steps between resets), the
    success-rate statistic, and per-episode records. Episodes are appended to
    the lookup table when a path is given.
    """
    if eval_horizon is not None:
        from dataclasses import replace
        env_config = replace(env_config, horizon=eval_horizon)
    fitter = CatFitter(FockCutoff(env_config.dim),
                       alpha_grid=np.arange(1.0, 4.0001, 0.15),
                       alpha_bounds=(1.0, 6.0))
    table = LookupTable(lookup_path) if lookup_path else None

    records, fidelities, photons, steps, gaps_all = [], [], [], [], []
    successes, success_fids, reset_counts = [], [], []
    for seed in seeds:
        env = LoopEnv(env_config, np.random.default_rng(seed))
        for ep in range(episodes_per_seed):
            obs = env.reset()
            done = False
            taus = []
            while not done:
                action, _, _ = _det_action(agent, obs)
                obs, _, done, info = env.step(action)
                taus.append(info["tau"])
            rec = env.record
            ok, best_cat_fid = episode_success(env, rec, fitter, success_threshold)
            successes.append(ok)
            success_fids.append(best_cat_fid)
            n_resets, gaps = reset_statistics(taus)
            reset_counts.append(n_resets)
            gaps_all.extend(gaps)
            fidelities.append(rec.final_fidelity)
            photons.append(rec.total_photons)
            steps.append(rec.steps)
            records.append(rec)
            if table is not None:
                table.append(rec)

    n_total = len(records)
    report = {
        "episodes": n_total,
        "seeds": list(map(int, seeds)),
        "success_rate": float(np.mean(successes)) if n_total else 0.0,
        "success_threshold": success_threshold,
        "mean_final_fidelity": float(np.mean(fidelities)) if n_total else 0.0,
        "mean_best_fidelity": float(np.mean([r.best_fidelity for r in records])) if n_total else 0.0,
        "mean_photons": float(np.mean(photons)) if n_total else 0.0,
        "mean_steps": float(np.mean(steps)) if n_total else 0.0,
        "histograms": {
            "final_fidelity": [float(x) for x in fidelities],
            "photons_per_episode": [int(x) for x in photons],
            "steps_per_episode": [int(x) for x in steps],
            "steps_between_resets": [int(x) for x in gaps_all],
        },
        "reset_episode_fraction": float(np.mean([c > 0 for c in reset_counts])) if n_total else 0.0,
        "early_termination_fraction": float(np.mean(
            [r.steps < env_config.horizon for r in records])) if n_total else 0.0,
    }
    return report, records


def _det_action(agent, obs):
    mean = agent.policy.forward(np.asarray(obs, dtype=float))
    action = agent.squash(mean)
    return action, None, None


def histogram_csv(report, out_dir):
    paths = {}
    os.makedirs(out_dir, exist_ok=True)
    specs = {
        "final_fidelity": np.linspace(0.0, 1.0, 21),
        "photons_per_episode": None,
        "steps_per_episode": None,
        "steps_between_resets": None,
    }
    for name, data in report["histograms"].items():
        bins = specs[name]
        if bins is None:
            hi = max(data) if data else 1
            bins = np.arange(-0.5, hi + 1.5, 1.0)
        counts, edges = np.histogram(data, bins=bins)
        path = os.path.join(out_dir, f"hist_{name}.csv")
        with open(path, "w") as fh:
            fh.write("bin_left,bin_right,count\n")
            for c, lo, hi_ in zip(counts, edges[:-1], edges[1:]):
                fh.write(f"{float(lo)!r},{float(hi_)!r},{int(c)}\n")
        paths[name] = path
    return paths


def histogram_png(report, path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(2, 2, figsize=(9, 6))
    panels = [
        ("final_fidelity", "output state fidelity", np.linspace(0, 1, 21)),
        ("photons_per_episode", "detected photons per episode", None),
        ("steps_per_episode", "steps per episode (with resets)", None),
        ("steps_between_resets", "steps between resets", None),
    ]
    for ax, (key, title, bins) in zip(axes.ravel(), panels):
        data = report["histograms"][key]
        if bins is None:
            hi = max(data) if data else 1
            bins = np.arange(-0.5, hi + 1.5, 1.0)
        ax.hist(data, bins=bins, color="#4477aa", edgecolor="k", linewidth=0.3)
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata={"Software": "catloop"})
    plt.close(fig)


def save_report(report, path):
    with open(path, "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=1)
