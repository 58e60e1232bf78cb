"""Cat and GKP breeding pipelines: interfere two states, measure one arm.

A breeding stage takes a top and a bottom input, optionally rotates the
bottom, couples the modes through a 50:50 beamsplitter or a CZ gate, rotates
the top arm (choosing the measured quadrature) and homodyne-measures it. In
post-selected mode the outcome is pinned to a window around x_star and the
stage reports the acceptance probability; in corrected mode the outcome is
sampled and a compensating displacement is applied to the survivor. Output
post-processing is a squeeze (dB) followed by a rotation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import ConfigError, ZeroProbabilityError
from .fock.basis import (FockCutoff, PureState, gkp_state, product_state,
                         squeezed_cat, vacuum)
from .fock.gates import (apply_gate, build_beamsplitter, build_cz,
                         build_displacement, build_rotation, build_squeeze)
from .fock.measure import homodyne_density_grid, homodyne_project
from .fock.metrics import fidelity
from .onestep import one_step_state

DB_TO_R = np.log(10.0) / 20.0


def db_to_r(db):
    """Squeezing parameter from decibels: r = db ln(10) / 20."""
    return float(db * DB_TO_R)


@dataclass(frozen=True)
class BreedingConfig:
    """One breeding stage. Angles are radians; tau_sq is the prep coupling."""

    tau_sq: float = 0.146
    r0: float = 1.38
    gate: str = "cz"                 # "cz" or "bs" (50:50)
    cz_gain: float = 1.0
    rot_bottom: float = 0.0
    rot_meas: float = np.pi / 2      # 0 measures x of the top arm; pi/2 measures p
    x_star: float = 0.0
    homodyne_mode: str = "post_selected"   # or "corrected"
    window: float = 0.1
    correction_coef: float = 1.0
    post_squeeze_db: float = 0.0
    post_rotation: float = 0.0
    dim: int = 40

    def __post_init__(self):
        if self.gate not in ("bs", "cz"):
            raise ConfigError(f"gate must be 'bs' or 'cz', got {self.gate!r}")
        if self.homodyne_mode not in ("post_selected", "corrected"):
            raise ConfigError(f"unknown homodyne_mode {self.homodyne_mode!r}")
        if self.homodyne_mode == "post_selected" and self.window <= 0:
            raise ConfigError("post-selected mode needs a positive window half-width")

    @property
    def cutoff(self):
        return FockCutoff(self.dim)

    def to_dict(self):
        return asdict(self)


@dataclass
class BreedResult:
    state: PureState
    x_outcome: float
    density: float
    acceptance_probability: float | None = None
    correction: float | None = None


def _couple(top, bottom, config):
    cut = config.cutoff
    two = product_state(top, apply_gate(bottom, build_rotation(config.rot_bottom, cut)))
    if config.gate == "bs":
        two = apply_gate(two, build_beamsplitter(np.sqrt(0.5), cut))
    else:
        two = apply_gate(two, build_cz(config.cz_gain, cut))
    if config.rot_meas != 0.0:
        two = apply_gate(two, build_rotation(config.rot_meas, cut), mode=0)
    return two


def _acceptance_probability(two, config, points=801):
    xs = np.linspace(config.x_star - config.window, config.x_star + config.window, points)
    dens = homodyne_density_grid(two, 0, xs)
    return float(np.trapezoid(dens, xs))


def _post_process(state, config):
    if config.post_squeeze_db != 0.0:
        state = apply_gate(state, build_squeeze(db_to_r(config.post_squeeze_db),
                                                cutoff=config.cutoff))
    if config.post_rotation != 0.0:
        state = apply_gate(state, build_rotation(config.post_rotation, config.cutoff))
    return state


def breed(top, bottom, config, rng=None):
    """Run one breeding stage; the surviving (bottom) arm carries the output."""
    two = _couple(top, bottom, config)
    if config.homodyne_mode == "post_selected":
        out, dens = homodyne_project(two, 0, config.x_star)
        accept = _acceptance_probability(two, config)
        out = _post_process(out, config)
        return BreedResult(out, config.x_star, dens, acceptance_probability=accept)
    if rng is None:
        raise ConfigError("corrected mode needs an rng for the homodyne draw")
    from .fock.measure import homodyne_sample
    x_m, out, dens = homodyne_sample(two, 0, rng)
    # null the outcome-dependent term the coupling imprinted on the survivor:
    # an x measurement (rot_meas = 0) leaves the linear phase e^{i g x_m x},
    # removed by a momentum kick; a p measurement (rot_meas = pi/2) shifts the
    # teleported argument, removed by a position shift
    shift = -config.correction_coef * config.cz_gain * x_m
    if abs(np.sin(config.rot_meas)) < 0.5:
        beta = 1j * shift / np.sqrt(2.0)      # momentum displacement
    else:
        beta = (-config.correction_coef * x_m / config.cz_gain) / np.sqrt(2.0)
    out = apply_gate(out, build_displacement(beta, config.cutoff))
    out = _post_process(out, config)
    return BreedResult(out, x_m, dens, correction=float(np.real(beta) + np.imag(beta)) * np.sqrt(2.0))


def breed_cats(state_a, state_b, config, rng=None):
    """Cat-amplification stage; top carries the larger input by convention."""
    return breed(state_a, state_b, config, rng)


def breed_gkp(cat_a, cat_b, config, rng=None):
    """Grid-state stage: same machinery, CZ coupling by default."""
    return breed(cat_a, cat_b, config, rng)


def prep_states(tau_sq, counts, r0, cutoff, resident="orthogonal"):
    """Heralded prep states for the given detector outcomes."""
    out = []
    for n in counts:
        state, p = one_step_state(tau_sq, n, r0, cutoff, resident)
        out.append((state, p))
    return out


def fail_mode_probability(tau_sq, r0=1.38, cutoff=None, resident="orthogonal", n_registers=4):
    """Exact multinomial fail-mode probabilities over independent PNR registers.

    Categories per register: zero count, one count, two-or-more counts, with
    probabilities (p0, p1, 1-p0-p1) from the single-step distribution.
    Returns {"p_3plus_zeros", "p_2zeros_with_one", "p0", "p1"}.
    """
    from math import comb

    cutoff = cutoff or FockCutoff(40)
    from .onestep import one_step_outputs
    p, _ = one_step_outputs(tau_sq, r0, cutoff, resident)
    p0, p1 = float(p[0]), float(p[1])
    p_rest = max(0.0, 1.0 - p0 - p1)
    total_3plus = 0.0
    total_2z_one = 0.0
    n = n_registers
    for k0 in range(n + 1):
        for k1 in range(n - k0 + 1):
            k2 = n - k0 - k1
            w = comb(n, k0) * comb(n - k0, k1) * p0 ** k0 * p1 ** k1 * p_rest ** k2
            if k0 >= 3:
                total_3plus += w
            if k0 == 2 and k1 >= 1:
                total_2z_one += w
    return {"p_3plus_zeros": total_3plus, "p_2zeros_with_one": total_2z_one,
            "p0": p0, "p1": p1}


# ---------------------------------------------------------------------------
# pipeline descriptors

def _build_target(spec, cutoff):
    kind = spec.get("kind")
    if kind == "squeezed_cat":
        return squeezed_cat(spec["alpha"], spec["r"], spec.get("parity", 1), cutoff)
    if kind == "gkp":
        return gkp_state(spec["logical"], spec["db"], cutoff)
    if kind == "vacuum":
        return vacuum(cutoff)
    raise ConfigError(f"unknown target kind {kind!r}")


def load_descriptor(path):
    with open(path) as fh:
        desc = json.load(fh)
    validate_descriptor(desc)
    return desc


def validate_descriptor(desc):
    for key in ("name", "cutoff", "prep", "stages"):
        if key not in desc:
            raise ConfigError(f"descriptor missing key {key!r}")
    known = {"breed_cats", "breed_gkp"}
    for stage in desc["stages"]:
        if stage.get("kind") not in known:
            raise ConfigError(f"unknown stage kind {stage.get('kind')!r}")
    return True


def run_pipeline(desc, rng=None):
    """Execute a breeding descriptor; returns per-stage results.

    The prep block heralds one state per requested count; stage inputs are
    either ["prep", i] indices or ["stage", j] outputs (breed_gkp defaults to
    two copies of the previous stage output).
    """
    validate_descriptor(desc)
    cutoff = FockCutoff(int(desc["cutoff"]))
    prep = desc["prep"]
    preps = prep_states(prep["tau_sq"], prep["counts"], prep.get("r0", 1.38),
                        cutoff, prep.get("resident", "orthogonal"))
    pool = {("prep", i): s for i, (s, _) in enumerate(preps)}
    results = [{
        "stage": "prep",
        "tau_sq": prep["tau_sq"],
        "counts": list(prep["counts"]),
        "probabilities": [p for _, p in preps],
    }]
    stage_outputs = []
    for j, stage in enumerate(desc["stages"]):
        cfg_fields = {k: v for k, v in stage.items()
                      if k in BreedingConfig.__dataclass_fields__}
        cfg = BreedingConfig(dim=cutoff.dim, r0=prep.get("r0", 1.38),
                             tau_sq=prep["tau_sq"], **cfg_fields)
        inputs = stage.get("inputs")
        if inputs is None:
            if stage["kind"] == "breed_cats":
                inputs = [["prep", 0], ["prep", 1]]
            else:
                inputs = [["stage", j - 1], ["stage", j - 1]]
        resolved = []
        for ref in inputs:
            key = (ref[0], int(ref[1]))
            if key[0] == "prep":
                resolved.append(pool[key])
            else:
                resolved.append(stage_outputs[key[1]])
        res = breed(resolved[0], resolved[1], cfg, rng)
        stage_outputs.append(res.state)
        entry = {
            "stage": stage["kind"],
            "config": cfg.to_dict(),
            "x_outcome": res.x_outcome,
            "acceptance_probability": res.acceptance_probability,
        }
        if "target" in stage:
            target = _build_target(stage["target"], cutoff)
            entry["target"] = stage["target"]
            entry["fidelity"] = fidelity(res.state, target)
        results.append(entry)
    return results, stage_outputs
