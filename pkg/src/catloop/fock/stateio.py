"""JSON save/load for states.

Pure-state record:    {"kind": "pure_state", "version": 1, "modes": m,
                       "dim": d, "amplitudes": [[re, im], ...]}
Density record:       {"kind": "density_matrix", ...,
                       "matrix": [[re, im], ...]}  row-major
"""
from __future__ import annotations

import json

import numpy as np

from .basis import DensityMatrix, FockCutoff, PureState


def _pairs(arr):
    flat = np.asarray(arr).reshape(-1)
    return [[float(c.real), float(c.imag)] for c in flat]


def save_state(state, path):
    if isinstance(state, PureState):
        rec = {
            "kind": "pure_state",
            "version": 1,
            "modes": state.modes,
            "dim": state.dim,
            "truncation_deficit": state.truncation_deficit,
            "amplitudes": _pairs(state.amplitudes),
        }
    elif isinstance(state, DensityMatrix):
        rec = {
            "kind": "density_matrix",
            "version": 1,
            "modes": state.modes,
            "dim": state.dim,
            "truncation_deficit": state.truncation_deficit,
            "matrix": _pairs(state.matrix),
        }
    else:
        raise TypeError(f"cannot save {type(state)!r}")
    with open(path, "w") as fh:
        json.dump(rec, fh, sort_keys=True)


def load_state(path):
    with open(path) as fh:
        rec = json.load(fh)
    cutoff = FockCutoff(rec["dim"])
    modes = rec["modes"]
    deficit = rec.get("truncation_deficit", 0.0)
    if rec["kind"] == "pure_state":
        vec = np.array([complex(re, im) for re, im in rec["amplitudes"]])
        return PureState(vec, cutoff, modes, deficit)
    if rec["kind"] == "density_matrix":
        d = cutoff.dim ** modes
        m = np.array([complex(re, im) for re, im in rec["matrix"]]).reshape(d, d)
        return DensityMatrix(m, cutoff, modes, deficit)
    raise ValueError(f"unknown record kind {rec['kind']!r}")
