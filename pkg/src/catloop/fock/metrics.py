"""State fidelity."""
from __future__ import annotations

import numpy as np

from .basis import DensityMatrix, PureState


def overlap(a, b):
    """|<a|b>|^2 for pure states."""
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def _sqrtm_psd(m, floor=-1e-8):
    h = (m + m.conj().T) / 2
    evals, vecs = np.linalg.eigh(h)
    if float(evals.min()) < floor:
        raise ValueError(f"matrix is not positive semidefinite (min eig {evals.min():.3e})")
    # eigenvalues at the double-precision noise floor are zeros of the input;
    # clipping them keeps sqrt() from amplifying the noise to ~1e-8
    evals = np.where(evals > evals.max() * 1e-14, evals, 0.0)
    return (vecs * np.sqrt(evals)) @ vecs.conj().T


def fidelity(state1, state2):
    """Uhlmann fidelity Tr^2 sqrt(sqrt(rho1) rho2 sqrt(rho1)).

    Pure inputs use the overlap reduction |<psi1|psi2>|^2 (to which the general
    expression provably reduces). Mixed inputs go through Hermitian
    eigendecompositions.
    """
    pure1 = isinstance(state1, PureState)
    pure2 = isinstance(state2, PureState)
    if state1.cutoff != state2.cutoff or state1.modes != state2.modes:
        raise ValueError("fidelity needs states on matching spaces")
    if pure1 and pure2:
        return overlap(state1, state2)
    if pure1:
        v = state1.amplitudes
        return float(np.real(np.vdot(v, state2.matrix @ v)))
    if pure2:
        v = state2.amplitudes
        return float(np.real(np.vdot(v, state1.matrix @ v)))
    s1 = _sqrtm_psd(state1.matrix)
    inner = s1 @ state2.matrix @ s1
    s = _sqrtm_psd(inner)
    val = float(np.real(np.trace(s))) ** 2
    if val > 1.0 + 1e-6:
        raise ValueError(f"fidelity {val} > 1; inputs are not normalized density matrices")
    return float(min(max(val, 0.0), 1.0))
