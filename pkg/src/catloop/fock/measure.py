"""Photon-number-resolving and homodyne measurements on two-mode states."""
from __future__ import annotations

import numpy as np

from ..errors import ZeroProbabilityError
from .basis import DensityMatrix, PureState

ZERO_PROB = 1e-14


def pnr_probabilities(state, mode=1):
    """Outcome distribution p_n of a number measurement on one mode."""
    d = state.dim
    if state.modes != 2:
        raise ValueError("pnr measurements act on two-mode states")
    if isinstance(state, PureState):
        m = state.amplitudes.reshape(d, d)
        p = np.sum(np.abs(m) ** 2, axis=0 if mode == 1 else 1)
    else:
        p = state.probabilities().sum(axis=0 if mode == 1 else 1)
    return np.maximum(np.real(p), 0.0)


def pnr_project(state, mode, n):
    """Project one mode onto |n> and return (remaining state, probability).

    Raises ZeroProbabilityError when p_n < 1e-14; in that case the caller must
    not renormalize the (meaningless) remainder.
    """
    d = state.dim
    if not 0 <= n < d:
        raise ValueError(f"detected count {n} outside cutoff {d}")
    if state.modes != 2:
        raise ValueError("pnr_project acts on two-mode states")
    if isinstance(state, PureState):
        m = state.amplitudes.reshape(d, d)
        vec = m[:, n] if mode == 1 else m[n, :]
        p = float(np.sum(np.abs(vec) ** 2))
        if p < ZERO_PROB:
            raise ZeroProbabilityError(f"outcome n={n} has probability {p:.3e}")
        out = PureState(vec / np.sqrt(p), state.cutoff, 1, state.truncation_deficit)
        return out, p
    # density path: <n| rho |n> on the measured mode
    rho = state.matrix.reshape(d, d, d, d)
    red = rho[:, n, :, n] if mode == 1 else rho[n, :, n, :]
    p = float(np.real(np.trace(red)))
    if p < ZERO_PROB:
        raise ZeroProbabilityError(f"outcome n={n} has probability {p:.3e}")
    out = DensityMatrix(red / p, state.cutoff, 1, state.truncation_deficit)
    return out, p


def pnr_sample(state, mode, rng):
    """Sample a PNR outcome and project; reproducible given the rng stream.

    Returns (n, remaining state, probability). Numerically impossible outcomes
    (p < 1e-14) are excluded from the draw so the projection cannot fail.
    """
    p = pnr_probabilities(state, mode)
    valid = p >= ZERO_PROB
    weights = np.where(valid, p, 0.0)
    weights = weights / weights.sum()
    n = int(rng.choice(len(p), p=weights))
    out, prob = pnr_project(state, mode, n)
    return n, out, prob


def hermite_wavefunctions(x, dim):
    """psi_n(x) for n = 0..dim-1 with hbar=1 (vacuum variance 1/2)."""
    h = np.zeros(dim)
    h[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if dim > 1:
        h[1] = np.sqrt(2.0) * x * h[0]
    for n in range(2, dim):
        h[n] = np.sqrt(2.0 / n) * x * h[n - 1] - np.sqrt((n - 1.0) / n) * h[n - 2]
    return h


def homodyne_project(state, mode, x):
    """Project one mode of a two-mode pure state onto the x-quadrature value.

    Returns (remaining normalized state, probability density at x). The
    density integrates to 1 over x.
    """
    if not isinstance(state, PureState) or state.modes != 2:
        raise ValueError("homodyne_project acts on two-mode pure states")
    d = state.dim
    w = hermite_wavefunctions(float(x), d)
    m = state.amplitudes.reshape(d, d)
    vec = (w @ m) if mode == 0 else (m @ w)
    dens = float(np.sum(np.abs(vec) ** 2))
    if dens < ZERO_PROB:
        raise ZeroProbabilityError(f"homodyne density at x={x} is {dens:.3e}")
    out = PureState(vec / np.sqrt(dens), state.cutoff, 1, state.truncation_deficit)
    return out, dens


def homodyne_density_grid(state, mode, xs):
    """Probability density of an x measurement evaluated on a grid."""
    d = state.dim
    m = state.amplitudes.reshape(d, d)
    ws = np.stack([hermite_wavefunctions(float(x), d) for x in xs])
    amps = ws @ m if mode == 0 else (m @ ws.T).T
    return np.sum(np.abs(amps) ** 2, axis=1)


def homodyne_sample(state, mode, rng, x_min=-12.0, x_max=12.0, points=4096):
    """Draw an x outcome by inverse CDF on a grid, then project at that x."""
    xs = np.linspace(x_min, x_max, points)
    dens = homodyne_density_grid(state, mode, xs)
    dx = xs[1] - xs[0]
    cdf = np.cumsum(dens) * dx
    total = cdf[-1]
    u = rng.random() * total
    i = int(np.searchsorted(cdf, u))
    i = min(max(i, 1), points - 1)
    # linear interpolation inside the bin
    c0, c1 = cdf[i - 1], cdf[i]
    frac = 0.0 if c1 == c0 else (u - c0) / (c1 - c0)
    x = xs[i - 1] + frac * dx
    out, d_at_x = homodyne_project(state, mode, x)
    return float(x), out, d_at_x
