"""Wigner function from Fock-basis density matrices.

W(x, p) = (1/pi) Tr[rho D(2 alpha) Pi], alpha = (x + i p)/sqrt(2), evaluated
through the generalized-Laguerre expansion of displacement matrix elements.
Normalization: integral of W over dx dp equals 1, so the vacuum gives
W(0,0) = 1/pi.
"""
from __future__ import annotations

import numpy as np
from scipy.special import gammaln

from .basis import DensityMatrix, PureState


def wigner(state, xs, ps):
    """Evaluate W on a grid.

    Args:
        state: single-mode PureState or DensityMatrix.
        xs, ps: 1-d arrays of quadrature values.

    Returns:
        Array of shape (len(xs), len(ps)) with W[i, j] = W(xs[i], ps[j]).
    """
    if state.modes != 1:
        raise ValueError("wigner supports single-mode states")
    rho = state.matrix if isinstance(state, DensityMatrix) else None
    vec = state.amplitudes if isinstance(state, PureState) else None
    d = state.dim

    x = np.asarray(xs, dtype=float)[:, None]
    p = np.asarray(ps, dtype=float)[None, :]
    beta = np.sqrt(2.0) * (x + 1j * p)  # 2 alpha
    z = np.abs(beta) ** 2
    w = np.zeros(z.shape, dtype=complex)

    signs = (-1.0) ** np.arange(d)
    for k in range(d):
        # diagonal rho_{n, n+k}, weights c_n = rho_{n,n+k} (-1)^n sqrt(n!/(n+k)!)
        ns = np.arange(d - k)
        if rho is not None:
            diag = np.array([rho[n, n + k] for n in ns])
        else:
            diag = np.conj(vec[ns]) * vec[ns + k]
        coef = diag * signs[ns] * np.exp(0.5 * (gammaln(ns + 1) - gammaln(ns + k + 1)))
        if not np.any(coef):
            continue
        # Laguerre recurrence L_n^{(k)}(z) over n, accumulated on the grid
        acc = np.zeros(z.shape, dtype=complex)
        l_prev = np.ones_like(z)
        acc += coef[0] * l_prev
        if len(ns) > 1:
            l_cur = 1.0 + k - z
            acc += coef[1] * l_cur
            for n in range(1, len(ns) - 1):
                l_next = ((2 * n + k + 1 - z) * l_cur - (n + k) * l_prev) / (n + 1)
                l_prev, l_cur = l_cur, l_next
                acc += coef[n + 1] * l_cur
        term = acc * beta ** k
        w += term if k == 0 else term + np.conj(term)
    return np.real(w) * np.exp(-0.5 * z) / np.pi


def default_grid(extent=6.0, points=121):
    g = np.linspace(-extent, extent, points)
    return g, g.copy()


def wigner_to_csv(path, xs, ps, w):
    """Write rows (x, p, W) with full precision."""
    with open(path, "w") as fh:
        fh.write("x,p,W\n")
        for i, x in enumerate(xs):
            for j, p in enumerate(ps):
                fh.write(f"{float(x)!r},{float(p)!r},{float(w[i, j])!r}\n")


def wigner_png(path, xs, ps, w, title=None):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(4.5, 4))
    lim = float(np.max(np.abs(w)))
    mesh = ax.pcolormesh(xs, ps, w.T, cmap="RdBu_r", vmin=-lim, vmax=lim, shading="auto")
    fig.colorbar(mesh, ax=ax)
    ax.set_xlabel("x")
    ax.set_ylabel("p")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata={"Software": "catloop"})
    plt.close(fig)
