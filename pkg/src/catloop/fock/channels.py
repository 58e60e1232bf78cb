"""Bosonic channels; currently the pure-loss channel."""
from __future__ import annotations

import numpy as np
from scipy.special import gammaln

from .basis import DensityMatrix, PureState, annihilation


def loss_kraus_operators(eta, dim, trace_floor=1e-12):
    """Kraus operators K_k = sqrt((1-eta)^k / k!) eta^{n/2} a^k of a pure-loss channel.

    The list is truncated once the channel applied to a maximally mixed probe
    is trace-preserving within trace_floor (k can never exceed dim-1).
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    a = annihilation(dim)
    n = np.arange(dim)
    if eta == 0.0:
        # total loss: K_k maps |k> to |0>
        ops = []
        for k in range(dim):
            m = np.zeros((dim, dim), dtype=complex)
            m[0, k] = 1.0
            ops.append(m)
        return ops
    eta_half_n = np.power(eta, n / 2.0)
    ops = []
    ak = np.eye(dim, dtype=complex)
    completeness = np.zeros((dim, dim), dtype=complex)
    for k in range(dim):
        if k > 0:
            ak = a @ ak
        if eta == 1.0 and k > 0:
            break
        log_coef = 0.5 * (k * np.log(1.0 - eta) - gammaln(k + 1)) if eta < 1.0 else 0.0
        kk = np.exp(log_coef) * (eta_half_n[:, None] * ak)
        ops.append(kk)
        completeness += kk.conj().T @ kk
        if float(np.max(np.abs(np.diag(completeness) - 1.0))) < trace_floor:
            break
    return ops


def loss_channel(rho, eta, mode=None, trace_floor=1e-12):
    """Apply a pure-loss channel of power transmissivity eta.

    Accepts a single-mode DensityMatrix, or a two-mode one with `mode`
    selecting the lossy arm. PureState input is converted to a DensityMatrix
    (loss generally produces mixed states).
    """
    if isinstance(rho, PureState):
        rho = rho.to_density()
    d = rho.dim
    ops = loss_kraus_operators(eta, d, trace_floor)
    if rho.modes == 2:
        if mode not in (0, 1):
            raise ValueError("two-mode input needs mode=0 or 1")
        eye = np.eye(d)
        ops = [np.kron(k, eye) if mode == 0 else np.kron(eye, k) for k in ops]
    out = np.zeros_like(rho.matrix)
    for k in ops:
        out += k @ rho.matrix @ k.conj().T
    out = (out + out.conj().T) / 2
    return DensityMatrix(out, rho.cutoff, rho.modes, rho.truncation_deficit)
