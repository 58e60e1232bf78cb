"""Gate construction and application on truncated Fock spaces.

All gates are exact exponentials of truncated generators. Anti-Hermitian
generators are exponentiated through an eigendecomposition of the associated
Hermitian matrix, so every GateMatrix is unitary to machine precision on the
whole truncated space; faithfulness to the untruncated gate degrades only in a
guard band near the cutoff.

Conventions (fixed project-wide):
    squeeze(r, theta=0)  = exp[(r/2)(a^2 - a^dag^2)]      r>0 squeezes x
    rotate(theta)        = exp(-i theta n)
    beamsplitter(tau)    = exp[theta_bs (a^dag b - a b^dag)], cos(theta_bs)=tau;
                           mode 0 output keeps tau of its own input plus
                           sqrt(1-tau^2) of mode 1; mode 1 output is the
                           complementary (detector) port.
    cz(g)                = exp(i g x1 x2)
    displace(beta)       = exp(beta a^dag - conj(beta) a)
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .basis import (DensityMatrix, FockCutoff, PureState, annihilation,
                    number_op, quadrature_x)


@dataclass(frozen=True)
class GateMatrix:
    matrix: np.ndarray
    label: str
    modes: int = 1

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @property
    def dim(self):
        d = self.matrix.shape[0]
        return d if self.modes == 1 else int(round(np.sqrt(d)))

    def unitarity_defect(self, guard=0):
        """max |U^dag U - I| restricted to total photon number <= dim - guard."""
        u = self.matrix
        m = u.conj().T @ u - np.eye(u.shape[0])
        if guard <= 0:
            return float(np.max(np.abs(m)))
        d = self.dim
        if self.modes == 1:
            keep = np.arange(d) <= d - guard
        else:
            n = np.arange(d)
            keep = (n[:, None] + n[None, :]).reshape(-1) <= d - guard
        return float(np.max(np.abs(m[np.ix_(keep, keep)])))


@lru_cache(maxsize=32)
def _squeeze_eigensystem(dim):
    a = annihilation(dim)
    herm = 0.5j * (a @ a - a.conj().T @ a.conj().T)
    lam, vec = np.linalg.eigh(herm)
    return lam, vec


def squeeze_unitary(r, dim, theta=0.0):
    """Matrix of exp[(r/2)(e^{-i theta} a^2 - e^{i theta} a^dag^2)]."""
    if theta == 0.0:
        lam, vec = _squeeze_eigensystem(dim)
        return (vec * np.exp(-1j * r * lam)) @ vec.conj().T
    a = annihilation(dim)
    gen = 0.5 * r * (np.exp(-1j * theta) * a @ a - np.exp(1j * theta) * a.conj().T @ a.conj().T)
    herm = 1j * gen
    lam, vec = np.linalg.eigh(herm)
    return (vec * np.exp(-1j * lam)) @ vec.conj().T


def build_squeeze(r, theta=0.0, cutoff=None):
    return GateMatrix(squeeze_unitary(r, cutoff.dim, theta), f"squeeze r={r:g} theta={theta:g}", 1)


def rotation_diag(theta, dim):
    return np.exp(-1j * theta * np.arange(dim))


def build_rotation(theta, cutoff):
    return GateMatrix(np.diag(rotation_diag(theta, cutoff.dim)), f"rotate theta={theta:g}", 1)


@lru_cache(maxsize=16)
def _bs_block_eigensystems(dim):
    """Per total-photon-number block eigendecompositions of i(a^dag b - a b^dag)."""
    blocks = []
    for total in range(2 * dim - 1):
        lo = max(0, total - dim + 1)
        hi = min(total, dim - 1)
        idx = np.array([n0 * dim + (total - n0) for n0 in range(lo, hi + 1)], dtype=int)
        size = len(idx)
        herm = np.zeros((size, size), dtype=complex)
        for i, n0 in enumerate(range(lo, hi + 1)):
            n1 = total - n0
            if n0 + 1 <= dim - 1 and n1 - 1 >= 0:
                amp = np.sqrt((n0 + 1) * n1)  # a^dag b |n0, n1> -> |n0+1, n1-1>
                herm[i + 1, i] += 1j * amp
                herm[i, i + 1] += -1j * amp
        lam, vec = np.linalg.eigh(herm)
        blocks.append((idx, lam, vec))
    return tuple(blocks)


@lru_cache(maxsize=4096)
def _bs_matrix_cached(tau, dim):
    theta = float(np.arccos(np.clip(tau, 0.0, 1.0)))
    u = np.zeros((dim * dim, dim * dim), dtype=complex)
    for idx, lam, vec in _bs_block_eigensystems(dim):
        ub = (vec * np.exp(-1j * theta * lam)) @ vec.conj().T
        u[np.ix_(idx, idx)] = ub
    u.setflags(write=False)
    return u


def build_beamsplitter(tau, cutoff):
    """Two-mode beamsplitter with field transmission tau in [0, 1].

    The unitary is block diagonal in total photon number by construction, so
    matrix elements between different total-n blocks are exactly zero. At
    tau=1 the kept arm (mode 0 output) carries mode 0's input unchanged; at
    tau=0 the two arms swap (up to sign).
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    return GateMatrix(_bs_matrix_cached(float(tau), cutoff.dim), f"beamsplitter tau={tau:g}", 2)


@lru_cache(maxsize=8)
def _x_eigensystem(dim):
    lam, vec = np.linalg.eigh(quadrature_x(dim))
    return lam, vec


def cz_apply_vec(vec2, g, dim):
    """Apply exp(i g x1 x2) to a two-mode vector without forming the matrix."""
    lam, v = _x_eigensystem(dim)
    m = vec2.reshape(dim, dim)
    y = v.conj().T @ m @ v.conj()
    y = y * np.exp(1j * g * np.outer(lam, lam))
    return (v @ y @ v.T).reshape(-1)


def build_cz(g, cutoff):
    """Controlled-phase gate exp(i g x1 x2) from truncated ladder operators."""
    d = cutoff.dim
    lam, v = _x_eigensystem(d)
    vv = np.kron(v, v)
    phases = np.exp(1j * g * np.outer(lam, lam)).reshape(-1)
    u = (vv * phases) @ vv.conj().T
    return GateMatrix(u, f"cz g={g:g}", 2)


def displacement_unitary(beta, dim):
    a = annihilation(dim)
    gen = beta * a.conj().T - np.conj(beta) * a
    herm = 1j * gen
    lam, vec = np.linalg.eigh(herm)
    return (vec * np.exp(-1j * lam)) @ vec.conj().T


def build_displacement(beta, cutoff):
    return GateMatrix(displacement_unitary(beta, cutoff.dim), f"displace beta={beta:g}", 1)


def _embed_single(gate, dim, mode):
    eye = np.eye(dim)
    if mode == 0:
        return np.kron(gate, eye)
    if mode == 1:
        return np.kron(eye, gate)
    raise ValueError(f"mode index {mode} out of range for a two-mode state")


def apply_gate(state, gate, mode=0):
    """Apply a gate to a PureState or DensityMatrix.

    For a single-mode gate acting on a two-mode state, `mode` selects the
    target. The result is renormalized and the norm change is folded into the
    recorded truncation deficit.
    """
    if isinstance(state, PureState):
        if gate.modes == state.modes:
            vec = gate.matrix @ state.amplitudes
        elif gate.modes == 1 and state.modes == 2:
            vec = _embed_single(gate.matrix, state.dim, mode) @ state.amplitudes
        else:
            raise ValueError(f"cannot apply {gate.modes}-mode gate to {state.modes}-mode state")
        n = np.linalg.norm(vec)
        deficit = state.truncation_deficit + max(0.0, 1.0 - n * n)
        return PureState(vec / n, state.cutoff, state.modes, float(deficit))
    if isinstance(state, DensityMatrix):
        if gate.modes == state.modes:
            u = gate.matrix
        elif gate.modes == 1 and state.modes == 2:
            u = _embed_single(gate.matrix, state.dim, mode)
        else:
            raise ValueError(f"cannot apply {gate.modes}-mode gate to {state.modes}-mode state")
        m = u @ state.matrix @ u.conj().T
        t = np.real(np.trace(m))
        deficit = state.truncation_deficit + max(0.0, 1.0 - t)
        return DensityMatrix(m / t, state.cutoff, state.modes, float(deficit))
    raise TypeError(f"unsupported state type {type(state)!r}")
