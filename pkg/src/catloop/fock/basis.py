"""States in a truncated Fock basis: one- and two-mode vectors and density matrices.

All amplitudes live in the number basis |0>, ..., |dim-1> (single mode) or the
row-major product basis |n0, n1> (two modes). hbar = 1, x = (a + a^dag)/sqrt(2),
so the vacuum quadrature variance is 1/2.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from ..errors import TruncationError, ZeroNormError

NORM_TOL = 1e-9


@dataclass(frozen=True)
class FockCutoff:
    """Number of retained Fock levels; photon numbers run 0..dim-1."""

    dim: int

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"cutoff dim must be >= 2, got {self.dim}")


def _freeze(arr):
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PureState:
    """Normalized state vector over the truncated Fock basis.

    amplitudes has length dim (one mode) or dim**2 (two modes, row-major over
    (n0, n1)). truncation_deficit records 1 - sum|c|^2 of the pre-normalization
    construction so tests can bound truncation error.
    """

    amplitudes: np.ndarray
    cutoff: FockCutoff
    modes: int = 1
    truncation_deficit: float = 0.0

    def __post_init__(self):
        expected = self.cutoff.dim ** self.modes
        if self.modes not in (1, 2):
            raise ValueError("modes must be 1 or 2")
        if self.amplitudes.shape != (expected,):
            raise ValueError(
                f"amplitude vector has shape {self.amplitudes.shape}, expected ({expected},)"
            )
        _freeze(self.amplitudes)

    @property
    def dim(self):
        return self.cutoff.dim

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self):
        n = self.norm()
        if n < 1e-150:
            raise ZeroNormError("cannot normalize a zero-norm state")
        return PureState(self.amplitudes / n, self.cutoff, self.modes, self.truncation_deficit)

    def inner(self, other):
        """<self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def probabilities(self):
        """Photon-number distribution; two-mode states return a (dim, dim) array."""
        p = np.abs(self.amplitudes) ** 2
        if self.modes == 2:
            return p.reshape(self.dim, self.dim)
        return p

    def to_density(self):
        rho = np.outer(self.amplitudes, self.amplitudes.conj())
        return DensityMatrix(rho, self.cutoff, self.modes, self.truncation_deficit)

    def mean_photon(self):
        p = np.abs(self.amplitudes) ** 2
        if self.modes == 1:
            return float(np.sum(np.arange(self.dim) * p))
        n = np.arange(self.dim)
        pm = p.reshape(self.dim, self.dim)
        return float(np.sum(pm * (n[:, None] + n[None, :])))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, trace-one operator over the truncated Fock basis."""

    matrix: np.ndarray
    cutoff: FockCutoff
    modes: int = 1
    truncation_deficit: float = 0.0

    def __post_init__(self):
        d = self.cutoff.dim ** self.modes
        if self.matrix.shape != (d, d):
            raise ValueError(f"density matrix has shape {self.matrix.shape}, expected ({d},{d})")
        _freeze(self.matrix)

    @property
    def dim(self):
        return self.cutoff.dim

    def trace(self):
        return float(np.real(np.trace(self.matrix)))

    def normalized(self):
        t = self.trace()
        if t < 1e-150:
            raise ZeroNormError("cannot normalize a zero-trace density matrix")
        return DensityMatrix(self.matrix / t, self.cutoff, self.modes, self.truncation_deficit)

    def probabilities(self):
        p = np.real(np.diag(self.matrix)).copy()
        if self.modes == 2:
            return p.reshape(self.dim, self.dim)
        return p

    def mean_photon(self):
        p = self.probabilities()
        n = np.arange(self.dim)
        if self.modes == 1:
            return float(np.sum(n * p))
        return float(np.sum(p * (n[:, None] + n[None, :])))

    def check(self, herm_tol=1e-9, trace_tol=1e-9, eig_floor=-1e-8):
        """Validate Hermiticity, unit trace and positive semidefiniteness."""
        m = self.matrix
        herm = float(np.max(np.abs(m - m.conj().T)))
        tr = abs(self.trace() - 1.0)
        evals = np.linalg.eigvalsh((m + m.conj().T) / 2)
        ok = herm <= herm_tol and tr <= trace_tol and float(evals.min()) >= eig_floor
        return ok, {"hermiticity": herm, "trace_dev": tr, "min_eig": float(evals.min())}


def annihilation(dim):
    """Truncated annihilation operator a."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def number_op(dim):
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def quadrature_x(dim):
    a = annihilation(dim)
    return (a + a.conj().T) / np.sqrt(2.0)


def _as_state(vec, cutoff, modes, deficit, max_deficit):
    if max_deficit is not None and deficit > max_deficit:
        raise TruncationError(deficit, max_deficit)
    n = np.linalg.norm(vec)
    if n < 1e-150:
        raise ZeroNormError("state construction produced a zero vector")
    return PureState(vec / n, cutoff, modes, float(deficit))


def vacuum(cutoff):
    v = np.zeros(cutoff.dim, dtype=complex)
    v[0] = 1.0
    return PureState(v, cutoff, 1, 0.0)


def fock_state(n, cutoff):
    if not 0 <= n < cutoff.dim:
        raise ValueError(f"photon number {n} outside cutoff {cutoff.dim}")
    v = np.zeros(cutoff.dim, dtype=complex)
    v[n] = 1.0
    return PureState(v, cutoff, 1, 0.0)


def product_state(a, b):
    """Two-mode product |a> x |b> (mode 0 = a, mode 1 = b)."""
    if a.cutoff != b.cutoff or a.modes != 1 or b.modes != 1:
        raise ValueError("product_state needs two single-mode states at a common cutoff")
    vec = np.kron(a.amplitudes, b.amplitudes)
    deficit = a.truncation_deficit + b.truncation_deficit
    return PureState(vec, a.cutoff, 2, float(deficit))


def coherent_state(alpha, cutoff, max_deficit=0.05):
    """Coherent state |alpha>, amplitudes e^{-|a|^2/2} a^n / sqrt(n!)."""
    d = cutoff.dim
    if alpha == 0:
        return vacuum(cutoff)
    n = np.arange(d)
    logmag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    c = np.exp(logmag) * np.exp(1j * n * np.angle(complex(alpha)))
    deficit = 1.0 - float(np.sum(np.abs(c) ** 2))
    return _as_state(c, cutoff, 1, deficit, max_deficit)


def squeezed_vacuum(r, theta=0.0, cutoff=None, max_deficit=0.05):
    """Single-mode squeezed vacuum with analytic even-photon amplitudes.

    c_{2m} = (cosh r)^{-1/2} (-e^{i theta} tanh r)^m sqrt((2m)!) / (2^m m!),
    odd amplitudes zero, renormalized over the cutoff. Positive r squeezes x.

    Args:
        r: squeezing parameter (may be negative).
        theta: squeezing angle in radians; theta=pi squeezes p instead of x.
        cutoff: FockCutoff.
        max_deficit: raise TruncationError if 1 - sum|c|^2 exceeds this.

    Returns:
        PureState with the truncation deficit recorded.
    """
    d = cutoff.dim
    c = np.zeros(d, dtype=complex)
    t = np.tanh(r)
    phase = -np.exp(1j * theta) * t
    for m in range((d - 1) // 2 + 1):
        logk = 0.5 * gammaln(2 * m + 1) - m * np.log(2.0) - gammaln(m + 1)
        c[2 * m] = phase ** m * np.exp(logk)
    c /= np.sqrt(np.cosh(r))
    deficit = 1.0 - float(np.sum(np.abs(c) ** 2))
    return _as_state(c, cutoff, 1, deficit, max_deficit)


def squeezed_cat(alpha, r, parity, cutoff, max_deficit=1e-6):
    """Squeezed cat: S(r) (|alpha> + parity * |-alpha>), normalized.

    S(r) = exp[(r/2)(a^2 - a^dag^2)] compresses the x quadrature for r > 0, so
    the lobes of a real-alpha cat sit at x = +/- sqrt(2) alpha e^{-r}.

    Args:
        alpha: real displacement of the underlying coherent states.
        r: cat squeezing (free sign).
        parity: +1 (even) or -1 (odd).
        cutoff: FockCutoff.
        max_deficit: truncation tolerance on the pre-squeeze superposition.

    Raises:
        ZeroNormError: for parity=-1 with alpha=0 (the odd cat vanishes).
    """
    from .gates import squeeze_unitary  # local import to avoid a cycle

    if parity not in (+1, -1):
        raise ValueError("parity must be +1 or -1")
    plus = coherent_state(alpha, cutoff, max_deficit=None).amplitudes
    minus = coherent_state(-alpha, cutoff, max_deficit=None).amplitudes
    # exact untruncated norm of |a> + parity |-a>: 2 (1 + parity e^{-2|a|^2})
    full_sq = 2.0 * (1.0 + parity * np.exp(-2.0 * abs(alpha) ** 2))
    cat = plus + parity * minus
    trunc_sq = float(np.sum(np.abs(cat) ** 2))
    if trunc_sq < 1e-24:
        raise ZeroNormError("odd cat with alpha=0 has zero norm")
    deficit = max(0.0, 1.0 - trunc_sq / full_sq)
    if max_deficit is not None and deficit > max_deficit:
        raise TruncationError(deficit, max_deficit)
    cat = cat / np.sqrt(trunc_sq)
    vec = squeeze_unitary(r, cutoff.dim) @ cat
    return _as_state(vec, cutoff, 1, deficit, None)


def gkp_delta(squeezing_db):
    """Envelope parameter Delta from the quality in dB: db = -10 log10(Delta^2)."""
    return float(np.sqrt(10.0 ** (-squeezing_db / 10.0)))


_GKP_LOGICALS = {
    "0": ((0, 1.0),),
    "1": ((1, 1.0),),
    "0+i1": ((0, 1.0 / np.sqrt(2.0)), (1, 1j / np.sqrt(2.0))),
}


def gkp_state(logical, squeezing_db, cutoff, max_top_weight=1e-4):
    """Finite-energy square-lattice GKP state.

    Built as a Gaussian-weighted superposition of x-displaced squeezed peaks:
    peaks at x_s = (2s + mu) sqrt(pi) with weight exp(-Delta^2 x_s^2 / 2), each
    peak a squeezed vacuum of x-variance Delta^2/2, where
    squeezing_db = -10 log10(Delta^2). The lattice sum stops once adding peaks
    changes the norm by < 1e-10.

    Args:
        logical: one of "0", "1", "0+i1".
        squeezing_db: peak/envelope quality in dB (> 0).
        cutoff: FockCutoff.
        max_top_weight: raise TruncationError if the top two Fock levels carry
            more than this probability (cutoff too small for the requested dB).
    """
    from .gates import squeeze_unitary, displacement_unitary

    if logical not in _GKP_LOGICALS:
        raise ValueError(f"logical must be one of {sorted(_GKP_LOGICALS)}, got {logical!r}")
    if squeezing_db <= 0:
        raise ValueError("squeezing_db must be positive")
    d = cutoff.dim
    delta = gkp_delta(squeezing_db)
    r_peak = -np.log(delta)
    peak0 = squeeze_unitary(r_peak, d)[:, 0]

    total = np.zeros(d, dtype=complex)
    for mu, w_mu in _GKP_LOGICALS[logical]:
        s = 0
        while True:
            changed = False
            for sgn in ((0,) if (s == 0) else (+1, -1)):
                x_s = (2 * (sgn * s) + mu) * np.sqrt(np.pi)
                w = np.exp(-0.5 * delta ** 2 * x_s ** 2)
                if w < 1e-10:
                    continue
                before = np.linalg.norm(total)
                total = total + w_mu * w * (displacement_unitary(x_s / np.sqrt(2.0), d) @ peak0)
                if abs(np.linalg.norm(total) - before) >= 1e-10:
                    changed = True
            if s > 0 and not changed:
                break
            s += 1
            if s > 40:  # safety stop; envelope has long since vanished
                break
    nrm = np.linalg.norm(total)
    if nrm < 1e-12:
        raise ZeroNormError("GKP construction produced a zero vector")
    total = total / nrm
    top_weight = float(np.sum(np.abs(total[-2:]) ** 2))
    if top_weight > max_top_weight:
        raise TruncationError(top_weight, max_top_weight,
                              f"GKP top-level weight {top_weight:.2e} indicates cutoff too small")
    return PureState(total, cutoff, 1, top_weight)
