"""Markov-decision-process wrapper around the optical loop circuit.

One environment owns a persistent loop mode. Each step injects a fresh
squeezed vacuum |0, r_j> through the variable beamsplitter: the fresh state
crosses into the loop with amplitude tau_j while the old loop content is
routed to the PNR detector with the same cross-coupling (tau=1 therefore
flushes the loop and replaces it by the fresh state; tau=0 leaves the loop
untouched). The detector outcome n_j heralds the next loop state; the reward
is the best fidelity against four squeezed-cat targets raised to a large
power.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from .fock.basis import DensityMatrix, FockCutoff, PureState, squeezed_cat, squeezed_vacuum, vacuum
from .fock.channels import loss_channel
from .fock.gates import apply_gate, build_beamsplitter, build_rotation
from .fock.measure import pnr_sample
from .fock.metrics import fidelity


@dataclass(frozen=True)
class EnvConfig:
    dim: int = 30
    r0: float = 1.38
    target_alpha: float = 3.0
    target_r: float = 1.38
    horizon: int = 10
    reward_power: int = 50
    loss_eta: float = 1.0
    r_min: float = -1.5
    r_max: float = 1.5
    tau_min: float = 0.0
    tau_max: float = 1.0
    theta_j: float = 0.0
    loop_phase: float = 0.0
    terminate_tau_floor: float = 0.01
    terminate_consecutive: int = 3
    quantize_decimals: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not 0.0 <= self.loss_eta <= 1.0:
            raise ValueError("loss_eta must lie in [0, 1]")
        if self.reward_power < 1:
            raise ValueError("reward_power must be >= 1")

    @property
    def cutoff(self):
        return FockCutoff(self.dim)

    @property
    def obs_dim(self):
        return self.dim * self.dim

    def to_dict(self):
        return asdict(self)


def encode_observation(rho_matrix):
    """Pack a density matrix as [Re(upper), Im(upper), diag] (length dim^2)."""
    d = rho_matrix.shape[0]
    iu = np.triu_indices(d, k=1)
    upper = rho_matrix[iu]
    return np.concatenate([np.real(upper), np.imag(upper), np.real(np.diag(rho_matrix))])


def decode_observation(obs, dim):
    """Inverse of encode_observation (exact round trip)."""
    n_up = dim * (dim - 1) // 2
    re_u, im_u, diag = obs[:n_up], obs[n_up:2 * n_up], obs[2 * n_up:]
    m = np.zeros((dim, dim), dtype=complex)
    iu = np.triu_indices(dim, k=1)
    m[iu] = re_u + 1j * im_u
    m = m + m.conj().T
    m[np.diag_indices(dim)] = diag
    return m


class RewardModel:
    """Best fidelity against the four cat targets, raised to a power."""

    def __init__(self, config):
        cut = config.cutoff
        plus = squeezed_cat(config.target_alpha, config.target_r, +1, cut, max_deficit=None)
        minus = squeezed_cat(config.target_alpha, config.target_r, -1, cut, max_deficit=None)
        rot = build_rotation(np.pi / 2, cut)
        self.targets = [plus, minus, apply_gate(plus, rot), apply_gate(minus, rot)]
        self.power = config.reward_power

    def best_fidelity(self, state):
        if isinstance(state, PureState):
            return max(abs(np.vdot(t.amplitudes, state.amplitudes)) ** 2 for t in self.targets)
        return max(fidelity(t, state) for t in self.targets)

    def reward(self, state):
        return self.best_fidelity(state) ** self.power


@dataclass
class EpisodeRecord:
    """Generation sequence of one episode plus output metadata."""

    sequence: list = field(default_factory=list)  # (r_j, tau_j, n_j, reward_j)
    total_photons: int = 0
    label: str = ""
    best_fidelity: float = 0.0
    final_fidelity: float = 0.0
    steps: int = 0
    seed: int = 0

    def to_dict(self):
        return {
            "version": 1,
            "sequence": [[float(r), float(t), int(n), float(rw)] for r, t, n, rw in self.sequence],
            "total_photons": int(self.total_photons),
            "label": self.label,
            "best_fidelity": float(self.best_fidelity),
            "final_fidelity": float(self.final_fidelity),
            "steps": int(self.steps),
            "seed": int(self.seed),
        }


def classify_output(record):
    """(even|odd, plain|fourier) from total photons and the final squeeze sign."""
    parity = "even" if record.total_photons % 2 == 0 else "odd"
    r_last = record.sequence[-1][0] if record.sequence else 0.0
    kind = "fourier" if r_last < 0 else "plain"
    return parity, kind


class LoopEnv:
    """Single loop-circuit environment with its own random stream."""

    def __init__(self, config, rng=None):
        self.config = config
        self.rng = rng if rng is not None else np.random.default_rng(config.seed)
        self.reward_model = RewardModel(config)
        self._cut = config.cutoff
        self._loop = None
        self._steps = 0
        self._low_tau_run = 0
        self._done = True
        self._record = None

    # -- lifecycle -----------------------------------------------------------

    def reset(self, seed=None):
        if seed is not None:
            self.rng = np.random.default_rng(seed)
        self._loop = vacuum(self._cut)
        self._steps = 0
        self._low_tau_run = 0
        self._done = False
        self._record = EpisodeRecord(seed=int(seed if seed is not None else self.config.seed))
        return self.observation()

    def observation(self):
        rho = self._loop.to_density().matrix if isinstance(self._loop, PureState) else self._loop.matrix
        return encode_observation(rho)

    def loop_state(self):
        return self._loop

    def set_loop_state(self, state):
        """Test/analysis hook: overwrite the loop content."""
        self._loop = state

    def _quantize(self, value):
        return round(float(value), self.config.quantize_decimals)

    def clamp_action(self, action):
        r = float(np.clip(action[0], self.config.r_min, self.config.r_max))
        tau = float(np.clip(action[1], self.config.tau_min, self.config.tau_max))
        return self._quantize(r), self._quantize(tau)

    def step(self, action):
        """Apply (r_j, tau_j); returns (obs, reward, done, info)."""
        if self._done:
            raise RuntimeError("step() called on a finished episode; call reset()")
        r_j, tau_j = self.clamp_action(np.asarray(action, dtype=float))
        fresh = squeezed_vacuum(r_j, self.config.theta_j, self._cut, max_deficit=None)
        bs = build_beamsplitter(tau_j, self._cut)

        if isinstance(self._loop, PureState) and self.config.loss_eta == 1.0:
            two = PureState(np.kron(fresh.amplitudes, self._loop.amplitudes), self._cut, 2,
                            fresh.truncation_deficit + self._loop.truncation_deficit)
            two = apply_gate(two, bs)
            n_j, kept, p_n = pnr_sample(two, mode=1, rng=self.rng)
        else:
            rho_loop = self._loop.to_density() if isinstance(self._loop, PureState) else self._loop
            joint = np.kron(fresh.to_density().matrix, rho_loop.matrix)
            two = DensityMatrix(joint, self._cut, 2, rho_loop.truncation_deficit)
            two = apply_gate(two, bs)
            if self.config.loss_eta < 1.0:
                two = loss_channel(two, self.config.loss_eta, mode=1)
            n_j, kept, p_n = pnr_sample(two, mode=1, rng=self.rng)

        if self.config.loop_phase != 0.0:
            kept = apply_gate(kept, build_rotation(self.config.loop_phase, self._cut))
        self._loop = kept

        fid = self.reward_model.best_fidelity(kept)
        reward = fid ** self.config.reward_power
        self._steps += 1
        self._low_tau_run = self._low_tau_run + 1 if tau_j < self.config.terminate_tau_floor else 0
        done = self._steps >= self.config.horizon or \
            self._low_tau_run >= self.config.terminate_consecutive
        self._done = done

        rec = self._record
        rec.sequence.append((r_j, tau_j, n_j, reward))
        rec.total_photons += n_j
        rec.best_fidelity = max(rec.best_fidelity, fid)
        rec.final_fidelity = fid
        rec.steps = self._steps
        if done:
            rec.label = "_".join(classify_output(rec))

        info = {"n": n_j, "p_n": p_n, "fidelity": fid, "r": r_j, "tau": tau_j}
        return self.observation(), reward, done, info

    @property
    def record(self):
        return self._record

    # -- snapshot (Markov check, checkpoint resume) ---------------------------

    def get_state(self):
        loop = self._loop
        return {
            "kind": "pure" if isinstance(loop, PureState) else "density",
            "array": (loop.amplitudes if isinstance(loop, PureState) else loop.matrix).copy(),
            "deficit": loop.truncation_deficit,
            "steps": self._steps,
            "low_tau_run": self._low_tau_run,
            "done": self._done,
            "record": json.dumps(self._record.to_dict()) if self._record else None,
            "rng_state": json.dumps(self.rng.bit_generator.state),
        }

    def set_state(self, snap):
        if snap["kind"] == "pure":
            self._loop = PureState(snap["array"].copy(), self._cut, 1, snap["deficit"])
        else:
            self._loop = DensityMatrix(snap["array"].copy(), self._cut, 1, snap["deficit"])
        self._steps = snap["steps"]
        self._low_tau_run = snap["low_tau_run"]
        self._done = snap["done"]
        if snap["record"]:
            d = json.loads(snap["record"])
            self._record = EpisodeRecord(
                sequence=[tuple(item) for item in d["sequence"]],
                total_photons=d["total_photons"], label=d["label"],
                best_fidelity=d["best_fidelity"], final_fidelity=d["final_fidelity"],
                steps=d["steps"], seed=d["seed"])
        self.rng.bit_generator.state = json.loads(snap["rng_state"])
