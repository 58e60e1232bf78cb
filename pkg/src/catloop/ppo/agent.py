"""Actor-critic agent: squashed-Gaussian policy, value net, clipped updates."""
from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .adam import AdamOptimizer
from .gae import normalize_advantages
from .nets import MlpNetwork

LOG2PI = np.log(2.0 * np.pi)
TANH_EPS = 1e-12


@dataclass(frozen=True)
class PpoHyperparams:
    clip_ratio: float = 0.2
    gamma: float = 0.99
    gae_lambda: float = 0.95
    learning_rate: float = 3e-4
    epochs: int = 10
    minibatch_size: int = 64
    rollout_steps: int = 128
    n_envs: int = 40
    entropy_coef: float = 0.0
    value_coef: float = 0.5
    kl_stop: float = 0.03
    total_steps: int = 7_000_000
    hidden_sizes: tuple = (256, 128, 64)
    init_log_std: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.clip_ratio < 1.0:
            raise ValueError("clip_ratio must lie in (0, 1)")
        if not (0.0 < self.gamma <= 1.0 and 0.0 < self.gae_lambda <= 1.0):
            raise ValueError("gamma and gae_lambda must lie in (0, 1]")

    def to_dict(self):
        d = asdict(self)
        d["hidden_sizes"] = list(self.hidden_sizes)
        return d


class ActorCritic:
    """Two separate tanh MLPs plus a state-independent learnable log-std.

    Raw policy outputs are squashed by tanh and affinely mapped onto the
    action box; log-probabilities include the squash correction.
    """

    def __init__(self, obs_dim, action_low, action_high, hp, rng):
        self.obs_dim = obs_dim
        self.low = np.asarray(action_low, dtype=float)
        self.high = np.asarray(action_high, dtype=float)
        self.mid = (self.low + self.high) / 2.0
        self.half = (self.high - self.low) / 2.0
        self.action_dim = len(self.low)
        sizes = [obs_dim, *hp.hidden_sizes, self.action_dim]
        self.policy = MlpNetwork(sizes, rng, out_gain=0.01)
        self.value = MlpNetwork([obs_dim, *hp.hidden_sizes, 1], rng, out_gain=1.0)
        self.log_std = np.full(self.action_dim, float(hp.init_log_std))

    # -- distribution helpers -------------------------------------------------

    def squash(self, z):
        return self.mid + self.half * np.tanh(z)

    def log_prob(self, z, mean):
        """log pi(action(z)) for the pre-squash sample z under N(mean, std)."""
        std = np.exp(self.log_std)
        gauss = -0.5 * (((z - mean) / std) ** 2 + LOG2PI) - self.log_std
        squash = np.log1p(-np.tanh(z) ** 2 + TANH_EPS) + np.log(self.half)
        return (gauss - squash).sum(axis=-1)

    def gaussian_entropy(self):
        return float(np.sum(self.log_std + 0.5 * (LOG2PI + 1.0)))

    def sample(self, obs, rng, deterministic=False):
        """Returns (action, z, log_prob, value)."""
        mean = self.policy.forward(obs)
        value = self.value.forward(obs)
        z = mean if deterministic else mean + np.exp(self.log_std) * rng.standard_normal(mean.shape)
        action = self.squash(z)
        logp = self.log_prob(z, mean)
        return action, z, logp, np.squeeze(value, axis=-1) if value.ndim > 1 else float(value[0])

    # -- parameter plumbing ----------------------------------------------------

    def parameters(self):
        return self.policy.params + self.value.params + [self.log_std]

    def set_parameters(self, params):
        n_pol = len(self.policy.params)
        n_val = len(self.value.params)
        self.policy.set_params(params[:n_pol])
        self.value.set_params(params[n_pol:n_pol + n_val])
        self.log_std = np.array(params[n_pol + n_val], dtype=float)


def policy_sample(agent, obs, rng=None, deterministic=False):
    """Single-observation action draw; returns (action, log_prob, value)."""
    obs = np.asarray(obs, dtype=float)
    if not np.all(np.isfinite(agent.policy.forward(obs))):
        raise FloatingPointError("policy network produced non-finite output")
    action, _, logp, value = agent.sample(obs, rng, deterministic)
    return action, float(logp), float(value)


def _policy_loss_and_grads(agent, obs, z, logp_old, adv, clip):
    """Clipped-surrogate loss plus gradients for the policy net and log-std."""
    mean, cache = agent.policy.forward(obs, want_cache=True)
    std = np.exp(agent.log_std)
    logp = agent.log_prob(z, mean)
    ratio = np.exp(logp - logp_old)
    unclipped = ratio * adv
    clipped = np.clip(ratio, 1.0 - clip, 1.0 + clip) * adv
    loss = -np.mean(np.minimum(unclipped, clipped))
    # gradient flows only through samples where the unclipped branch is active
    active = (unclipped <= clipped).astype(float)
    dlogp = -(active * ratio * adv) / len(adv)
    # d logp / d mean = (z - mean)/std^2 ; d logp / d log_std = ((z-mean)/std)^2 - 1
    zc = (z - mean) / std
    grad_mean = dlogp[:, None] * (zc / std)
    grads_policy, _ = agent.policy.backward(grad_mean, cache)
    grad_log_std = (dlogp[:, None] * (zc ** 2 - 1.0)).sum(axis=0)
    clip_fraction = float(np.mean(np.abs(ratio - 1.0) > clip))
    approx_kl = float(np.mean((ratio - 1.0) - np.log(np.maximum(ratio, 1e-12))))
    return loss, grads_policy, grad_log_std, clip_fraction, approx_kl


def _value_loss_and_grads(agent, obs, returns):
    pred, cache = agent.value.forward(obs, want_cache=True)
    pred = pred[:, 0]
    err = pred - returns
    loss = 0.5 * float(np.mean(err ** 2))
    grad_out = (err / len(err))[:, None]
    grads_value, _ = agent.value.backward(grad_out, cache)
    return loss, grads_value


def ppo_update(agent, optimizer, batch, hp, rng):
    """One update over a rollout batch; returns aggregate metrics.

    The batch maps names to arrays: obs (B, obs_dim), z (B, act_dim),
    logp (B,), advantages (B,), returns (B,). Epochs stop early once the
    approximate KL divergence from the behavior policy exceeds hp.kl_stop.
    """
    obs = batch["obs"]
    z = batch["z"]
    logp_old = batch["logp"]
    adv = normalize_advantages(batch["advantages"])
    rets = batch["returns"]
    n = len(obs)
    metrics = {"policy_loss": 0.0, "value_loss": 0.0, "entropy": agent.gaussian_entropy(),
               "clip_fraction": 0.0, "approx_kl": 0.0, "epochs_run": 0}
    count = 0
    stop = False
    for _ in range(hp.epochs):
        order = rng.permutation(n)
        for start in range(0, n, hp.minibatch_size):
            idx = order[start:start + hp.minibatch_size]
            if len(idx) < 2:
                continue
            p_loss, g_pol, g_std, clip_frac, kl = _policy_loss_and_grads(
                agent, obs[idx], z[idx], logp_old[idx], adv[idx], hp.clip_ratio)
            v_loss, g_val = _value_loss_and_grads(agent, obs[idx], rets[idx])
            if not (np.isfinite(p_loss) and np.isfinite(v_loss)):
                raise FloatingPointError("non-finite PPO loss; aborting update")
            # entropy bonus on the Gaussian: d entropy / d log_std = 1
            g_std = g_std - hp.entropy_coef * np.ones_like(g_std)
            grads = g_pol + [hp.value_coef * g for g in g_val] + [g_std]
            optimizer.step(agent.parameters(), grads)
            metrics["policy_loss"] += p_loss
            metrics["value_loss"] += v_loss
            metrics["clip_fraction"] += clip_frac
            metrics["approx_kl"] += kl
            count += 1
            if kl > hp.kl_stop:
                stop = True
                break
        metrics["epochs_run"] += 1
        if stop:
            break
    for key in ("policy_loss", "value_loss", "clip_fraction", "approx_kl"):
        metrics[key] /= max(count, 1)
    metrics["entropy"] = agent.gaussian_entropy()
    return metrics
