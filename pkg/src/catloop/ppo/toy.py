"""Scalar bandit used to exercise the full PPO stack on a known optimum."""
from __future__ import annotations

import numpy as np


class GaussianBanditEnv:
    """One-step episodes: reward exp(-(a - a*)^2 / width^2) for a scalar action."""

    def __init__(self, target=0.4, width=0.35, obs_dim=3, seed=0):
        self.target = target
        self.width = width
        self.obs_dim = obs_dim
        self.rng = np.random.default_rng(seed)
        self._done = True

    def reset(self):
        self._done = False
        return np.zeros(self.obs_dim)

    def step(self, action):
        if self._done:
            raise RuntimeError("step() on finished episode")
        a = float(np.asarray(action).reshape(-1)[0])
        reward = float(np.exp(-((a - self.target) / self.width) ** 2))
        self._done = True
        return np.zeros(self.obs_dim), reward, True, {"action": a}


def train_toy(agent_cls, hp_cls, updates=500, seed=0, target=0.4):
    """Train on the bandit; returns (agent, history of deterministic actions)."""
    from .adam import AdamOptimizer
    from .agent import ppo_update
    from .gae import compute_gae

    ss = np.random.SeedSequence(seed)
    net_rng, samp_rng, shuf_rng = [np.random.default_rng(s) for s in ss.spawn(3)]
    hp = hp_cls(hidden_sizes=(16, 16), rollout_steps=64, n_envs=1, epochs=4,
                minibatch_size=32, learning_rate=5e-3, total_steps=updates * 64,
                entropy_coef=0.0)
    env = GaussianBanditEnv(target=target, seed=seed)
    agent = agent_cls(env.obs_dim, [-1.0], [1.0], hp, net_rng)
    optimizer = AdamOptimizer(agent.parameters(), lr=hp.learning_rate)
    history = []
    obs = env.reset()
    for _ in range(updates):
        buf = {k: [] for k in ("obs", "z", "logp", "values", "rewards", "dones")}
        for _ in range(hp.rollout_steps):
            action, z, logp, value = agent.sample(obs, samp_rng)
            nobs, reward, done, _ = env.step(action)
            buf["obs"].append(obs)
            buf["z"].append(z)
            buf["logp"].append(float(logp))
            buf["values"].append(float(value))
            buf["rewards"].append(reward)
            buf["dones"].append(1.0)
            obs = env.reset()
        rewards = np.array(buf["rewards"])[:, None]
        values = np.array(buf["values"])[:, None]
        dones = np.array(buf["dones"])[:, None]
        adv, rets = compute_gae(rewards, values, dones, np.zeros(1), hp.gamma, hp.gae_lambda)
        batch = {
            "obs": np.stack(buf["obs"]),
            "z": np.stack(buf["z"]).reshape(-1, 1),
            "logp": np.array(buf["logp"]),
            "advantages": adv.reshape(-1),
            "returns": rets.reshape(-1),
        }
        ppo_update(agent, optimizer, batch, hp, shuf_rng)
        det = agent.squash(agent.policy.forward(np.zeros(env.obs_dim)))
        history.append(float(det[0]))
    return agent, history
