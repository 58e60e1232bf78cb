"""Generalized advantage estimation."""
from __future__ import annotations

import numpy as np


def compute_gae(rewards, values, dones, last_values, gamma, lam):
    """Recursive GAE over a rollout.

    Args:
        rewards, values, dones: arrays of shape (T, N) (N parallel envs);
            dones[t] marks episodes that ended at step t.
        last_values: (N,) bootstrap values of the post-rollout observations.
        gamma, lam: discount and exponential-weighting factors.

    Returns:
        (advantages, returns), each (T, N); returns = advantages + values.
    """
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    dones = np.asarray(dones, dtype=float)
    t_len, n_env = rewards.shape
    adv = np.zeros((t_len, n_env))
    next_adv = np.zeros(n_env)
    next_values = np.asarray(last_values, dtype=float)
    for t in reversed(range(t_len)):
        mask = 1.0 - dones[t]
        delta = rewards[t] + gamma * next_values * mask - values[t]
        next_adv = delta + gamma * lam * mask * next_adv
        adv[t] = next_adv
        next_values = values[t]
    return adv, adv + values


def normalize_advantages(adv, eps=1e-8):
    """Zero-mean unit-std; skipped when the batch std is degenerate."""
    std = adv.std()
    if std < eps:
        return adv - adv.mean() if abs(adv.mean()) > 0 else adv
    return (adv - adv.mean()) / std
