"""Adaptive-moment gradient descent with bias correction.

Update equations, per parameter tensor p with gradient g at step t:

    m_t = beta1 * m_{t-1} + (1 - beta1) * g
    v_t = beta2 * v_{t-1} + (1 - beta2) * g^2
    m_hat = m_t / (1 - beta1^t)
    v_hat = v_t / (1 - beta2^t)
    p <- p - lr * m_hat / (sqrt(v_hat) + eps)
"""
from __future__ import annotations

import numpy as np


class AdamOptimizer:
    def __init__(self, params, lr=3e-4, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params, grads):
        """Update params in place from their gradients."""
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)

    def state_dict(self):
        return {"t": self.t, "m": [x.copy() for x in self.m], "v": [x.copy() for x in self.v]}

    def load_state_dict(self, state):
        self.t = int(state["t"])
        self.m = [np.array(x, dtype=float) for x in state["m"]]
        self.v = [np.array(x, dtype=float) for x in state["v"]]
