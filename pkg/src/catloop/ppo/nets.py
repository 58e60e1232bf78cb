"""Feedforward networks with hand-written backprop (float64 numpy)."""
from __future__ import annotations

import numpy as np


def orthogonal(shape, gain, rng):
    """Orthogonal weight init (rows orthonormal, scaled by gain)."""
    rows, cols = shape
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return np.ascontiguousarray(gain * q[:rows, :cols])


class MlpNetwork:
    """tanh MLP: linear layers with tanh on hidden activations, linear output.

    Parameters are a flat list [W0, b0, W1, b1, ...]; forward() can return a
    cache consumed by backward(), which produces d(loss)/d(param) for every
    parameter plus the gradient with respect to the input batch.
    """

    def __init__(self, sizes, rng, hidden_gain=np.sqrt(2.0), out_gain=0.01):
        self.sizes = list(sizes)
        self.params = []
        for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            gain = out_gain if i == len(sizes) - 2 else hidden_gain
            self.params.append(orthogonal((fan_out, fan_in), gain, rng))
            self.params.append(np.zeros(fan_out))

    @property
    def n_layers(self):
        return len(self.sizes) - 1

    def forward(self, x, want_cache=False):
        """x: (batch, in_dim) or (in_dim,). Returns output (and cache)."""
        squeeze = x.ndim == 1
        h = np.atleast_2d(x)
        pre_acts, acts = [], [h]
        for layer in range(self.n_layers):
            w, b = self.params[2 * layer], self.params[2 * layer + 1]
            z = h @ w.T + b
            pre_acts.append(z)
            h = np.tanh(z) if layer < self.n_layers - 1 else z
            acts.append(h)
        out = h[0] if squeeze else h
        if want_cache:
            return out, (pre_acts, acts)
        return out

    def backward(self, grad_out, cache):
        """Backprop d(loss)/d(output) through the cached forward pass.

        Returns (param_grads, grad_input); param_grads aligns with self.params.
        """
        pre_acts, acts = cache
        g = np.atleast_2d(grad_out)
        grads = [None] * len(self.params)
        for layer in reversed(range(self.n_layers)):
            w = self.params[2 * layer]
            if layer < self.n_layers - 1:
                g = g * (1.0 - np.tanh(pre_acts[layer]) ** 2)
            grads[2 * layer] = g.T @ acts[layer]
            grads[2 * layer + 1] = g.sum(axis=0)
            g = g @ w
        return grads, g

    def copy_params(self):
        return [p.copy() for p in self.params]

    def set_params(self, params):
        self.params = [np.array(p, dtype=float) for p in params]
