"""Minimal dense networks with hand-written backprop.

Kept free of framework dependencies on purpose: every gradient in the
package is validated against central finite differences, which needs the
computation graph to be explicit.  Shapes follow the row-batch convention:
inputs are (batch, features), weights are (out, in).
"""

from __future__ import annotations

from typing import Optional

import numpy as np


def leaky_relu(x: np.ndarray, alpha: float) -> np.ndarray:
    return np.where(x > 0, x, alpha * x)


def leaky_relu_grad(x: np.ndarray, alpha: float) -> np.ndarray:
    return np.where(x > 0, 1.0, alpha)


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def glorot(rng: np.random.Generator, out_dim: int, in_dim: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (in_dim + out_dim))
    return rng.uniform(-limit, limit, size=(out_dim, in_dim))


class Adam:
    """Adaptive-moment gradient descent over a named parameter dict."""

    def __init__(self, params: dict[str, np.ndarray], lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        b1t = 1.0 - self.beta1 ** self.t
        b2t = 1.0 - self.beta2 ** self.t
        for key, g in grads.items():
            p = self.params[key]
            m = self.m[key]
            v = self.v[key]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= self.lr * (m / b1t) / (np.sqrt(v / b2t) + self.eps)


class MLP:
    """Fully connected stack with a rectifier on hidden layers, linear output."""

    def __init__(self, dims: list[int], rng: np.random.Generator,
                 hidden_alpha: float = 0.0):
        # hidden_alpha 0 gives plain ReLU; >0 gives a leaky rectifier
        self.dims = list(dims)
        self.n_layers = len(dims) - 1
        self.alpha = hidden_alpha
        self.params: dict[str, np.ndarray] = {}
        for l in range(self.n_layers):
            self.params[f"W{l}"] = glorot(rng, dims[l + 1], dims[l])
            self.params[f"b{l}"] = np.zeros(dims[l + 1])

    @property
    def out_dim(self) -> int:
        return self.dims[-1]

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, dict]:
        h = np.asarray(x, dtype=np.float64)
        inputs = []
        masks = []
        for l in range(self.n_layers):
            inputs.append(h)
            a = h @ self.params[f"W{l}"].T + self.params[f"b{l}"]
            if l < self.n_layers - 1:
                masks.append(leaky_relu_grad(a, self.alpha))
                h = leaky_relu(a, self.alpha)
            else:
                masks.append(None)
                h = a
        return h, {"inputs": inputs, "masks": masks}

    def backward(self, cache: dict, dy: np.ndarray
                 ) -> tuple[np.ndarray, dict[str, np.ndarray]]:
        grads: dict[str, np.ndarray] = {}
        da = np.asarray(dy, dtype=np.float64)
        for l in range(self.n_layers - 1, -1, -1):
            grads[f"W{l}"] = da.T @ cache["inputs"][l]
            grads[f"b{l}"] = da.sum(axis=0)
            dh = da @ self.params[f"W{l}"]
            if l > 0:
                da = dh * cache["masks"][l - 1]
            else:
                da = dh
        return da, grads

    def input_gradient(self, cache: dict) -> tuple[np.ndarray, list[np.ndarray]]:
        """Per-sample gradient of the scalar output w.r.t. the input.

        Only valid for a 1-dimensional output.  Returns the gradients and
        the chain of intermediate seeds needed by
        :func:`penalty_param_grads`.
        """
        batch = cache["inputs"][0].shape[0]
        w = np.ones((batch, 1))
        chain = [None] * self.n_layers
        for l in range(self.n_layers - 1, -1, -1):
            chain[l] = w
            p = w @ self.params[f"W{l}"]
            if l > 0:
                w = p * cache["masks"][l - 1]
        return p, chain

    def penalty_param_grads(self, cache: dict, chain: list[np.ndarray],
                            u: np.ndarray) -> dict[str, np.ndarray]:
        """Gradients of sum(u · input_gradient) w.r.t. the weights.

        This is the second-order term a gradient-norm penalty needs.  The
        rectifier masks are piecewise constant, so their own parameter
        dependence contributes nothing; what remains is backprop through
        the (linear, given the masks) input-gradient chain.  Biases get no
        gradient for the same reason.
        """
        grads = {f"b{l}": np.zeros_like(self.params[f"b{l}"])
                 for l in range(self.n_layers)}
        dp = np.asarray(u, dtype=np.float64)
        for l in range(self.n_layers):
            grads[f"W{l}"] = chain[l].T @ dp
            if l < self.n_layers - 1:
                dw = dp @ self.params[f"W{l}"].T
                dp = dw * cache["masks"][l]
        return grads

    def copy_params(self) -> dict[str, np.ndarray]:
        return {k: v.copy() for k, v in self.params.items()}

    def load_params(self, params: dict[str, np.ndarray]) -> None:
        for k, v in params.items():
            self.params[k] = np.asarray(v, dtype=np.float64).copy()


def merge_grads(*grad_dicts: Optional[dict[str, np.ndarray]]) -> dict[str, np.ndarray]:
    total: dict[str, np.ndarray] = {}
    for grads in grad_dicts:
        if not grads:
            continue
        for k, v in grads.items():
            if k in total:
                total[k] = total[k] + v
            else:
                total[k] = v
    return total
