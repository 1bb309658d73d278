"""Wasserstein GAN with gradient penalty over node-embedding rows.

Learns the empirical distribution of per-node embedding vectors and samples
fresh rows from it.  When class labels accompany the embeddings, each row
is extended with its one-hot label so the generator learns the joint; the
generated trailing block is argmax-decoded back into labels.

The critic's gradient penalty needs a derivative of the critic's own
input gradient, which :meth:`doppelgraph._mlp.MLP.penalty_param_grads`
provides; both loss gradients are finite-difference checked in the tests.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._mlp import MLP, Adam, merge_grads
from ._util import arrays_from_json, arrays_to_json
from .metrics import gaussian_mmd


class TrainingDivergedError(RuntimeError):
    """Raised when GAN losses stop being finite; carries the last-good params."""

    def __init__(self, message: str, checkpoint: Optional[dict] = None):
        super().__init__(message)
        self.checkpoint = checkpoint


def critic_loss_value(critic: MLP, real: np.ndarray, fake: np.ndarray,
                      xhat: np.ndarray, penalty_weight: float) -> float:
    """Mean critic(fake) − mean critic(real) + λ·mean((‖∇ critic(x̂)‖−1)²)."""
    y_fake, _ = critic.forward(fake)
    y_real, _ = critic.forward(real)
    _, cache_h = critic.forward(xhat)
    grad_x, _ = critic.input_gradient(cache_h)
    norms = np.sqrt((grad_x * grad_x).sum(axis=1))
    penalty = penalty_weight * np.mean((norms - 1.0) ** 2)
    return float(y_fake.mean() - y_real.mean() + penalty)


def critic_loss_grads(critic: MLP, real: np.ndarray, fake: np.ndarray,
                      xhat: np.ndarray, penalty_weight: float
                      ) -> tuple[float, dict[str, np.ndarray]]:
    batch = len(real)
    y_fake, cache_f = critic.forward(fake)
    y_real, cache_r = critic.forward(real)
    _, grads_f = critic.backward(cache_f, np.full((batch, 1), 1.0 / batch))
    _, grads_r = critic.backward(cache_r, np.full((batch, 1), -1.0 / batch))

    _, cache_h = critic.forward(xhat)
    grad_x, chain = critic.input_gradient(cache_h)
    norms = np.sqrt((grad_x * grad_x).sum(axis=1))
    safe = np.maximum(norms, 1e-12)
    coeff = 2.0 * penalty_weight * (norms - 1.0) / (safe * batch)
    grads_p = critic.penalty_param_grads(cache_h, chain, coeff[:, None] * grad_x)

    loss = float(y_fake.mean() - y_real.mean()
                 + penalty_weight * np.mean((norms - 1.0) ** 2))
    return loss, merge_grads(grads_f, grads_r, grads_p)


def generator_loss_grads(generator: MLP, critic: MLP, z: np.ndarray
                         ) -> tuple[float, dict[str, np.ndarray]]:
    """−mean critic(G(z)) and its gradient w.r.t. the generator weights."""
    batch = len(z)
    fake, cache_g = generator.forward(z)
    y, cache_c = critic.forward(fake)
    dfake, _ = critic.backward(cache_c, np.full((batch, 1), -1.0 / batch))
    _, grads = generator.backward(cache_g, dfake)
    return float(-y.mean()), grads


def embedding_mmd(a: np.ndarray, b: np.ndarray) -> float:
    """Squared Gaussian-kernel MMD between two embedding matrices.

    The median-distance bandwidth is floored at 5% of the pooled RMS row
    norm: a pure median tracks the sample spread, which would keep the MMD
    away from 0 for an arbitrarily tight match to a degenerate (point-mass)
    distribution.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ValueError("embedding matrices must share their dimension")
    pooled = np.vstack([a, b])
    scale = float(np.sqrt((pooled * pooled).sum(axis=1).mean()))
    return gaussian_mmd(a, b, min_bandwidth=max(0.05 * scale, 1e-8))


def pairwise_distances(x: np.ndarray) -> np.ndarray:
    """Euclidean distances over all C(n,2) row pairs, ascending."""
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    if n < 2:
        return np.zeros(0)
    sq = (x * x).sum(axis=1)
    parts = []
    step = max(1, int(2**22 // max(n, 1)))
    for start in range(0, n - 1, step):
        stop = min(start + step, n - 1)
        d2 = sq[start:stop, None] + sq[None, :] - 2.0 * (x[start:stop] @ x.T)
        np.maximum(d2, 0.0, out=d2)
        for r in range(start, stop):
            parts.append(np.sqrt(d2[r - start, r + 1:]))
    return np.sort(np.concatenate(parts))


def pairwise_distance_cdf(x: np.ndarray, bins: int | np.ndarray = 100
                          ) -> tuple[np.ndarray, np.ndarray]:
    """Empirical CDF of the pairwise row distances.

    Returns (grid, cdf) where cdf[i] is the fraction of distances <= grid[i].
    ``bins`` may be a grid or a bin count (grid then spans 0..max distance).
    """
    dists = pairwise_distances(x)
    if isinstance(bins, (int, np.integer)):
        top = dists[-1] if len(dists) else 1.0
        grid = np.linspace(0.0, float(top), int(bins))
    else:
        grid = np.asarray(bins, dtype=np.float64)
    if len(dists) == 0:
        return grid, np.ones_like(grid)
    cdf = np.searchsorted(dists, grid, side="right") / len(dists)
    return grid, cdf


def distance_cdf_ks(a: np.ndarray, b: np.ndarray) -> float:
    """Kolmogorov–Smirnov distance between two pairwise-distance CDFs."""
    da = pairwise_distances(a)
    db = pairwise_distances(b)
    pts = np.concatenate([da, db])
    ca = np.searchsorted(da, pts, side="right") / max(len(da), 1)
    cb = np.searchsorted(db, pts, side="right") / max(len(db), 1)
    return float(np.abs(ca - cb).max())


class EmbeddingGan(BaseEstimator):
    """WGAN-GP over embedding rows with optional joint label modeling.

    Fitted attributes: ``generator_`` and ``critic_`` (MLPs), ``history_``
    (list of (step, critic loss, MMD) diagnostics), ``data_dim_``,
    ``classes_`` (None without labels).
    """

    def __init__(self, latent_dim: int = 16,
                 generator_hidden: tuple[int, ...] = (32, 64, 100),
                 critic_hidden: tuple[int, ...] = (100, 64, 32),
                 penalty_weight: float = 10.0, critic_steps: int = 5,
                 batch_size: int = 64, steps: int = 3000,
                 learning_rate: float = 1e-4, beta1: float = 0.5,
                 beta2: float = 0.9, diag_every: int = 100, seed: int = 0):
        self.latent_dim = latent_dim
        self.generator_hidden = generator_hidden
        self.critic_hidden = critic_hidden
        self.penalty_weight = penalty_weight
        self.critic_steps = critic_steps
        self.batch_size = batch_size
        self.steps = steps
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.diag_every = diag_every
        self.seed = seed

    def fit(self, embeddings: np.ndarray, labels: Optional[np.ndarray] = None):
        data = np.asarray(embeddings, dtype=np.float64)
        if data.ndim != 2 or len(data) == 0:
            raise ValueError("embeddings must be a nonempty matrix")
        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64)
            if len(labels) != len(data):
                raise ValueError("one label per embedding row required")
            classes = np.unique(labels)
            onehot = np.zeros((len(data), len(classes)))
            onehot[np.arange(len(data)), np.searchsorted(classes, labels)] = 1.0
            data = np.hstack([data, onehot])
            self.classes_ = classes
        else:
            self.classes_ = None
        self.embedding_dim_ = data.shape[1] - (len(self.classes_) if self.classes_ is not None else 0)
        self.data_dim_ = data.shape[1]

        rng = np.random.default_rng(self.seed)
        generator = MLP([self.latent_dim, *self.generator_hidden, self.data_dim_], rng)
        critic = MLP([self.data_dim_, *self.critic_hidden, 1], rng)
        opt_g = Adam(generator.params, lr=self.learning_rate,
                     beta1=self.beta1, beta2=self.beta2)
        opt_c = Adam(critic.params, lr=self.learning_rate,
                     beta1=self.beta1, beta2=self.beta2)

        n = len(data)
        batch = min(self.batch_size, n)
        diag_rows = min(n, 512)
        history: list[tuple[int, float, float]] = []
        checkpoint = {"generator": generator.copy_params(),
                      "critic": critic.copy_params()}
        for step in range(self.steps):
            closs = np.nan
            for _ in range(self.critic_steps):
                real = data[rng.integers(0, n, size=batch)]
                z = rng.standard_normal((batch, self.latent_dim))
                fake, _ = generator.forward(z)
                eps = rng.random((batch, 1))
                xhat = eps * real + (1.0 - eps) * fake
                closs, cgrads = critic_loss_grads(critic, real, fake, xhat,
                                                  self.penalty_weight)
                if not np.isfinite(closs):
                    raise TrainingDivergedError(
                        f"critic loss became non-finite at step {step}",
                        checkpoint=checkpoint)
                opt_c.step(cgrads)
            z = rng.standard_normal((batch, self.latent_dim))
            gloss, ggrads = generator_loss_grads(generator, critic, z)
            if not np.isfinite(gloss):
                raise TrainingDivergedError(
                    f"generator loss became non-finite at step {step}",
                    checkpoint=checkpoint)
            opt_g.step(ggrads)

            if (step + 1) % self.diag_every == 0 or step == self.steps - 1:
                zd = rng.standard_normal((diag_rows, self.latent_dim))
                gen_rows, _ = generator.forward(zd)
                ref = data[rng.integers(0, n, size=diag_rows)]
                history.append((step + 1, closs, embedding_mmd(ref, gen_rows)))
                checkpoint = {"generator": generator.copy_params(),
                              "critic": critic.copy_params()}

        self.generator_ = generator
        self.critic_ = critic
        self.history_ = history
        self.train_data_ = data
        return self

    def _check_fitted(self):
        if not hasattr(self, "generator_"):
            raise NotFittedError("fit must be called first")

    def sample(self, count: int, seed: Optional[int] = None
               ) -> tuple[np.ndarray, Optional[np.ndarray]]:
        """Draw ``count`` embedding rows (and labels when modeled jointly)."""
        self._check_fitted()
        if count < 1:
            raise ValueError("count must be >= 1")
        rng = np.random.default_rng(self.seed if seed is None else seed)
        z = rng.standard_normal((count, self.latent_dim))
        rows, _ = self.generator_.forward(z)
        if self.classes_ is None:
            return rows, None
        k = len(self.classes_)
        emb, onehot = rows[:, :-k], rows[:, -k:]
        return emb, self.classes_[np.argmax(onehot, axis=1)]

    def diagnostics_csv(self) -> str:
        """Training curve as CSV rows of (step, critic_loss, mmd)."""
        self._check_fitted()
        lines = ["step,critic_loss,mmd"]
        lines += [f"{s},{float(c)!r},{float(m)!r}" for s, c, m in self.history_]
        return "\n".join(lines) + "\n"

    def distance_cdf_csv(self, generated: np.ndarray, bins: int = 200) -> str:
        """Shared-grid CDF comparison of real vs generated pairwise distances."""
        self._check_fitted()
        real = self.train_data_
        top = max(pairwise_distances(real)[-1], pairwise_distances(generated)[-1])
        grid = np.linspace(0.0, float(top), bins)
        _, cdf_real = pairwise_distance_cdf(real, grid)
        _, cdf_fake = pairwise_distance_cdf(generated, grid)
        lines = ["distance,cdf_real,cdf_fake"]
        lines += [f"{float(d)!r},{float(a)!r},{float(b)!r}"
                  for d, a, b in zip(grid, cdf_real, cdf_fake)]
        return "\n".join(lines) + "\n"

    def generator_json(self) -> str:
        self._check_fitted()
        meta = {"kind": "generator", "latent_dim": self.latent_dim,
                "dims": self.generator_.dims,
                "classes": None if self.classes_ is None else self.classes_.tolist()}
        return arrays_to_json(self.generator_.params, meta=meta)

    def critic_json(self) -> str:
        self._check_fitted()
        return arrays_to_json(self.critic_.params,
                              meta={"kind": "critic", "dims": self.critic_.dims})


def load_generator(text: str) -> tuple[MLP, Optional[np.ndarray], int]:
    """Rebuild a generator MLP from its JSON form.

    Returns (mlp, classes array or None, latent_dim).
    """
    arrays, meta = arrays_from_json(text)
    dims = list(meta["dims"])
    mlp = MLP(dims, np.random.default_rng(0))
    mlp.load_params(arrays)
    classes = meta.get("classes")
    return (mlp, None if classes is None else np.asarray(classes),
            int(meta["latent_dim"]))


def sample_embeddings(generator: MLP, count: int, seed: int,
                      classes: Optional[np.ndarray] = None
                      ) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """Sample rows from a standalone generator network."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((count, generator.dims[0]))
    rows, _ = generator.forward(z)
    if classes is None:
        return rows, None
    k = len(classes)
    return rows[:, :-k], np.asarray(classes)[np.argmax(rows[:, -k:], axis=1)]
