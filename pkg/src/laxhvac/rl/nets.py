"""Small numpy feedforward networks with hand-written backprop."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class NetworkParameters:
    """Weights ``W[k]`` of shape ``(fan_in, fan_out)`` and biases ``b[k]``.

    Hidden layers use ``tanh``; the last layer is linear.
    """

    W: list[np.ndarray]
    b: list[np.ndarray]

    @classmethod
    def init(cls, sizes, rng: np.random.Generator, final_scale: float = 3e-3):
        W, b = [], []
        for k, (m, n) in enumerate(zip(sizes[:-1], sizes[1:])):
            last = k == len(sizes) - 2
            lim = final_scale if last else 1.0 / np.sqrt(m)
            W.append(rng.uniform(-lim, lim, size=(m, n)))
            b.append(rng.uniform(-lim, lim, size=n) if last else np.zeros(n))
        return cls(W, b)

    @classmethod
    def zeros_like(cls, other: "NetworkParameters"):
        return cls([np.zeros_like(w) for w in other.W], [np.zeros_like(v) for v in other.b])

    def copy(self) -> "NetworkParameters":
        return NetworkParameters([w.copy() for w in self.W], [v.copy() for v in self.b])

    def arrays(self) -> list[np.ndarray]:
        return [*self.W, *self.b]

    @property
    def sizes(self) -> list[int]:
        return [self.W[0].shape[0]] + [w.shape[1] for w in self.W]

    def flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays()])

    def set_flat(self, v: np.ndarray):
        k = 0
        for a in self.arrays():
            a[...] = v[k:k + a.size].reshape(a.shape)
            k += a.size

    def all_finite(self) -> bool:
        return all(np.isfinite(a).all() for a in self.arrays())


def forward(p: NetworkParameters, x: np.ndarray):
    """Return output and the activation cache for :func:`backward`."""
    acts = [x]
    h = x
    last = len(p.W) - 1
    for k, (W, b) in enumerate(zip(p.W, p.b)):
        z = h @ W + b
        h = z if k == last else np.tanh(z)
        acts.append(h)
    return h, acts


def backward(p: NetworkParameters, acts, grad_out: np.ndarray):
    """Backpropagate ``grad_out`` (dLoss/dOutput).

    Returns parameter gradients and the gradient w.r.t. the network input.
    """
    grads = NetworkParameters.zeros_like(p)
    g = grad_out
    last = len(p.W) - 1
    for k in range(last, -1, -1):
        if k != last:
            g = g * (1.0 - acts[k + 1] ** 2)
        grads.W[k] = acts[k].T @ g
        grads.b[k] = g.sum(axis=0)
        g = g @ p.W[k].T
    return grads, g


def soft_update(online: NetworkParameters, target: NetworkParameters, rho: float):
    """In place: ``target <- rho * online + (1 - rho) * target``."""
    for a, t in zip(online.arrays(), target.arrays()):
        t *= 1.0 - rho
        t += rho * a
    return target


@dataclass
class Adam:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    def step(self, params: NetworkParameters, grads: NetworkParameters, ascent: bool = False):
        arrays, garr = params.arrays(), grads.arrays()
        if not self.m:
            self.m = [np.zeros_like(a) for a in arrays]
            self.v = [np.zeros_like(a) for a in arrays]
        self.t += 1
        sign = 1.0 if ascent else -1.0
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for a, g, m, v in zip(arrays, garr, self.m, self.v):
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            a += sign * self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


class RunningNormalizer:
    """Standardizes inputs with running mean and variance (Chan's merge)."""

    def __init__(self, dim: int, eps: float = 1e-8):
        self.count = 0.0
        self.mean = np.zeros(dim)
        self.var = np.ones(dim)
        self.eps = eps

    def update(self, x: np.ndarray):
        x = np.atleast_2d(x)
        n = x.shape[0]
        bmean = x.mean(axis=0)
        bvar = x.var(axis=0)
        if self.count == 0:
            self.mean, self.var, self.count = bmean, bvar, float(n)
            return
        tot = self.count + n
        delta = bmean - self.mean
        m2 = self.var * self.count + bvar * n + delta ** 2 * self.count * n / tot
        self.mean = self.mean + delta * n / tot
        self.var = m2 / tot
        self.count = tot

    def __call__(self, x):
        return (np.asarray(x, dtype=float) - self.mean) / np.sqrt(self.var + self.eps)

    def state(self) -> dict:
        return {"count": np.array(self.count), "mean": self.mean.copy(), "var": self.var.copy()}

    def load(self, d: dict):
        self.count = float(d["count"])
        self.mean = np.asarray(d["mean"], dtype=float).copy()
        self.var = np.asarray(d["var"], dtype=float).copy()
