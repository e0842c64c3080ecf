"""Dense float64 numerics: stable nonlinearities, Adam, finite differences.

All matrices are C-contiguous float64 numpy arrays. Values shared across
the package are treated as immutable; only the training loop mutates
parameters, through :func:`adam_update`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError


def as_matrix(x) -> np.ndarray:
    """Coerce to a C-contiguous float64 array."""
    return np.ascontiguousarray(np.asarray(x, dtype=np.float64))


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product with an explicit shape check."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def softmax(v: np.ndarray) -> np.ndarray:
    """Stable softmax of a 1-d vector (max subtraction)."""
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        raise ValueError("softmax of empty vector")
    e = np.exp(v - v.max())
    return e / e.sum()


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def sigmoid(x):
    """Elementwise logistic, stable on both tails."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out if out.ndim else float(out)


@dataclass
class Param:
    """A trainable matrix and its accumulated gradient."""

    value: np.ndarray
    grad: np.ndarray = None

    def __post_init__(self):
        self.value = as_matrix(self.value)
        if self.grad is None:
            self.grad = np.zeros_like(self.value)
        elif self.grad.shape != self.value.shape:
            raise ShapeError(
                f"grad shape {self.grad.shape} != value shape {self.value.shape}"
            )

    def zero_grad(self):
        self.grad[...] = 0.0


@dataclass
class AdamState:
    """Per-parameter Adam accumulators (bias-corrected update)."""

    m: np.ndarray
    v: np.ndarray
    step: int = 0
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_param(cls, p: Param, lr: float = 0.001, beta1: float = 0.9,
                  beta2: float = 0.999, eps: float = 1e-8) -> "AdamState":
        return cls(m=np.zeros_like(p.value), v=np.zeros_like(p.value),
                   lr=lr, beta1=beta1, beta2=beta2, eps=eps)


def adam_update(p: Param, s: AdamState) -> None:
    """One bias-corrected Adam step. Leaves p.grad untouched."""
    if s.m.shape != p.value.shape:
        raise ShapeError(f"state shape {s.m.shape} != param shape {p.value.shape}")
    g = p.grad
    s.step += 1
    s.m = s.beta1 * s.m + (1.0 - s.beta1) * g
    s.v = s.beta2 * s.v + (1.0 - s.beta2) * g * g
    m_hat = s.m / (1.0 - s.beta1 ** s.step)
    v_hat = s.v / (1.0 - s.beta2 ** s.step)
    p.value -= s.lr * m_hat / (np.sqrt(v_hat) + s.eps)


@dataclass
class Prng:
    """Seeded random stream; identical seed gives a bit-identical stream."""

    seed: int
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self, low, high, size):
        return self._gen.uniform(low, high, size)

    def normal(self, size):
        return self._gen.standard_normal(size)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def random(self, size):
        return self._gen.random(size)

    def spawn(self) -> "Prng":
        """Child stream derived deterministically from this one."""
        child = Prng(int(self._gen.integers(0, 2**63 - 1)))
        return child


def finite_diff_grad(f, p: Param, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar function of p.value."""
    if h <= 0:
        raise ValueError("h must be positive")
    x = p.value
    out = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        orig = x[idx]
        x[idx] = orig + h
        fp = f()
        x[idx] = orig - h
        fm = f()
        x[idx] = orig
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise FloatingPointError(f"non-finite evaluation at index {idx}")
        out[idx] = (fp - fm) / (2.0 * h)
    return out
