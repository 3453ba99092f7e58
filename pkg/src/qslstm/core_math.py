"""Dense linear algebra primitives, seedable PRNG helpers, and a
finite-difference gradient oracle.

Conventions used throughout the package:

* matrices are float64 numpy arrays of shape ``(rows, cols)``, row-major;
* vectors are 1-D float64 arrays;
* random streams are numpy ``Generator`` objects backed by PCG64, which is
  documented, seedable, and splittable via ``SeedSequence``.  Each training
  run owns exactly one stream (or one init stream plus one noise stream);
  streams are never shared across concurrent runs.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

Matrix = np.ndarray
Vector = np.ndarray
PrngState = np.random.Generator


def make_prng(seed: int) -> PrngState:
    """Create a deterministic PCG64 generator for the given seed."""
    return np.random.Generator(np.random.PCG64(seed))


def spawn_prngs(seed: int, n: int) -> list[PrngState]:
    """Split a seed into ``n`` independent child streams.

    Used to separate parameter initialization from sampling noise so that
    e.g. analytic-mode runs depend only on the init stream.
    """
    children = np.random.SeedSequence(seed).spawn(n)
    return [np.random.Generator(np.random.PCG64(ss)) for ss in children]


def prng_uniform(state: PrngState) -> float:
    """Next uniform draw on [0, 1); advances the stream."""
    return float(state.random())


def mat_vec_mac(w: Matrix, v: Vector, b: Vector) -> Vector:
    """Multiply-and-accumulate ``w @ v + b``.

    Raises ValueError on any dimension mismatch instead of letting numpy
    broadcast silently.
    """
    w = np.asarray(w, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if w.ndim != 2:
        raise ValueError(f"weight must be 2-D, got shape {w.shape}")
    if v.ndim != 1 or b.ndim != 1:
        raise ValueError("vector operands must be 1-D")
    if w.shape[1] != v.shape[0]:
        raise ValueError(f"shape mismatch: {w.shape} @ {v.shape}")
    if w.shape[0] != b.shape[0]:
        raise ValueError(f"bias length {b.shape[0]} != {w.shape[0]} rows")
    return w @ v + b


def finite_diff_grad(f: Callable[[Vector], float], x: Vector, h: float = 1e-5) -> Vector:
    """Central-difference gradient ``(f(x + h e_i) - f(x - h e_i)) / 2h``.

    This is the independent oracle every analytic gradient in the package
    is checked against; it must stay free of any model code.
    """
    if h <= 0:
        raise ValueError(f"step size must be positive, got {h}")
    x = np.asarray(x, dtype=np.float64)
    grad = np.empty_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        fp = float(f(xp))
        fm = float(f(xm))
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise ValueError(f"non-finite function value near coordinate {i}")
        grad[i] = (fp - fm) / (2.0 * h)
    return grad
