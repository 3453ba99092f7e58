"""Stochastic rounding quantizer and the quantized-MAC LSTM cell.

The quantizer rounds a real w to floor(w)+1 with probability equal to the
fractional part and to floor(w) otherwise, so it is unbiased; a clamp keeps
results inside the configured integer range.  The stochastic cell applies
the (optionally shot-averaged) quantizer to each gate's MAC output before
the activation; the cell-state arithmetic and hidden state stay exact.
Stochasticity lives only in the feed-forward path: the backward pass treats
the quantizer as identity inside the clamp range (straight-through) and
zero outside it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_math import PrngState, Vector, mat_vec_mac, prng_uniform
from .lstm_classic import (CellState, LstmParams, SequenceCache, StepCache,
                           gates_to_state, sequence_backward, sigmoid)


@dataclass(frozen=True)
class QuantConfig:
    """Shot count and clamp range of the quantizer.

    The default [-128, 127] range is an 8-bit signed grid; with the
    benchmark's small hidden dimension it almost never binds.
    """

    shots: int = 1
    clamp_lo: int = -128
    clamp_hi: int = 127

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")
        if self.clamp_lo >= self.clamp_hi:
            raise ValueError("clamp_lo must be below clamp_hi")


def stochastic_round(w: float, prng: PrngState) -> float:
    """Round w to floor(w)+1 with probability w - floor(w), else floor(w).

    Integers are fixed points: the strict comparison below realizes the
    measure-zero boundary case exactly, so stochastic_round(k) == k always.
    """
    if not np.isfinite(w):
        raise ValueError(f"cannot quantize non-finite value {w}")
    lo = np.floor(w)
    return float(lo + 1.0) if prng_uniform(prng) < w - lo else float(lo)


def clamp(q: float, cfg: QuantConfig) -> float:
    return min(max(q, cfg.clamp_lo), cfg.clamp_hi)


def nshot_quantize(u: Vector, cfg: QuantConfig, prng: PrngState) -> Vector:
    """Elementwise mean of cfg.shots draws of clamp(stochastic_round(u_i)).

    Draw order matches the scalar loop "for each shot, for each element",
    so the vectorized path consumes the stream identically.
    """
    u = np.asarray(u, dtype=np.float64)
    if not np.all(np.isfinite(u)):
        raise ValueError("cannot quantize non-finite values")
    lo = np.floor(u)
    frac = u - lo
    draws = prng.random((cfg.shots, u.shape[0]))
    q = lo + (draws < frac)
    np.clip(q, cfg.clamp_lo, cfg.clamp_hi, out=q)
    return q.mean(axis=0)


def _ste_mask(u: Vector, cfg: QuantConfig) -> Vector:
    # straight-through: identity inside the clamp range, zero outside
    return ((u >= cfg.clamp_lo) & (u <= cfg.clamp_hi)).astype(np.float64)


def slstm_cell_forward(p: LstmParams, cfg: QuantConfig, x_t: Vector,
                       prev: CellState, prng: PrngState) -> tuple[CellState, StepCache]:
    """One step of the quantized cell; gate MAC outputs pass through the
    shot-averaged quantizer before their activations (f, i, g, o order)."""
    x_t = np.asarray(x_t, dtype=np.float64)
    if x_t.shape[0] != p.input_dim:
        raise ValueError(f"input length {x_t.shape[0]} != input_dim {p.input_dim}")
    v = np.concatenate([prev.h, x_t])
    u_f = mat_vec_mac(p.w_f, v, p.b_f)
    u_i = mat_vec_mac(p.w_i, v, p.b_i)
    u_c = mat_vec_mac(p.w_c, v, p.b_c)
    u_o = mat_vec_mac(p.w_o, v, p.b_o)
    f = sigmoid(nshot_quantize(u_f, cfg, prng))
    i = sigmoid(nshot_quantize(u_i, cfg, prng))
    g = np.tanh(nshot_quantize(u_c, cfg, prng))
    o = sigmoid(nshot_quantize(u_o, cfg, prng))
    h, c = gates_to_state(f, i, g, o, prev.c)
    masks = (_ste_mask(u_f, cfg), _ste_mask(u_i, cfg),
             _ste_mask(u_c, cfg), _ste_mask(u_o, cfg))
    cache = StepCache(v=v, f=f, i=i, g=g, o=o, c_prev=prev.c, c=c, masks=masks)
    return CellState(h=h, c=c), cache


def slstm_sequence_forward(p: LstmParams, cfg: QuantConfig, window: np.ndarray,
                           prng: PrngState) -> tuple[Vector, SequenceCache]:
    """Unrolled stochastic forward pass; the output head is not quantized."""
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 2 or window.shape[0] == 0:
        raise ValueError("window must be a nonempty (T, input_dim) array")
    state = CellState(h=np.zeros(p.hidden_dim), c=np.zeros(p.hidden_dim))
    steps = []
    for t in range(window.shape[0]):
        state, cache = slstm_cell_forward(p, cfg, window[t], state, prng)
        steps.append(cache)
    pred = mat_vec_mac(p.w_y, state.h, p.b_y)
    return pred, SequenceCache(steps=steps, h_final=state.h)


def slstm_sequence_backward(p: LstmParams, cache: SequenceCache,
                            d_prediction: Vector) -> LstmParams:
    """Straight-through BPTT over the realized forward values.

    The cache already carries the per-gate masks, so this is ordinary BPTT
    with the quantizer treated as clipped identity.
    """
    if not cache.steps or cache.steps[0].masks is None:
        raise ValueError("cache does not come from a stochastic forward pass")
    return sequence_backward(p, cache, d_prediction)
