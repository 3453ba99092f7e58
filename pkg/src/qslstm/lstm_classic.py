"""Baseline LSTM cell: forward pass, backprop through time, affine head.

The cell follows the standard gate equations

    f_t = sigmoid(W_f . v_t + b_f)         (forget)
    i_t = sigmoid(W_i . v_t + b_i)         (input)
    g_t = tanh(W_c . v_t + b_c)            (update candidate)
    c_t = f_t * c_{t-1} + i_t * g_t
    o_t = sigmoid(W_o . v_t + b_o)         (output)
    h_t = o_t * tanh(c_t)

with v_t = [h_{t-1}; x_t], hidden part first.  A fully-connected head
W_y . h_T + b_y at the final step produces the scalar prediction.

The same cache/backward machinery also serves the stochastically quantized
cell: a step cache may carry straight-through masks that gate the
pre-activation gradients, and the cell-state arithmetic lives in
``gates_to_state`` which all cell variants share.
"""
from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .core_math import Matrix, PrngState, Vector, mat_vec_mac


def sigmoid(u: np.ndarray) -> np.ndarray:
    # split by sign to stay stable for large |u|
    out = np.empty_like(u)
    pos = u >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    eu = np.exp(u[~pos])
    out[~pos] = eu / (1.0 + eu)
    return out


@dataclass
class LstmParams:
    """Trainable parameters; gate weights are (hidden, hidden+input)."""

    w_f: Matrix
    w_i: Matrix
    w_c: Matrix
    w_o: Matrix
    b_f: Vector
    b_i: Vector
    b_c: Vector
    b_o: Vector
    w_y: Matrix
    b_y: Vector

    @property
    def hidden_dim(self) -> int:
        return self.w_f.shape[0]

    @property
    def input_dim(self) -> int:
        return self.w_f.shape[1] - self.w_f.shape[0]

    def as_dict(self) -> dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def zeros_like(self) -> "LstmParams":
        return LstmParams(**{k: np.zeros_like(a) for k, a in self.as_dict().items()})


@dataclass(frozen=True)
class CellState:
    """(hidden, cell) pair threaded across time steps."""

    h: Vector
    c: Vector


@dataclass
class StepCache:
    """Everything the backward pass needs from one forward step.

    ``masks`` is None for the deterministic cell; the quantized cell stores
    per-gate straight-through masks (f, i, c, o order) here.
    """

    v: Vector
    f: Vector
    i: Vector
    g: Vector
    o: Vector
    c_prev: Vector
    c: Vector
    masks: tuple[Vector, Vector, Vector, Vector] | None = None


@dataclass
class SequenceCache:
    steps: list[StepCache]
    h_final: Vector


def zero_state(hidden_dim: int) -> CellState:
    return CellState(h=np.zeros(hidden_dim), c=np.zeros(hidden_dim))


def gates_to_state(f: Vector, i: Vector, g: Vector, o: Vector, c_prev: Vector) -> tuple[Vector, Vector]:
    """Shared cell-state arithmetic: c = f*c_prev + i*g, h = o*tanh(c).

    Every cell variant funnels through this function so that identical gate
    activations always yield bit-identical states.
    """
    c = f * c_prev + i * g
    h = o * np.tanh(c)
    return h, c


def init_params(input_dim: int, hidden_dim: int, output_dim: int,
                prng: PrngState) -> LstmParams:
    """Uniform +-1/sqrt(hidden+input) weights, zero biases."""
    if min(input_dim, hidden_dim, output_dim) < 1:
        raise ValueError("all dimensions must be at least 1")
    concat = hidden_dim + input_dim
    bound = 1.0 / np.sqrt(concat)

    def w(rows, cols):
        return prng.uniform(-bound, bound, size=(rows, cols))

    return LstmParams(
        w_f=w(hidden_dim, concat), w_i=w(hidden_dim, concat),
        w_c=w(hidden_dim, concat), w_o=w(hidden_dim, concat),
        b_f=np.zeros(hidden_dim), b_i=np.zeros(hidden_dim),
        b_c=np.zeros(hidden_dim), b_o=np.zeros(hidden_dim),
        w_y=w(output_dim, hidden_dim), b_y=np.zeros(output_dim),
    )


def lstm_cell_forward(p: LstmParams, x_t: Vector, prev: CellState) -> tuple[CellState, StepCache]:
    """One time step of the deterministic cell."""
    x_t = np.asarray(x_t, dtype=np.float64)
    if x_t.shape[0] != p.input_dim:
        raise ValueError(f"input length {x_t.shape[0]} != input_dim {p.input_dim}")
    v = np.concatenate([prev.h, x_t])
    f = sigmoid(mat_vec_mac(p.w_f, v, p.b_f))
    i = sigmoid(mat_vec_mac(p.w_i, v, p.b_i))
    g = np.tanh(mat_vec_mac(p.w_c, v, p.b_c))
    o = sigmoid(mat_vec_mac(p.w_o, v, p.b_o))
    h, c = gates_to_state(f, i, g, o, prev.c)
    cache = StepCache(v=v, f=f, i=i, g=g, o=o, c_prev=prev.c, c=c)
    return CellState(h=h, c=c), cache


def sequence_forward(p: LstmParams, window: np.ndarray) -> tuple[Vector, SequenceCache]:
    """Unroll the cell over a window and apply the head at the final step.

    ``window`` is (T, input_dim); the initial state is zeros.
    """
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 2 or window.shape[0] == 0:
        raise ValueError("window must be a nonempty (T, input_dim) array")
    state = zero_state(p.hidden_dim)
    steps = []
    for t in range(window.shape[0]):
        state, cache = lstm_cell_forward(p, window[t], state)
        steps.append(cache)
    pred = mat_vec_mac(p.w_y, state.h, p.b_y)
    return pred, SequenceCache(steps=steps, h_final=state.h)


def gate_pre_activation_grads(cache: StepCache, dh: Vector, dc_in: Vector):
    """Gradient step shared by all BPTT variants.

    Given upstream dh/dc at time t, returns the four pre-activation
    gradients (after any straight-through mask) plus the cell-state
    gradient flowing to t-1.
    """
    tanh_c = np.tanh(cache.c)
    do = dh * tanh_c
    dc = dc_in + dh * cache.o * (1.0 - tanh_c * tanh_c)
    du_f = dc * cache.c_prev * cache.f * (1.0 - cache.f)
    du_i = dc * cache.g * cache.i * (1.0 - cache.i)
    du_c = dc * cache.i * (1.0 - cache.g * cache.g)
    du_o = do * cache.o * (1.0 - cache.o)
    if cache.masks is not None:
        m_f, m_i, m_c, m_o = cache.masks
        du_f = du_f * m_f
        du_i = du_i * m_i
        du_c = du_c * m_c
        du_o = du_o * m_o
    dc_prev = dc * cache.f
    return du_f, du_i, du_c, du_o, dc_prev


def sequence_backward(p: LstmParams, cache: SequenceCache, d_prediction: Vector) -> LstmParams:
    """Exact reverse-mode gradients of d_prediction . prediction.

    Returns a gradient record with the same shape as LstmParams.
    """
    d_prediction = np.asarray(d_prediction, dtype=np.float64)
    if d_prediction.shape != (p.w_y.shape[0],):
        raise ValueError("d_prediction length does not match the output head")
    if not cache.steps or cache.steps[0].v.shape[0] != p.w_f.shape[1]:
        raise ValueError("cache does not match these parameters")
    hidden = p.hidden_dim
    grads = p.zeros_like()

    grads.w_y += np.outer(d_prediction, cache.h_final)
    grads.b_y += d_prediction
    dh = p.w_y.T @ d_prediction
    dc = np.zeros(hidden)

    for step in reversed(cache.steps):
        du_f, du_i, du_c, du_o, dc = gate_pre_activation_grads(step, dh, dc)
        grads.w_f += np.outer(du_f, step.v)
        grads.w_i += np.outer(du_i, step.v)
        grads.w_c += np.outer(du_c, step.v)
        grads.w_o += np.outer(du_o, step.v)
        grads.b_f += du_f
        grads.b_i += du_i
        grads.b_c += du_c
        grads.b_o += du_o
        dv = p.w_f.T @ du_f + p.w_i.T @ du_i + p.w_c.T @ du_c + p.w_o.T @ du_o
        dh = dv[:hidden]
    return grads
