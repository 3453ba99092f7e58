"""LSTM cell whose four gate transforms run through variational circuits.

Each time step:

    v_t = [h_{t-1}; x_t]                       (hidden part first)
    z_t = P_in . v_t + b_in                    (shared, squeezes v_t to one
                                                value per qubit)
    e_g = VQC_g(z_t)                           (per gate g in {f, i, c, o}:
                                                own angles, shared input z_t)
    u_g = P_out_g . e_g + b_out_g              (per gate, back to hidden size)

after which u_f, u_i, u_c, u_o feed the usual sigmoid/tanh gate activations
and the shared ``gates_to_state`` cell arithmetic, so a hybrid cell and the
deterministic cell differ only in how the pre-activations are produced.

The backward pass is exact BPTT through the projections and activations;
circuit gradients come from the parameter-shift rule.  All shifted circuit
evaluations for a whole window (T steps x 4 gates) are collected into a
single batched pass, which keeps training runs fast on one CPU core.  In
sampled mode the batch consumes PRNG draws ordered by (time step ascending,
then gate f, i, c, o), and forward draws are ordered the same way.
"""
from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .core_math import Matrix, PrngState, Vector, mat_vec_mac
from .lstm_classic import (CellState, StepCache, gate_pre_activation_grads,
                           gates_to_state, sigmoid, zero_state)
from .quantum_sim import (ExpectationMode, VqcParams, init_vqc_params,
                          shift_jacobians_batch, vqc_forward_batch)

GATE_ORDER = ("f", "i", "c", "o")


@dataclass
class QlstmParams:
    """Trainable parameters of the hybrid cell.

    ``p_in`` is (n_qubits, hidden+input) and shared by all gates; each gate
    owns its circuit angles and an output projection (hidden, n_qubits).
    """

    p_in: Matrix
    b_in: Vector
    vqc_f: VqcParams
    vqc_i: VqcParams
    vqc_c: VqcParams
    vqc_o: VqcParams
    p_out_f: Matrix
    p_out_i: Matrix
    p_out_c: Matrix
    p_out_o: Matrix
    b_out_f: Vector
    b_out_i: Vector
    b_out_c: Vector
    b_out_o: Vector
    w_y: Matrix
    b_y: Vector

    @property
    def n_qubits(self) -> int:
        return self.p_in.shape[0]

    @property
    def depth(self) -> int:
        return self.vqc_f.depth

    @property
    def hidden_dim(self) -> int:
        return self.p_out_f.shape[0]

    @property
    def input_dim(self) -> int:
        return self.p_in.shape[1] - self.p_out_f.shape[0]

    def angle_stack(self) -> np.ndarray:
        """All four gates' angles as one (4, depth, n_qubits, 3) array."""
        return np.stack([self.vqc_f.angles, self.vqc_i.angles,
                         self.vqc_c.angles, self.vqc_o.angles])

    def as_dict(self) -> dict[str, np.ndarray]:
        """Flat name -> array view of every trainable tensor."""
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = value.angles if isinstance(value, VqcParams) else value
        return out

    def zeros_like(self) -> "QlstmParams":
        kwargs = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, VqcParams):
                kwargs[f.name] = VqcParams(np.zeros_like(value.angles))
            else:
                kwargs[f.name] = np.zeros_like(value)
        return QlstmParams(**kwargs)


@dataclass
class QlstmStepCache:
    """Forward intermediates of one hybrid step.

    ``inner`` carries the standard gate cache; ``expectations`` is (4,
    n_qubits) in f, i, c, o order.
    """

    inner: StepCache
    z: Vector
    expectations: np.ndarray


@dataclass
class QlstmSequenceCache:
    steps: list[QlstmStepCache]
    h_final: Vector


def init_qlstm_params(input_dim: int, hidden_dim: int, output_dim: int,
                      n_qubits: int, depth: int, prng: PrngState) -> QlstmParams:
    """Projections uniform +-1/sqrt(fan_in), angles uniform [-pi, pi], zero biases.

    Draw order is fixed: p_in, the four circuits (f, i, c, o), the four
    output projections (same order), then the head.
    """
    if min(input_dim, hidden_dim, output_dim, depth) < 1:
        raise ValueError("all dimensions must be at least 1")
    if n_qubits < 2:
        raise ValueError("the entangling layer needs at least 2 qubits")
    concat = hidden_dim + input_dim

    def w(rows, cols):
        return prng.uniform(-1.0 / np.sqrt(cols), 1.0 / np.sqrt(cols), size=(rows, cols))

    p_in = w(n_qubits, concat)
    vqcs = {f"vqc_{g}": init_vqc_params(n_qubits, depth, prng) for g in GATE_ORDER}
    p_outs = {f"p_out_{g}": w(hidden_dim, n_qubits) for g in GATE_ORDER}
    return QlstmParams(
        p_in=p_in, b_in=np.zeros(n_qubits), **vqcs, **p_outs,
        b_out_f=np.zeros(hidden_dim), b_out_i=np.zeros(hidden_dim),
        b_out_c=np.zeros(hidden_dim), b_out_o=np.zeros(hidden_dim),
        w_y=w(output_dim, hidden_dim), b_y=np.zeros(output_dim),
    )


def qlstm_cell_forward(p: QlstmParams, x_t: Vector, prev: CellState,
                       mode: ExpectationMode,
                       prng: PrngState | None = None) -> tuple[CellState, QlstmStepCache]:
    """One hybrid time step; the four gate circuits run as a single batch."""
    x_t = np.asarray(x_t, dtype=np.float64)
    if x_t.shape[0] != p.input_dim:
        raise ValueError(f"input length {x_t.shape[0]} != input_dim {p.input_dim}")
    v = np.concatenate([prev.h, x_t])
    z = mat_vec_mac(p.p_in, v, p.b_in)
    e = vqc_forward_batch(np.tile(z, (4, 1)), p.angle_stack(), mode, prng)
    u_f = mat_vec_mac(p.p_out_f, e[0], p.b_out_f)
    u_i = mat_vec_mac(p.p_out_i, e[1], p.b_out_i)
    u_c = mat_vec_mac(p.p_out_c, e[2], p.b_out_c)
    u_o = mat_vec_mac(p.p_out_o, e[3], p.b_out_o)
    f, i, g, o = sigmoid(u_f), sigmoid(u_i), np.tanh(u_c), sigmoid(u_o)
    h, c = gates_to_state(f, i, g, o, prev.c)
    inner = StepCache(v=v, f=f, i=i, g=g, o=o, c_prev=prev.c, c=c)
    return CellState(h=h, c=c), QlstmStepCache(inner=inner, z=z, expectations=e)


def qlstm_sequence_forward(p: QlstmParams, window: np.ndarray, mode: ExpectationMode,
                           prng: PrngState | None = None) -> tuple[Vector, QlstmSequenceCache]:
    """Unroll the hybrid cell over a (T, input_dim) window, zeros initial state."""
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 2 or window.shape[0] == 0:
        raise ValueError("window must be a nonempty (T, input_dim) array")
    state = zero_state(p.hidden_dim)
    steps = []
    for t in range(window.shape[0]):
        state, cache = qlstm_cell_forward(p, window[t], state, mode, prng)
        steps.append(cache)
    pred = mat_vec_mac(p.w_y, state.h, p.b_y)
    return pred, QlstmSequenceCache(steps=steps, h_final=state.h)


def qlstm_predict_batch(p: QlstmParams, windows: np.ndarray, mode: ExpectationMode,
                        prng: PrngState | None = None) -> np.ndarray:
    """Predictions for (B, T, input_dim) windows, batching circuits per step.

    Equivalent to running qlstm_sequence_forward per window (states are
    independent across windows), but the B x 4 gate circuits of a time step
    run as one batch, which is what makes full-dataset metric sweeps cheap.
    In sampled mode the draw order is (sample, gate) per time step, so the
    stream consumption differs from the one-window path; any single code
    path is still deterministic under a fixed seed.
    """
    windows = np.asarray(windows, dtype=np.float64)
    if windows.ndim != 3 or windows.shape[0] == 0 or windows.shape[2] != p.input_dim:
        raise ValueError(f"windows must be (B, T, {p.input_dim}), got {windows.shape}")
    b = windows.shape[0]
    n = p.n_qubits
    angles = np.tile(p.angle_stack(), (b, 1, 1, 1))
    h = np.zeros((b, p.hidden_dim))
    c = np.zeros((b, p.hidden_dim))
    for t in range(windows.shape[1]):
        v = np.concatenate([h, windows[:, t, :]], axis=1)
        z = v @ p.p_in.T + p.b_in
        e = vqc_forward_batch(np.repeat(z, 4, axis=0), angles, mode, prng)
        e = e.reshape(b, 4, n)
        f = sigmoid(e[:, 0] @ p.p_out_f.T + p.b_out_f)
        i = sigmoid(e[:, 1] @ p.p_out_i.T + p.b_out_i)
        g = np.tanh(e[:, 2] @ p.p_out_c.T + p.b_out_c)
        o = sigmoid(e[:, 3] @ p.p_out_o.T + p.b_out_o)
        h, c = gates_to_state(f, i, g, o, c)
    return h @ p.w_y.T + p.b_y


def qlstm_sequence_backward(p: QlstmParams, cache: QlstmSequenceCache,
                            d_prediction: Vector, mode: ExpectationMode,
                            prng: PrngState | None = None) -> QlstmParams:
    """Gradients of d_prediction . prediction w.r.t. every parameter.

    The circuit Jacobians for all T x 4 gate evaluations are produced by one
    batched parameter-shift pass; the chain rule through projections, gate
    activations, and the state recursion is then ordinary BPTT.
    """
    d_prediction = np.asarray(d_prediction, dtype=np.float64)
    if d_prediction.shape != (p.w_y.shape[0],):
        raise ValueError("d_prediction length does not match the output head")
    if not cache.steps or cache.steps[0].z.shape[0] != p.n_qubits:
        raise ValueError("cache does not match these parameters")
    n_steps = len(cache.steps)
    hidden = p.hidden_dim
    angle_stack = p.angle_stack()

    zs = np.stack([s.z for s in cache.steps])                     # (T, n)
    xs_all = np.repeat(zs, 4, axis=0)                             # row 4t+k: step t, gate k
    angles_all = np.tile(angle_stack, (n_steps, 1, 1, 1))
    j_ang, j_x = shift_jacobians_batch(xs_all, angles_all, mode, prng)

    grads = p.zeros_like()
    grads.w_y += np.outer(d_prediction, cache.h_final)
    grads.b_y += d_prediction
    dh = p.w_y.T @ d_prediction
    dc = np.zeros(hidden)

    p_outs = (p.p_out_f, p.p_out_i, p.p_out_c, p.p_out_o)
    g_p_outs = [grads.p_out_f, grads.p_out_i, grads.p_out_c, grads.p_out_o]
    g_b_outs = [grads.b_out_f, grads.b_out_i, grads.b_out_c, grads.b_out_o]
    g_angles = [grads.vqc_f.angles, grads.vqc_i.angles,
                grads.vqc_c.angles, grads.vqc_o.angles]

    for t in range(n_steps - 1, -1, -1):
        step = cache.steps[t]
        dus = gate_pre_activation_grads(step.inner, dh, dc)
        dc = dus[4]
        dz = np.zeros(p.n_qubits)
        for k in range(4):
            du = dus[k]
            g_p_outs[k] += np.outer(du, step.expectations[k])
            g_b_outs[k] += du
            de = p_outs[k].T @ du
            row = 4 * t + k
            g_angles[k] += (j_ang[row] @ de).reshape(angle_stack.shape[1:])
            dz += j_x[row] @ de
        grads.p_in += np.outer(dz, step.inner.v)
        grads.b_in += dz
        dh = (p.p_in.T @ dz)[:hidden]
    return grads
