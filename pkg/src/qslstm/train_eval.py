"""Training loop, RMSProp, metrics, and model adapters.

One run is strictly sequential: chronological mini-batches, mean gradient
per batch, one RMSProp step per batch, then a full forward pass over both
splits to record epoch metrics (in the model's own expectation mode, so a
sampled model is also evaluated through sampling noise).  The best epoch of
a run is the one with minimum validation RMSE.

The three model adapters give the loop a single surface (forward, backward,
params_dict) over the deterministic cell, the stochastically quantized
cell, and the hybrid quantum cell.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import lstm_classic, qlstm, stochastic_quant
from .core_math import PrngState, Vector
from .datasets import Dataset
from .quantum_sim import ExpectationMode


def mse_and_grad(pred: Vector, target: Vector) -> tuple[float, Vector]:
    """Mean squared error and its gradient 2*(pred-target)/len w.r.t. pred."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValueError(f"length mismatch: {pred.shape} vs {target.shape}")
    diff = pred - target
    return float(np.mean(diff ** 2)), 2.0 * diff / diff.size


def rmse(preds: Vector, targets: Vector) -> float:
    preds = np.asarray(preds, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if preds.shape != targets.shape:
        raise ValueError(f"length mismatch: {preds.shape} vs {targets.shape}")
    if preds.size == 0:
        raise ValueError("rmse of an empty set")
    return float(np.sqrt(np.mean((preds - targets) ** 2)))


def r2_score(preds: Vector, targets: Vector) -> float:
    """Coefficient of determination; rejects constant targets."""
    preds = np.asarray(preds, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if preds.shape != targets.shape:
        raise ValueError(f"length mismatch: {preds.shape} vs {targets.shape}")
    ss_tot = float(np.sum((targets - targets.mean()) ** 2))
    if ss_tot == 0.0:
        raise ValueError("r2 is undefined for zero target variance")
    ss_res = float(np.sum((targets - preds) ** 2))
    return 1.0 - ss_res / ss_tot


@dataclass
class RmspropState:
    """Per-parameter running mean square plus the step hyperparameters."""

    lr: float
    rho: float
    eps: float
    slots: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"decay rho must be in (0, 1), got {self.rho}")
        if self.lr <= 0.0 or self.eps <= 0.0:
            raise ValueError("learning rate and epsilon must be positive")


def init_rmsprop(params: dict[str, np.ndarray], lr: float = 0.01,
                 rho: float = 0.99, eps: float = 1e-8) -> RmspropState:
    return RmspropState(lr=lr, rho=rho, eps=eps,
                        slots={k: np.zeros_like(v) for k, v in params.items()})


def rmsprop_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray],
                 state: RmspropState) -> None:
    """In-place update: s <- rho*s + (1-rho)*g^2; p <- p - lr*g/(sqrt(s)+eps)."""
    if params.keys() != state.slots.keys():
        raise ValueError("optimizer state does not match these parameters")
    if grads.keys() != params.keys():
        raise ValueError("gradient keys do not match parameter keys")
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ValueError(f"gradient shape mismatch for {name}: {g.shape} vs {p.shape}")
        s = state.slots[name]
        s *= state.rho
        s += (1.0 - state.rho) * g * g
        p -= state.lr * g / (np.sqrt(s) + state.eps)


class ClassicModel:
    """Deterministic LSTM adapter."""

    def __init__(self, params: lstm_classic.LstmParams):
        self.params = params
        self.mode_label = "deterministic"

    def params_dict(self) -> dict[str, np.ndarray]:
        return self.params.as_dict()

    def forward(self, window: np.ndarray):
        return lstm_classic.sequence_forward(self.params, window)

    def backward(self, cache, d_pred: Vector) -> dict[str, np.ndarray]:
        return lstm_classic.sequence_backward(self.params, cache, d_pred).as_dict()


class StochasticModel:
    """Quantized-MAC LSTM adapter; forward passes consume the noise stream."""

    def __init__(self, params: lstm_classic.LstmParams,
                 quant: stochastic_quant.QuantConfig, noise_prng: PrngState):
        self.params = params
        self.quant = quant
        self.noise_prng = noise_prng
        self.mode_label = f"{quant.shots}-shot quantized"

    def params_dict(self) -> dict[str, np.ndarray]:
        return self.params.as_dict()

    def forward(self, window: np.ndarray):
        return stochastic_quant.slstm_sequence_forward(self.params, self.quant,
                                                       window, self.noise_prng)

    def backward(self, cache, d_pred: Vector) -> dict[str, np.ndarray]:
        return stochastic_quant.slstm_sequence_backward(self.params, cache, d_pred).as_dict()


class QuantumModel:
    """Hybrid-cell adapter; expectation mode applies to forward and gradients."""

    def __init__(self, params: qlstm.QlstmParams, mode: ExpectationMode,
                 noise_prng: PrngState | None = None):
        if not mode.is_analytic and noise_prng is None:
            raise ValueError("sampled mode needs a noise PRNG stream")
        self.params = params
        self.mode = mode
        self.noise_prng = noise_prng
        self.mode_label = mode.label()

    def params_dict(self) -> dict[str, np.ndarray]:
        return self.params.as_dict()

    def forward(self, window: np.ndarray):
        return qlstm.qlstm_sequence_forward(self.params, window, self.mode, self.noise_prng)

    def backward(self, cache, d_pred: Vector) -> dict[str, np.ndarray]:
        return qlstm.qlstm_sequence_backward(self.params, cache, d_pred,
                                             self.mode, self.noise_prng).as_dict()

    def predict_all(self, windows: np.ndarray) -> np.ndarray:
        return qlstm.qlstm_predict_batch(self.params, windows, self.mode,
                                         self.noise_prng)[:, 0]


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 4
    lr: float = 0.01
    rho: float = 0.99
    eps: float = 1e-8
    shuffle: bool = False

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    train_rmse: float
    train_r2: float
    val_rmse: float
    val_r2: float
    seconds: float


@dataclass
class RunRecord:
    """Everything one training run produced."""

    epochs: list[EpochMetrics]
    seed: int | None = None
    mode_label: str = ""
    config: dict = field(default_factory=dict)
    wall_seconds: float = 0.0

    @property
    def best_epoch(self) -> int:
        """Index of the epoch with minimum validation RMSE."""
        if not self.epochs:
            raise ValueError("run has no recorded epochs")
        return int(np.argmin([e.val_rmse for e in self.epochs]))

    @property
    def best(self) -> EpochMetrics:
        return self.epochs[self.best_epoch]


def evaluate_dataset(model, data: Dataset) -> tuple[float, float]:
    """Full forward pass; returns (rmse, r2).

    r2 is NaN when the targets are constant (the standalone r2_score rejects
    that case; a metrics sweep should not die on a degenerate split).
    """
    if hasattr(model, "predict_all"):
        preds = model.predict_all(data.windows)
    else:
        preds = np.array([model.forward(data.windows[k])[0][0] for k in range(len(data))])
    targets = data.targets[:, 0]
    err = rmse(preds, targets)
    if np.ptp(targets) == 0.0:
        return err, float("nan")
    return err, r2_score(preds, targets)


def train_model(model, train_data: Dataset, val_data: Dataset, cfg: TrainConfig,
                prng: PrngState | None = None, seed: int | None = None,
                config_snapshot: dict | None = None) -> RunRecord:
    """Run the full optimization loop and record per-epoch metrics.

    ``prng`` is only consumed when cfg.shuffle is set (batch order); model
    noise streams live inside the adapters.
    """
    if len(train_data) == 0 or len(val_data) == 0:
        raise ValueError("train and validation datasets must be nonempty")
    if cfg.shuffle and prng is None:
        raise ValueError("shuffled batches need a PRNG")
    params = model.params_dict()
    state = init_rmsprop(params, lr=cfg.lr, rho=cfg.rho, eps=cfg.eps)
    record = RunRecord(epochs=[], seed=seed, mode_label=model.mode_label,
                       config=dict(config_snapshot or {}))

    n = len(train_data)
    for epoch in range(cfg.epochs):
        t0 = time.perf_counter()
        order = prng.permutation(n) if cfg.shuffle else np.arange(n)
        for start in range(0, n, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            grad_sum = {k: np.zeros_like(v) for k, v in params.items()}
            for idx in batch:
                pred, cache = model.forward(train_data.windows[idx])
                # d(batch MSE)/d(pred) accumulates to the batch-mean gradient
                d_pred = 2.0 * (pred - train_data.targets[idx]) / len(batch)
                for name, g in model.backward(cache, d_pred).items():
                    grad_sum[name] += g
            rmsprop_step(params, grad_sum, state)
        train_rmse, train_r2 = evaluate_dataset(model, train_data)
        val_rmse, val_r2 = evaluate_dataset(model, val_data)
        seconds = time.perf_counter() - t0
        record.epochs.append(EpochMetrics(epoch=epoch, train_rmse=train_rmse,
                                          train_r2=train_r2, val_rmse=val_rmse,
                                          val_r2=val_r2, seconds=seconds))
        record.wall_seconds += seconds
    return record
