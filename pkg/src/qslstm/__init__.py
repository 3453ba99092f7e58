"""Benchmark suite for classic, stochastically quantized, and hybrid
quantum LSTM variants on synthetic time-series forecasting tasks."""

__version__ = "0.1.0"

from .cli import ExperimentConfig, run_benchmark, run_experiment  # noqa: F401
from .datasets import Dataset, SignalConfig, build_benchmark_datasets  # noqa: F401
from .quantum_sim import ExpectationMode  # noqa: F401
from .train_eval import RunRecord, TrainConfig, train_model  # noqa: F401
