"""Benchmark signal generators, min-max scaling, and supervised windowing.

Four univariate signals: sine, sawtooth, two summed cosine waves, and a
closed-form underdamped harmonic oscillator.  Every generator is pure and
deterministic.  Series are scaled onto [-1, 1] before being cut into
(window, next value) pairs with a chronological train/validation split.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SignalConfig:
    """Which signal to generate, at what resolution, with what parameters.

    Only the parameters relevant to ``kind`` are read; the rest keep their
    defaults.  The defaults reproduce the benchmark configuration.
    """

    kind: str = "sine"
    n_points: int = 300
    periods: float = 4.0            # sine / sawtooth
    amp1: float = 1.0               # summed waves
    amp2: float = 1.0
    wavelength1: float = 9.0
    wavelength2: float = 11.0
    x_max: float = 99.0
    mass: float = 0.75              # damped oscillator
    spring_k: float = 4.0
    friction_c: float = 0.1
    t_max: float = 20.0
    x0: float = 1.0
    v0: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown signal kind {self.kind!r}")
        if self.n_points < 2:
            raise ValueError("n_points must be at least 2")


@dataclass(frozen=True)
class Dataset:
    """Chronologically ordered supervised pairs cut from one scaled series.

    ``windows`` has shape (n_pairs, window_len, 1) and ``targets`` shape
    (n_pairs, 1); the target of pair k is the series sample immediately
    after its window.  ``scaler`` is the (min, max) of the raw series, kept
    for inverse transforms.
    """

    windows: np.ndarray
    targets: np.ndarray
    scaler: tuple[float, float]

    def __len__(self) -> int:
        return self.windows.shape[0]


def gen_sine(n_points: int, periods: float = 4.0) -> np.ndarray:
    """sin(2*pi*periods*k/(n_points-1)) for k = 0 .. n_points-1."""
    k = np.arange(n_points, dtype=np.float64)
    return np.sin(2.0 * np.pi * periods * k / (n_points - 1))


def gen_sawtooth(n_points: int, periods: float = 4.0) -> np.ndarray:
    """Sawtooth rising -1 -> 1 over each period, discontinuous at wraps."""
    phase = periods * np.arange(n_points, dtype=np.float64) / (n_points - 1)
    return 2.0 * (phase - np.floor(phase)) - 1.0


def summed_waves_value(x: float, amp1: float = 1.0, amp2: float = 1.0,
                       wavelength1: float = 9.0, wavelength2: float = 11.0) -> float:
    """Two superposed cosines: amp1*cos(2*pi*x/l1) + amp2*cos(2*pi*x/l2)."""
    return (amp1 * math.cos(2.0 * math.pi * x / wavelength1)
            + amp2 * math.cos(2.0 * math.pi * x / wavelength2))


def gen_summed_waves(n_points: int, x_max: float = 99.0, amp1: float = 1.0,
                     amp2: float = 1.0, wavelength1: float = 9.0,
                     wavelength2: float = 11.0) -> np.ndarray:
    if wavelength1 <= 0 or wavelength2 <= 0:
        raise ValueError("wavelengths must be positive")
    x = np.linspace(0.0, x_max, n_points)
    return (amp1 * np.cos(2.0 * np.pi * x / wavelength1)
            + amp2 * np.cos(2.0 * np.pi * x / wavelength2))


def oscillator_constants(mass: float, spring_k: float, friction_c: float) -> tuple[float, float]:
    """(natural frequency, damping ratio) of the mass-spring-friction system."""
    if mass <= 0 or spring_k <= 0 or friction_c < 0:
        raise ValueError("physical parameters must be positive")
    omega0 = math.sqrt(spring_k / mass)
    zeta = friction_c / (2.0 * math.sqrt(mass * spring_k))
    return omega0, zeta


def gen_damped_oscillator(n_points: int, t_max: float = 20.0, mass: float = 0.75,
                          spring_k: float = 4.0, friction_c: float = 0.1,
                          x0: float = 1.0, v0: float = 0.0) -> np.ndarray:
    """Closed-form underdamped oscillator position sampled on [0, t_max].

    x(t) = exp(-zeta*w0*t) * (x0 cos(wd t) + (v0 + zeta*w0*x0)/wd * sin(wd t))
    with wd = w0*sqrt(1 - zeta^2).  Overdamped parameter sets are rejected;
    they are outside the benchmark's scope.
    """
    omega0, zeta = oscillator_constants(mass, spring_k, friction_c)
    if zeta >= 1.0:
        raise ValueError(f"system is not underdamped (damping ratio {zeta:.4f} >= 1)")
    omega_d = omega0 * math.sqrt(1.0 - zeta * zeta)
    t = np.linspace(0.0, t_max, n_points)
    envelope = np.exp(-zeta * omega0 * t)
    return envelope * (x0 * np.cos(omega_d * t)
                       + (v0 + zeta * omega0 * x0) / omega_d * np.sin(omega_d * t))


KINDS = ("sine", "sawtooth", "summed_waves", "damped_oscillator")


def make_signal(cfg: SignalConfig) -> np.ndarray:
    """Generate the raw (unscaled) series described by ``cfg``."""
    if cfg.kind == "sine":
        return gen_sine(cfg.n_points, cfg.periods)
    if cfg.kind == "sawtooth":
        return gen_sawtooth(cfg.n_points, cfg.periods)
    if cfg.kind == "summed_waves":
        return gen_summed_waves(cfg.n_points, cfg.x_max, cfg.amp1, cfg.amp2,
                                cfg.wavelength1, cfg.wavelength2)
    return gen_damped_oscillator(cfg.n_points, cfg.t_max, cfg.mass,
                                 cfg.spring_k, cfg.friction_c, cfg.x0, cfg.v0)


def scale_minmax(series: np.ndarray) -> tuple[np.ndarray, tuple[float, float]]:
    """Affine map of [min, max] onto [-1, 1]; returns the scaler for inversion."""
    series = np.asarray(series, dtype=np.float64)
    lo = float(series.min())
    hi = float(series.max())
    if hi <= lo:
        raise ValueError("cannot scale a constant series")
    scaled = 2.0 * (series - lo) / (hi - lo) - 1.0
    return scaled, (lo, hi)


def inverse_scale(scaled: np.ndarray, scaler: tuple[float, float]) -> np.ndarray:
    lo, hi = scaler
    return (np.asarray(scaled, dtype=np.float64) + 1.0) * (hi - lo) / 2.0 + lo


def make_windows(series: np.ndarray, window_len: int,
                 scaler: tuple[float, float] = (-1.0, 1.0)) -> Dataset:
    """Cut a (scaled) series into sliding (window, next value) pairs."""
    series = np.asarray(series, dtype=np.float64)
    if window_len < 1:
        raise ValueError("window_len must be at least 1")
    n_pairs = series.shape[0] - window_len
    if n_pairs < 1:
        raise ValueError(f"series of length {series.shape[0]} too short for window {window_len}")
    windows = np.empty((n_pairs, window_len, 1), dtype=np.float64)
    targets = np.empty((n_pairs, 1), dtype=np.float64)
    for k in range(n_pairs):
        windows[k, :, 0] = series[k:k + window_len]
        targets[k, 0] = series[k + window_len]
    return Dataset(windows=windows, targets=targets, scaler=scaler)


def split_chronological(ds: Dataset, train_fraction: float) -> tuple[Dataset, Dataset]:
    """First floor(fraction*n) pairs become training data, the rest validation."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n = len(ds)
    n_train = math.floor(train_fraction * n)
    if n_train == 0 or n_train == n:
        raise ValueError(f"split {train_fraction} leaves an empty side for {n} pairs")
    train = Dataset(ds.windows[:n_train], ds.targets[:n_train], ds.scaler)
    val = Dataset(ds.windows[n_train:], ds.targets[n_train:], ds.scaler)
    return train, val


def build_benchmark_datasets(cfg: SignalConfig, window_len: int = 4,
                             train_fraction: float = 0.67) -> tuple[Dataset, Dataset, np.ndarray]:
    """Full pipeline: generate, scale to [-1, 1], window, split.

    Returns (train, validation, raw series).
    """
    raw = make_signal(cfg)
    scaled, scaler = scale_minmax(raw)
    ds = make_windows(scaled, window_len, scaler)
    train, val = split_chronological(ds, train_fraction)
    return train, val, raw


def write_series_csv(path, series: np.ndarray) -> None:
    """Export a series as two-column (index, value) CSV for plotting."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["index", "value"])
        for i, v in enumerate(np.asarray(series).ravel()):
            writer.writerow([i, format(float(v), ".6g")])
