"""Synthetic dataset generators for self-contained experiments.

Three families: the chaotic logistic map, the delay differential
equation of Mackey and Glass, and a two-regime threshold autoregression
used as a ground-truth oracle in split-recovery tests. All randomness
flows through the package's counter-based generator with one sub-stream
per series, so a config fully determines the output bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Series, SeriesCollection
from .errors import DivergedSeries
from .rng import Rng

DIVERGENCE_LIMIT = 1e6


@dataclass(frozen=True)
class ChaoticLogisticConfig:
    n_series: int = 100
    length: int = 600
    seed: int = 1
    r: float = 4.0
    noise_sd: float = 0.02

    def __post_init__(self):
        if not 0.0 < self.r <= 4.0:
            raise ValueError("logistic parameter r must lie in (0, 4]")
        if self.length < 2:
            raise ValueError("length must be >= 2")


@dataclass(frozen=True)
class MackeyGlassConfig:
    n_series: int = 100
    length: int = 600
    seed: int = 1
    beta: float = 0.2
    gamma: float = 0.1
    n_exp: float = 10.0
    tau: float = 17.0
    dt: float = 1.0
    warmup: int = 500

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.tau < self.dt:
            raise ValueError("delay tau must be at least one step dt")
        if self.length < 2:
            raise ValueError("length must be >= 2")


@dataclass(frozen=True)
class Setar2Config:
    """Two-regime threshold autoregression switching on one lagged value.

    Each regime is (intercept, coefficients for lags 1..k). Rows whose
    lag-``threshold_lag`` value is strictly below the threshold follow
    ``regime_low``, the rest follow ``regime_high``. The initial window
    is drawn uniformly from ``init_range`` and the first ``burn_in``
    recurrence values are discarded; the emitted series has exactly
    ``length`` values.
    """

    n_series: int = 8
    length: int = 500
    seed: int = 1
    regime_low: tuple = (0.15, (0.8,))
    regime_high: tuple = (0.75, (-0.4,))
    threshold_lag: int = 1
    threshold: float = 0.5
    noise_sd: float = 0.05
    burn_in: int = 100
    init_range: tuple = (0.0, 1.0)

    def __post_init__(self):
        if self.threshold_lag < 1:
            raise ValueError("threshold lag must be >= 1")
        if len(self.regime_low[1]) != len(self.regime_high[1]):
            raise ValueError("both regimes must use the same number of lags")
        if self.length < 2:
            raise ValueError("length must be >= 2")


def _series_id(i: int) -> str:
    return f"T{i + 1}"


def gen_chaotic_logistic(config: ChaoticLogisticConfig) -> SeriesCollection:
    """Iterate x <- r x (1 - x) from a random start in (0, 1).

    Starts avoid 0.5 exactly, whose orbit collapses to zero under r = 4.
    Optional additive noise is clipped back into (0, 1).
    """
    out = []
    for i in range(config.n_series):
        rng = Rng(config.seed).substream(i)
        x = rng.uniform_open()
        if abs(x - 0.5) < 1e-9:
            x += 1e-6
        noise = rng.gauss_block(config.length) if config.noise_sd > 0 else None
        values = np.empty(config.length)
        values[0] = x
        for t in range(1, config.length):
            x = config.r * x * (1.0 - x)
            if noise is not None:
                x = min(max(x + config.noise_sd * noise[t], 1e-9), 1.0 - 1e-9)
            values[t] = x
        out.append(Series(id=_series_id(i), values=values))
    return SeriesCollection(series=tuple(out))


def _mg_derivative(x: float, x_delayed: float, config: MackeyGlassConfig) -> float:
    return config.beta * x_delayed / (1.0 + x_delayed**config.n_exp) - config.gamma * x


def gen_mackey_glass(config: MackeyGlassConfig) -> SeriesCollection:
    """Integrate dx/dt = beta x_tau / (1 + x_tau^n) - gamma x.

    Classic fourth-order fixed-step scheme; the delayed value at the
    half substep is interpolated by a cubic Hermite through the stored
    grid values and derivatives, which keeps the delay term at the
    integrator's order. History before t=0 is constant at the per-series
    start value (derivative zero there). The first ``warmup`` grid steps
    are discarded; samples are emitted every 1/dt-th grid step so the
    output is spaced one time unit apart regardless of dt.
    """
    m = int(round(config.tau / config.dt))
    if abs(m * config.dt - config.tau) > 1e-9 * max(config.tau, 1.0):
        raise ValueError("tau must be an integer multiple of dt")
    per_unit = int(round(1.0 / config.dt))
    if abs(per_unit * config.dt - 1.0) > 1e-12:
        raise ValueError("dt must divide 1 so samples land on integer times")
    dt = config.dt
    total = (config.warmup + config.length) * per_unit
    out = []
    for i in range(config.n_series):
        rng = Rng(config.seed).substream(i)
        x0 = 0.5 + rng.uniform()  # start in [0.5, 1.5)
        xs = np.empty(total + 1)
        fs = np.empty(total + 1)
        xs[0] = x0
        fs[0] = _mg_derivative(x0, x0, config)

        def grid_x(j):
            return xs[j] if j >= 0 else x0

        def grid_f(j):
            return fs[j] if j >= 0 else 0.0

        for step in range(total):
            x = xs[step]
            j = step - m
            d0 = grid_x(j)
            d1 = grid_x(j + 1)
            if j < 0:
                d_half = x0  # interval still inside the constant history
            else:
                d_half = 0.5 * (xs[j] + xs[j + 1]) + dt * (fs[j] - fs[j + 1]) / 8.0
            k1 = _mg_derivative(x, d0, config)
            k2 = _mg_derivative(x + 0.5 * dt * k1, d_half, config)
            k3 = _mg_derivative(x + 0.5 * dt * k2, d_half, config)
            k4 = _mg_derivative(x + dt * k3, d1, config)
            x_next = x + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
            if not math.isfinite(x_next) or abs(x_next) > DIVERGENCE_LIMIT:
                raise DivergedSeries(_series_id(i), abs(x_next))
            xs[step + 1] = x_next
            fs[step + 1] = _mg_derivative(x_next, grid_x(step + 1 - m), config)
        samples = xs[config.warmup * per_unit + per_unit :: per_unit][: config.length]
        out.append(Series(id=_series_id(i), values=samples.copy()))
    return SeriesCollection(series=tuple(out))


def gen_setar2(config: Setar2Config) -> SeriesCollection:
    """Simulate the two-regime threshold recurrence forward."""
    k = len(config.regime_low[1])
    lo, hi = config.init_range
    window = max(k, config.threshold_lag)
    total = config.burn_in + config.length
    out = []
    for i in range(config.n_series):
        rng = Rng(config.seed).substream(i)
        values = np.empty(window + total)
        for j in range(window):
            values[j] = lo + (hi - lo) * rng.uniform()
        noise = rng.gauss_block(total) if config.noise_sd > 0 else None
        for t in range(window, window + total):
            if values[t - config.threshold_lag] < config.threshold:
                intercept, coefs = config.regime_low
            else:
                intercept, coefs = config.regime_high
            acc = intercept
            for j in range(k):
                acc += coefs[j] * values[t - 1 - j]
            if noise is not None:
                acc += config.noise_sd * noise[t - window]
            if not math.isfinite(acc) or abs(acc) > DIVERGENCE_LIMIT:
                raise DivergedSeries(_series_id(i), abs(acc))
            values[t] = acc
        out.append(Series(id=_series_id(i), values=values[window + config.burn_in :].copy()))
    return SeriesCollection(series=tuple(out))


def generate(config) -> SeriesCollection:
    """Dispatch over the three generator config types."""
    if isinstance(config, ChaoticLogisticConfig):
        return gen_chaotic_logistic(config)
    if isinstance(config, MackeyGlassConfig):
        return gen_mackey_glass(config)
    if isinstance(config, Setar2Config):
        return gen_setar2(config)
    raise TypeError(f"unknown generator config {type(config).__name__}")
