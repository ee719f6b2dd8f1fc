"""Arrival-time sequences for the four temporal patterns.

uniform: exact even spacing. periodic: fixed-size bursts at period starts,
burst members spread over the first 10% of the period. trend: inverse CDF
of a linearly changing rate. longtail: inverse CDF of exponential rate
decay. trend/longtail default to deterministic equi-probable quantiles;
sampled mode draws the quantiles from the seeded RNG instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .rng import substream

PATTERN_KINDS = ("uniform", "periodic", "trend", "longtail")


@dataclass
class TemporalPattern:
    kind: str
    window_seconds: float
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in PATTERN_KINDS:
            raise ValueError(f"unknown temporal pattern {self.kind!r}; expected one of {PATTERN_KINDS}")
        if self.window_seconds <= 0:
            raise ValueError("window_seconds must be > 0")
        if self.kind == "periodic":
            period = float(self.params.get("period_seconds", 0))
            burst = int(self.params.get("burst_size", 0))
            if not 0 < period <= self.window_seconds:
                raise ValueError("periodic needs 0 < period_seconds <= window_seconds")
            if burst < 1:
                raise ValueError("periodic needs burst_size >= 1")
        if self.kind == "trend":
            start = float(self.params.get("start_rate", 0.0))
            end = float(self.params.get("end_rate", 0.0))
            if start < 0 or end < 0 or (start == 0 and end == 0):
                raise ValueError("trend rates must be >= 0 and not both 0")
        if self.kind == "longtail":
            if float(self.params.get("decay_rate", 0.0)) <= 0:
                raise ValueError("longtail needs decay_rate > 0")

    @classmethod
    def from_dict(cls, d: dict) -> "TemporalPattern":
        params = {k: v for k, v in d.items() if k not in ("kind", "window_seconds")}
        params.update(d.get("params", {}))
        params.pop("params", None)
        return cls(kind=d["kind"], window_seconds=float(d["window_seconds"]), params=params)


def default_trend_rates(n: int, window: float) -> tuple[float, float]:
    """start 0, end 2n/window: integrates to n over the window."""
    return 0.0, 2.0 * n / window


def default_longtail_decay(window: float) -> float:
    """decay * window = 8: front-loads arrivals like the reference shape."""
    return 8.0 / window


def _quantiles(n: int, mode: str, rng) -> np.ndarray:
    if mode == "sampled":
        return np.sort(rng.uniform(0.0, 1.0, size=n))
    return (np.arange(n) + 0.5) / n


def gen_timestamps(pattern: TemporalPattern, n: int, seed: int = 0, mode: str = "quantile") -> np.ndarray:
    """n arrival offsets in [0, window], sorted ascending.

    mode="quantile" (default) is fully deterministic; mode="sampled" draws
    arrival quantiles from the seeded RNG.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if mode not in ("quantile", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    if n == 0:
        return np.empty(0, dtype=np.float64)
    window = pattern.window_seconds
    rng = substream(seed, "timestamps", pattern.kind)

    if pattern.kind == "uniform":
        out = np.arange(n, dtype=np.float64) * (window / n)

    elif pattern.kind == "periodic":
        period = float(pattern.params["period_seconds"])
        burst = int(pattern.params["burst_size"])
        bursts = math.ceil(n / burst)
        if (bursts - 1) * period >= window:
            raise ValueError(
                f"{bursts} bursts of {burst} do not fit in window {window} with period {period}"
            )
        spread = 0.1 * period / burst  # bursts occupy the first 10% of each period
        idx = np.arange(n)
        out = (idx // burst) * period + (idx % burst) * spread

    elif pattern.kind == "trend":
        start = float(pattern.params.get("start_rate", 0.0))
        end = float(pattern.params.get("end_rate", 0.0))
        q = _quantiles(n, mode, rng)
        # rate r(t) = start + (end-start) t / window; CDF is quadratic in t
        a = (end - start) / (2 * window)
        total = (start + end) / 2 * window
        if a == 0.0:
            out = q * total / start
        else:
            out = (-start + np.sqrt(start * start + 4 * a * q * total)) / (2 * a)

    else:  # longtail
        decay = float(pattern.params["decay_rate"])
        q = _quantiles(n, mode, rng)
        # rate r(t) ~ exp(-decay t); CDF (1 - e^(-decay t)) / (1 - e^(-decay W))
        out = -np.log1p(-q * (1 - math.exp(-decay * window))) / decay

    return np.minimum(np.maximum(out, 0.0), window)


def attach(instances, offsets, base_epoch: float = 0.0) -> list:
    """Pair instance i with base_epoch + offsets[i]; order is preserved
    (offsets sorted, instances in generation order)."""
    if len(instances) != len(offsets):
        raise ValueError(f"{len(instances)} instances vs {len(offsets)} timestamps")
    return [replace(q, timestamp=base_epoch + float(t)) for q, t in zip(instances, offsets)]
