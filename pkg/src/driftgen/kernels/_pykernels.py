"""Numpy fallback kernels; reference semantics for the compiled versions."""

from __future__ import annotations

import numpy as np


def predicate_mask(n, range_cols, lows, highs, eq_cols, eq_codes):
    """Conjunction of range and equality predicates over n rows.

    range_cols: (k_r, n) float64, NaN marks null (never satisfies a range).
    eq_cols: (k_e, n) int64 category codes, -1 marks null.
    """
    mask = np.ones(n, dtype=bool)
    for j in range(range_cols.shape[0]):
        v = range_cols[j]
        mask &= (v >= lows[j]) & (v <= highs[j])
    for j in range(eq_cols.shape[0]):
        mask &= eq_cols[j] == eq_codes[j]
    return mask


def predicate_count(n, range_cols, lows, highs, eq_cols, eq_codes):
    return int(predicate_mask(n, range_cols, lows, highs, eq_cols, eq_codes).sum())


def mixture_sample(points, idx, noise, bandwidth, lo, hi):
    """KDE mixture draw: chosen training point + scaled noise, clipped."""
    return np.clip(points[idx] + bandwidth * noise, lo, hi)
