"""Small fitting helpers shared by the dynamics/chain checks and the CLI."""

from __future__ import annotations

import numpy as np

__all__ = ["fit_loglog_slope", "fit_decay_rate"]


def fit_loglog_slope(x, y) -> float:
    """Least-squares slope of log y against log x (scaling-exponent fits)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or x.size != y.size:
        raise ValueError("need matching arrays with at least 2 points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs strictly positive data")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def fit_decay_rate(t, amplitude) -> float:
    """Decay rate lambda from amplitude ~ exp(-lambda t) by a log-linear fit."""
    t = np.asarray(t, dtype=float)
    a = np.asarray(amplitude, dtype=float)
    if t.size < 2 or t.size != a.size:
        raise ValueError("need matching arrays with at least 2 points")
    if np.any(a <= 0):
        raise ValueError("decay fit needs strictly positive amplitudes")
    return float(-np.polyfit(t, np.log(a), 1)[0])
