"""Rank statistics for Sim2Real comparisons."""

from __future__ import annotations

import warnings

import numpy as np
from scipy.stats import rankdata

from ..errors import LengthMismatch


class DegenerateVarianceWarning(UserWarning):
    """One input is constant; the correlation is defined as 0."""


def spearman(xs, ys) -> float:
    """Spearman rank correlation: Pearson correlation of mean ranks.

    Ties receive their mean rank.  Constant inputs have no rank ordering;
    the value is defined as 0 and a DegenerateVarianceWarning is issued.
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1:
        raise ValueError("inputs must be one-dimensional")
    if x.size != y.size:
        raise LengthMismatch(f"lengths differ: {x.size} vs {y.size}")
    if x.size < 2:
        raise LengthMismatch("need at least two samples")
    rx = rankdata(x)
    ry = rankdata(y)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    vx = float(dx @ dx)
    vy = float(dy @ dy)
    if vx == 0.0 or vy == 0.0:
        warnings.warn("constant input, returning 0", DegenerateVarianceWarning)
        return 0.0
    if np.unique(x).size == x.size and np.unique(y).size == y.size:
        # tie-free: the closed form is algebraically identical and exact
        # on integer rank differences
        d = rx - ry
        n = x.size
        return 1.0 - 6.0 * float(d @ d) / (n * (n * n - 1))
    return float((dx @ dy) / np.sqrt(vx * vy))
