"""Smoothed 1-norm loss and robust linear fitting shared by the solvers.

The outlier-tolerant objectives minimize sum(sqrt(r^2 + eps^2) - eps), a
smooth stand-in for the absolute residual sum with transition width eps
(1 ns in time units, well below the measurement noise).
"""

from __future__ import annotations

import numpy as np


def smooth_abs(r: np.ndarray, eps: float) -> np.ndarray:
    """sqrt(r^2 + eps^2) - eps, elementwise."""
    return np.hypot(r, eps) - eps


def smooth_abs_grad(r: np.ndarray, eps: float) -> np.ndarray:
    """d/dr of smooth_abs: r / sqrt(r^2 + eps^2)."""
    return r / np.hypot(r, eps)


def irls_linear_fit(
    design: np.ndarray,
    target: np.ndarray,
    eps: float,
    iters: int = 25,
    tol: float = 1e-12,
) -> np.ndarray:
    """Minimize sum(smooth_abs(target - design @ x, eps)) for a linear model.

    Iteratively reweighted least squares with weights 1/sqrt(r^2 + eps^2);
    each step solves a weighted lstsq. Converges for this convex objective.
    Returns the coefficient vector x.
    """
    x, *_ = np.linalg.lstsq(design, target, rcond=None)
    for _ in range(iters):
        r = target - design @ x
        w = 1.0 / np.sqrt(np.hypot(r, eps))
        xw, *_ = np.linalg.lstsq(design * w[:, None], target * w, rcond=None)
        if np.max(np.abs(xw - x)) < tol * max(1.0, np.max(np.abs(x))):
            x = xw
            break
        x = xw
    return x
