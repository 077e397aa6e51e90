"""Low-dimensional similarity curve fit.

Maps the min_dist hyperparameter to the curve 1 / (1 + a * d^(2b)) by
nonlinear least squares against a target that is 1 up to min_dist and decays
exponentially past it.  Gauss-Newton with backtracking line search; no
library optimizer involved.
"""

from __future__ import annotations

import numpy as np

N_SAMPLES = 300
MAX_ITERS = 200
MAX_BACKTRACKS = 40
STEP_TOL = 1e-12


class ConvergenceError(RuntimeError):
    """Raised when the curve fit fails to converge."""


def target_curve(min_dist: float, spread: float, xs: np.ndarray) -> np.ndarray:
    ys = np.where(
        xs < min_dist, 1.0, np.exp(-(xs - min_dist) / spread)
    )
    return ys


def low_dim_similarity(d: np.ndarray, a: float, b: float) -> np.ndarray:
    """1 / (1 + a * d^(2b)); equals 1 exactly at d = 0."""
    d = np.asarray(d, dtype=np.float64)
    return 1.0 / (1.0 + a * np.power(d, 2.0 * b))


def fit_ab(min_dist: float, spread: float = 1.0) -> tuple[float, float]:
    """Fit (a, b) to the offset-exponential target for this min_dist.

    Samples the target at 300 points on [0, 3 * spread]; raises
    ConvergenceError if Gauss-Newton has not settled after 200 iterations.
    """
    if spread <= 0:
        raise ValueError("spread must be positive")
    if not (0.0 <= min_dist < 10.0 * spread):
        raise ValueError(f"min_dist {min_dist} outside [0, {10.0 * spread})")

    xs = np.linspace(0.0, 3.0 * spread, N_SAMPLES)
    ys = target_curve(min_dist, spread, xs)

    # Jacobian needs x > 0 for the d/db term; x = 0 contributes nothing anyway.
    pos = xs > 0.0
    x_pos = xs[pos]
    log_x = np.log(x_pos)

    a, b = 1.0, 1.0

    def residuals(a: float, b: float) -> np.ndarray:
        return low_dim_similarity(xs, a, b) - ys

    def sse(a: float, b: float) -> float:
        r = residuals(a, b)
        return float(r @ r)

    current = sse(a, b)
    for _ in range(MAX_ITERS):
        xp = np.power(x_pos, 2.0 * b)
        denom = (1.0 + a * xp) ** 2
        j_a = -xp / denom
        j_b = -2.0 * a * xp * log_x / denom
        jac = np.stack([j_a, j_b], axis=1)
        r = residuals(a, b)[pos]

        jtj = jac.T @ jac
        jtr = jac.T @ r
        try:
            step = np.linalg.solve(jtj + 1e-12 * np.eye(2), -jtr)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError("normal equations are singular") from exc

        scale = 1.0
        for _ in range(MAX_BACKTRACKS):
            na, nb = a + scale * step[0], b + scale * step[1]
            if na > 0.0 and nb > 0.0:
                trial = sse(na, nb)
                if trial < current:
                    break
            scale *= 0.5
        else:
            # No descent left in this direction: treat as converged.
            return float(a), float(b)

        a, b = na, nb
        if current - trial < STEP_TOL and np.abs(scale * step).max() < STEP_TOL:
            return float(a), float(b)
        current = trial

    raise ConvergenceError(f"no convergence after {MAX_ITERS} iterations")
