"""Adaptive Dormand-Prince 5(4) integrator with continuous extension.

Small, dependency-free stepping loop for complex-valued systems of a handful
of components.  Steps are clipped so every requested output time is hit
exactly; the quartic continuous extension of each accepted step is kept for
queries between grid points.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from .errors import StepSizeUnderflow

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
]
_B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
# difference between the 5th- and 4th-order weights (FSAL stage included)
_E = np.array([-71 / 57600, 0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
# Shampine's dense-output polynomial coefficients, one row per stage
_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])


@dataclass
class DenseSolution:
    """Piecewise continuous extension over all accepted steps."""

    t_start: list = field(default_factory=list)
    t_end: list = field(default_factory=list)
    y_start: list = field(default_factory=list)
    q: list = field(default_factory=list)

    def __call__(self, t: float) -> np.ndarray:
        i = bisect_right(self.t_start, t) - 1
        i = min(max(i, 0), len(self.t_start) - 1)
        t0, t1 = self.t_start[i], self.t_end[i]
        h = t1 - t0
        x = (t - t0) / h
        powers = np.array([x, x**2, x**3, x**4])
        return self.y_start[i] + h * (self.q[i] @ powers)


def _error_norm(err, y, y_new, tol):
    scale = tol * (1.0 + np.maximum(np.abs(y), np.abs(y_new)))
    return float(np.max(np.abs(err) / scale))


def integrate(fun, t_eval, y0, tol, *, guard=None, h_max=np.inf):
    """Integrate ``y' = fun(t, y)`` from ``t_eval[0]`` and report at ``t_eval``.

    Args:
        fun: right-hand side, returns a complex array shaped like ``y``.
        t_eval: strictly increasing output times; the first is the start time.
        y0: initial state.
        tol: mixed absolute/relative local error tolerance per step.
        guard: optional ``guard(t, y)`` called after each accepted step; may
            raise to abort (used for blow-up detection).
        h_max: upper bound on the step size.

    Returns:
        ``(ys, dense)`` with ``ys[i]`` the state at ``t_eval[i]`` and ``dense``
        the continuous extension.
    """
    t_eval = np.asarray(t_eval, dtype=float)
    y = np.array(y0, dtype=complex)
    out = np.empty((len(t_eval), y.size), dtype=complex)
    out[0] = y
    dense = DenseSolution()
    if len(t_eval) == 1:
        return out, dense
    next_out = 1
    a, b = float(t_eval[0]), float(t_eval[-1])
    t = a
    f = fun(t, y)
    h = min(_initial_step(fun, t, y, f, tol, b - a), h_max)
    while t < b:
        target = float(t_eval[next_out])
        step = min(h, target - t)
        if target - t - step < 1e-3 * step:
            step = target - t
        while True:
            if step < 1e-14 * max(1.0, abs(t)):
                raise StepSizeUnderflow(f"step size underflow at t={t:.17g}", time=t)
            k = _stages(fun, t, y, f, step)
            y_new = y + step * (k[:6].T @ _B[:6])
            k[6] = fun(t + step, y_new)
            err = step * (k.T @ _E)
            en = _error_norm(err, y, y_new, tol)
            if en <= 1.0 and np.all(np.isfinite(y_new)):
                break
            step *= 0.2 if not np.isfinite(en) else max(0.2, 0.9 * en ** -0.25)
            h = step
        dense.t_start.append(t)
        dense.t_end.append(t + step)
        dense.y_start.append(y.copy())
        dense.q.append(k.T @ _P)
        landed = step == target - t
        t = target if landed else t + step
        y = y_new
        f = k[6]
        if guard is not None:
            guard(t, y)
        if landed:
            out[next_out] = y
            next_out += 1
        grow = 5.0 if en == 0 else min(5.0, 0.9 * en ** -0.2)
        # a step clipped onto a grid point says little about the natural size
        h = min(h_max, max(h, step * grow) if landed else step * grow)
    return out, dense


def _stages(fun, t, y, f, h):
    k = np.empty((7, y.size), dtype=complex)
    k[0] = f
    for s in range(1, 6):
        dy = h * (np.asarray(_A[s]) @ k[:s])
        k[s] = fun(t + _C[s] * h, y + dy)
    return k


def _initial_step(fun, t, y, f, tol, span):
    scale = tol * (1.0 + np.abs(y))
    d0 = float(np.max(np.abs(y) / scale))
    d1 = float(np.max(np.abs(f) / scale))
    if d0 < 1e-5 or d1 < 1e-5:
        h = 1e-6
    else:
        h = 0.01 * d0 / d1
    h = min(h, span, 0.1)
    y1 = y + h * f
    f1 = fun(t + h, y1)
    d2 = float(np.max(np.abs(f1 - f) / scale)) / h
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return max(min(100 * h, h1, span), 1e-12)
