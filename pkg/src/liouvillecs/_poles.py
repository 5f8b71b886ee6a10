"""Time-axis plans for integrating through simple poles of the rates.

Near a simple pole ``p`` of the generator the solution behaves like a power
of ``|t - p|``.  Stepping in ``t`` there needs thousands of steps and loses
accuracy; in logarithmic time ``u = -log(p - t)`` (left) or
``u = log(t - p)`` (right) the equation ``dy/du = (dt/du) f(t, y)`` has a
bounded, slowly varying right-hand side.  The remaining window
``[p - gap, p + gap]`` is crossed with the symmetric two-point rule
``y += gap * (f(p - gap, y) + f(p + gap, y))``, in which the odd singular
part of the generator cancels exactly (principal-value continuation).

The driver only changes coordinates; the caller supplies the integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# the crossing rule is exact for the odd singular part and first order in the
# regular part (error ~ gap^2); rates are evaluated at p -+ eps rounded to
# ulp(p), so eps cannot go much lower without rate noise above the tolerance
GAP = 1e-6
ZONE = 0.5


@dataclass(frozen=True)
class Piece:
    kind: str  # "lin", "left", "right" or "gap"
    t0: float
    t1: float
    pole: float = math.nan

    def u(self, t):
        if self.kind == "left":
            return -np.log(self.pole - t)
        if self.kind == "right":
            return np.log(t - self.pole)
        return t

    def t(self, u):
        if self.kind == "left":
            return self.pole - math.exp(-u)
        if self.kind == "right":
            return self.pole + math.exp(u)
        return u

    def jacobian(self, u):
        if self.kind == "left":
            return math.exp(-u)
        if self.kind == "right":
            return math.exp(u)
        return 1.0


def plan(t0: float, t1: float, poles, gap: float = GAP, zone: float = ZONE) -> list[Piece]:
    """Split ``[t0, t1]`` into linear, logarithmic and gap pieces."""
    poles = sorted(p for p in poles if t0 < p + gap and p - gap < t1)
    pieces: list[Piece] = []
    a = t0
    for i, p in enumerate(poles):
        g = gap * max(1.0, abs(p))
        right_limit = poles[i + 1] if i + 1 < len(poles) else math.inf
        z_left = min(zone, (p - a) if i == 0 else (p - poles[i - 1]) / 2)
        z_right = min(zone, (right_limit - p) / 2)
        lo, hi = p - g, p + g
        if lo > a:
            start = max(a, p - z_left)
            if start > a:
                pieces.append(Piece("lin", a, start))
            pieces.append(Piece("left", start, lo, p))
        if hi > t1:
            pieces.append(Piece("gap", lo, t1, p))
            return pieces
        pieces.append(Piece("gap", max(lo, a), hi, p))
        end = min(t1, p + z_right)
        if end > hi:
            pieces.append(Piece("right", hi, end, p))
        a = max(end, hi)
    if a < t1:
        pieces.append(Piece("lin", a, t1))
    return pieces


def drive(solve, fun, t_eval, y0, poles, *, gap: float = GAP):
    """Integrate ``y' = fun(t, y)`` piecewise according to :func:`plan`.

    Args:
        solve: ``solve(g, u_eval, y0, piece) -> (ys, extra)`` integrating
            ``dy/du = g(u, y)`` over the increasing grid ``u_eval`` (its
            first entry is the start) and returning states at ``u_eval``
            plus anything the caller wants kept per piece (e.g. a
            continuous extension in ``u``).
        fun: right-hand side in physical time.
        t_eval: increasing output times, ``t_eval[0]`` is the start.
        y0: initial state.
        poles: pole locations.

    Returns:
        ``(ys, record)``: states at ``t_eval`` and a :class:`PiecewiseRecord`.
    """
    t_eval = np.asarray(t_eval, dtype=float)
    y = np.array(y0, dtype=complex)
    out = np.empty((len(t_eval), y.size), dtype=complex)
    out[0] = y
    filled = 1
    record = PiecewiseRecord()
    for piece in plan(float(t_eval[0]), float(t_eval[-1]), poles, gap):
        if piece.kind == "gap":
            g = piece.pole - piece.t0
            record.pieces.append((piece, y.copy()))
            if piece.t1 >= piece.pole + g:
                y = y + g * (fun(piece.pole - g, y) + fun(piece.pole + g, y))
            while filled < len(t_eval) and t_eval[filled] <= piece.t1:
                out[filled] = y
                filled += 1
            continue
        inside = []
        while filled + len(inside) < len(t_eval) and t_eval[filled + len(inside)] <= piece.t1:
            inside.append(t_eval[filled + len(inside)])
        u_eval = [piece.u(piece.t0)] + [piece.u(t) for t in inside]
        u_end = piece.u(piece.t1)
        if not inside or inside[-1] < piece.t1:
            u_eval.append(u_end)
        u_eval = np.maximum.accumulate(np.asarray(u_eval, dtype=float))
        # drop duplicates created by rounding in the log map
        keep = np.concatenate([[True], np.diff(u_eval) > 0])

        def g(u, yy, piece=piece):
            return piece.jacobian(u) * fun(piece.t(u), yy)

        ys_unique, extra = solve(g, u_eval[keep], y, piece)
        record.pieces.append((piece, extra))
        ys = ys_unique[np.cumsum(keep) - 1]
        for k in range(len(inside)):
            out[filled + k] = ys[k + 1]
        filled += len(inside)
        y = ys[-1]
    while filled < len(t_eval):
        out[filled] = y
        filled += 1
    return out, record


class PiecewiseRecord:
    """Per-piece extras from :func:`drive`, queried in physical time.

    For gap pieces the extra is the state entering the window; for the other
    pieces it must be callable on the piece's own coordinate ``u``.
    """

    def __init__(self):
        self.pieces: list = []

    def __call__(self, t: float) -> np.ndarray:
        for piece, extra in self.pieces:
            if piece.t0 <= t <= piece.t1:
                if piece.kind == "gap":
                    return np.array(extra)
                return extra(piece.u(t))
        raise ValueError(f"t={t} is outside the integrated range")
