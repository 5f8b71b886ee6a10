"""Brute-force reference propagation of the Lindblad master equation.

The right-hand side is the textbook Lindblad form::

    d rho/dt = -i [H, rho] + sum_j k_j (2 A_j rho A_j^+ - A_j^+ A_j rho - rho A_j^+ A_j)

built from Hilbert-space operators (spin or truncated ladder matrices) and
integrated with scipy's DOP853.  Nothing here touches the generator algebra,
the Riccati solver or the coherent-state code, so agreement with those paths
is a genuine cross-check.
"""

from __future__ import annotations

import csv
import functools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import _poles
from .core import AlgebraKind, annihilation, number_op, sigma_minus, sigma_plus, sigma_z
from .errors import DimensionMismatch, LCSError, StepSizeUnderflow, TruncationLeak
from .errors import UnphysicalState

__all__ = [
    "Trajectory",
    "lindblad_form",
    "integrate",
    "observables",
    "trace_distance",
    "min_eigenvalue",
]

log = logging.getLogger(__name__)

MAX_LEAK = 1e-6
# states that pass near zero at a rate pole (down to ~gap) are re-amplified
# afterwards, so the absolute tolerance sits below the relative one
ATOL_FACTOR = 1e-6


def observables(rho) -> tuple[complex, float, float]:
    """Trace, purity ``Tr rho^2`` and von Neumann entropy of a density matrix.

    Eigenvalues in ``[-1e-10, 0)`` are clamped to zero before the entropy sum.

    Raises:
        UnphysicalState: ``rho`` is not Hermitian within 1e-8 or has an
            eigenvalue below -1e-10.
    """
    rho = np.asarray(rho, dtype=complex)
    if np.max(np.abs(rho - rho.conj().T), initial=0.0) > 1e-8:
        raise UnphysicalState("density matrix is not Hermitian")
    trace = complex(np.trace(rho))
    purity = float(np.real(np.vdot(rho.conj().T, rho)))
    evals = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    if evals.min() < -1e-10:
        raise UnphysicalState(f"negative eigenvalue {evals.min():.3e}")
    p = evals[evals > 0]
    entropy = float(-np.sum(p * np.log(p)))
    return trace, purity, entropy


def trace_distance(a, b) -> float:
    """Half the trace norm of ``a - b`` (sum of singular values)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    return 0.5 * float(np.sum(np.linalg.svd(a - b, compute_uv=False)))


def min_eigenvalue(rho) -> float:
    rho = np.asarray(rho)
    return float(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min())


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    leak: np.ndarray
    hermiticity_defect: np.ndarray = field(default=None)
    hermitian: bool = True

    def __post_init__(self):
        if self.hermiticity_defect is None:
            self.hermiticity_defect = np.array(
                [np.max(np.abs(s - s.conj().T)) for s in self.states])

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def purities(self) -> np.ndarray:
        return np.array([np.real(np.vdot(s.conj().T, s)) for s in self.states])

    def traces(self) -> np.ndarray:
        return np.array([np.trace(s) for s in self.states])

    def invariant_report(self) -> dict:
        """Worst-case values of the physical invariants along the trajectory."""
        purity = self.purities()
        return {
            "trace_error": float(np.max(np.abs(self.traces() - 1))),
            "min_eigenvalue": float(min(min_eigenvalue(s) for s in self.states)),
            "purity_min": float(purity.min()),
            "purity_max": float(purity.max()),
            "hermiticity_defect": float(np.max(self.hermiticity_defect)),
            "max_leak": float(np.max(self.leak)),
        }

    def to_csv(self, stream, dump_states: bool = False) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        d = self.dim
        header = ["time", "purity", "entropy", "trace_re", "leak"]
        if dump_states:
            for m in range(d):
                for n in range(d):
                    header += [f"rho_{m}_{n}_re", f"rho_{m}_{n}_im"]
        writer.writerow(header)
        for t, s, lk in zip(self.times, self.states, self.leak):
            try:
                tr, pur, ent = observables(s)
            except UnphysicalState:
                tr, pur, ent = complex(np.trace(s)), float(np.real(np.vdot(s.conj().T, s))), math.nan
            row = [f"{x:.17g}" for x in (t, pur, ent, tr.real, lk)]
            if dump_states:
                for z in s.reshape(-1):
                    row += [f"{z.real:.17g}", f"{z.imag:.17g}"]
            writer.writerow(row)


# -- Lindblad form of a rate bundle -----------------------------------------


@functools.lru_cache(maxsize=16)
def _operators(kind: AlgebraKind, d: int):
    """Unit Hamiltonian, lowering and raising operators (dense, read-only)."""
    if kind is AlgebraKind.SU2:
        ops = (0.5 * sigma_z(), sigma_minus(), sigma_plus())
    else:
        a = annihilation(d)
        ops = (number_op(d), a, a.conj().T.copy())
    for m in ops:
        m.flags.writeable = False
    return ops


class _Band:
    """Matrix with a single nonzero diagonal, applied by slicing."""

    def __init__(self, m: np.ndarray):
        rows, cols = np.nonzero(m)
        offsets = set((cols - rows).tolist()) or {0}
        if len(offsets) != 1:
            raise ValueError("operator has more than one nonzero diagonal")
        self.offset = offsets.pop()
        self.values = np.diagonal(m, self.offset).astype(complex)

    def left(self, x: np.ndarray) -> np.ndarray:
        """``M @ x``."""
        k, out = self.offset, np.zeros_like(x)
        if k >= 0:
            out[: len(x) - k] = self.values[:, None] * x[k:]
        else:
            out[-k:] = self.values[:, None] * x[: len(x) + k]
        return out


@functools.lru_cache(maxsize=16)
def _band_operators(kind: AlgebraKind, d: int):
    h, lower, upper = _operators(kind, d)
    return (np.diag(h).astype(complex), _Band(lower), _Band(upper),
            np.diag(lower.conj().T @ lower).real, np.diag(upper.conj().T @ upper).real)


def lindblad_form(kind: AlgebraKind, rates, d: int, t: float):
    """Hamiltonian and weighted jump operators equivalent to ``rates`` at ``t``.

    The coefficient of ``A rho A^+`` in the generator is ``2 k``, so the
    jump weights are half the raising/lowering rates.

    Returns:
        ``(H, [(k, A), ...])``.
    """
    gp, gm, _, _, om = rates.values(t)
    h, lower, upper = _operators(kind, d)
    return om * h, [(gm / 2, lower), (gp / 2, upper)]


def _check_lindblad_consistency(kind, rates, times):
    """The L0 and identity coefficients must be the ones the jumps imply."""
    for t in times:
        try:
            gp, gm, gz, c, _ = rates.values(t)
        except LCSError:
            continue
        if kind is AlgebraKind.SU2:
            want_z, want_c = gp - gm, -(gp + gm) / 2
        else:
            want_z, want_c = -(gp + gm), (gm - gp) / 2
        scale = 1.0 + abs(gp) + abs(gm)
        if abs(gz - want_z) > 1e-9 * scale or abs(c - want_c) > 1e-9 * scale:
            raise ValueError(
                f"rates at t={t} are not of Lindblad form: gamma_z={gz}, scalar={c}"
                f" (expected {want_z}, {want_c})")


def _rhs(kind, rates, d, leak_on):
    size = d * d
    h, lower, upper, n_lower, n_upper = _band_operators(kind, d)

    def rhs(t, y):
        rho = y[:size].reshape(d, d)
        gp, gm, _, _, om = rates.values(t)
        k_minus, k_plus = gm / 2, gp / 2
        # H and A^+ A are diagonal in both models:
        # -i [H, rho] - sum k {A^+ A, rho} = -i (Heff rho - rho Heff^*)
        heff = om * h - 1j * (k_minus * n_lower + k_plus * n_upper)
        drho = -1j * (heff[:, None] * rho - rho * heff.conj()[None, :])
        for k, a in ((k_minus, lower), (k_plus, upper)):
            if k == 0:
                continue
            # A rho A^+ = (A (A rho)^+)^+
            drho = drho + 2 * k * a.left(a.left(rho).conj().T).conj().T
        out = np.zeros_like(y)
        out[:size] = drho.reshape(-1)
        if leak_on:
            # flux a^+ would push out of the top level: 2 k_+ N p_{N-1}
            out[size] = gp * d * abs(rho[d - 1, d - 1])
        return out

    return rhs


def integrate(kind, rates, rho0, t_end: float, tol: float = 1e-10, n_out: int = 101,
              *, times=None, max_leak: float = MAX_LEAK) -> Trajectory:
    """Propagate ``rho0`` under the Lindblad equation defined by ``rates``.

    ``rho0`` may be any operator (the propagator is linear).  Hermitian inputs
    give Hermitian outputs, re-symmetrized at each output point with the
    removed defect recorded; non-Hermitian inputs are propagated as-is.

    Args:
        kind: algebra of the model (selects spin or oscillator operators).
        rates: model rates; must be of Lindblad form.
        rho0: initial operator; its dimension sets the truncation for su(1,1).
        t_end: final time.
        tol: relative and absolute tolerance handed to DOP853.
        n_out: number of equispaced output points (ignored if ``times`` given).
        max_leak: raise if the probability pushed past the Fock cutoff
            exceeds this.

    Raises:
        TruncationLeak: leakage above ``max_leak`` (su(1,1) only).
        StepSizeUnderflow: the integrator failed.
    """
    kind = AlgebraKind.parse(kind)
    rho0 = np.array(rho0, dtype=complex)
    d = rho0.shape[0]
    if rho0.shape != (d, d):
        raise DimensionMismatch(f"rho0 must be square, got {rho0.shape}")
    if kind is AlgebraKind.SU2 and d != 2:
        raise DimensionMismatch("su(2) model lives on 2x2 density matrices")
    if not tol > 0 or not t_end > 0:
        raise ValueError("t_end and tol must be positive")
    if times is None:
        times = np.linspace(0.0, t_end, n_out)
    times = np.asarray(times, dtype=float)
    t_end = float(times[-1])
    _check_lindblad_consistency(kind, rates, np.linspace(0.0, t_end, 7) + 1e-3)

    hermitian = bool(np.max(np.abs(rho0 - rho0.conj().T)) <= 1e-12)
    leak_on = kind is AlgebraKind.SU11
    y = np.concatenate([rho0.reshape(-1), [0.0]]).astype(complex)
    rhs = _rhs(kind, rates, d, leak_on)
    poles = list(rates.poles(0.0, t_end))

    def solve(g, u_eval, y_start, piece):
        sol = solve_ivp(g, (u_eval[0], u_eval[-1]), y_start, method="DOP853", rtol=tol,
                        atol=tol * ATOL_FACTOR, t_eval=u_eval)
        if sol.status != 0:
            raise StepSizeUnderflow(f"reference integrator failed: {sol.message}",
                                    time=float(piece.t(sol.t[-1])) if len(sol.t) else piece.t0)
        return sol.y.T, None

    ys, _ = _poles.drive(solve, rhs, times, y, poles)

    states = ys[:, : d * d].reshape(-1, d, d)
    leak = ys[:, d * d].real.copy() if leak_on else np.zeros(len(times))
    defect = np.array([np.max(np.abs(s - s.conj().T)) for s in states])
    if hermitian:
        states = (states + np.conj(np.transpose(states, (0, 2, 1)))) / 2
        worst = float(defect.max())
        if worst > 1e-10:
            log.warning("re-symmetrized oracle states, max Hermiticity defect %.3e", worst)
        else:
            log.debug("re-symmetrized oracle states, max Hermiticity defect %.3e", worst)
    if leak_on and leak.max() > max_leak:
        raise TruncationLeak(
            f"probability {leak.max():.3e} leaked past Fock level {d - 1};"
            " increase the truncation")
    return Trajectory(times, states, leak, defect, hermitian)
