"""Disentangling coefficients of the factored Lindblad propagator.

For a generator ``L(t) = g+(t) L+ + gz(t) L0 + g-(t) L- - i Omega(t) R + c(t)``
built from one of the two algebras in :mod:`liouvillecs.core`, the
time-ordered exponential factors as::

    U(t) = exp(f+ L+) exp(fz L0) exp(f- L-) exp(u1 R) exp(w)

with::

    f+' = g+ + gz f+ + sigma g- f+^2
    fz' = gz + 2 sigma g- f+
    f-' = g- exp(fz)
    u1' = -i Omega
    w'  = c

and all coefficients zero at t = 0.  ``exp(fz)`` is exposed as ``f0_exp``.
"""

from __future__ import annotations

import cmath
import csv
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _dopri, _poles
from .core import AlgebraKind, Generator, apply_to_operator, devectorize, liouville_dim
from .core import r_eigenvalues, zero_eigenvalues
from .errors import ParameterSingularity, PropagatorBlowUp

__all__ = [
    "RateFunctions",
    "Coefficients",
    "DisentangleCoefficients",
    "solve_const",
    "const_coefficients",
    "solve_ode",
    "apply_propagator",
    "propagate",
    "BLOWUP_LIMIT",
]

BLOWUP_LIMIT = 1e12
DEFAULT_TOL = 1e-10


def _no_poles(t0: float, t1: float) -> Sequence[float]:
    return ()


def _const(value: float) -> Callable[[float], float]:
    return lambda t: value


@dataclass(frozen=True)
class RateFunctions:
    """Time-dependent coefficients of a generator in the algebra span.

    ``gamma_plus``, ``gamma_minus`` and ``gamma_z`` multiply L+, L- and L0;
    ``scalar`` multiplies the identity and ``omega`` multiplies ``-i R``.
    ``poles(t0, t1)`` lists real times in ``[t0, t1]`` where the rates have
    simple poles; integrators step across them by principal value.
    """

    gamma_plus: Callable[[float], float]
    gamma_minus: Callable[[float], float]
    gamma_z: Callable[[float], float]
    scalar: Callable[[float], float]
    omega: Callable[[float], float]
    sigma: int
    poles: Callable[[float, float], Sequence[float]] = field(default=_no_poles)

    def __post_init__(self):
        if self.sigma not in (-1, 1):
            raise ValueError(f"sigma must be +1 or -1, got {self.sigma}")

    @classmethod
    def constant(cls, gamma_plus=0.0, gamma_minus=0.0, gamma_z=0.0, scalar=0.0,
                 omega=0.0, *, sigma) -> "RateFunctions":
        return cls(_const(gamma_plus), _const(gamma_minus), _const(gamma_z),
                   _const(scalar), _const(omega), sigma)

    @classmethod
    def for_kind(cls, kind: AlgebraKind, **rates) -> "RateFunctions":
        return cls.constant(sigma=AlgebraKind.parse(kind).sigma, **rates)

    def values(self, t: float) -> tuple[float, float, float, float, float]:
        """``(gamma_plus, gamma_minus, gamma_z, scalar, omega)`` at time ``t``."""
        return (self.gamma_plus(t), self.gamma_minus(t), self.gamma_z(t),
                self.scalar(t), self.omega(t))

    def shifted(self, dt: float) -> "RateFunctions":
        """Rates seen by a clock started at ``dt``: ``t -> t + dt``."""
        return RateFunctions(
            lambda t: self.gamma_plus(t + dt),
            lambda t: self.gamma_minus(t + dt),
            lambda t: self.gamma_z(t + dt),
            lambda t: self.scalar(t + dt),
            lambda t: self.omega(t + dt),
            self.sigma,
            lambda a, b: [p - dt for p in self.poles(a + dt, b + dt)],
        )


@dataclass(frozen=True)
class Coefficients:
    """Disentangling coefficients at a single time."""

    f_plus: complex = 0j
    f_z: complex = 0j
    f_minus: complex = 0j
    u1_phase: complex = 0j
    scalar_weight: complex = 0j

    @property
    def f0_exp(self) -> complex:
        return cmath.exp(self.f_z)

    def is_finite(self) -> bool:
        return all(cmath.isfinite(complex(x)) for x in
                   (self.f_plus, self.f_z, self.f_minus, self.u1_phase, self.scalar_weight))


_CSV_FIELDS = ("f_plus", "f_z", "f_minus", "u1_phase", "scalar_weight")


@dataclass(frozen=True)
class DisentangleCoefficients:
    """Coefficient trajectories on a time grid, plus a continuous extension."""

    times: np.ndarray
    f_plus: np.ndarray
    f_z: np.ndarray
    f_minus: np.ndarray
    u1_phase: np.ndarray
    scalar_weight: np.ndarray
    sigma: int
    dense: object = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.times)

    def __getitem__(self, i: int) -> Coefficients:
        return Coefficients(*(complex(getattr(self, name)[i]) for name in _CSV_FIELDS))

    @property
    def f0_exp(self) -> np.ndarray:
        return np.exp(self.f_z)

    def at(self, t: float) -> Coefficients:
        """Coefficients at an arbitrary time inside the integrated range."""
        hit = np.flatnonzero(self.times == t)
        if hit.size:
            return self[int(hit[0])]
        if self.dense is None or not self.times[0] <= t <= self.times[-1]:
            raise ValueError(f"t={t} is outside the solved range")
        return Coefficients(*(complex(x) for x in self.dense(t)))

    def to_csv(self, stream) -> None:
        """Write ``time`` plus real/imaginary columns of every coefficient."""
        writer = csv.writer(stream, lineterminator="\n")
        header = ["time"]
        for name in _CSV_FIELDS:
            header += [f"{name}_re", f"{name}_im"]
        writer.writerow(header)
        for i, t in enumerate(self.times):
            row = [f"{t:.17g}"]
            for name in _CSV_FIELDS:
                z = complex(getattr(self, name)[i])
                row += [f"{z.real:.17g}", f"{z.imag:.17g}"]
            writer.writerow(row)


# -- constant rates: closed form ---------------------------------------------


def _cosh_sinhc(x2: complex) -> tuple[complex, complex]:
    """cosh(x) and sinh(x)/x as functions of x**2 (both even in x)."""
    if abs(x2) < 1e-4:
        # Taylor series; 6 terms are exact to double precision here
        c = s = 0j
        term_c, term_s = 1 + 0j, 1 + 0j
        for k in range(1, 8):
            c += term_c
            s += term_s
            term_c *= x2 / ((2 * k - 1) * (2 * k))
            term_s *= x2 / ((2 * k) * (2 * k + 1))
        return c, s
    x = cmath.sqrt(x2)
    return cmath.cosh(x), cmath.sinh(x) / x


def _const_parts(gp, gm, gz, sigma, t):
    d2 = complex((gz / 2) ** 2 - sigma * gp * gm)
    ch, shc = _cosh_sinhc(t * t * d2)
    den = ch - (gz / 2) * t * shc
    if abs(den) < 1e-12:
        raise PropagatorBlowUp(f"propagator pole at t={t:.17g} (constant rates)", time=t)
    return t * shc, den


def solve_const(gp: float, gm: float, gz: float, sigma: int, t: float):
    """Closed-form coefficients for time-independent rates.

    With ``D = sqrt((gz/2)**2 - sigma*gp*gm)`` and
    ``den = cosh(tD) - (gz/2D) sinh(tD)``::

        f+ = (gp/D) sinh(tD) / den,   f- = (gm/D) sinh(tD) / den,
        exp(fz) = den**-2

    Imaginary ``D`` and the ``D -> 0`` limit are handled by evaluating
    ``cosh`` and ``sinh(x)/x`` as even functions of ``(tD)**2``.

    Returns:
        ``(f_plus, f0_exp, f_minus)``.

    Raises:
        PropagatorBlowUp: ``den`` vanishes at ``t``.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    sh_over_d, den = _const_parts(gp, gm, gz, sigma, t)
    return gp * sh_over_d / den, den ** -2, gm * sh_over_d / den


def const_coefficients(gp, gm, gz, sigma, t, *, scalar=0.0, omega=0.0) -> Coefficients:
    """:func:`solve_const` packed as a :class:`Coefficients` snapshot."""
    sh_over_d, den = _const_parts(gp, gm, gz, sigma, t)
    return Coefficients(
        f_plus=gp * sh_over_d / den,
        # den stays real and positive up to the first pole for real rates
        f_z=-2 * cmath.log(den),
        f_minus=gm * sh_over_d / den,
        u1_phase=-1j * omega * t,
        scalar_weight=complex(scalar * t),
    )


# -- arbitrary rates: adaptive integration -----------------------------------


def _rhs(rates: RateFunctions):
    sigma = rates.sigma

    def rhs(t, y):
        gp, gm, gz, c, om = rates.values(t)
        fp = y[0]
        return np.array([
            gp + gz * fp + sigma * gm * fp * fp,
            gz + 2 * sigma * gm * fp,
            gm * cmath.exp(y[1]),
            -1j * om,
            c,
        ])

    return rhs


def _blowup_guard(t, y):
    if not abs(y[0]) <= BLOWUP_LIMIT:
        raise PropagatorBlowUp(
            f"Riccati solution diverges (|f+| > {BLOWUP_LIMIT:g}) near t={t:.17g}", time=t)


def solve_ode(rates: RateFunctions, t_end: float, tol: float = DEFAULT_TOL,
              n_out: int = 101, times=None) -> DisentangleCoefficients:
    """Integrate the Riccati equation and its companion quadratures.

    Args:
        rates: generator coefficients.
        t_end: final time (> 0).
        tol: local error tolerance of the embedded 5(4) pair.
        n_out: number of equispaced output points on ``[0, t_end]``; ignored
            when ``times`` is given.
        times: explicit increasing output grid starting at 0.

    Raises:
        PropagatorBlowUp: finite-time divergence of ``f+``.
        StepSizeUnderflow: the step size collapsed.
    """
    if not t_end > 0:
        raise ValueError("t_end must be > 0")
    if not tol > 0:
        raise ValueError("tol must be > 0")
    if times is None:
        times = np.linspace(0.0, t_end, n_out)
    times = np.asarray(times, dtype=float)
    if times[0] != 0.0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must start at 0 and increase strictly")
    poles = list(rates.poles(0.0, float(times[-1])))

    def solve(g, u_eval, y0, piece):
        def guard(u, y):
            _blowup_guard(piece.t(u), y)

        return _dopri.integrate(g, u_eval, y0, tol, guard=guard)

    ys, dense = _poles.drive(solve, _rhs(rates), times, np.zeros(5, dtype=complex), poles)
    return DisentangleCoefficients(times, ys[:, 0], ys[:, 1], ys[:, 2], ys[:, 3],
                                   ys[:, 4], rates.sigma, dense)


# -- propagator application ---------------------------------------------------

SERIES_TOL = 1e-14


def _exp_ladder(kind, gen, f, x):
    """exp(f * gen) x by power series; terminates exactly for nilpotent actions."""
    if f == 0:
        return x
    total = x.copy()
    term = x
    scale = float(np.max(np.abs(x))) or 1.0
    for k in range(1, 10 * x.shape[0] + 200):
        term = apply_to_operator(kind, gen, term) * (f / k)
        size = float(np.max(np.abs(term)))
        total = total + term
        if size == 0.0 or size < SERIES_TOL * max(scale, float(np.max(np.abs(total)))):
            break
    return total


def _apply_matrix(kind: AlgebraKind, c: Coefficients, x: np.ndarray) -> np.ndarray:
    d = x.shape[0]
    x = _exp_ladder(kind, Generator.MINUS, c.f_minus, x)
    x = np.exp(c.f_z * zero_eigenvalues(kind, d)) * x
    x = _exp_ladder(kind, Generator.PLUS, c.f_plus, x)
    x = np.exp(c.u1_phase * r_eigenvalues(kind, d)) * x
    return cmath.exp(c.scalar_weight) * x


def apply_propagator(kind: AlgebraKind, coeffs: Coefficients, v) -> np.ndarray:
    """Apply the factored propagator to a Liouville vector.

    Order of application: ``exp(f- L-)``, then ``exp(fz L0)``, then
    ``exp(f+ L+)``, then ``exp(u1 R)``, then the scalar weight.
    """
    kind = AlgebraKind.parse(kind)
    if not coeffs.is_finite():
        raise ParameterSingularity(f"non-finite disentangling coefficients: {coeffs}")
    v = np.asarray(v, dtype=complex)
    liouville_dim(v)
    return _apply_matrix(kind, coeffs, devectorize(v)).reshape(-1)


def propagate(kind: AlgebraKind, coeffs: DisentangleCoefficients, rho0) -> np.ndarray:
    """States ``U(t_i) rho0`` for every time of ``coeffs``, shape (n_t, d, d)."""
    kind = AlgebraKind.parse(kind)
    rho0 = np.asarray(rho0, dtype=complex)
    out = np.empty((len(coeffs),) + rho0.shape, dtype=complex)
    for i in range(len(coeffs)):
        c = coeffs[i]
        if not c.is_finite():
            raise ParameterSingularity(f"non-finite coefficients at t={coeffs.times[i]}")
        out[i] = _apply_matrix(kind, c, rho0)
    return out
