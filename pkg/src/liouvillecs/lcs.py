"""Liouville coherent states and their closed-form evolution.

A coherent state is ``e^{zeta L+} e^{eta L0} e^{-zeta* L-}`` applied to a
lowest-weight operator:

* su(2): the base is ``|down><down|`` (``k = -1/2``), the j=1/2 sector of
  2x2 operators.  The j=0 sector is spanned by ``sigma_+`` and ``sigma_-``.
* su(1,1): the base is ``|m><0|`` (``k = (1 + m)/2``) or, for the conjugate
  flag, ``|0><m|``.  ``|m; zeta>^+`` is the conjugate state with parameter
  ``zeta*``.

``eta = -sigma log(1 - sigma |zeta|^2)``.  For su(2) this gives unit
Hilbert-Schmidt norm, for su(1,1) it does not; the density-matrix
normalization is the trace, fixed by the expansion coefficients.

Under the factored propagator a coherent state stays coherent: ``U |zeta>``
is a scalar times ``|g+>`` with ``g+`` a Mobius image of ``zeta``.
"""

from __future__ import annotations

import cmath
import csv
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .core import AlgebraKind, vectorize
from .errors import ParameterSingularity, TruncationLeak, UnphysicalState
from .riccati import Coefficients, DisentangleCoefficients

__all__ = [
    "CoherentState",
    "GParams",
    "CircleImage",
    "coherent_vector",
    "coherent_operator",
    "trace_normalized",
    "evolve_params",
    "evolve_vector",
    "circle_map",
    "su2_decompose",
    "su2_reconstruct",
    "su11_assemble",
    "identity_resolution_check_su2",
    "fit_circle",
    "ParamTrajectory",
    "param_trajectory",
]

log = logging.getLogger(__name__)

SINGULAR = 1e-12
TAIL_TOL = 1e-12


@dataclass(frozen=True)
class CoherentState:
    """Coherent state label.

    Attributes:
        kind: algebra.
        zeta: complex parameter; ``|zeta| < 1`` for su(1,1).
        m: representation label (su(1,1) only, ``k = (1 + m)/2``).
        conj: use the conjugate base ``|0><m|`` instead of ``|m><0|``.
    """

    kind: AlgebraKind
    zeta: complex
    m: int = 0
    conj: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", AlgebraKind.parse(self.kind))
        object.__setattr__(self, "zeta", complex(self.zeta))
        if not cmath.isfinite(self.zeta):
            raise ValueError("zeta must be finite")
        if self.kind is AlgebraKind.SU2:
            if self.m != 0 or self.conj:
                raise ValueError("su(2) coherent states live in the j=1/2 sector only")
        else:
            if int(self.m) != self.m or self.m < 0:
                raise ValueError("m must be a non-negative integer")
            if not abs(self.zeta) < 1:
                raise ValueError(f"su(1,1) coherent state needs |zeta| < 1, got {abs(self.zeta)}")

    @property
    def sigma(self) -> int:
        return self.kind.sigma

    @property
    def k(self) -> float:
        return -0.5 if self.kind is AlgebraKind.SU2 else (1 + self.m) / 2

    @property
    def r_eig(self) -> int:
        return -self.m if self.conj else self.m

    @property
    def eta(self) -> float:
        return _eta(self.zeta, self.sigma)

    def with_zeta(self, zeta: complex) -> "CoherentState":
        return CoherentState(self.kind, zeta, self.m, self.conj)

    def dagger(self) -> "CoherentState":
        """Label of the Hermitian-conjugate operator (su(1,1) only)."""
        return CoherentState(self.kind, self.zeta.conjugate(), self.m, not self.conj)


def _eta(zeta: complex, sigma: int) -> float:
    return -sigma * math.log(1 - sigma * abs(zeta) ** 2)


@dataclass(frozen=True)
class GParams:
    """Evolved coherent-state parameters.

    ``e^{g_zero}`` is the meaningful quantity (``g_zero`` uses the principal
    logarithm).  ``U |zeta> = prefactor * |g_plus>``.
    """

    g_plus: complex
    g_zero: complex
    g_minus: complex
    prefactor: complex


@dataclass(frozen=True)
class CircleImage:
    radius: float
    center: complex


def coherent_operator(state: CoherentState, truncation: int | None = None) -> np.ndarray:
    """Matrix form of the coherent state."""
    zeta = state.zeta
    if state.kind is AlgebraKind.SU2:
        if truncation not in (None, 2):
            raise ValueError("su(2) coherent states are 2x2")
        norm = math.exp(state.eta * state.k)
        return norm * np.array([[zeta, 0], [0, 1]], dtype=complex)
    if truncation is None or truncation < 2:
        raise ValueError("su(1,1) coherent states need a truncation >= 2")
    d, m = int(truncation), int(state.m)
    if m >= d:
        raise ValueError(f"label m={m} does not fit into truncation {d}")
    n = np.arange(d - m)
    # (K+)^n / n! on |m><0| gives sqrt(binom(m+n, n)) |m+n><n|
    log_binom = 0.5 * (gammaln(m + n + 1) - gammaln(m + 1) - gammaln(n + 1))
    amp = np.exp(state.eta * state.k + log_binom) * zeta ** n
    op = np.zeros((d, d), dtype=complex)
    op[m + n, n] = amp
    return op.T.copy() if state.conj else op


def coherent_vector(state: CoherentState, truncation: int | None = None) -> np.ndarray:
    """Vectorized coherent state ``e^{zeta L+} e^{eta L0} e^{-zeta* L-} |base>``."""
    return vectorize(coherent_operator(state, truncation))


def trace_normalized(state: CoherentState, truncation: int | None = None) -> np.ndarray:
    """The coherent operator rescaled to unit trace.

    For su(2) the factor is ``sqrt(1 + |zeta|^2) / (1 + zeta)``.  The result
    is Hermitian only when ``zeta`` is real.
    """
    op = coherent_operator(state, truncation)
    tr = np.trace(op)
    if abs(tr) < SINGULAR:
        raise ParameterSingularity("coherent state has zero trace")
    return op / tr


def evolve_params(coeffs: Coefficients, state: CoherentState) -> GParams:
    """Map ``zeta`` through the factored propagator.

    With ``Lambda = 1 - sigma f- zeta``::

        g+ = f+ + zeta e^{fz} / Lambda
        e^{g0} = e^{eta} e^{fz} Lambda^-2
        g- = -zeta* + e^{eta} f- / Lambda

    The prefactor is ``e^{(g0 - eta(g+)) k}`` times the u(1) phase
    ``e^{u1 r}`` and the scalar weight, so that ``U |zeta> = prefactor |g+>``
    with both sides in the same ``eta`` convention.

    Raises:
        ParameterSingularity: ``|Lambda| <= 1e-12``, or for su(1,1) the image
            leaves the unit disk.
    """
    sigma = state.sigma
    zeta = state.zeta
    lam = 1 - sigma * coeffs.f_minus * zeta
    if abs(lam) <= SINGULAR:
        raise ParameterSingularity(f"parameter map singular: |Lambda| = {abs(lam):.3e}")
    e_fz = cmath.exp(coeffs.f_z)
    e_eta = math.exp(state.eta)
    g_plus = coeffs.f_plus + zeta * e_fz / lam
    g_zero = state.eta + coeffs.f_z - 2 * cmath.log(lam)
    g_minus = -zeta.conjugate() + e_eta * coeffs.f_minus / lam
    if sigma == 1 and not abs(g_plus) < 1:
        raise ParameterSingularity(f"evolved parameter |g+| = {abs(g_plus):.6g} left the unit disk")
    k = state.k
    # Lambda^{-2k} with integer exponent avoids the branch of the logarithm
    prefactor = (cmath.exp(k * (state.eta + coeffs.f_z - _eta(g_plus, sigma)))
                 * lam ** int(round(-2 * k))
                 * cmath.exp(coeffs.u1_phase * state.r_eig + coeffs.scalar_weight))
    return GParams(complex(g_plus), complex(g_zero), complex(g_minus), complex(prefactor))


def evolve_vector(coeffs: Coefficients, state: CoherentState,
                  truncation: int | None = None) -> np.ndarray:
    """``U |zeta>`` rebuilt from the evolved parameters."""
    g = evolve_params(coeffs, state)
    return g.prefactor * coherent_vector(state.with_zeta(g.g_plus), truncation)


def circle_map(coeffs: Coefficients, abs_zeta: float, sigma: int) -> CircleImage:
    """Image of the circle ``|zeta| = abs_zeta`` under the parameter map.

    Raises:
        ParameterSingularity: ``1 - |f-|^2 |zeta|^2 <= 1e-12``.
    """
    if abs_zeta < 0:
        raise ValueError("abs_zeta must be >= 0")
    fm = complex(coeffs.f_minus)
    den = 1 - abs(fm) ** 2 * abs_zeta ** 2
    if den <= SINGULAR:
        raise ParameterSingularity(f"circle map singular: 1 - |f-|^2 |zeta|^2 = {den:.3e}")
    e_fz = cmath.exp(coeffs.f_z)
    radius = abs_zeta * abs(e_fz) / den
    center = coeffs.f_plus + sigma * e_fz * abs_zeta ** 2 * fm.conjugate() / den
    return CircleImage(float(radius), complex(center))


def fit_circle(points) -> CircleImage:
    """Algebraic least-squares (Kasa) circle through complex points."""
    z = np.asarray(points, dtype=complex)
    a = np.column_stack([z.real, z.imag, np.ones(z.size)])
    b = -(z.real ** 2 + z.imag ** 2)
    (p, q, r), *_ = np.linalg.lstsq(a, b, rcond=None)
    center = complex(-p / 2, -q / 2)
    return CircleImage(float(math.sqrt(abs(center) ** 2 - r)), center)


# -- density-matrix expansions ----------------------------------------------


def su2_decompose(rho) -> tuple[complex, complex, complex]:
    """Split a 2x2 density matrix into j=0 and j=1/2 sectors.

    ``rho = c0 sigma_+ + c0* sigma_- + c1 |zeta>``.

    Returns:
        ``(c0, c1, zeta)`` with ``zeta = rho_uu / rho_dd`` and
        ``c1 = sqrt(1 + |zeta|^2) rho_dd``.

    Raises:
        UnphysicalState: trace differs from 1 by more than 1e-9.
        ParameterSingularity: ``rho_dd = 0`` (fully excited state); use the
            conjugate parametrization instead.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError("su(2) decomposition needs a 2x2 matrix")
    if abs(np.trace(rho) - 1) > 1e-9:
        raise UnphysicalState(f"trace {np.trace(rho)} differs from 1")
    if rho[1, 1] == 0:
        raise ParameterSingularity(
            "rho_dd = 0 puts zeta at infinity; use the conjugate parametrization")
    zeta = rho[0, 0] / rho[1, 1]
    c1 = math.sqrt(1 + abs(zeta) ** 2) * rho[1, 1]
    return complex(rho[0, 1]), complex(c1), complex(zeta)


def su2_reconstruct(c0: complex, c1: complex, zeta: complex) -> np.ndarray:
    j0 = np.array([[0, c0], [complex(c0).conjugate(), 0]], dtype=complex)
    return j0 + c1 * coherent_operator(CoherentState(AlgebraKind.SU2, zeta))


def su11_assemble(terms, truncation: int) -> np.ndarray:
    """Density matrix ``sum_i [c_i |m_i; zeta_i> + h.c.]``.

    Args:
        terms: iterable of ``(m, c, zeta)``.
        truncation: Fock cutoff.

    Raises:
        UnphysicalState: the trace differs from 1 by more than 1e-8.
        TruncationLeak: a geometric tail beyond the cutoff exceeds 1e-12.
    """
    d = int(truncation)
    rho = np.zeros((d, d), dtype=complex)
    for m, c, zeta in terms:
        state = CoherentState(AlgebraKind.SU11, zeta, int(m))
        rho += c * coherent_operator(state, d)
        tail = _su11_tail(state, d)
        if tail > TAIL_TOL:
            raise TruncationLeak(
                f"coherent state (m={m}, zeta={zeta}) has tail {tail:.2e} beyond"
                f" truncation {d}")
    rho = rho + rho.conj().T
    tr = np.trace(rho)
    if abs(tr - 1) > 1e-8:
        raise UnphysicalState(f"assembled trace = {tr.real:.12g}{tr.imag:+.3g}j, expected 1")
    log.debug("assembled state Hermiticity defect %.3e",
              float(np.max(np.abs(rho - rho.conj().T))))
    return rho


def _su11_tail(state: CoherentState, d: int) -> float:
    """Bound on the omitted amplitudes ``n >= d - m`` of a coherent state."""
    x = abs(state.zeta)
    if x == 0:
        return 0.0
    m, n = state.m, d - state.m
    # amplitude ratio between successive terms tends to x from above
    ratio = x * math.sqrt((m + n + 1) / (n + 1))
    if ratio >= 1:
        return math.inf
    log_first = (state.eta * state.k + n * math.log(x)
                 + 0.5 * (gammaln(m + n + 1) - gammaln(m + 1) - gammaln(n + 1)))
    return math.exp(log_first) / (1 - ratio)


def identity_resolution_check_su2(grid=(32, 64)) -> float:
    """Quadrature of ``|zeta><zeta|`` over the sphere for the j=1/2 sector.

    ``zeta = -tan(theta/2) e^{-i phi}`` with measure
    ``(2j+1)/(4 pi) sin(theta) dtheta dphi``.  Gauss-Legendre in theta,
    trapezoid in phi.

    Returns:
        Max-norm deviation of the quadrature from the projector onto the
        span of ``|up><up|`` and ``|down><down|`` in Liouville space.
    """
    n_theta, n_phi = (int(x) for x in grid)
    if n_theta < 8 or n_phi < 8:
        raise ValueError("grid needs at least 8 points per direction")
    x, w = np.polynomial.legendre.leggauss(n_theta)
    theta = 0.5 * math.pi * (x + 1)
    w_theta = 0.5 * math.pi * w
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    w_phi = 2 * math.pi / n_phi
    acc = np.zeros((4, 4), dtype=complex)
    for th, wt in zip(theta, w_theta):
        weight = wt * w_phi * math.sin(th) * 2 / (4 * math.pi)
        for ph in phi:
            zeta = -math.tan(th / 2) * cmath.exp(-1j * ph)
            v = coherent_vector(CoherentState(AlgebraKind.SU2, zeta))
            acc += weight * np.outer(v, v.conj())
    proj = np.zeros((4, 4))
    proj[0, 0] = proj[3, 3] = 1.0
    return float(np.max(np.abs(acc - proj)))


# -- trajectories -------------------------------------------------------------


@dataclass
class ParamTrajectory:
    """Evolved coherent parameters and circle images on a time grid."""

    times: np.ndarray
    g_plus: np.ndarray
    g_zero: np.ndarray
    g_minus: np.ndarray
    prefactor: np.ndarray
    radius: np.ndarray
    center: np.ndarray

    def to_csv(self, stream) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["time", "g_plus_re", "g_plus_im", "g_zero_re", "g_zero_im",
                         "g_minus_re", "g_minus_im", "prefactor_re", "prefactor_im",
                         "R", "z_re", "z_im"])
        for i, t in enumerate(self.times):
            row = [t]
            for arr in (self.g_plus, self.g_zero, self.g_minus, self.prefactor):
                row += [arr[i].real, arr[i].imag]
            row += [self.radius[i], self.center[i].real, self.center[i].imag]
            writer.writerow([f"{float(x):.17g}" for x in row])


def param_trajectory(coeffs: DisentangleCoefficients, state: CoherentState) -> ParamTrajectory:
    """Evaluate :func:`evolve_params` and :func:`circle_map` at every time."""
    n = len(coeffs)
    cols = {name: np.empty(n, dtype=complex) for name in
            ("g_plus", "g_zero", "g_minus", "prefactor", "center")}
    radius = np.empty(n)
    for i in range(n):
        c = coeffs[i]
        g = evolve_params(c, state)
        img = circle_map(c, abs(state.zeta), state.sigma)
        cols["g_plus"][i], cols["g_zero"][i] = g.g_plus, g.g_zero
        cols["g_minus"][i], cols["prefactor"][i] = g.g_minus, g.prefactor
        radius[i], cols["center"][i] = img.radius, img.center
    return ParamTrajectory(np.asarray(coeffs.times), cols["g_plus"], cols["g_zero"],
                           cols["g_minus"], cols["prefactor"], radius, cols["center"])
