"""Physical models with su(2) and su(1,1) dynamical symmetry.

* A two-level system coupled to a single detuned bath mode.  Its reduced
  dynamics is time-local with complex rate ``chi(t)``; ``Re chi`` is the
  dissipation rate and ``Im chi`` the renormalized level splitting.
* A harmonic oscillator with periodically modulated damping
  ``gamma(t) = gamma * (a + cos(big_gamma * t))`` at thermal occupancy nbar.

hbar = k_B = 1 throughout.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .core import AlgebraKind, Generator, superop_matrix
from .errors import ParameterSingularity
from .riccati import RateFunctions

__all__ = [
    "SpinBosonParams",
    "OscillatorBathParams",
    "chi",
    "su2_rates",
    "su11_rates",
    "dense_liouvillian",
    "fig1_params",
    "fig2_oscillator",
]


@dataclass(frozen=True)
class SpinBosonParams:
    omega: float
    g: float
    delta: float
    nbar: float = 0.0

    def __post_init__(self):
        if self.nbar < 0:
            raise ValueError("nbar must be >= 0")
        if self.g != 0 and not self.delta_prime > 0:
            raise ValueError("delta' = sqrt(delta^2 + g^2) must be positive")
        if self.r_denominator == 0:
            raise ParameterSingularity("omega + (delta - delta')/2 vanishes")

    @property
    def delta_prime(self) -> float:
        return math.hypot(self.delta, self.g)

    @property
    def g_prime(self) -> float:
        dp = self.delta_prime
        # g^2/(dp + delta) avoids cancellation when g << |delta|
        if self.delta > 0:
            return self.g**2 / (dp + self.delta)
        return dp - self.delta

    @property
    def s(self) -> float:
        if self.g == 0:
            return 0.0
        return self.g_prime / (self.delta + self.delta_prime)

    @property
    def r_denominator(self) -> float:
        return self.omega + (self.delta - self.delta_prime) / 2

    @property
    def r(self) -> float:
        return (self.omega + (self.delta + self.delta_prime) / 2) / self.r_denominator

    @property
    def period(self) -> float:
        """Period 2 pi / delta' of chi(t)."""
        return 2 * math.pi / self.delta_prime

    def poles(self, t0: float, t1: float) -> list[float]:
        """Real times in [t0, t1] where chi is singular (only when s == 1)."""
        if self.g == 0 or abs(self.s - 1.0) > 1e-12:
            return []
        # s + exp(i delta' t) = 0  <=>  delta' t = pi (mod 2 pi)
        dp = self.delta_prime
        k0 = math.ceil((t0 * dp / math.pi - 1) / 2)
        out = []
        k = max(k0, 0)
        while True:
            tk = (2 * k + 1) * math.pi / dp
            if tk > t1:
                return out
            if tk >= t0:
                out.append(tk)
            k += 1


@dataclass(frozen=True)
class OscillatorBathParams:
    """Damped oscillator with ``gamma_1(t) = gamma_2(t) = gamma (a + cos(big_gamma t))``."""

    gamma: float
    a: float
    big_gamma: float
    nbar: float = 0.0
    omega: Union[float, Callable[[float], float]] = 1.0

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.nbar < 0:
            raise ValueError("nbar must be >= 0")

    def rate(self, t: float) -> float:
        return self.gamma * (self.a + math.cos(self.big_gamma * t))

    def omega_at(self, t: float) -> float:
        return self.omega(t) if callable(self.omega) else float(self.omega)


def fig1_params(delta: float, omega: float = 2.0, g: float = 1.0) -> SpinBosonParams:
    return SpinBosonParams(omega=omega, g=g, delta=delta, nbar=0.0)


def fig2_oscillator(gamma: float = 1.0, nbar: float = 0.0, omega=1.0) -> OscillatorBathParams:
    """Rates ``gamma (1 + cos(8 gamma t)) / 2`` for both damping channels."""
    return OscillatorBathParams(gamma=gamma / 2, a=1.0, big_gamma=8 * gamma, nbar=nbar,
                                omega=omega)


def chi(p: SpinBosonParams, t: float) -> complex:
    """Complex rate ``i (omega - g'/2) (r s + e^{i delta' t}) / (s + e^{i delta' t})``.

    Raises:
        ParameterSingularity: the denominator vanishes (resonance pole).
    """
    s = p.s
    half = 0.5 * p.delta_prime * t
    # 1 + e^{2ix} = 2 cos(x) e^{ix} keeps full relative accuracy near the pole
    one_w = 2 * math.cos(half) * cmath.exp(1j * half)
    den = (s - 1) + one_w
    if abs(den) < 1e-12:
        raise ParameterSingularity(f"chi(t) has a pole at t={t:.17g}")
    return 1j * (p.omega - p.g_prime / 2) * ((p.r * s - 1) + one_w) / den


def su2_rates(p: SpinBosonParams) -> RateFunctions:
    """Generator coefficients of the two-level model.

    ``L = -i Omega R + gamma nbar L+ + gamma (nbar+1) L- - gamma L0
    - gamma (2 nbar + 1)/2`` with ``gamma = Re chi`` and ``Omega = Im chi``.
    """
    nbar = p.nbar

    def gamma(t):
        return chi(p, t).real

    return RateFunctions(
        gamma_plus=(lambda t: gamma(t) * nbar) if nbar else (lambda t: 0.0),
        gamma_minus=lambda t: gamma(t) * (nbar + 1),
        gamma_z=lambda t: -gamma(t),
        scalar=lambda t: -0.5 * gamma(t) * (2 * nbar + 1),
        omega=lambda t: chi(p, t).imag,
        sigma=AlgebraKind.SU2.sigma,
        poles=p.poles,
    )


def su11_rates(p: OscillatorBathParams) -> RateFunctions:
    """Generator coefficients of the damped oscillator.

    ``L = [g1 (nbar+1) - g2 nbar] - i omega R + 2 g1 (nbar+1) K- + 2 g2 nbar K+
    - 2 [g1 (nbar+1) + g2 nbar] K0`` with ``g1 = g2 = p.rate(t)``.
    """
    nbar = p.nbar
    return RateFunctions(
        gamma_plus=lambda t: 2 * p.rate(t) * nbar,
        gamma_minus=lambda t: 2 * p.rate(t) * (nbar + 1),
        gamma_z=lambda t: -2 * p.rate(t) * (2 * nbar + 1),
        scalar=lambda t: p.rate(t) * ((nbar + 1) - nbar),
        omega=p.omega_at,
        sigma=AlgebraKind.SU11.sigma,
    )


@functools.lru_cache(maxsize=32)
def _generator_matrices(kind: AlgebraKind, d: int):
    mats = {g: superop_matrix(kind, g, d) for g in
            (Generator.PLUS, Generator.MINUS, Generator.ZERO, Generator.R)}
    for m in mats.values():
        m.flags.writeable = False
    return mats


def dense_liouvillian(kind: AlgebraKind, rates: RateFunctions, truncation: int,
                      t: float) -> np.ndarray:
    """Matrix ``M`` with ``vec(L rho) = M vec(rho)`` at time ``t``.

    Built from generator columns; for su(2) ``truncation`` must be 2.
    """
    kind = AlgebraKind.parse(kind)
    mats = _generator_matrices(kind, int(truncation))
    gp, gm, gz, c, om = rates.values(t)
    m = (gp * mats[Generator.PLUS] + gm * mats[Generator.MINUS]
         + gz * mats[Generator.ZERO] - 1j * om * mats[Generator.R])
    m = m + c * np.eye(truncation * truncation)
    return m
