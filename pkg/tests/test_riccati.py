import cmath
import io
import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from conftest import random_density
from liouvillecs import models, oracle
from liouvillecs.core import AlgebraKind, devectorize, vectorize
from liouvillecs.errors import ParameterSingularity, PropagatorBlowUp
from liouvillecs.riccati import (
    Coefficients,
    RateFunctions,
    apply_propagator,
    const_coefficients,
    propagate,
    solve_const,
    solve_ode,
)


def su2_lindblad_rates(gamma, nbar, omega):
    """Constant rates of the Lindblad-form two-level generator."""
    return RateFunctions.for_kind(
        "su2", gamma_plus=gamma * nbar, gamma_minus=gamma * (nbar + 1), gamma_z=-gamma,
        scalar=-0.5 * gamma * (2 * nbar + 1), omega=omega)


def su11_lindblad_rates(gamma, nbar, omega):
    return RateFunctions.for_kind(
        "su11", gamma_plus=2 * gamma * nbar, gamma_minus=2 * gamma * (nbar + 1),
        gamma_z=-2 * gamma * (2 * nbar + 1), scalar=gamma, omega=omega)


# -- closed form ----------------------------------------------------------------


def test_const_decoupled_u1_flow():
    fp, e0, fm = solve_const(0, 0, 1, 1, 1.0)
    assert fp == 0 and fm == 0
    assert e0 == pytest.approx(math.e, rel=1e-15)


def test_const_imaginary_d_gives_tangent():
    t = math.pi / 4
    fp, e0, fm = solve_const(1, 1, 0, 1, t)
    assert fp == pytest.approx(1.0, rel=1e-14)
    assert fm == pytest.approx(1.0, rel=1e-14)
    assert e0 == pytest.approx(2.0, rel=1e-14)


def test_const_degenerate_d_limit():
    fp, e0, fm = solve_const(1, 1, 2, 1, 0.5)
    assert fp == pytest.approx(1.0, rel=1e-14)
    assert fm == pytest.approx(1.0, rel=1e-14)
    assert e0 == pytest.approx(4.0, rel=1e-14)


def test_const_near_degenerate_is_continuous():
    # D^2 = 1 - sigma gp gm straddles zero
    a = solve_const(1 + 1e-9, 1, 2, 1, 0.5)
    b = solve_const(1 - 1e-9, 1, 2, 1, 0.5)
    for x, y in zip(a, b):
        assert abs(x - y) < 1e-8


def test_const_pole_raises_with_time():
    with pytest.raises(PropagatorBlowUp) as err:
        solve_const(1, 1, 0, 1, math.pi / 2)
    assert err.value.time == pytest.approx(math.pi / 2)


def test_const_negative_time_rejected():
    with pytest.raises(ValueError):
        solve_const(1, 1, 0, 1, -1.0)


def test_const_zero_time_is_identity():
    assert solve_const(0.3, 0.7, -1.1, -1, 0.0) == (0, 1, 0)


# -- adaptive integration -------------------------------------------------------


def test_ode_cosine_quadrature():
    rates = RateFunctions(lambda t: 0.0, lambda t: 0.0, math.cos, lambda t: 0.0,
                          lambda t: 0.0, 1)
    c = solve_ode(rates, math.pi / 2, 1e-10)
    assert c.f_z[-1] == pytest.approx(1.0, abs=1e-9)
    assert c.f0_exp[-1] == pytest.approx(math.e, rel=1e-9)


def test_ode_matches_tangent():
    rates = RateFunctions.constant(1, 1, 0, sigma=1)
    c = solve_ode(rates, math.pi / 4, 1e-10)
    fp, e0, fm = solve_const(1, 1, 0, 1, math.pi / 4)
    assert abs(c.f_plus[-1] - fp) < 1e-8 * abs(fp)
    assert abs(c.f0_exp[-1] - e0) < 1e-8 * abs(e0)
    assert abs(c.f_minus[-1] - fm) < 1e-8 * abs(fm)


def test_ode_zero_rates_are_identity():
    c = solve_ode(RateFunctions.constant(sigma=-1), 3.0)
    for name in ("f_plus", "f_z", "f_minus", "u1_phase", "scalar_weight"):
        assert np.all(getattr(c, name) == 0)


def test_coefficients_vanish_at_start():
    c = solve_ode(models.su2_rates(models.fig1_params(1.0)), 2.0)
    assert c[0] == Coefficients()


def test_ode_blow_up_reports_time():
    with pytest.raises(PropagatorBlowUp) as err:
        solve_ode(RateFunctions.constant(1, 1, 0, sigma=1), 2.0)
    assert err.value.time == pytest.approx(math.pi / 2, abs=1e-3)


def test_ode_argument_validation():
    rates = RateFunctions.constant(sigma=1)
    with pytest.raises(ValueError):
        solve_ode(rates, 0.0)
    with pytest.raises(ValueError):
        solve_ode(rates, 1.0, tol=0)
    with pytest.raises(ValueError):
        solve_ode(rates, 1.0, times=[0.0, 0.5, 0.4])


def test_ode_hits_requested_grid():
    times = np.array([0.0, 0.1, 0.35, 1.0, 2.2])
    c = solve_ode(RateFunctions.constant(0.2, 0.5, -0.3, sigma=-1), 2.2, times=times)
    np.testing.assert_array_equal(c.times, times)


def test_ode_time_dependent_against_scipy():
    sigma = -1
    gp = lambda t: 0.3 + 0.2 * math.sin(t)
    gm = lambda t: 0.8 * math.exp(-0.1 * t)
    gz = lambda t: -0.5 + 0.3 * math.cos(2 * t)
    rates = RateFunctions(gp, gm, gz, lambda t: 0.1, lambda t: 1.0, sigma)
    c = solve_ode(rates, 4.0, 1e-11)

    def rhs(t, y):
        fp, fz = y[0] + 1j * y[1], y[2] + 1j * y[3]
        dfp = gp(t) + gz(t) * fp + sigma * gm(t) * fp * fp
        dfz = gz(t) + 2 * sigma * gm(t) * fp
        dfm = gm(t) * cmath.exp(fz)
        return [dfp.real, dfp.imag, dfz.real, dfz.imag, dfm.real, dfm.imag]

    ref = solve_ivp(rhs, (0, 4), np.zeros(6), method="Radau", rtol=1e-12, atol=1e-14)
    y = ref.y[:, -1]
    assert abs(c.f_plus[-1] - (y[0] + 1j * y[1])) < 1e-9
    assert abs(c.f_z[-1] - (y[2] + 1j * y[3])) < 1e-9
    assert abs(c.f_minus[-1] - (y[4] + 1j * y[5])) < 1e-9
    assert c.u1_phase[-1] == pytest.approx(-4j, abs=1e-12)
    assert c.scalar_weight[-1] == pytest.approx(0.4, abs=1e-12)


def _draws(rng, count):
    """Constant rates with |t D| < 5 whose propagator stays away from poles."""
    out = []
    while len(out) < count:
        sigma = int(rng.choice([-1, 1]))
        gp, gm = rng.uniform(0, 1.5, size=2)
        gz = rng.uniform(-2, 2)
        t = rng.uniform(0.2, 3)
        d2 = (gz / 2) ** 2 - sigma * gp * gm
        if abs(t * cmath.sqrt(d2)) >= 5:
            continue
        try:
            dens = [abs(const_coefficients(gp, gm, gz, sigma, s).f0_exp) ** -0.5
                    for s in np.linspace(0, t, 200)]
        except PropagatorBlowUp:
            continue
        if min(dens) > 0.05:
            out.append((gp, gm, gz, sigma, t))
    return out


def test_random_constant_draws_agree(rng):
    for gp, gm, gz, sigma, t in _draws(rng, 20):
        c = solve_ode(RateFunctions.constant(gp, gm, gz, sigma=sigma), t, 1e-10)
        exact = solve_const(gp, gm, gz, sigma, t)
        got = (c.f_plus[-1], c.f0_exp[-1], c.f_minus[-1])
        for a, b in zip(got, exact):
            assert abs(a - b) <= 1e-8 * max(abs(b), 1e-300) or a == b == 0


def test_riccati_residual_small(rng):
    tol = 1e-10
    rates = RateFunctions(lambda t: 0.4 + 0.1 * math.cos(t), lambda t: 0.6,
                          lambda t: -0.8 + 0.2 * math.sin(3 * t), lambda t: 0.0,
                          lambda t: 0.0, -1)
    h = 1e-2
    centers = np.linspace(0.5, 3.5, 7)
    weights = np.array([-1, 9, -45, 0, 45, -9, 1]) / 60
    offsets = np.arange(-3, 4)
    times = np.unique(np.concatenate([[0.0], *(c + h * offsets for c in centers)]))
    c = solve_ode(rates, times[-1], tol, times=times)
    index = {round(t, 12): i for i, t in enumerate(times)}
    for t0 in centers:
        f = np.array([c.f_plus[index[round(t0 + k * h, 12)]] for k in offsets])
        # seven-point central difference, O(h^6); the five-point rule leaves
        # ~h^4 truncation above the bound at this spacing
        deriv = weights @ f / h
        gp, gm, gz, _, _ = rates.values(t0)
        resid = deriv - gz * f[3] - rates.sigma * gm * f[3] ** 2 - gp
        assert abs(resid) < 10 * tol


def test_dense_output_between_grid_points():
    rates = RateFunctions.constant(0.3, 0.5, -0.7, sigma=-1)
    c = solve_ode(rates, 2.0, 1e-11, n_out=5)
    fp, e0, fm = solve_const(0.3, 0.5, -0.7, -1, 1.234)
    got = c.at(1.234)
    assert abs(got.f_plus - fp) < 1e-7
    assert abs(cmath.exp(got.f_z) - e0) < 1e-7
    with pytest.raises(ValueError):
        c.at(2.5)


def test_coefficients_csv_round_trip():
    c = solve_ode(RateFunctions.constant(0.3, 0.5, -0.7, omega=1.0, sigma=-1), 1.0, n_out=4)
    buf = io.StringIO()
    c.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].split(",")[:3] == ["time", "f_plus_re", "f_plus_im"]
    assert len(lines) == 5
    last = [float(x) for x in lines[-1].split(",")]
    assert last[1] == c.f_plus[-1].real and last[8] == c.u1_phase[-1].imag


# -- propagator -----------------------------------------------------------------


def test_zero_coefficients_leave_vector_unchanged(rng):
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    np.testing.assert_array_equal(apply_propagator("su2", Coefficients(), v), v)


def test_plus_series_truncates_on_ground_state():
    down = np.diag([0, 1]).astype(complex)
    out = devectorize(apply_propagator("su2", Coefficients(f_plus=0.3), vectorize(down)))
    np.testing.assert_allclose(out, np.diag([0.3, 1]), atol=1e-16)


def test_non_finite_coefficients_rejected():
    with pytest.raises(ParameterSingularity):
        apply_propagator("su2", Coefficients(f_minus=complex("nan")), np.zeros(4))


@pytest.mark.parametrize("nbar", [0.0, 0.7])
def test_constant_rate_two_level_matches_oracle(rng, nbar):
    rates = su2_lindblad_rates(0.6, nbar, 1.3)
    t = 2.5
    rho0 = random_density(rng, 2)
    coeffs = const_coefficients(0.6 * nbar, 0.6 * (nbar + 1), -0.6, -1, t,
                                scalar=-0.3 * (2 * nbar + 1), omega=1.3)
    ours = devectorize(apply_propagator("su2", coeffs, vectorize(rho0)))
    ref = oracle.integrate("su2", rates, rho0, t, times=[0.0, t]).states[-1]
    assert oracle.trace_distance(ours, ref) < 1e-8


def test_restart_agrees_with_direct_propagation(rng):
    """Propagate to t0, restart the clock from the oracle state, continue to t1."""
    rates = models.su11_rates(models.fig2_oscillator(1.0, 0.5))
    t0, t1, d = 0.7, 1.6, 24
    rho0 = np.diag(0.5 ** np.arange(1, d + 1)).astype(complex)
    rho0 /= np.trace(rho0)
    ref = oracle.integrate("su11", rates, rho0, t1, times=[0.0, t0, t1])
    direct = propagate("su11", solve_ode(rates, t1, times=[0.0, t1]), rho0)[-1]
    second = solve_ode(rates.shifted(t0), t1 - t0, times=[0.0, t1 - t0])
    restarted = propagate("su11", second, ref.states[1])[-1]
    assert oracle.trace_distance(direct, restarted) < 1e-8
    assert oracle.trace_distance(direct, ref.states[-1]) < 1e-8


@pytest.mark.parametrize("kind", ["su2", "su11"])
def test_trace_preservation(rng, kind):
    if kind == "su2":
        rates, d = models.su2_rates(models.SpinBosonParams(2.0, 1.0, 1.0, 0.3)), 2
    else:
        rates, d = models.su11_rates(models.fig2_oscillator(1.0, 0.5)), 48
    times = np.concatenate([[0.0], np.sort(rng.uniform(0.1, 3.0, size=10))])
    coeffs = solve_ode(rates, times[-1], times=times)
    for _ in range(10):
        rho0 = random_density(rng, d)
        if kind == "su11":
            # keep the initial state well inside the cutoff
            rho0[8:, :] = 0
            rho0[:, 8:] = 0
            rho0 /= np.trace(rho0)
        states = propagate(kind, coeffs, rho0)
        assert np.max(np.abs(np.trace(states, axis1=1, axis2=2) - 1)) < 1e-8
