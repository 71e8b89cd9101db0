"""Tests for the radial nodal solver.

The reference values frozen here were computed with the fixed-step RK4
oracle below (steps h = 1e-4 and 5e-5 agree to ~5e-12; see
``rk4_zeros``), which shares no code with the production integrator.
"""

import numpy as np
import pytest

from henon_morse import (
    DEFAULT,
    HenonParams,
    RadialProfile,
    UsageError,
    evaluate_profile,
    integrate_ivp,
    ode_residual,
    solve_nodal,
    validate_profile,
)

# Zeros of the trajectory with u(0) = 1, from the RK4 oracle.
ZERO1_A0_P3 = 3.5739009819    # first zero, alpha = 0, p = 3
ZERO2_A0_P3 = 12.2870432098   # second zero, alpha = 0, p = 3
ZERO1_A1_P2 = 2.6778135354    # first zero, alpha = 1, p = 2


def rk4_zeros(alpha, p, r_end, h, nzeros):
    """Independent oracle: classical RK4 with fixed step; zeros refined by
    bisection, each candidate evaluated by short RK4 runs from the left
    bracket state."""

    def f(r, y):
        u, v = y
        return np.array([v, -v / r - r**alpha * abs(u) ** (p - 1.0) * u])

    def step(r, y, h):
        k1 = f(r, y)
        k2 = f(r + h / 2, y + h / 2 * k1)
        k3 = f(r + h / 2, y + h / 2 * k2)
        k4 = f(r + h, y + h * k3)
        return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    eps = 1e-6
    y = np.array([1.0 - eps ** (alpha + 2) / (alpha + 2) ** 2,
                  -(eps ** (alpha + 1)) / (alpha + 2)])
    r = eps
    zeros = []
    while r < r_end and len(zeros) < nzeros:
        y_new = step(r, y, h)
        if y[0] * y_new[0] < 0:
            a_r, a_y = r, y.copy()
            b_r = r + h
            for _ in range(80):
                m_r = 0.5 * (a_r + b_r)
                ym, rr, hh = a_y.copy(), a_r, (m_r - a_r) / 8
                for _ in range(8):
                    ym = step(rr, ym, hh)
                    rr += hh
                if a_y[0] * ym[0] < 0:
                    b_r = m_r
                else:
                    a_r, a_y = m_r, ym
                if b_r - a_r < 1e-13 * max(1.0, m_r):
                    break
            zeros.append(0.5 * (a_r + b_r))
        r += h
        y = y_new
    return np.array(zeros)


def test_oracle_reproduces_frozen_zeros():
    z = rk4_zeros(0.0, 3.0, 14.0, 5e-4, 2)
    assert z[0] == pytest.approx(ZERO1_A0_P3, abs=5e-9)
    assert z[1] == pytest.approx(ZERO2_A0_P3, abs=2e-8)


def test_trajectory_zeros_match_oracle():
    traj = integrate_ivp(0.0, 3.0, 1.0, 14.0)
    assert traj.zeros[0] == pytest.approx(ZERO1_A0_P3, rel=1e-9)
    assert traj.zeros[1] == pytest.approx(ZERO2_A0_P3, rel=1e-9)
    traj = integrate_ivp(1.0, 2.0, 1.0, 4.0)
    assert traj.zeros[0] == pytest.approx(ZERO1_A1_P2, rel=1e-9)


def test_central_value_follows_power_rescaling():
    # d = (n-th zero)^((alpha+2)/(p-1)); for alpha=0, p=3 the exponent is 1.
    prof = solve_nodal(HenonParams(0.0, 3.0, 2))
    assert prof.d == pytest.approx(ZERO2_A0_P3, rel=1e-9)
    assert prof.nodal_radii[0] == pytest.approx(ZERO1_A0_P3 / ZERO2_A0_P3, rel=1e-9)
    prof = solve_nodal(HenonParams(1.0, 2.0, 1))
    assert prof.d == pytest.approx(ZERO1_A1_P2 ** 3.0, rel=1e-8)


@pytest.mark.parametrize("alpha,p,n", [
    (0.0, 3.0, 1), (0.0, 3.0, 2), (0.5, 5.0, 3), (2.0, 3.0, 2),
    (6.0, 2.0, 3), (1.0, 2.0, 2), (4.0, 5.0, 1),
])
def test_profile_invariants(alpha, p, n):
    prof = solve_nodal(HenonParams(alpha, p, n))
    assert prof.u[0] == prof.d > 1.0
    assert prof.du[0] == 0.0
    assert prof.grid[0] == 0.0 and prof.grid[-1] == 1.0
    assert prof.nodal_radii.shape == (n,)
    assert prof.nodal_radii[-1] == 1.0
    assert np.all(np.diff(prof.nodal_radii) > 0)
    # interior nodal radii are exact grid nodes
    for z in prof.nodal_radii[:-1]:
        assert z in prof.grid
    scale = np.max(np.abs(prof.u))
    assert abs(prof.u[-1]) <= 1e-9 * max(1.0, scale)
    # signs alternate on nodal intervals, positive innermost
    edges = np.concatenate(([0.0], prof.nodal_radii))
    mids = 0.5 * (edges[:-1] + edges[1:])
    mid_u, _ = evaluate_profile(prof, mids)
    assert np.all(np.sign(mid_u) == (-1.0) ** np.arange(n))
    # validated residual
    assert ode_residual(prof) <= 1e-6 * scale**p


def test_residual_detects_broken_rescaling():
    # Scaling closure: v(r) = mu^((alpha+2)/(p-1)) U(mu r) solves the same
    # equation for any mu; a wrong amplitude must trip the residual.
    alpha, p, mu = 1.0, 3.0, 0.7
    traj = integrate_ivp(alpha, p, 1.0, 4.0)
    grid = np.linspace(0.0, 1.0, 1025)
    amp = mu ** ((alpha + 2.0) / (p - 1.0))
    u, du = traj.value(mu * grid)
    good = RadialProfile(
        params=HenonParams(alpha, p, 1), d=amp, grid=grid,
        u=amp * u, du=amp * mu * du, nodal_radii=np.array([1.0]),
        tolerances={},
    )
    scale = np.max(np.abs(good.u))
    assert ode_residual(good) <= 1e-6 * scale**p
    bad = RadialProfile(
        params=HenonParams(alpha, p, 1), d=amp, grid=grid,
        u=amp * 1.001 * u, du=amp * mu * du, nodal_radii=np.array([1.0]),
        tolerances={},
    )
    assert ode_residual(bad) > 100 * 1e-6 * scale**p


def test_evaluate_profile_matches_trajectory_between_nodes():
    params = HenonParams(0.5, 5.0, 2)
    prof = solve_nodal(params)
    traj = integrate_ivp(params.alpha, params.p, 1.0, 40.0, stop_after=2)
    mu = traj.zeros[1]
    amp = mu ** ((params.alpha + 2.0) / (params.p - 1.0))
    # probe strictly between grid nodes
    r = 0.5 * (prof.grid[100:-1:97] + prof.grid[101::97])
    u_i, du_i = evaluate_profile(prof, r)
    u_t, du_t = traj.value(mu * r)
    scale = np.max(np.abs(prof.u))
    assert np.max(np.abs(u_i - amp * u_t)) <= 1e-9 * scale
    assert np.max(np.abs(du_i - amp * mu * du_t)) <= 1e-7 * scale


def test_evaluate_profile_scalar_and_bounds():
    prof = solve_nodal(HenonParams(0.0, 3.0, 1))
    u0, du0 = evaluate_profile(prof, 0.0)
    assert u0 == prof.d and du0 == 0.0
    with pytest.raises(UsageError):
        evaluate_profile(prof, 1.5)
    with pytest.raises(UsageError):
        evaluate_profile(prof, -0.2)


def test_large_power_concentration():
    # For large p the inner nodal radius collapses toward the origin; the
    # geometric grid tail must still resolve it.
    prof = solve_nodal(HenonParams(0.0, 50.0, 2))
    assert prof.nodal_radii[0] < 1e-4
    assert prof.nodal_radii[0] > DEFAULT.grid_geo_rmin
    validate_profile(prof)


def test_parameter_validation():
    with pytest.raises(UsageError):
        HenonParams(-0.5, 3.0, 1)
    with pytest.raises(UsageError):
        HenonParams(0.0, 1.0, 1)
    with pytest.raises(UsageError):
        HenonParams(0.0, 3.0, 0)
    with pytest.raises(UsageError):
        integrate_ivp(0.0, 3.0, -1.0, 4.0)


def test_trajectory_value_below_series_start():
    traj = integrate_ivp(0.0, 3.0, 1.0, 4.0)
    u, du = traj.value(0.0)
    assert u == 1.0 and du == 0.0
    r = 1e-8  # inside the series region
    u, du = traj.value(r)
    assert u == pytest.approx(1.0 - r**2 / 4.0, rel=1e-12)
