"""The power map between weighted problems and its quadratic-form comparison.

For kappa > 0 the radial power map sends r to r^kappa.  Composing a nodal
solution of the problem with weight exponent alpha with this map produces,
after an exact amplitude factor, the nodal solution with exponent
beta = kappa*(alpha+2) - 2:

    u_beta(s) = kappa^(2/(p-1)) * u_alpha(s^kappa),

with the same number of nodal sets and nodal radii mapped as z -> z^(1/kappa).

The map also controls quadratic forms.  With w = g(r) cos(k theta) and
w_kappa = g(r^kappa) cos(k theta), the form

    Q(w) = int_B |grad w|^2 - p int_B |x|^alpha |u|^(p-1) w^2

satisfies Q_beta(w_kappa) <= kappa * Q_alpha(w) for beta >= alpha, with
equality for radial w (k = 0).  This module computes both sides by
independent 1-D quadrature after angular reduction,

    Q = c_k * int_0^1 [ g'^2 + k^2 g^2 / r^2 - p r^alpha |u|^(p-1) g^2 ] r dr,

with c_0 = 2 pi and c_k = pi for k >= 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .config import DEFAULT, Settings
from .errors import NonConvergenceError, UsageError
from .radial import (
    HenonParams,
    RadialProfile,
    _output_grid,
    evaluate_profile,
    validate_profile,
)

__all__ = [
    "KappaMap",
    "TestFunction",
    "ComparisonRow",
    "ComparisonReport",
    "radial_map",
    "transform_solution",
    "quadratic_form",
    "dirichlet_energy",
    "verify_form_comparison",
    "default_battery",
    "first_nodal_truncation",
    "adaptive_quadrature",
]

# Quadrature starts at a small inset rather than 0: the k >= 1 integrand
# g^2/r has a removable singularity there (g(0) = 0), and the inset avoids
# evaluating the limit.  The neglected mass is below inset * sup|integrand|.
_QUAD_INSET = 1e-13


@dataclass(frozen=True)
class KappaMap:
    """The radial power map r -> r^kappa on [0, 1]."""

    kappa: float

    def __post_init__(self):
        if not (self.kappa > 0.0 and math.isfinite(self.kappa)):
            raise UsageError(f"kappa must be finite and > 0, got {self.kappa}")

    def __call__(self, r):
        return np.asarray(r, dtype=float) ** self.kappa if np.ndim(r) else r**self.kappa

    def inverse(self) -> "KappaMap":
        return KappaMap(1.0 / self.kappa)


def radial_map(kappa: float, r: float) -> float:
    """Apply the radial power map: r -> r^kappa (0 maps to 0)."""
    if r < 0.0:
        raise UsageError(f"radius must be >= 0, got {r}")
    return float(KappaMap(kappa)(r))


@dataclass(frozen=True)
class TestFunction:
    """Separated test function w(r, theta) = g(r) cos(k theta).

    ``g`` and ``dg`` must accept numpy arrays.  Requirements: g(1) = 0, and
    g(0) = 0 whenever the angular mode k >= 1 (otherwise w is discontinuous
    at the origin).
    """

    __test__ = False  # not a pytest test class, despite the name

    name: str
    angular_mode: int
    g: Callable = field(compare=False)
    dg: Callable = field(compare=False)

    def __post_init__(self):
        if not (isinstance(self.angular_mode, int) and self.angular_mode >= 0):
            raise UsageError(f"angular_mode must be an integer >= 0, got {self.angular_mode}")

    def compose_radial(self, kappa: float) -> "TestFunction":
        """Radial composition with the power map: g(r) becomes g(r^kappa)."""
        kmap = KappaMap(kappa)
        base_g, base_dg = self.g, self.dg

        def g(r):
            return base_g(np.asarray(r, dtype=float) ** kappa)

        def dg(r):
            r = np.asarray(r, dtype=float)
            return kappa * r ** (kappa - 1.0) * base_dg(r**kappa)

        return TestFunction(name=self.name, angular_mode=self.angular_mode, g=g, dg=dg)


def _check_test_function(w: TestFunction) -> None:
    g1 = float(np.atleast_1d(w.g(np.array([1.0])))[0])
    if abs(g1) > 1e-10:
        raise UsageError(f"test function {w.name!r} has g(1) = {g1:.3e}, expected 0")
    if w.angular_mode >= 1:
        g0 = float(np.atleast_1d(w.g(np.array([0.0])))[0])
        if abs(g0) > 1e-10:
            raise UsageError(
                f"test function {w.name!r} with k >= 1 has g(0) = {g0:.3e}, expected 0")


def default_battery() -> list[TestFunction]:
    """The fixed 16-member battery: four named radial shapes crossed with
    angular modes k = 0..3; the k >= 1 members carry an extra factor r so
    that g(0) = 0."""
    pi = np.pi
    bases = [
        ("sin_pi_r", lambda r: np.sin(pi * r), lambda r: pi * np.cos(pi * r)),
        ("r_one_minus_r", lambda r: r * (1.0 - r), lambda r: 1.0 - 2.0 * r),
        ("sin_2pi_r", lambda r: np.sin(2 * pi * r), lambda r: 2 * pi * np.cos(2 * pi * r)),
        ("r2_one_minus_r", lambda r: r**2 * (1.0 - r), lambda r: 2.0 * r - 3.0 * r**2),
    ]
    battery = []
    for name, g, dg in bases:
        for k in range(4):
            if k == 0:
                battery.append(TestFunction(name=name, angular_mode=0, g=g, dg=dg))
            else:
                battery.append(TestFunction(
                    name=name, angular_mode=k,
                    g=(lambda r, g=g: r * g(r)),
                    dg=(lambda r, g=g, dg=dg: g(r) + r * dg(r)),
                ))
    return battery


def first_nodal_truncation(profile: RadialProfile) -> TestFunction:
    """The profile's own restriction to its first nodal set, extended by 0.

    A classical negative direction for the quadratic form: since the
    restriction solves the equation on its nodal set, Q evaluates to
    (1 - p) * p int r^(1+alpha) |u|^(p+1) < 0 for p > 1.
    """
    z1 = float(profile.nodal_radii[0])

    def g(r):
        r = np.asarray(r, dtype=float)
        u, _ = evaluate_profile(profile, r)
        return np.where(r < z1, u, 0.0)

    def dg(r):
        r = np.asarray(r, dtype=float)
        _, du = evaluate_profile(profile, r)
        return np.where(r < z1, du, 0.0)

    return TestFunction(name="first_nodal_restriction", angular_mode=0, g=g, dg=dg)


def adaptive_quadrature(
    f: Callable,
    breakpoints,
    rel_tol: float = DEFAULT.quad_rel_tol,
    max_rounds: int = 60,
) -> float:
    """Adaptive Simpson integration over [breakpoints[0], breakpoints[-1]].

    Classic bisection-based adaptive Simpson with Richardson correction,
    processed as a worklist so the integrand is always evaluated on batched
    arrays.  Intervals are accepted when the two-level Simpson discrepancy
    is below 15x their tolerance share; tolerances halve with each split.
    Raises NonConvergenceError if the worklist fails to drain.
    """
    bp = np.asarray(breakpoints, dtype=float)
    if bp.size < 2 or np.any(np.diff(bp) <= 0):
        raise UsageError("breakpoints must be strictly increasing with >= 2 entries")

    a = bp[:-1].copy()
    b = bp[1:].copy()
    m = 0.5 * (a + b)
    fa = np.asarray(f(a), dtype=float)
    fm = np.asarray(f(m), dtype=float)
    fb = np.asarray(f(b), dtype=float)
    s = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    rough = float(np.sum(s))
    tol = np.full(a.shape, rel_tol * (1.0 + abs(rough)) / a.size)
    tol_floor = 1e-17 * (1.0 + abs(rough))

    total = 0.0
    for _ in range(max_rounds):
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        fv = np.asarray(f(np.concatenate([lm, rm])), dtype=float)
        flm, frm = fv[: a.size], fv[a.size:]
        sl = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        sr = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        err = sl + sr - s
        done = (np.abs(err) <= 15.0 * tol) | ((b - a) < 1e-14)
        total += float(np.sum((sl + sr + err / 15.0)[done]))
        if np.all(done):
            return total
        keep = ~done
        half_tol = np.maximum(0.5 * tol[keep], tol_floor)
        a = np.concatenate([a[keep], m[keep]])
        b = np.concatenate([m[keep], b[keep]])
        fa = np.concatenate([fa[keep], fm[keep]])
        fb = np.concatenate([fm[keep], fb[keep]])
        m = np.concatenate([lm[keep], rm[keep]])
        fm = np.concatenate([flm[keep], frm[keep]])
        s = np.concatenate([sl[keep], sr[keep]])
        tol = np.concatenate([half_tol, half_tol])
        if a.size > 1_000_000:
            break
    raise NonConvergenceError(
        "adaptive quadrature failed to converge",
        {"pending_intervals": int(a.size), "rel_tol": rel_tol},
    )


def _form_breakpoints(profile: RadialProfile | None) -> np.ndarray:
    pts = [_QUAD_INSET]
    if profile is not None:
        pts.extend(float(z) for z in profile.nodal_radii[:-1] if z > _QUAD_INSET)
    pts.append(1.0)
    return np.unique(np.asarray(pts))


def _angular_constant(k: int) -> float:
    return 2.0 * np.pi if k == 0 else np.pi


def quadratic_form(
    profile: RadialProfile,
    w: TestFunction,
    settings: Settings = DEFAULT,
) -> float:
    """The quadratic form of the linearization at ``profile``, at w.

    Angular reduction brings it to a 1-D integral over [0, 1] with weight
    r, evaluated by adaptive quadrature.  The nodal radii are forced
    breakpoints: |u|^(p-1) loses smoothness at the zeros of u whenever
    p < 3.
    """
    _check_test_function(w)
    alpha = profile.params.alpha
    p = profile.params.p
    k = w.angular_mode
    k2 = float(k * k)

    def integrand(r):
        g = w.g(r)
        dg = w.dg(r)
        u, _ = evaluate_profile(profile, r)
        val = (dg * dg) * r - p * r ** (1.0 + alpha) * np.abs(u) ** (p - 1.0) * (g * g)
        if k2:
            val = val + k2 * (g * g) / r
        return val

    return _angular_constant(k) * adaptive_quadrature(
        integrand, _form_breakpoints(profile), settings.quad_rel_tol)


def dirichlet_energy(w: TestFunction, settings: Settings = DEFAULT) -> float:
    """The Dirichlet energy of w = g(r) cos(k theta) over the unit disk."""
    _check_test_function(w)
    k2 = float(w.angular_mode**2)

    def integrand(r):
        dg = w.dg(r)
        val = (dg * dg) * r
        if k2:
            g = w.g(r)
            val = val + k2 * (g * g) / r
        return val

    return _angular_constant(w.angular_mode) * adaptive_quadrature(
        integrand, _form_breakpoints(None), settings.quad_rel_tol)


def transform_solution(
    profile: RadialProfile,
    beta: float,
    settings: Settings = DEFAULT,
) -> RadialProfile:
    """Map a nodal solution with exponent alpha to the one with exponent beta.

    Exact correspondence: with kappa = (beta+2)/(alpha+2),

        u_beta(s) = kappa^(2/(p-1)) * u_alpha(s^kappa),

    nodal radii map as z -> z^(1/kappa), and the nodal count is preserved.
    The result is resampled on a fresh grid and validated like any computed
    profile; a residual failure signals interpolation inaccuracy.
    """
    if not (beta >= 0.0 and math.isfinite(beta)):
        raise UsageError(f"beta must be finite and >= 0, got {beta}")
    alpha = profile.params.alpha
    p = profile.params.p
    kappa = (beta + 2.0) / (alpha + 2.0)
    amp = kappa ** (2.0 / (p - 1.0))

    nodal = profile.nodal_radii ** (1.0 / kappa)
    nodal[-1] = 1.0
    grid = _output_grid(nodal, settings)

    mapped = grid**kappa
    u_a, du_a = evaluate_profile(profile, mapped)
    u_new = amp * u_a
    du_new = np.empty_like(u_new)
    du_new[0] = 0.0  # exact: u' vanishes at the origin for every exponent
    du_new[1:] = amp * kappa * grid[1:] ** (kappa - 1.0) * du_a[1:]

    new = RadialProfile(
        params=HenonParams(beta, p, profile.params.n_nodal),
        d=amp * profile.d,
        grid=grid,
        u=u_new,
        du=du_new,
        nodal_radii=nodal,
        tolerances=dict(profile.tolerances),
    )
    validate_profile(new, settings)
    return new


@dataclass(frozen=True)
class ComparisonRow:
    """One battery member's two-sided form comparison."""

    g_name: str
    k: int
    Q_alpha: float
    Q_beta_of_wk: float
    kappa: float
    slack: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "g_name": self.g_name,
            "k": self.k,
            "Q_alpha": self.Q_alpha,
            "Q_beta_of_wk": self.Q_beta_of_wk,
            "kappa": self.kappa,
            "slack": self.slack,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class ComparisonReport:
    """Battery-wide comparison of Q_beta(w_kappa) against kappa * Q_alpha(w)."""

    alpha: float
    beta: float
    kappa: float
    rows: tuple

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "kappa": self.kappa,
            "pass": self.passed,
            "rows": [row.to_dict() for row in self.rows],
        }


def verify_form_comparison(
    profile_alpha: RadialProfile,
    beta: float,
    battery: list[TestFunction] | None = None,
    settings: Settings = DEFAULT,
) -> ComparisonReport:
    """Check Q_beta(w_kappa) <= kappa * Q_alpha(w) over a battery.

    Requires beta >= alpha.  Each side is computed by its own quadrature:
    the left on the transformed profile with the composed test function,
    the right on the input profile.  For radial members (k = 0) the two
    sides must agree within tolerance; for k >= 1 the inequality must hold
    with slack bounded below by -tolerance.  Tolerance per member is
    form_tol * (1 + |Q_alpha(w)|).
    """
    alpha = profile_alpha.params.alpha
    if beta < alpha - 1e-12:
        raise UsageError(
            f"the comparison requires beta >= alpha, got beta={beta}, alpha={alpha}")
    if battery is None:
        battery = default_battery()
    kappa = (beta + 2.0) / (alpha + 2.0)
    if abs(kappa - 1.0) < 1e-14:
        profile_beta = profile_alpha
    else:
        profile_beta = transform_solution(profile_alpha, beta, settings)

    rows = []
    for w in battery:
        q_a = quadratic_form(profile_alpha, w, settings)
        w_k = w.compose_radial(kappa)
        q_b = quadratic_form(profile_beta, w_k, settings)
        tol = settings.form_tol * (1.0 + abs(q_a))
        slack = kappa * q_a - q_b
        ok = slack >= -tol
        if w.angular_mode == 0:
            ok = abs(slack) <= tol
        rows.append(ComparisonRow(
            g_name=w.name, k=w.angular_mode, Q_alpha=q_a, Q_beta_of_wk=q_b,
            kappa=kappa, slack=slack, passed=bool(ok)))
    return ComparisonReport(alpha=alpha, beta=beta, kappa=kappa, rows=tuple(rows))
