"""The verification battery: every headline property checked on one grid.

``run_battery`` solves the nodal problem across a parameter grid and
evaluates nine sections, each reducing to rows of integer identities or
toleranced comparisons:

1. radial_identity          m_rad == n at every grid point
2. monotonicity             alpha -> m_total nondecreasing at fixed (p, n)
3. two_route                decomposition total == r-coordinate FEM total
4. transform_correspondence profile mapped from alpha=0 matches the direct
                            solve (sup-norm), with identical index integers
5. eigenvalue_scaling       even alpha: lambda_j = ((alpha+2)/2)^2 lambda_j(0)
6. form_comparison          quadratic-form inequality/identity on a test
                            function battery for alpha <= beta pairs
7. lower_bounds             named integer lower bounds for m_total
8. square_well              exactly solvable spectral validation case
9. large_exponent           observational probe rows for growing p; the
                            expected asymptotic gap is logged, not gated

Sections 1-8 gate the battery verdict; section 9 records observations and
gates only on the structural facts (the gap is even and >= 2).  The same
battery backs the command-line ``verify`` subcommand and the acceptance
test suite, so the two never drift apart.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
import math
import time

import numpy as np

from .config import DEFAULT, Settings
from .errors import UsageError
from .morse import assemble_morse, check_lower_bounds, large_exponent_probe
from .radial import HenonParams, evaluate_profile, solve_nodal
from .spectrum import SchrodingerProblem, fd_negative_eigenvalues, negative_spectrum
from .transform import transform_solution, verify_form_comparison

__all__ = ["GRIDS", "SectionResult", "BatterySummary", "run_battery"]

# grid name -> (alphas, ps, ns)
GRIDS = {
    "default": ((0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0), (2.0, 3.0, 5.0), (1, 2, 3)),
    "quick": ((0.0, 1.0, 2.0), (2.0, 3.0), (1, 2)),
}

# alpha values whose quadratic forms are compared pairwise (criterion of
# section 6); restricted to what the active grid actually contains.
_FORM_ALPHAS = (0.0, 1.0, 2.0, 4.0)
_FORM_P = 3.0
_FORM_N = 2

_SCALING_ALPHAS = (2.0, 4.0)
_SUP_ERROR_TOL = 1e-6
_SCALING_RTOL = 1e-4
_PROBE_PS = (10.0, 20.0, 50.0)
_PROBE_EXPECTED_GAP = 10

_SQUARE_WELL_EXACT = (-4.0, -1.0)
_SQUARE_WELL_RAW_TOL = 1e-6


@dataclass(frozen=True)
class SectionResult:
    name: str
    criterion: int
    gating: bool
    passed: bool
    summary: str
    rows: tuple

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "criterion": self.criterion,
            "gating": self.gating,
            "pass": self.passed,
            "summary": self.summary,
            "rows": list(self.rows),
        }


@dataclass(frozen=True)
class BatterySummary:
    grid_name: str
    sections: tuple
    elapsed_seconds: float

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.sections if s.gating)

    def section(self, name: str) -> SectionResult:
        for s in self.sections:
            if s.name == name:
                return s
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "grid": self.grid_name,
            "pass": self.passed,
            "elapsed_seconds": self.elapsed_seconds,
            "sections": [s.to_dict() for s in self.sections],
        }


def _companion_task(args):
    (p, n), settings = args
    profile = solve_nodal(HenonParams(alpha=0.0, p=p, n_nodal=n), settings)
    return (p, n), profile, assemble_morse(profile, settings)


def _point_task(args):
    (alpha, p, n), companion_profile, companion_report, settings = args
    if alpha == 0.0:
        profile, report = companion_profile, companion_report
    else:
        profile = solve_nodal(HenonParams(alpha=alpha, p=p, n_nodal=n), settings)
        report = assemble_morse(profile, settings)

    transformed = transform_solution(companion_profile, alpha, settings)
    rs = np.linspace(0.0, 1.0, 4097)
    u_direct, _ = evaluate_profile(profile, rs)
    u_mapped, _ = evaluate_profile(transformed, rs)
    sup_rel = float(np.max(np.abs(u_mapped - u_direct))
                    / np.max(np.abs(u_direct)))
    report_t = assemble_morse(transformed, settings)
    identical = (
        report_t.m_rad == report.m_rad
        and report_t.k_max == report.k_max
        and report_t.mode_counts_per_k == report.mode_counts_per_k
        and report_t.negative_modes == report.negative_modes
        and report_t.m_total == report.m_total
    )
    return (alpha, p, n), {
        "profile": profile,
        "report": report,
        "sup_rel_error": sup_rel,
        "transform_reports_identical": identical,
        "transformed_m_total": report_t.m_total,
    }


def _run_tasks(fn, tasks, jobs):
    if jobs is None or jobs <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def run_battery(grid: str = "default", settings: Settings = DEFAULT,
                jobs: int | None = None) -> BatterySummary:
    """Run every section on the named grid and return the summary."""
    if grid not in GRIDS:
        raise UsageError(f"unknown grid '{grid}'",
                         {"grid": grid, "known": sorted(GRIDS)})
    alphas, ps, ns = GRIDS[grid]
    started = time.perf_counter()

    companion_results = _run_tasks(
        _companion_task, [((p, n), settings) for p in ps for n in ns], jobs)
    companions = {key: (prof, rep) for key, prof, rep in companion_results}

    point_tasks = [((a, p, n), companions[(p, n)][0], companions[(p, n)][1],
                    settings)
                   for a in alphas for p in ps for n in ns]
    points = dict(_run_tasks(_point_task, point_tasks, jobs))

    sections = (
        _section_radial_identity(points),
        _section_monotonicity(points, alphas, ps, ns),
        _section_two_route(points),
        _section_transform(points),
        _section_scaling(points, alphas, ps, ns),
        _section_forms(points, alphas, settings),
        _section_lower_bounds(points, companions),
        _section_square_well(settings),
        _section_probe(settings),
    )
    elapsed = time.perf_counter() - started
    return BatterySummary(grid_name=grid, sections=sections,
                          elapsed_seconds=elapsed)


def _section_radial_identity(points) -> SectionResult:
    rows = []
    for (alpha, p, n), data in sorted(points.items()):
        m_rad = data["report"].m_rad
        rows.append({"alpha": alpha, "p": p, "n": n, "m_rad": m_rad,
                     "pass": m_rad == n})
    passed = all(r["pass"] for r in rows)
    return SectionResult(
        name="radial_identity", criterion=1, gating=True, passed=passed,
        summary=f"m_rad == n at {sum(r['pass'] for r in rows)}/{len(rows)} grid points",
        rows=tuple(rows))


def _section_monotonicity(points, alphas, ps, ns) -> SectionResult:
    rows = []
    for p in ps:
        for n in ns:
            ms = [points[(a, p, n)]["report"].m_total for a in alphas]
            ok = all(b >= a for a, b in zip(ms, ms[1:]))
            rows.append({"p": p, "n": n, "alphas": list(alphas),
                         "m_totals": ms, "pass": ok})
    passed = all(r["pass"] for r in rows)
    return SectionResult(
        name="monotonicity", criterion=2, gating=True, passed=passed,
        summary=f"alpha -> m_total nondecreasing for {sum(r['pass'] for r in rows)}/{len(rows)} (p, n) pairs",
        rows=tuple(rows))


def _section_two_route(points) -> SectionResult:
    rows = []
    for (alpha, p, n), data in sorted(points.items()):
        rep = data["report"]
        ok = rep.cross_checked and rep.route_b_total == rep.m_total
        rows.append({"alpha": alpha, "p": p, "n": n, "m_total": rep.m_total,
                     "route_b_total": rep.route_b_total, "pass": ok})
    passed = all(r["pass"] for r in rows)
    return SectionResult(
        name="two_route", criterion=3, gating=True, passed=passed,
        summary=f"decomposition == FEM total at {sum(r['pass'] for r in rows)}/{len(rows)} grid points",
        rows=tuple(rows))


def _section_transform(points) -> SectionResult:
    rows = []
    for (alpha, p, n), data in sorted(points.items()):
        ok = (data["sup_rel_error"] <= _SUP_ERROR_TOL
              and data["transform_reports_identical"])
        rows.append({"alpha": alpha, "p": p, "n": n,
                     "sup_rel_error": data["sup_rel_error"],
                     "reports_identical": data["transform_reports_identical"],
                     "pass": ok})
    passed = all(r["pass"] for r in rows)
    worst = max(r["sup_rel_error"] for r in rows)
    return SectionResult(
        name="transform_correspondence", criterion=4, gating=True, passed=passed,
        summary=(f"mapped-vs-direct profiles agree at "
                 f"{sum(r['pass'] for r in rows)}/{len(rows)} points "
                 f"(worst sup-norm rel err {worst:.2e})"),
        rows=tuple(rows))


def _section_scaling(points, alphas, ps, ns) -> SectionResult:
    rows = []
    for alpha in _SCALING_ALPHAS:
        if alpha not in alphas:
            continue
        factor = ((alpha + 2.0) / 2.0) ** 2
        for p in ps:
            for n in ns:
                lam = points[(alpha, p, n)]["report"].lambdas
                lam0 = points[(0.0, p, n)]["report"].lambdas
                if lam.size != lam0.size:
                    rows.append({"alpha": alpha, "p": p, "n": n,
                                 "max_rel_error": math.inf, "pass": False})
                    continue
                rel = float(np.max(np.abs(lam - factor * lam0)
                                   / np.abs(factor * lam0)))
                rows.append({"alpha": alpha, "p": p, "n": n, "factor": factor,
                             "max_rel_error": rel,
                             "pass": rel <= _SCALING_RTOL})
    passed = all(r["pass"] for r in rows)
    worst = max((r["max_rel_error"] for r in rows), default=0.0)
    return SectionResult(
        name="eigenvalue_scaling", criterion=5, gating=True, passed=passed,
        summary=(f"lambda scaling holds at {sum(r['pass'] for r in rows)}/"
                 f"{len(rows)} even-alpha points (worst rel err {worst:.2e})"),
        rows=tuple(rows))


def _section_forms(points, alphas, settings) -> SectionResult:
    form_alphas = [a for a in _FORM_ALPHAS if a in alphas]
    rows = []
    for a in form_alphas:
        base = points[(a, _FORM_P, _FORM_N)]["profile"]
        for b in form_alphas:
            if b < a:
                continue
            comparison = verify_form_comparison(base, b, settings=settings)
            for r in comparison.rows:
                rows.append({"alpha": a, "beta": b, "g_name": r.g_name,
                             "k": r.k, "slack": r.slack, "pass": r.passed})
    passed = all(r["pass"] for r in rows)
    return SectionResult(
        name="form_comparison", criterion=6, gating=True, passed=passed,
        summary=(f"quadratic-form comparison holds for "
                 f"{sum(r['pass'] for r in rows)}/{len(rows)} "
                 f"(pair, test function) combinations at p={_FORM_P:g}, n={_FORM_N}"),
        rows=tuple(rows))


def _section_lower_bounds(points, companions) -> SectionResult:
    rows = []
    for (alpha, p, n), data in sorted(points.items()):
        checks = check_lower_bounds(data["report"], companions[(p, n)][1])
        for c in checks:
            rows.append({"alpha": alpha, "p": p, "n": n, "name": c.name,
                         "actual": c.value, "required": c.required,
                         "pass": c.satisfied})
    passed = all(r["pass"] for r in rows)
    return SectionResult(
        name="lower_bounds", criterion=7, gating=True, passed=passed,
        summary=f"{sum(r['pass'] for r in rows)}/{len(rows)} bound instances hold",
        rows=tuple(rows))


def _section_square_well(settings) -> SectionResult:
    well = SchrodingerProblem.from_potential(
        math.pi, 512, lambda t: np.full_like(np.asarray(t, float), -5.0))
    exact = np.array(_SQUARE_WELL_EXACT)
    rows = []

    spec = negative_spectrum(well, settings)
    count_ok = spec.lambdas.size == 2
    rows.append({"check": "negative_eigenvalue_count",
                 "actual": int(spec.lambdas.size), "expected": 2,
                 "pass": count_ok})
    if count_ok:
        err = np.abs(spec.lambdas - exact)
        tol = settings.eig_tol * (1.0 + np.abs(exact))
        rows.append({"check": "extrapolated_values",
                     "errors": [float(e) for e in err],
                     "pass": bool(np.all(err <= tol))})

    errors = [np.abs(fd_negative_eigenvalues(well, M) - exact)
              for M in (512, 1024, 2048)]
    ratios = [prev / cur for prev, cur in zip(errors, errors[1:])]
    order_ok = all(np.all(r > 3.6) and np.all(r < 4.4) for r in ratios)
    rows.append({"check": "second_order_convergence",
                 "ratios": [[float(x) for x in r] for r in ratios],
                 "pass": order_ok})

    raw = fd_negative_eigenvalues(well, 8192)
    raw_err = np.abs(raw - exact) if raw.size == 2 else np.array([math.inf])
    rows.append({"check": "raw_accuracy_M8192",
                 "errors": [float(e) for e in raw_err],
                 "tolerance": _SQUARE_WELL_RAW_TOL,
                 "pass": bool(np.all(raw_err <= _SQUARE_WELL_RAW_TOL))})

    passed = all(r["pass"] for r in rows)
    return SectionResult(
        name="square_well", criterion=8, gating=True, passed=passed,
        summary=f"{sum(r['pass'] for r in rows)}/{len(rows)} square-well checks hold",
        rows=tuple(rows))


def _section_probe(settings) -> SectionResult:
    probe_rows = large_exponent_probe(_PROBE_PS, alpha=0.0, n=2,
                                      settings=settings)
    rows = []
    for row in probe_rows:
        rep = row["report"]
        gap = rep.m_total - rep.m_rad
        rows.append({
            "p": row["p"],
            "m_rad": rep.m_rad,
            "m_total": rep.m_total,
            "gap": gap,
            "gap_even": gap % 2 == 0,
            "gap_at_least_2": gap >= 2,
            "expected_large_p_gap": _PROBE_EXPECTED_GAP,
            "matches_expected": gap == _PROBE_EXPECTED_GAP,
            "pass": gap % 2 == 0 and gap >= 2,
        })
    passed = all(r["pass"] for r in rows)
    observed = ", ".join(f"p={r['p']:g}: gap={r['gap']}" for r in rows)
    return SectionResult(
        name="large_exponent", criterion=9, gating=False, passed=passed,
        summary=(f"observational gaps [{observed}] vs expected large-p gap "
                 f"{_PROBE_EXPECTED_GAP} (logged, non-gating)"),
        rows=tuple(rows))
