"""Tests for the Morse index assembly and the structural checks.

Frozen integers below follow from the frozen eigenvalues in
test_spectrum.py by pure arithmetic.  For alpha=0, p=3, two nodal domains
(lambda_1 = -14.77002261, lambda_2 = -0.9079707):

    k_max = ceil(sqrt(14.77...)) = 4;
    lambda_1 + k^2 < 0 for k = 1, 2, 3 and lambda_2 + k^2 > 0 for all k,
    so the counts per k are (1, 1, 1, 0) and m_total = 2 + 2 * 3 = 8.

For alpha=2 every eigenvalue is exactly 4x the alpha=0 one (the log
variable rescales), giving counts (2, 1, 1, 1, 1, 1, 1, 0) and m = 18.
"""

import json
import math

import numpy as np
import pytest

import henon_morse.morse as morse_mod
from henon_morse import (
    HenonParams,
    NonConvergenceError,
    TwoRouteError,
    UsageError,
    assemble_morse,
    check_lower_bounds,
    large_exponent_probe,
    monotonicity_sweep,
    solve_nodal,
)
from henon_morse.spectrum import RadialSpectrum


@pytest.fixture(scope="module")
def report_032():
    return assemble_morse(solve_nodal(HenonParams(alpha=0.0, p=3.0, n_nodal=2)))


@pytest.fixture(scope="module")
def report_232():
    return assemble_morse(solve_nodal(HenonParams(alpha=2.0, p=3.0, n_nodal=2)))


class TestAssembly:
    def test_known_index_unweighted(self, report_032):
        assert report_032.m_rad == 2
        assert report_032.k_max == 4
        assert report_032.mode_counts_per_k == (1, 1, 1, 0)
        assert report_032.negative_modes == ((1, 2, 3), ())
        assert report_032.m_total == 8
        assert report_032.route_b_total == 8
        assert report_032.cross_checked

    def test_known_index_even_weight(self, report_232):
        assert report_232.m_rad == 2
        assert report_232.mode_counts_per_k == (2, 1, 1, 1, 1, 1, 1, 0)
        assert report_232.m_total == 18

    def test_tabulations_are_transposes(self, report_032, report_232):
        for rep in (report_032, report_232):
            assert sum(rep.mode_counts_per_k) == sum(len(m) for m in rep.negative_modes)
            assert rep.m_total == rep.m_rad + 2 * sum(rep.mode_counts_per_k)
            assert rep.m_total == rep.route_b_total
            assert (rep.m_total - rep.m_rad) % 2 == 0

    def test_k_max_is_sharp(self, report_032, report_232):
        for rep in (report_032, report_232):
            assert rep.mode_counts_per_k[-1] == 0
            if rep.k_max >= 2:
                assert rep.mode_counts_per_k[-2] >= 1

    def test_report_serializes(self, report_032):
        payload = report_032.to_dict()
        text = json.dumps(payload)
        assert json.loads(text)["m_total"] == 8
        assert payload["angular_counts"] == [[1, 2, 3], []]
        assert payload["route_b_total"] == 8
        assert payload["n"] == 2

    def test_radial_route_mismatch_raises(self, monkeypatch):
        profile = solve_nodal(HenonParams(alpha=0.0, p=3.0, n_nodal=2))
        monkeypatch.setattr(morse_mod, "radial_morse_index",
                            lambda prof, settings=None: 7)
        with pytest.raises(TwoRouteError) as err:
            assemble_morse(profile)
        assert err.value.context["fem_route"] == 7

    def test_mode_route_mismatch_raises(self, monkeypatch):
        profile = solve_nodal(HenonParams(alpha=0.0, p=3.0, n_nodal=2))
        monkeypatch.setattr(morse_mod, "mode_negative_count",
                            lambda prof, k, settings=None: 0)
        with pytest.raises(TwoRouteError) as err:
            assemble_morse(profile)
        assert "decomposition" in err.value.context

    def test_threshold_tie_raises(self, monkeypatch):
        profile = solve_nodal(HenonParams(alpha=0.0, p=3.0, n_nodal=1))

        def fake_spectrum(problem, settings=None):
            eig_tol = settings.eig_tol if settings is not None else 1e-8
            return RadialSpectrum(
                lambdas=np.array([-4.0 - 1e-12, -1.5]),
                T=problem.T, M=problem.M, eig_tol=eig_tol)

        monkeypatch.setattr(morse_mod, "negative_spectrum", fake_spectrum)
        with pytest.raises(NonConvergenceError) as err:
            assemble_morse(profile)
        assert "threshold" in str(err.value)


class TestLowerBounds:
    def test_all_bounds_hold_with_companion(self, report_032, report_232):
        checks = check_lower_bounds(report_232, companion=report_032)
        names = [c.name for c in checks]
        assert names == [
            "radial_count", "nodal_gap", "autonomous_companion",
            "autonomous_gap", "sign_changing_minimum",
            "sign_changing_superlinear", "even_weight_minimum",
            "even_weight_superlinear",
        ]
        assert all(c.satisfied for c in checks)
        assert all(c.margin == c.value - c.required for c in checks)
        by_name = {c.name: c for c in checks}
        # alpha=2, n=2: floor(alpha/2) = 1, so the nodal gap requires
        # n + (n-1)(2*1+2) = 6 and the companion gap n + 6*(1+1) = 14.
        assert by_name["nodal_gap"].required == 6
        assert by_name["autonomous_companion"].required == 4
        assert by_name["autonomous_gap"].required == 14
        assert by_name["even_weight_minimum"].required == 5
        assert by_name["even_weight_superlinear"].required == 6

    def test_unweighted_report_is_own_companion(self, report_032):
        checks = {c.name: c for c in check_lower_bounds(report_032)}
        assert checks["autonomous_companion"].value == report_032.m_total
        # alpha = 0: the companion gap bound collapses to m >= m_0, an equality
        assert checks["autonomous_gap"].required == report_032.m_total
        assert checks["autonomous_gap"].satisfied

    def test_ground_state_bounds(self):
        report = assemble_morse(solve_nodal(HenonParams(alpha=0.0, p=3.0, n_nodal=1)))
        assert report.m_total == 1
        checks = {c.name: c for c in check_lower_bounds(report)}
        assert set(checks) == {"radial_count", "nodal_gap",
                               "autonomous_companion", "autonomous_gap"}
        assert all(c.satisfied for c in checks.values())

    def test_companion_bounds_skipped_without_companion(self, report_232):
        names = {c.name for c in check_lower_bounds(report_232)}
        assert "autonomous_companion" not in names
        assert "autonomous_gap" not in names
        assert "radial_count" in names

    def test_companion_mismatch_rejected(self, report_032, report_232):
        with pytest.raises(UsageError):
            check_lower_bounds(report_032, companion=report_232)
        wrong_p = assemble_morse(solve_nodal(HenonParams(alpha=0.0, p=2.0, n_nodal=2)))
        with pytest.raises(UsageError):
            check_lower_bounds(report_232, companion=wrong_p)


class TestSweepAndProbe:
    def test_monotone_sweep(self):
        sweep = monotonicity_sweep([0.0, 1.0, 2.0], p=3.0, n=2)
        assert [r.m_total for r in sweep.reports] == [8, 14, 18]
        assert sweep.monotone
        assert len(sweep.transitions) == 2
        assert all(row[4] for row in sweep.transitions)
        payload = json.dumps(sweep.to_dict())
        assert json.loads(payload)["monotone"] is True

    def test_sweep_sorts_alphas(self):
        sweep = monotonicity_sweep([2.0, 0.0], p=3.0, n=2)
        assert [r.params.alpha for r in sweep.reports] == [0.0, 2.0]

    def test_sweep_needs_two_points(self):
        with pytest.raises(UsageError):
            monotonicity_sweep([1.0], p=3.0, n=2)

    def test_probe_is_single_route_and_consistent(self):
        rows = large_exponent_probe([5.0, 15.0], alpha=0.0, n=2)
        assert [row["report"].m_total for row in rows] == [10, 12]
        for row in rows:
            rep = row["report"]
            assert not rep.cross_checked
            assert rep.route_b_total is None
            assert row["half_gap"] == (rep.m_total - rep.m_rad) // 2
            assert row["half_gap_even"] == (row["half_gap"] % 2 == 0)
            assert row["reaches_asymptotic_gap"] == (row["half_gap"] >= 2)
