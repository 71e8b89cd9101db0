"""Tests for serialization (canonical JSON, CSV) and the command line tool.

Round trips must be bit-for-bit: the canonical emitter writes floats with 17
significant digits, which is lossless for IEEE doubles, and keeps insertion
order, so saving a loaded document reproduces the original bytes.  The CLI
tests exercise every exit code: 0 success, 1 failed mathematical assertion,
2 non-convergence, 3 bad usage.
"""

import json

import numpy as np
import pytest

import henon_morse.cli as cli
from henon_morse import (
    DEFAULT,
    BoundCheck,
    HenonParams,
    SchemaError,
    UsageError,
    assemble_morse,
    build_schrodinger,
    check_lower_bounds,
    negative_spectrum,
    solve_nodal,
)
from henon_morse.io import (
    dumps_canonical,
    load_json,
    load_morse,
    load_profile,
    load_spectrum,
    morse_document,
    profile_document,
    save_json,
    spectrum_document,
    sweep_csv_text,
)


@pytest.fixture(scope="module")
def profile_031():
    return solve_nodal(HenonParams(alpha=0.0, p=3.0, n_nodal=1), DEFAULT)


@pytest.fixture(scope="module")
def profile_032():
    return solve_nodal(HenonParams(alpha=0.0, p=3.0, n_nodal=2), DEFAULT)


class TestCanonicalJson:
    def test_floats_keep_17_significant_digits(self):
        values = [0.1, 1.0 / 3.0, 2.0**-52, 6.02e23, -14.770022613174959]
        text = dumps_canonical(values)
        assert json.loads(text) == values

    def test_negative_zero_survives(self):
        text = dumps_canonical([-0.0])
        assert text == "[-0.0]"
        back = json.loads(text)[0]
        assert back == 0.0 and np.signbit(back)

    def test_floats_never_collapse_to_ints(self):
        # 2.0 must emit a token json reads back as float, or a round trip
        # would silently change the type of every whole-valued float
        assert dumps_canonical(2.0) == "2.0"
        assert dumps_canonical(1e30) == "1e+30"
        assert isinstance(json.loads(dumps_canonical(1e30)), float)

    def test_ints_stay_ints(self):
        assert dumps_canonical({"m": 8}) == '{"m": 8}'
        assert isinstance(json.loads(dumps_canonical(8)), int)

    def test_insertion_order_is_kept(self):
        doc = {"z": 1, "a": 2}
        assert dumps_canonical(doc) == '{"z": 1, "a": 2}'

    def test_arrays_serialize_as_lists(self):
        assert dumps_canonical(np.array([1.5, 2.5])) == "[1.5, 2.5]"

    @pytest.mark.parametrize("bad", [float("nan"), float("inf")])
    def test_non_finite_rejected(self, bad):
        with pytest.raises(SchemaError):
            dumps_canonical({"x": bad})

    def test_non_string_keys_rejected(self):
        with pytest.raises(SchemaError):
            dumps_canonical({1: "x"})

    def test_unsupported_type_rejected(self):
        with pytest.raises(SchemaError):
            dumps_canonical({"x": object()})


class TestProfileRoundTrip:
    def test_bit_for_bit(self, profile_031, tmp_path):
        path = tmp_path / "profile.json"
        save_json(profile_document(profile_031), path)
        loaded = load_profile(path)
        assert loaded.grid.tobytes() == profile_031.grid.tobytes()
        assert loaded.u.tobytes() == profile_031.u.tobytes()
        assert loaded.du.tobytes() == profile_031.du.tobytes()
        assert loaded.nodal_radii.tobytes() == profile_031.nodal_radii.tobytes()
        assert loaded.d == profile_031.d
        # saving the loaded profile reproduces the original file exactly
        path2 = tmp_path / "profile2.json"
        save_json(profile_document(loaded), path2)
        assert path.read_bytes() == path2.read_bytes()

    def test_missing_field_is_named(self, profile_031, tmp_path):
        doc = profile_document(profile_031)
        doc.pop("nodal_radii")
        path = tmp_path / "bad.json"
        save_json(doc, path)
        with pytest.raises(SchemaError, match="nodal_radii"):
            load_profile(path)

    def test_length_mismatch_rejected(self, profile_031, tmp_path):
        doc = profile_document(profile_031)
        doc["u"] = list(doc["u"])[:-1]
        path = tmp_path / "bad.json"
        save_json(doc, path)
        with pytest.raises(SchemaError):
            load_profile(path)

    def test_wrong_nodal_count_rejected(self, profile_031, tmp_path):
        doc = profile_document(profile_031)
        doc["n"] = 2
        path = tmp_path / "bad.json"
        save_json(doc, path)
        with pytest.raises(SchemaError):
            load_profile(path)


class TestSpectrumRoundTrip:
    def test_exact_keys_and_round_trip(self, profile_032, tmp_path):
        spectrum = negative_spectrum(build_schrodinger(profile_032), DEFAULT)
        doc = spectrum_document(spectrum)
        assert list(doc) == ["lambdas", "T", "M", "eig_tol"]
        path = tmp_path / "spectrum.json"
        save_json(doc, path)
        loaded = load_spectrum(path)
        assert loaded.lambdas.tobytes() == spectrum.lambdas.tobytes()
        assert (loaded.T, loaded.M, loaded.eig_tol) == (
            spectrum.T, spectrum.M, spectrum.eig_tol)


class TestMorseRoundTrip:
    def test_document_and_round_trip(self, profile_032, tmp_path):
        report = assemble_morse(profile_032, DEFAULT)
        bounds = check_lower_bounds(report, report)
        doc = morse_document(report, bounds)
        assert doc["m_total"] == 8 and doc["route_b_total"] == 8
        assert doc["angular_counts"] == [[1, 2, 3], []]
        assert all(row["pass"] for row in doc["bounds"])
        path = tmp_path / "morse.json"
        save_json(doc, path)
        loaded = load_morse(path)
        assert loaded["m_total"] == 8
        path2 = tmp_path / "morse2.json"
        save_json(loaded, path2)
        assert path.read_bytes() == path2.read_bytes()

    def test_inconsistent_total_rejected(self, profile_032, tmp_path):
        report = assemble_morse(profile_032, DEFAULT)
        doc = morse_document(report, check_lower_bounds(report, report))
        doc["m_total"] = doc["m_total"] + 1
        path = tmp_path / "bad.json"
        save_json(doc, path)
        with pytest.raises(SchemaError):
            load_morse(path)


class TestSweepCsv:
    ROW = {"alpha": 0.0, "p": 3.0, "n": 2, "m_rad": 2, "m_total": 8,
           "lambdas": [-14.770022613174959, -0.9079707000257039],
           "bounds_pass": True}

    def test_header_and_values(self):
        text = sweep_csv_text([self.ROW])
        lines = text.splitlines()
        assert lines[0] == "alpha,p,n,m_rad,m_total,lambda_1,lambda_2,bounds_pass"
        assert lines[1].startswith("0.0,3.0,2,2,8,-14.770022613174959,")
        assert lines[1].endswith(",true")

    def test_unix_line_endings(self):
        text = sweep_csv_text([self.ROW])
        assert "\r" not in text and text.endswith("\n")

    def test_inconsistent_lambda_count_rejected(self):
        other = dict(self.ROW, lambdas=[-1.0])
        with pytest.raises(SchemaError):
            sweep_csv_text([self.ROW, other])

    def test_empty_rejected(self):
        with pytest.raises(SchemaError):
            sweep_csv_text([])


class TestAlphaSpecParsing:
    def test_range_is_inclusive(self):
        assert cli._parse_alphas("0:2:0.5") == [0.0, 0.5, 1.0, 1.5, 2.0]

    def test_comma_list_sorted_deduplicated(self):
        assert cli._parse_alphas("2,0,1,1") == [0.0, 1.0, 2.0]

    @pytest.mark.parametrize("bad", ["", "1:0:1", "0:1:0", "0:1", "a,b", "-1,2"])
    def test_bad_specs_rejected(self, bad):
        with pytest.raises(UsageError):
            cli._parse_alphas(bad)


class TestCliExitCodes:
    def test_solve_writes_loadable_profile(self, tmp_path, capsys):
        out = tmp_path / "p.json"
        code = cli.main(["solve", "--alpha", "0", "--p", "3", "--nodes", "1",
                         "--out", str(out)])
        assert code == 0
        loaded = load_profile(out)
        assert loaded.params.n_nodal == 1

    def test_solve_stdout_is_canonical_json(self, capsys):
        code = cli.main(["solve", "--alpha", "0", "--p", "3", "--nodes", "1"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["n"] == 1 and doc["alpha"] == 0.0

    def test_missing_argument_is_usage(self, capsys):
        code = cli.main(["solve", "--alpha", "0", "--p", "3"])
        assert code == 3
        diag = json.loads(capsys.readouterr().err)
        assert diag["error"] == "UsageError"

    def test_invalid_parameter_is_usage(self, capsys):
        code = cli.main(["solve", "--alpha", "-1", "--p", "3", "--nodes", "1"])
        assert code == 3
        assert json.loads(capsys.readouterr().err)["error"] == "UsageError"

    def test_impossible_tolerance_is_non_convergence(self, capsys):
        code = cli.main(["solve", "--alpha", "0", "--p", "3", "--nodes", "1",
                         "--boundary-tol", "1e-30"])
        assert code == 2
        diag = json.loads(capsys.readouterr().err)
        assert diag["error"] == "NonConvergenceError"
        assert "context" in diag

    def test_failed_bound_is_verification_failure(self, tmp_path, capsys,
                                                  monkeypatch):
        # force a failing bound: the report must still be written first
        def failing_bounds(report, companion=None):
            return [BoundCheck(name="radial_count", value=report.m_total,
                               required=report.m_total + 1, satisfied=False,
                               margin=-1)]

        monkeypatch.setattr(cli, "check_lower_bounds", failing_bounds)
        out = tmp_path / "m.json"
        code = cli.main(["morse", "--alpha", "0", "--p", "3", "--nodes", "1",
                         "--out", str(out)])
        assert code == 1
        assert out.exists(), "artifact must be written before the gate raises"
        diag = json.loads(capsys.readouterr().err)
        assert diag["error"] == "VerificationError"
        assert diag["context"]["failing"] == ["radial_count"]

    def test_settings_flag_reaches_solver(self, capsys):
        code = cli.main(["spectrum", "--alpha", "0", "--p", "3", "--nodes",
                         "1", "--eig-tol", "1e-6"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["eig_tol"] == 1e-6


class TestCliSweep:
    def test_artifacts_and_jobs_determinism(self, tmp_path, capsys):
        csv1, csv2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
        json1, json2 = tmp_path / "s1.json", tmp_path / "s2.json"
        assert cli.main(["sweep", "--p", "3", "--nodes", "1",
                         "--alphas", "0,1,2", "--csv", str(csv1),
                         "--out", str(json1)]) == 0
        assert cli.main(["sweep", "--p", "3", "--nodes", "1",
                         "--alphas", "0,1,2", "--csv", str(csv2),
                         "--out", str(json2), "--jobs", "2"]) == 0
        assert csv1.read_bytes() == csv2.read_bytes()
        assert json1.read_bytes() == json2.read_bytes()
        header = csv1.read_text().splitlines()[0]
        assert header == "alpha,p,n,m_rad,m_total,lambda_1,bounds_pass"
        doc = load_json(json1)
        assert doc["monotone"] is True
        assert [t["nondecreasing"] for t in doc["transitions"]] == [True, True]

    def test_single_alpha_is_usage_error(self, tmp_path, capsys):
        code = cli.main(["sweep", "--p", "3", "--nodes", "1",
                         "--alphas", "1", "--csv", str(tmp_path / "s.csv")])
        assert code == 3

    def test_failing_sweep_still_writes_csv(self, tmp_path, capsys,
                                            monkeypatch):
        def failing_bounds(report, companion=None):
            return [BoundCheck(name="radial_count", value=0, required=1,
                               satisfied=False, margin=-1)]

        monkeypatch.setattr(cli, "check_lower_bounds", failing_bounds)
        csv = tmp_path / "s.csv"
        code = cli.main(["sweep", "--p", "3", "--nodes", "1",
                         "--alphas", "0,1", "--csv", str(csv)])
        assert code == 1
        assert csv.exists()
        rows = csv.read_text().splitlines()
        assert len(rows) == 3 and rows[1].endswith("false")


class TestCliVerify:
    def test_quick_battery_passes(self, tmp_path, capsys):
        out = tmp_path / "battery.json"
        code = cli.main(["verify", "--grid", "quick", "--out", str(out)])
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        section_lines = [ln for ln in lines
                         if ln.startswith("[gate]") or ln.startswith("[info]")]
        assert len(section_lines) == 9
        assert all(": PASS" in ln for ln in section_lines)
        assert lines[-1].startswith("battery: PASS")
        doc = load_json(out)
        assert doc["pass"] is True
        assert [s["criterion"] for s in doc["sections"]] == list(range(1, 10))

    def test_unknown_grid_is_usage(self, capsys):
        assert cli.main(["verify", "--grid", "bogus"]) == 3
