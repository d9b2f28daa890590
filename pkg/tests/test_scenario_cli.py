import copy
import json
import math
import subprocess
import sys

import pytest

from nullgeo.errors import SchemaError, UnknownBuiltinError
from nullgeo.report import CheckReport, emit_report, report_from_dict
from nullgeo.runner import DEFAULT_TOLS, FAMILIES, run_checks
from nullgeo.scenario import apply_mutation, build_scenario, load_scenario


def sasakian_slice_doc():
    """Riemannian slice of the Sasakian-type R^5 structure: a valid almost
    contact metric ambient that is not nearly cosymplectic."""
    coords = ["x1", "x2", "y1", "y2", "z"]
    return {
        "schema_version": 1,
        "name": "sasakian-slice",
        "params": {},
        "ambient": {
            "dim": 5,
            "coords": coords,
            "metric": [
                ["1 + y1^2", "y1*y2", "0", "0", "-y1"],
                ["y1*y2", "1 + y2^2", "0", "0", "-y2"],
                ["0", "0", "1", "0", "0"],
                ["0", "0", "0", "1", "0"],
                ["-y1", "-y2", "0", "0", "1"],
            ],
            "signature": [0, 5],
        },
        "structure": {
            "phi": [
                ["0", "0", "-1", "0", "0"],
                ["0", "0", "0", "-1", "0"],
                ["1", "0", "0", "0", "0"],
                ["0", "1", "0", "0", "0"],
                ["0", "0", "-y1", "-y2", "0"],
            ],
            "xi": ["0", "0", "0", "0", "1"],
            "eta": ["-y1", "-y2", "0", "0", "1"],
        },
        "submanifold": {
            "params": ["a", "b"],
            "param_map": {"x1": "0", "x2": "0", "y1": "a", "y2": "0", "z": "b"},
            "frames": {
                "rad": [],
                "screen": [["0", "0", "1", "0", "0"], ["0", "0", "0", "0", "1"]],
                "ltr": [],
                "stransversal": [
                    ["0", "1", "0", "0", "0"],
                    ["0", "0", "0", "1", "0"],
                    ["1", "0", "0", "0", "y1"],
                ],
            },
        },
        "sampling": {"boxes": {"a": [-0.5, 0.5], "b": [-0.5, 0.5]}, "count": 3, "seed": 2},
    }


class TestLoadScenario:
    def test_builtin_loads_with_default_theta(self, builtin_doc):
        assert builtin_doc["name"] == "builtin:example-3.1"
        assert builtin_doc["params"]["theta"] == pytest.approx(math.pi / 4)
        assert builtin_doc["ambient"]["signature"] == [4, 7]

    def test_unknown_builtin(self):
        with pytest.raises(UnknownBuiltinError, match="no-such"):
            load_scenario("builtin:no-such")

    def test_missing_file(self, tmp_path):
        with pytest.raises(SchemaError, match="not found"):
            load_scenario(str(tmp_path / "nope.json"))

    def test_file_roundtrip(self, tmp_path, builtin_doc):
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps(builtin_doc))
        doc = load_scenario(str(path))
        assert doc["name"] == builtin_doc["name"]

    def test_missing_frames_ltr_names_path(self, builtin_doc, tmp_path):
        doc = copy.deepcopy(builtin_doc)
        del doc["submanifold"]["frames"]["ltr"]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(SchemaError) as exc:
            load_scenario(str(path))
        assert exc.value.path == "$.submanifold.frames.ltr"

    def test_bad_expression_reports_location(self, builtin_doc):
        doc = copy.deepcopy(builtin_doc)
        doc["ambient"]["metric"][0][1] = "x1 +* y2"
        with pytest.raises(SchemaError) as exc:
            build_scenario(doc)
        assert "$.ambient.metric[0]" in exc.value.path
        assert "offset" in str(exc.value)

    def test_signature_must_sum(self, builtin_doc):
        doc = copy.deepcopy(builtin_doc)
        doc["ambient"]["signature"] = [4, 6]
        with pytest.raises(SchemaError, match="signature"):
            build_scenario(doc)

    def test_qgcr_index_bounds(self, builtin_doc):
        doc = copy.deepcopy(builtin_doc)
        doc["submanifold"]["qgcr"]["d1"] = [0, 9]
        with pytest.raises(SchemaError, match="d1"):
            build_scenario(doc)

    def test_param_override_unknown_name(self, builtin_doc):
        with pytest.raises(SchemaError, match="undeclared"):
            build_scenario(builtin_doc, {"phi0": 1.0})


class TestRunChecks:
    def test_builtin_all_green(self, builtin_doc):
        rep = run_checks(builtin_doc, samples=4)
        assert rep.summary["failed"] == 0
        assert rep.verdicts["qgcr"] is True
        assert rep.verdicts["ascreen"] is True
        assert rep.verdicts["proper"] is True
        assert rep.verdicts["umbilical"] is True
        assert rep.verdicts["geodesic"] is False
        assert rep.verdicts["irrotational"] is True
        assert rep.verdicts["mixed_geodesic"] is True
        assert rep.verdicts["d_geodesic"] is True
        assert rep.derived["cbar"]["value"] == 0.0

    def test_selector_filters_families(self, builtin_doc):
        rep = run_checks(builtin_doc, selectors=["gw"], samples=2)
        assert rep.checks
        assert all(r.check_id.startswith("gw.") for r in rep.checks)

    def test_unknown_selector_rejected(self, builtin_doc):
        from nullgeo.errors import NullGeoError

        with pytest.raises(NullGeoError, match="unknown check families"):
            run_checks(builtin_doc, selectors=["nope"], samples=1)

    def test_no_dead_selectors(self, builtin_doc):
        # every advertised family emits at least one record on the builtin
        for family in FAMILIES:
            rep = run_checks(builtin_doc, selectors=[family], samples=1)
            assert rep.checks, family

    def test_every_default_tol_is_reachable(self, builtin_doc):
        rep = run_checks(builtin_doc, samples=2)
        seen = {r.check_id for r in rep.checks}
        dead = {cid for cid in DEFAULT_TOLS if cid not in seen}
        # checks that only fire on degenerate scenarios are allowed to stay
        # quiet on the builtin
        assert dead == set(), f"unreachable checks: {dead}"

    def test_mutation_flag_causes_failures(self, builtin_doc):
        doc = apply_mutation(builtin_doc, "phi:0,1,0.1")
        rep = run_checks(doc, samples=2)
        assert rep.summary["failed"] >= 1
        assert any(r.check_id.startswith("acms.") for r in rep.failed)

    def test_tol_override_by_family(self):
        # the sphere's gauss family carries genuinely nonzero finite-
        # difference residuals, so an absurd tolerance must fail it
        from .conftest import sphere_doc

        rep = run_checks(sphere_doc(), selectors=["gauss"], samples=1, tol_overrides={"gauss": 1e-30})
        assert any(r.check_id.startswith("gauss.") for r in rep.failed)
        # and a per-check override wins over the family default
        rep2 = run_checks(
            sphere_doc(), selectors=["gauss"], samples=1,
            tol_overrides={"gauss": 1e-30, "gauss.residual": 1.0, "gauss.rhs": 1.0, "gauss.lhs": 1.0},
        )
        assert not any(r.check_id.startswith("gauss.") for r in rep2.failed)

    def test_tol_scale_env(self, builtin_doc, monkeypatch):
        monkeypatch.setenv("NULLGEO_TOL_SCALE", "1e25")
        doc = apply_mutation(builtin_doc, "phi:0,1,0.1")
        rep = run_checks(doc, selectors=["acms"], samples=1)
        assert rep.summary["failed"] == 0
        monkeypatch.delenv("NULLGEO_TOL_SCALE")

    def test_param_override_changes_report(self, builtin_doc):
        rep = run_checks(builtin_doc, selectors=["frames"], samples=2, param_overrides={"theta": 0.9})
        assert rep.params["theta"] == 0.9
        assert rep.summary["failed"] == 0

    def test_structureless_scenario_skips_contact_families(self):
        from .conftest import sphere_doc

        rep = run_checks(sphere_doc(), samples=2)
        assert rep.summary["failed"] == 0
        skipped = {r.check_id for r in rep.checks if r.verdict == "skip"}
        assert "acms.structure" in skipped
        assert rep.verdicts["umbilical"] is True
        assert rep.verdicts["geodesic"] is False

    def test_errors_recorded_not_raised(self, builtin_doc):
        # a sampling box leaving the sqrt domain surfaces as a failed record
        doc = copy.deepcopy(builtin_doc)
        doc["sampling"]["boxes"]["x5"] = [-2.0, -1.0]
        from nullgeo.errors import EvalDomainError

        with pytest.raises(EvalDomainError):
            run_checks(doc, samples=2)

    def test_xi_tangent_scenario_notes_gcr(self):
        # xi tangent to M: the report carries the informational GCR note
        from .conftest import plane_slice_doc

        doc = plane_slice_doc()
        doc["submanifold"]["qgcr"] = {
            "d1": [], "d2": [], "d0": [0, 1], "phi_d2": [],
            "L": [], "S": [0], "phi_L": [], "phi_S": [],
        }
        rep = run_checks(doc, selectors=["qgcr"], samples=2)
        assert any("GCR type" in n for n in rep.derived.get("notes", []))

    def test_non_nearly_cosymplectic_scenario(self):
        # Sasakian-type ambient: structure axioms pass, the nearly
        # cosymplectic family fails, and the composition identities are
        # skipped with a reason rather than double-counted
        rep = run_checks(sasakian_slice_doc(), samples=2)
        assert all(not r.check_id.startswith("acms.") for r in rep.failed)
        assert any(r.check_id == "nearly-cosymplectic.residual" for r in rep.failed)
        skipped = {r.check_id for r in rep.checks if r.verdict == "skip"}
        assert "lemmas.compose1" in skipped and "lemmas.compose2" in skipped


class TestEmit:
    def test_json_roundtrip(self, builtin_doc):
        rep = run_checks(builtin_doc, samples=2)
        payload = emit_report(rep, "json")
        doc = json.loads(payload)
        again = report_from_dict(doc)
        assert emit_report(again, "json") == payload

    def test_byte_identical_reports(self, builtin_doc):
        a = emit_report(run_checks(builtin_doc, samples=3), "json")
        b = emit_report(run_checks(builtin_doc, samples=3), "json")
        assert a == b

    def test_text_has_one_line_per_failure(self, builtin_doc):
        doc = apply_mutation(builtin_doc, "metric:0,0,0.001")
        rep = run_checks(doc, samples=1)
        text = emit_report(rep, "text").decode()
        fail_lines = [ln for ln in text.splitlines() if ln.strip().startswith("FAIL")]
        assert len(fail_lines) == rep.summary["failed"]
        # worst-first ordering
        sev = [float(ln.split("residual")[1].split("tol")[0]) for ln in fail_lines[:2]]
        assert len(sev) < 2 or sev[0] >= 0

    def test_empty_report_valid(self):
        rep = CheckReport(scenario="empty", seed=0, samples=0, params={})
        doc = json.loads(emit_report(rep, "json"))
        assert doc["summary"] == {"total": 0, "passed": 0, "failed": 0, "skipped": 0}
        assert emit_report(rep, "text").decode().startswith("scenario: empty")

    def test_unknown_format(self):
        rep = CheckReport(scenario="x", seed=0, samples=0, params={})
        with pytest.raises(ValueError):
            emit_report(rep, "yaml")


CLI = [sys.executable, "-m", "nullgeo.cli"]


class TestCLI:
    def test_exit_zero_on_green(self):
        out = subprocess.run(
            CLI + ["check", "builtin:example-3.1", "--samples", "2", "--only", "frames,qgcr"],
            capture_output=True,
            text=True,
        )
        assert out.returncode == 0, out.stderr
        assert "verdicts:" in out.stdout

    def test_exit_one_on_failures(self):
        out = subprocess.run(
            CLI + ["check", "builtin:example-3.1", "--samples", "2", "--only", "acms", "--mutate", "phi:0,1,0.1"],
            capture_output=True,
            text=True,
        )
        assert out.returncode == 1
        assert "FAIL" in out.stdout

    def test_exit_two_on_load_error(self):
        out = subprocess.run(
            CLI + ["check", "builtin:missing"], capture_output=True, text=True
        )
        assert out.returncode == 2
        assert "error:" in out.stderr

    def test_json_output_file(self, tmp_path):
        target = tmp_path / "report.json"
        out = subprocess.run(
            CLI
            + [
                "check", "builtin:example-3.1", "--samples", "2", "--only", "frames",
                "--format", "json", "-o", str(target),
            ],
            capture_output=True,
            text=True,
        )
        assert out.returncode == 0
        doc = json.loads(target.read_text())
        assert doc["scenario"] == "builtin:example-3.1"
        assert doc["report_schema_version"] == 1

    def test_param_and_seed_flags(self):
        out = subprocess.run(
            CLI
            + [
                "check", "builtin:example-3.1", "--samples", "2", "--seed", "9",
                "--param", "theta=1.0", "--only", "frames",
            ],
            capture_output=True,
            text=True,
        )
        assert out.returncode == 0
        assert "theta=1.0" in out.stdout

    def test_tol_scale_env_in_cli(self):
        out = subprocess.run(
            CLI + ["check", "builtin:example-3.1", "--samples", "1", "--only", "acms", "--mutate", "phi:0,1,0.1"],
            capture_output=True,
            text=True,
            env={"NULLGEO_TOL_SCALE": "1e25", "PATH": "/usr/bin:/bin"},
        )
        assert out.returncode == 0, out.stderr
