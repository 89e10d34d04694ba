import json
from pathlib import Path

import numpy as np
import pytest
import yaml

from vacuumlab.cli import convergence_sweep, main, run_scenario
from vacuumlab.config import parse_scenario
from vacuumlab.diagnostics import derived_state
from vacuumlab.solutions import photon_wave, polarized_profile

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

PHOTON = {
    "solution": {"family": "photon_wave", "profile": {"kind": "polarized"}},
    "grid": {"lower": [-1.2, -1.2, -1.2], "upper": [1.2, 1.2, 1.2], "points": 17},
    "checks": ["system1"],
    "seed": 5,
}


def write(tmp_path, doc, name="scenario.yaml"):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else yaml.safe_dump(doc))
    return str(path)


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestVerify:
    def test_photon_system1_passes(self, tmp_path, capsys):
        code, out, _ = run(["verify", "--config", write(tmp_path, PHOTON)], capsys)
        report = json.loads(out)
        assert code == 0 and report["passed"]
        assert max(report["checks"][0]["sup_normalized"].values()) <= 1e-10

    def test_photon_system2_fails(self, tmp_path, capsys):
        code, out, _ = run(["verify", "--config", write(tmp_path, {**PHOTON, "checks": ["system2"]})], capsys)
        res = json.loads(out)["checks"][0]
        assert code == 1 and not res["passed"] and res["sup"]["div_e"] > 0

    def test_check_order_and_uniqueness(self, tmp_path, capsys):
        doc = {**PHOTON, "checks": ["conserved", "system2", "system1"]}
        code, out, _ = run(["verify", "--config", write(tmp_path, doc)], capsys)
        assert [c["check"] for c in json.loads(out)["checks"]] == ["conserved", "system2", "system1"]
        assert code == 1

    def test_deterministic(self, tmp_path, capsys):
        path = write(tmp_path, {**PHOTON, "checks": ["system1", "conserved", "media"], "media": {"cases": 50}})
        docs = []
        for _ in range(2):
            code, out, _ = run(["verify", "--config", path, "--seed", "99"], capsys)
            doc = json.loads(out)
            doc.pop("timings")
            docs.append(json.dumps(doc, sort_keys=True))
        assert docs[0] == docs[1]
        assert json.loads(docs[0])["seed"] == 99

    def test_csv_and_out(self, tmp_path, capsys):
        out_path = tmp_path / "r.csv"
        code, stdout, _ = run(["verify", "--config", write(tmp_path, PHOTON), "--format", "csv", "--out", str(out_path)],
                              capsys)
        text = out_path.read_text()
        assert code == 0 and text.startswith("check,key,value,passed")
        assert "system1" in stdout

    @pytest.mark.parametrize("name", ["photon_wave", "uk", "stationary_pair", "media"])
    def test_shipped_configs(self, name, capsys):
        code, _, _ = run(["verify", "--config", str(CONFIGS / f"{name}.yaml")], capsys)
        assert code == 0

    def test_shipped_classical_config_fails(self, capsys):
        code, _, _ = run(["verify", "--config", str(CONFIGS / "photon_wave_classical.yaml")], capsys)
        assert code == 1


class TestExitCodes:
    def test_parse_error(self, tmp_path, capsys):
        assert run(["verify", "--config", write(tmp_path, "solution: [")], capsys)[0] == 2

    def test_not_a_mapping(self, tmp_path, capsys):
        assert run(["verify", "--config", write(tmp_path, "- 1\n- 2\n")], capsys)[0] == 2

    def test_missing_file(self, tmp_path, capsys):
        assert run(["verify", "--config", str(tmp_path / "none.yaml")], capsys)[0] == 2

    @pytest.mark.parametrize(
        "patch",
        [
            {"checks": []},
            {"checks": ["system1", "system1"]},
            {"checks": ["maxwell"]},
            {"unknown_key": 1},
            {"tolerances": {"system1": -1.0}},
            {"tolerances": {"other": 1.0}},
            {"solution": {"family": "nope"}},
            {"solution": {"family": "photon_wave", "profile": {"kind": "mollifier", "radius": 1, "colour": 2}}},
            {"grid": {"lower": [0, 0, 0], "upper": [1, -1, 1], "points": 5}},
            {"seed": -1},
        ],
    )
    def test_validation_errors(self, patch, tmp_path, capsys):
        assert run(["verify", "--config", write(tmp_path, {**PHOTON, **patch})], capsys)[0] == 3

    def test_axisym_on_wrong_family(self, tmp_path, capsys):
        assert run(["verify", "--config", write(tmp_path, {**PHOTON, "checks": ["axisym"]})], capsys)[0] == 3

    def test_conserved_needs_support(self, tmp_path, capsys):
        doc = {**PHOTON, "solution": {"family": "constant_background", "h1": 1.0}, "checks": ["conserved"]}
        assert run(["verify", "--config", write(tmp_path, doc)], capsys)[0] == 3

    def test_tolerance_failure_exits_one(self, tmp_path, capsys):
        doc = {**PHOTON, "solution": {"family": "ansatz4a", "k": 1.0, "a0": 1.0, "a": 0.3, "b": 2.0},
               "checks": ["axisym"]}
        assert run(["verify", "--config", write(tmp_path, doc)], capsys)[0] == 1


class TestSweep:
    def test_fd_order(self):
        sc = parse_scenario(yaml.safe_load((CONFIGS / "fd_sweep.yaml").read_text()))
        rows = convergence_sweep(sc)["rows"]
        assert rows[0]["order"] is None
        assert all(abs(r["order"] - 2.0) <= 0.2 for r in rows[1:])

    def test_charge_sweep_shrinks(self):
        doc = {**PHOTON, "solution": {"family": "photon_wave", "profile": {"kind": "mollifier"}},
               "sweep": {"kind": "quadrature", "quantity": "total_charge", "resolutions": [17, 33, 65]}}
        rows = convergence_sweep(parse_scenario(doc))["rows"]
        values = [abs(r["value"]) for r in rows]
        errors = [r["error"] for r in rows]
        assert values[0] > values[-1] and errors[0] > errors[1] > errors[2]

    def test_constant_field_identical(self, tmp_path, capsys):
        doc = {**PHOTON, "solution": {"family": "constant_background", "h1": 1.0, "h2": 0.5},
               "sweep": {"kind": "quadrature", "quantity": "total_energy", "resolutions": [5, 9, 17],
                         "check_support": False}}
        code, out, _ = run(["sweep", "--config", write(tmp_path, doc)], capsys)
        rows = json.loads(out)["rows"]
        assert code == 0
        assert all(r["value"] == pytest.approx(rows[0]["value"], rel=1e-14) for r in rows)
        assert rows[2]["order"] is None or np.isfinite(rows[2]["order"])

    def test_csv(self, tmp_path, capsys):
        code, out, _ = run(["sweep", "--config", str(CONFIGS / "fd_sweep.yaml"), "--format", "csv"], capsys)
        assert code == 0 and out.splitlines()[0] == "resolution,value,error,order" and len(out.splitlines()) == 4

    def test_missing_section(self, tmp_path, capsys):
        assert run(["sweep", "--config", write(tmp_path, PHOTON)], capsys)[0] == 3

    def test_bad_sweep(self, tmp_path, capsys):
        doc = {**PHOTON, "sweep": {"kind": "fd", "quantity": "total_charge"}}
        assert run(["sweep", "--config", write(tmp_path, doc)], capsys)[0] == 3


class TestPlotData:
    def test_rho_along_x(self, tmp_path, capsys):
        doc = {**PHOTON, "plot": {"quantity": "rho", "axis": "x", "offset": [0.0, 0.5, 0.4], "samples": 41}}
        code, out, _ = run(["plot-data", "--config", write(tmp_path, doc)], capsys)
        data = np.loadtxt(out.splitlines())
        assert code == 0 and data.shape == (41, 2)
        prof = polarized_profile(1.0, 0.5, 3.0, 0.6, 1.0)
        p = np.zeros((41, 4))
        p[:, 0], p[:, 1], p[:, 2] = data[:, 0], 0.5, 0.4
        H = prof.field.hessian(p)
        np.testing.assert_allclose(data[:, 1], H[:, 1, 1] + H[:, 2, 2], atol=1e-13)
        assert np.max(np.abs(data[:, 1])) > 1e-2
        np.testing.assert_allclose(data[:, 1], derived_state(photon_wave(prof), p).rho, atol=1e-15)

    def test_zero_solution(self, tmp_path, capsys):
        doc = {**PHOTON, "solution": {"family": "zero"}}
        code, out, _ = run(["plot-data", "--config", write(tmp_path, doc), "--quantity", "E_norm"], capsys)
        assert code == 0 and np.all(np.loadtxt(out.splitlines())[:, 1] == 0)

    def test_coulomb_inverse_square(self, capsys):
        code, out, _ = run(["plot-data", "--config", str(CONFIGS / "coulomb.yaml")], capsys)
        data = np.loadtxt(out.splitlines())
        np.testing.assert_allclose(data[:, 1] * data[:, 0] ** 2, 1.0, rtol=1e-12)

    def test_unknown_quantity(self, tmp_path, capsys):
        assert run(["plot-data", "--config", write(tmp_path, PHOTON), "--quantity", "entropy"], capsys)[0] == 3


class TestMediaCheck:
    def test_default(self, capsys):
        code, out, _ = run(["media-check", "--cases", "200", "--seed", "3"], capsys)
        doc = json.loads(out)
        assert code == 0 and doc["passed"] and doc["suite"]["reaction_f"]["passed"] == 200

    def test_csv(self, capsys):
        code, out, _ = run(["media-check", "--cases", "20", "--format", "csv"], capsys)
        assert code == 0 and out.startswith("test,max_deviation")

    def test_config(self, capsys):
        code, out, _ = run(["media-check", "--config", str(CONFIGS / "media.yaml"), "--cases", "30"], capsys)
        assert code == 0 and json.loads(out)["seed"] == 11

    def test_run_scenario_api(self):
        rep = run_scenario(parse_scenario({**PHOTON, "checks": ["media"], "media": {"cases": 10}}))
        assert rep["checks"][0]["check"] == "media"

    def test_bad_cap(self, capsys):
        assert run(["media-check", "--v-cap", "1.5"], capsys)[0] == 3
