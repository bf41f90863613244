import csv
import json
from importlib import resources

import jsonschema
import numpy as np
import pytest

from tmrabi.cli import ConfigError, main, parse_geometric, parse_range


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def schema():
    return json.loads(resources.files("tmrabi").joinpath("schema/fit_report.schema.json").read_text())


@pytest.fixture(autouse=True)
def fixed_clock(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")


class TestRanges:
    def test_inclusive_range(self):
        np.testing.assert_allclose(parse_range("0:1:0.25"), [0, 0.25, 0.5, 0.75, 1.0])
        assert parse_range("0.1:0.3:0.1").tolist() == [0.1, 0.2, 0.3]

    def test_single_and_list(self):
        assert parse_range("2.5").tolist() == [2.5]
        assert parse_range("1,2,4").tolist() == [1.0, 2.0, 4.0]

    def test_geometric(self):
        assert parse_geometric("100:800:4").tolist() == [100.0, 200.0, 400.0, 800.0]

    @pytest.mark.parametrize("bad", ["1:0:0.1", "0:1:0", "a:b:c", "1:2", "x"])
    def test_invalid(self, bad):
        with pytest.raises(ConfigError):
            parse_range(bad)

    def test_invalid_geometric(self):
        with pytest.raises(ConfigError):
            parse_geometric("10:5:3")


class TestPhaseDiagram:
    def test_rows(self, tmp_path):
        out = tmp_path / "pd"
        code = main(["phase-diagram", "--beta", "1.2", "--gamma", "0.5:2.0:0.25", "--R", "0:2:0.1",
                     "--out", str(out)])
        assert code == 0
        rows = read_rows(out / "phase_diagram.csv")
        assert list(rows[0]) == ["gamma", "R", "label", "y1", "y2", "E0"]
        for row in rows:
            g, R = float(row["gamma"]), float(row["R"])
            if R < min(1.0, np.sqrt(g)):
                assert row["label"] == "Normal"
        ring = [r for r in rows if float(r["gamma"]) == 1.0 and float(r["R"]) == 1.5]
        assert ring[0]["label"] == "BoundaryU1"
        assert (out / "manifest.json").exists()

    def test_y2_point(self, tmp_path):
        main(["phase-diagram", "--gamma", "0.5556", "--R", "1.0", "--out", str(tmp_path)])
        (row,) = read_rows(tmp_path / "phase_diagram.csv")
        assert row["label"] == "SuperradiantY2"

    def test_lf_line_endings(self, tmp_path):
        main(["phase-diagram", "--gamma", "0.5:1:0.5", "--R", "0:1:0.5", "--out", str(tmp_path)])
        raw = (tmp_path / "phase_diagram.csv").read_bytes()
        assert b"\r" not in raw and raw.endswith(b"\n")


class TestMeanPhoton:
    def test_examples(self, tmp_path):
        main(["mean-photon", "--alpha", "0.8", "--beta", "1.2", "--R", "1.0", "--out", str(tmp_path / "a")])
        (row,) = read_rows(tmp_path / "a" / "mean_photon.csv")
        assert float(row["n2_over_eta"]) == pytest.approx(0.38889, abs=1e-5)
        assert float(row["n1_over_eta"]) == 0.0
        main(["mean-photon", "--alpha", "1.2", "--beta", "0.8", "--R", "1.0", "--out", str(tmp_path / "b")])
        (row,) = read_rows(tmp_path / "b" / "mean_photon.csv")
        assert float(row["n1_over_eta"]) == float(row["n2_over_eta"]) == 0.0

    def test_surfaces(self, tmp_path):
        main(["mean-photon", "--beta", "1.2", "--gamma", "0.4:1.6:0.1", "--R", "0:2:0.05", "--out", str(tmp_path)])
        rows = read_rows(tmp_path / "mean_photon.csv")
        for row in rows:
            g, R = float(row["gamma"]), float(row["R"])
            if row["boundary"] == "1":
                assert g == pytest.approx(1.0)
                if R > 1:
                    assert row["n1_over_eta"] == row["n2_over_eta"] == ""
                continue
            n1, n2 = float(row["n1_over_eta"]), float(row["n2_over_eta"])
            assert n1 * n2 == 0.0
            if R <= min(1.0, np.sqrt(g)):
                assert n1 == n2 == 0.0
            elif g < 1:
                assert n2 > 0
            else:
                assert n1 > 0
        assert any(r["boundary"] == "1" for r in rows)

    def test_mode_selection(self, tmp_path):
        main(["mean-photon", "--R", "1.0", "--mode", "2", "--out", str(tmp_path)])
        assert list(read_rows(tmp_path / "mean_photon.csv")[0]) == ["gamma", "R", "n2_over_eta", "boundary"]

    def test_delta_rejected(self, tmp_path):
        assert main(["mean-photon", "--delta", "0.3", "--out", str(tmp_path)]) == 2


class TestUniversalF:
    def test_rows(self, tmp_path):
        assert main(["universal-f", "--rprime=-2:10:2", "--out", str(tmp_path)]) == 0
        rows = {float(r["rprime"]): float(r["f"]) for r in read_rows(tmp_path / "universal_f.csv")}
        assert rows[0.0] > 0
        assert rows[10.0] == pytest.approx(10.0, rel=0.1)


class TestScaling:
    def test_synthetic_round_trip(self, tmp_path):
        code = main(["scaling", "--synthetic", "--alpha", "0.8", "--beta", "1.2",
                     "--eta-geometric", "100:3200:6", "--R", "0.735:0.755:0.001", "--eta-min", "0",
                     "--out", str(tmp_path)])
        assert code == 0
        report = json.loads((tmp_path / "fit_report.json").read_text())
        jsonschema.validate(report, schema())
        fit = report["fit"]
        assert fit["Rc_est"] == pytest.approx(report["Rc_analytic"], abs=1e-3)
        assert -fit["slope"] == pytest.approx(2 / 3, abs=1e-3)
        assert fit["nu"] == pytest.approx(1.5, abs=1e-3)
        collapsed = read_rows(tmp_path / "scaling_collapsed.csv")
        assert list(collapsed[0]) == ["eta", "R", "x", "y"]
        assert len(collapsed) == 6 * 21

    def test_ed_workers_equivalent(self, tmp_path):
        args = ["scaling", "--alpha", "1.2", "--beta", "0.8", "--eta", "10,20,40,80",
                "--R", "0.9:1.1:0.05", "--eta-min", "0"]
        assert main(args + ["--out", str(tmp_path / "w1"), "--workers", "1"]) == 0
        assert main(args + ["--out", str(tmp_path / "w2"), "--workers", "2"]) == 0
        for name in ("scaling_raw.csv", "scaling_collapsed.csv"):
            assert (tmp_path / "w1" / name).read_bytes() == (tmp_path / "w2" / name).read_bytes()
        r1 = json.loads((tmp_path / "w1" / "fit_report.json").read_text())
        r2 = json.loads((tmp_path / "w2" / "fit_report.json").read_text())
        assert r1["fit"] == r2["fit"]
        jsonschema.validate(r1, schema())
        raw = read_rows(tmp_path / "w1" / "scaling_raw.csv")
        assert [(float(r["eta"]), float(r["R"])) for r in raw] == [
            (e, R) for e in (10.0, 20.0, 40.0, 80.0) for R in (0.9, 0.95, 1.0, 1.05, 1.1)
        ]

    def test_non_convergence_lists_points(self, tmp_path, capsys):
        code = main(["scaling", "--eta", "10,20,40,80", "--R", "0.7:0.8:0.05", "--max-restarts", "0",
                     "--max-krylov", "2", "--out", str(tmp_path)])
        assert code == 3
        err = capsys.readouterr().err
        assert "eta=10 R=0.7" in err
        assert (tmp_path / "scaling_raw.csv").exists()

    def test_too_few_etas(self, tmp_path):
        assert main(["scaling", "--eta", "10,20,40", "--out", str(tmp_path)]) == 2


class TestSolve:
    def test_dump(self, tmp_path):
        code = main(["solve", "--alpha", "1.2", "--beta", "0.8", "--R", "1.2", "--eta", "25", "--out", str(tmp_path)])
        assert code == 0
        summary = json.loads((tmp_path / "solve.json").read_text())
        assert summary["converged"]
        assert summary["parity"] == pytest.approx(1.0)
        rows = read_rows(tmp_path / "state.csv")
        amp = np.array([float(r["amplitude"]) for r in rows])
        assert np.sum(amp**2) == pytest.approx(1.0, abs=1e-10)
        n1 = sum(float(r["amplitude"]) ** 2 * int(r["n1"]) for r in rows)
        assert n1 == pytest.approx(summary["n1"], rel=1e-8)

    def test_non_convergence_exit(self, tmp_path):
        code = main(["solve", "--R", "1.0", "--eta", "50", "--max-restarts", "0", "--max-krylov", "2",
                     "--out", str(tmp_path)])
        assert code == 3


class TestConfig:
    def test_precedence_and_manifest(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# analytic run\nalpha = 1.2\nbeta = 0.8\nR = 1.0:2.0:0.5\n")
        out = tmp_path / "o"
        assert main(["mean-photon", "--config", str(cfg), "--alpha", "1.5", "--out", str(out)]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["alpha"] == 1.5
        assert manifest["config"]["beta"] == 0.8
        assert manifest["config_file"]["alpha"] == "1.2"
        assert "--alpha" in manifest["argv"]
        assert len(manifest["inputs"][str(cfg)]) == 64
        assert len(read_rows(out / "mean_photon.csv")) == 3

    def test_unknown_key(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("bogus = 1\n")
        assert main(["solve", "--config", str(cfg)]) == 2

    def test_malformed_line(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("alpha 1\n")
        assert main(["solve", "--config", str(cfg)]) == 2

    def test_bad_values(self, tmp_path):
        assert main(["phase-diagram", "--gamma", "1:0:1", "--out", str(tmp_path)]) == 2
        assert main(["solve", "--alpha", "-1", "--out", str(tmp_path)]) == 2
        assert main(["solve", "--seed", "-3", "--out", str(tmp_path)]) == 2
        with pytest.raises(SystemExit) as exc:
            main(["no-such-command"])
        assert exc.value.code == 2

    def test_identical_reruns(self, tmp_path):
        args = ["scaling", "--synthetic", "--eta-geometric", "100:3200:6", "--R", "0.735:0.755:0.001"]
        main(args + ["--out", str(tmp_path / "a")])
        main(args + ["--out", str(tmp_path / "b")])
        for name in ("scaling_raw.csv", "scaling_collapsed.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        # the manifests differ only in the output directory
        ma, mb = (json.loads((tmp_path / d / "fit_report.json").read_text()) for d in "ab")
        for m in (ma, mb):
            m["manifest"]["argv"] = m["manifest"]["argv"][:-2]
            m["manifest"]["config"].pop("out")
        assert ma == mb
