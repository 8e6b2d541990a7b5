import hashlib
import json
import math

import numpy as np
import pytest

from weyllab.cli import main
from weyllab.config import DEFAULTS, ConfigError, load_config


def read_csv(path):
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


class TestConfig:
    def test_defaults_round_trip(self):
        cfg = load_config()
        assert cfg == DEFAULTS

    def test_file_then_set_priority(self, tmp_path):
        f = tmp_path / "run.cfg"
        f.write_text("kappa = 0.5  # damping\nsites=12\n")
        cfg = load_config(f, ["kappa=0.7", "kappa=0.9"])
        assert cfg["kappa"] == 0.9
        assert cfg["sites"] == 12

    def test_unknown_key(self, tmp_path):
        f = tmp_path / "run.cfg"
        f.write_text("bogus=1\n")
        with pytest.raises(ConfigError):
            load_config(f)

    def test_bad_value(self):
        with pytest.raises(ConfigError):
            load_config(None, ["sites=batman"])

    def test_odd_sites_rejected(self):
        with pytest.raises(ConfigError):
            load_config(None, ["sites=7"])

    def test_list_key(self):
        cfg = load_config(None, ["table1.sizes=4,12"])
        assert cfg["table1.sizes"] == [4, 12]


class TestCommands:
    def test_show_config(self, capsys):
        assert main(["show-config"]) == 0
        out = capsys.readouterr().out
        assert "kappa=0.1" in out
        assert "table1.sizes=4,6,8,12,20,36" in out

    def test_bulk_bands_gap_structure(self, tmp_path):
        out = tmp_path / "run"
        assert main(["bulk-bands", "--out", str(out), "--set", "bulk_bands.grid=41"]) == 0
        header, rows = read_csv(out / "bulk_bands.csv")
        assert header == ["theta1", "theta2", "E_minus", "E_plus"]
        assert len(rows) == 41 * 41
        gaps = {}
        for t1, t2, em, ep in rows:
            gaps[(float(t1), float(t2))] = float(ep) - float(em)
        closed = [k for k, g in gaps.items() if g < 1e-10]
        h = math.pi / 2
        assert sorted(closed) == sorted(
            [(s1 * h, s2 * h) for s1 in (-1, 1) for s2 in (-1, 1)]
        )

    def test_bulk_bands_kx_zero_fully_gapped(self, tmp_path):
        out = tmp_path / "run"
        assert (
            main(
                [
                    "bulk-bands",
                    "--out",
                    str(out),
                    "--set",
                    "bulk_bands.grid=21",
                    "--set",
                    "bulk_bands.kx=0.0",
                ]
            )
            == 0
        )
        _, rows = read_csv(out / "bulk_bands.csv")
        assert min(float(ep) - float(em) for _, _, em, ep in rows) >= 4.0 - 1e-9

    def test_bulk_bands_empty_grid_is_usage_error(self, tmp_path):
        code = main(
            ["bulk-bands", "--out", str(tmp_path), "--set", "bulk_bands.grid=0"]
        )
        assert code == 2

    def test_weyl_points_json(self, tmp_path):
        out = tmp_path / "run"
        assert main(["weyl-points", "--out", str(out)]) == 0
        data = json.loads((out / "weyl_points.json").read_text())
        assert [w["label"] for w in data] == ["W1", "W2", "W3", "W4"]
        assert sum(w["chirality"] for w in data) == 0

    def test_chern_defaults(self, tmp_path):
        out = tmp_path / "run"
        assert main(["chern", "--out", str(out), "--set", "chern.mesh=16"]) == 0
        data = json.loads((out / "chern.json").read_text())
        assert data["sum"] == 0
        assert data["methods_agree"] is True
        values = [data["charges"][f"W{i}"]["sphere"] for i in range(1, 5)]
        assert all(abs(v) == 1 for v in values)

    def test_chern_radius_override_invariant(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        main(["chern", "--out", str(a), "--set", "chern.mesh=16"])
        main(
            [
                "chern",
                "--out",
                str(b),
                "--set",
                "chern.mesh=16",
                "--set",
                "chern.radius=0.4",
            ]
        )
        ca = json.loads((a / "chern.json").read_text())["charges"]
        cb = json.loads((b / "chern.json").read_text())["charges"]
        assert all(ca[k]["sphere"] == cb[k]["sphere"] for k in ca)

    def test_chern_je_zero_is_numeric_error(self, tmp_path):
        assert main(["chern", "--out", str(tmp_path), "--set", "je=0"]) == 3

    def test_edge_spectrum_and_density(self, tmp_path):
        out = tmp_path / "run"
        code = main(
            [
                "edge-spectrum",
                "--out",
                str(out),
                "--set",
                "edge_spectrum.grid=11",
                "--set",
                "edge_spectrum.sites=8",
                "--set",
                "edge_spectrum.densities=1",
            ]
        )
        assert code == 0
        header, rows = read_csv(out / "edge_spectrum.csv")
        assert header == ["theta1", "theta2", "index", "energy", "label"]
        assert len(rows) == 11 * 11 * 8
        assert (out / "edge_densities.csv").exists()

    def test_density_rows(self, tmp_path):
        out = tmp_path / "run"
        assert main(["density", "--out", str(out), "--set", "sites=6"]) == 0
        header, rows = read_csv(out / "density.csv")
        assert header == ["index", "energy", "label", "site", "density"]
        assert len(rows) == 6 * 6
        by_state = {}
        for idx, _, _, _, dens in rows:
            by_state.setdefault(idx, 0.0)
            by_state[idx] += float(dens)
        assert all(abs(total - 1.0) < 1e-9 for total in by_state.values())

    def test_reflection_trace(self, tmp_path):
        out = tmp_path / "run"
        assert (
            main(
                [
                    "reflection",
                    "--out",
                    str(out),
                    "--set",
                    "reflection.theta1=0.314159265358979",
                ]
            )
            == 0
        )
        header, rows = read_csv(out / "reflection.csv")
        assert header == ["delta0", "r_re", "r_im", "R"]
        assert len(rows) == 201
        for d0, rre, rim, rr in rows:
            assert float(rr) == pytest.approx(
                float(rre) ** 2 + float(rim) ** 2, abs=1e-12
            )

    def test_winding_json_and_trace(self, tmp_path):
        out = tmp_path / "run"
        assert main(["winding", "--out", str(out)]) == 0
        data = json.loads((out / "winding.json").read_text())
        assert data["weyl"] == "W1"
        assert abs(data["winding"]) == 1
        header, rows = read_csv(out / "winding_phases.csv")
        assert header == ["theta", "phase", "r_re", "r_im"]
        assert len(rows) == data["samples"]

    def test_winding_weyl4_opposite(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        main(["winding", "--out", str(a)])
        main(["winding", "--out", str(b), "--set", "winding.weyl=4"])
        w1 = json.loads((a / "winding.json").read_text())["winding"]
        w4 = json.loads((b / "winding.json").read_text())["winding"]
        assert w1 == -w4

    def test_fermi_arc_sites4(self, tmp_path):
        out = tmp_path / "run"
        assert main(["fermi-arc", "--out", str(out)]) == 0
        data = json.loads((out / "fermi_arc.json").read_text())
        assert data["flagged"] is False
        assert data["theta1c_plus"] / math.pi == pytest.approx(0.20, abs=1e-9)
        assert (out / "fermi_arc_spectra.csv").exists()

    def test_fermi_arc_sites12(self, tmp_path):
        out = tmp_path / "run"
        assert main(["fermi-arc", "--out", str(out), "--set", "sites=12"]) == 0
        data = json.loads((out / "fermi_arc.json").read_text())
        assert abs(data["theta1c_plus"] / math.pi - 0.40) <= 0.02 + 1e-9

    def test_table1_single_override(self, tmp_path):
        out = tmp_path / "run"
        assert main(["table1", "--out", str(out), "--set", "table1.sizes=4"]) == 0
        _, rows = read_csv(out / "table1.csv")
        assert len(rows) == 1
        assert rows[0][0] == "4"
        assert float(rows[0][1]) / math.pi == pytest.approx(0.20, abs=1e-9)

    def test_table1_trivial_chain_empty_row(self, tmp_path):
        out = tmp_path / "run"
        assert main(["table1", "--out", str(out), "--set", "table1.sizes=2"]) == 0
        _, rows = read_csv(out / "table1.csv")
        assert rows[0][0] == "2"
        assert math.isnan(float(rows[0][1]))


class TestManifestAndDeterminism:
    def test_manifest_digests(self, tmp_path):
        out = tmp_path / "run"
        main(["winding", "--out", str(out)])
        manifest = json.loads((out / "winding_manifest.json").read_text())
        assert manifest["command"] == "winding"
        assert manifest["artifact_version"]
        assert manifest["parameters"]["kappa"] == 0.1
        names = {o["path"] for o in manifest["outputs"]}
        assert names == {"winding.json", "winding_phases.csv"}
        for entry in manifest["outputs"]:
            digest = hashlib.sha256((out / entry["path"]).read_bytes()).hexdigest()
            assert digest == entry["sha256"]

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        args = ["--set", "edge_spectrum.grid=7", "--set", "edge_spectrum.sites=6"]
        main(["edge-spectrum", "--out", str(a), *args])
        main(["edge-spectrum", "--out", str(b), *args])
        assert (a / "edge_spectrum.csv").read_bytes() == (
            b / "edge_spectrum.csv"
        ).read_bytes()

    def test_threads_do_not_change_output(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        args = ["--set", "edge_spectrum.grid=7", "--set", "edge_spectrum.sites=6"]
        main(["edge-spectrum", "--out", str(a), *args])
        main(["edge-spectrum", "--out", str(b), "--threads", "4", *args])
        assert (a / "edge_spectrum.csv").read_bytes() == (
            b / "edge_spectrum.csv"
        ).read_bytes()

    def test_env_var_out_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("WEYLLAB_OUT", str(tmp_path / "env_out"))
        monkeypatch.chdir(tmp_path)
        assert main(["weyl-points"]) == 0
        assert (tmp_path / "env_out" / "weyl_points.json").exists()

    def test_usage_error_on_bad_set(self, tmp_path):
        assert main(["chern", "--out", str(tmp_path), "--set", "nope=1"]) == 2
        assert main(["chern", "--out", str(tmp_path), "--set", "sites"]) == 2
