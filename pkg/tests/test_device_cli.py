import json
import math

import numpy as np
import pytest

from notchlab import ValidationError
from notchlab.cli import run
from notchlab.device import (device_from_dict, device_to_dict, load_device,
                             load_paper_device, paper_device_path)
from notchlab.io import format_float, write_csv, write_json


@pytest.fixture()
def device_path(tmp_path):
    import shutil
    dst = tmp_path / "dev.json"
    shutil.copy(str(paper_device_path()), dst)
    return dst


class TestDeviceFile:
    def test_paper_device_loads(self):
        dev = load_paper_device()
        assert dev.line.z0 == 66.0
        assert dev.z0_line == 50.0
        assert set(dev.geometry) == {"Q1", "Cap"}
        assert len(dev.channels) == 4
        assert dev.qubit("Q3").f_q == 9046e6

    def test_unknown_keys_rejected(self, device_path):
        raw = json.loads(device_path.read_text())
        raw["extra"] = 1
        with pytest.raises(ValidationError, match="extra"):
            device_from_dict(raw)
        raw2 = json.loads(device_path.read_text())
        raw2["channels"][0]["bogus_mhz"] = 1.0
        with pytest.raises(ValidationError, match="bogus"):
            device_from_dict(raw2)

    def test_negative_length_named(self, device_path):
        raw = json.loads(device_path.read_text())
        raw["geometry"][0]["l_r_open_um"] = -5.0
        with pytest.raises(ValidationError, match="l_r_open_um"):
            device_from_dict(raw)

    def test_round_trip_canonical(self, tmp_path, device_path):
        dev = load_device(device_path)
        p1 = tmp_path / "a.json"
        p2 = tmp_path / "b.json"
        write_json(p1, device_to_dict(dev))
        dev2 = load_device(p1)
        write_json(p2, device_to_dict(dev2))
        assert p1.read_bytes() == p2.read_bytes()


class TestEmission:
    def test_float_format_nine_digits(self):
        assert format_float(math.pi) == "3.14159265"
        assert format_float(8.2776850306e9) == "8.27768503e+09"
        assert format_float(0.066759) == "0.066759"
        assert format_float(float("inf")) == "inf"
        assert format_float(float("nan")) == "nan"

    def test_header_only_csv(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_csv(path, ["time_s", "value"], [])
        assert path.read_text() == "time_s,value\n"

    def test_lf_endings(self, tmp_path):
        path = tmp_path / "t.csv"
        write_csv(path, ["a"], [(1.0,), (2.0,)])
        raw = path.read_bytes()
        assert b"\r" not in raw


class TestCliCommands:
    def test_notch_golden(self, device_path, capsys):
        code = run(["notch", "--device", str(device_path), "--pair", "Q1"])
        assert code == 0
        assert capsys.readouterr().out.strip() == "8.278 GHz"

    def test_validation_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        raw = json.loads(paper_device_path().read_text())
        raw["geometry"][0]["l_r_short_um"] = -10.0
        bad.write_text(json.dumps(raw))
        code = run(["z21", "--device", str(bad), "--pair", "Q1",
                    "--fmin", "8e9", "--fmax", "9e9",
                    "--out", str(tmp_path / "o.csv")])
        assert code == 2
        assert "l_r_short_um" in capsys.readouterr().err

    def test_unknown_flag_exit_code(self, device_path):
        assert run(["notch", "--device", str(device_path), "--pair", "Q1",
                    "--bogus"]) == 2

    def test_numerical_exit_code(self, device_path, tmp_path, capsys):
        # a sweep point landing inside the pole guard is a numerical error
        dev = load_device(device_path)
        f_pole = dev.pair("Q1").f_r
        code = run(["z21", "--device", str(device_path), "--pair", "Q1",
                    "--fmin", str(f_pole - 100.0), "--fmax",
                    str(f_pole + 100.0), "--points", "3",
                    "--out", str(tmp_path / "o.csv")])
        assert code == 3
        assert "pole" in capsys.readouterr().err.lower()

    def test_z21_sweep_csv(self, device_path, tmp_path):
        out = tmp_path / "z21.csv"
        code = run(["z21", "--device", str(device_path), "--pair", "Q1",
                    "--fmin", "8.0e9", "--fmax", "8.5e9", "--points", "101",
                    "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "freq_hz,im_z21_ohm"
        assert len(lines) == 102
        data = np.loadtxt(out, delimiter=",", skiprows=1)
        # sign change at the notch inside this window
        assert np.sum(np.diff(np.sign(data[:, 1])) != 0) == 1

    def test_modes_json_structure(self, device_path, tmp_path):
        out = tmp_path / "modes.json"
        code = run(["modes", "--device", str(device_path), "--state", "gggg",
                    "--out", str(out)])
        assert code == 0
        modes = json.loads(out.read_text())
        assert isinstance(modes, list) and len(modes) == 8
        assert set(modes[0]) == {"channel", "character", "f_hz", "kappa_hz"}
        ro = {m["channel"]: m["f_hz"] for m in modes
              if m["character"] == "readout"}
        assert ro["Q1"] == pytest.approx(10221e6, abs=5e6)

    def test_reflect_sweep(self, device_path, tmp_path):
        out = tmp_path / "refl.csv"
        code = run(["reflect", "--device", str(device_path), "--state",
                    "gggg", "--fmin", "10.0e9", "--fmax", "10.9e9",
                    "--points", "201", "--out", str(out)])
        assert code == 0
        data = np.loadtxt(out, delimiter=",", skiprows=1)
        mags = np.hypot(data[:, 1], data[:, 2])
        assert np.max(np.abs(mags - 1.0)) < 1e-9

    def test_simulate_trace_columns(self, device_path, tmp_path):
        out = tmp_path / "trace.csv"
        pulse = json.dumps({"carrier_mhz": 10357.0,
                            "rectangular": {"amplitude": 1e6,
                                            "duration_ns": 40.0}})
        code = run(["simulate", "--device", str(device_path), "--state",
                    "gggg", "--pulse", pulse, "--dt-ns", "1.0",
                    "--out", str(out)])
        assert code == 0
        header = out.read_text().splitlines()[0].split(",")
        # time plus four columns per channel plus the output field
        assert len(header) == 4 * 4 + 3
        assert header[0] == "time_s" and header[-2:] == ["re_sout", "im_sout"]

    def test_separation_prints_steady_state(self, device_path, tmp_path,
                                            capsys):
        pulse = json.dumps({"carrier_mhz": 10357.0,
                            "rectangular": {"amplitude": 1e6,
                                            "duration_ns": 80.0}})
        code = run(["separation", "--device", str(device_path), "--pair",
                    "Q2", "--pulse", pulse,
                    "--out", str(tmp_path / "sep.csv")])
        assert code == 0
        out = capsys.readouterr().out
        assert "S_ss" in out and "Gamma_m" in out

    def test_purcell_sweep(self, device_path, tmp_path):
        out = tmp_path / "purcell.csv"
        code = run(["purcell", "--device", str(device_path), "--pair", "Q1",
                    "--fmin", "7.8e9", "--fmax", "8.8e9", "--points", "41",
                    "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "freq_hz,t1_mtl_s,t1_cap_s,xi"
        rows = [ln.split(",") for ln in lines[1:]]
        f_n = 8.2777e9
        # the MTL T1 dwarfs the capacitive one near the notch
        for cells in rows:
            f = float(cells[0])
            if abs(f - f_n) < 0.1e9:
                t_mtl = float(cells[1])
                t_cap = float(cells[2])
                assert t_mtl > 10 * t_cap

    def test_fit_round_trip_via_cli(self, device_path, tmp_path):
        from notchlab import synth_spectrum
        from notchlab.device import load_device

        dev = load_device(device_path)
        net = dev.mux_network()
        grid = np.linspace(10.0e9, 10.9e9, 601)
        for state, name in (("g", "g.csv"), ("e", "e.csv")):
            spec = synth_spectrum(net, state, 0.4, 0.2e-9, grid, 0.0)
            write_csv(tmp_path / name, ["freq_hz", "phase_rad"],
                      list(zip(spec.freq_hz, spec.phase_rad)))
        out = tmp_path / "fit.json"
        code = run(["fit", "--device", str(device_path),
                    "--spec-g", str(tmp_path / "g.csv"),
                    "--spec-e", str(tmp_path / "e.csv"),
                    "--theta0", "0.3", "--tau-ns", "0.15",
                    "--out", str(out)])
        assert code == 0
        result = json.loads(out.read_text())
        assert result["converged"] is True
        fitted = {c["name"]: c for c in result["channels"]}
        for ch in net.channels:
            assert fitted[ch.name]["chi_mhz"] * 1e6 == pytest.approx(
                ch.chi, abs=1e3)

    def test_budget_json(self, tmp_path):
        out = tmp_path / "budget.json"
        code = run(["budget", "--snr", "8.4", "--tau-meas-ns", "56",
                    "--t1-us", "26", "--out", str(out)])
        assert code == 0
        budget = json.loads(out.read_text())
        assert budget["eps_sep"] < 1e-4
        assert budget["eps_cl"] == pytest.approx(0.0010769, rel=1e-4)

    def test_calibrate_photons(self, capsys):
        code = run(["calibrate", "--delta-ac-hz=-15.6e6",
                    "--chi-hz=-7.8e6"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["n_photons"] == 1.0

    def test_repeat_invocations_byte_identical(self, device_path, tmp_path,
                                               monkeypatch):
        args = ["z21", "--device", str(device_path), "--pair", "Q1",
                "--fmin", "8.0e9", "--fmax", "9.0e9", "--points", "64"]
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(args + ["--out", str(out1)]) == 0
        monkeypatch.setenv("NOTCHLAB_THREADS", "4")
        assert run(args + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_device_command_canonicalizes(self, device_path, tmp_path):
        out1, out2 = tmp_path / "c1.json", tmp_path / "c2.json"
        assert run(["device", "--device", str(device_path),
                    "--out", str(out1)]) == 0
        assert run(["device", "--device", str(out1),
                    "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()
