import json
import subprocess
import sys

import numpy as np
import pytest

from spinsemi.cli import dump_json, main, parse_weights
from spinsemi.sweeps import ConfigError, default_config, fmt, make_function, make_phi_from_text, spin_values

SMALL = {
    "seed": 7,
    "inversion": {"J": [1, 2], "s": [0.5], "n_functions": 2, "band": 3},
    "products": {"J": {"from": 1, "to": 6, "step": 1}, "f": "omega_z", "g": "band_random(2, 3)"},
    "traces": {"J": {"from": 1, "to": 8, "step": 1}, "phi": "square", "f": "omega_z", "slope": [-1.0, 0.2],
               "berezin_lieb": {"n_cases": 4, "J": [1], "phis": ["square", "abs_alpha(2)"]}},
    "channels": {"J": ["1/2"], "K_max": 6, "K_step": 1, "n_rho": 2, "fit_p": [1], "slope": [-1.0, 0.2],
                 "trace_phis": ["square"]},
    "entropy": {"J": "1/2", "i": "1/2", "K": {"from": 2, "to": 8, "step": 1}},
}


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def test_spectrum_spin_one(capsys):
    assert main(["spectrum", "--J", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "ell,eigenvalue"
    vals = [float(l.split(",")[1]) for l in lines[1:]]
    assert np.abs(np.array(vals) - [1, 0.5, 0.1]).max() < 1e-14
    assert lines[1] == "0,1.0000000000000000e+00"


@pytest.mark.parametrize("sweep", ["inversion", "products", "traces", "channels", "entropy"])
def test_verify_small_config_passes_and_is_deterministic(sweep, tmp_path, capsys):
    cfg = write(tmp_path, SMALL)
    assert main(["verify", sweep, "--config", cfg]) == 0
    first = capsys.readouterr().out
    assert main(["verify", sweep, "--config", cfg]) == 0
    assert capsys.readouterr().out == first
    assert first.startswith(f"# sweep={sweep} seed=7")


def test_verify_failure_exit_code(tmp_path, capsys):
    cfg = dict(SMALL, traces=dict(SMALL["traces"], slope=[-3.0, 0.1]))
    assert main(["verify", "traces", "--config", write(tmp_path, cfg)]) == 1
    err = capsys.readouterr().err
    assert "trace_slope" in err


def test_verify_bad_config(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["verify", "traces", "--config", str(bad)]) == 2
    assert main(["verify", "traces", "--config", write(tmp_path, {"seed": 1}, "empty.json")]) == 2
    cfg = dict(SMALL, traces=dict(SMALL["traces"], phi="cosh"))
    assert main(["verify", "traces", "--config", write(tmp_path, cfg, "phi.json")]) == 2
    err = capsys.readouterr().err
    assert err.count("spinsemi: error:") == 3


def test_verify_writes_report_file(tmp_path):
    out = tmp_path / "report.csv"
    assert main(["verify", "entropy", "--config", write(tmp_path, SMALL), "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0].startswith("# sweep=entropy")


def test_channel_apply_round_trip(tmp_path):
    rho = np.array([[0.75, 0.25j], [-0.25j, 0.25]])
    doc = {"dim": 2, "entries": [[z.real, z.imag] for z in rho.reshape(-1)]}
    inp, out = tmp_path / "rho.json", tmp_path / "out.json"
    inp.write_text(json.dumps(doc))
    assert main(["channel", "apply", "--J", "1/2", "--K", "1/2", "--M", "0", "--rho", str(inp), "--out", str(out)]) == 0
    got = json.loads(out.read_text())
    arr = np.array(got["entries"])
    assert np.abs(arr[:, 0] + 1j * arr[:, 1] - rho.reshape(-1)).max() < 1e-15
    assert main(["channel", "apply", "--J", "1/2", "--K", "1", "--weights", "1/2:0.5,3/2:0.5",
                 "--rho", str(inp), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["dim"] == 3


def test_channel_apply_triangle_rule(tmp_path, capsys):
    inp = tmp_path / "rho.json"
    inp.write_text(json.dumps({"dim": 2, "entries": [[1, 0], [0, 0], [0, 0], [0, 0]]}))
    assert main(["channel", "apply", "--J", "1/2", "--K", "1", "--M", "3", "--rho", str(inp)]) == 2
    assert "triangle rule" in capsys.readouterr().err


def test_channel_apply_bad_inputs(tmp_path):
    inp = tmp_path / "rho.json"
    inp.write_text(json.dumps({"dim": 2, "entries": [[1, 0]]}))
    assert main(["channel", "apply", "--J", "1/2", "--K", "1", "--M", "1/2", "--rho", str(inp)]) == 2
    inp.write_text(json.dumps({"dim": 1, "entries": [[1, 0]]}))
    assert main(["channel", "apply", "--J", "1/2", "--K", "1", "--M", "1/2", "--rho", str(inp)]) == 2
    assert main(["channel", "apply", "--J", "1/2", "--K", "1", "--rho", str(inp)]) == 2
    assert main(["channel", "apply", "--J", "1/3", "--K", "1", "--M", "1", "--rho", str(inp)]) == 2


def test_entropy_minimize_json(capsys):
    argv = ["entropy", "minimize", "--J", "1", "--K", "2", "--restarts", "4", "--seed", "3"]
    assert main(argv) == 0
    first = capsys.readouterr().out
    doc = json.loads(first)
    assert abs(doc["value"] - 0.8979457248567795) < 1e-9
    assert len(doc["state"]) == 3
    assert main(argv) == 0
    assert capsys.readouterr().out == first


def test_scan_counterexamples_csv(capsys):
    assert main(["scan", "counterexamples", "--J", "1/2", "--Kmax", "1", "--step", "0.5", "--seed", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("J,K,weights,min_entropy")
    assert all(l.split(",")[7] == "0" for l in lines[1:])


def test_usage_errors():
    assert main([]) == 2
    assert main(["verify", "nothing"]) == 2
    assert main(["entropy", "minimize", "--J", "1", "--K", "2", "--weights", "x"]) == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "spinsemi", "spectrum", "--J", "1/2"], capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.splitlines() == ["ell,eigenvalue", "0,1.0000000000000000e+00", "1,3.3333333333333331e-01"]


def test_registry_and_formatting():
    assert make_function("omega_x").Lmax == 1
    f1, f2 = make_function("band_random(3, 5)"), make_function("band_random(3,5)")
    assert np.abs(f1.coeffs - f2.coeffs).max() == 0
    assert make_phi_from_text("abs_alpha(1.5)").name == "abs_alpha(1.5)"
    for bad in ("omega_w", "band_random(3)", "square(2)", "abs_alpha"):
        with pytest.raises(ConfigError):
            make_function(bad) if "omega" in bad or "band" in bad else make_phi_from_text(bad)
    assert [str(J) for J in spin_values({"from": "1/2", "to": 2, "step": "1/2"})] == ["1/2", "1", "3/2", "2"]
    assert fmt(0.1) == "1.0000000000000001e-01"
    assert dump_json({"a": [1, 0.5, True]}) == '{"a": [1, 5.0000000000000000e-01, true]}'
    assert parse_weights("0:0.5, 1:0.5")
    assert set(default_config()) >= {"inversion", "products", "traces", "channels", "entropy"}
