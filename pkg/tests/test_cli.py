import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from torusqm.cli import main, parse_complex, parse_time, parse_times
from torusqm.io import read_csv


def run(args, tmp_path, sub="out"):
    out = tmp_path / sub
    code = main(args + ["--output-dir", str(out)])
    return code, out


def test_parse_helpers():
    assert parse_complex("1.5,-0.2") == 1.5 - 0.2j
    assert parse_complex("0.5") == 0.5
    assert parse_time("pi/4") == pytest.approx(math.pi / 4)
    assert parse_time("3pi/4") == pytest.approx(3 * math.pi / 4)
    assert parse_time("2*pi") == pytest.approx(2 * math.pi)
    assert parse_time("50pi/100") == pytest.approx(math.pi / 2)
    assert parse_time("0.25") == 0.25
    assert parse_times("0..pi:3") == pytest.approx([0, math.pi / 2, math.pi])
    assert len(parse_times("0,pi/4,pi/2,3pi/4,pi")) == 5


def test_algebra_check(tmp_path, capsys):
    code, out = run(["algebra-check", "--n", "8"], tmp_path)
    assert code == 0
    data = json.loads((out / "identities.json").read_text())
    assert data["n"] == 8 and all(e["pass"] for e in data["identities"])
    assert data["meta"]["version"] == "0.1.0"
    assert run(["algebra-check", "--n", "1"], tmp_path, "one")[0] == 0


@pytest.mark.parametrize("argv", [["algebra-check", "--n", "0"], ["algebra-check", "--n", "65"]])
def test_algebra_check_usage(argv, tmp_path):
    with pytest.raises(SystemExit) as info:
        run(argv, tmp_path)
    assert info.value.code == 2


def test_mus_half_targets(tmp_path, capsys):
    code, out = run(["mus", "--n", "8", "--target-u", "0.5,0", "--target-v", "0.5,0", "--svg"], tmp_path)
    # unreachable targets: best effort files are written and the run is flagged
    assert code == 1
    state = json.loads((out / "state.json").read_text())
    assert state["state"]["converged"] is False
    _, rows = read_csv(out / "state_sites.csv")
    p = np.array([float(r[1]) for r in rows])
    assert int(np.sum((p > np.roll(p, 1)) & (p >= np.roll(p, -1)))) == 1
    ET.parse(out / "state_sites.svg")
    code, _ = run(["mus", "--n", "8", "--target-u", "0.5,0", "--target-v", "0.5,0", "--best-fit"], tmp_path, "b")
    assert code == 0


def test_mus_reference_root(tmp_path, capsys):
    code, out = run(["mus", "--n", "100", "--mu", "1.5,0", "--root-near", "-1.497,0.094"], tmp_path)
    assert code == 0
    lam = json.loads((out / "state.json").read_text())["state"]["spec"]["lambda"]
    assert abs(complex(*lam) - (-1.497 + 0.094j)) <= 2e-2
    assert "lambda = -1.49704" in capsys.readouterr().out
    code, out = run(["mus", "--n", "100", "--mu", "1.5,0", "--root", "98"], tmp_path, "r")
    assert code == 0


def test_mus_degenerate_mu(tmp_path, capsys):
    code, out = run(["mus", "--n", "4", "--mu", "1,0"], tmp_path)
    assert code == 0
    assert "warning" in capsys.readouterr().err
    _, rows = read_csv(out / "state_sites.csv")
    assert all(abs(float(r[1]) - 0.25) <= 1e-14 for r in rows)


def test_mus_usage_errors(tmp_path):
    for argv in (["mus", "--n", "8"], ["mus", "--n", "8", "--mu", "1.5,0", "--basis", "2"],
                 ["mus", "--n", "8", "--mu", "1.5,0", "--root", "9"]):
        with pytest.raises(SystemExit) as info:
            run(argv, tmp_path)
        assert info.value.code == 2


def test_evolve_half_targets_frames(tmp_path, capsys):
    argv = ["evolve", "--n", "8", "--k", "2", "--target-u", "0.5,0", "--target-v", "0.5,0", "--best-fit",
            "--times", "0,pi/4,pi/2,3pi/4,pi", "--svg"]
    code, out = run(argv, tmp_path)
    assert code == 0
    frames = sorted(out.glob("frame_*.svg"))
    assert len(frames) == 5
    _, rows = read_csv(out / "trace_sites.csv")
    p0 = np.array([float(r[3]) for r in rows if r[0] == "0"])
    p4 = np.array([float(r[3]) for r in rows if r[0] == "4"])
    assert np.max(np.abs(p4 - p0)) <= 1e-6
    # every bar value in a frame is a string present in the CSV
    values = {r[3] for r in rows}
    for f in frames:
        root = ET.parse(f).getroot()
        bars = [e for e in root.iter() if e.get("data-value") is not None]
        assert len(bars) == 8 and all(b.get("data-value") in values for b in bars)


def test_evolve_halfway_n100(tmp_path, capsys):
    code, out = run(["evolve", "--n", "100", "--k", "25", "--mu", "1.5,0", "--root", "98", "--times", "0..pi/2"],
                    tmp_path)
    assert code == 0
    _, rows = read_csv(out / "trace_sites.csv")
    last = max(int(r[0]) for r in rows)
    p0 = np.array([float(r[3]) for r in rows if r[0] == "0"])
    pl = np.array([float(r[3]) for r in rows if int(r[0]) == last])
    assert (int(np.argmax(pl)) - int(np.argmax(p0))) % 100 == 50


def test_evolve_n2(tmp_path, capsys):
    code, out = run(["evolve", "--n", "2", "--k", "1", "--times", "0,pi/2"], tmp_path)
    assert code == 0
    header, rows = read_csv(out / "trace.csv")
    assert header == ["t", "abs_survival", "arg_survival", "width"]
    assert abs(float(rows[1][1]) - 1) <= 1e-12


def test_evolve_missing_k(tmp_path):
    with pytest.raises(SystemExit) as info:
        run(["evolve", "--n", "2", "--times", "0,pi/2"], tmp_path)
    assert info.value.code == 2


def test_revival_commands(tmp_path, capsys):
    code, out = run(["revival", "--n", "8", "--k", "4"], tmp_path)
    assert code == 0
    data = json.loads((out / "revival.json").read_text())
    assert data["spectral"]["period"] == pytest.approx(math.pi / 2)
    assert data["grid"]["period"] == pytest.approx(math.pi / 2)
    assert data["spectral"]["kind"] == "exact" and data["consistent"]

    code, out = run(["revival", "--n", "12", "--k", "2"], tmp_path, "r12")
    assert code == 0
    assert json.loads((out / "revival.json").read_text())["grid"]["period"] == pytest.approx(2 * math.pi)

    code, out = run(["revival", "--n", "16", "--k", "1", "--state", "mus"], tmp_path, "r16")
    data = json.loads((out / "revival.json").read_text())
    assert code == 0 and data["grid"]["kind"] in ("approximate", "none")
    assert data["spectral"]["kind"] == "none"


def test_gup_command(tmp_path, capsys):
    code, out = run(["gup", "--n-list", "64,128,256,512,1024"], tmp_path)
    assert code == 0
    fit = json.loads((out / "gup.json").read_text())["fit"]
    assert abs(fit["exponent"] + 0.5) <= 0.15
    header, rows = read_csv(out / "gup.csv")
    assert header == ["n", "disp_u", "disp_v", "cross_sq", "gap", "dq2", "dp2", "product", "excess",
                      "predicted_excess"]
    root = ET.parse(out / "gup_loglog.svg").getroot()
    marks = [e.get("data-value") for e in root.iter() if e.get("data-value") is not None]
    assert marks == [r[8] for r in rows]

    code, out2 = run(["gup", "--n-list", "64,128,256,512,1024", "--probe", "dp2x2"], tmp_path, "x2")
    assert code == 0
    fit2 = json.loads((out2 / "gup.json").read_text())["fit"]
    assert 1.4 <= fit2["amplitude"] / fit["amplitude"] <= 2.6


def test_gup_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        run(["gup", "--n-list", "64,128"], tmp_path)
    assert info.value.code == 2
    code, _ = run(["gup", "--probe", "gaussian"], tmp_path)
    assert code == 1


def test_reruns_are_byte_identical(tmp_path, capsys):
    for argv in (["mus", "--n", "16", "--mu", "0.8,0.3", "--root", "3"],
                 ["evolve", "--n", "12", "--k", "2", "--basis", "3", "--times", "0..pi:4", "--svg"],
                 ["revival", "--n", "8", "--k", "2", "--seed", "5"]):
        run(argv, tmp_path, "a")
        run(argv, tmp_path, "b")
    a, b = tmp_path / "a", tmp_path / "b"
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_csv_header_echo(tmp_path, capsys):
    _, out = run(["mus", "--n", "6", "--basis", "2"], tmp_path)
    text = (out / "state_sites.csv").read_text()
    assert text.startswith("# artifact=torusqm version=0.1.0\n")
    assert "# n=6" in text and "# basis=2" in text
