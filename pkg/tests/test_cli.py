import csv
import json
import math
import subprocess
import sys

import pytest

from abring.cli import build_parser, main

SUBCOMMANDS = ["transmit", "sweep", "zeros", "resonances", "evolve", "cage", "audit"]


def exit_code(argv):
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_transmit_three_sevenths(capsys):
    code, out, _ = run(capsys, "transmit", "--n-alpha", "3", "--n-beta", "1", "--flux", "0", "--k", "1.0471975512")
    assert code == 0
    d = json.loads(out)
    assert d["T"] == pytest.approx(3 / 7, abs=1e-9)
    assert d["method"] == "LinearSystem"


def test_transmit_methods_agree(capsys):
    args = ["transmit", "--n-alpha", "4", "--n-beta", "3", "--flux", "1.1", "--k", "0.7"]
    a = json.loads(run(capsys, *args, "--method", "oracle")[1])
    b = json.loads(run(capsys, *args, "--method", "closed")[1])
    for key in ("re_t", "im_t", "re_r", "im_r", "T", "R"):
        assert a[key] == pytest.approx(b[key], abs=1e-10)


def test_flux_in_pi(capsys):
    a = json.loads(run(capsys, "transmit", "--n-alpha", "3", "--n-beta", "1", "--flux-in-pi", "0.5", "--k", "1.5707963268")[1])
    assert a["flux"] == pytest.approx(math.pi / 2, abs=1e-11)
    assert a["T"] == pytest.approx(8 / 9, abs=1e-9)


def test_twelve_significant_digits(capsys):
    d = json.loads(run(capsys, "transmit", "--n-alpha", "4", "--n-beta", "3", "--flux", "1.1", "--k", "0.7")[1])
    for key in ("re_t", "im_t", "T", "R"):
        assert d[key] == float(f"{d[key]:.12g}")


def test_band_edge_exit_code(capsys):
    code, _, err = run(capsys, "transmit", "--n-alpha", "3", "--n-beta", "1", "--k", "0")
    assert code == 2
    assert "band edge" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["transmit", "--n-alpha", "x", "--n-beta", "1", "--k", "1"],
        ["transmit", "--n-beta", "1", "--k", "1"],
        ["frobnicate"],
        [],
        ["transmit", "--n-alpha", "3", "--n-beta", "1", "--k", "1", "--method", "magic"],
    ],
)
def test_usage_errors(capsys, argv):
    assert exit_code(argv) == 1


def test_domain_errors(capsys):
    assert run(capsys, "transmit", "--n-alpha", "0", "--n-beta", "1", "--k", "1")[0] == 2
    assert run(capsys, "zeros", "--n-alpha", "3", "--n-beta", "1", "--flux", "0.5")[0] == 2
    assert run(capsys, "cage", "--n-alpha", "2", "--n-beta", "3", "--k", "1.5707963268")[0] == 2
    assert run(capsys, "resonances", "--n-alpha", "3", "--n-beta", "5", "--k", "1.0", "--no-fallback")[0] == 2


@pytest.mark.parametrize("command", SUBCOMMANDS)
def test_help_documents_every_flag(command, capsys):
    with pytest.raises(SystemExit) as info:
        main([command, "--help"])
    assert info.value.code == 0
    text = capsys.readouterr().out
    sub = build_parser()._subparsers._group_actions[0].choices[command]
    for action in sub._actions:
        if action.option_strings and action.dest != "help":
            assert action.help, action.dest
            assert action.option_strings[-1] in text


def test_zeros(capsys):
    d = json.loads(run(capsys, "zeros", "--n-alpha", "3", "--n-beta", "1", "--flux", "0")[1])
    assert d["zeros"] == pytest.approx([math.pi / 2], abs=1e-10)
    d = json.loads(run(capsys, "zeros", "--n-alpha", "2", "--n-beta", "2", "--flux-in-pi", "1")[1])
    assert d["zeros"] == "all"


def test_resonances(capsys):
    d = json.loads(run(capsys, "resonances", "--n-alpha", "2", "--n-beta", "1", "--k", "1.5707963268")[1])
    assert d["fluxes"] == pytest.approx([-math.pi / 2, math.pi / 2], abs=1e-9)


def test_sweep_half_flux_column(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, summary, _ = run(capsys, "sweep", "--n-alpha", "2", "--n-beta", "2", "--k-num", "40",
                           "--flux-num", "5", "--output", str(out))
    assert code == 0 and "s.csv" in summary
    rows = list(csv.DictReader(out.open()))
    half = [float(r["T"]) for r in rows if abs(abs(float(r["flux"])) - math.pi) < 1e-9]
    assert len(half) == 80 and max(half) < 1e-18
    assert json.loads((tmp_path / "s.csv.json").read_text())["flux_grid"]["num"] == 5


def test_evolve_summary(tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    snap = tmp_path / "snap.csv"
    code, out, _ = run(capsys, "evolve", "--n-alpha", "3", "--n-beta", "1", "--flux", "1.5707963268",
                       "--k", "1.5707963268", "--output", str(trace),
                       "--snapshot-times", "0,50", "--snapshot-output", str(snap))
    assert code == 0
    fields = dict(item.split("=") for item in out.split())
    assert float(fields["T_dyn"]) == pytest.approx(8 / 9, abs=0.02)
    assert trace.read_text().startswith("time,p_in,p_ring,p_out,norm\n")
    assert snap.read_text().startswith("time,site,density\n")


def test_cage(capsys):
    code, out, _ = run(capsys, "cage", "--n-alpha", "2", "--n-beta", "4", "--flux-in-pi", "1", "--k", "1.5707963268")
    assert code == 0
    assert float(out.strip().split("=")[1]) < 1e-10


def test_audit(tmp_path, capsys):
    path = tmp_path / "audit.json"
    assert run(capsys, "audit", "--n-alpha", "2", "--n-beta", "2", "--samples", "200", "--output", str(path))[0] == 0
    d = json.loads(path.read_text())
    assert d["passed"] is True and d["sample_count"] == 200


@pytest.mark.parametrize(
    "argv,output_flag",
    [
        (["transmit", "--n-alpha", "4", "--n-beta", "3", "--flux", "1.1", "--k", "0.7", "--method", "closed"], "--output"),
        (["sweep", "--n-alpha", "3", "--n-beta", "2", "--k-num", "30", "--flux-num", "7"], "--output"),
        (["audit", "--n-alpha", "3", "--n-beta", "3", "--samples", "100", "--seed", "5"], "--output"),
        (["evolve", "--n-alpha", "2", "--n-beta", "1", "--k", "1.2", "--width", "0.1"], "--output"),
    ],
)
def test_config_round_trip(tmp_path, capsys, argv, output_flag):
    out = tmp_path / "out"
    cfg = tmp_path / "cfg.json"
    assert run(capsys, *argv, output_flag, str(out), "--save-config", str(cfg))[0] == 0
    first = out.read_bytes()
    out.unlink()
    cfg2 = tmp_path / "cfg2.json"
    assert run(capsys, argv[0], "--config", str(cfg), "--save-config", str(cfg2))[0] == 0
    assert out.read_bytes() == first
    assert cfg2.read_bytes() == cfg.read_bytes()


def test_config_wrong_command(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "sweep", "n_alpha": 1}))
    assert run(capsys, "transmit", "--config", str(cfg))[0] == 1
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(capsys, "transmit", "--config", str(cfg))[0] == 1


def test_explicit_flag_beats_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_alpha": 3, "n_beta": 1, "flux": 0.0, "k": 0.5}))
    d = json.loads(run(capsys, "transmit", "--config", str(cfg), "--k", "1.0471975512")[1])
    assert d["T"] == pytest.approx(3 / 7, abs=1e-9)


def test_console_script():
    proc = subprocess.run(
        [sys.executable, "-m", "abring.cli", "zeros", "--n-alpha", "3", "--n-beta", "1"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["zeros"] == pytest.approx([math.pi / 2], abs=1e-10)
