import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from conftest import ball
from critlap import bubbles as bb, io
from critlap.cli import main
from critlap.config import load_config, parse_config, to_toml
from critlap.errors import ConfigInvalid, DomainError, UnknownSuite
from critlap.runner import (
    EXIT_CHECKLIST,
    EXIT_CONFIG,
    EXIT_INCONCLUSIVE,
    EXIT_OK,
    reproduce_suite,
    run,
    suite_configs,
)

DEMOS = Path(__file__).resolve().parents[1] / "demos" / "configs"


def eigen_cfg(h=1 / 64):
    return {
        "task": "eigen",
        "seed": 0,
        "problem": {"n": 2, "p": 2.0},
        "domain": {"kind": "box", "h": h, "lo": [0.0, 0.0], "hi": [1.0, 1.0]},
    }


def constants_cfg():
    return {
        "task": "constants",
        "seed": 0,
        "problem": {"n": 3, "p": 2.0, "d": 1},
        "domain": {"kind": "ball", "h": 0.25, "center": [0.0] * 3, "radius": 1.0},
        "G": {"family": "power_sum", "coeffs": [1.0], "degree": 6.0},
    }


def test_eigen_report(tmp_path):
    rep = run(eigen_cfg(), tmp_path, deterministic=True)
    assert rep.exit_code == EXIT_OK
    lam = float(rep.get("lambda1.value"))
    assert abs(lam - 2 * np.pi**2) / (2 * np.pi**2) < 0.01
    parsed = io.read_report(rep.path)
    assert float(parsed["lambda1.value"]) == lam
    assert (tmp_path / "report.eigenfield.csv").is_file()
    assert "timing.seconds" not in parsed


def test_constants_degenerate_case():
    rep = run(constants_cfg())
    S = bb.sobolev_constant(3, 2.0)
    assert float(rep.get("constants.N")) == pytest.approx(S, rel=1e-12)
    assert float(rep.get("constants.S")) == S


def test_bad_G_degree_names_block():
    cfg = constants_cfg()
    cfg["G"]["degree"] = 5.0
    with pytest.raises(ConfigInvalid) as exc:
        parse_config(cfg)
    assert exc.value.field == "G"


@pytest.mark.parametrize(
    "mutate,field",
    [
        (lambda c: c.pop("seed"), "seed"),
        (lambda c: c.update(task="fly"), "task"),
        (lambda c: c["problem"].update(p=3.5), "problem.p"),
        (lambda c: c["domain"].update(h=-1.0), "domain.h"),
        (lambda c: c.update(solver={"tolerance": 1.0}), "solver"),
        (lambda c: c.pop("G"), "G"),
        (lambda c: c["problem"].update(d=2), "G"),
        (lambda c: c.update(coefficient={"family": "spiral"}), "coefficient"),
    ],
)
def test_config_errors(mutate, field):
    cfg = constants_cfg()
    mutate(cfg)
    with pytest.raises(ConfigInvalid) as exc:
        parse_config(cfg)
    assert exc.value.field == field


def test_toml_round_trip(tmp_path):
    cfg = constants_cfg()
    cfg["G"] = {
        "family": "linear_combination",
        "coeffs": [1.0, 0.5],
        "terms": [
            {"family": "power_sum", "coeffs": [1.0], "degree": 6.0},
            {"family": "quad_form_power", "M": [[1.0]], "degree": 6.0},
        ],
    }
    p = tmp_path / "c.toml"
    p.write_text(to_toml(cfg), encoding="utf-8")
    assert load_config(p).raw == parse_config(cfg).raw


def test_report_round_trip(tmp_path):
    entries = {"a": {"b": 0.1 + 0.2, "c": [1.0, np.float64(2.5)]}, "flag": True, "none": None, "big": 1e300}
    io.write_report(tmp_path / "r.report", entries)
    back = io.read_report(tmp_path / "r.report")
    assert float(back["a.b"]) == 0.1 + 0.2
    assert back["a.c"] == "[1, 2.5]" and back["flag"] == "true" and back["none"] == "none"
    assert float(back["big"]) == 1e300


def test_field_dump_round_trip(tmp_path, rng):
    dom = ball(2, 1 / 16)
    u = rng.standard_normal((2,) + dom.shape) * dom.mask
    io.dump_field(tmp_path / "u.csv", u, dom)
    assert np.array_equal(io.load_field(tmp_path / "u.csv", dom), u)
    with pytest.raises(DomainError):
        io.load_field(tmp_path / "u.csv", ball(2, 1 / 8))


def test_checklist_exit_code():
    cfg = constants_cfg()
    cfg.update(task="certify-exist", F={"family": "power_sum", "coeffs": [1.0], "degree": 2.0, "scale_by": "lambda1", "factor": 1.5})
    rep = run(cfg)
    assert rep.exit_code == EXIT_CHECKLIST
    assert rep.get("failure.hypothesis") == "coercivity"


def test_inconclusive_exit_code():
    cfg = constants_cfg()
    cfg["task"] = "certify-exist"
    cfg["domain"]["h"] = 1 / 8
    rep = run(cfg)
    assert rep.exit_code == EXIT_INCONCLUSIVE
    assert rep.get("certificate.kind") == "inconclusive"


def test_deterministic_reports_identical(tmp_path):
    a = run(eigen_cfg(1 / 32), tmp_path / "a", deterministic=True)
    b = run(eigen_cfg(1 / 32), tmp_path / "b", deterministic=True)
    assert a.path.read_bytes() == b.path.read_bytes()
    assert (tmp_path / "a" / "report.eigenfield.csv").read_bytes() == (tmp_path / "b" / "report.eigenfield.csv").read_bytes()


def test_cli_in_process(tmp_path, capsys):
    code = main(["eigen", "--config", str(DEMOS / "eigen_disk.toml"), "--out", str(tmp_path), "--deterministic"])
    assert code == EXIT_OK
    rep = io.read_report(tmp_path / "eigen_disk.report")
    lam, MF, prod = (float(rep[k]) for k in ("lambda1.value", "lambda1F.M_F", "lambda1F.M_F_times_value"))
    assert MF == pytest.approx(2.0)
    assert prod == pytest.approx(lam, rel=0.01)


def test_cli_errors(tmp_path, capsys):
    assert main(["constants", "--config", str(DEMOS / "eigen_disk.toml"), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["eigen", "--config", str(tmp_path / "missing.toml")]) == EXIT_CONFIG
    bad = tmp_path / "bad.toml"
    bad.write_text("task = \n", encoding="utf-8")
    assert main(["eigen", "--config", str(bad)]) == EXIT_CONFIG
    assert main(["suite"]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "does not match" in err and "invalid config" in err


def test_cli_subprocess(tmp_path):
    cfg = tmp_path / "e.toml"
    cfg.write_text(to_toml(eigen_cfg(1 / 16)), encoding="utf-8")
    out = subprocess.run(
        [sys.executable, "-m", "critlap.cli", "eigen", "--config", str(cfg), "--out", str(tmp_path / "o")],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0, out.stderr
    assert (tmp_path / "o" / "e.report").read_text(encoding="utf-8").startswith(io.REPORT_HEADER)


def test_pohozaev_check_missing_field(tmp_path):
    cfg = constants_cfg()
    cfg.update(task="pohozaev-check", pohozaev={"field": "nope.csv"})
    with pytest.raises(ConfigInvalid) as exc:
        run(cfg, base=tmp_path)
    assert exc.value.field == "pohozaev.field"


def test_unknown_suite():
    with pytest.raises(UnknownSuite):
        suite_configs("thm99")


def test_suite_configs_validate():
    for name in ("bn-classical", "thm12-interval", "thm13-bubble", "thm14-cusp", "thm15-pohozaev", "constants-audit"):
        for label, data in suite_configs(name).items():
            parse_config(data)


def test_suite_constants_audit(tmp_path):
    res = reproduce_suite("constants-audit", tmp_path)
    assert res.passed, res.summary()
    assert (tmp_path / "constants-audit" / "aniso.toml").is_file()


def test_suite_thm14_cusp():
    res = reproduce_suite("thm14-cusp", deterministic=True)
    assert res.passed, res.summary()
    assert float(res.reports["cusp"].get("config.problem.p")) < np.sqrt(2)
