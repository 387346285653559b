import json

import numpy as np
import pytest

from rsparam.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_coproduct_of_noise(capsys):
    code, out = run(capsys, "coproduct", "--tree", "Xi")
    assert code == 0
    assert json.loads(out) == {"terms": [{"basis": "Xi ⊗ 1", "coef": "1"}]}


def test_parse_error_reports_position(capsys):
    code, out = run(capsys, "coproduct", "--tree", "Xi I_(0)[Xi")
    assert code == 2
    assert json.loads(out)["position"] == 11


def test_bad_arguments_and_config(capsys, tmp_path):
    assert run(capsys, "check", "--suite", "nope")[0] == 2
    assert run(capsys, "gen", "--spec", str(tmp_path / "missing.json"))[0] == 2
    bad = tmp_path / "R.json"
    bad.write_text("not json")
    assert run(capsys, "renormalize", "--R", str(bad), "--tree", "Xi")[0] == 2


def test_rejected_character(capsys, tmp_path):
    path = tmp_path / "R.json"
    path.write_text(json.dumps([{"tree": "X Xi", "value": "1"}]))
    code, out = run(capsys, "renormalize", "--R", str(path), "--tree", "Xi")
    assert code == 2 and "error" in json.loads(out)


def test_gen_and_explain(capsys):
    code, out = run(capsys, "gen", "--spec", "pam")
    assert code == 0
    assert json.loads(out)["diagnostics"]["noise_cutoff_binding"] is True
    code, out = run(capsys, "explain", "--tree", "Xi I_(0)[Xi]")
    assert code == 0 and json.loads(out)["in_basis"] is True


def test_renormalize_with_given_character(capsys, tmp_path):
    path = tmp_path / "R.json"
    path.write_text(json.dumps({"character": [{"tree": "Xi I_(0)[Xi]", "value": "1/2"}],
                                "with_ext": True}))
    code, out = run(capsys, "renormalize", "--R", str(path), "--tree", "Xi I_(0)[Xi]")
    assert code == 0
    terms = {t["basis"]: t["coef"] for t in json.loads(out)["trees"][0]["R"]["terms"]}
    assert terms == {"Xi I_(0)[Xi]": "1", "o[2,1,0]": "1/2"}


def test_check_exit_codes(capsys):
    assert run(capsys, "check", "--suite", "hopf", "--spec", "kpz")[0] == 0
    assert run(capsys, "check", "--suite", "degpres", "--spec", "pam")[0] == 0
    code, out = run(capsys, "check", "--suite", "degpres", "--spec", "pam", "--no-ext")
    assert code == 1 and "error" in json.loads(out)


def test_model_report_is_byte_identical_and_dumps(capsys, tmp_path):
    args = ["model", "--spec", "pam", "--J", "10", "--no-scaling"]
    code_a, a = run(capsys, *args)
    code_b, b = run(capsys, *args, "--dump", str(tmp_path / "dump"))
    assert code_a == code_b == 0 and a == b
    meta = json.loads((tmp_path / "dump" / "fields.json").read_text())
    noise = np.fromfile(tmp_path / "dump" / "noise.f64", dtype="<f8")
    assert noise.size == 2 ** 10
    assert "noise" in meta["fields"]


def test_threads_env_validation(capsys, monkeypatch):
    monkeypatch.setenv("RS_THREADS", "zero")
    assert run(capsys, "coproduct", "--tree", "Xi")[0] == 2
