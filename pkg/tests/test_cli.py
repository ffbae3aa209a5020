"""End-to-end command line tests: wiring, envelopes, exit codes, config."""

import io
import json
import math

import numpy as np
import pytest

from brakeindex import __version__
from brakeindex.capmodel import cap_kernel_cokernel, CapSpec
from brakeindex.cli import main
from brakeindex.moduli import ModuliSpec, OrbitRecord, virtual_dimension
from brakeindex.core import HalfInt


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    envelope = json.loads(captured.out) if captured.out else None
    return code, envelope, captured.err


def write_doc(tmp_path, doc, name="doc.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc), encoding="utf-8")
    return str(p)


def test_index_rotation_document(tmp_path, capsys):
    doc = {"path": {"kind": "rotation", "omega": 3 * math.pi}}
    code, env, _ = run(capsys, "index", write_doc(tmp_path, doc))
    assert code == 0
    rep = env["report"]
    assert rep["cz"]["value"] == {"doubled": 6}
    assert rep["mu1"]["value"] == {"doubled": 3}
    assert rep["mu2"]["value"] == {"doubled": 3}
    assert rep["nullities"] == {"nu": 0, "nu1": 0, "nu2": 0}
    assert env["tool"] == "brakeindex"
    assert env["version"] == __version__
    assert env["command"] == "index"


def test_index_sampled_path_autodetects_base(tmp_path, capsys):
    times = np.linspace(0.0, 1.0, 101)
    mats = [[[math.cos(math.pi * t), -math.sin(math.pi * t)],
             [math.sin(math.pi * t), math.cos(math.pi * t)]] for t in times]
    doc = {"path": {"times": times.tolist(), "matrices": mats},
           "index": "cz"}
    code, env, _ = run(capsys, "index", write_doc(tmp_path, doc))
    assert code == 0
    assert env["report"]["cz"]["value"] == {"doubled": 2}
    assert "mu1" not in env["report"]


def test_out_flag_writes_report_file(tmp_path, capsys):
    doc = {"path": {"kind": "rotation", "omega": 1.0}, "index": "nullities"}
    out = tmp_path / "report.json"
    code = main(["index", write_doc(tmp_path, doc), "--out", str(out)])
    assert code == 0
    assert capsys.readouterr().out == ""
    env = json.loads(out.read_text(encoding="utf-8"))
    assert env["report"]["nullities"] == {"nu": 0, "nu1": 0, "nu2": 0}


def test_input_hash_ignores_formatting(tmp_path, capsys):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    a.write_text('{"path": {"kind": "rotation", "omega": 1.0}}')
    b.write_text('{\n  "path": {"omega": 1.0,   "kind": "rotation"}\n}')
    _, env_a, _ = run(capsys, "index", str(a))
    _, env_b, _ = run(capsys, "index", str(b))
    assert env_a["input_sha256"] == env_b["input_sha256"]
    assert len(env_a["input_sha256"]) == 64


def test_stdin_input(tmp_path, capsys, monkeypatch):
    doc = {"path": {"kind": "rotation", "omega": 1.0}, "index": "mu1"}
    monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps(doc)))
    code, env, _ = run(capsys, "index", "-")
    assert code == 0
    assert env["report"]["mu1"]["value"] == {"doubled": 1}


def test_schema_violations_exit_2(tmp_path, capsys):
    doc = {"path": {"kind": "rotation", "omega": "fast"}, "extra": 1}
    code, env, _ = run(capsys, "index", write_doc(tmp_path, doc))
    assert code == 2
    assert env["error"]["type"] == "ValidationError"
    assert env["error"]["violations"]
    assert env.get("report") is None


def test_invalid_json_exit_2(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{nope", encoding="utf-8")
    code, env, _ = run(capsys, "index", str(p))
    assert code == 2
    assert "JSON" in env["error"]["message"]


def test_spectral_flow_command(tmp_path, capsys):
    eye = [[1.0, 0.0], [0.0, 1.0]]
    doc = {
        "minus": {"const": eye},
        "plus": {"const": [[7.0, 0.0], [0.0, 7.0]]},
        "domain": "full",
        "K": 8,
    }
    code, env, _ = run(capsys, "spectral-flow", write_doc(tmp_path, doc))
    assert code == 0
    assert env["report"]["flow"] == 2
    assert len(env["report"]["crossings"]) == 1
    assert env["report"]["crossings"][0]["jump"] == 2

    doc["domain"] = "brake"
    code, env, _ = run(capsys, "spectral-flow", write_doc(tmp_path, doc))
    assert code == 0
    assert env["report"]["flow"] == 1


def test_vdim_command_matches_library(tmp_path, capsys):
    doc = {
        "n": 2,
        "genus": 0,
        "positive_brake": [
            {"kind": "brake", "label": "top", "mu1": {"doubled": 3},
             "nullity": [0, 0, 0]},
        ],
        "negative_pairs": [
            {"kind": "pair", "mu_cz": {"doubled": 4}, "multiplicity": 1},
        ],
        "c1": 1,
    }
    code, env, _ = run(capsys, "vdim", write_doc(tmp_path, doc))
    assert code == 0
    rep = env["report"]
    spec = ModuliSpec(
        n=2, genus=0,
        positive_brake=(OrbitRecord(kind="brake", label="top",
                                    mu1=HalfInt(3)),),
        negative_pairs=(OrbitRecord(kind="pair", mu_cz=HalfInt(4)),),
    )
    want = virtual_dimension(spec, c1=1)
    assert rep["virtual"] == {"doubled": want.virtual.doubled}
    assert rep["fredholm"] == {"doubled": want.fredholm.doubled}
    assert rep["routes"]["assembled"] == rep["routes"]["closed"]
    assert rep["integer_valued"] == want.integer_valued


def test_vdim_kind_mismatch_exit_2(tmp_path, capsys):
    doc = {
        "n": 1,
        "genus": 0,
        "positive_brake": [
            {"kind": "pair", "mu_cz": {"doubled": 2}},
        ],
    }
    code, env, _ = run(capsys, "vdim", write_doc(tmp_path, doc))
    assert code == 2
    assert any("mismatch" in v for v in env["error"]["violations"])


def test_brake_orbit_command(tmp_path, capsys):
    doc = {
        "system": {"name": "harmonic", "n": 1},
        "energy": 0.5,
        "q_guess": [1.1],
        "period_guess": 6.0,
        "steps": 512,
    }
    code, env, _ = run(capsys, "brake-orbit", write_doc(tmp_path, doc))
    assert code == 0
    rep = env["report"]
    assert rep["period"] == pytest.approx(2 * math.pi, abs=1e-7)
    assert rep["energy"] == pytest.approx(0.5)
    assert rep["reeb_factor"] == pytest.approx(2.0, abs=1e-9)
    lin = rep["linearized"]
    assert lin["mu1"]["value"] == {"doubled": 2}
    assert lin["nullities"] == {"nu": 2, "nu1": 1, "nu2": 1}
    assert lin["degenerate"] is True
    assert lin["symmetry_residual"] < 1e-7


def test_brake_orbit_failure_exit_3(tmp_path, capsys):
    doc = {
        "system": {"name": "harmonic", "n": 1},
        "energy": 0.5,
        "q_guess": [1.0],
        "period_guess": 1.5,
        "steps": 256,
    }
    code, env, _ = run(capsys, "brake-orbit", write_doc(tmp_path, doc))
    assert code == 3
    assert env["error"]["type"] == "NoConvergence"


def test_classify_command(tmp_path, capsys):
    doc = {"path": {"kind": "hyperbolic", "lam": -2.0, "samples": 513},
           "n": 1, "max_m": 4}
    code, env, _ = run(capsys, "classify", write_doc(tmp_path, doc))
    assert code == 0
    rows = env["report"]["rows"]
    assert [r["verdict"] for r in rows] == ["good", "bad", "good", "bad"]
    assert [r["cz"]["doubled"] for r in rows] == [2, 4, 6, 8]
    assert all(r["degenerate"] is False for r in rows)


def test_cap_oracle_flags(capsys):
    code, env, _ = run(capsys, "cap-oracle", "--omega", "7.0",
                       "--rank", "2", "--slow-oracle")
    assert code == 0
    rep = env["report"]
    ker, coker = cap_kernel_cokernel(CapSpec(7.0, rank=2))
    assert (rep["kernel"], rep["cokernel"]) == (ker, coker) == (4, 0)
    assert rep["index"] == {"doubled": 8}
    assert rep["slow_oracle"]["agrees"] is True


def test_cap_oracle_resonant_exit_2(capsys):
    code, env, _ = run(capsys, "cap-oracle", "--omega", str(2 * math.pi))
    assert code == 2
    assert env["error"]["type"] == "OmegaResonant"


def test_selfcheck_subset(capsys):
    code, env, err = run(capsys, "selfcheck", "--criteria", "1,8")
    assert code == 0
    rep = env["report"]
    assert rep["passed"] is True
    assert [r["number"] for r in rep["results"]] == [1, 8]
    assert all(r["passed"] for r in rep["results"])
    assert err.count("PASS") == 2


def test_config_file_and_env_precedence(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"ode.steps": 512, "tol.rank": 1e-7}))
    monkeypatch.setenv("BIT_ODE_STEPS", "256")
    doc = {"path": {"kind": "rotation", "omega": 1.0}, "index": "nullities"}
    code, env, _ = run(capsys, "index", write_doc(tmp_path, doc),
                       "--config", str(cfg))
    assert code == 0
    assert env["config"]["ode.steps"] == 256       # env beats file
    assert env["config"]["tol.rank"] == 1e-7       # file beats default
    assert env["config"]["fourier.K"] == 32        # default survives


def test_config_flag_before_subcommand(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"fourier.K": 16}))
    doc = {"path": {"kind": "rotation", "omega": 1.0}}
    code, env, _ = run(capsys, "--config", str(cfg), "index",
                       write_doc(tmp_path, doc))
    assert code == 0
    assert env["config"]["fourier.K"] == 16


def test_unknown_config_key_exit_2(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"tol.everything": 1.0}))
    doc = {"path": {"kind": "rotation", "omega": 1.0}}
    code, env, _ = run(capsys, "index", write_doc(tmp_path, doc),
                       "--config", str(cfg))
    assert code == 2
    assert "tol.everything" in env["error"]["message"]


def test_bad_env_value_exit_2(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("BIT_FOURIER_K", "many")
    doc = {"path": {"kind": "rotation", "omega": 1.0}}
    code, env, _ = run(capsys, "index", write_doc(tmp_path, doc))
    assert code == 2
    assert "BIT_FOURIER_K" in env["error"]["message"]
