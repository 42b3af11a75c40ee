import json
import subprocess
import sys

import numpy as np
import pytest

from fewcopy import io
from fewcopy.cli import main
from fewcopy.errors import ConfigError, NonBinaryOutcome, UnknownSettingId
from fewcopy.protocol import OutcomeRecord, analyze, run_protocol
from fewcopy.states import StateSource, cluster6
from fewcopy.witness import builtin_w1, builtin_w2, translate, w1_witness_spec


@pytest.fixture
def w1_file(tmp_path):
    path = tmp_path / "w1.json"
    path.write_text(json.dumps(io.witness_to_dict(w1_witness_spec())))
    return path


def test_set_json_round_trip(tmp_path):
    for mset in (builtin_w1(), builtin_w2(), translate(w1_witness_spec())):
        path = tmp_path / "set.json"
        io.save_set(mset, path)
        again = io.load_set(path)
        assert io.set_id(again) == io.set_id(mset)
        for a, b in zip(again.observables, mset.observables):
            np.testing.assert_array_equal(a.matrix, b.matrix)


def test_cli_translate(w1_file, tmp_path, capsys):
    out = tmp_path / "set.json"
    assert main(["translate", str(w1_file), "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "L = 2" in text and "tau = 4" in text and "a = 0" in text and "p_s = 0.750000" in text
    assert len(io.load_set(out)) == 2
    assert main(["translate", "--witness", "w2", "--out", str(out)]) == 0
    assert "L = 64" in capsys.readouterr().out
    assert len(io.load_set(out)) == 64


def test_projector_form_witness(tmp_path):
    path = tmp_path / "w.json"
    path.write_text(json.dumps({"format": 1, "type": "witness", "g_s": 3, "g_e": 4,
                                "threshold_class": "bisep", "terms": [
                                    {"projector": ["ZZIIII", "IZZIII", "IZIXXX"], "coefficient": 2},
                                    {"projector": ["XXXIZI", "IIIZZI", "IIIIZZ"], "coefficient": 2}]}))
    mset = translate(io.load_witness(path))
    assert len(mset) == 2 and mset.p_s_full == pytest.approx(0.75)


def test_bad_pauli_reported(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"format": 1, "g_s": 1, "terms": [[[1.0, "ZQIIII"]]]}))
    assert main(["translate", str(path)]) == 1
    err = capsys.readouterr().err
    assert "'Q'" in err and "terms[0][0][1]" in err


def test_json_syntax_error_has_line(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"g_s": 1,\n "terms": [}\n')
    assert main(["translate", str(path)]) == 1
    assert "line 2" in capsys.readouterr().err


def test_simulate_ideal(tmp_path):
    out = tmp_path / "r.jsonl"
    assert main(["simulate", "--witness", "w2", "-N", "20", "--seed", "1", "--out", str(out)]) == 0
    rec = OutcomeRecord.load(out)
    assert rec.N == 20 and rec.S == 20


def test_simulate_byte_reproducible(tmp_path):
    paths = [tmp_path / f"r{i}.jsonl" for i in range(2)]
    for p in paths:
        main(["simulate", "--witness", "w2", "--source", "white-noise", "--visibility", "0.746",
              "-N", "160", "--seed", "42", "--out", str(p)])
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_simulate_w1_rounds(tmp_path):
    out = tmp_path / "r.jsonl"
    main(["simulate", "--witness", "w1", "-N", "150", "--seed", "5", "--out", str(out)])
    rec = OutcomeRecord.load(out)
    assert rec.N == 150 and set(rec.settings.tolist()) <= {0, 1}


def test_simulate_env_seed(tmp_path, monkeypatch):
    monkeypatch.setenv("FEWCOPY_SEED", "77")
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    main(["simulate", "--source", "white-noise", "--visibility", "0.5", "-N", "30", "--out", str(a)])
    main(["simulate", "--source", "white-noise", "--visibility", "0.5", "-N", "30", "--seed", "77", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_simulate_source_config(tmp_path):
    cfg = tmp_path / "src.json"
    cfg.write_text(json.dumps({"kind": "drift-schedule", "cycle": True, "states": [
        {"name": "basis", "bits": "000000"}, {"name": "maximally-mixed", "n": 6}]}))
    out = tmp_path / "r.jsonl"
    assert main(["simulate", "--witness", "w1", "--source", str(cfg), "-N", "40", "--seed", "2", "--out", str(out)]) == 0
    assert OutcomeRecord.load(out).metadata["source"]["kind"] == "drift-schedule"


def test_simulate_missing_visibility(tmp_path, capsys):
    assert main(["simulate", "--source", "white-noise", "-N", "3", "--seed", "1",
                 "--out", str(tmp_path / "r.jsonl")]) == 1


def test_round_trip_matches_in_memory(tmp_path):
    out = tmp_path / "r.jsonl"
    main(["simulate", "--witness", "w2", "--source", "white-noise", "--visibility", "0.746",
          "-N", "160", "--seed", "8", "--out", str(out)])
    mset = builtin_w2()
    src = StateSource.white_noise(cluster6(), 0.746)
    mem = run_protocol(src, mset, 160, np.random.default_rng(8))
    assert analyze(OutcomeRecord.load(out), mset) == analyze(mem, mset)


def _write_record(path, mset, S, N):
    OutcomeRecord(io.set_id(mset), [0] * N, [1] * S + [0] * (N - S)).save(path)


def test_cli_analyze_headline(tmp_path, capsys):
    rec = tmp_path / "r.jsonl"
    _write_record(rec, builtin_w2(), 19, 20)
    curve = tmp_path / "curve.csv"
    code = main(["analyze", str(rec), "--witness", "w2", "--bound", "full", "--curve-out", str(curve)])
    out = capsys.readouterr().out
    assert code == 0
    assert "C_min = 0.9974" in out
    assert "F = 0.9000 ± " in out
    lines = curve.read_text().splitlines()
    assert lines[0] == "N,S,C_min_full,C_min_bisep" and len(lines) == 21


def test_cli_analyze_inconclusive(tmp_path, capsys):
    rec = tmp_path / "r.jsonl"
    _write_record(rec, builtin_w1(), 10, 20)
    assert main(["analyze", str(rec), "--witness", "w1"]) == 2
    assert "inconclusive" in capsys.readouterr().out


def test_cli_analyze_mismatched(tmp_path):
    rec = tmp_path / "r.jsonl"
    _write_record(rec, builtin_w1(), 10, 20)
    assert main(["analyze", str(rec), "--witness", "w2"]) == 1


def test_cli_analyze_empty(tmp_path):
    rec = tmp_path / "r.jsonl"
    OutcomeRecord(io.set_id(builtin_w1()), [], []).save(rec)
    assert main(["analyze", str(rec), "--witness", "w1"]) == 1


def test_cli_analyze_report_json(tmp_path):
    rec = tmp_path / "r.jsonl"
    _write_record(rec, builtin_w2(), 140, 160)
    rep = tmp_path / "rep.json"
    main(["analyze", str(rec), "--witness", "w2", "--out", str(rep)])
    d = json.loads(rep.read_text())
    assert d["format"] == 1 and d["fidelity"]["estimate"] == pytest.approx(0.75)


def test_cli_bound(tmp_path, capsys):
    out = tmp_path / "b.json"
    assert main(["bound", "--witness", "w1", "--seed", "0", "--out", str(out)]) == 0
    assert "p_fs estimate = 0.562500" in capsys.readouterr().out
    assert json.loads(out.read_text())["value"] == pytest.approx(9 / 16, abs=1e-6)
    ident = tmp_path / "ident.json"
    ident.write_text(json.dumps({"format": 1, "type": "measurement-set", "weights": [1.0], "p_s_full": 1.0,
                                 "provenance": "translated", "observables": [{"factors": ["+II"]}]}))
    main(["bound", "--set", str(ident), "--restarts", "3", "--seed", "0"])
    assert "p_fs estimate = 1.000000" in capsys.readouterr().out


def test_cli_numeric_bound(tmp_path, capsys):
    rec = tmp_path / "r.jsonl"
    _write_record(rec, builtin_w2(), 19, 20)
    assert main(["analyze", str(rec), "--witness", "w2", "--bound", "numeric", "--restarts", "16", "--seed", "0"]) == 0
    out = capsys.readouterr()
    assert "numeric full-separability estimate = 0.625000" in out.out
    assert "warning" not in out.err


def test_ingest(tmp_path, capsys):
    csv = tmp_path / "clicks.csv"
    rows = ["setting_id,outcome,timestamp"] + [f"{i % 2},{1 if i % 5 else 0},{i}" for i in range(150)]
    rows += ["1,,151", "0,,152"]
    csv.write_text("\n".join(rows) + "\n")
    out = tmp_path / "r.jsonl"
    assert main(["ingest", str(csv), "--witness", "w1", "--out", str(out)]) == 0
    assert "skipped 2" in capsys.readouterr().out
    rec = OutcomeRecord.load(out)
    assert rec.N == 150 and rec.metadata["skipped_rows"] == 2
    assert analyze(rec, builtin_w1()).N == 150


def test_ingest_errors(tmp_path):
    csv = tmp_path / "c.csv"
    csv.write_text("setting_id,outcome\n7,1\n")
    with pytest.raises(UnknownSettingId):
        io.read_external_csv(csv, 2)
    csv.write_text("setting_id,outcome\n1,2\n")
    with pytest.raises(NonBinaryOutcome):
        io.read_external_csv(csv, 2)
    csv.write_text("id,outcome\n1,1\n")
    with pytest.raises(ConfigError):
        io.read_external_csv(csv, 2)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "fewcopy", "translate", "--witness", "w1"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "L = 2" in res.stdout
