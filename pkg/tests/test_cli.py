from __future__ import annotations

import csv
import io
import json

import pytest

from graycodec.cli import ConfigError, main, parse_steps, resolve_config


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_table(text, name):
    lines = text.splitlines()
    start = lines.index(f"# table={name}") + 1
    body = []
    for line in lines[start:]:
        if line.startswith("# table="):
            break
        body.append(line)
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def csv_extra(text):
    for line in text.splitlines():
        if line.startswith("# extra="):
            return json.loads(line[len("# extra=") :])
    return {}


@pytest.mark.parametrize("encoding,terms,groups", [("gray", 8, 3), ("onehot", 11, 3), ("binary", 8, 4)])
def test_encode_counts(capsys, encoding, terms, groups):
    code, out, _ = run_cli(capsys, "encode", "--encoding", encoding)
    assert code == 0
    doc = json.loads(out)
    assert doc["term_count"] == terms
    assert doc["group_count"] == groups
    assert doc["schema_version"] == 1
    assert doc["config"]["encoding"] == encoding


def test_encode_text_lists_coefficients(capsys):
    code, out, _ = run_cli(capsys, "encode", "--format", "text")
    assert code == 0
    lines = dict(line.split(" ", 1) for line in out.splitlines() if not line.startswith("#"))
    assert float(lines["II"]) == pytest.approx(14.328, abs=1e-3)
    assert float(lines["XZ"]) == pytest.approx(3.527, abs=1e-3)
    assert lines["term_count"] == "8"


def test_invalid_encoding_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["encode", "--encoding", "ternary"])
    assert exc.value.code == 2


def test_invalid_value_exits_2(capsys):
    code, _, err = run_cli(capsys, "vqe", "--n", "1")
    assert code == 2
    assert "error" in err


def test_unknown_config_key_exits_2(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 4, "bogus": 1}))
    code, _, err = run_cli(capsys, "vqe", "--config", str(cfg))
    assert code == 2
    assert "bogus" in err


def test_config_file_and_flag_precedence(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"n": 8, "iterations": 7}))
    cfg = resolve_config("vqe", {"config": str(path), "iterations": 3}, env={})
    assert cfg["n"] == 8
    assert cfg["iterations"] == 3


def test_seed_environment_override():
    assert resolve_config("vqe", {}, env={"GRAYCODEC_SEED": "42"})["seed"] == 42
    assert resolve_config("vqe", {"seed": 5}, env={"GRAYCODEC_SEED": "42"})["seed"] == 5
    assert resolve_config("vqe", {}, env={})["seed"] == 0
    with pytest.raises(ConfigError):
        resolve_config("vqe", {}, env={"GRAYCODEC_SEED": "x"})


def test_parse_steps():
    assert parse_steps("1..10") == [1, 2, 3, 4, 5, 6, 8, 10]
    assert parse_steps("5,1,5") == [1, 5]
    assert parse_steps([3, 2]) == [2, 3]
    for bad in ("", "0,1", "a"):
        with pytest.raises(ConfigError):
            parse_steps(bad)


VQE_ARGS = ("vqe", "--backend", "sampled", "--shots", "500", "--iterations", "15", "--trials", "3")


def test_vqe_csv_and_json_agree(capsys):
    _, as_json, _ = run_cli(capsys, *VQE_ARGS, "--jobs", "1")
    _, as_csv, _ = run_cli(capsys, *VQE_ARGS, "--jobs", "1", "--format", "csv")
    doc = json.loads(as_json)
    rows = csv_table(as_csv, "records")
    assert [float(r["energy"]) for r in rows] == [r["energy"] for r in doc["records"]]
    assert csv_extra(as_csv)["summary"] == doc["summary"]


def test_vqe_reruns_are_byte_identical(capsys):
    _, first, _ = run_cli(capsys, *VQE_ARGS, "--jobs", "1")
    _, second, _ = run_cli(capsys, *VQE_ARGS, "--jobs", "1")
    assert first == second


def test_vqe_jobs_do_not_change_results(capsys):
    _, serial, _ = run_cli(capsys, *VQE_ARGS, "--jobs", "1")
    _, parallel, _ = run_cli(capsys, *VQE_ARGS, "--jobs", "2")
    assert serial == parallel
    assert "jobs" not in json.loads(serial)["config"]


def test_vqe_trials_get_distinct_seeds(capsys):
    _, out, _ = run_cli(capsys, *VQE_ARGS, "--jobs", "1")
    seeds = [tuple(r["seed"]) for r in json.loads(out)["records"]]
    assert len(set(seeds)) == 3


def test_vqe_seed_env(capsys, monkeypatch):
    monkeypatch.setenv("GRAYCODEC_SEED", "11")
    _, out, _ = run_cli(capsys, *VQE_ARGS, "--jobs", "1")
    assert json.loads(out)["config"]["seed"] == 11


def test_vqe_statevector_n4(capsys):
    code, out, _ = run_cli(capsys, "vqe", "--n", "4", "--jobs", "1")
    assert code == 0
    doc = json.loads(out)
    assert doc["summary"]["mean"] == pytest.approx(doc["summary"]["exact"], abs=0.02)
    assert doc["config"]["iterations"] == 5000


def test_vqe_mitigate_needs_noisy_backend(capsys):
    code, _, _ = run_cli(capsys, "vqe", "--mitigate")
    assert code == 2


def test_output_file(tmp_path, capsys):
    target = tmp_path / "out.json"
    code, out, _ = run_cli(capsys, "graycode", "--bits", "2", "-o", str(target))
    assert code == 0 and out == ""
    doc = json.loads(target.read_text())
    assert doc["command"] == "graycode"
    assert "output" not in doc["config"]


def test_graycode_rows(capsys):
    _, out, _ = run_cli(capsys, "graycode", "--bits", "3", "--format", "csv")
    rows = csv_table(out, "rows")
    assert [r["codeword"] for r in rows] == ["000", "100", "110", "010", "011", "111", "101", "001"]


def test_resources_tables(capsys):
    _, out, _ = run_cli(capsys, "resources", "--n", "4,8", "--steps", "1,10")
    doc = json.loads(out)
    assert {r["n"] for r in doc["ansatz"]} == {4, 8}
    assert {r["steps"] for r in doc["trotter"]} == {1, 10}


def test_evolve_statevector(capsys):
    code, out, _ = run_cli(capsys, "evolve", "--backend", "statevector", "--steps", "100")
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["steps"] == 100
    assert row["trace_distance"] < 0.05


def test_evolve_rejects_binary(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["evolve", "--encoding", "binary"])
    assert exc.value.code == 2


def test_zne_output(capsys):
    code, out, _ = run_cli(capsys, "zne", "--shots", "2000", "--format", "csv")
    assert code == 0
    rows = csv_table(out, "points")
    assert [int(r["level"]) for r in rows] == [1, 3, 5, 7]
    extra = csv_extra(out)
    assert extra["exact"] == pytest.approx(-2.14398, abs=1e-5)
    assert json.loads(out.splitlines()[1][len("# config=") :])["noise_config"] == "default"


def test_bad_noise_config_exits_2(tmp_path, capsys):
    bad = tmp_path / "noise.json"
    bad.write_text("{}")
    code, _, err = run_cli(capsys, "zne", "--noise-config", str(bad))
    assert code == 2
    assert "noise config" in err
    code, _, err = run_cli(capsys, "zne", "--layout", "0,7")
    assert code == 2
