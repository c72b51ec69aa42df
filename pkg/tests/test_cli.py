import json

import jsonschema
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distrace import cli, numkit
from distrace.errors import InvalidInputError
from distrace.numkit import RngStream

SCHEMA = cli.record_schema()


def run_cli(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    records = [json.loads(line) for line in out.splitlines() if line.strip()]
    return code, records, err


def strip_wall(records):
    return [{k: v for k, v in r.items() if k != "wall_time_s"} for r in records]


# -- matrix files --------------------------------------------------------------


def test_load_identity(tmp_path):
    path = tmp_path / "eye.json"
    path.write_text("[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]")
    np.testing.assert_array_equal(cli.load_matrix(path), np.eye(2))


def test_load_complex_entry(tmp_path):
    path = tmp_path / "m.json"
    path.write_text("[[[0.5, -0.5]]]")
    assert cli.load_matrix(path)[0, 0] == 0.5 - 0.5j
    csv_path = tmp_path / "m.csv"
    csv_path.write_text("0.5,-0.5\n")
    assert cli.load_matrix(csv_path)[0, 0] == 0.5 - 0.5j


@pytest.mark.parametrize("suffix", [".json", ".csv"])
def test_round_trip_bit_identical(tmp_path, suffix):
    M = numkit.ginibre(1, 4, RngStream(1).generator())[0] / 3
    path = tmp_path / f"m{suffix}"
    cli.save_matrix(M, path)
    back = cli.load_matrix(path)
    assert back.tobytes() == M.tobytes()


@settings(max_examples=25, deadline=None)
@given(st.lists(st.complex_numbers(allow_nan=False, allow_infinity=False, max_magnitude=1e300), min_size=9, max_size=9))
def test_round_trip_property(tmp_path_factory, entries):
    M = np.array(entries, dtype=complex).reshape(3, 3)
    d = tmp_path_factory.mktemp("rt")
    for name in ("m.json", "m.csv"):
        cli.save_matrix(M, d / name)
        assert cli.load_matrix(d / name).tobytes() == M.tobytes()


def test_ragged_rows_name_the_row(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("[[1, 2], [3]]")
    with pytest.raises(InvalidInputError, match="row 1"):
        cli.load_matrix(path)
    csv_path = tmp_path / "bad.csv"
    csv_path.write_text("1,0,2,0\n3,0\n1,0,1,0\n")
    with pytest.raises(InvalidInputError, match="row 1"):
        cli.load_matrix(csv_path)


def test_bad_entry(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('[["x"]]')
    with pytest.raises(InvalidInputError, match="row 0, column 0"):
        cli.load_matrix(path)


def test_bundled_fixture_is_pure_state():
    rho = cli.load_fixture("pure_state_d2")
    assert np.trace(rho @ rho).real == pytest.approx(1)
    assert np.trace(rho).real == pytest.approx(1)


# -- commands ------------------------------------------------------------------


def test_trace_on_bundled_fixture(capsys):
    code, records, _ = run_cli(["trace", "--eps", "0.1"], capsys)
    assert code == 0 and len(records) == 1
    rec = records[0]
    jsonschema.validate(rec, SCHEMA)
    assert abs(complex(*rec["estimate"]) - 1) <= 0.1
    assert rec["seed"] == 42 and rec["n_queries"] > 0


def test_trace_fixed_N(capsys):
    code, records, _ = run_cli(["trace", "--N", "200", "--m", "8"], capsys)
    assert code == 0
    jsonschema.validate(records[0], SCHEMA)
    assert records[0]["details"]["N"] == 200 and records[0]["details"]["m"] == 8


def test_verify_polys_records(capsys):
    code, records, _ = run_cli(["verify-polys", "--delta", "0.1", "--eps", "1e-3"], capsys)
    assert code == 0
    labels = [r["label"] for r in records]
    assert labels == ["log", "rect", "local", "power_positive", "power_negative", "inverse"]
    for rec in records:
        jsonschema.validate(rec, SCHEMA)
        assert rec["estimate"] <= 1e-3 and rec["details"]["ok"]


def test_variance_sweep_small(capsys):
    code, records, _ = run_cli(["variance-sweep", "--d", "2", "--N", "20", "--set", "replays=30", "--set", "m_factors=[1, 4]"], capsys)
    assert code == 0
    assert len(records) == 3
    for rec in records:
        jsonschema.validate(rec, SCHEMA)
    assert records[0]["details"]["law"] == pytest.approx(1 + 4 / 4 + 16 / 16)
    assert records[-1]["label"] == "variance-law spread"


def test_hamsim_random_fixture(capsys):
    code, records, _ = run_cli(["hamsim", "--d", "2", "--eps", "0.1"], capsys)
    assert code == 0
    rec = records[0]
    jsonschema.validate(rec, SCHEMA)
    assert rec["error"] <= rec["details"]["commutator_norm"] + 0.1


def test_renyi_from_config(tmp_path, capsys):
    cfg = {"rho": [[0.7, 0], [0, 0.3]], "sigma": [[0.4, 0], [0, 0.6]], "alpha": 2, "delta": 0.3, "eps": 0.1}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    code, records, _ = run_cli(["renyi", "--config", str(path)], capsys)
    assert code == 0
    jsonschema.validate(records[0], SCHEMA)
    assert records[0]["error"] <= 0.1


def test_linsolve_with_matrix_files(tmp_path, capsys):
    cli.save_matrix(np.diag([1.0, 0.5]), tmp_path / "A.csv")
    cfg = {"A": "A.csv", "b": [0, 1], "eps": 0.1, "delta": 0.5}
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    code, records, _ = run_cli(["linsolve", "--config", str(tmp_path / "cfg.json")], capsys)
    assert code == 0
    jsonschema.validate(records[0], SCHEMA)
    assert records[0]["oracle"] == [[0.0, 0.0], [2.0, 0.0]]
    assert records[0]["error"] <= 0.1


def test_flags_override_config(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"eps": 0.5, "seed": 3}))
    code, records, _ = run_cli(["trace", "--config", str(path), "--eps", "0.2", "--seed", "9"], capsys)
    assert code == 0
    assert records[0]["spec"]["eps"] == 0.2 and records[0]["seed"] == 9


def test_identical_spec_gives_identical_records(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}.jsonl"
        assert cli.main(["rel-entropy", "--d", "2", "--delta", "0.2", "--eps", "0.2", "--out", str(out)]) == 0
        outs.append([json.loads(line) for line in out.read_text().splitlines()])
    assert strip_wall(outs[0]) == strip_wall(outs[1])
    assert json.dumps(strip_wall(outs[0]), sort_keys=True) == json.dumps(strip_wall(outs[1]), sort_keys=True)


def test_out_appends(tmp_path):
    out = tmp_path / "runs.jsonl"
    for _ in range(2):
        assert cli.main(["verify-polys", "--eps", "0.01", "--delta", "0.2", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 12


# -- exit codes ----------------------------------------------------------------


@pytest.mark.parametrize(
    "argv,key",
    [
        (["trace", "--set", "bogus=1"], "bogus"),
        (["trace", "--eps", "2"], "eps"),
        (["renyi", "--set", "alpha=1"], "alpha"),
        (["trace", "--set", "f=cosh"], "f"),
        (["rel-entropy", "--N", "10"], "N"),
        (["trace", "--set", "A=missing.json"], "A"),
    ],
)
def test_config_errors_name_the_key(argv, key, capsys):
    code, _, err = run_cli(argv, capsys)
    assert code == 1
    assert f"{key}:" in err


def test_unparseable_config(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text("{not json")
    code, _, err = run_cli(["trace", "--config", str(path)], capsys)
    assert code == 1 and "config" in err


def test_precondition_violation_exit_code(tmp_path, capsys):
    cfg = {"rho": [[0.95, 0], [0, 0.05]], "sigma": [[0.5, 0], [0, 0.5]], "delta": 0.1}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    code, records, err = run_cli(["rel-entropy", "--config", str(path)], capsys)
    assert code == 2 and not records and "precondition" in err


def test_approximation_failure_exit_code(tmp_path, capsys):
    # the rank-based recipe for alpha < 1 needs a degree far beyond the cap
    cfg = {"rho": [[0.9, 0], [0, 0.1]], "sigma": [[0.5, 0], [0, 0.5]], "alpha": 0.5, "eps": 0.1, "t_floor": 0.5}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    code, records, err = run_cli(["renyi", "--config", str(path)], capsys)
    assert code == 3 and "approximation" in err


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "distrace", "verify-polys", "--eps", "0.01"], capture_output=True, text=True)
    assert res.returncode == 0
    assert len(res.stdout.splitlines()) == 6
