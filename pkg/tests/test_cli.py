import csv
import io
import json
from importlib import resources

import pytest

from apcert.cli import main
from apcert.groups import build_cyclic
from apcert.oracle import exact_min

jsonschema = pytest.importorskip("jsonschema")
SCHEMA = json.loads(resources.files("apcert").joinpath("schemas/envelope.schema.json").read_text())

NONASSOC_LOOP = [
    [0, 1, 2, 3, 4],
    [1, 0, 3, 4, 2],
    [2, 4, 0, 1, 3],
    [3, 2, 4, 0, 1],
    [4, 3, 1, 2, 0],
]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "json")
    env = json.loads(out)
    jsonschema.validate(env, SCHEMA)
    return code, env


@pytest.mark.parametrize(
    "argv, status, code",
    [
        (["group", "info", "D8"], "PASS", 0),
        (["aps", "count", "Z9", "--k", "4"], "PASS", 0),
        (["bound", "Z5", "S4"], "PASS", 0),
        (["bound", "--table"], "PASS", 0),
        (["certificate", "--k", "25"], "PASS", 0),
        (["certificate", "--k", "6"], "SKIPPED", 1),
        (["certificate", "--range", "5..40"], "PASS", 0),
        (["oracle", "Z8"], "PASS", 0),
        (["verify", "S3"], "PASS", 0),
        (["sdp", "Z5", "--solve"], "PASS", 0),
        (["sdp", "Z5", "--solve", "--max-iters", "3"], "FAIL", 1),
        (["oracle", "Z30"], "ERROR", 2),
        (["group", "info", "Zx"], "ERROR", 2),
    ],
)
def test_envelopes_validate(capsys, argv, status, code):
    got, env = run_json(capsys, *argv)
    assert (env["status"], got) == (status, code)
    assert env["schema_version"] == 1 and env["command"][:2] == ["apcert", argv[0]]


def test_bound_values(capsys):
    _, env = run_json(capsys, "bound", "Z5")
    rep = env["result"]["reports"][0]
    assert rep["bound"] == "5/8" and rep["bound_ceiling"] == 1
    _, env = run_json(capsys, "bound", "Z5", "--decimal")
    assert env["result"]["reports"][0]["bound"] == pytest.approx(0.625)


def test_table_text(capsys):
    code, out, _ = run(capsys, "bound", "--table")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("Group G")
    assert [ln.split("|")[0].strip() for ln in lines[2:6]] == ["S5", "S6", "S7", "S8"]


def test_csv_output(capsys):
    code, out, _ = run(capsys, "bound", "--table", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and rows[0]["group"] == "S5" and rows[0]["bound"] == "90"
    code, out, _ = run(capsys, "certificate", "--range", "5..8", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["status"] for r in rows] == ["PASS", "SKIPPED", "PASS", "SKIPPED"]


def test_axiom_named_in_error(capsys, tmp_path):
    path = tmp_path / "loop.json"
    path.write_text(json.dumps({"mul": NONASSOC_LOOP}))
    code, out, err = run(capsys, "group", "info", f"@{path}")
    assert code == 2 and "associativity" in err
    code, env = run_json(capsys, "group", "info", f"@{path}")
    assert env["error"]["module"] == "group_core" and "associativity" in env["error"]["message"]


def test_malformed_json_file(capsys, tmp_path):
    path = tmp_path / "x.json"
    path.write_text("{not json")
    code, env = run_json(capsys, "group", "info", f"@{path}")
    assert code == 2 and env["status"] == "ERROR"


def test_aps_list_out(capsys, tmp_path):
    dest = tmp_path / "aps.jsonl"
    code, env = run_json(capsys, "aps", "list", "Z5", "--out", str(dest))
    lines = dest.read_text().splitlines()
    assert code == 0 and len(lines) == env["result"]["count"] == 10
    assert all(len(json.loads(ln)["elements"]) == 3 for ln in lines)


def test_sdp_export_and_reduce(capsys, tmp_path):
    dest = tmp_path / "z5.dat-s"
    code, env = run_json(capsys, "sdp", "Z5", "--out", str(dest), "--solve", "--reduce")
    assert code == 0 and dest.exists()
    assert env["result"]["lambda"] == pytest.approx(-7.5, abs=1e-3)
    assert env["result"]["certificate"]["status"] == "VALID"
    code, env = run_json(capsys, "sdp", "Z5", "--out", str(tmp_path / "no" / "x.dat-s"))
    assert code == 2 and env["error"]["kind"] == "io error"


def test_oracle_options(capsys, tmp_path):
    code, env = run_json(
        capsys, "oracle", "Z10", "--threads", "2", "--checkpoint", str(tmp_path / "ck"), "--cache", str(tmp_path / "c.json")
    )
    assert code == 0 and (tmp_path / "c.json").exists()
    assert env["result"]["exact_min"] == exact_min(build_cyclic(10)).exact_min
    code, env = run_json(capsys, "oracle", "Z10", "--max-size", "8")
    assert code == 2 and env["error"]["module"] == "oracle"


def test_verify_reports_discrepancy(capsys):
    code, out, _ = run(capsys, "verify", "S3")
    assert code == 0 and "non-integer" in out


def test_usage_errors(capsys):
    code, env = run_json(capsys, "certificate")
    assert code == 2 and env["error"]["kind"] == "usage error"
    with pytest.raises(SystemExit):
        main(["bound", "--threads", "0"])
