import json
import subprocess
import sys
from pathlib import Path

import pytest

from parityrepeater import cli

GOLDEN = Path(__file__).parent / "golden"
CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr().out


def write_ini(tmp_path, body, name="run.ini"):
    path = tmp_path / name
    path.write_text(body)
    return str(path)


SMALL_CHAIN = """[chain]
hops = 2
L = 2.634
m = 2
n = 2
trials = 5000
seed = 17
"""


def test_table_matches_golden(tmp_path):
    out = tmp_path / "t.csv"
    assert cli.main(["table", "--p", "0.95,0.9,0.82,0.67,0.6,0.4", "--out", str(out)]) == 0
    assert out.read_text() == (GOLDEN / "table_default.csv").read_text()


def test_table_json_has_meta_first(capsys):
    code, out = run(["table", "--p", "0.95", "--format", "json"], capsys)
    lines = [json.loads(l) for l in out.splitlines()]
    assert code == 0
    assert lines[0]["record"] == "meta" and lines[0]["tool"] == "parityrepeater"
    assert (lines[1]["m"], lines[1]["n"]) == (3, 4)


def test_table_multiplexed_columns(capsys):
    code, out = run(["table", "--p", "0.95", "--k", "2", "--format", "json"], capsys)
    row = json.loads(out.splitlines()[1])
    assert code == 0
    assert row["m_k2"] is not None and row["pf_k2"] <= 1.2e-3


def test_optimize(capsys):
    code, out = run(["optimize", "--p", "0.67", "--format", "json"], capsys)
    rec = json.loads(out.splitlines()[1])
    assert code == 0 and rec["m"] == 13 and rec["n"] <= 1500 <= rec["n_feasible_max"]
    code, out = run(["optimize", "--p", "0.4", "--format", "json"], capsys)
    assert json.loads(out.splitlines()[1])["status"] == "infeasible"


def test_chain_seed_replay_is_byte_identical(tmp_path):
    cfg = write_ini(tmp_path, SMALL_CHAIN)
    a, b, c = (tmp_path / f"{x}.csv" for x in "abc")
    assert cli.main(["chain", "--config", cfg, "--out", str(a)]) == 0
    assert cli.main(["chain", "--config", cfg, "--out", str(b), "--threads", "3"]) == 0
    assert cli.main(["chain", "--config", cfg, "--out", str(c), "--seed", "18"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()
    assert "# seed=17" in a.read_text()


def test_chain_smoke_single_trial(tmp_path, capsys):
    cfg = write_ini(tmp_path, SMALL_CHAIN.replace("trials = 5000", "trials = 1"))
    code, out = run(["chain", "--config", cfg, "--format", "json"], capsys)
    recs = [json.loads(l) for l in out.splitlines()]
    assert code == 0
    assert recs[1]["record"] == "stats" and recs[1]["trials"] == 1
    assert any(r.get("record") == "reference" for r in recs)


def test_worked_example_report(capsys):
    code, out = run(
        ["chain", "--config", str(CONFIGS / "worked_example_800km.ini"), "--format", "json"], capsys
    )
    recs = {r["record"]: r for r in map(json.loads, out.splitlines())}
    rep = recs["analytic"]
    assert code == 0
    assert rep["end_to_end_fidelity"] == pytest.approx(0.9231, abs=1e-4)
    assert rep["raw_rate"] == pytest.approx(1e7)
    assert "note" in rep


def test_butterfly_exact_config(capsys):
    code, out = run(
        ["butterfly", "--config", str(CONFIGS / "butterfly_small.ini"), "--format", "json"], capsys
    )
    stats = json.loads(out.splitlines()[1])
    assert code == 0 and stats["mode"] == "Butterfly" and stats["logical_errors"] == 0


def test_unknown_key_rejected(tmp_path, capsys):
    cfg = write_ini(tmp_path, SMALL_CHAIN + "colour = blue\n")
    with pytest.raises(SystemExit) as exc:
        cli.main(["chain", "--config", cfg])
    assert exc.value.code == 2
    assert "colour" in capsys.readouterr().err


def test_wrong_section_rejected(tmp_path):
    cfg = write_ini(tmp_path, SMALL_CHAIN.replace("[chain]", "[butterfly]"))
    with pytest.raises(SystemExit) as exc:
        cli.main(["chain", "--config", cfg])
    assert exc.value.code == 2


def test_invalid_values_are_usage_errors(tmp_path):
    cfg = write_ini(tmp_path, SMALL_CHAIN.replace("hops = 2", "hops = 0"))
    with pytest.raises(SystemExit) as exc:
        cli.main(["chain", "--config", cfg])
    assert exc.value.code == 2


@pytest.mark.parametrize("suite", ["", "nonsense"])
def test_bad_suite_is_usage_error(suite):
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", suite])
    assert exc.value.code == 2


@pytest.mark.parametrize("suite", ["transfer", "ecc"])
def test_verify_suites_pass(suite, capsys):
    code, out = run(["verify", suite, "--format", "json"], capsys)
    rec = json.loads(out.splitlines()[1])
    assert code == 0 and rec["ok"] and rec["failed"] == 0


def test_threads_from_environment(monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "3")
    assert cli.resolve_threads(None) == 3
    assert cli.resolve_threads(1) == 1


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "parityrepeater", "--version"], capture_output=True, text=True
    )
    assert res.returncode == 0 and res.stdout.strip()
