import json

import pytest

from paragas.cli import main


@pytest.fixture
def four_tx_block(tmp_path):
    path = tmp_path / "block.json"
    path.write_text(json.dumps({"transactions": [
        {"id": "tx1", "time": 2,
         "keys": ["k2", "k3", "k4", "k5", "k6", "k7", "k8"]},
        {"id": "tx2", "time": 4, "keys": ["k2", "k3"]},
        {"id": "tx3", "time": 5, "keys": ["k4", "k5", "k6"]},
        {"id": "tx4", "time": 2, "keys": ["k7", "k8"]},
    ]}))
    return str(path)


def run(capsys, argv):
    code = main(argv)
    return code, capsys.readouterr()


def test_gas_current_totals(four_tx_block, capsys):
    code, out = run(capsys, ["gas", four_tx_block, "--mech", "current"])
    assert code == 0
    doc = json.loads(out.out)
    assert doc["total"] == "13"
    assert doc["per_tx"] == {"tx1": "2", "tx2": "4", "tx3": "5", "tx4": "2"}
    assert doc["config"]["threads"] == 2


def test_gas_esm_three_threads(four_tx_block, capsys):
    code, out = run(capsys, ["gas", four_tx_block, "--mech", "esm",
                             "--threads", "3"])
    assert code == 0
    doc = json.loads(out.out)
    assert doc["block_value"] == "7"
    assert set(doc["per_tx"].values()) == {"7/4"}


def test_gas_banzhaf_fixture(tmp_path, capsys):
    path = tmp_path / "b.json"
    path.write_text(json.dumps({"transactions": [
        {"id": "tx1", "time": 1, "keys": ["k1"]},
        {"id": "tx2", "time": 1, "keys": ["k1"]},
        {"id": "tx3", "time": 1, "keys": ["k2"]}]}))
    code, out = run(capsys, ["gas", str(path), "--mech", "banzhaf"])
    assert code == 0
    doc = json.loads(out.out)
    assert doc["per_tx"] == {"tx1": "3/4", "tx2": "3/4", "tx3": "1/4"}
    assert doc["total"] == "7/4"
    assert doc["block_value"] == "2"


def test_gas_weights_override(tmp_path, capsys):
    block = tmp_path / "b.json"
    block.write_text(json.dumps({"transactions": [
        {"id": "a", "time": 4, "keys": ["k1"]}]}))
    weights = tmp_path / "w.json"
    weights.write_text(json.dumps({"k1": "1/2"}))
    code, out = run(capsys, ["gas", str(block), "--mech", "weighted_area",
                             "--weights", str(weights)])
    assert code == 0
    assert json.loads(out.out)["per_tx"]["a"] == "6"


def test_schedule_exact_makespans(four_tx_block, capsys):
    code, out = run(capsys, ["schedule", four_tx_block, "--threads", "3"])
    assert code == 0
    assert json.loads(out.out)["makespan"] == "7"
    code, out = run(capsys, ["schedule", four_tx_block, "--threads", "2"])
    assert json.loads(out.out)["makespan"] == "8"


def test_schedule_text_and_svg(four_tx_block, capsys):
    code, out = run(capsys, ["schedule", four_tx_block, "--threads", "3",
                             "--format", "text"])
    assert code == 0
    assert "makespan = 7" in out.out
    assert "k2" in out.out
    code, out = run(capsys, ["schedule", four_tx_block, "--threads", "3",
                             "--format", "svg"])
    assert code == 0
    assert out.out.startswith("<svg")
    assert "tx3" in out.out


def test_schedule_unbounded_threads(four_tx_block, capsys):
    code, out = run(capsys, ["schedule", four_tx_block,
                             "--threads", "unbounded"])
    assert code == 0
    assert json.loads(out.out)["makespan"] == "7"


def test_instance_cap_env_override(four_tx_block, capsys, monkeypatch):
    monkeypatch.setenv("PARAGAS_INSTANCE_CAP", "2")
    code, out = run(capsys, ["schedule", four_tx_block])
    assert code == 2
    assert "exceeds instance cap" in out.err
    monkeypatch.setenv("PARAGAS_INSTANCE_CAP", "junk")
    code, out = run(capsys, ["schedule", four_tx_block])
    assert code == 2


def test_check_single_cell_pass_and_fixture_driven_cell(capsys):
    code, out = run(capsys, ["check", "--mech", "shapley",
                             "--prop", "efficiency", "--budget", "40"])
    assert code == 0
    assert "ok" in out.out
    code, out = run(capsys, ["check", "--mech", "banzhaf",
                             "--prop", "efficiency", "--budget", "40",
                             "--format", "json"])
    assert code == 0
    doc = json.loads(out.out)
    assert doc["ok"]
    assert doc["cells"]["banzhaf/efficiency"]["symbol"] == "x"
    assert doc["cells"]["banzhaf/efficiency"]["witness"] is not None


def test_check_unknown_names_exit_usage(capsys):
    code, out = run(capsys, ["check", "--mech", "nope"])
    assert code == 2
    code, out = run(capsys, ["check", "--prop", "nope"])
    assert code == 2


def test_simulate_csv_deterministic(capsys):
    args = ["simulate", "--blocks", "8", "--seed", "4", "--mech", "current"]
    code1, out1 = run(capsys, args)
    code2, out2 = run(capsys, args)
    assert code1 == code2 == 0
    assert out1.out == out2.out
    header = out1.out.splitlines()[0]
    assert header == ("block_index,base_fee,gas_used,gas_limit,"
                      "makespan,included_count")
    assert len(out1.out.strip().splitlines()) == 9


def test_simulate_json_format(capsys):
    code, out = run(capsys, ["simulate", "--blocks", "2", "--format", "json",
                             "--mech", "esm", "--gas-limit", "8",
                             "--target", "4"])
    assert code == 0
    doc = json.loads(out.out)
    assert doc["config"]["mechanism"] == "esm"
    assert len(doc["rows"]) == 2


def test_malformed_block_is_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"transactions": [], "bogus": 1}')
    code, out = run(capsys, ["gas", str(bad)])
    assert code == 2
    assert "error:" in out.err


def test_missing_subcommand_is_usage_error(capsys):
    assert main([]) == 2
