"""Tests for the tfm command line."""

import csv
import json
from fractions import Fraction

import pytest

from src import cli
from src.cli import EXIT_CONFIG, EXIT_FILE, EXIT_OK, EXIT_TRUNCATED, main, parse_params
from src.config import get_config
from src.contracts import SideContract, Witness
from src.errors import ConfigError
from src.mechanism import Setting
from src.money import normalize_grid
from src.tabulated import save_tabulated
from src.zoo import first_price_burned_reserve, fully_burned_second_price


@pytest.fixture
def env(tmp_path, monkeypatch):
    monkeypatch.setenv("HOME", str(tmp_path))
    monkeypatch.setenv("XDG_CONFIG_HOME", str(tmp_path / "xdg"))
    monkeypatch.delenv("TFM_WORKERS", raising=False)
    echoed = []
    monkeypatch.setattr(cli, "echo", lambda text, err=False: echoed.append(text))
    return tmp_path, echoed


def _config(tmp_path, extra=""):
    path = tmp_path / "tfm.toml"
    path.write_text(f'report_dir = "{tmp_path / "reports"}"\nworkers = 1\n{extra}')
    return str(path)


def _read(path):
    return json.loads(path.read_text())


def test_parse_params():
    assert parse_params("r=1/2, shading=1") == {"r": Fraction(1, 2), "shading": Fraction(1)}
    with pytest.raises(ConfigError):
        parse_params("r")


def test_zoo_evaluates_bids(env):
    tmp_path, echoed = env
    code = main(["zoo", "salsa-counterexample", "--bids", "10,8", "--config", _config(tmp_path)])
    assert code == EXIT_OK
    data = json.loads(echoed[0])
    assert data["bids"] == ["10/1", "8/1"]
    assert data["outcome"] == {
        "confirm": [1, 1],
        "pay": ["13/2", "13/2"],
        "burn": ["13/2", "13/2"],
    }


def test_zoo_lists_mechanisms(env):
    tmp_path, echoed = env
    assert main(["zoo", "--config", _config(tmp_path)]) == EXIT_OK
    assert any("salsa-counterexample" in block for block in echoed)


def test_check_axioms_writes_report_and_csv(env, capsys):
    tmp_path, _ = env
    summary = tmp_path / "summary.csv"
    code = main(
        [
            "check-axioms",
            "--mech",
            "first-price-burned-reserve",
            "--params",
            "r=1",
            "--grid",
            "0,1,2",
            "--n",
            "2",
            "--csv",
            str(summary),
            "--json",
            "--config",
            _config(tmp_path),
        ]
    )
    assert code == EXIT_OK
    printed = json.loads(capsys.readouterr().out)
    assert printed == _read(tmp_path / "reports" / "check-axioms.json")
    assert printed["scope"] == "grid certificate only"
    assert set(printed["verdicts"].values()) == {"pass"}
    assert "wall_time" not in printed
    with open(summary) as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["check", "status", "detail"]
    assert len(rows) == 6


def test_find_then_reduce_salsa(env):
    tmp_path, _ = env
    config = _config(tmp_path)
    found = tmp_path / "found.json"
    code = main(
        [
            "find-sc",
            "--mech",
            "salsa-counterexample",
            "--grid",
            "1,8,9,10",
            "--n",
            "2",
            "--c",
            "2",
            "--out",
            str(found),
            "--quiet",
            "--config",
            config,
        ]
    )
    assert code == EXIT_OK
    report = _read(found)
    assert report["verdicts"] == {"2-SCP (passive)": "refuted"}
    assert report["result"]["witness"]["A"] == ["1/1", "10/1"]

    code = main(
        ["reduce", "--mech", "salsa-counterexample", "--witness", str(found), "--config", config]
    )
    assert code == EXIT_OK
    reduced = _read(tmp_path / "reports" / "reduce.json")
    assert reduced["verdicts"] == {"reduction": "failed"}
    assert reduced["trace"]["failure"]["assumption"] == "consistent-tie-breaking"


def test_truncated_search_exits_4(env):
    tmp_path, _ = env
    code = main(
        [
            "find-sc",
            "--mech",
            "fully-burned-second-price",
            "--grid",
            "0,1,2,3",
            "--n",
            "2",
            "--c",
            "1",
            "--model",
            "active",
            "--config",
            _config(tmp_path, "max_contracts = 1\n"),
        ]
    )
    assert code == EXIT_TRUNCATED
    report = _read(tmp_path / "reports" / "find-sc.json")
    assert report["result"]["status"] == "truncated"


def test_timings_add_wall_time(env):
    tmp_path, _ = env
    args = ["check-axioms", "--mech", "fully-burned-second-price", "--grid", "0,1", "--n", "2"]
    assert main(args + ["--timings", "--config", _config(tmp_path)]) == EXIT_OK
    assert "wall_time" in _read(tmp_path / "reports" / "check-axioms.json")


def test_tautology_reduction_and_decision(env):
    tmp_path, _ = env
    config = _config(tmp_path)
    circuit = tmp_path / "circuit.json"
    circuit.write_text(json.dumps({"inputs": 1, "gates": [{"op": "INPUT", "args": [0]}],
                                   "outputs": [0]}))
    auction = tmp_path / "auction.json"
    code = main(
        ["taut-reduce", "--circuit", str(circuit), "--out", str(auction), "--decide",
         "--config", config]
    )
    assert code == EXIT_OK
    assert _read(auction)["n"] == 3
    report = _read(tmp_path / "reports" / "taut-reduce.json")
    assert report["verdicts"] == {"2-SCP": "no", "tautology": False}

    assert main(["scpdp", "--circuits", str(auction), "--config", config]) == EXIT_OK
    decided = _read(tmp_path / "reports" / "scpdp.json")
    assert decided["verdicts"] == {"2-SCP": "no"}
    assert decided["result"]["witness"]["A"] == ["0/1", "1/1", "0/1"]


def test_config_init_and_show(env):
    tmp_path, echoed = env
    target = tmp_path / "fresh" / "config.toml"
    assert main(["config", "--init", "--config", str(target)]) == EXIT_OK
    assert target.exists()
    assert main(["config", "--show", "--config", str(target)]) == EXIT_OK
    assert any("max_fakes" in block for block in echoed)


@pytest.mark.parametrize(
    "argv, code, error",
    [
        (["zoo", "vickrey"], EXIT_CONFIG, "error[E_CONFIG]"),
        (["check-axioms", "--mech", "fully-burned-second-price", "--grid", "0,x", "--n", "2"],
         EXIT_CONFIG, "error[E_CONFIG]"),
        (["check-axioms", "--mech", "fully-burned-second-price"], EXIT_CONFIG, "--grid"),
        (["find-sc", "--mech", "salsa-counterexample", "--grid", "1", "--n", "2"],
         EXIT_CONFIG, "--c"),
        (["zoo", "--workers", "0"], EXIT_CONFIG, "--workers"),
        (["check-axioms", "--mech", "missing.json", "--grid", "0", "--n", "1"],
         EXIT_FILE, "error[E_IO]"),
    ],
)
def test_errors_map_to_exit_codes(env, capsys, argv, code, error):
    tmp_path, _ = env
    assert main(argv + ["--config", _config(tmp_path)]) == code
    assert error in capsys.readouterr().err


def test_malformed_auction_is_a_file_error(env, capsys):
    tmp_path, _ = env
    auction = tmp_path / "auction.json"
    auction.write_text("{}")
    assert main(["scpdp", "--circuits", str(auction), "--config", _config(tmp_path)]) == EXIT_FILE
    assert "error[E_SCHEMA]" in capsys.readouterr().err


def test_missing_config_file_is_a_config_error(env, capsys):
    tmp_path, _ = env
    assert main(["zoo", "--config", str(tmp_path / "nope.toml")]) == EXIT_CONFIG
    assert "error[E_CONFIG]" in capsys.readouterr().err


def test_unknown_choice_is_rejected_by_the_parser(env):
    with pytest.raises(SystemExit):
        main(["find-sc", "--model", "bogus"])


def test_tabulated_mechanism_via_mech_file(env):
    tmp_path, _ = env
    table = save_tabulated(
        first_price_burned_reserve(1), normalize_grid([0, 1, 2]), 2, tmp_path / "fp.json"
    )
    code = main(["check-axioms", "--mech", str(table), "--config", _config(tmp_path)])
    assert code == EXIT_OK
    report = _read(tmp_path / "reports" / "check-axioms.json")
    assert report["inputs"]["table"] == str(table)
    assert report["inputs"]["n"] == 2
    assert set(report["verdicts"].values()) == {"pass"}


def test_reduce_single_item_ends_with_one_bidder(env):
    tmp_path, _ = env
    mech = fully_burned_second_price()
    witness = Witness.from_contract(
        mech, Setting.honest([3, 2]), SideContract.build({0, 1}, {1: 0})
    )
    path = tmp_path / "pair.json"
    path.write_text(json.dumps(witness.to_dict()))
    args = ["reduce", "--mech", "fully-burned-second-price", "--witness", str(path)]
    assert main(args + ["--single-item", "--config", _config(tmp_path)]) == EXIT_OK
    trace = _read(tmp_path / "reports" / "reduce.json")["trace"]
    assert trace["produced_by"] == "pipeline"
    assert trace["stages"][-1]["stage"] == "pair-to-single"
    assert trace["output"]["coalition"] == [0]
    assert trace["output"]["omitted"] == [1]


def test_config_set_updates_the_file(env):
    tmp_path, _ = env
    target = tmp_path / "tfm.toml"
    assert main(["config", "--init", "--config", str(target)]) == EXIT_OK
    code = main(
        ["config", "--set", "max_fakes=1", "--set", "debug=true", "--config", str(target)]
    )
    assert code == EXIT_OK
    config = get_config(target)
    assert config.max_fakes == 1
    assert config.debug


def test_config_set_rejects_unknown_keys(env, capsys):
    tmp_path, _ = env
    target = tmp_path / "tfm.toml"
    main(["config", "--init", "--config", str(target)])
    assert main(["config", "--set", "colour=red", "--config", str(target)]) == EXIT_CONFIG
    assert "error[E_CONFIG]" in capsys.readouterr().err
