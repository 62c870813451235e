import json
import math

import pytest

from relaymesh.channel_model import network_from_config
from relaymesh.cli import run, sweep_from_config

ONES = {"T": 3, "powers": [1, 1], "noises": [1, 1], "gains": [[0, 1, 1], [0, 0, 1], [0, 0, 0]]}
FIG7 = {"sweep": {"variable": "P2", "grid": {"start": 1, "stop": 20, "num": 12}, "d23": 0.05,
                  "path_loss": {"model": "mpl", "kappa": 1, "eta": 2}}}


@pytest.fixture
def write(tmp_path):
    def _write(name, obj):
        p = tmp_path / name
        p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(p)
    return _write


def test_rate_json(write, capsys):
    assert run(["rate", "--config", write("net.json", ONES), "--strategies", "cs,df,cf,mh"]) == 0
    doc = json.loads(capsys.readouterr().out)
    rates = {r["strategy"]: r["rate"] for r in doc["results"]}
    assert rates["CF"] == pytest.approx(0.58496, abs=1e-5)
    assert doc["units"] == {"rate": "bits", "power": "linear"}


def test_rate_nats_and_t2(write, capsys):
    assert run(["rate", "--config", write("net.json", ONES), "--strategies", "cf_t2,cinf", "--log-base", "e"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["units"]["rate"] == "nats"
    assert doc["results"][0]["Q"]["2"] == pytest.approx(4.0, abs=1e-6)
    assert doc["results"][1]["rate"] == pytest.approx(0.5 * math.log(3.0))


def test_rate_db_input(write, capsys):
    cfg = {"T": 3, "powers": [0, 0], "noises": [0, 0], "gains": [[None, 0, 0], [None, None, 0], [None] * 3]}
    assert run(["rate", "--config", write("db.json", cfg), "--db", "--strategies", "cf"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["units"]["power"] == "dB"
    assert doc["network"]["powers"] == [0.0, 0.0]
    assert doc["results"][0]["rate"] == pytest.approx(0.58496, abs=1e-5)


def test_config_round_trip(write):
    net = network_from_config(ONES)
    again = network_from_config(json.loads(json.dumps(net.to_config())))
    assert again == net


@pytest.mark.parametrize(
    "argv",
    [
        ["rate", "--bogus"],
        ["nosuch"],
        ["rate"],
        ["rate", "--config", "/nonexistent.json"],
        ["verify", "--draws", "0"],
        ["rate", "--strategies", "xx", "--config", "/nonexistent.json"],
    ],
)
def test_usage_errors_exit_1(argv, capsys):
    assert run(argv) == 1
    assert capsys.readouterr().err


def test_bad_config_reports_line(write, capsys):
    assert run(["rate", "--config", write("bad.json", '{"T": 3,\n "powers": [1, 1],\n}')]) == 1
    assert "line 3" in capsys.readouterr().err


def test_bad_config_field(write, capsys):
    cfg = dict(ONES, powers=[1, -1])
    assert run(["rate", "--config", write("neg.json", cfg)]) == 1
    assert "powers" in capsys.readouterr().err


def test_single_relay_strategy_on_t4_is_usage_error(write):
    cfg = {"T": 4, "powers": [1, 1, 1], "noises": [1, 1, 1], "geometry": [0, 0.3, 0.6, 1],
           "path_loss": {"model": "mpl"}}
    assert run(["rate", "--config", write("t4.json", cfg), "--strategies", "df"]) == 1
    assert run(["rate", "--config", write("t4.json", cfg)]) == 0


def test_sweep_twice_identical(write, tmp_path):
    cfg = write("fig7.json", FIG7)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["sweep", "--config", cfg, "--out", str(a)]) == 0
    assert run(["sweep", "--config", cfg, "--out", str(b), "--workers", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_from_config_fields():
    spec = sweep_from_config({"sweep": {"variable": "d12", "grid": [0.1, 0.5], "template": {"P2": 4}}})
    assert spec.template.P2 == 4.0 and spec.grid == (0.1, 0.5)
    with pytest.raises(ValueError):
        sweep_from_config({"sweep": {"variable": "d12"}})


def test_verify(capsys):
    assert run(["verify", "--draws", "10", "--seed", "7"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# rng=") and "seed=7" in out
    assert out.count("PASS") == 4


def test_verify_seed_determines_output(capsys):
    run(["verify", "--draws", "5", "--seed", "3"])
    first = capsys.readouterr().out
    run(["verify", "--draws", "5", "--seed", "3"])
    assert capsys.readouterr().out == first


def test_probe(capsys):
    assert run(["probe", "--case", "2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    verdicts = {(v["strategy"], v["direction"]): v["verdict"] for v in doc["verdicts"]}
    assert verdicts[("CF", "P2↑")] == "approaches"


def test_threshold(capsys):
    assert run(["threshold", "--d23", "0.05"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert 1.0 < doc["P2"] < 50.0


def test_threshold_unreachable_exit_2(write, capsys):
    cfg = write("t.json", {"P1": 1.0, "path_loss": {"model": "mpl"}})
    assert run(["threshold", "--config", cfg, "--d23", "0.9", "--target", "0.999999"]) == 2
