import json
import os

import pytest

from orbikit.cli import main as cli_main
from orbikit.harness import (
    SCHEMA_VERSION,
    ConfigError,
    BUILTIN_SCENARIOS,
    list_scenarios,
    run_scenario,
)


def cfg(name, **kw):
    out = {"schema_version": SCHEMA_VERSION, "scenario": name}
    out.update(kw)
    return out


def test_list_scenarios_builtins():
    rows = list_scenarios()
    names = [n for n, _ in rows]
    assert len(rows) >= 6
    for expected in (
        "a2-example",
        "free-rotation-circle",
        "pillowcase-torus",
        "noneffective-circle",
        "cech-localization",
        "cocycle-transport",
    ):
        assert expected in names


def test_registry_grows_with_user_file(tmp_path):
    path = tmp_path / "mine.json"
    path.write_text(
        json.dumps({"name": "a2-n5", "scenario": "a2-example", "params": {"N": 5}})
    )
    rows = list_scenarios(str(tmp_path))
    assert len(rows) == len(list_scenarios()) + 1
    assert any(n == "a2-n5" for n, _ in rows)


def test_corrupt_registry_file_named(tmp_path):
    bad = tmp_path / "broken.json"
    bad.write_text("{ not json")
    with pytest.raises(ConfigError) as err:
        list_scenarios(str(tmp_path))
    assert "broken.json" in str(err.value)


def test_a2_scenario_runs_green(tmp_path):
    code, report = run_scenario(cfg("a2-example"), out_dir=str(tmp_path))
    assert code == 0 and report["passed"]
    assert {c["name"] for c in report["checks"]} >= {
        "bitorsor-axioms",
        "fibre-blocks",
        "weak-equivalence-pair",
        "induced-sign-cocycle",
        "section-independence",
        "composition-roundtrip",
    }
    assert os.path.exists(tmp_path / "report.json")
    assert os.path.exists(tmp_path / "spectra.csv")
    assert os.path.exists(tmp_path / "summary.md")


def test_a2_scenario_param_n5():
    code, report = run_scenario(cfg("a2-example", params={"N": 5}))
    assert code == 0 and report["params"]["N"] == 5


def test_report_deterministic(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    run_scenario(cfg("a2-example"), out_dir=str(a))
    run_scenario(cfg("a2-example"), out_dir=str(b))
    for fname in ("report.json", "spectra.csv", "summary.md"):
        assert (a / fname).read_bytes() == (b / fname).read_bytes()


def test_unknown_scenario_rejected():
    with pytest.raises(ConfigError):
        run_scenario(cfg("nope"))


def test_wrong_schema_version_rejected():
    with pytest.raises(ConfigError):
        run_scenario({"schema_version": 99, "scenario": "a2-example"})


def test_tolerance_loosening_needs_force():
    config = cfg("free-rotation-circle", params={"m": 2, "modes": 16})
    config["tolerances"] = {"spectra-match": 1e-3}
    with pytest.raises(ConfigError):
        run_scenario(config)
    code, report = run_scenario(config, force=True)
    assert code == 0


def test_tightening_is_allowed():
    config = cfg("noneffective-circle")
    config["tolerances"] = {"non-effectiveness": 0.0}
    code, report = run_scenario(config)
    assert code == 0


def test_registered_scenario_runs(tmp_path):
    path = tmp_path / "mine.json"
    path.write_text(
        json.dumps({"name": "a2-n5", "scenario": "a2-example", "params": {"N": 5}})
    )
    code, report = run_scenario(cfg("a2-n5"), registry_dir=str(tmp_path))
    assert code == 0 and report["params"]["N"] == 5


def test_noneffective_scenario_green():
    code, report = run_scenario(cfg("noneffective-circle"))
    assert code == 0, json.dumps(report, indent=1)


def test_cech_scenario_green():
    code, report = run_scenario(cfg("cech-localization"))
    assert code == 0, json.dumps(report, indent=1)


def test_cocycle_scenario_green():
    code, report = run_scenario(cfg("cocycle-transport"))
    assert code == 0, json.dumps(report, indent=1)


def test_cli_list_and_run(tmp_path, capsys):
    assert cli_main(["--list"]) == 0
    out = capsys.readouterr().out
    assert "a2-example" in out
    code = cli_main(["--scenario", "a2-example", "--out", str(tmp_path / "o")])
    assert code == 0
    out = capsys.readouterr().out
    assert "[PASS]" in out and "overall: PASS" in out
    assert (tmp_path / "o" / "report.json").exists()


def test_cli_bad_usage(capsys):
    assert cli_main([]) == 2
    assert cli_main(["--scenario", "nope"]) == 2


def test_cli_config_file(tmp_path):
    config = cfg("a2-example", params={"N": 3})
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(config))
    assert cli_main(["--config", str(path)]) == 0


def test_empty_check_list_gives_empty_report():
    config = cfg("a2-example", checks=[])
    code, report = run_scenario(config)
    assert code == 0 and report["checks"] == [] and report["passed"]


def test_check_subset_runs_in_declared_order():
    config = cfg("a2-example", checks=["fibre-blocks", "bitorsor-axioms"])
    code, report = run_scenario(config)
    names = [c["name"] for c in report["checks"]]
    assert names == ["bitorsor-axioms", "fibre-blocks"]  # declared order wins
    assert code == 0


def test_unknown_check_name_rejected():
    with pytest.raises(ConfigError):
        run_scenario(cfg("a2-example", checks=["no-such-check"]))
