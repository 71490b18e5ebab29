"""
시나리오 설정, 산출물 출력, CLI 테스트
"""
import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

from transport_selection.errors import ConfigError
from transport_selection.dyadic import chessboard_grid
from transport_selection.harness import (
    Outcome,
    ScenarioConfig,
    csv_header,
    emit,
    emit_outcome,
    load_config,
    parse_assignments,
)
from transport_selection.harness.cli import main


# ----------------------------------------------------------------------
# config
# ----------------------------------------------------------------------
def test_parse_assignments():
    values = parse_assignments([
        "# scenario",
        "lambda = 2   # scale",
        "",
        "q_list = 1, 2,4",
        "svg = yes",
        "field_strength = none",
    ])
    assert values == dict(lam=2, q_list=(1, 2, 4), svg=True, field_strength=None)


@pytest.mark.parametrize("lines,fragment", [
    (["colour = red"], "unknown key"),
    (["depth = 2", "depth = 3"], "duplicate key"),
    (["depth = deep"], "bad value"),
    (["depth"], "expected key = value"),
])
def test_parse_errors_name_the_line(lines, fragment):
    with pytest.raises(ConfigError) as info:
        parse_assignments(lines, "run.cfg")
    assert fragment in str(info.value)
    assert f"run.cfg:{len(lines)}" in str(info.value)


def test_range_checks():
    with pytest.raises(ConfigError):
        ScenarioConfig(reflection_sign=0)
    with pytest.raises(ConfigError):
        ScenarioConfig(q_list=())
    with pytest.raises(ConfigError):
        ScenarioConfig(orientation="sideways")
    with pytest.raises(ConfigError):
        load_config(overrides=["p = 0.5"])


def test_manifest_round_trip():
    defaults = ScenarioConfig()
    lines = [f"{key} = {value}" for key, value in defaults.manifest()]
    assert load_config(overrides=lines) == defaults
    assert defaults.manifest()[1] == ("lambda", "0")


def test_file_then_overrides(tmp_path):
    path = tmp_path / "scenario.cfg"
    path.write_text("scenario = smoke\ndepth = 3\nlambdas = 0, 1\n", encoding="utf-8")
    cfg = load_config(path, ["depth = 4"])
    assert cfg.scenario == "smoke"
    assert cfg.depth == 4
    assert cfg.lambdas == (0, 1)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")


def test_out_dir(monkeypatch):
    monkeypatch.setenv("TSL_OUT", "/tmp/elsewhere")
    assert str(ScenarioConfig().out_dir()) == "/tmp/elsewhere"
    assert str(ScenarioConfig(out="here").out_dir()) == "here"


# ----------------------------------------------------------------------
# emission
# ----------------------------------------------------------------------
def test_outcome_check():
    out = Outcome("demo")
    assert out.passed
    assert out.check(True, "fine")
    assert not out.check(False, "broken", "x=1")
    assert out.failures == [("broken", "x=1")]
    assert not out.passed


def test_csv_has_schema_header_and_is_deterministic(tmp_path):
    frame = pd.DataFrame(dict(lam=[0, 1], gap=[0.5, 1.0 / 3.0]))
    first = emit(frame, "csv", tmp_path / "a", "gaps")
    second = emit(frame, "csv", tmp_path / "b", "gaps")
    text = first.read_text(encoding="utf-8")
    assert text.startswith(csv_header("gaps"))
    assert "0.333333333333" in text
    assert first.read_bytes() == second.read_bytes()


def test_emit_rejects_bad_requests(tmp_path):
    frame = pd.DataFrame(dict(a=[1]))
    with pytest.raises(ConfigError):
        emit(frame, "xlsx", tmp_path, "a")
    with pytest.raises(ConfigError):
        emit(frame, "svg", tmp_path, "a")


def test_grid_outputs(tmp_path):
    out = Outcome("demo", tables=dict(t=pd.DataFrame(dict(a=[1]))),
                  grids=dict(board=chessboard_grid(0, 2)))
    paths = emit_outcome(out, tmp_path)
    assert [p.name for p in paths] == ["demo_t.csv", "demo_board.csv"]
    rows = pd.read_csv(paths[1], comment="#")
    assert len(rows) == 64
    assert np.isin(rows["value"].astype(str), ["0", "1"]).all()


def test_svg_of_grid(tmp_path):
    pytest.importorskip("matplotlib")
    grid = chessboard_grid(0, 2)
    first = emit(grid, "svg", tmp_path / "a", "board")
    second = emit(grid, "svg", tmp_path / "b", "board")
    assert first.read_text(encoding="utf-8").lstrip().startswith("<?xml")
    assert first.read_bytes() == second.read_bytes()


# ----------------------------------------------------------------------
# CLI
# ----------------------------------------------------------------------
def test_cli_config_prints_manifest():
    result = CliRunner().invoke(main, ["config"])
    assert result.exit_code == 0
    assert "lambda = 0" in result.output


def test_cli_config_error_exit_code():
    result = CliRunner().invoke(main, ["config", "--flag", "nope=1"])
    assert result.exit_code == 2


def test_cli_mixing_writes_tables(tmp_path):
    result = CliRunner().invoke(main, ["mixing", "--out", str(tmp_path),
                                       "--flag", "lambdas=0", "--flag", "depth=2"])
    assert result.exit_code == 0, result.output
    table = tmp_path / "mixing_mixing_identities.csv"
    assert table.exists()
    assert table.read_text(encoding="utf-8").splitlines()[0] == \
        "# transport-selection table=mixing_identities schema=1"
    assert (tmp_path / "mixing_unmixing_lam0_t1_2.csv").exists()
    assert not (tmp_path / "failures.csv").exists()


def test_cli_truncation(tmp_path):
    result = CliRunner().invoke(main, ["truncation", "--out", str(tmp_path),
                                       "--flag", "lambdas=0", "--flag", "q_list=1,2"])
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(tmp_path / "truncation_truncation.csv", comment="#")
    assert list(frame["q"]) == [1, 2]
    assert frame["mutual_gap_is_half"].all()
