import csv
import json
import re
import time
from dataclasses import replace
from pathlib import Path

import pytest

from maxwell_p1 import TimeGrid, build_structured_mesh
from maxwell_p1.harness.cli import main
from maxwell_p1.harness.config import (
    ConfigError,
    StudyConfig,
    parse_config,
    parse_int_range,
    read_config_file,
)
from maxwell_p1.harness.output import (
    CSV_HEADER,
    csv_text,
    emit_table,
    json_text,
    load_json,
    svg_text,
    write_outputs,
)
from maxwell_p1.harness.study import SlopeFit, run_case, run_study


def test_defaults():
    cfg = parse_config([])
    assert cfg.levels == (1, 2, 3, 4, 5, 6)
    assert cfg.m_values == tuple(range(2, 10))
    assert cfg.T == 0.5 and cfg.tau_base == 0.025 and cfg.cfl_C == 1.0
    assert len(cfg.runs) == 48
    assert cfg.tau(6) == pytest.approx(0.025 / 64)


def test_small_selection():
    cfg = parse_config(["--levels", "1..3", "--m", "2"])
    assert cfg.runs == [(2, 1), (2, 2), (2, 3)]


@pytest.mark.parametrize(
    "text, expected", [("1..3", [1, 2, 3]), ("2,4", [2, 4]), ("2..3,7", [2, 3, 7])]
)
def test_int_ranges(text, expected):
    assert parse_int_range(text) == expected


@pytest.mark.parametrize("text", ["", "3..1", "a..b", "1.5"])
def test_bad_int_ranges(text):
    with pytest.raises(ConfigError):
        parse_int_range(text)


@pytest.mark.parametrize(
    "argv",
    [
        ["--tau-base", "-1"],
        ["--T", "0"],
        ["--levels", "0..2"],
        ["--m", "1"],
        ["--formats", "pdf"],
        ["--T", "abc"],
    ],
)
def test_bad_flags_exit_two(argv, tmp_path, capsys):
    assert main(["study", "--out", str(tmp_path), *argv]) == 2


def test_unknown_flag_exit_two(capsys):
    assert main(["study", "--bogus"]) == 2


def test_config_file(tmp_path):
    p = tmp_path / "study.cfg"
    p.write_text("# small run\nlevels = 1..2\nm = 3, 4\ntau-base = 0.0125  # halved\n")
    cfg = parse_config(["--config", str(p), "--levels", "2"])
    assert cfg.levels == (2,)  # flag wins over file
    assert cfg.m_values == (3, 4)
    assert cfg.tau_base == 0.0125


def test_config_file_rejects_unknown_key(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("levels = 1..2\ncolour = blue\n")
    with pytest.raises(ConfigError, match="unknown key"):
        read_config_file(p)
    assert main(["study", "--config", str(p)]) == 2


@pytest.fixture(scope="module")
def small_result(tmp_path_factory):
    out = tmp_path_factory.mktemp("study")
    cfg = StudyConfig(levels=(1, 2, 3, 4), m_values=(2, 5), out=out, serial=True)
    return run_study(cfg)


def test_result_shape(small_result):
    assert [(r.m, r.level) for r in small_result.runs] == small_result.config.runs
    assert all(r.ok for r in small_result.runs)
    first = small_result.run(2, 1)
    assert first.r1 is None
    assert small_result.run(2, 2).r1 == pytest.approx(first.e1 / small_result.run(2, 2).e1)


def test_csv(small_result):
    rows = list(csv.reader(csv_text(small_result).splitlines()))
    assert rows[0] == CSV_HEADER
    assert CSV_HEADER == "m,level,nel,nno,h,tau,e1,r1,e2,r2,e3,r3,slope_fit_applies".split(",")
    assert len(rows) == len(small_result.runs) + 1
    assert rows[1][7] == ""  # no ratio on the coarsest level
    # the fit covers the last four levels, i.e. all of them here
    assert {r[-1] for r in rows[1:]} == {"true"}


def test_table(small_result):
    text = emit_table(small_result, 2)
    assert text.startswith("m = 2")
    assert "fitted slopes over levels 1..4" in text
    assert len(text.splitlines()) == 3 + 4 + 1


def test_svg(small_result):
    svg = svg_text(small_result, 2)
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert len(re.findall(r"<polyline class=\"series\"", svg)) == 3
    assert len(re.findall(r"class=\"guide\"[^>]*stroke-dasharray", svg)) == 2


def test_json_round_trip(small_result, tmp_path):
    path = tmp_path / "r.json"
    path.write_text(json_text(small_result))
    back = load_json(path)
    assert back.runs == [replace(r, wall_clock=None) for r in small_result.runs]
    assert back.config == small_result.config
    assert back.diagnostics == small_result.diagnostics
    assert json_text(back) == json_text(small_result)


def test_slope_fit_exact_line():
    h = [0.5, 0.25, 0.125]
    fit = SlopeFit.fit(h, [3 * x**2 for x in h], [1, 2, 3])
    assert fit.slope == pytest.approx(2.0)
    assert fit.residual == pytest.approx(0.0, abs=1e-20)


def _cli_files(out):
    return {p.name: p.read_bytes() for p in Path(out).iterdir() if p.is_file()}


def test_cli_outputs_byte_identical(tmp_path, capsys):
    args = ["study", "--levels", "1..3", "--m", "2,3"]
    assert main([*args, "--out", str(tmp_path / "a")]) == 0
    table = capsys.readouterr().out
    assert "m = 2" in table and "m = 3" in table
    assert main([*args, "--out", str(tmp_path / "b"), "--serial"]) == 0
    a, b = _cli_files(tmp_path / "a"), _cli_files(tmp_path / "b")
    assert set(a) == {
        "tables.txt", "results.csv", "results.json", "convergence_m2.svg", "convergence_m3.svg"
    }
    for name in a:
        if name == "results.json":
            # the two configurations differ only in the serial flag and out dir
            ja, jb = json.loads(a[name]), json.loads(b[name])
            for key in ("serial", "out"):
                ja["config"].pop(key), jb["config"].pop(key)
            assert ja == jb
        else:
            assert a[name] == b[name], name


def test_cli_rerun_identical(tmp_path):
    args = ["study", "--levels", "1..2", "--m", "4", "--out", str(tmp_path)]
    assert main(args) == 0
    first = _cli_files(tmp_path)
    assert main(args) == 0
    assert _cli_files(tmp_path) == first


def test_cli_timings_recorded(tmp_path):
    assert main(["study", "--levels", "1", "--m", "2", "--timings", "--out", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "results.json").read_text())
    assert data["runs"][0]["wall_clock"] > 0


def test_cli_blowup_exit_three(tmp_path, capsys):
    code = main(
        ["study", "--levels", "3", "--m", "2", "--T", "100", "--tau-base", "4",
         "--out", str(tmp_path)]
    )
    assert code == 3
    assert "unstable" in capsys.readouterr().err
    assert "blow-up" in (tmp_path / "tables.txt").read_text()


def test_cli_io_error_exit_four(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("not a directory")
    assert main(["study", "--levels", "1", "--m", "2", "--out", str(blocker / "sub")]) == 4


def test_cli_snapshots(tmp_path):
    assert main(
        ["study", "--levels", "2", "--m", "2", "--snapshot-every", "20", "--out", str(tmp_path)]
    ) == 0
    snaps = sorted((tmp_path / "snapshots" / "m2_l2").iterdir())
    assert [p.name for p in snaps] == [f"step_{k:06d}.txt" for k in (0, 20, 40, 60, 80)]


def test_write_outputs_subset(small_result, tmp_path):
    cfg = replace(small_result.config, out=tmp_path, formats=("csv",))
    res = replace(small_result, config=cfg)
    assert [p.name for p in write_outputs(res)] == ["results.csv"]


def test_single_coarse_run_is_fast():
    start = time.perf_counter()
    rec = run_case(2, 1)
    assert time.perf_counter() - start < 1.0
    assert (rec.nel, rec.nno, rec.steps) == (8, 9, 40)


def test_finest_default_run_dimensions():
    cfg = StudyConfig()
    mesh = build_structured_mesh(max(cfg.levels))
    assert 2 * mesh.nno == 8450
    assert TimeGrid.from_step(cfg.T, cfg.tau(6)).N == 1280
