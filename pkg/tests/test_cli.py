import csv
import io

import pytest

import pargrid.builders as builders
from pargrid import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr()


def parse_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_build_three_algorithms(capsys):
    code, out = run(capsys, "build", "--gen", "uniform:2000:7", "--density", "5",
                    "--algo", "parallel,sorted,compact", "--repeat", "2")
    assert code == 0
    rows = parse_csv(out.out)
    assert [r["algo"] for r in rows] == ["parallel", "sorted", "compact"]
    assert len({r["ncells"] for r in rows}) == 1
    assert len({r["NO"] for r in rows}) == 1
    assert list(rows[0]) == cli.BUILD_COLUMNS


def test_build_explicit_dims(capsys):
    code, out = run(capsys, "build", "--gen", "uniform:100:1",
                    "--dims", "141x37x141", "--algo", "parallel", "--repeat", "1")
    assert code == 0
    rows = parse_csv(out.out)
    assert rows[0]["ncells"] == "735597"
    assert rows[0]["dims"] == "141x37x141"


def test_build_unknown_algo_is_usage_error(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["build", "--gen", "uniform:10:1", "--algo", "bogus"])
    assert e.value.code == 2


def test_build_missing_file_exits_2(capsys):
    code, out = run(capsys, "build", "--mesh", "/nonexistent/scene.obj",
                    "--algo", "parallel")
    assert code == 2
    assert "error:" in out.err


def test_stats_row(capsys):
    code, out = run(capsys, "stats", "--gen", "uniform:500:3", "--dims", "6x6x6")
    assert code == 0
    rows = parse_csv(out.out)
    assert list(rows[0]) == cli.STATS_COLUMNS
    assert rows[0]["ncells"] == "216"
    assert 0.0 <= float(rows[0]["pct_empty"]) <= 100.0


def test_stats_single_triangle(capsys):
    code, out = run(capsys, "stats", "--gen", "uniform:1:9")
    assert code == 0
    assert parse_csv(out.out)[0]["ntris"] == "1"


def test_stats_matches_library(capsys):
    from pargrid import build_parallel, compute_stats, gen_scene, spec_for_mesh
    code, out = run(capsys, "stats", "--gen", "walls:200:5", "--dims", "8x8x8")
    row = parse_csv(out.out)[0]
    mesh = gen_scene("walls", 200, 5)
    grid, _ = build_parallel(mesh, spec_for_mesh(mesh, dims=(8, 8, 8)))
    st = compute_stats(grid, mesh)
    assert int(row["NO"]) == st.no
    assert int(row["memory_bytes"]) == st.memory_bytes
    assert float(row["avg_cells_item"]) == pytest.approx(st.avg_cells_per_item, abs=5e-3)


def test_validate_small_run(capsys):
    code, out = run(capsys, "validate", "--scenes", "3", "--rays", "300", "--seed", "42")
    assert code == 0
    assert "0 mismatches" in out.out


def test_validate_repeatable(capsys):
    _, out1 = run(capsys, "validate", "--scenes", "1", "--rays", "50", "--seed", "42")
    _, out2 = run(capsys, "validate", "--scenes", "1", "--rays", "50", "--seed", "42")
    assert out1.out == out2.out


def test_validate_detects_injected_fault(capsys):
    builders._fault_inject = True
    try:
        code, out = run(capsys, "validate", "--scenes", "2", "--rays", "10", "--seed", "1")
    finally:
        builders._fault_inject = False
    assert code == 1
    assert "FAIL" in out.out


def test_raycast_with_check(capsys):
    code, out = run(capsys, "raycast", "--gen", "walls:300:2", "--rays", "200",
                    "--seed", "3", "--check")
    assert code == 0
    assert "0 mismatches" in out.out


def test_gen_roundtrip(tmp_path, capsys):
    path = tmp_path / "scene.obj"
    code, _ = run(capsys, "gen", "skewed:120:4", "--out", str(path))
    assert code == 0
    from pargrid import gen_scene, load_obj
    back = load_obj(path)
    mesh = gen_scene("skewed", 120, 4)
    assert back.ntriangles == mesh.ntriangles


def test_csv_stable_apart_from_timings(capsys):
    args = ["build", "--gen", "uniform:1000:5", "--dims", "8x8x8",
            "--algo", "parallel,sorted", "--repeat", "1"]
    _, out1 = run(capsys, *args)
    _, out2 = run(capsys, *args)
    rows1, rows2 = parse_csv(out1.out), parse_csv(out2.out)
    timing = {c for c in cli.BUILD_COLUMNS if c.endswith("_ms") or "_ms_" in c}
    for r1, r2 in zip(rows1, rows2):
        for col in cli.BUILD_COLUMNS:
            if col not in timing:
                assert r1[col] == r2[col], col


def test_markdown_format(capsys):
    code, out = run(capsys, "stats", "--gen", "uniform:50:1", "--format", "md")
    assert code == 0
    lines = out.out.strip().splitlines()
    assert lines[0].startswith("| scene |")
    assert set(lines[1].replace("|", "")) <= {"-"}


def test_out_file(tmp_path, capsys):
    path = tmp_path / "rows.csv"
    code, out = run(capsys, "stats", "--gen", "uniform:50:1", "--out", str(path))
    assert code == 0
    assert out.out == ""
    assert path.read_text().startswith("scene,")


def test_workers_flag(capsys):
    code, out = run(capsys, "build", "--gen", "uniform:9000:1", "--algo", "parallel",
                    "--repeat", "1", "--workers", "4")
    assert code == 0
    _, out1 = run(capsys, "build", "--gen", "uniform:9000:1", "--algo", "parallel",
                  "--repeat", "1", "--workers", "1")
    r4, r1 = parse_csv(out.out)[0], parse_csv(out1.out)[0]
    assert r4["NO"] == r1["NO"] and r4["ncells"] == r1["ncells"]
