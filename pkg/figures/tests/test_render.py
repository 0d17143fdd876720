import math

import pytest

from ctxmatch_figures.render import (ColumnError, FigureSpec, OVERLAYS,
                                     load_cells, main, overlay_segments,
                                     render_phase_diagram)

HEADER = ("x,y,rho,eta,n,d,trials,estimator,exact_rate,se_exact,"
          "mean_overlap,base_seed,region\n")


def write_csv(path, rows):
    lines = [HEADER]
    for x, y, rate, ov, region in rows:
        rate_s = "nan" if math.isnan(rate) else f"{rate}"
        ov_s = "nan" if math.isnan(ov) else f"{ov}"
        lines.append(f"{x},{y},0.1,0.1,8,2000,100,exhaustive,"
                     f"{rate_s},0.01,{ov_s},0,{region}\n")
    path.write_text("".join(lines))


@pytest.fixture
def sweep_csv(tmp_path):
    p = tmp_path / "sweep.csv"
    write_csv(p, [
        (0.0, 1.0, 0.2, 0.5, "impossible-half"),
        (0.0, 5.0, 0.95, 0.99, "exact"),
        (3.5, 1.0, 0.9, 0.95, "exact"),
        (3.5, 5.0, 1.0, 1.0, "exact"),
        (8.0, 1.0, math.nan, math.nan, "infeasible"),
        (8.0, 5.0, math.nan, math.nan, "infeasible"),
    ])
    return p


def test_overlay_intercepts():
    segs = overlay_segments(frozenset(OVERLAYS))
    assert segs["exact_line"] == ((0.0, 4.0), (4.0, 0.0))
    assert segs["almost_exact_line"] == ((0.0, 2.0), (4.0, 0.0))
    assert segs["conjecture_line"] == ((0.0, 2.0), (4.0, 0.0))
    assert overlay_segments(frozenset()) == {}


def test_load_cells_grid_layout(sweep_csv):
    xs, ys, grid, regions = load_cells(str(sweep_csv), "exact_rate")
    assert list(xs) == [0.0, 3.5, 8.0]
    assert list(ys) == [1.0, 5.0]
    assert grid[0, 1] == 0.95
    assert math.isnan(grid[2, 0])
    assert regions[2, 0] == "infeasible"
    # exact-labeled cells carry the high metric values
    exact_vals = grid[regions == "exact"]
    other = grid[(regions != "exact") & (regions != "infeasible")]
    assert exact_vals.min() > other.max()


def test_missing_column_is_named(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x,y,region\n0,0,exact\n")
    with pytest.raises(ColumnError, match="exact_rate"):
        load_cells(str(p), "exact_rate")


def test_render_is_byte_deterministic(sweep_csv, tmp_path):
    out1 = tmp_path / "a.png"
    out2 = tmp_path / "b.png"
    render_phase_diagram(FigureSpec(str(sweep_csv), "exact_rate", str(out1)))
    render_phase_diagram(FigureSpec(str(sweep_csv), "exact_rate", str(out2)))
    assert out1.read_bytes() == out2.read_bytes()
    assert out1.stat().st_size > 0


def test_render_is_read_only(sweep_csv, tmp_path):
    before = sweep_csv.read_bytes()
    render_phase_diagram(FigureSpec(str(sweep_csv), "mean_overlap",
                                    str(tmp_path / "c.png")))
    assert sweep_csv.read_bytes() == before


def test_single_cell_csv(tmp_path):
    p = tmp_path / "one.csv"
    write_csv(p, [(1.0, 2.0, 0.5, 0.7, "almost-exact-gap")])
    out = tmp_path / "one.png"
    render_phase_diagram(FigureSpec(str(p), "exact_rate", str(out)))
    assert out.stat().st_size > 0


def test_spec_validation(sweep_csv, tmp_path):
    with pytest.raises(ValueError):
        FigureSpec(str(sweep_csv), "wall_time", str(tmp_path / "x.png"))
    with pytest.raises(ValueError):
        FigureSpec(str(sweep_csv), "exact_rate", str(tmp_path / "x.png"),
                   frozenset({"mystery_line"}))


def test_cli_paths(sweep_csv, tmp_path):
    out = tmp_path / "cli.png"
    assert main(["--csv", str(sweep_csv), "--metric", "exact_rate",
                 "--out", str(out), "--overlay", "exact_line"]) == 0
    assert out.stat().st_size > 0
    assert main(["--csv", str(tmp_path / "missing.csv"), "--out",
                 str(out)]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n0,0\n")
    assert main(["--csv", str(bad), "--out", str(out)]) == 2
