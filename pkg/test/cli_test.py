import csv
import os

import pytest

from services.errors import IntegrationError
from services.validation_service import CheckResult


def _read_table(path):
    """Column names and data rows of a written CSV, skipping the # header."""
    with open(path, newline="", encoding="utf-8") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    table = list(csv.reader(lines))
    return table[0], table[1:]


def _comments(path):
    with open(path, encoding="utf-8") as handle:
        return [line[2:].rstrip("\n") for line in handle if line.startswith("# ")]


def _sets(*overrides):
    args = []
    for text in overrides:
        args += ["--set", text]
    return args


def test_fixed_points_of_bistable_drive(runner, setup_test_output):
    """Test three fixed points are written and printed for the default drive."""
    result = runner.invoke(args=["fixed-points"])
    columns, rows = _read_table(os.path.join(setup_test_output, "fixed_points.csv"))

    assert result.exit_code == 0
    assert columns == ["x", "stability", "bracket_lo", "bracket_hi", "residual_log"]
    assert [row[1] for row in rows] == ["stable", "unstable", "stable"]
    assert "3 fixed point(s)" in result.output


def test_fixed_points_none_is_not_an_error(runner, setup_test_output):
    result = runner.invoke(args=["fixed-points"] + _sets("drive.v_plus=0.72"))
    _, rows = _read_table(os.path.join(setup_test_output, "fixed_points.csv"))

    assert result.exit_code == 0
    assert rows == []


def test_header_records_version_and_config(runner, setup_test_output):
    runner.invoke(args=["fixed-points"] + _sets("drive.v_minus=-0.55"))
    comments = _comments(os.path.join(setup_test_output, "fixed_points.csv"))

    assert comments[0].startswith("membif ")
    assert "drive.v_minus -5.5000000000000004e-01" in comments
    assert "output.prefix " in comments


@pytest.mark.parametrize("override", ["drive.v_minus=0.3", "drive.v_middle=1", "drive.v_plus=fast"])
def test_bad_config_exits_2(runner, override):
    result = runner.invoke(args=["fixed-points"] + _sets(override))

    assert result.exit_code == 2


def test_sign_map_small_window(runner, setup_test_output):
    result = runner.invoke(args=["sign-map"] + _sets("sign_map.n_x=3", "sign_map.n_v_minus=3"))
    columns, rows = _read_table(os.path.join(setup_test_output, "sign_map.csv"))

    assert result.exit_code == 0
    assert columns == ["x", "v_minus", "sign"]
    assert len(rows) == 9
    assert {row[2] for row in rows} <= {"-1", "0", "1"}


def test_sign_map_zero_area_exits_2(runner):
    result = runner.invoke(args=["sign-map"] + _sets("sign_map.v_minus_lo=-0.5", "sign_map.v_minus_hi=-0.5"))

    assert result.exit_code == 2


def test_nst_map_single_cell(runner, setup_test_output):
    """Test the window collapsed onto (0.54, -0.6) reports N_st = 2."""
    result = runner.invoke(args=["nst-map"] + _sets(
        "nst_map.v_plus_lo=0.54", "nst_map.v_plus_hi=0.54", "nst_map.n_v_plus=1",
        "nst_map.v_minus_lo=-0.6", "nst_map.v_minus_hi=-0.6", "nst_map.n_v_minus=1"))
    _, rows = _read_table(os.path.join(setup_test_output, "nst_map.csv"))
    _, boundary = _read_table(os.path.join(setup_test_output, "nst_boundary.csv"))

    assert result.exit_code == 0
    assert len(rows) == 1
    assert rows[0][2] == "2"
    assert boundary == []


def test_nst_map_above_onset_is_empty(runner, setup_test_output):
    result = runner.invoke(args=["nst-map"] + _sets(
        "nst_map.v_plus_lo=0.82", "nst_map.v_plus_hi=0.9", "nst_map.n_v_plus=3",
        "nst_map.n_v_minus=4"))
    _, rows = _read_table(os.path.join(setup_test_output, "nst_map.csv"))

    assert result.exit_code == 0
    assert {row[2] for row in rows} == {"0"}
    assert "N_st=0: 12" in result.output


def test_nst_map_bytes_independent_of_threads(app, tmp_path):
    """Test MEMBIF_THREADS changes nothing in the written map."""
    window = _sets("nst_map.v_plus_lo=0.45", "nst_map.v_plus_hi=0.65", "nst_map.n_v_plus=5",
                   "nst_map.v_minus_lo=-0.9", "nst_map.v_minus_hi=-0.5", "nst_map.n_v_minus=5")
    outputs = []
    for threads in (1, 3):
        app.config["THREADS"] = threads
        prefix = str(tmp_path / f"threads{threads}") + os.sep
        result = app.test_cli_runner().invoke(args=["nst-map", "--out", prefix] + window)
        assert result.exit_code == 0
        with open(prefix + "nst_map.csv", "rb") as handle:
            outputs.append(handle.read())

    assert outputs[0] == outputs[1]


def test_invalid_thread_count_exits_2(app):
    app.config["THREADS"] = 0

    result = app.test_cli_runner().invoke(args=["fixed-points"])

    assert result.exit_code == 2


def test_zero_periods_write_header_only(runner, setup_test_output):
    result = runner.invoke(args=["simulate"] + _sets("simulation.n_periods=0"))
    path = os.path.join(setup_test_output, "trajectory.csv")
    columns, rows = _read_table(path)

    assert result.exit_code == 0
    assert columns == ["t_seconds", "x"]
    assert rows == []
    assert "boundary_hit none" in _comments(path)
    assert sum(1 for line in _comments(path) if line.startswith("fixed_point ")) == 3


def test_simulate_records_attractor(runner, setup_test_output):
    result = runner.invoke(args=["simulate"] + _sets("simulation.n_periods=20", "simulation.x0=0.3"))
    path = os.path.join(setup_test_output, "trajectory.csv")
    _, rows = _read_table(path)

    assert result.exit_code == 0
    assert len(rows) == 1 + 4 * 20
    assert any(line.startswith("attractor_mean ") for line in _comments(path))


def test_simulate_appends_fixed_points_after_rows(runner, setup_test_output):
    """Test the fixed-point reference lines follow the last trajectory row."""
    runner.invoke(args=["simulate"] + _sets("simulation.n_periods=3"))
    with open(os.path.join(setup_test_output, "trajectory.csv"), encoding="utf-8") as handle:
        lines = handle.read().splitlines()

    assert all(line.startswith("# fixed_point ") for line in lines[-3:])
    assert not lines[-4].startswith("#")


def test_basin_scan_rows(runner, setup_test_output):
    result = runner.invoke(args=["basin-scan"] + _sets(
        "simulation.n_periods=10", "simulation.basin_lo=0.1", "simulation.basin_hi=0.5", "simulation.basin_n=3"))
    columns, rows = _read_table(os.path.join(setup_test_output, "basin_scan.csv"))

    assert result.exit_code == 0
    assert columns == ["x0", "mean", "amplitude"]
    assert len(rows) == 3


def test_basin_scan_too_short_exits_3(runner):
    result = runner.invoke(args=["basin-scan"] + _sets("simulation.n_periods=5", "simulation.basin_n=2",
                                                       "simulation.basin_lo=0.1", "simulation.basin_hi=0.5"))

    assert result.exit_code == 3


def test_curves_and_plot_script(runner, setup_test_output):
    result = runner.invoke(args=["curves", "--plot-script"] + _sets("curves.n_x=200", "curves.n_v_plus=51"))

    assert result.exit_code == 0
    for name in ("curve_a", "curve_b", "curve_c", "curve_d", "cusp"):
        assert os.path.exists(os.path.join(setup_test_output, f"{name}.csv"))
    _, cusp_rows = _read_table(os.path.join(setup_test_output, "cusp.csv"))
    assert float(cusp_rows[0][0]) == pytest.approx(0.2039, abs=5e-4)
    with open(os.path.join(setup_test_output, "plot_curves.py"), encoding="utf-8") as handle:
        assert "curve_a.csv" in handle.read()


def test_file_stem_prefix(runner, tmp_path):
    stem = str(tmp_path / "run1_")

    result = runner.invoke(args=["g-profile", "--out", stem] + _sets("scan.n_grid=11"))

    assert result.exit_code == 0
    assert os.path.exists(stem + "g_profile.csv")


def test_reduced_profile_columns(runner, setup_test_output):
    result = runner.invoke(args=["reduced-profile"] + _sets("scan.n_grid=21"))
    columns, rows = _read_table(os.path.join(setup_test_output, "reduced_profile.csv"))

    assert result.exit_code == 0
    assert columns == ["x", "lhs", "rhs", "rhs_full"]
    assert len(rows) == 21


def test_numerical_failure_exits_3(runner, mocker):
    mocker.patch("commands.fixed_point_commands.find_fixed_points", side_effect=IntegrationError("cap reached"))

    result = runner.invoke(args=["fixed-points"])

    assert result.exit_code == 3


def test_write_failure_exits_4(runner, mocker):
    mocker.patch("storage.write_csv", side_effect=PermissionError("read-only"))

    result = runner.invoke(args=["fixed-points"])

    assert result.exit_code == 4


def test_missing_config_file_exits_4(runner, tmp_path):
    result = runner.invoke(args=["fixed-points", "--config", str(tmp_path / "absent.toml")])

    assert result.exit_code == 4


def test_validate_reports_failures(runner, mocker, setup_test_output):
    """Test one failing check makes validate exit 3 after writing the table."""
    mocker.patch("commands.validation_commands.run_checks", return_value=[
        CheckResult("cusp_state", 1e-5, 5e-4, True),
        CheckResult("curve_a_gap", 0.5, 0.03, False),
    ])

    result = runner.invoke(args=["validate"])
    _, rows = _read_table(os.path.join(setup_test_output, "validation.csv"))

    assert result.exit_code == 3
    assert [row[3] for row in rows] == ["1", "0"]
    assert "FAIL" in result.output


def test_validate_passes(runner, mocker):
    checks = mocker.patch("commands.validation_commands.run_checks",
                          return_value=[CheckResult("cusp_state", 1e-5, 5e-4, True)])

    result = runner.invoke(args=["validate", "--tolerance-scale", "2"])

    assert result.exit_code == 0
    assert checks.call_args[0][1] == 2.0
    assert "1 of 1 checks passed" in result.output


def test_validate_rejects_zero_tolerance_scale(runner):
    result = runner.invoke(args=["validate", "--tolerance-scale", "0"])

    assert result.exit_code == 2


def test_validate_with_corrupted_params_exits_2(runner):
    result = runner.invoke(args=["validate"] + _sets("model.sigma_p=-4e-5"))

    assert result.exit_code == 2
