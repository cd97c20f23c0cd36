import numpy as np
import pytest

from services.averaging_service import PulseDrive
from services.bifurcation_service import (
    BoundaryPolyline, PayloadKind, RegionGrid, SaddleNodeKind, boundary_distance,
    nst_map, sample_axis, saddle_node_threshold, sign_map, trace_boundary
)
from services.curve_service import curve_b
from services.errors import DomainError, InvalidBracketError
from services.model_service import ModelParams

P = ModelParams()
D = PulseDrive()


@pytest.mark.parametrize("v_plus, v_minus, expected", [(0.72, -0.6, 0), (0.54, -0.4, 1), (0.54, -0.6, 2)])
def test_nst_map_anchor_cells(v_plus, v_minus, expected):
    """Test the three reference N_st anchors on single-cell windows."""
    grid = nst_map(P, D, (v_plus, v_plus), (v_minus, v_minus), (1, 1))

    assert grid.cells.shape == (1, 1)
    assert grid.cells[0, 0] == expected


def test_nst_map_no_roots_above_upper_onset():
    """Test V+ > 0.81 has no stable points anywhere in V-."""
    grid = nst_map(P, D, (0.82, 0.9), (-1.0, -0.3), (3, 4))

    assert np.all(grid.cells == 0)


def test_nst_map_payload_range():
    """Test N_st stays in {0, 1, 2} over the whole window."""
    grid = nst_map(P, D, (0.3, 0.8), (-1.0, -0.3), (11, 15))

    assert set(np.unique(grid.cells)) <= {0, 1, 2}


def test_nst_map_independent_of_worker_count():
    serial = nst_map(P, D, (0.45, 0.65), (-0.9, -0.5), (5, 6), workers=1)
    threaded = nst_map(P, D, (0.45, 0.65), (-0.9, -0.5), (5, 6), workers=3)

    assert np.array_equal(serial.cells, threaded.cells)
    assert np.array_equal(serial.row_axis, threaded.row_axis)


def test_sample_axis_rules():
    assert list(sample_axis((0.5, 0.5), 1)) == [0.5]
    assert len(sample_axis((0.0, 1.0), 5)) == 5
    with pytest.raises(DomainError):
        sample_axis((0.5, 0.5), 2)
    with pytest.raises(DomainError):
        sample_axis((0.0, 1.0), 1)
    with pytest.raises(DomainError):
        sample_axis((1.0, 0.0), 3)


def test_sign_map_single_crossing_at_strong_negative_pulse():
    """Test the V- = -0.9 column at V+ = 0.6 flips from + to - once, near x = 0.064."""
    grid = sign_map(P, D, 0.6, (-0.9, -0.3), (1e-3, 1.0), (1000, 7))
    column = grid.cells[:, 0]
    flips = np.flatnonzero(column[1:] != column[:-1])

    assert grid.payload_kind is PayloadKind.SIGN_MAP
    assert column[0] == 1
    assert len(flips) == 1
    assert grid.row_axis[flips[0]] == pytest.approx(0.064, abs=0.01)


def test_sign_map_top_row_positive():
    grid = sign_map(P, D, 0.6, (-1.0, -0.3), (1e-3, 1.0), (50, 8))

    assert grid.cells.shape == (50, 8)
    assert np.all(grid.cells[0, :] == 1)


def test_sign_map_rejects_zero_area():
    with pytest.raises(DomainError):
        sign_map(P, D, 0.6, (-0.5, -0.5), (0.1, 0.9), (3, 3))
    with pytest.raises(DomainError):
        sign_map(P, D, 0.6, (-0.9, -0.5), (0.1, 0.9), (1, 3))


def test_saddle_node_thresholds_at_v_plus_0_6():
    """Test creation near -0.817 V and annihilation near -0.657 V."""
    creation = saddle_node_threshold(P, D, 0.6, SaddleNodeKind.CREATION, (-0.9, -0.75))
    annihilation = saddle_node_threshold(P, D, 0.6, SaddleNodeKind.ANNIHILATION, (-0.7, -0.6))

    assert creation == pytest.approx(-0.817, abs=0.005)
    assert annihilation == pytest.approx(-0.657, abs=0.005)


def test_saddle_node_threshold_locates_bracket():
    threshold = saddle_node_threshold(P, D, 0.6, "creation")

    assert threshold == pytest.approx(-0.817, abs=0.005)


def test_loss_through_right_boundary_matches_curve_b():
    """Test the numeric 1 -> 0 transition at V+ = 0.7 against curve B."""
    threshold = saddle_node_threshold(P, D, 0.7, SaddleNodeKind.ANNIHILATION, (-0.65, -0.5))
    analytic = curve_b(P, D.timing, [0.7]).v_minus[0]

    assert threshold == pytest.approx(analytic, abs=0.03)


def test_threshold_bisection_uses_counts(mocker):
    """Test the bisection on a mocked N_st step at -0.8."""
    count = mocker.patch("services.bifurcation_service.count_stable",
                         side_effect=lambda p, d, s: 2 if d.v_minus > -0.8 else 1)

    threshold = saddle_node_threshold(P, D, 0.6, SaddleNodeKind.CREATION, (-0.9, -0.7), tol=1e-5)

    assert threshold == pytest.approx(-0.8, abs=1e-5)
    assert count.call_count > 10


def test_threshold_rejects_equal_counts(mocker):
    mocker.patch("services.bifurcation_service.count_stable", return_value=1)

    with pytest.raises(InvalidBracketError):
        saddle_node_threshold(P, D, 0.6, SaddleNodeKind.CREATION, (-0.9, -0.7))


def test_threshold_rejects_wrong_direction(mocker):
    mocker.patch("services.bifurcation_service.count_stable",
                 side_effect=lambda p, d, s: 2 if d.v_minus > -0.8 else 1)

    with pytest.raises(InvalidBracketError):
        saddle_node_threshold(P, D, 0.6, SaddleNodeKind.ANNIHILATION, (-0.9, -0.7))


def test_threshold_without_transition_in_window(mocker):
    mocker.patch("services.bifurcation_service.count_stable", return_value=0)

    with pytest.raises(InvalidBracketError):
        saddle_node_threshold(P, D, 0.9, SaddleNodeKind.CREATION)


def test_trace_boundary_two_by_two():
    """Test [[0, 1], [0, 1]] gives one polyline at constant V- tagged (0, 1)."""
    grid = RegionGrid(row_axis=np.array([0.5, 0.6]), v_minus_axis=np.array([-0.8, -0.6]),
                      cells=np.array([[0, 1], [0, 1]]), payload_kind=PayloadKind.NST_MAP)
    lines = trace_boundary(grid)

    assert len(lines) == 1
    assert lines[0].n_st_pair == (0, 1)
    assert np.allclose(lines[0].points[:, 1], -0.7)
    assert lines[0].points[:, 0].min() == pytest.approx(0.5)
    assert lines[0].points[:, 0].max() == pytest.approx(0.6)


def test_trace_boundary_uniform_grid_is_empty():
    grid = RegionGrid(row_axis=np.array([0.5, 0.6, 0.7]), v_minus_axis=np.array([-0.8, -0.6]),
                      cells=np.ones((3, 2), dtype=int), payload_kind=PayloadKind.NST_MAP)

    assert trace_boundary(grid) == []


def test_trace_boundary_separates_pairs():
    cells = np.array([[2, 1, 0],
                      [2, 1, 0],
                      [2, 2, 1]])
    grid = RegionGrid(row_axis=np.linspace(0.5, 0.7, 3), v_minus_axis=np.linspace(-0.9, -0.5, 3),
                      cells=cells, payload_kind=PayloadKind.NST_MAP)
    pairs = sorted({line.n_st_pair for line in trace_boundary(grid)})

    assert pairs == [(0, 1), (1, 2)]


def test_trace_boundary_needs_nst_map():
    grid = RegionGrid(row_axis=np.array([0.1, 0.2]), v_minus_axis=np.array([-0.8, -0.6]),
                      cells=np.array([[1, 1], [-1, 1]]), payload_kind=PayloadKind.SIGN_MAP)

    with pytest.raises(DomainError):
        trace_boundary(grid)


def test_region_grid_shape_checked():
    with pytest.raises(DomainError):
        RegionGrid(row_axis=np.array([0.5, 0.6]), v_minus_axis=np.array([-0.8]),
                   cells=np.zeros((2, 2), dtype=int), payload_kind=PayloadKind.NST_MAP)


def test_boundary_distance_to_segment():
    line = BoundaryPolyline(points=np.array([[0.0, 0.0], [1.0, 0.0]]), n_st_pair=(0, 1))
    distances = boundary_distance([line], np.array([[0.5, 0.2], [2.0, 0.0], [-3.0, 4.0]]))

    assert distances == pytest.approx([0.2, 1.0, 5.0])


def test_boundary_distance_without_segments():
    assert np.all(np.isinf(boundary_distance([], np.array([[0.5, -0.5]]))))


def test_nst_changes_by_one_along_v_minus():
    """Test no slice at fixed V+ jumps by two stable states between neighbouring V- cells."""
    grid = nst_map(P, D, (0.3, 0.8), (-1.0, -0.3), (11, 40))

    assert np.max(np.abs(np.diff(grid.cells, axis=1))) <= 1
