"""Ball-mass and total-mass behavior across the three measure kinds."""

import numpy as np
import pytest

from potkit.errors import RepresentationError
from potkit.grid import EvaluationGrid
from potkit.measures import (
    AtomicMeasure,
    AtomPlusPowerProfile,
    GridMeasure,
    PowerLawProfile,
    RadialProfileMeasure,
    SumMeasure,
    TableProfile,
    lebesgue_ball_measure,
    uniform_ball_measure,
)


def test_atom_inside_ball():
    mu = AtomicMeasure([[0.0, 0.0, 0.0]], [3.0])
    assert mu.ball_mass([0.0, 0.0, 0.0], 0.5) == 3.0


def test_atom_outside_ball():
    mu = AtomicMeasure([[0.0, 0.0, 0.0]], [3.0])
    assert mu.ball_mass([1.0, 0.0, 0.0], 0.5) == 0.0


def test_atom_on_sphere_counts_as_inside():
    # closed balls: distance exactly t is included
    mu = AtomicMeasure([[0.5, 0.0, 0.0]], [1.0])
    assert mu.ball_mass([0.0, 0.0, 0.0], 0.5) == 1.0


def test_power_profile_ball_mass():
    mu = RadialProfileMeasure([0.0, 0.0, 0.0], PowerLawProfile(2.0, 1.5))
    assert mu.ball_mass([0.0, 0.0, 0.0], 4.0) == pytest.approx(16.0, rel=1e-14)


def test_total_mass_of_atoms():
    mu = AtomicMeasure([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]], [1.0, 2.0])
    assert mu.total_mass == 3.0


def test_total_mass_uniform_grid_density():
    grid = EvaluationGrid.from_box((0.0, 0.0), (1.0, 1.0), 0.1)
    mu = GridMeasure(grid, np.ones(grid.cell_shape))
    assert mu.total_mass == pytest.approx(1.0, abs=1e-15)


def test_restrict_atoms_drops_outside():
    mu = AtomicMeasure([[0.0, 0.0, 0.0], [3.0, 0.0, 0.0]], [1.0, 2.0])
    inner = mu.restrict([0.0, 0.0, 0.0], 1.0)
    assert inner.total_mass == 1.0
    assert inner.ball_mass([3.0, 0.0, 0.0], 0.1) == 0.0


def test_restrict_grid_half_box():
    grid = EvaluationGrid.from_box((-1.0, -1.0), (1.0, 1.0), 0.05)
    mu = GridMeasure(grid, np.ones(grid.cell_shape))
    # ball covering the left half within a cell layer
    half = mu.restrict([-1.0, 0.0], 1.0)
    area = np.pi / 2.0  # quarter disc of radius 1 inside the box, times 2
    assert half.total_mass == pytest.approx(area, abs=4 * 0.05)


def test_restrict_profile_concentric_truncates():
    mu = RadialProfileMeasure([0.0, 0.0, 0.0], PowerLawProfile(1.0, 2.0))
    inner = mu.restrict([0.0, 0.0, 0.0], 0.5)
    assert inner.ball_mass([0.0, 0.0, 0.0], 0.3) == pytest.approx(0.09)
    assert inner.ball_mass([0.0, 0.0, 0.0], 2.0) == pytest.approx(0.25)


def test_restrict_profile_off_center_rejected():
    mu = RadialProfileMeasure([0.0, 0.0, 0.0], PowerLawProfile(1.0, 2.0))
    with pytest.raises(RepresentationError):
        mu.restrict([0.5, 0.0, 0.0], 0.25)


def test_ball_mass_rejects_nonpositive_radius():
    mu = AtomicMeasure([[0.0, 0.0, 0.0]], [1.0])
    with pytest.raises(ValueError):
        mu.ball_mass([0.0, 0.0, 0.0], 0.0)


def test_ball_mass_monotone_in_radius():
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(12, 3))
    mu = AtomicMeasure(pts, rng.uniform(0.1, 1.0, size=12))
    x = np.zeros(3)
    radii = np.sort(rng.uniform(0.05, 4.0, size=24))
    vals = [mu.ball_mass(x, t) for t in radii]
    assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))


def test_sum_measure_adds_ball_masses():
    rng = np.random.default_rng(11)
    a = AtomicMeasure(rng.normal(size=(5, 3)), rng.uniform(size=5))
    b = RadialProfileMeasure(np.zeros(3), PowerLawProfile(0.7, 2.5))
    s = SumMeasure([a, b])
    for _ in range(10):
        x = rng.normal(size=3)
        t = rng.uniform(0.1, 2.0)
        want = a.ball_mass(x, t) + b.ball_mass(x, t)
        assert s.ball_mass(x, t) == pytest.approx(want, rel=1e-14)


def test_atoms_to_profile_agrees_at_center():
    mu = AtomicMeasure([[0.0, 0.0, 0.0], [0.4, 0.0, 0.0], [0.0, 0.9, 0.0]],
                       [1.0, 2.0, 0.5])
    prof = mu.radial_mass_profile([0.0, 0.0, 0.0])
    pm = RadialProfileMeasure([0.0, 0.0, 0.0], prof)
    for t in (0.1, 0.4, 0.5, 0.9, 1.3):
        assert pm.ball_mass([0.0, 0.0, 0.0], t) == pytest.approx(
            mu.ball_mass([0.0, 0.0, 0.0], t), abs=1e-14)


def test_atom_plus_power_profile():
    mu = RadialProfileMeasure(np.zeros(3), AtomPlusPowerProfile(2.0, 1.0, 3.0))
    assert mu.ball_mass(np.zeros(3), 0.5) == pytest.approx(2.0 + 0.125)
    assert mu.atom_mass_at(np.zeros(3)) == 2.0


def test_table_profile_right_continuous():
    prof = TableProfile(np.array([0.5, 1.0]), np.array([1.0, 3.0]))
    mu = RadialProfileMeasure(np.zeros(2), prof)
    assert mu.ball_mass(np.zeros(2), 0.25) == 0.0
    assert mu.ball_mass(np.zeros(2), 0.5) == 1.0
    assert mu.ball_mass(np.zeros(2), 0.75) == 1.0
    assert mu.ball_mass(np.zeros(2), 2.0) == 3.0


def test_uniform_ball_measure_mass():
    grid = EvaluationGrid.from_box((-1.0,) * 3, (1.0,) * 3, 1.0 / 16.0)
    mu = uniform_ball_measure(grid, np.zeros(3), 0.5)
    vol = 4.0 / 3.0 * np.pi * 0.5 ** 3
    assert mu.total_mass == pytest.approx(vol, rel=0.05)


def test_lebesgue_ball_measure_exact_at_center():
    mu = lebesgue_ball_measure(np.zeros(3), 1.0)
    vol = 4.0 / 3.0 * np.pi
    assert mu.ball_mass(np.zeros(3), 1.0) == pytest.approx(vol, rel=1e-12)
    assert mu.ball_mass(np.zeros(3), 0.5) == pytest.approx(vol / 8.0, rel=1e-12)
    assert mu.ball_mass(np.zeros(3), 7.0) == pytest.approx(vol, rel=1e-12)


def test_grid_ball_mass_counts_cell_centers():
    grid = EvaluationGrid.from_box((0.0, 0.0), (1.0, 1.0), 0.25)
    density = np.zeros(grid.cell_shape)
    density[0, 0] = 16.0  # mass 1 in the cell centered at (0.125, 0.125)
    mu = GridMeasure(grid, density)
    c = np.array([0.125, 0.125])
    assert mu.ball_mass(c, 0.01) == pytest.approx(1.0)
    assert mu.ball_mass(np.zeros(2), 0.1) == 0.0


def test_negative_mass_rejected():
    with pytest.raises(ValueError):
        AtomicMeasure([[0.0, 0.0]], [-1.0])
