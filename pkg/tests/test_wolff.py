"""Wolff potential closed forms, quadrature agreement, and the witness
family whose scaled potential blows up along its atom centers."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from potkit.fitting import ApproachPath
from potkit.measures import (
    AtomicMeasure,
    AtomPlusPowerProfile,
    PowerLawProfile,
    RadialProfileMeasure,
)
from potkit.wolff import (
    WolffParams,
    thin_witness_blowup,
    wolff_asymptotic_report,
    wolff_potential,
    wolff_potential_detailed,
)


def _atom_oracle(a, n, p, d, r):
    """Independent quadrature of the single-atom Wolff integrand."""
    val, _ = quad(lambda t: (a / t ** (n - p)) ** (1.0 / (p - 1.0)) / t,
                  d, r, epsabs=1e-14, epsrel=1e-13)
    return val


def test_atom_closed_form_matches_quad_oracle():
    mu = AtomicMeasure([[0.0, 0.0, 0.0]], [2.0])
    got = wolff_potential(mu, WolffParams(2.5, 1.0), [0.25, 0.0, 0.0])
    assert got == pytest.approx(2.7973231434646406, rel=1e-12)
    assert got == pytest.approx(_atom_oracle(2.0, 3, 2.5, 0.25, 1.0),
                                rel=1e-12)


def test_atom_closed_form_p2():
    mu = AtomicMeasure([[0.0, 0.0, 0.0]], [1.0])
    got = wolff_potential(mu, WolffParams(2.0, 0.8), [0.1, 0.0, 0.0])
    assert got == pytest.approx(8.75, rel=1e-13)


def test_atom_closed_form_n4():
    mu = AtomicMeasure([[0.0, 0.0, 0.0, 0.0]], [3.0])
    got = wolff_potential(mu, WolffParams(2.5, 2.0), [0.3, 0.0, 0.0, 0.0])
    assert got == pytest.approx(5.893570831980394, rel=1e-12)


def test_atom_log_case_p_equals_n():
    mu = AtomicMeasure([[0.0, 0.0, 0.0]], [2.0])
    got = wolff_potential(mu, WolffParams(3.0, 1.0), [0.2, 0.0, 0.0])
    assert got == pytest.approx(math.sqrt(2.0) * math.log(5.0), rel=1e-13)


def test_zero_measure_gives_zero():
    mu = AtomicMeasure(np.zeros((0, 3)), [])
    assert wolff_potential(mu, WolffParams(2.5, 1.0), [0.3, 0.0, 0.0]) == 0.0


def test_at_atom_location_diverges():
    mu = AtomicMeasure([[0.0, 0.0, 0.0]], [1.0])
    assert wolff_potential(mu, WolffParams(2.5, 1.0), np.zeros(3)) == math.inf


def test_power_profile_closed_form():
    mu = RadialProfileMeasure(np.zeros(3), PowerLawProfile(1.5, 3.0))
    got = wolff_potential(mu, WolffParams(2.5, 1.0), np.zeros(3))
    assert got == pytest.approx(0.7862224182626691, rel=1e-12)


def test_quadrature_agrees_with_exact_piecewise():
    rng = np.random.default_rng(17)
    pts = rng.normal(size=(6, 3)) * 0.3
    mu = AtomicMeasure(pts, rng.uniform(0.2, 1.5, size=6))
    exact = WolffParams(2.5, 1.0, quadrature="exact-piecewise")
    grid = WolffParams(2.5, 1.0, quadrature="log-grid", points_per_decade=400)
    for _ in range(5):
        x = rng.normal(size=3)
        a = wolff_potential(mu, exact, x)
        b = wolff_potential(mu, grid, x)
        assert b == pytest.approx(a, rel=1e-6)


def test_monotone_in_r():
    mu = AtomicMeasure([[0.0, 0.0, 0.0]], [1.0])
    x = [0.1, 0.0, 0.0]
    w1 = wolff_potential(mu, WolffParams(2.5, 0.5), x)
    w2 = wolff_potential(mu, WolffParams(2.5, 1.0), x)
    assert w1 <= w2


def test_mass_scaling_exponent():
    # c * mu multiplies W by c^(1/(p-1)) exactly
    mu1 = AtomicMeasure([[0.0, 0.0, 0.0]], [1.0])
    mu8 = AtomicMeasure([[0.0, 0.0, 0.0]], [8.0])
    params = WolffParams(2.5, 1.0)
    x = [0.2, 0.0, 0.0]
    w1 = wolff_potential(mu1, params, x)
    w8 = wolff_potential(mu8, params, x)
    assert w8 == pytest.approx(8.0 ** (1.0 / 1.5) * w1, rel=1e-13)


def test_p_near_n_continuity():
    mu = AtomicMeasure([[0.0, 0.0, 0.0]], [1.0])
    x = [0.4, 0.0, 0.0]
    w_near = wolff_potential(mu, WolffParams(3.0 - 1e-3, 1.0), x)
    w_log = wolff_potential(mu, WolffParams(3.0, 1.0), x)
    assert w_near == pytest.approx(w_log, rel=0.01)


def test_piece_breakdown_sums_to_value():
    mu = AtomicMeasure([[0.0, 0.0, 0.0], [0.5, 0.0, 0.0]], [1.0, 2.0])
    detail = wolff_potential_detailed(mu, WolffParams(2.5, 1.0),
                                      [0.1, 0.0, 0.0])
    assert sum(p.value for p in detail.pieces) == pytest.approx(detail.value,
                                                                rel=1e-13)
    los = [p.t_lo for p in detail.pieces]
    assert los == sorted(los)


def test_asymptotic_report_atom_limit():
    # scaled values exceed the limit by exactly the r-correction term
    a, p, n = 2.0, 2.5, 3
    kappa = (n - p) / (p - 1.0)
    mu = AtomicMeasure([np.zeros(n)], [a])
    path = ApproachPath.geometric(np.zeros(n), [1.0, 0.0, 0.0],
                                  r0=0.25, ratio=0.5, count=20)
    rep = wolff_asymptotic_report(mu, WolffParams(p, 1.0), np.zeros(n), path)
    limit = (p - 1.0) / (n - p) * a ** (1.0 / (p - 1.0))
    assert rep.limit == pytest.approx(limit, rel=1e-3)
    # each sample sits below the limit by exactly the r-cap correction
    want = limit * (1.0 - path.radii ** kappa)
    assert np.allclose(rep.values, want, rtol=1e-12)
    assert rep.extras["point_mass_estimate"] == pytest.approx(a, rel=1e-3)


def test_asymptotic_report_log_normalization():
    a, n = 2.0, 3
    mu = AtomicMeasure([np.zeros(n)], [a])
    path = ApproachPath.geometric(np.zeros(n), [1.0, 0.0, 0.0],
                                  r0=0.25, ratio=0.5, count=24)
    rep = wolff_asymptotic_report(mu, WolffParams(float(n), 1.0),
                                  np.zeros(n), path)
    assert rep.limit == pytest.approx(a ** 0.5, rel=5e-3)
    # the cap-normalized alternative is constant in rho for a pure atom
    alt = rep.extras["scaled_cap_normalized"]
    assert np.allclose(alt, a ** 0.5, rtol=1e-12)


def test_asymptotic_report_vanishes_for_diffuse_mass():
    # growth exponent m > n - p forces the scaled values to zero
    mu = RadialProfileMeasure(np.zeros(3), PowerLawProfile(1.0, 3.0))
    path = ApproachPath.geometric(np.zeros(3), [1.0, 0.0, 0.0],
                                  r0=0.25, ratio=0.5, count=16)
    rep = wolff_asymptotic_report(mu, WolffParams(2.5, 1.0), np.zeros(3), path)
    assert abs(rep.limit) < 0.01


def test_witness_masses_summable():
    rep = thin_witness_blowup(2.0 / 0.5, 2.5, n=3, count=20)
    i = np.arange(1, 21, dtype=float)
    want = 2.0 ** (-i * 0.5) * i ** 1.5
    assert np.allclose(rep.masses, want, rtol=1e-13)
    assert rep.measure.total_mass < np.sum(want) + 1e-9


def test_witness_centers_diverge_linearly():
    n, p = 3, 2.5
    rep = thin_witness_blowup(2.0 / (n - p), p, n=n, count=14)
    ramp = (p - 1.0) / (n - p) * rep.indices
    assert rep.centers_diverge
    assert np.all(rep.center_scaled >= 0.9 * ramp)
    assert np.all(np.diff(rep.center_scaled[4:]) > 0.0)


def test_witness_ray_vanishes():
    rep = thin_witness_blowup(2.0 / 0.5, 2.5, n=3, count=14)
    assert rep.ray_vanishes
    assert rep.ray_scaled[-1] <= 0.25 * rep.ray_scaled.max()
    # the escape direction misses every witness ball by construction
    assert abs(np.dot(rep.ray_direction, [1.0, 0.0, 0.0])) < 1.0


def test_witness_invalid_s_rejected():
    with pytest.raises(ValueError):
        thin_witness_blowup(-1.0, 2.5, n=3)


def test_params_validation():
    with pytest.raises(ValueError):
        WolffParams(1.0, 1.0)
    with pytest.raises(ValueError):
        WolffParams(2.5, -1.0)
