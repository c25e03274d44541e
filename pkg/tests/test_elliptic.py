import cmath

import numpy as np
import pytest
from hypothesis import given, strategies as st

from newton_graphs.elliptic import (
    Lattice,
    ZeroPoleData,
    canonical,
    critical_points,
    log_derivative,
    random_data,
    scalar_evaluator,
    sigma,
    wp,
    zeta,
)
from newton_graphs.errors import (
    ConstraintUnsatisfiable,
    DegenerateFunction,
    InvalidLattice,
    PoleAtLattice,
    TooCloseToSingularity,
    ZeroPoleCollision,
)
from newton_graphs.flow import velocity

from conftest import TAU

LATTICES = [Lattice.from_tau(TAU), Lattice.from_tau(1.2j), Lattice(2.0, 0.7 + 1.5j)]
rng = np.random.default_rng(7)
SAMPLES = (rng.uniform(-0.9, 0.9, 10) + 1j * rng.uniform(-0.9, 0.9, 10))


def eisenstein(lat, k, n=300):
    """Lattice sum of w^-k over a large square of lattice points."""
    m = np.arange(-n, n + 1)
    M, N = np.meshgrid(m, m)
    w = (M * lat.omega1 + N * lat.omega2).ravel()
    w = w[w != 0]
    return np.sum(w ** (-k))


def cell_points(lat, k, seed=0, margin=0.05):
    r = np.random.default_rng(seed)
    s, t = r.uniform(margin, 1 - margin, (2, k))
    return s * lat.omega1 + t * lat.omega2


# -- sigma, zeta, wp -------------------------------------------------------------

def test_invalid_lattice():
    with pytest.raises(InvalidLattice):
        Lattice(1.0, -1j)


@pytest.mark.parametrize("lat", LATTICES)
def test_sigma_odd_and_zero(lat):
    assert sigma(0, lat) == 0
    np.testing.assert_allclose(sigma(-SAMPLES, lat), -sigma(SAMPLES, lat), rtol=1e-12)


@pytest.mark.parametrize("lat", LATTICES)
def test_sigma_quasi_periodic(lat):
    for w, eta in ((lat.omega1, lat.eta1), (lat.omega2, lat.eta2)):
        lhs = sigma(SAMPLES + w, lat)
        rhs = -sigma(SAMPLES, lat) * np.exp(eta * (SAMPLES + w / 2))
        np.testing.assert_allclose(lhs, rhs, rtol=1e-10)


def test_sigma_leading_term(lattice):
    z = 1e-3 * (1 + 1j)
    assert abs(sigma(z, lattice) / z - 1) < 1e-5


@pytest.mark.parametrize("lat", LATTICES)
def test_zeta_odd_and_quasi_periods(lat):
    np.testing.assert_allclose(zeta(-SAMPLES, lat), -zeta(SAMPLES, lat), rtol=1e-12)
    for w, eta in ((lat.omega1, lat.eta1), (lat.omega2, lat.eta2)):
        np.testing.assert_allclose(zeta(SAMPLES + w, lat) - zeta(SAMPLES, lat), eta, atol=1e-10)


@pytest.mark.parametrize("lat", LATTICES)
def test_legendre_relation(lat):
    # eta1*omega2 - eta2*omega1 = 2*pi*i with full periods
    assert abs(lat.eta1 * lat.omega2 - lat.eta2 * lat.omega1 - 2j * np.pi) < 1e-10
    assert lat.legendre_residual() < 1e-10


def test_eta_from_half_period(lattice):
    assert abs(lattice.eta1 - 2 * zeta(lattice.omega1 / 2, lattice)) < 1e-12
    assert abs(lattice.eta2 - 2 * zeta(lattice.omega2 / 2, lattice)) < 1e-12


def test_zeta_pole():
    with pytest.raises(PoleAtLattice):
        zeta(LATTICES[0].omega2, LATTICES[0])


@pytest.mark.parametrize("lat", LATTICES)
def test_derivatives_by_finite_differences(lat):
    h = 1e-5
    z = SAMPLES
    fd_sigma = (sigma(z + h, lat) - sigma(z - h, lat)) / (2 * h)
    np.testing.assert_allclose(fd_sigma / sigma(z, lat), zeta(z, lat), rtol=1e-6)
    fd_zeta = (zeta(z + h, lat) - zeta(z - h, lat)) / (2 * h)
    np.testing.assert_allclose(-fd_zeta, wp(z, lat), rtol=1e-6)


@pytest.mark.parametrize("lat", LATTICES[:2])
def test_wp_differential_equation(lat):
    # independent oracle: invariants from direct lattice sums
    g2 = 60 * eisenstein(lat, 4)
    g3 = 140 * eisenstein(lat, 6)
    z = SAMPLES[:5] * 0.5 + 0.3
    p = wp(z, lat)
    h = 1e-5
    dp = (wp(z + h, lat) - wp(z - h, lat)) / (2 * h)
    np.testing.assert_allclose(dp**2, 4 * p**3 - g2 * p - g3, rtol=1e-3)


# -- canonical ----------------------------------------------------------------------

def test_canonical_periodic(f2, lattice):
    z = cell_points(lattice, 20)
    assert f2.periodicity_residual(z) <= 1e-8
    assert lattice.congruent(sum(f2.zeros), sum(f2.sigma_poles))


def test_zero_pole_collision(lattice):
    with pytest.raises(ZeroPoleCollision):
        canonical(ZeroPoleData((0.5, 0.2), (0.5, None)), lattice)
    with pytest.raises(ZeroPoleCollision):
        canonical(ZeroPoleData((0.5, 0.2), (1.5 + TAU, None)), lattice)


def test_closing_point_collision(lattice):
    # closing point 0.25 + 0.5 - 0.5 = 0.25 is a zero
    with pytest.raises(ConstraintUnsatisfiable):
        canonical(ZeroPoleData((0.25, 0.5), (0.5, None)), lattice)


def test_explicit_last_pole_must_close(lattice):
    with pytest.raises(ConstraintUnsatisfiable):
        canonical(ZeroPoleData((0.25, 0.5), (0.1, 0.3)), lattice)
    f = canonical(ZeroPoleData((0.25, 0.5), (0.1, 0.65 + TAU)), lattice)
    assert f.order == 2


def test_scale_does_not_change_raw_newton_field(f2, lattice):
    z = cell_points(lattice, 50, seed=3)
    g = f2.rescaled(5)
    d = np.abs(velocity(g, z, desingularized=False) - velocity(f2, z, desingularized=False))
    assert d.max() <= 1e-12


# -- log derivative ---------------------------------------------------------------

def test_log_derivative_finite_differences(f2, lattice):
    z = cell_points(lattice, 50, seed=11)
    h = 1e-6
    fd = (f2(z + h) - f2(z - h)) / (2 * h) / f2(z)
    ld = log_derivative(f2, z)
    assert np.max(np.abs(fd - ld) / np.abs(ld)) < 1e-6


def test_log_derivative_reciprocal(f2, lattice):
    z = cell_points(lattice, 20, seed=5)
    np.testing.assert_allclose(log_derivative(f2.reciprocal(), z), -log_derivative(f2, z), rtol=1e-12)


def contour(fun, center, radius, n=400):
    t = 2 * np.pi * np.arange(n) / n
    z = center + radius * np.exp(1j * t)
    dz = 1j * radius * np.exp(1j * t) * (2 * np.pi / n)
    return np.sum(fun(z) * dz)


def test_residue_at_zero(f2):
    for a in f2.zeros:
        assert abs(contour(lambda z: log_derivative(f2, z), a, 1e-2) - 2j * np.pi) < 1e-4
    for b in f2.sigma_poles:
        assert abs(contour(lambda z: log_derivative(f2, z), b, 1e-2) + 2j * np.pi) < 1e-4


def test_argument_principle_on_cell(f2, lattice):
    w1, w2 = lattice.omega1, lattice.omega2
    base = 0.013 + 0.017j  # offset the cell so no singularity sits on its boundary
    corners = [base, base + w1, base + w1 + w2, base + w2, base]
    n = 4000
    total = 0j
    for a, b in zip(corners, corners[1:]):
        t = (np.arange(n) + 0.5) / n
        total += np.sum(log_derivative(f2, a + t * (b - a))) * (b - a) / n
    assert abs(total) < 1e-3


def test_too_close(f2):
    with pytest.raises(TooCloseToSingularity):
        log_derivative(f2, f2.zeros[0] + 1e-12)


def test_large_modulus_near_pole(f2):
    assert abs(f2(f2.poles[0] + 1e-9)) > 1e8


def test_scalar_evaluator_matches(f2, lattice):
    ev = scalar_evaluator(f2)
    for z in cell_points(lattice, 30, seed=9) + 3 * lattice.omega1 - 2 * lattice.omega2:
        logf, L = ev(complex(z))
        assert abs(cmath.exp(logf) - f2(z)) <= 1e-10 * abs(f2(z))
        assert abs(L - complex(f2.logderiv(z))) <= 1e-10 * abs(L)


# -- critical points ---------------------------------------------------------------

def test_four_critical_points(f2):
    cs = critical_points(f2)
    assert len(cs.points) == 4
    for c in cs.points:
        assert abs(log_derivative(f2, c)) < 1e-9


def test_critical_points_continuity(f2, lattice):
    base = critical_points(f2).points
    moved = canonical(ZeroPoleData((0.25 + 1e-3, f2.zeros[1]), (0.5, None)), lattice)
    new = critical_points(moved).points
    for c in base:
        d = min(lattice.torus_distance(c, x) for x in new)
        assert d <= 10 * 1e-3


def test_critical_points_lattice_translation(f2, lattice):
    base = critical_points(f2).points
    w = 2 * lattice.omega1 - lattice.omega2
    shifted = canonical(ZeroPoleData(tuple(a + w for a in f2.zeros),
                                     (f2.sigma_poles[0] + w, None)), lattice)
    new = critical_points(shifted).points
    for c in base:
        assert min(lattice.torus_distance(c, x) for x in new) < 1e-8


@pytest.mark.parametrize("order", [2, 3])
def test_random_functions_have_2r_critical_points(order, lattice):
    for seed in range(2):
        f = canonical(random_data(order, lattice, seed), lattice)
        assert len(critical_points(f).points) == 2 * order


def test_degenerate_double_zero(lattice):
    # a double zero leaves only 3 simple critical points away from the singularities
    f = canonical(ZeroPoleData((0.25, 0.25 + 1e-12), (0.5 + 0.4 * TAU, None)), lattice)
    with pytest.raises(DegenerateFunction):
        critical_points(f, density=10)


@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_periodicity_property(s, t):
    lat = LATTICES[0]
    f = canonical(ZeroPoleData((0.25, 0.5 + 0.75 * TAU), (0.5, None)), lat, n_check=4)
    z = s * lat.omega1 + t * lat.omega2
    assert f.periodicity_residual(np.array([z])) <= 1e-8
