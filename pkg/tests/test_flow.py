import math

import numpy as np
import pytest

from newton_graphs.corpus import g2
from newton_graphs.elliptic import Lattice, canonical, random_data
from newton_graphs.errors import SaddleConnection
from newton_graphs.flow import (
    NEWTON,
    REVERSED,
    ROTATED,
    Equilibrium,
    FlowField,
    classify_equilibria,
    extract,
    extract_graphs,
    field,
    integrate,
    newton_roundtrip,
    normalized,
    trace_separatrices,
    velocity,
)
from newton_graphs.io import function_from_spec
from newton_graphs.newton_props import e_property, is_newton_graph
from newton_graphs.torus_graph import dual, equivalence_senses, equivalent, faces

from conftest import load


def newton_formula(fv, dfv):
    return -abs(dfv) ** 2 * fv / dfv / (1 + abs(fv) ** 4)


def cell_points(lat, k, seed=0):
    r = np.random.default_rng(seed)
    s, t = r.uniform(0.05, 0.95, (2, k))
    return s * lat.omega1 + t * lat.omega2


@pytest.fixture(scope="session")
def portrait(f2):
    return trace_separatrices(f2, record=True)


@pytest.fixture(scope="session")
def graphs(portrait):
    return extract_graphs(portrait)


@pytest.fixture(scope="session")
def f3(lattice):
    return canonical(random_data(3, lattice, seed=1), lattice)


# -- field ------------------------------------------------------------------------

def test_formula_value_at_unit_point():
    assert newton_formula(1, 1) == -0.5


def test_velocity_matches_formula(f2, lattice):
    h = 1e-6
    for z in cell_points(lattice, 30, seed=1):
        fv = f2(z)
        dfv = (f2(z + h) - f2(z - h)) / (2 * h)
        assert abs(field(f2, NEWTON, z) - newton_formula(fv, dfv)) <= 1e-6 * (1 + abs(newton_formula(fv, dfv)))


def test_velocity_after_rescaling_to_unit_value(f2, lattice):
    z = cell_points(lattice, 1, seed=4)[0]
    g = f2.rescaled(1 / f2(z))
    L = complex(g.logderiv(z))
    assert abs(g(z) - 1) < 1e-12
    assert abs(field(g, NEWTON, z) - (-0.5 * abs(L) ** 2 / L)) < 1e-12 * abs(L)


def test_reciprocal_reverses_field(f2, lattice):
    z = cell_points(lattice, 40, seed=2)
    a = velocity(f2.reciprocal(), z)
    b = velocity(f2, z)
    assert np.max(np.abs(a + b)) <= 1e-12 * max(1.0, np.max(np.abs(b)))
    rev = FlowField(f2, sign=REVERSED)(z)
    np.testing.assert_allclose(rev, a, atol=1e-12)


def test_rotated_is_i_times_newton(f2, lattice):
    z = cell_points(lattice, 40, seed=3)
    np.testing.assert_allclose(field(f2, ROTATED, z), 1j * field(f2, NEWTON, z), atol=1e-15)


def test_rest_points_have_zero_velocity(f2):
    for p in f2.zeros + f2.sigma_poles:
        assert field(f2, NEWTON, p) == 0


def test_raw_field_scale_invariant(f2, lattice):
    z = cell_points(lattice, 50, seed=5)
    for lam in (5, 1e-3, 2 - 7j):
        d = velocity(f2.rescaled(lam), z, desingularized=False) - velocity(f2, z, desingularized=False)
        assert np.max(np.abs(d)) <= 1e-12


# -- integration ------------------------------------------------------------------

def test_start_on_equilibrium(f2):
    eq = [Equilibrium("a1", "zero", f2.zeros[0])]
    tr = integrate(FlowField(f2), f2.zeros[0], 10, equilibria=eq)
    assert len(tr.samples) == 1 and tr.terminal == "a1"


def test_converges_to_nearby_zero(f2):
    eq = [Equilibrium(f"a{i}", "zero", a) for i, a in enumerate(f2.zeros)]
    g = normalized(f2)
    tr = integrate(FlowField(g), f2.zeros[1] + 0.05 + 0.03j, 1e4, equilibria=eq,
                   capture_radius=1e-6)
    assert tr.terminal == "a1"
    m = np.asarray(tr.abs_f)
    assert np.all(np.diff(m) < 0)
    assert tr.arg_drift() <= 1e-6


def test_rotated_keeps_modulus(f2, lattice):
    g = normalized(f2)
    for z in cell_points(lattice, 5, seed=6):
        tr = integrate(FlowField(g, ROTATED), z, 10)
        assert tr.abs_drift() <= 1e-8


def test_rotated_phase_turns_with_raw_time(f2, lattice):
    # along the raw rotated flow f(z(s)) * exp(i s) is constant
    g = normalized(f2)
    z = cell_points(lattice, 1, seed=8)[0]
    tr = integrate(FlowField(g, ROTATED), z, 10)
    vals = [m * np.exp(1j * (a + s)) for m, a, s in zip(tr.abs_f, tr.arg_f, tr.raw_times)]
    assert max(abs(v / vals[0] - 1) for v in vals) <= 1e-7


# -- equilibria -------------------------------------------------------------------

def test_classification_counts(f2):
    eq = classify_equilibria(f2)
    assert (len(eq.attractors), len(eq.repellors), len(eq.saddles)) == (2, 2, 4)
    for fr in eq.frames:
        assert fr.eigvals[0] < 0 < fr.eigvals[1]
        assert fr.orthogonality_error <= 1e-3
    assert all(s.anisotropy <= 1e-3 for s in eq.stars)


def test_reciprocal_swaps_labels(f2, lattice):
    a = classify_equilibria(f2)
    b = classify_equilibria(f2.reciprocal())
    assert [e.point for e in a.attractors] == [e.point for e in b.repellors]
    assert [e.point for e in a.repellors] == [e.point for e in b.attractors]
    for s, t in zip(a.saddles, b.saddles):
        assert lattice.torus_distance(s.point, t.point) < 1e-9


# -- separatrices and graphs ------------------------------------------------------

def test_leg_counts(portrait):
    assert len(portrait.unstable) == 8 and len(portrait.stable) == 8
    assert len(portrait.edges_unstable) == 4 and len(portrait.edges_stable) == 4
    zeros = {e.id for e in portrait.equilibria.attractors}
    poles = {e.id for e in portrait.equilibria.repellors}
    assert all(leg.target in zeros for leg in portrait.unstable)
    assert all(leg.target in poles for leg in portrait.stable)


def test_arrival_angles_separated(portrait):
    for legs in (portrait.unstable, portrait.stable):
        at = {}
        for leg in legs:
            at.setdefault(leg.target, []).append(leg.arrival_angle)
        for angs in at.values():
            angs = sorted(angs)
            gaps = [(b - a) % (2 * math.pi) for a, b in zip(angs, angs[1:] + angs[:1])]
            assert min(gaps) > 1e-4


def test_rectangular_saddle_connection():
    with pytest.raises(SaddleConnection):
        trace_separatrices(function_from_spec(load("rect.json")), rotated=False)


def test_zero_graph_is_g2(graphs):
    G = graphs.primal
    assert (G.n_vertices, G.n_edges, G.n_faces) == (2, 4, 2)
    assert not G.has_loops()
    assert equivalent(G, g2()) is not None


def test_pole_graph_is_dual(graphs):
    w = equivalent(graphs.dual, dual(graphs.primal), "preserving")
    assert w is not None


def test_zero_graph_faces_are_euler_trails(graphs):
    for w in faces(graphs.primal):
        assert len(set(w.edges)) == len(w.edges)
    assert e_property(graphs.primal).holds


def test_rotated_separatrices_return_to_their_saddle(portrait, graphs):
    # unequal critical moduli put every saddle on its own level curve, so each
    # rotated separatrix closes up at the saddle it left and no connected
    # saddle graph can be formed
    spread = graphs.diagnostics()["critical_log_modulus_spread"]
    assert spread > 1e-3
    assert len(portrait.rotated) == 8
    assert all(leg.target == leg.saddle for leg in portrait.rotated)
    assert graphs.level is None and graphs.level_error is not None


def test_extraction_is_scale_invariant(f2, graphs):
    other = extract(f2.rescaled(5 - 2j), rotated=False)
    assert other.primal == graphs.primal
    assert other.dual == graphs.dual


def test_reciprocal_swaps_graphs(f2, graphs):
    inv = extract(f2.reciprocal(), rotated=False)
    assert "preserving" in equivalence_senses(inv.primal, graphs.dual)
    assert "preserving" in equivalence_senses(inv.dual, graphs.primal)


def test_roundtrip_order2(f2):
    rep = newton_roundtrip(f2, g2())
    assert rep.is_newton and rep.dual_matches
    assert rep.reference_witness is not None
    assert rep.self_dual.degree_test and rep.self_dual.direct_test
    assert rep.primal_report.angles.margin >= 1e-6


@pytest.mark.slow
def test_roundtrip_order3(f3):
    rep = newton_roundtrip(f3)
    assert rep.is_newton and rep.dual_matches
    G = rep.graphs.primal
    assert (G.n_vertices, G.n_edges, G.n_faces) == (3, 6, 3)
    assert is_newton_graph(rep.graphs.dual).is_newton


def test_diagnostics(graphs):
    d = graphs.diagnostics()
    assert d["n_legs"] == 16
    assert d["min_saddle_distance"] > 1e-5
    assert d["max_orthogonality_error"] <= 1e-3


def test_other_lattice():
    lat = Lattice(1.0, 0.2 + 0.9j)
    f = canonical(random_data(2, lat, seed=3), lat)
    assert equivalent(extract(f, rotated=False).primal, g2()) is not None
