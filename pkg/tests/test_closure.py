import math

import numpy as np
import pytest

from polychains.chains import Chain1, boundary1, mass, split_cells, support
from polychains.closure import ClosureParams, close_chain, closure_sequence, project_to_circle
from polychains.errors import PreconditionError
from polychains.generators import circle_chain, koch_chain, random_closed_chain
from polychains.winding import winding_number


def test_project_to_circle():
    p = project_to_circle((1, 1), 0.5, (4, 5))
    assert np.allclose(p, (1 + 0.6, 1 + 0.8))
    with pytest.raises(PreconditionError):
        project_to_circle((0, 0), 1.0, (0, 0))


def test_params_validation():
    with pytest.raises(ValueError):
        ClosureParams((0, 0), 0.0)
    with pytest.raises(ValueError):
        ClosureParams((0, 0), 0.1, j=0)
    with pytest.raises(ValueError):
        ClosureParams((0, 0), 0.1, theta_max=2.0)


def test_closed_polygon_around_z_keeps_winding():
    K = circle_chain((0, 0), 1.0, 16, 1.5)
    z = (0.1, -0.2)
    P, rep = close_chain(K, ClosureParams(z, 0.05, j=3))
    assert len(boundary1(P)) == 0
    assert rep.boundary_mass_after == 0.0
    assert rep.a == pytest.approx(1.5, abs=1e-12)
    assert winding_number(P, z) == pytest.approx(1.5, abs=1e-12)
    assert support(P).distance(z) > 0.05


def test_closed_chain_not_around_z():
    K = circle_chain((3, 0), 1.0, 16)
    P, rep = close_chain(K, ClosureParams((0, 0), 0.1))
    assert rep.a == pytest.approx(0.0, abs=1e-12)
    assert mass(boundary1(P)) == 0.0
    assert winding_number(P, (0, 0)) == pytest.approx(0.0, abs=1e-12)
    assert winding_number(P, (3, 0)) == pytest.approx(1.0, abs=1e-12)


def test_open_segment_closes():
    K = Chain1([(1, 0)], [(0.5, 1)], [2.0])
    z, eps = (0.0, 0.0), 0.1
    P, rep = close_chain(K, ClosureParams(z, eps, j=4))
    assert rep.boundary_mass_before == pytest.approx(4.0)
    assert rep.boundary_mass_after <= 1e-12 * (1 + mass(P))
    assert support(P).distance(z) > eps
    # the loops r_m wind zero times about z; the added polygon carries a
    ring = circle_chain(z, 2 * eps, 64, rep.a)
    assert winding_number(P - ring, z) == pytest.approx(0.0, abs=1e-12)
    assert winding_number(P, z) == pytest.approx(rep.a, abs=1e-12)
    # a is the angle swept by the projected chain over 2 pi, times the weight
    swept = math.atan2(1, 0.5)
    assert rep.a == pytest.approx(2 * swept / (2 * math.pi), abs=1e-12)


def test_chords_respect_theta_max():
    K = Chain1.polyline([(1, 0), (0, 1), (-1, 0.01)])
    theta = math.pi / 8
    P, _ = close_chain(K, ClosureParams((0, 0), 0.1, theta_max=theta, ngon_n=16))
    on = np.isclose(np.hypot(*P.a.T), 0.2) & np.isclose(np.hypot(*P.b.T), 0.2)
    ang = np.abs(np.arctan2(P.a[on, 0] * P.b[on, 1] - P.a[on, 1] * P.b[on, 0],
                            np.einsum("ij,ij->i", P.a[on], P.b[on])))
    assert np.all(ang <= theta + 1e-12)


def test_cone_mass_bound_and_slope(rng):
    # cone mass is at most 2R times the boundary mass of the split input
    ratios = []
    for _ in range(20):
        pts = rng.uniform(-1, 1, (4, 2)) + np.array([2.0, 0.0])
        K = Chain1.polyline(pts, rng.uniform(0.5, 2.0))
        P, rep = close_chain(K, ClosureParams((0, 0), 0.05, j=2))
        assert rep.cone_mass <= rep.bound_2R_times_boundary + 1e-12
        ratios.append(rep.cone_mass / rep.boundary_mass_before)
    assert max(ratios) <= 2 * 3.5


def test_too_close_raises():
    K = circle_chain((0, 0), 1.0, 8)
    with pytest.raises(PreconditionError) as exc:
        close_chain(K, ClosureParams((0.95, 0), 0.1))
    assert exc.value.name == "dist_z_support"


def test_zero_chain():
    P, rep = close_chain(Chain1(), ClosureParams((0, 0), 0.1))
    assert len(P) == 0 and rep.a == 0.0


def test_split_matches_subdivision_index():
    K = Chain1([(1, 0)], [(3, 0)], [1.0])
    P, rep = close_chain(K, ClosureParams((0, 0), 0.1, j=5))
    assert rep.boundary_mass_before == pytest.approx(mass(boundary1(split_cells(K, 0.2))))
    assert rep.radius == pytest.approx(3.0)


def test_report_dict_keys():
    _, rep = close_chain(circle_chain((0, 0), 1.0, 8), ClosureParams((0, 0), 0.1))
    d = rep.to_dict()
    for k in ("a", "boundary_mass_before", "boundary_mass_after", "cone_mass",
              "bound_2R_times_boundary", "min_dist_to_z"):
        assert k in d


def test_sequence_of_koch_prefixes():
    z = (0.5, math.sqrt(3) / 6)
    seq = closure_sequence([koch_chain(L) for L in range(4)], ClosureParams(z, 0.02))
    assert len(seq.chains) == 4 and len(seq.cauchy_differences) == 3
    for P, I in zip(seq.chains, seq.integrals):
        assert mass(boundary1(P)) == 0.0
        assert I == pytest.approx(2j * math.pi, abs=1e-9)
    assert max(seq.cauchy_differences) <= 1e-9


def test_sequence_reports_failing_element():
    K = circle_chain((0, 0), 1.0, 8)
    with pytest.raises(PreconditionError, match="sequence element 1"):
        closure_sequence([circle_chain((3, 0), 1.0, 8), K], ClosureParams((0.9, 0), 0.1))


def test_random_closed_chains_preserve_winding(rng):
    for seed in range(5):
        J, _ = random_closed_chain(seed, 4)
        z = rng.uniform(-1, 1, 2)
        d = support(J).distance(z)
        P, rep = close_chain(J, ClosureParams(tuple(z), d / 5, j=3))
        assert mass(boundary1(P)) <= 1e-12 * (1 + mass(P))
        assert winding_number(P, z) == pytest.approx(winding_number(J, z).real, abs=1e-9)


def test_empty_sequence():
    seq = closure_sequence([], ClosureParams((0, 0), 0.1))
    assert seq.chains == [] and seq.cauchy_differences == []


def test_cone_mass_decays_linearly_with_boundary_mass():
    # K_j = closed polygon + an open segment of weight 1/j
    base = circle_chain((0, 0), 1.0, 16)
    seq = [base + Chain1([(2, 0)], [(2, 1)], [1.0 / j]) for j in (1, 2, 4, 8)]
    out = closure_sequence(seq, ClosureParams((0.1, 0), 0.05))
    bm = np.array([r.boundary_mass_before for r in out.reports])
    cm = np.array([r.cone_mass for r in out.reports])
    slope_b = np.polyfit(np.log(bm), np.log(cm), 1)[0]
    assert slope_b == pytest.approx(1.0, abs=1e-9)
    for r in out.reports:
        assert r.cone_mass <= r.bound_2R_times_boundary


@pytest.mark.parametrize("spec", ["exp", "sin", "poly:1,0,-2,1j", "one_over_z_minus:0.1"])
def test_idempotent_on_closed_avoiding_input(spec):
    from polychains.forms import integrate_form, parse_function

    K = circle_chain((0, 0), 1.0, 64)
    P, rep = close_chain(K, ClosureParams((0.1, 0), 0.05, ngon_n=64))
    assert rep.a == pytest.approx(1.0, abs=1e-12)
    f = parse_function(spec)
    assert integrate_form(P, f) == pytest.approx(integrate_form(K, f), abs=1e-9)


def test_sub_tolerance_segment_closes():
    # its two radials cancel at the merge tolerance, so the cell must vanish too
    K = Chain1([(0, 0)], [(1e-20, 0)], [1.0])
    P, rep = close_chain(K, ClosureParams((1, 0), 0.2, j=1))
    assert len(P) == 0 and rep.boundary_mass_after == 0.0
