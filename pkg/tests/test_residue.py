import cmath
import json
import math

import numpy as np
import pytest

from polychains.chains import Chain1, Chain2
from polychains.errors import NotClosedError, PreconditionError, SingularityError
from polychains.forms import HoloFn, exp, one_over_z_minus, poly, rational
from polychains.generators import circle_chain, random_closed_chain
from polychains.residue import (
    default_radii,
    numeric_residue,
    verify_cif,
    verify_cit,
    verify_density_winding,
    verify_residue,
)

GON = circle_chain((0, 0), 1.0, 64)


def test_cit_polygon_exp():
    rep = verify_cit(GON, exp())
    assert rep.passed and rep.gap <= 1e-10
    assert rep.theorem == "CIT"


def test_cit_random_cubic():
    J, K0 = random_closed_chain(2, 6)
    rep = verify_cit(J, poly([0, -2, 0, 1]), K=K0)
    assert rep.passed
    assert rep.precondition("bounding_chain").ok


def test_cit_detects_hypothesis_violation():
    rep = verify_cit(GON, one_over_z_minus(0))
    assert not rep.passed
    assert rep.lhs == pytest.approx(2j * math.pi, abs=1e-12)
    assert not rep.precondition("no_singularity_in_hull").ok
    assert not rep.precondition("zero_winding_at_singularities").ok


def test_global_cit_on_annulus():
    # boundary of an annulus, pole outside the hull: the local theorem applies
    outer = circle_chain((0, 0), 2.0, 48)
    inner = circle_chain((0, 0), 1.0, 48, -1.0)
    J = outer + inner
    rep = verify_cit(J, one_over_z_minus(3.0))
    assert rep.passed and rep.theorem == "CIT"
    # two loops either side of the pole: the pole is in the hull but Ind = 0 there
    rep = verify_cit(circle_chain((1.5, 0), 0.3, 24) + circle_chain((-1.5, 0), 0.3, 24), one_over_z_minus(0))
    assert rep.passed
    assert rep.theorem == "global-CIT"
    assert not rep.precondition("no_singularity_in_hull").ok
    assert rep.precondition("zero_winding_at_singularities").ok


def test_cit_open_chain_raises():
    with pytest.raises(NotClosedError) as exc:
        verify_cit(Chain1([(0, 0)], [(1, 0)], [1.0]), exp())
    assert exc.value.measured == pytest.approx(2.0)


def test_cif_oracle():
    z = 0.3
    rep = verify_cif(GON, exp(), z)
    assert rep.gap <= 1e-8
    assert rep.lhs == pytest.approx(cmath.exp(0.3), abs=1e-12)


def test_cif_linearity():
    big = GON * 2.0
    a, b = verify_cif(GON, exp(), 0.3), verify_cif(big, exp(), 0.3)
    assert b.lhs == pytest.approx(2 * a.lhs, abs=1e-12)
    assert b.rhs == pytest.approx(2 * a.rhs, abs=1e-10)
    assert b.gap <= 1e-8


def test_cif_outside_is_zero():
    rep = verify_cif(GON, exp(), (3, 1))
    assert abs(rep.lhs) <= 1e-15 and abs(rep.rhs) <= 1e-12


def test_cif_z_on_support():
    with pytest.raises(PreconditionError):
        verify_cif(GON, exp(), (1, 0))


def test_residue_one_over_z():
    J = circle_chain((0, 0), 2.0, 64)
    rep = verify_residue(J, one_over_z_minus(0))
    assert rep.lhs == pytest.approx(2j * math.pi, abs=1e-8)
    assert rep.rhs == pytest.approx(2j * math.pi, abs=1e-8)
    assert rep.passed


def test_residue_partial_fractions():
    f = rational([1], [0, 1])
    rep = verify_residue(circle_chain((0.5, 0), 2.0, 64), f)
    assert abs(rep.lhs) <= 1e-8
    contrib = [t["contribution"] for t in rep.terms]
    assert contrib[0] == pytest.approx(-2j * math.pi, abs=1e-8)
    assert contrib[1] == pytest.approx(2j * math.pi, abs=1e-8)


def test_residue_non_integer_winding():
    rep = verify_residue(GON * 2.5, one_over_z_minus(0))
    assert rep.lhs == pytest.approx(2.5 * 2j * math.pi, abs=1e-8)
    assert rep.terms[0]["winding"] == pytest.approx(2.5, abs=1e-12)


def test_residue_pole_outside():
    rep = verify_residue(GON, rational([1], [0, 5]))
    assert rep.passed
    assert rep.terms[1]["winding"] == pytest.approx(0, abs=1e-12)


def test_residue_overlap_and_collision_errors():
    f = rational([1], [0, 0.1])
    with pytest.raises(PreconditionError, match="singularities 0 .* and 1"):
        verify_residue(GON, f, radii=[0.1, 0.1])
    with pytest.raises(SingularityError, match="singularity 0"):
        verify_residue(circle_chain((0, 0), 0.5, 64), one_over_z_minus(0), radii=[0.6])


def test_default_radii():
    r = default_radii(GON, [0j, 0.3 + 0j])
    assert r[0] == pytest.approx(0.1)
    assert r[1] == pytest.approx(0.1)


@pytest.mark.parametrize(
    "f,expected,tol",
    [
        (one_over_z_minus(0), 1.0, 1e-9),
        (rational([1], [0], [2]), 0.0, 1e-9),
        (HoloFn(lambda z: np.exp(z) / z, (0j,)), 1.0, 1e-8),
        (HoloFn(lambda z: np.cos(z) / z**3, (0j,)), -0.5, 1e-8),
    ],
)
def test_numeric_residue(f, expected, tol):
    assert numeric_residue(f, 0, 0.5) == pytest.approx(expected, abs=tol)


def test_numeric_residue_radius_independence():
    f = HoloFn(lambda z: np.exp(z) / (z * (z - 2)), (0j, 2 + 0j))
    assert numeric_residue(f, 0, 0.4) == pytest.approx(numeric_residue(f, 0, 0.2), abs=1e-9)
    assert numeric_residue(f, 0, 0.4) == pytest.approx(-0.5, abs=1e-9)


def test_numeric_residue_second_singularity():
    with pytest.raises(PreconditionError):
        numeric_residue(rational([1], [0, 0.5]), 0, 0.3)


@pytest.mark.parametrize("verify", ["cit", "cif", "residue"])
def test_zero_chain_passes(verify):
    J = Chain1()
    if verify == "cit":
        rep = verify_cit(J, one_over_z_minus(0))
    elif verify == "cif":
        rep = verify_cif(J, exp(), 0)
    else:
        rep = verify_residue(J, one_over_z_minus(0))
    assert rep.passed
    assert rep.lhs == 0 and rep.rhs == 0


def test_density_winding_report():
    rep = verify_density_winding(GON, (0.2, 0.1))
    assert rep.passed
    assert rep.lhs.real == pytest.approx(1.0, abs=1e-6)


def test_report_schema():
    d = json.loads(verify_residue(GON, one_over_z_minus(0)).to_json())
    assert set(d) == {"theorem", "lhs", "rhs", "gap", "threshold", "pass", "terms", "preconditions"}
    assert len(d["lhs"]) == 2 and len(d["rhs"]) == 2
    for p in d["preconditions"]:
        assert set(p) == {"name", "ok", "measured"}


def test_explicit_bounding_chain_mismatch_flagged():
    J, _ = random_closed_chain(1, 3)
    wrong = Chain2.fan([(0, 0), (1, 0), (1, 1)])
    rep = verify_cit(J, exp(), K=wrong)
    assert not rep.precondition("bounding_chain").ok
