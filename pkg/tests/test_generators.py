import math

import numpy as np
import pytest

from polychains.chains import boundary1, is_closed, mass
from polychains.density import signed_density
from polychains.errors import ChainError
from polychains.generators import (
    PRNG_NAME,
    _Uniform,
    circle_chain,
    constant_field,
    koch_chain,
    random_closed_chain,
    rotation_field,
    staircase_chain,
    vector_field_chain,
)
from polychains.io import dumps, loads
from polychains.winding import point_in_polygon, winding_number


def test_square_circle_mass():
    J = circle_chain((0, 0), 1.0, 4, -2.0)
    assert mass(J) == pytest.approx(2 * 4 * math.sqrt(2), abs=1e-14)
    assert np.allclose(J.a[0], (1, 0))
    assert len(boundary1(J)) == 0


@pytest.mark.parametrize("n", [3, 5, 64, 1000])
def test_circle_mass_closed_form(n):
    r, w = 0.7, 1.5
    J = circle_chain((0.3, -0.1), r, n, w)
    assert mass(J) == pytest.approx(w * n * 2 * r * math.sin(math.pi / n), rel=1e-13)
    assert winding_number(J, (0.3, -0.1)) == pytest.approx(w, abs=1e-12)


def test_circle_rejects_bad_args():
    with pytest.raises(ChainError):
        circle_chain(n=2)
    with pytest.raises(ChainError):
        circle_chain(r=0)


@pytest.mark.parametrize("level", range(6))
def test_koch_perimeter(level):
    J = koch_chain(level)
    assert len(J) == 3 * 4**level
    assert mass(J) == pytest.approx(3 * (4 / 3) ** level, rel=1e-12)
    assert is_closed(J)


def test_koch_level_range():
    with pytest.raises(ChainError):
        koch_chain(9)
    with pytest.raises(ChainError):
        koch_chain(-1)


def test_koch_bumps_point_outward():
    # outward bumps enlarge the enclosed area: 2 sqrt(3)/5 in the limit, sqrt(3)/4 at level 0
    areas = []
    for L in range(4):
        p = koch_chain(L).a
        x, y = p.T
        areas.append(0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
    assert areas[0] == pytest.approx(math.sqrt(3) / 4)
    assert all(a < b for a, b in zip(areas, areas[1:]))
    assert areas[-1] < 2 * math.sqrt(3) / 5


def test_staircase_one_is_unit_square():
    J = staircase_chain(1)
    assert {tuple(p) for p in J.a} == {(0, 0), (1, 0), (1, 1), (0, 1)}


@pytest.mark.parametrize("steps", [1, 2, 7, 64])
def test_staircase_corners_and_probe(steps):
    J = staircase_chain(steps)
    assert len(J) == 4 * steps
    assert is_closed(J)
    probe = (0.5, 0.5 / steps)
    assert point_in_polygon(J.a, probe)
    assert winding_number(J, probe) == pytest.approx(1.0, abs=1e-12)


def test_uniform_stream_is_top_53_bits_of_pcg64():
    raw = np.random.PCG64(99).random_raw(4)
    expected = [(int(x) >> 11) / 2**53 for x in raw]
    assert list(_Uniform(99)(4)) == expected
    assert PRNG_NAME == "pcg64-xslrr-top53/v1"


def test_random_chain_frozen_value():
    # first triangle of seed 0, drawn with the documented stream
    u = [(int(x) >> 11) / 2**53 for x in np.random.PCG64(0).random_raw(8)]
    J, K0 = random_closed_chain(0, 3)
    tri = np.array([[-1 + 2 * u[0], -1 + 2 * u[1]], [-1 + 2 * u[2], -1 + 2 * u[3]], [-1 + 2 * u[4], -1 + 2 * u[5]]])
    w = (1.0 if u[6] < 0.5 else -1.0) * (0.5 + u[7])
    assert {tuple(p) for p in K0.p[0]} == {tuple(p) for p in tri}
    assert abs(K0.w[0]) == pytest.approx(abs(w), abs=0)


@pytest.mark.parametrize("seed", [0, 1, 17])
def test_random_chain_closed_and_density(seed, rng):
    J, K0 = random_closed_chain(seed, 5)
    assert len(boundary1(J)) == 0
    for z in rng.uniform(-1, 1, (5, 2)):
        d = signed_density(K0, z).value
        assert winding_number(J, z).real == pytest.approx(d, abs=1e-6)


def test_random_chain_deterministic():
    assert dumps(random_closed_chain(5, 7)[0]) == dumps(random_closed_chain(5, 7)[0])
    assert dumps(random_closed_chain(5, 7)[1]) == dumps(random_closed_chain(5, 7)[1])
    assert dumps(random_closed_chain(5, 7)[0]) != dumps(random_closed_chain(6, 7)[0])


def test_constant_field_mass():
    J = vector_field_chain(constant_field(1, 0), (0, 0, 1, 1), 0.1)
    assert len(J) == 100
    assert np.allclose(J.a[:, 1], J.b[:, 1])
    assert mass(J) == pytest.approx(1.0, abs=1e-12)


def test_constant_field_rows_telescope():
    # grid-aligned segments chain end to end, leaving one atom pair per row
    J = vector_field_chain(constant_field(1, 0), (0, 0, 1, 1), 0.1)
    assert len(boundary1(J)) == 20


def test_rotation_field_skips_zero_cells():
    J = vector_field_chain(rotation_field(1, 2), (-2, -2, 2, 2), 0.1)
    centres = (J.a + J.b) / 2
    r = np.hypot(*centres.T)
    assert np.all((r >= 1 - 1e-12) & (r <= 2 + 1e-12))
    assert np.allclose(J.w, r * 0.1)


def test_rotation_field_riemann_oracle():
    # (1/2 pi i) sum V(p) h^2 / p over the annulus at a ten times finer grid
    h = 0.02
    J = vector_field_chain(rotation_field(1, 2), (-2, -2, 2, 2), h)
    hf = h / 10
    xs = -2 + (np.arange(round(4 / hf)) + 0.5) * hf
    X, Y = np.meshgrid(xs, xs)
    z = (X + 1j * Y).ravel()
    z = z[(abs(z) >= 1) & (abs(z) <= 2)]
    oracle = np.sum(1j * z / z) * hf * hf / (2j * math.pi)
    got = winding_number(J, (0, 0))
    assert oracle.real == pytest.approx(1.5, abs=2e-3)
    assert got.real == pytest.approx(oracle.real, abs=5e-3)


@pytest.mark.parametrize(
    "chain",
    [circle_chain(n=9), koch_chain(2), staircase_chain(5), random_closed_chain(3, 4)[0],
     random_closed_chain(3, 4)[1], vector_field_chain(rotation_field(), (-2, -2, 2, 2), 0.2)],
)
def test_round_trip(chain):
    back = loads(dumps(chain))
    assert type(back) is type(chain)
    assert dumps(back) == dumps(chain)
    if hasattr(chain, "a"):
        assert np.array_equal(back.a, chain.a) and np.array_equal(back.b, chain.b)
    else:
        assert np.array_equal(back.p, chain.p)
    assert np.array_equal(back.w, chain.w)
