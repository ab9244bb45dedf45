from __future__ import annotations

import math

import numpy as np
import pytest

from hil import QuadratureSpec, integrate, make_surface
from hil.corpus import flat_disk, icosphere, radial_bump
from hil.errors import BadSpec, ExponentOutOfRange, SingularityUnprotected
from hil.quadrature import psum, triangle_rule
from oracles import bump, flat_radial_integral


@pytest.mark.parametrize("degree", [2, 4, 6])
def test_triangle_rules_integrate_polynomials(degree):
    bary, w = triangle_rule(degree)
    assert w.sum() == pytest.approx(1.0, rel=1e-14)
    assert np.allclose(bary.sum(axis=1), 1.0)
    x, y = bary[:, 1], bary[:, 2]
    # int x^i y^j over the reference triangle (area 1/2) = i! j! / (i + j + 2)!
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            exact = math.factorial(i) * math.factorial(j) / math.factorial(i + j + 2)
            assert 0.5 * np.sum(w * x**i * y**j) == pytest.approx(exact, rel=1e-12)


def test_sphere_area():
    r = integrate(icosphere(4), lambda x: np.ones(len(x)))
    assert r["value"] == pytest.approx(4 * math.pi, rel=5e-3)


def test_singular_weight_matches_radial_oracle():
    M = flat_disk(1.0, 48)
    phi = radial_bump(0.2, 0.7)
    got = integrate(M, lambda x: phi(x) ** 2, 2.0, QuadratureSpec(mesh_degree=6))["value"]
    f, _ = bump(0.2, 0.7)
    exact = flat_radial_integral(lambda t: f(t) ** 2 / t**2, 2, 0.2, 0.7)
    assert got == pytest.approx(exact, rel=1e-6)


def test_exponent_out_of_range():
    with pytest.raises(ExponentOutOfRange):
        integrate(flat_disk(1.0, 8), lambda x: np.ones(len(x)), 2.0)
    with pytest.raises(ExponentOutOfRange):
        integrate(make_surface("flat_disk:n=3"), lambda t: np.ones_like(t), 3.0)
    with pytest.raises(ExponentOutOfRange):
        integrate(icosphere(2), lambda x: np.ones(len(x)), -0.5)


def test_large_exponent_away_from_origin_converges():
    # the unit sphere avoids the origin, so |x|^-a is harmless for any a
    S = make_surface("sphere:n=3")
    assert integrate(S, lambda t: np.ones_like(t), 3.0)["value"] == pytest.approx(2 * math.pi**2, rel=1e-12)


def test_unprotected_singularity():
    M = flat_disk(1.0, 16)
    with pytest.raises(SingularityUnprotected):
        integrate(M, lambda x: np.ones(len(x)), 1.0)


def test_error_estimate_bounds_degree_change():
    M = icosphere(3)
    f = lambda x: np.exp(x[:, 0]) * (1 + x[:, 2] ** 2)
    r4 = integrate(M, f, 0.0, QuadratureSpec(mesh_degree=4))
    r6 = integrate(M, f, 0.0, QuadratureSpec(mesh_degree=6))
    assert abs(r4["value"] - r6["value"]) <= r4["error_estimate"] * (1 + 1e-12)


def test_exclusion_and_regularization_agree():
    S = make_surface("flat_annulus:n=2,R0=0.001,R1=1")
    phi = radial_bump(0.1, 0.8)
    dens = lambda t: phi.radial[0](S.radius(t)) ** 2
    ex = integrate(S, dens, 1.5, QuadratureSpec(policy="exclusion", delta=1e-3))["value"]
    reg = integrate(S, dens, 1.5, QuadratureSpec(policy="regularization", delta=1e-4))["value"]
    assert reg == pytest.approx(ex, rel=0.01)


def test_spec_parsing_and_validation():
    q = QuadratureSpec.parse("degree=6,panels=128,order=10,exclusion=1e-3")
    assert (q.mesh_degree, q.profile_panels, q.profile_order, q.policy, q.delta) == (6, 128, 10, "exclusion", 1e-3)
    with pytest.raises(BadSpec):
        QuadratureSpec(mesh_degree=3)
    with pytest.raises(BadSpec):
        QuadratureSpec(policy="exclusion", delta=0.0)
    with pytest.raises(BadSpec):
        QuadratureSpec.parse("colour=red")


def test_pairwise_sum_is_order_fixed():
    x = np.random.default_rng(1).standard_normal(10001)
    assert psum(x) == psum(x.copy())
    assert psum(x) == pytest.approx(math.fsum(x), abs=1e-12)
