from __future__ import annotations

import json
import math

import numpy as np
import pytest

from hil import make_revolution, solve_catenoid_profile
from hil.errors import NonPositiveRadius, NonSmoothProfile
from hil.revolution import integrate_revolution, load_profile
from oracles import sphere_area


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 9])
def test_sphere_curvature_is_n(n):
    S = make_revolution({"kind": "sphere", "R": 1.0}, n)
    t = np.linspace(S.t0, S.t1, 2001)
    assert np.abs(S.mean_curvature(t) - n).max() <= 1e-10
    S2 = make_revolution({"kind": "sphere", "R": 2.5}, n)
    assert np.abs(S2.mean_curvature(t * 2.5) - n / 2.5).max() <= 1e-10


@pytest.mark.parametrize("n", [2, 3, 5])
def test_flat_annulus(n):
    A = make_revolution({"kind": "hyperplane_annulus", "R0": 0.01, "R1": 1.0}, n)
    t = np.linspace(A.t0, A.t1, 500)
    assert np.abs(A.mean_curvature(t)).max() == 0
    assert np.abs(A.x_dot_nu(t)).max() <= 1e-15


def test_cylinder():
    C = make_revolution({"kind": "cylinder", "R": 0.5, "L": 2.0}, 2)
    t = np.linspace(C.t0, C.t1, 100)
    assert np.allclose(C.mean_curvature(t), 2.0, rtol=1e-14)


def test_arc_length_invariant():
    for spec, n in (({"kind": "sphere", "R": 1.3}, 4), ({"kind": "catenoid", "neck": 1.0, "span": 3.0}, 3)):
        assert make_revolution(spec, n).arc_length_defect(np.linspace(-1, 1, 11)) <= 1e-10


def test_catenoid_matches_cosh():
    prof = solve_catenoid_profile(2, 1.0, span=3.0)
    C = make_revolution({"kind": "catenoid", "neck": 1.0, "span": 3.0}, 2)
    t = np.linspace(C.t0, C.t1, 401)
    # arc length from the neck of r = cosh z is sinh z
    z = np.arcsinh(t)
    assert np.abs(C.r(t) - np.cosh(z)).max() <= 1e-8
    assert np.abs(C.z(t) - z).max() <= 1e-8
    assert prof["conservation_residual"] <= 1e-10


@pytest.mark.parametrize("n", [2, 3, 4])
def test_catenoid_is_minimal(n):
    C = make_revolution({"kind": "catenoid", "neck": 1.0, "span": 3.0}, n)
    t = np.linspace(C.t0, C.t1, 1001)
    assert np.abs(C.mean_curvature(t)).max() <= 1e-8
    assert C.extra["ode_residual"] <= 1e-8
    # finite differences of the profile agree with the analytic curvature
    inner = t[5:-5]
    assert np.abs(C.mean_curvature_fd(inner)).max() <= 1e-5


def test_catenoid_needs_positive_neck():
    with pytest.raises(NonPositiveRadius):
        solve_catenoid_profile(2, 0.0)


def test_sphere_integrals():
    S2 = make_revolution({"kind": "sphere", "R": 1.0}, 2)
    S3 = make_revolution({"kind": "sphere", "R": 1.0}, 3)
    assert integrate_revolution(S2, lambda t: np.ones_like(t))["value"] == pytest.approx(4 * math.pi, rel=1e-12)
    assert integrate_revolution(S3, lambda t: np.ones_like(t))["value"] == pytest.approx(2 * math.pi**2, rel=1e-12)
    assert sphere_area(3) == pytest.approx(2 * math.pi**2, rel=1e-15)


def test_inverse_radius_on_annulus():
    eps = 1e-3
    A = make_revolution({"kind": "hyperplane_annulus", "R0": eps, "R1": 1.0}, 2)
    v = integrate_revolution(A, lambda t: np.ones_like(t), weight_exponent=1.0)["value"]
    assert v == pytest.approx(2 * math.pi * (1 - eps), rel=1e-10)


def test_reflection_leaves_integrals_unchanged():
    C = make_revolution({"kind": "catenoid", "neck": 1.0, "span": 2.0}, 3)
    f = lambda R: integrate_revolution(R, lambda t: np.abs(R.mean_curvature(t)) + R.radius(t) ** 2)["value"]
    assert f(C.reflected()) == pytest.approx(f(C), rel=1e-12)


def test_sampled_profile_round_trip(tmp_path):
    s = np.linspace(0, math.pi, 801)
    data = {"n": 3, "t": s.tolist(), "r": np.sin(s).tolist(), "z": (-np.cos(s)).tolist()}
    path = tmp_path / "p.json"
    path.write_text(json.dumps(data))
    R = load_profile(path)
    t = np.linspace(R.t0, R.t1, 200)[20:-20]
    assert np.abs(R.mean_curvature(t) - 3).max() <= 1e-4
    assert R.arc_length_defect(t) <= 1e-10


def test_sampled_profile_rejects_bad_input():
    with pytest.raises((NonPositiveRadius, NonSmoothProfile)):
        make_revolution({"kind": "sampled", "t": [0, 1, 2, 3], "r": [1, -1, 1, 1], "z": [0, 1, 2, 3]}, 2)
