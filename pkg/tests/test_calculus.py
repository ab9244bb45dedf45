from __future__ import annotations

import math

import numpy as np
import pytest

from hil.calculus import (divergence_theorem, ibp_residuals, identity_residuals, position_tangential,
                          product_rule_residual, tangential_divergence, tangential_gradient)
from hil.corpus import flat_annulus, flat_disk, icosphere, radial_bump, torus
from hil.errors import FieldSizeMismatch, OriginOnSurface, SupportViolation


def test_gradient_of_constant_vanishes():
    M = icosphere(3)
    assert np.abs(tangential_gradient(M, np.full(len(M.vertices), 2.5))).max() <= 1e-12


def test_gradient_of_linear_function_on_flat_disk():
    M = flat_disk(1.0, 16)
    g = tangential_gradient(M, M.vertices[:, 0])
    assert np.allclose(g, [1.0, 0.0, 0.0], atol=1e-12)


def test_gradient_on_sphere_is_tangential_projection():
    errs = []
    for k in (3, 4):
        M = icosphere(k)
        g = tangential_gradient(M, M.vertices[:, 2])
        b = M.vertices[M.triangles].mean(axis=1)
        nu = b / np.linalg.norm(b, axis=1)[:, None]
        exact = np.array([0, 0, 1.0]) - nu[:, 2:3] * nu
        errs.append(np.abs(g - exact).max())
        # the face gradient lies in the face plane
        assert np.abs(np.einsum("fc,fc->f", g, M.face_normal)).max() <= 1e-12
    assert errs[1] <= 0.6 * errs[0]


def test_size_mismatch():
    M = icosphere(2)
    with pytest.raises(FieldSizeMismatch):
        tangential_gradient(M, np.ones(len(M.vertices) + 1))
    with pytest.raises(FieldSizeMismatch):
        tangential_divergence(M, np.ones((len(M.vertices) + 1, 3)))


def test_divergence_of_position_is_n():
    for M in (icosphere(3), torus(2, 1, 48, 24), flat_annulus(0.1, 1, 48)):
        assert np.abs(tangential_divergence(M, M.vertices) - 2).max() <= 1e-10


def test_divergence_of_normal_is_H():
    M = icosphere(5)
    d = tangential_divergence(M, M.per_vertex_normal)
    H = M.per_vertex_mean_curvature[M.triangles].mean(axis=1)
    rel = math.sqrt(np.sum(M.per_face_area * (d - H) ** 2) / np.sum(M.per_face_area * H**2))
    assert rel <= 0.05


def test_divergence_of_constant_on_flat_disk():
    M = flat_disk(1.0, 12)
    assert np.abs(tangential_divergence(M, np.tile([0.3, -1.0, 2.0], (len(M.vertices), 1)))).max() <= 1e-12


def test_product_rule_per_face():
    M = icosphere(3)
    x = M.vertices
    phi = np.sin(x[:, 0]) + x[:, 1] * x[:, 2]
    b = x[M.triangles].mean(axis=1)
    Z = np.cross(b, [0.2, 0.5, 1.0])  # per-face constant vectors
    assert Z.shape == (len(M.triangles), 3)
    assert product_rule_residual(M, phi, Z) <= 1e-10


def test_identity_residuals_on_sphere():
    res = [identity_residuals(icosphere(k)) for k in (4, 5, 6, 7)]
    assert all(r["res_div_x"] <= 1e-10 for r in res)
    assert all(r["slack_lap_radius"] >= -0.05 for r in res)
    h = [icosphere(k).mean_edge_length for k in (4, 5, 6, 7)]
    orders = [math.log(res[i]["res_div_xT"] / res[i + 1]["res_div_xT"]) / math.log(h[i] / h[i + 1])
              for i in range(3)]
    # the order increases monotonically towards 1 under refinement
    assert orders[0] < orders[1] < orders[2]
    assert orders[-1] >= 0.99


def test_identity_residuals_reject_origin():
    with pytest.raises(OriginOnSurface):
        identity_residuals(flat_disk(1.0, 8))


def test_flat_ibp_is_exact():
    M = flat_annulus(0.05, 1.0, 64)
    v = radial_bump(0.2, 0.7).at_vertices(M)
    w = radial_bump(0.3, 0.9).at_vertices(M) * M.vertices[:, 0]
    r = ibp_residuals(M, v, w, Z=position_tangential(M) * v[:, None])
    assert r["res_scalar"].max() <= 1e-8
    assert r["res_vector"] <= 1e-8


def test_ibp_on_sphere_converges():
    out = []
    for k in (3, 4, 5):
        M = icosphere(k)
        x = M.vertices
        out.append(ibp_residuals(M, np.exp(x[:, 0]) * x[:, 0], np.cos(x[:, 1]) * x[:, 1])["res_scalar"].max())
    assert out[0] / out[2] >= 4 ** 1.0 * 0.9


def test_ibp_needs_collar_zero():
    M = flat_disk(1.0, 8)
    with pytest.raises(SupportViolation):
        ibp_residuals(M, np.ones(len(M.vertices)), np.ones(len(M.vertices)))


def test_divergence_theorem_on_subdisk():
    M = flat_disk(1.0, 16)
    omega = np.linalg.norm(M.vertices[M.triangles].mean(axis=1), axis=1) < 0.5
    r = divergence_theorem(M, position_tangential(M), omega)
    assert r["res_divthm"] <= 1e-8
    assert r["divthm_interior"] == pytest.approx(2 * M.per_face_area[omega].sum(), rel=1e-12)
