"""Tangential calculus on triangle meshes.

For a piecewise-linear function the tangential gradient on a face is the
ordinary gradient of its affine restriction, i.e. the extrinsic
``delta_i`` derivatives of the function extended constantly along the face
normal.  Tangential divergence of an ambient field ``Z`` is the trace
``sum_i delta_i Z^i`` of the face-wise gradients of its components.
"""

from __future__ import annotations

import numpy as np

from .errors import FieldSizeMismatch, OriginOnSurface, SupportViolation
from .fields import ScalarField, VectorField
from .mesh import SimplicialHypersurface


def _vertex_values(M, phi, name="phi"):
    if isinstance(phi, ScalarField):
        return phi.at_vertices(M)
    return M.vertex_field(phi, name)


def tangential_gradient(M: SimplicialHypersurface, phi) -> np.ndarray:
    """Per-face tangential gradient of a per-vertex function.

    Returns
    -------
    ndarray, shape (nf, 3)
        Constant ambient vector on each face, lying in the face plane.
    """
    v = _vertex_values(M, phi)
    if v.ndim != 1:
        raise FieldSizeMismatch("tangential_gradient expects a scalar field")
    return np.einsum("fk,fkc->fc", v[M.triangles], M.barycentric_gradients)


def tangential_divergence(M: SimplicialHypersurface, Z) -> np.ndarray:
    """Per-face ``div_T Z = sum_i delta_i Z^i``.

    ``Z`` may be a :class:`VectorField`, a callable of vertex positions, or an
    array of per-vertex (nv, 3) or per-face (nf, 3) values.
    """
    Z = as_vector_field(M, Z)
    return np.einsum("fkc,fkc->f", Z.corners, M.barycentric_gradients)


def as_vector_field(M, Z) -> VectorField:
    if isinstance(Z, VectorField):
        if Z.corners.shape != (len(M.triangles), 3, 3):
            raise FieldSizeMismatch("vector field does not match the mesh")
        return Z
    if callable(Z):
        return VectorField.from_callable(M, Z)
    arr = np.asarray(Z, dtype=float)
    if arr.shape == M.vertices.shape:
        return VectorField.from_vertex(M, arr)
    if arr.shape == (len(M.triangles), 3):
        return VectorField.from_face(M, arr)
    raise FieldSizeMismatch(f"cannot interpret array of shape {arr.shape} as a vector field")


def mean_curvature(M: SimplicialHypersurface):
    """Per-vertex signed mean curvature ``H`` and vector ``H nu``.

    Boundary vertices carry ``nan`` in ``H`` (and zero in the vector).
    """
    return M.per_vertex_mean_curvature, M.mean_curvature_vector


def position_tangential(M: SimplicialHypersurface) -> np.ndarray:
    """Per-vertex tangential part ``x_T = x - (x . nu) nu`` of the position."""
    x = M.vertices
    nu = M.per_vertex_normal
    return x - np.einsum("ij,ij->i", x, nu)[:, None] * nu


def product_rule_residual(M, phi, Z) -> float:
    """Max over faces of ``|div(phi Z) - grad(phi).Z - phi div Z|``.

    Face-wise values of ``Z`` and ``phi`` are taken at the barycenter.
    """
    Z = as_vector_field(M, Z)
    v = _vertex_values(M, phi)
    lhs = tangential_divergence(M, Z.scaled(M, v))
    g = tangential_gradient(M, v)
    rhs = np.einsum("fc,fc->f", g, Z.face_values()) + v[M.triangles].mean(1) * tangential_divergence(M, Z)
    return float(np.max(np.abs(lhs - rhs)))


def identity_residuals(M: SimplicialHypersurface, delta: float | None = None) -> dict:
    """Residuals of the position-vector identities on a mesh.

    * ``res_div_x``: ``max |div_T x - n|`` over faces;
    * ``res_div_xT``: area-weighted L2 norm of
      ``div_T x_T - (n - (x . nu) H)`` over faces away from the boundary;
    * ``slack_lap_radius``: ``min_i Delta|x| - (n-1)/|x| + (x/|x| . nu) H``
      over interior vertices, with the cotangent Laplace-Beltrami operator.

    Raises
    ------
    OriginOnSurface
        If some vertex is closer than ``delta`` to the origin.
    """
    n = M.n
    x = M.vertices
    rad = np.linalg.norm(x, axis=1)
    if delta is None:
        delta = 1e-8 * M.bbox_diagonal
    if rad.min() < delta:
        raise OriginOnSurface(f"min |x| = {rad.min():.3g} < delta = {delta:.3g}")

    res_div_x = float(np.max(np.abs(tangential_divergence(M, x) - n)))

    interior = ~M.boundary_vertex
    H = M.H_or_zero
    xnu = np.einsum("ij,ij->i", x, M.per_vertex_normal)
    target = (n - xnu * H)[M.triangles].mean(axis=1)
    d = tangential_divergence(M, position_tangential(M)) - target
    faces_ok = interior[M.triangles].all(axis=1)
    res_div_xT = float(np.sqrt(np.sum(M.per_face_area[faces_ok] * d[faces_ok] ** 2)))

    lap = -(M.cotan_laplacian @ rad) / M.per_vertex_area
    slack = lap - (n - 1) / rad + (xnu / rad) * H
    slack_min = float(np.min(slack[interior])) if interior.any() else float("nan")
    return {"res_div_x": res_div_x, "res_div_xT": res_div_xT, "slack_lap_radius": slack_min}


def _require_collar_zero(M, *fields, rel_tol=1e-12):
    if M.is_closed:
        return
    collar = M.boundary_collar
    for f in fields:
        scale = max(np.max(np.abs(f)), 1e-300)
        if np.all(np.abs(f[collar]) <= rel_tol * scale):
            return
    raise SupportViolation("no field vanishes on the boundary collar")


def ibp_residuals(M: SimplicialHypersurface, v, w, Z=None, omega=None) -> dict:
    """Discrete residuals of the integration by parts formulas.

    Parameters
    ----------
    v, w : per-vertex arrays or ScalarField
        At least one must vanish on the boundary collar of ``M``.
    Z : vector field, optional
        Used for the vector formula (with ``v``) and, restricted to ``omega``,
        for the divergence theorem with a boundary term.
    omega : boolean face mask or face indices, optional

    Returns
    -------
    dict with ``res_scalar`` (length-3 array, one entry per ambient index),
    ``res_vector`` and ``res_divthm`` (``nan`` when not requested), plus the
    raw integrals for diagnosis.
    """
    vv = _vertex_values(M, v, "v")
    ww = _vertex_values(M, w, "w")
    _require_collar_zero(M, vv, ww)

    A = M.per_face_area
    Av = M.per_vertex_area
    Hv = M.mean_curvature_vector
    gv = tangential_gradient(M, vv)
    gw = tangential_gradient(M, ww)
    vbar = vv[M.triangles].mean(1)
    wbar = ww[M.triangles].mean(1)
    t1 = np.sum((A * wbar)[:, None] * gv, axis=0)
    t2 = np.sum((A * vbar)[:, None] * gw, axis=0)
    t3 = np.sum((Av * vv * ww)[:, None] * Hv, axis=0)
    out = {
        "res_scalar": np.abs(t1 + t2 - t3),
        "scalar_terms": (t1, t2, t3),
        "res_vector": float("nan"),
        "res_divthm": float("nan"),
    }

    if Z is not None:
        Zf = as_vector_field(M, Z)
        div = tangential_divergence(M, Zf)
        s1 = np.sum(A * vbar * div)
        s2 = np.sum(A * np.einsum("fc,fc->f", gv, Zf.face_values()))
        Zv = Zf.vertex_values(M)
        s3 = np.sum(Av * vv * np.einsum("ic,ic->i", Zv, Hv))
        out["res_vector"] = float(abs(s1 + s2 - s3))
        out["vector_terms"] = (float(s1), float(s2), float(s3))

        if omega is not None:
            out.update(divergence_theorem(M, Zf, omega))
    return out


def region_boundary(M, mask):
    """Directed boundary edges of a face subset, with the owning face.

    Returns ``(edges (k, 2), faces (k,), corner_slots (k, 2))``.
    """
    mask = _face_mask(M, mask)
    tri = M.triangles
    nf = len(tri)
    slots = [(0, 1), (1, 2), (2, 0)]
    directed = np.concatenate([tri[:, list(s)] for s in slots])
    owner = np.tile(np.arange(nf), 3)
    slot_id = np.repeat(np.arange(3), nf)
    inside = mask[owner]
    key = np.sort(directed, axis=1)
    _, inv = np.unique(key, axis=0, return_inverse=True)
    inv = inv.ravel()
    cnt_in = np.bincount(inv, weights=inside.astype(float))
    sel = inside & (cnt_in[inv] == 1)
    corner = np.array(slots)[slot_id[sel]]
    return directed[sel], owner[sel], corner


def _face_mask(M, omega):
    omega = np.asarray(omega)
    if omega.dtype == bool:
        if omega.shape != (len(M.triangles),):
            raise FieldSizeMismatch("face mask has wrong length")
        return omega
    mask = np.zeros(len(M.triangles), dtype=bool)
    mask[omega.astype(np.int64)] = True
    return mask


def divergence_theorem(M, Z, omega) -> dict:
    """``|int_Omega div_T Z - sum over boundary edges of Z . nu_Omega|``.

    The outward conormal of a boundary edge lies in the plane of the face of
    ``Omega`` that owns it; ``Z`` is integrated along the edge with the
    trapezoid rule, which is exact for the face-wise linear representation.
    """
    Z = as_vector_field(M, Z)
    mask = _face_mask(M, omega)
    interior_integral = float(np.sum(M.per_face_area[mask] * tangential_divergence(M, Z)[mask]))
    edges, faces, corner = region_boundary(M, mask)
    x = M.vertices
    e = x[edges[:, 1]] - x[edges[:, 0]]
    conormal_scaled = np.cross(e, M.face_normal[faces])  # |e| * unit conormal
    zmid = 0.5 * (Z.corners[faces, corner[:, 0]] + Z.corners[faces, corner[:, 1]])
    flux = float(np.sum(np.einsum("ec,ec->e", zmid, conormal_scaled)))
    return {
        "res_divthm": abs(interior_integral - flux),
        "divthm_interior": interior_integral,
        "divthm_flux": flux,
    }
