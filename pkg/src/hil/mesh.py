"""Oriented triangle meshes of 2-surfaces in R^3.

The mesh is immutable after :func:`build_mesh`.  Everything derived from the
geometry (normals, lumped areas, the cotangent Laplacian, discrete mean
curvature) is computed once at construction time or lazily cached.

Conventions
-----------
* ``H`` is the *sum* of the principal curvatures, so the unit sphere with
  outward normal has ``H == 2``.
* The discrete mean curvature vector at an interior vertex is
  ``(L x)_i / A_i`` with ``L`` the positive semidefinite cotangent Laplacian
  and ``A_i`` the barycentric (lumped) vertex area; ``H_i`` is its component
  along the vertex normal.
* Boundary vertices carry ``H = nan``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import (
    DegenerateFace,
    FieldSizeMismatch,
    InconsistentOrientation,
    MeshError,
    NonManifold,
    ZeroVertexArea,
)

DEGENERATE_REL = 1e-14


@dataclass(frozen=True, eq=False)
class SimplicialHypersurface:
    """A triangulated surface with per-vertex normals and mean curvature."""

    vertices: np.ndarray
    triangles: np.ndarray
    per_vertex_normal: np.ndarray
    per_vertex_mean_curvature: np.ndarray
    per_vertex_area: np.ndarray
    per_face_area: np.ndarray
    face_normal: np.ndarray
    cotan_laplacian: sp.csr_matrix = field(repr=False)
    ambient_dim: int = 3
    n: int = 2

    # -- topology ----------------------------------------------------------
    @cached_property
    def edges(self) -> np.ndarray:
        """Unique undirected edges, sorted pairs, shape (ne, 2)."""
        return _edge_table(self.triangles)[0]

    @cached_property
    def edge_face_count(self) -> np.ndarray:
        return _edge_table(self.triangles)[1]

    @cached_property
    def boundary_edges(self) -> np.ndarray:
        """Boundary edges as *directed* pairs following face orientation."""
        tri = self.triangles
        directed = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
        key = np.sort(directed, axis=1)
        _, inv, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
        return directed[counts[inv.ravel()] == 1]

    @cached_property
    def boundary_vertex(self) -> np.ndarray:
        mask = np.zeros(len(self.vertices), dtype=bool)
        mask[self.boundary_edges.ravel()] = True
        return mask

    @cached_property
    def boundary_collar(self) -> np.ndarray:
        """Boundary vertices together with their one-ring neighbours."""
        mask = self.boundary_vertex.copy()
        if mask.any():
            touching = mask[self.triangles].any(axis=1)
            mask[self.triangles[touching].ravel()] = True
        return mask

    @property
    def is_closed(self) -> bool:
        return not self.boundary_vertex.any()

    @property
    def euler_characteristic(self) -> int:
        return len(self.vertices) - len(self.edges) + len(self.triangles)

    # -- geometry ----------------------------------------------------------
    @cached_property
    def bbox_diagonal(self) -> float:
        return float(np.linalg.norm(self.vertices.max(0) - self.vertices.min(0)))

    @cached_property
    def mean_edge_length(self) -> float:
        e = self.vertices[self.edges[:, 0]] - self.vertices[self.edges[:, 1]]
        return float(np.linalg.norm(e, axis=1).mean())

    @cached_property
    def max_edge_length(self) -> float:
        e = self.vertices[self.edges[:, 0]] - self.vertices[self.edges[:, 1]]
        return float(np.linalg.norm(e, axis=1).max())

    @cached_property
    def barycentric_gradients(self) -> np.ndarray:
        """Gradients of the three hat functions on each face, shape (nf, 3, 3).

        ``[f, k]`` is the (constant) ambient gradient of the barycentric
        coordinate of corner ``k``; it lies in the face plane.
        """
        x = self.vertices[self.triangles]
        nrm = self.face_normal
        out = np.empty_like(x)
        for k in range(3):
            e = x[:, (k + 2) % 3] - x[:, (k + 1) % 3]
            out[:, k] = np.cross(nrm, e)
        return out / (2.0 * self.per_face_area)[:, None, None]

    @cached_property
    def gradient_operator(self) -> sp.csr_matrix:
        """Sparse map from vertex values to stacked per-face gradients.

        Shape ``(3 * nf, nv)``; row ``3 f + c`` is component ``c`` on face ``f``.
        """
        nf = len(self.triangles)
        g = self.barycentric_gradients
        rows = (3 * np.arange(nf)[:, None, None] + np.arange(3)[None, None, :]).repeat(3, 1)
        cols = np.broadcast_to(self.triangles[:, :, None], (nf, 3, 3))
        return sp.csr_matrix(
            (g.ravel(), (rows.ravel(), cols.ravel())), shape=(3 * nf, len(self.vertices))
        )

    @cached_property
    def mean_curvature_vector(self) -> np.ndarray:
        """``H nu`` per vertex (zero on the boundary)."""
        return np.nan_to_num(self.per_vertex_mean_curvature)[:, None] * self.per_vertex_normal

    @property
    def H_or_zero(self) -> np.ndarray:
        return np.nan_to_num(self.per_vertex_mean_curvature)

    @property
    def area(self) -> float:
        return float(np.sum(self.per_face_area))

    def fingerprint(self) -> str:
        """Hash of the geometry arrays, stable across runs."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.vertices, dtype="<f8").tobytes())
        h.update(np.ascontiguousarray(self.triangles, dtype="<i8").tobytes())
        return "mesh:" + h.hexdigest()[:16]

    def flipped(self) -> SimplicialHypersurface:
        """Same surface with the opposite orientation."""
        return build_mesh(self.vertices, self.triangles[:, ::-1], orient_outward=False)

    def transformed(self, matrix) -> SimplicialHypersurface:
        """Apply a linear map (rotation, scaling) fixing the origin."""
        m = np.asarray(matrix, dtype=float)
        flip = np.linalg.det(m) < 0
        tri = self.triangles[:, ::-1] if flip else self.triangles
        return build_mesh(self.vertices @ m.T, tri, orient_outward=False)

    def vertex_field(self, values, name="field") -> np.ndarray:
        v = np.asarray(values, dtype=float)
        if v.shape[0] != len(self.vertices):
            raise FieldSizeMismatch(
                f"{name} has {v.shape[0]} entries, mesh has {len(self.vertices)} vertices"
            )
        return v

    # -- serialization -----------------------------------------------------
    def to_json(self) -> dict:
        return {
            "ambient_dim": 3,
            "vertices": self.vertices.tolist(),
            "triangles": self.triangles.tolist(),
        }


def _edge_table(tri):
    e = np.sort(np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]]), axis=1)
    base = int(tri.max()) + 1 if tri.size else 1
    keys, counts = np.unique(e[:, 0] * base + e[:, 1], return_counts=True)
    return np.stack([keys // base, keys % base], axis=1), counts


def cotangent_laplacian(vertices, triangles) -> sp.csr_matrix:
    """Positive semidefinite cotangent Laplacian (stiffness matrix)."""
    nv = len(vertices)
    x = vertices[triangles]
    rows, cols, vals = [], [], []
    for k in range(3):
        i, j = (k + 1) % 3, (k + 2) % 3
        u = x[:, i] - x[:, k]
        v = x[:, j] - x[:, k]
        cot = np.einsum("ij,ij->i", u, v) / np.linalg.norm(np.cross(u, v), axis=1)
        a, b = triangles[:, i], triangles[:, j]
        w = 0.5 * cot
        rows += [a, b, a, b]
        cols += [b, a, a, b]
        vals += [-w, -w, w, w]
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(nv, nv)
    )


def build_mesh(vertices, triangles, *, orient_outward: bool = True) -> SimplicialHypersurface:
    """Validate a triangle soup and populate all derived geometry.

    Parameters
    ----------
    vertices : array_like, shape (nv, 3)
    triangles : array_like of int, shape (nf, 3)
    orient_outward : bool
        For closed meshes, flip every face if the enclosed signed volume is
        negative so normals point outward.  Open meshes keep the given
        orientation.

    Raises
    ------
    NonManifold, DegenerateFace, InconsistentOrientation, ZeroVertexArea
    """
    V = np.array(vertices, dtype=float)
    T = np.array(triangles, dtype=np.int64)
    if V.ndim != 2 or V.shape[1] != 3:
        raise MeshError("vertices must have shape (nv, 3)")
    if T.ndim != 2 or T.shape[1] != 3:
        raise MeshError("triangles must have shape (nf, 3)")
    if T.size and (T.min() < 0 or T.max() >= len(V)):
        raise MeshError("triangle index out of range")
    if np.any((T[:, 0] == T[:, 1]) | (T[:, 1] == T[:, 2]) | (T[:, 0] == T[:, 2])):
        raise DegenerateFace("triangle with repeated vertex index")

    cross = np.cross(V[T[:, 1]] - V[T[:, 0]], V[T[:, 2]] - V[T[:, 0]])
    dbl = np.linalg.norm(cross, axis=1)
    diag = np.linalg.norm(V.max(0) - V.min(0))
    bad = np.flatnonzero(0.5 * dbl < DEGENERATE_REL * diag**2)
    if bad.size:
        raise DegenerateFace(f"{bad.size} faces below area threshold (first: {bad[0]})")

    directed = np.concatenate([T[:, [0, 1]], T[:, [1, 2]], T[:, [2, 0]]])
    nv = len(V)
    ukey = directed.min(1) * nv + directed.max(1)
    _, inv, ucount = np.unique(ukey, return_inverse=True, return_counts=True)
    if ucount.max(initial=0) > 2:
        raise NonManifold("edge shared by more than two faces")
    _, dcount = np.unique(directed[:, 0] * nv + directed[:, 1], return_counts=True)
    if dcount.max(initial=0) > 1:
        raise InconsistentOrientation("adjacent faces traverse a shared edge in the same direction")

    closed = bool(np.all(ucount == 2))
    if orient_outward and closed:
        signed_vol = np.einsum("ij,ij->", V[T[:, 0]], cross) / 6.0
        if signed_vol < 0:
            T = T[:, ::-1].copy()
            cross = -cross

    area = 0.5 * dbl
    fn = cross / dbl[:, None]
    varea = np.bincount(T.ravel(), np.repeat(area, 3), minlength=nv) / 3.0
    if np.any(varea <= 0):
        raise ZeroVertexArea(f"{int(np.sum(varea <= 0))} vertices belong to no face")
    # Max's weights: the face normal over |e1|^2 |e2|^2 of the two incident edges
    # at each corner, exact when the one-ring lies on a sphere
    vn = np.zeros_like(V)
    for k in range(3):
        e1 = V[T[:, (k + 1) % 3]] - V[T[:, k]]
        e2 = V[T[:, (k + 2) % 3]] - V[T[:, k]]
        wgt = np.einsum("ij,ij->i", e1, e1) * np.einsum("ij,ij->i", e2, e2)
        np.add.at(vn, T[:, k], cross / wgt[:, None])
    vn /= np.linalg.norm(vn, axis=1)[:, None]

    L = cotangent_laplacian(V, T)
    hn = (L @ V) / varea[:, None]
    H = np.einsum("ij,ij->i", hn, vn)
    bmask = np.zeros(nv, dtype=bool)
    bmask[directed[ucount[inv.ravel()] == 1].ravel()] = True
    H[bmask] = np.nan

    for arr in (V, T, vn, H, varea, area, fn):
        arr.setflags(write=False)
    return SimplicialHypersurface(
        vertices=V,
        triangles=T,
        per_vertex_normal=vn,
        per_vertex_mean_curvature=H,
        per_vertex_area=varea,
        per_face_area=area,
        face_normal=fn,
        cotan_laplacian=L,
    )


# --- file formats ----------------------------------------------------------
def load_mesh(path, **kwargs) -> SimplicialHypersurface:
    """Read an OFF, OBJ (triangles only) or JSON mesh file."""
    path = Path(path)
    suffix = path.suffix.lower()
    text = path.read_text()
    if suffix == ".off":
        V, T = _parse_off(text)
    elif suffix == ".obj":
        V, T = _parse_obj(text)
    elif suffix == ".json":
        V, T = _parse_json(json.loads(text))
    else:
        raise MeshError(f"unsupported mesh format {suffix!r}")
    return build_mesh(V, T, **kwargs)


def save_mesh(mesh: SimplicialHypersurface, path) -> None:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".json":
        path.write_text(json.dumps(mesh.to_json()))
    elif suffix == ".off":
        lines = ["OFF", f"{len(mesh.vertices)} {len(mesh.triangles)} 0"]
        lines += [" ".join(repr(float(c)) for c in v) for v in mesh.vertices]
        lines += ["3 " + " ".join(str(int(i)) for i in t) for t in mesh.triangles]
        path.write_text("\n".join(lines) + "\n")
    elif suffix == ".obj":
        lines = ["v " + " ".join(repr(float(c)) for c in v) for v in mesh.vertices]
        lines += ["f " + " ".join(str(int(i) + 1) for i in t) for t in mesh.triangles]
        path.write_text("\n".join(lines) + "\n")
    else:
        raise MeshError(f"unsupported mesh format {suffix!r}")


def _parse_off(text):
    tokens = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise MeshError("missing OFF header")
    nv, nf = int(tokens[1]), int(tokens[2])
    pos = 4
    V = np.array(tokens[pos : pos + 3 * nv], dtype=float).reshape(nv, 3)
    pos += 3 * nv
    T = []
    for _ in range(nf):
        k = int(tokens[pos])
        if k != 3:
            raise MeshError("OFF face is not a triangle")
        T.append([int(t) for t in tokens[pos + 1 : pos + 4]])
        pos += 1 + k
    return V, np.array(T, dtype=np.int64).reshape(-1, 3)


def _parse_obj(text):
    V, T = [], []
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            V.append([float(c) for c in parts[1:4]])
        elif parts[0] == "f":
            idx = [int(p.split("/")[0]) for p in parts[1:]]
            if len(idx) != 3:
                raise MeshError("OBJ face is not a triangle")
            T.append([i - 1 if i > 0 else len(V) + i for i in idx])
    return np.array(V, dtype=float), np.array(T, dtype=np.int64).reshape(-1, 3)


def _parse_json(obj):
    if obj.get("ambient_dim", 3) != 3:
        raise MeshError("only ambient_dim = 3 meshes are supported")
    return np.array(obj["vertices"], dtype=float), np.array(obj["triangles"], dtype=np.int64)
