"""Scalar and vector fields on hypersurfaces."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import FieldSizeMismatch, HILError


@dataclass(frozen=True, eq=False)
class ScalarField:
    """A test function (or slicing function) on a surface.

    A field is one of

    * ``per_vertex``: nodal values of a piecewise-linear function on a mesh;
    * ``callable``: ``func(points) -> values`` for ambient points of shape
      ``(N, d)``.  Radially symmetric fields additionally provide
      ``radial = (f, df)`` with ``phi(x) = f(|x|)``, which is what the
      revolution path consumes;
    * ``profile``: a function of the profile parameter ``t`` of one specific
      revolution surface, ``profile = (g, dg)``.

    ``support`` is the annulus ``[delta, R]`` of distances from the origin
    outside of which the field vanishes.  ``breakpoints`` lists radii (or
    profile parameters for ``profile`` fields) where the field is not smooth;
    quadrature panels are aligned with them.
    """

    kind: str
    values: Optional[np.ndarray] = None
    func: Optional[Callable] = None
    radial: Optional[tuple] = None
    profile: Optional[tuple] = None
    support: tuple = (0.0, np.inf)
    smoothness: str = "C1"
    breakpoints: tuple = ()
    name: str = "field"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("per_vertex", "callable", "profile"):
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.kind == "per_vertex" and self.values is None:
            raise ValueError("per_vertex field needs values")
        if self.kind == "callable" and self.func is None and self.radial is None:
            raise ValueError("callable field needs func or radial")
        if self.kind == "profile" and self.profile is None:
            raise ValueError("profile field needs profile=(g, dg)")

    @classmethod
    def from_values(cls, values, name="field", support=(0.0, np.inf)) -> ScalarField:
        v = np.asarray(values, dtype=float)
        return cls(kind="per_vertex", values=v, support=tuple(support), name=name,
                   smoothness="PL")

    @classmethod
    def from_radial(cls, f, df, *, support=(0.0, np.inf), name="radial", smoothness="C1",
                    breakpoints=(), meta=None) -> ScalarField:
        return cls(kind="callable", radial=(f, df), support=tuple(support), name=name,
                   smoothness=smoothness, breakpoints=tuple(breakpoints), meta=dict(meta or {}))

    @property
    def is_radial(self) -> bool:
        return self.radial is not None

    def __call__(self, points) -> np.ndarray:
        """Evaluate at ambient points, shape (N, d)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.radial is not None:
            return np.asarray(self.radial[0](np.linalg.norm(pts, axis=1)), dtype=float)
        if self.func is not None:
            return np.asarray(self.func(pts), dtype=float)
        raise HILError(f"{self.kind} field cannot be evaluated at arbitrary points")

    def at_vertices(self, mesh) -> np.ndarray:
        if self.kind == "per_vertex":
            return mesh.vertex_field(self.values, self.name)
        if self.kind == "profile":
            raise HILError("profile fields live on revolution surfaces only")
        return self(mesh.vertices)

    def check_support(self, n_samples: int = 1000, dim: int = 3, seed: int = 0,
                      rel_tol: float = 0.0) -> bool:
        """Sample points outside the support annulus and confirm the field is 0 there."""
        if self.kind != "callable":
            return True
        lo, hi = self.support
        rng = np.random.default_rng(seed)
        radii = []
        if lo > 0:
            radii.append(rng.uniform(0.0, lo, n_samples // 2) * (1 - 1e-12))
        if np.isfinite(hi):
            radii.append(hi * (1 + 1e-12) + rng.exponential(hi, n_samples - n_samples // 2))
        if not radii:
            return True
        r = np.concatenate(radii)
        d = rng.normal(size=(len(r), dim))
        d /= np.linalg.norm(d, axis=1)[:, None]
        vals = self(d * r[:, None])
        return bool(np.all(np.abs(vals) <= rel_tol))


@dataclass(frozen=True, eq=False)
class VectorField:
    """Ambient-valued vector field on a mesh, stored per face corner.

    ``corners`` has shape ``(nf, 3, 3)``: face, corner, component.  Each face
    carries the linear interpolant of its corner values, so per-vertex
    (continuous PL), per-face (piecewise constant) and sampled callables share
    one representation.
    """

    corners: np.ndarray
    kind: str = "per_vertex"
    tangent: bool = False

    @classmethod
    def from_vertex(cls, mesh, values, tangent=False) -> VectorField:
        v = np.asarray(values, dtype=float)
        if v.shape != mesh.vertices.shape:
            raise FieldSizeMismatch(f"vertex vector field shape {v.shape} != {mesh.vertices.shape}")
        return cls(v[mesh.triangles], "per_vertex", tangent)

    @classmethod
    def from_face(cls, mesh, values, tangent=False) -> VectorField:
        v = np.asarray(values, dtype=float)
        if v.shape != (len(mesh.triangles), 3):
            raise FieldSizeMismatch(f"face vector field shape {v.shape} != ({len(mesh.triangles)}, 3)")
        return cls(np.repeat(v[:, None, :], 3, axis=1), "per_face", tangent)

    @classmethod
    def from_callable(cls, mesh, func, tangent=False) -> VectorField:
        return cls.from_vertex(mesh, func(mesh.vertices), tangent)._replace_kind("callable")

    def _replace_kind(self, kind):
        return VectorField(self.corners, kind, self.tangent)

    def face_values(self) -> np.ndarray:
        """Value at face barycenters, shape (nf, 3)."""
        return self.corners.mean(axis=1)

    def vertex_values(self, mesh) -> np.ndarray:
        """Area-weighted average of corner values at each vertex."""
        w = np.repeat(mesh.per_face_area, 3)
        acc = np.zeros((len(mesh.vertices), 3))
        np.add.at(acc, mesh.triangles.ravel(), self.corners.reshape(-1, 3) * w[:, None])
        return acc / (3.0 * mesh.per_vertex_area)[:, None]

    def scaled(self, mesh, phi) -> VectorField:
        """Product with a per-vertex scalar (evaluated at the corners)."""
        phi = mesh.vertex_field(phi)
        return VectorField(self.corners * phi[mesh.triangles][:, :, None], self.kind, self.tangent)

    def check_tangency(self, mesh, rel_tol: float = 1e-10) -> bool:
        """Check ``Z . nu = 0`` at corners against the vertex normals."""
        nu = mesh.per_vertex_normal[mesh.triangles]
        dot = np.abs(np.einsum("fkc,fkc->fk", self.corners, nu))
        mag = np.linalg.norm(self.corners, axis=2)
        return bool(np.all(dot <= rel_tol * np.maximum(mag, 1e-300)))
