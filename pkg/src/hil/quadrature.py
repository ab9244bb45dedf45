"""Weighted integration over meshes and revolution profiles.

Every Hardy-type term carries a weight ``|x|^(-a)``.  Two policies keep the
origin under control:

``exclusion(delta)``
    quadrature nodes with ``|x| < delta`` are dropped; the density must
    already vanish there.
``regularization(eps)``
    the weight becomes ``(|x|^2 + eps^2)^(-a/2)``.

Reductions go through :func:`psum`, a fixed-order pairwise sum, so results
are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    BadSpec,
    ExponentOutOfRange,
    SingularIntegrand,
    SingularityUnprotected,
)

# Symmetric triangle rules (Dunavant), barycentric points and weights summing to 1.
_D4_A = (0.445948490915965, 0.108103018168070, 0.223381589678011)
_D4_B = (0.091576213509771, 0.816847572980459, 0.109951743655322)
_D6_A = (0.249286745170910, 0.501426509658179, 0.116786275726379)
_D6_B = (0.063089014491502, 0.873821971016996, 0.050844906370207)
_D6_C = (0.310352451033784, 0.636502499121399, 0.053145049844817, 0.082851075618374)


def _orbit3(a, b, w):
    return [(a, a, b), (a, b, a), (b, a, a)], [w] * 3


def _orbit6(a, b, c, w):
    pts = [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]
    return pts, [w] * 6


@lru_cache(maxsize=None)
def triangle_rule(degree: int):
    """Barycentric points (q, 3) and weights (q,) exact to the given degree."""
    if degree == 2:
        p, w = _orbit3(1 / 6, 2 / 3, 1 / 3)
    elif degree == 4:
        p1, w1 = _orbit3(*_D4_A)
        p2, w2 = _orbit3(*_D4_B)
        p, w = p1 + p2, w1 + w2
    elif degree == 6:
        p1, w1 = _orbit3(*_D6_A)
        p2, w2 = _orbit3(*_D6_B)
        p3, w3 = _orbit6(*_D6_C)
        p, w = p1 + p2 + p3, w1 + w2 + w3
    else:
        raise BadSpec(f"triangle rule degree must be 2, 4 or 6, got {degree}")
    pts = np.array(p, dtype=float)
    wts = np.array(w, dtype=float)
    return pts / pts.sum(1, keepdims=True), wts / wts.sum()


def psum(x) -> float:
    """Deterministic pairwise sum of all entries."""
    return float(np.sum(np.ascontiguousarray(x, dtype=np.float64).ravel()))


@dataclass(frozen=True)
class QuadratureSpec:
    """Discretization settings, serialized into every report."""

    mesh_degree: int = 4
    profile_panels: int = 96
    profile_order: int = 12
    policy: str | None = None
    delta: float = 0.0
    summation: str = "pairwise"

    def __post_init__(self):
        if self.mesh_degree not in (2, 4, 6):
            raise BadSpec("mesh_degree must be 2, 4 or 6")
        if self.policy not in (None, "exclusion", "regularization"):
            raise BadSpec(f"unknown singular policy {self.policy!r}")
        if self.policy is not None and not self.delta > 0:
            raise BadSpec("singular policy needs a positive radius")
        if self.profile_panels < 1 or self.profile_order < 2:
            raise BadSpec("profile rule needs >= 1 panel and order >= 2")

    def to_dict(self) -> dict:
        return asdict(self)

    def with_policy(self, policy, delta) -> QuadratureSpec:
        return QuadratureSpec(self.mesh_degree, self.profile_panels, self.profile_order,
                              policy, float(delta), self.summation)

    @classmethod
    def parse(cls, text: str | None) -> QuadratureSpec:
        """Parse ``"degree=6,panels=128,order=12,exclusion=1e-3"``."""
        if not text:
            return cls()
        kw = {}
        for item in text.split(","):
            if not item.strip():
                continue
            if "=" not in item:
                raise BadSpec(f"bad quadrature item {item!r}")
            k, v = (s.strip() for s in item.split("=", 1))
            if k == "degree":
                kw["mesh_degree"] = int(v)
            elif k == "panels":
                kw["profile_panels"] = int(v)
            elif k == "order":
                kw["profile_order"] = int(v)
            elif k in ("exclusion", "regularization"):
                kw["policy"] = k
                kw["delta"] = float(v)
            else:
                raise BadSpec(f"unknown quadrature key {k!r}")
        return cls(**kw)


# --- mesh nodes ------------------------------------------------------------
class MeshNodes:
    """Quadrature nodes of a triangle rule laid over every face."""

    def __init__(self, mesh, degree: int):
        import scipy.sparse as sp

        bary, w = triangle_rule(degree)
        nf = len(mesh.triangles)
        q = len(w)
        x = mesh.vertices[mesh.triangles]  # (nf, 3, 3)
        self.q = q
        self.face = np.repeat(np.arange(nf), q)
        self.bary = np.tile(bary, (nf, 1))
        self.points = np.einsum("qk,fkc->fqc", bary, x).reshape(-1, 3)
        self.weights = (mesh.per_face_area[:, None] * w[None, :]).ravel()
        rows = np.repeat(np.arange(nf * q), 3)
        cols = np.repeat(mesh.triangles, q, axis=0).ravel()
        self.interp = sp.csr_matrix((self.bary.ravel(), (rows, cols)), shape=(nf * q, len(mesh.vertices)))
        self.radius = np.linalg.norm(self.points, axis=1)
        edge = np.linalg.norm(x - np.roll(x, 1, axis=1), axis=2).max(axis=1)
        # a node is "near" the origin when it is closer than its own face size
        self.face_size = np.repeat(edge, q)


def mesh_nodes(mesh, degree: int) -> MeshNodes:
    cache = mesh.__dict__.setdefault("_node_cache", {})
    if degree not in cache:
        cache[degree] = MeshNodes(mesh, degree)
    return cache[degree]


# --- profile nodes ---------------------------------------------------------
@lru_cache(maxsize=None)
def gauss_legendre(order: int):
    return np.polynomial.legendre.leggauss(order)


def composite_gauss(edges, order: int):
    """Nodes and weights of composite Gauss-Legendre over panel ``edges``."""
    x, w = gauss_legendre(order)
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) / 2 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def check_exponent(a: float, n: int) -> None:
    if not (0.0 <= a < n):
        raise ExponentOutOfRange(f"weight exponent a = {a} must lie in [0, n) with n = {n}")


def radial_weight(radius, a: float, spec: QuadratureSpec):
    """``|x|^(-a)`` under the active singular policy; zero inside an exclusion."""
    if a == 0:
        w = np.ones_like(radius)
    elif spec.policy == "regularization":
        w = (radius**2 + spec.delta**2) ** (-a / 2)
    else:
        with np.errstate(divide="ignore"):
            w = np.where(radius > 0, radius, np.inf) ** (-a)
    if spec.policy == "exclusion":
        w = np.where(radius < spec.delta, 0.0, w)
    return w


def exclusion_mask(radius, spec: QuadratureSpec):
    if spec.policy == "exclusion":
        return radius < spec.delta
    return np.zeros(radius.shape, dtype=bool)


def guard_density(density, radius, a, spec, near_radius, *, surface_kind, n=2):
    """Raise when a singular weight meets a density that does not vanish.

    ``near_radius`` (scalar or per node) is the distance to the origin under
    which the weight is considered unresolved by the plain rule.
    """
    scale = max(float(np.max(np.abs(density))) if density.size else 0.0, 1e-300)
    nonzero = np.abs(density) > 1e-14 * scale
    if a >= n and np.any(nonzero & (radius < max(near_radius, spec.delta) if np.isscalar(near_radius)
                                    else radius < np.maximum(near_radius, spec.delta))):
        raise ExponentOutOfRange(
            f"weight exponent a = {a:g} >= n = {n} with a density that reaches the origin; "
            "the integral may diverge"
        )
    if spec.policy == "exclusion":
        if np.any(nonzero & (radius < spec.delta)):
            raise SingularityUnprotected(
                f"density does not vanish inside the exclusion radius {spec.delta:g}"
            )
        return
    if a == 0 or spec.policy == "regularization":
        return
    if np.any(nonzero & (radius < near_radius)):
        if surface_kind == "revolution":
            if a > n - 1:
                raise SingularIntegrand(
                    f"reduced integrand ~ |x|^{n - 1 - a:g} is unbounded at the origin; "
                    "activate exclusion or regularization"
                )
            return
        raise SingularityUnprotected(
            "weight |x|^-a with a > 0 meets a density that is nonzero near the origin; "
            "activate exclusion or regularization"
        )


def integrate(surface, density, weight_exponent: float = 0.0, spec: QuadratureSpec | None = None) -> dict:
    """Integrate ``density / |x|^a`` over a mesh or a revolution hypersurface.

    Parameters
    ----------
    surface : SimplicialHypersurface or RevolutionHypersurface
    density : callable or array
        Mesh: callable of ambient points (N, 3), per-vertex array (linearly
        interpolated) or per-face array.  Revolution: callable of the profile
        parameter ``t`` (rotationally symmetric data only).
    weight_exponent : float
        ``a`` in ``[0, n)``.
    spec : QuadratureSpec

    Returns
    -------
    dict with ``value`` and ``error_estimate``.
    """
    from .revolution import RevolutionHypersurface

    spec = spec or QuadratureSpec()
    a = float(weight_exponent)
    if a < 0:
        check_exponent(a, surface.n)
    # a >= n is accepted only for densities vanishing near the origin (checked per node)
    if isinstance(surface, RevolutionHypersurface):
        return _integrate_profile(surface, density, a, spec)
    return _integrate_mesh(surface, density, a, spec)


def _mesh_density(mesh, nodes, density):
    if callable(density):
        return np.asarray(density(nodes.points), dtype=float)
    d = np.asarray(density, dtype=float)
    if d.shape == (len(mesh.vertices),):
        return nodes.interp @ d
    if d.shape == (len(mesh.triangles),):
        return d[nodes.face]
    from .errors import FieldSizeMismatch

    raise FieldSizeMismatch(f"density of shape {d.shape} matches neither vertices nor faces")


def _integrate_mesh(mesh, density, a, spec):
    values = []
    degrees = [spec.mesh_degree, {2: 4, 4: 6, 6: 4}[spec.mesh_degree]]
    for deg in degrees:
        nodes = mesh_nodes(mesh, deg)
        dens = _mesh_density(mesh, nodes, density)
        guard_density(dens, nodes.radius, a, spec, nodes.face_size, surface_kind="mesh", n=mesh.n)
        w = radial_weight(nodes.radius, a, spec)
        values.append(psum(nodes.weights * w * dens))
    return {"value": values[0], "error_estimate": abs(values[0] - values[1])}


def _integrate_profile(R, density, a, spec):
    values = []
    for order in (spec.profile_order, max(2, spec.profile_order - 4)):
        t, wt = R.nodes(spec.profile_panels, order)
        dens = np.asarray(density(t), dtype=float) * np.ones_like(t)
        rad = R.radius(t)
        guard_density(dens, rad, a, spec, 1e-3 * R.diameter, surface_kind="revolution", n=R.n)
        w = radial_weight(rad, a, spec)
        values.append(psum(wt * R.area_element(t) * w * dens))
    return {"value": values[0], "error_estimate": abs(values[0] - values[1])}
