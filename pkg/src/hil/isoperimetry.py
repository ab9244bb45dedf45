"""Regions, perimeters and the isoperimetric monotonicity argument.

A region on a mesh is a subset of faces; on a revolution hypersurface it is
a union of profile intervals ``t in [ta, tb]``.  Intersections with an
ambient ball ``B_rho(y)`` are computed exactly on meshes: each face plane
cuts the ball in a disk, and triangle/disk areas and arc lengths have
closed forms.

On revolution hypersurfaces ball centers must lie on the symmetry axis so
that ``E cap B_rho(y)`` stays rotationally symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import pi

import numpy as np
from scipy.optimize import brentq

from .calculus import region_boundary
from .errors import BadSpec, EmptyIntersection, NotFlat, TouchesBoundary
from .inequalities import InequalityReport, _surface_info
from .mesh import SimplicialHypersurface
from .quadrature import composite_gauss, psum
from .revolution import RevolutionHypersurface, ball_volume, sphere_measure
from .specs import eval_expr, point_variables

FLAT_TOL = 1e-6
JITTER = 1e-9
EMPTY_REL = 1e-12


# --- region selection --------------------------------------------------------------
@dataclass
class RegionSelection:
    """A region ``E`` with its measures.

    ``faces`` is a boolean face mask (mesh) and ``intervals`` a list of
    profile intervals (revolution); the unused one is ``None``.
    """

    surface: object
    faces: np.ndarray | None
    intervals: list | None
    area: float
    perimeter: float
    curvature_mass: float
    boundary_edges: np.ndarray | None = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {"area": self.area, "perimeter": self.perimeter, "curvature_mass": self.curvature_mass}


def parse_region(M: SimplicialHypersurface, E) -> np.ndarray:
    """Face mask from a mask, an index list, a predicate string or a file path.

    Predicates are evaluated at face centroids: ``"x3>0"``, ``"|x|<1"`` or
    ``"|x-(0,0,1)|<0.5"``.  A path names a file of face indices (whitespace
    or JSON list).
    """
    nf = len(M.triangles)
    if isinstance(E, str):
        text = E.strip()
        if text.endswith((".txt", ".json", ".idx")):
            import json
            from pathlib import Path

            raw = Path(text).read_text()
            idx = json.loads(raw) if raw.lstrip().startswith("[") else [int(s) for s in raw.split()]
            return parse_region(M, np.asarray(idx, dtype=np.int64))
        cent = M.vertices[M.triangles].mean(1)
        mask = _ball_predicate(text, cent)
        if mask is None:
            mask = np.asarray(eval_expr(text, point_variables(cent)), dtype=bool)
        return np.broadcast_to(mask, (nf,)).copy()
    arr = np.asarray(E)
    if arr.dtype == bool:
        if arr.shape != (nf,):
            raise BadSpec("face mask has the wrong length")
        return arr.copy()
    mask = np.zeros(nf, dtype=bool)
    mask[arr.astype(np.int64)] = True
    return mask


def _ball_predicate(text, pts):
    import re

    s = text.replace(" ", "")
    m = re.fullmatch(r"\|x(?:-\(([^)]*)\))?\|<([-+0-9.eE]+)", s)
    if not m:
        return None
    y = np.zeros(pts.shape[1]) if m.group(1) is None else np.array([float(v) for v in m.group(1).split(",")])
    return np.linalg.norm(pts - y, axis=1) < float(m.group(2))


def _mesh_region(M, E) -> RegionSelection:
    mask = parse_region(M, E)
    if np.any(M.boundary_vertex[M.triangles[mask]]):
        raise TouchesBoundary("region touches the boundary of the mesh")
    edges, _, _ = region_boundary(M, mask)
    x = M.vertices
    per = float(np.sum(np.linalg.norm(x[edges[:, 1]] - x[edges[:, 0]], axis=1)))
    absH = np.abs(M.H_or_zero)[M.triangles].mean(1)
    A = M.per_face_area
    return RegionSelection(M, mask, None, psum(A[mask]), per, psum((A * absH)[mask]), edges)


def _revolution_region(R, E) -> RegionSelection:
    if E is None:
        E = (R.t0, R.t1)
    ivs = [E] if np.ndim(E) == 1 else list(E)
    ivs = [(max(float(a), R.t0), min(float(b), R.t1)) for a, b in ivs]
    if any(a >= b for a, b in ivs):
        raise BadSpec("empty profile interval in region")
    for a, b in ivs:
        for t, on_axis in zip((R.t0, R.t1), R.axis_ends):
            if not on_axis and (abs(a - t) < 1e-12 or abs(b - t) < 1e-12):
                raise TouchesBoundary("region reaches a boundary end of the profile")
    area, mass = _profile_integrals(R, ivs)
    per = sum(_slice_measure(R, t) for iv in ivs for t in iv)
    return RegionSelection(R, None, ivs, area, per, mass)


def region_measures(M, E=None) -> dict:
    """``{area, perimeter, curvature_mass}`` of a region.

    Parameters
    ----------
    M : SimplicialHypersurface or RevolutionHypersurface
    E : region
        Mesh: face mask, face indices, predicate string or index file.
        Revolution: a profile interval ``(ta, tb)`` or a list of them
        (default: the whole profile).

    Raises
    ------
    TouchesBoundary
        If the region reaches the boundary of the surface.
    """
    return select_region(M, E).as_dict()


def select_region(M, E=None) -> RegionSelection:
    if isinstance(M, RevolutionHypersurface):
        return _revolution_region(M, E)
    return _mesh_region(M, E if E is not None else np.ones(len(M.triangles), dtype=bool))


# --- revolution helpers -------------------------------------------------------------
def _slice_measure(R, t) -> float:
    """Measure of the (n-1)-sphere swept by profile point t (0 on the axis)."""
    r = float(R.r(np.array([t]))[0])
    return sphere_measure(R.n - 1) * r ** (R.n - 1) if r > 1e-14 else 0.0


def _profile_integrals(R, ivs, order=16, panels=64):
    area = mass = 0.0
    for a, b in ivs:
        edges = R.panel_edges(panels)
        edges = np.unique(np.clip(np.concatenate([edges, [a, b]]), a, b))
        t, w = composite_gauss(edges, order)
        dv = w * R.area_element(t)
        area += psum(dv)
        mass += psum(dv * np.abs(R.mean_curvature(t)))
    return area, mass


def _axis_point(R, y) -> float:
    y = np.asarray(y, dtype=float).ravel()
    if len(y) != R.n + 1 or np.any(np.abs(y[:-1]) > 1e-12):
        raise BadSpec("ball centers on revolution surfaces must lie on the symmetry axis")
    return float(y[-1])


def _revolution_ball(R, sel: RegionSelection, zy: float, rho: float) -> dict:
    def dist(t):
        return np.hypot(R.r(t), R.z(t) - zy)

    area = mass = per = bnd = 0.0
    pieces = []
    for a, b in sel.intervals:
        tt = np.linspace(a, b, 2049)
        f = dist(tt) - rho
        roots = [brentq(lambda s: float(dist(np.array([s]))[0] - rho), tt[i], tt[i + 1], xtol=1e-15)
                 for i in np.flatnonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)]
        cuts = [a, *roots, b]
        for u, v in zip(cuts[:-1], cuts[1:]):
            mid = 0.5 * (u + v)
            if dist(np.array([mid]))[0] < rho:
                pieces.append((u, v))
        for t in (a, b):
            if dist(np.array([t]))[0] < rho:
                bnd += _slice_measure(R, t)
    if pieces:
        area, mass = _profile_integrals(R, pieces)
        per = sum(_slice_measure(R, t) for iv in pieces for t in iv)
    return {"area": area, "perimeter": per, "curvature_mass": mass, "boundary_in_ball": bnd,
            "crossings": 0}


# --- exact triangle / ball geometry ----------------------------------------------------
def _segment_disk_area(a, b, R):
    """Signed area of triangle (0, a, b) intersected with the disk |p| < R."""
    d = b - a
    A = d @ d
    B = 2 * (a @ d)
    C = a @ a - R * R
    disc = B * B - 4 * A * C
    cuts = [0.0, 1.0]
    if disc > 0:
        sq = np.sqrt(disc)
        cuts += [s for s in ((-B - sq) / (2 * A), (-B + sq) / (2 * A)) if 0 < s < 1]
    cuts = sorted(cuts)
    total = 0.0
    for s0, s1 in zip(cuts[:-1], cuts[1:]):
        u, v = a + s0 * d, a + s1 * d
        m = 0.5 * (u + v)
        cr = u[0] * v[1] - u[1] * v[0]
        if m @ m <= R * R:
            total += 0.5 * cr
        else:
            total += 0.5 * R * R * np.arctan2(cr, u @ v)
    return total


def _inside_tri(p, P):
    s = [(P[(k + 1) % 3] - P[k])[0] * (p - P[k])[1] - (P[(k + 1) % 3] - P[k])[1] * (p - P[k])[0]
         for k in range(3)]
    return all(v >= 0 for v in s) or all(v <= 0 for v in s)


def _arc_in_triangle(P, R):
    """Length of the circle |p| = R lying inside the planar triangle P (3, 2)."""
    angles = []
    for k in range(3):
        a, b = P[k], P[(k + 1) % 3]
        d = b - a
        A, B, C = d @ d, 2 * (a @ d), a @ a - R * R
        disc = B * B - 4 * A * C
        if disc > 0:
            sq = np.sqrt(disc)
            for s in ((-B - sq) / (2 * A), (-B + sq) / (2 * A)):
                if 0 <= s <= 1:
                    q = a + s * d
                    angles.append(np.arctan2(q[1], q[0]))
    if not angles:
        return 2 * pi * R if _inside_tri(np.array([R, 0.0]), P) else 0.0
    angles = np.sort(np.mod(angles, 2 * pi))
    ext = np.append(angles, angles[0] + 2 * pi)
    total = 0.0
    for t0, t1 in zip(ext[:-1], ext[1:]):
        if t1 - t0 <= 1e-15:
            continue
        tm = 0.5 * (t0 + t1)
        if _inside_tri(R * np.array([np.cos(tm), np.sin(tm)]), P):
            total += R * (t1 - t0)
    return total


def _face_ball(P3, nrm, y, rho):
    """Clipped area and in-face arc length of face ``P3`` against ``B_rho(y)``."""
    d = float((y - P3[0]) @ nrm)
    if abs(d) >= rho:
        return 0.0, 0.0
    c = y - d * nrm
    R = np.sqrt(rho * rho - d * d)
    e1 = P3[1] - P3[0]
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(nrm, e1)
    P = np.stack([[(p - c) @ e1, (p - c) @ e2] for p in P3])
    area = abs(sum(_segment_disk_area(P[k], P[(k + 1) % 3], R) for k in range(3)))
    return area, _arc_in_triangle(P, R)


def _segment_ball_length(p, q, y, rho):
    d = q - p
    A, B, C = d @ d, 2 * ((p - y) @ d), (p - y) @ (p - y) - rho * rho
    disc = B * B - 4 * A * C
    if disc <= 0:
        return 0.0
    sq = np.sqrt(disc)
    s0, s1 = max(0.0, (-B - sq) / (2 * A)), min(1.0, (-B + sq) / (2 * A))
    return max(0.0, s1 - s0) * np.sqrt(A)


def _mesh_ball(M, sel: RegionSelection, y, rho) -> dict:
    x = M.vertices
    tri = M.triangles
    faces = np.flatnonzero(sel.faces)
    dv = np.linalg.norm(x[tri[faces]] - y, axis=2)
    inside = np.all(dv < rho, axis=1)
    absH = np.abs(M.H_or_zero)[tri].mean(1)
    area = psum(M.per_face_area[faces[inside]])
    mass = psum((M.per_face_area * absH)[faces[inside]])
    arc = 0.0
    crossings = 0
    maybe = ~inside & (dv.min(axis=1) < rho + M.max_edge_length)
    for f in faces[maybe]:
        a, L = _face_ball(x[tri[f]], M.face_normal[f], y, rho)
        if a > 0:
            crossings += 1
        area += a
        mass += a * absH[f]
        arc += L
    bnd = 0.0
    for i, j in sel.boundary_edges:
        bnd += _segment_ball_length(x[i], x[j], y, rho)
    return {"area": area, "perimeter": arc + bnd, "curvature_mass": mass,
            "boundary_in_ball": bnd, "crossings": crossings}


def ball_measures(M, E, y, rho) -> dict:
    """Measures of ``E_rho = E cap B_rho(y)``.

    Returns ``area``, ``perimeter`` (ball boundary inside ``E`` plus ``dE``
    inside the ball), ``curvature_mass``, ``boundary_in_ball`` (``|dE cap
    B_rho|``) and ``crossings`` (faces cut by the sphere, a resolution flag).
    """
    sel = E if isinstance(E, RegionSelection) else select_region(M, E)
    if isinstance(M, RevolutionHypersurface):
        return _revolution_ball(M, sel, _axis_point(M, y), float(rho))
    return _mesh_ball(M, sel, np.asarray(y, dtype=float), float(rho))


# --- inequalities -------------------------------------------------------------------
def _max_abs_H(M, sel):
    if isinstance(M, RevolutionHypersurface):
        t = np.concatenate([np.linspace(a, b, 513) for a, b in sel.intervals])
        return float(np.max(np.abs(M.mean_curvature(t))))
    v = np.unique(M.triangles[sel.faces])
    return float(np.max(np.abs(M.H_or_zero[v]))) if v.size else 0.0


def regular_polygon_measures(m: int, R: float = 1.0) -> dict:
    """Area and perimeter of the regular m-gon inscribed in a circle of radius R."""
    return {"area": 0.5 * m * R * R * np.sin(2 * pi / m), "perimeter": 2 * m * R * np.sin(pi / m)}


def eval_isoperimetric(M, E=None, mode: str = "global", y=None, rho=None) -> InequalityReport:
    """Isoperimetric-type inequalities for a region ``E``.

    ``mode="global"``
        ``|E|^((n-1)/n)`` against ``Per(E) + int_E |H|``; the constant is not
        explicit, so the report logs the empirical ratio.
    ``mode="ball"``
        ``n |E_rho| <= rho (Per(E_rho) + int_{E_rho} |H|)`` with
        ``E_rho = E cap B_rho(y)``; pass/fail applies.
    ``mode="flat_equality"``
        ``n omega_n^(1/n) |E|^((n-1)/n) <= Per(E)`` on flat surfaces, with
        equality for round disks.

    Raises
    ------
    TouchesBoundary, NotFlat, BadSpec
    """
    sel = E if isinstance(E, RegionSelection) else select_region(M, E)
    n = M.n
    notes = []
    if mode == "global":
        lhs = sel.area ** ((n - 1) / n)
        lhs_t = {"area_power": lhs}
        rhs_t = {"perimeter_term": sel.perimeter, "curvature_term": sel.curvature_mass}
        verdict = "empirical"
        params = {}
        notes.append("constant not explicit: ratio is an empirical lower bound for C")
    elif mode == "ball":
        if y is None or rho is None:
            raise BadSpec("ball mode needs a center y and a radius rho")
        diam = M.diameter if isinstance(M, RevolutionHypersurface) else M.bbox_diagonal
        rho = float(rho) + JITTER * diam
        b = ball_measures(M, sel, y, rho)
        lhs = n * b["area"]
        lhs_t = {"area_term": lhs}
        rhs_t = {"perimeter_term": rho * b["perimeter"], "curvature_term": rho * b["curvature_mass"]}
        verdict = None
        params = {"rho": rho, "y": np.asarray(y, dtype=float).tolist(), "crossings": b["crossings"]}
    elif mode == "flat_equality":
        hmax = _max_abs_H(M, sel)
        if hmax > FLAT_TOL:
            raise NotFlat(f"max |H| = {hmax:.3g} exceeds {FLAT_TOL:g}")
        lhs = n * ball_volume(n) ** (1 / n) * sel.area ** ((n - 1) / n)
        lhs_t = {"isoperimetric_term": lhs}
        rhs_t = {"perimeter_term": sel.perimeter}
        verdict = None
        params = {}
    else:
        raise BadSpec(f"unknown isoperimetric mode {mode!r}")
    rhs = sum(rhs_t.values())
    scale = max(lhs, rhs)
    if isinstance(M, RevolutionHypersurface):
        tol = 1e-10 * scale
    else:
        h = M.max_edge_length
        tol = 1e-10 * scale if mode == "flat_equality" else (h / max(np.sqrt(sel.area), h)) ** 2 * scale
        notes.append("mesh path: verified up to the reported discretization tolerance")
    if verdict is None:
        verdict = "pass" if rhs - lhs >= -tol else "fail"
    return InequalityReport(
        name=f"isoperimetric_{mode}", params={"n": n, **params}, lhs=float(lhs), rhs=float(rhs),
        terms={"lhs": lhs_t, "rhs": rhs_t}, factors=sel.as_dict(), tolerance=float(tol),
        verdict=verdict, surface=_surface_info(M), notes=notes,
    )


@dataclass
class MonotonicityProfile:
    rho: np.ndarray
    values: np.ndarray
    area: np.ndarray
    integrand: np.ndarray
    min_forward_difference: float
    limit_estimate: float
    crossings: np.ndarray

    def to_dict(self) -> dict:
        return {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self.__dict__.items()}


def monotonicity_profile(M, E, y, rho_grid) -> MonotonicityProfile:
    """The quantity ``rho^-n |E_rho| exp(int_0^rho (|dE cap B_s| + int_{E_s}|H|)/|E_s| ds)``.

    It is nondecreasing in ``rho`` and tends to ``omega_n`` as ``rho -> 0``
    at interior points.  The ``ds`` integral uses the trapezoid rule on the
    grid, with the integrand held constant on ``[0, rho_grid[0]]``.  Grid
    radii are jittered by ``1e-9 * diam`` to avoid tangencies.

    Raises
    ------
    EmptyIntersection
        If ``E_rho`` has zero measure at some grid radius.
    """
    sel = E if isinstance(E, RegionSelection) else select_region(M, E)
    diam = M.diameter if isinstance(M, RevolutionHypersurface) else M.bbox_diagonal
    rho = np.asarray(rho_grid, dtype=float) + JITTER * diam
    if np.any(np.diff(rho) <= 0) or rho[0] <= 0:
        raise BadSpec("rho_grid must be positive and increasing")
    n = M.n
    A, G, X = np.empty_like(rho), np.empty_like(rho), np.zeros(len(rho), dtype=int)
    for k, r in enumerate(rho):
        b = ball_measures(M, sel, y, r)
        if b["area"] <= EMPTY_REL * r**n:  # roundoff of the exact clipping, not a real intersection
            raise EmptyIntersection(f"E cap B_rho(y) is empty at rho = {r:.3g}")
        A[k] = b["area"]
        G[k] = (b["boundary_in_ball"] + b["curvature_mass"]) / b["area"]
        X[k] = b["crossings"]
    integral = np.concatenate([[G[0] * rho[0]], G[0] * rho[0] + np.cumsum(0.5 * (G[1:] + G[:-1]) * np.diff(rho))])
    vals = rho ** (-n) * A * np.exp(integral)
    fwd = float(np.min(np.diff(vals))) if len(vals) > 1 else 0.0
    if len(vals) > 1:
        limit = float(vals[0] - rho[0] * (vals[1] - vals[0]) / (rho[1] - rho[0]))
    else:
        limit = float(vals[0])
    return MonotonicityProfile(rho, vals, A, G, fwd, limit, X)
