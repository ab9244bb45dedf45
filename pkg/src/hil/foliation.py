"""Foliated Hardy inequality through level sets and the coarea formula.

Two paths are provided.

Grid path (ambient dimension 3, level sets of dimension ``n = 2``)
    ``u`` and ``phi`` are sampled on a uniform box grid.  The left-hand
    side is a direct volume sum.  The right-hand side slices ``u`` into
    level sets with marching cubes, integrates per level and accumulates in
    ``t``.  Mean curvature of the level sets is taken from the grid as
    ``div(grad u / |grad u|)``; tangential gradients come from the sliced
    meshes.

Radial path (any ``n``)
    ``u = |x|`` in ``R^(n+1)`` and radial ``phi``.  Level sets are round
    spheres, handled by the revolution evaluator one level at a time; the
    direct left-hand side is a one-dimensional integral.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import RegularGridInterpolator

from .corpus import cone, constant, ground_state_cutoff, log_cutoff, radial_bump
from .errors import (BadSpec, DegenerateLevel, ExponentOutOfRange, HILError, ParamOutOfRange,
                     SupportViolation)
from .fields import ScalarField
from .inequalities import InequalityReport, eval_hardy_ibp
from .mesh import SimplicialHypersurface, build_mesh
from .quadrature import composite_gauss, psum
from .revolution import make_revolution, sphere_measure
from .specs import eval_expr, parse_spec, point_variables

log = logging.getLogger(__name__)

SARD_REL = 1e-6
GRID_REL_TOL = 3e-2
RADIAL_REL_TOL = 1e-8


# --- grid files ---------------------------------------------------------------------
def save_grid(path, values, spacing, origin) -> None:
    """Write a grid file: one JSON header line, then raw little-endian float64 data."""
    arr = np.ascontiguousarray(values, dtype="<f8")
    header = {"dims": list(arr.shape), "spacing": float(spacing), "origin": [float(o) for o in origin]}
    with open(path, "wb") as fh:
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode())
        fh.write(arr.tobytes())


def load_grid(path) -> tuple[np.ndarray, dict]:
    """Read a grid file written by :func:`save_grid`; returns ``(values, header)``."""
    raw = Path(path).read_bytes()
    cut = raw.index(b"\n")
    header = json.loads(raw[:cut])
    for key in ("dims", "spacing", "origin"):
        if key not in header:
            raise BadSpec(f"grid header lacks {key!r}")
    dims = tuple(int(d) for d in header["dims"])
    data = np.frombuffer(raw[cut + 1:], dtype="<f8")
    if data.size != np.prod(dims):
        raise BadSpec(f"grid payload has {data.size} values, header says {dims}")
    return data.reshape(dims).astype(float), header


# --- inputs -------------------------------------------------------------------------
_RADIAL_FAMILIES = {
    "radial_bump": lambda p, n: radial_bump(p.get("delta", 0.25), p.get("R", 0.75)),
    "cone": lambda p, n: cone(p.get("R", 1.0)),
    "constant": lambda p, n: constant(p.get("value", 1.0)),
    "log_cutoff": lambda p, n: log_cutoff(p.get("eps", 1e-2), p.get("R", 1.0), n, p.get("p", 2.0)),
    "ground_state_cutoff": lambda p, n: ground_state_cutoff(p.get("eps", 1e-2), p.get("R", 1.0), n),
}


def as_field(phi, n: int = 2) -> ScalarField:
    """Turn a ScalarField, a callable, a family spec or an expression into a field."""
    if isinstance(phi, ScalarField):
        return phi
    if callable(phi):
        return ScalarField(kind="callable", func=phi, name=getattr(phi, "__name__", "callable"))
    if isinstance(phi, str):
        head = phi.partition(":")[0].strip()
        name, params = parse_spec(phi) if head in _RADIAL_FAMILIES or head == "expr" else (phi, {})
        if name in _RADIAL_FAMILIES:
            return _RADIAL_FAMILIES[name](params, n)
        text = params["f"] if name == "expr" else phi
        return ScalarField(kind="callable", func=lambda pts: eval_expr(text, point_variables(pts)),
                           name=f"expr({text})", meta={"family": "expr", "f": text})
    raise BadSpec(f"cannot interpret test function {phi!r}")


@dataclass
class FoliationProblem:
    """Inputs of a foliated Hardy check.

    Grid path: ``u`` is a sampled array, an expression in ``x1, x2, x3, r``,
    a callable of points or a grid file path; the box is
    ``origin + spacing * index``.  Radial path (``radial=True``): ``u = |x|``
    in ``R^(n+1)`` and ``phi`` must be radial.
    """

    u: object = "r"
    phi: object = "radial_bump:delta=0.5,R=1.5"
    p: float = 2.0
    a: float = 0.0
    spacing: float = 4.0 / 127
    origin: tuple = (-2.0, -2.0, -2.0)
    dims: tuple = (128, 128, 128)
    t_grid: np.ndarray | None = None
    levels: int = 64
    radial: bool = False
    n: int = 2
    meta: dict = field(default_factory=dict)

    @classmethod
    def box(cls, u, phi, N: int = 128, half_width: float = 2.0, **kw) -> FoliationProblem:
        """Cube ``[-L, L]^3`` sampled at ``N`` points per axis."""
        return cls(u=u, phi=phi, spacing=2 * half_width / (N - 1), origin=(-half_width,) * 3,
                   dims=(N, N, N), **kw)

    @classmethod
    def radial_problem(cls, n: int, phi, p: float = 2.0, a: float = 0.0) -> FoliationProblem:
        return cls(u="r", phi=phi, p=p, a=a, radial=True, n=n)

    def axes(self):
        return [self.origin[i] + self.spacing * np.arange(self.dims[i]) for i in range(3)]

    def field(self) -> ScalarField:
        return as_field(self.phi, self.n)


def _grid_points(axes):
    X = np.meshgrid(*axes, indexing="ij")
    return np.stack([x.ravel() for x in X], axis=1)


def _sample(obj, axes, shape, what):
    if isinstance(obj, np.ndarray):
        if obj.shape != shape:
            raise BadSpec(f"{what} grid has shape {obj.shape}, expected {shape}")
        return obj.astype(float)
    if isinstance(obj, (str, os.PathLike)) and Path(str(obj)).is_file():
        arr, _ = load_grid(obj)
        return _sample(arr, axes, shape, what)
    fld = as_field(obj)
    return fld(_grid_points(axes)).reshape(shape)


@dataclass
class _Grid:
    axes: list
    U: np.ndarray
    PHI: np.ndarray
    grad: np.ndarray
    H: np.ndarray
    h: float
    origin: np.ndarray

    @cached_property
    def _interp(self):
        stacked = np.concatenate([self.grad, self.H[None]]).transpose(1, 2, 3, 0)
        return RegularGridInterpolator(self.axes, stacked, bounds_error=False, fill_value=None)

    def at(self, points):
        """Trilinear ``(grad u, H)`` at points, shapes (N, 3) and (N,)."""
        v = self._interp(points)
        return v[:, :3], v[:, 3]


def _prepare(problem: FoliationProblem) -> _Grid:
    axes = problem.axes()
    shape = tuple(problem.dims)
    h = problem.spacing
    PHI = _sample(problem.phi, axes, shape, "phi")
    U = _sample(problem.u, axes, shape, "u")
    on = PHI != 0
    if not on.any():
        raise SupportViolation("phi vanishes on the whole grid")
    idx = np.argwhere(on)
    lo = np.maximum(idx.min(0) - 3, 0)
    hi = np.minimum(idx.max(0) + 4, np.array(shape))
    if np.any(idx.min(0) == 0) or np.any(idx.max(0) == np.array(shape) - 1):
        raise SupportViolation("phi does not vanish on the boundary of the box")
    sl = tuple(slice(a, b) for a, b in zip(lo, hi))
    axes = [ax[s] for ax, s in zip(axes, sl)]
    U, PHI = U[sl], PHI[sl]
    grad = np.stack(np.gradient(U, h))
    norm = np.linalg.norm(grad, axis=0)
    unit = grad / np.where(norm > 0, norm, 1.0)
    H = sum(np.gradient(unit[i], h, axis=i) for i in range(3))
    return _Grid(axes, U, PHI, grad, H, h, np.array([ax[0] for ax in axes]))


def _level_mesh(g: _Grid, t: float) -> SimplicialHypersurface | None:
    from skimage.measure import marching_cubes

    if not (g.U.min() < t < g.U.max()):
        return None
    verts, faces, _, _ = marching_cubes(g.U, level=t, spacing=(g.h,) * 3, allow_degenerate=False)
    verts = verts + g.origin
    cross = np.cross(verts[faces[:, 1]] - verts[faces[:, 0]], verts[faces[:, 2]] - verts[faces[:, 0]])
    keep = 0.5 * np.linalg.norm(cross, axis=1) > 1e-10 * g.h**2
    faces = faces[keep]
    if not len(faces):
        return None
    used, inv = np.unique(faces, return_inverse=True)
    verts, faces = verts[used], inv.reshape(-1, 3)
    grad = g.at(verts[faces].mean(1))[0]
    cross = cross[keep]
    if np.einsum("ij,ij->", cross, grad) < 0:
        faces = faces[:, ::-1]
    try:
        return build_mesh(verts, faces, orient_outward=False)
    except HILError as exc:
        raise DegenerateLevel(f"level {t:g}: {exc}") from None


def slice_levelsets(problem: FoliationProblem, levels=None) -> list:
    """Oriented triangle meshes of the level sets ``{u = t}``.

    Normals follow ``grad u / |grad u|``.  Levels whose mesh cannot be
    built are dropped and logged.  Returns a list of
    :class:`SimplicialHypersurface`, one per retained level.
    """
    if problem.radial:
        raise BadSpec("slicing needs the grid path")
    g = _prepare(problem)
    out = []
    for t in np.atleast_1d(levels if levels is not None else _t_grid(problem, g)):
        try:
            m = _level_mesh(g, float(t))
        except DegenerateLevel as exc:
            log.info("dropped %s", exc)
            continue
        if m is not None:
            out.append(m)
    return out


def _t_grid(problem, g):
    if problem.t_grid is not None:
        return np.asarray(problem.t_grid, dtype=float)
    vals = g.U[g.PHI != 0]
    return np.linspace(vals.min(), vals.max(), problem.levels)


def _level_integrals(g: _Grid, M: SimplicialHypersurface, fld, p, a, integrand=None):
    x = M.vertices
    phi = fld(x)
    rho = np.linalg.norm(x, axis=1)
    grad, H = g.at(x)
    gnorm = np.linalg.norm(grad, axis=1)
    on = phi != 0
    A = M.per_vertex_area
    safe = np.where(rho > 0, rho, 1.0)
    ap = np.abs(phi) ** p
    if integrand is not None:
        return {"custom": psum(A * integrand(x))}, gnorm[on]
    cos2 = (np.einsum("ij,ij->i", x, grad) / (safe * np.where(gnorm > 0, gnorm, 1.0))) ** 2
    P = psum(np.where(on, A * ap * safe**-a, 0.0))
    G = psum(np.where(on, A * cos2 * ap * safe**-a, 0.0))
    tri = M.triangles
    gT = (M.gradient_operator @ phi).reshape(-1, 3)
    phi_f = phi[tri].mean(1)
    H_f = H[tri].mean(1)
    rho_f = np.linalg.norm(x[tri].mean(1), axis=1)
    mix = (p * p * np.einsum("ij,ij->i", gT, gT) + H_f**2 * phi_f**2) ** (p / 2)
    Q = psum(np.where(mix > 0, M.per_face_area * mix * rho_f ** (p - a), 0.0))
    return {"P": P, "G": G, "Q": Q}, gnorm[on]


def _accumulate(problem, g, fld, integrand=None):
    ts = _t_grid(problem, g)
    scale = float(np.max(np.linalg.norm(g.grad, axis=0)[g.PHI != 0]))
    rows, dropped = [], []
    for t in ts:
        try:
            M = _level_mesh(g, float(t))
        except DegenerateLevel as exc:
            log.info("dropped %s", exc)
            dropped.append(float(t))
            rows.append(None)
            continue
        if M is None:
            rows.append(None)
            continue
        vals, gn = _level_integrals(g, M, fld, problem.p, problem.a, integrand)
        if gn.size and gn.min() < SARD_REL * scale:
            dropped.append(float(t))
            rows.append(None)
            continue
        rows.append(vals)
    keys = ["custom"] if integrand is not None else ["P", "G", "Q"]
    table = {k: np.array([r[k] if r else 0.0 for r in rows]) for k in keys}
    return ts, {k: float(simpson(v, x=ts)) for k, v in table.items()}, dropped


def coarea_consistency(problem: FoliationProblem, g_expr=None) -> dict:
    """Compare ``int |grad u| g dx`` with ``int dt int_{u=t} g dV`` on the grid.

    ``g`` defaults to ``phi**2``; ``g_expr`` may be an expression or callable
    and should vanish where ``phi`` does.
    """
    grid = _prepare(problem)
    fld = problem.field()
    gf = (lambda x: fld(x) ** 2) if g_expr is None else as_field(g_expr)
    pts = _grid_points(grid.axes)
    gv = gf(pts).reshape(grid.U.shape)
    volume = psum(grid.h**3 * np.linalg.norm(grid.grad, axis=0) * gv)
    _, acc, dropped = _accumulate(problem, grid, fld, integrand=gf)
    levels = acc["custom"]
    return {"volume": volume, "levels": levels,
            "relative_difference": abs(volume - levels) / max(abs(volume), 1e-300),
            "dropped_levels": dropped}


def _report(problem, lhs_t, rhs, factors, tol, notes, path):
    lhs = sum(lhs_t.values())
    return InequalityReport(
        name="foliated_hardy", params={"n": problem.n, "p": problem.p, "a": problem.a},
        lhs=float(lhs), rhs=float(rhs), terms={"lhs": lhs_t, "rhs": {"holder_product": float(rhs)}},
        factors=factors, tolerance=float(tol), verdict="pass" if rhs - lhs >= -tol else "fail",
        surface={"kind": f"foliation:{path}", "fingerprint": ""}, testfn=problem.field().name,
        notes=list(notes),
    )


def _eval_grid(problem: FoliationProblem) -> InequalityReport:
    if problem.n != 2:
        raise BadSpec("the grid path slices 3D boxes, so n = 2")
    p, a, n = problem.p, problem.a, 2
    g = _prepare(problem)
    fld = problem.field()
    pts = _grid_points(g.axes)
    rho = np.linalg.norm(pts, axis=1).reshape(g.U.shape)
    ap = np.abs(g.PHI) ** p
    gnorm = np.linalg.norm(g.grad, axis=0)
    on = ap > 0
    w = np.where(on, ap / np.where(rho > 0, rho, 1.0) ** a, 0.0) * g.h**3
    ur = np.einsum("i...,i...->...", g.grad, np.stack([c.reshape(g.U.shape) for c in pts.T])) \
        / np.where(rho > 0, rho, 1.0)
    lhs_t = {"hardy_term": (n - a) * psum(gnorm * w),
             "geometric_term": a * psum(np.where(on, ur**2 / np.where(gnorm > 0, gnorm, 1.0), 0.0) * w)}
    ts, acc, dropped = _accumulate(problem, g, fld)
    rhs = acc["P"] ** ((p - 1) / p) * acc["Q"] ** (1 / p)
    factors = {"level_weighted_lp": acc["P"], "level_geometric": acc["G"],
               "level_gradient_curvature": acc["Q"],
               "level_lhs": (n - a) * acc["P"] + a * acc["G"],
               "volume_weighted_lp": psum(gnorm * w),
               "levels_used": len(ts) - len(dropped), "levels_dropped": dropped}
    tol = GRID_REL_TOL * max(sum(lhs_t.values()), rhs)
    notes = ["grid path: level-set H from div(grad u/|grad u|) on the grid"]
    if dropped:
        notes.append(f"{len(dropped)} levels dropped (|grad u| below {SARD_REL:g} of its maximum)")
    return _report(problem, lhs_t, rhs, factors, tol, notes, "grid")


def _eval_radial(problem: FoliationProblem, panels: int = 8, order: int = 12) -> InequalityReport:
    n, p, a = problem.n, problem.p, problem.a
    if str(problem.u).replace(" ", "") not in ("r", "|x|"):
        raise BadSpec("the radial path supports u = |x| only")
    fld = problem.field()
    if not fld.is_radial:
        raise BadSpec("the radial path needs a radial phi")
    s0, s1 = fld.support
    if not (0 < s0 < s1 < np.inf):
        raise SupportViolation("the radial path needs phi supported in an annulus 0 < r0 < r1")
    inner = [b for b in fld.breakpoints if s0 < b < s1]
    edges = np.unique(np.concatenate([np.linspace(s0, s1, panels + 1), inner]))
    t, wt = composite_gauss(edges, order)
    f = fld.radial[0](t)
    P, G, Q = np.empty_like(t), np.empty_like(t), np.empty_like(t)
    for k, (tk, fk) in enumerate(zip(t, f)):
        S = make_revolution({"kind": "sphere", "R": float(tk)}, n)
        rep = eval_hardy_ibp(S, constant(float(fk)), p=p, a=a)
        P[k], G[k], Q[k] = (rep.factors[key] for key in ("weighted_lp", "geometric_integral",
                                                         "gradient_curvature_integral"))
    # direct side: u = |x| has |grad u| = u_r = 1 and dx = |S^n| t^n dt
    shell = sphere_measure(n) * t**n * np.abs(f) ** p * t**-a
    lhs_t = {"hardy_term": (n - a) * psum(wt * shell), "geometric_term": a * psum(wt * shell)}
    IP, IG, IQ = psum(wt * P), psum(wt * G), psum(wt * Q)
    rhs = IP ** ((p - 1) / p) * IQ ** (1 / p)
    factors = {"level_weighted_lp": IP, "level_geometric": IG, "level_gradient_curvature": IQ,
               "level_lhs": (n - a) * IP + a * IG, "levels_used": len(t), "levels_dropped": []}
    tol = RADIAL_REL_TOL * max(sum(lhs_t.values()), rhs)
    return _report(problem, lhs_t, rhs, factors, tol, ["radial path: u = |x|"], "radial")


def eval_foliated_hardy(problem: FoliationProblem) -> InequalityReport:
    """Both sides of the foliated Hardy inequality for ``problem``.

    ``lhs = (n-a) int |grad u| |phi|^p/|x|^a + a int u_r^2/|grad u| |phi|^p/|x|^a``
    by direct quadrature, ``u_r = grad u . x/|x|``;
    ``rhs = (int dt int_{u=t} |phi|^p/|x|^a)^((p-1)/p)
    (int dt int_{u=t} |p grad_T phi - H nu phi|^p/|x|^(a-p))^(1/p)``
    accumulated over the level grid.
    """
    if not 0 <= problem.a < problem.n:
        raise ExponentOutOfRange(f"a = {problem.a} outside [0, {problem.n})")
    if problem.p < 1:
        raise ParamOutOfRange(f"p = {problem.p} < 1")
    return _eval_radial(problem) if problem.radial else _eval_grid(problem)
