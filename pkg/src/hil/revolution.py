"""Hypersurfaces of revolution in R^(n+1) with exact geometry.

A profile curve ``t -> (r(t), z(t))`` in the half plane ``r >= 0``,
parametrized by arc length, is rotated through ``SO(n)`` about the z axis::

    x(t, theta) = (r(t) theta, z(t)),   theta in S^(n-1).

With the normal ``nu = (z' theta, -r')`` the principal curvatures are the
profile curvature ``kappa = r' z'' - z' r''`` and ``z'/r`` with multiplicity
``n - 1``, so ``H = kappa + (n - 1) z'/r`` (``H = n/R`` on the sphere of
radius R).  Rotationally symmetric integrals reduce to
``|S^(n-1)| * int f(t) r(t)^(n-1) dt``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property
from math import gamma, pi
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import BadSpec, NonPositiveRadius, NonSmoothProfile, StepperFailure
from .quadrature import QuadratureSpec, check_exponent, composite_gauss, integrate


def sphere_measure(k: int) -> float:
    """Surface measure of the unit sphere S^k in R^(k+1)."""
    return 2.0 * pi ** ((k + 1) / 2) / gamma((k + 1) / 2)


def ball_volume(k: int) -> float:
    """Volume of the unit ball in R^k."""
    return pi ** (k / 2) / gamma(k / 2 + 1)


@dataclass(frozen=True, eq=False)
class RevolutionHypersurface:
    """Rotationally symmetric n-dimensional hypersurface in R^(n+1).

    ``geometry(t)`` returns ``(r, z, r', z', r'', z'')`` at arc-length
    parameters ``t`` in ``[t0, t1]``.  ``axis_ends`` tells which ends of the
    profile sit on the symmetry axis (``r = 0``); those are interior points of
    the hypersurface, the others are boundary.
    """

    n: int
    kind: str
    params: dict
    t0: float
    t1: float
    geometry: Callable = field(repr=False)
    axis_ends: tuple = (False, False)
    breakpoints: tuple = ()
    extra: dict = field(default_factory=dict, repr=False)

    # -- pointwise geometry --------------------------------------------------
    def r(self, t):
        return self.geometry(np.asarray(t, dtype=float))[0]

    def z(self, t):
        return self.geometry(np.asarray(t, dtype=float))[1]

    def radius(self, t):
        r, z = self.geometry(np.asarray(t, dtype=float))[:2]
        return np.hypot(r, z)

    def mean_curvature(self, t):
        r, z, dr, dz, ddr, ddz = self.geometry(np.asarray(t, dtype=float))
        kappa = dr * ddz - dz * ddr
        axis = np.abs(r) < 1e-300
        # on the axis z'/r tends to z''/r' (the profile meets the axis orthogonally)
        ratio = np.where(axis, ddz / np.where(axis, dr, 1.0), dz / np.where(axis, 1.0, r))
        return kappa + (self.n - 1) * ratio

    def x_dot_nu(self, t):
        r, z, dr, dz = self.geometry(np.asarray(t, dtype=float))[:4]
        return r * dz - z * dr

    def radial_derivative(self, t):
        """``d|x|/dt``."""
        r, z, dr, dz = self.geometry(np.asarray(t, dtype=float))[:4]
        return (r * dr + z * dz) / np.hypot(r, z)

    def area_element(self, t):
        return sphere_measure(self.n - 1) * self.r(t) ** (self.n - 1)

    def arc_length_defect(self, t) -> float:
        dr, dz = self.geometry(np.asarray(t, dtype=float))[2:4]
        return float(np.max(np.abs(dr**2 + dz**2 - 1)))

    def mean_curvature_fd(self, t, h: float = 1e-3):
        """Mean curvature from 5-point finite differences of positions only.

        Independent of the stored derivatives; used as a residual oracle.
        """
        t = np.asarray(t, dtype=float)
        pts = [self.geometry(t + k * h)[:2] for k in (-2, -1, 0, 1, 2)]
        r = [p[0] for p in pts]
        z = [p[1] for p in pts]
        d1 = lambda f: (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
        d2 = lambda f: (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h**2)
        dr, dz, ddr, ddz = d1(r), d1(z), d2(r), d2(z)
        speed = np.hypot(dr, dz)
        kappa = (dr * ddz - dz * ddr) / speed**3
        return kappa + (self.n - 1) * (dz / speed) / r[2]

    # -- extent --------------------------------------------------------------
    @cached_property
    def _dense(self):
        t = np.linspace(self.t0, self.t1, 4097)
        return t, self.radius(t)

    @cached_property
    def diameter(self) -> float:
        t, rad = self._dense
        return float(2 * rad.max())

    @cached_property
    def radius_range(self) -> tuple:
        t, rad = self._dense
        return float(rad.min()), float(rad.max())

    @property
    def is_closed(self) -> bool:
        return all(self.axis_ends)

    def boundary_params(self) -> list:
        """Profile parameters of the boundary ends (ends off the axis)."""
        return [t for t, on_axis in zip((self.t0, self.t1), self.axis_ends) if not on_axis]

    def t_at_radius(self, rho: float) -> list:
        """All profile parameters where ``|x(t)| = rho``."""
        t, rad = self._dense
        f = rad - rho
        out = []
        for i in np.flatnonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0):
            out.append(brentq(lambda s: float(self.radius(s) - rho), t[i], t[i + 1], xtol=1e-15))
        out += [float(t[i]) for i in np.flatnonzero(f == 0)]
        return sorted(out)

    # -- quadrature ----------------------------------------------------------
    def panel_edges(self, panels: int, extra_params=()) -> np.ndarray:
        """Panel breakpoints equidistributing ``1/L + 1/|x|``.

        The monitor grades panels geometrically toward the origin when the
        profile approaches it.  Profile kinks and ``extra_params`` are merged
        in so no panel straddles a non-smooth point.
        """
        t = np.linspace(self.t0, self.t1, 8193)
        rad = self.radius(t)
        floor = max(float(rad.min()), 1e-6 * self.diameter)
        length = self.t1 - self.t0
        m = 1.0 / length + 1.0 / np.maximum(rad, floor)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (m[1:] + m[:-1]) * np.diff(t))])
        edges = np.interp(np.linspace(0, cum[-1], panels + 1), cum, t)
        extra = [p for p in (*self.breakpoints, *extra_params) if self.t0 < p < self.t1]
        edges = np.unique(np.concatenate([edges, extra, [self.t0, self.t1]]))
        keep = np.concatenate([[True], np.diff(edges) > 1e-13 * length])
        return edges[keep]

    def nodes(self, panels: int, order: int, extra_params=()):
        return composite_gauss(self.panel_edges(panels, extra_params), order)

    def integrate(self, integrand, quad: QuadratureSpec | None = None, weight_exponent=0.0) -> dict:
        return integrate_revolution(self, integrand, quad, weight_exponent)

    # -- identity ------------------------------------------------------------
    def fingerprint(self) -> str:
        payload = json.dumps({"n": self.n, "kind": self.kind, "params": self.params},
                             sort_keys=True, default=float)
        return "revolution:" + hashlib.sha256(payload.encode()).hexdigest()[:16]

    def reflected(self) -> RevolutionHypersurface:
        """The mirror image under ``z -> -z`` (orientation kept outward)."""
        g = self.geometry
        t0, t1 = self.t0, self.t1

        def geom(t):
            r, z, dr, dz, ddr, ddz = g(t0 + t1 - t)
            return r, -z, -dr, dz, ddr, -ddz

        return RevolutionHypersurface(self.n, self.kind + "~", dict(self.params), t0, t1, geom,
                                      self.axis_ends[::-1], tuple(t0 + t1 - b for b in self.breakpoints))

    def to_json(self, samples: int = 2049) -> dict:
        t = np.linspace(self.t0, self.t1, samples)
        return {"n": self.n, "t": t.tolist(), "r": self.r(t).tolist(), "z": self.z(t).tolist()}


def integrate_revolution(R, integrand, quad=None, weight_exponent=0.0) -> dict:
    """Integrate a rotationally symmetric integrand ``f(t)`` over ``R``.

    Equivalent to :func:`hil.quadrature.integrate`; kept for the
    profile-centric call signature.
    """
    return integrate(R, integrand, weight_exponent, quad or QuadratureSpec())


# --- constructors ------------------------------------------------------------
def _sphere(n, R=1.0):
    R = float(R)
    if R <= 0:
        raise NonPositiveRadius("sphere radius must be positive")

    def geom(t):
        s, c = np.sin(t / R), np.cos(t / R)
        return R * s, -R * c, c, s, -s / R, c / R

    return RevolutionHypersurface(n, "sphere", {"R": R}, 0.0, pi * R, geom, (True, True))


def _hyperplane_annulus(n, R0, R1):
    R0, R1 = float(R0), float(R1)
    if R0 < 0 or R1 <= R0:
        raise NonPositiveRadius("annulus needs 0 <= R0 < R1")

    def geom(t):
        z = np.zeros_like(t)
        return t, z, np.ones_like(t), z, z, z

    return RevolutionHypersurface(n, "hyperplane_annulus", {"R0": R0, "R1": R1}, R0, R1, geom,
                                  (R0 == 0.0, False))


def _cylinder(n, R, L):
    R, L = float(R), float(L)
    if R <= 0:
        raise NonPositiveRadius("cylinder radius must be positive")
    if L <= 0:
        raise BadSpec("cylinder length must be positive")

    def geom(t):
        z = np.zeros_like(t)
        return R + z, t, z, np.ones_like(t), z, z

    return RevolutionHypersurface(n, "cylinder", {"R": R, "L": L}, -L / 2, L / 2, geom)


def solve_catenoid_profile(n: int, neck_radius: float, span: float = 4.0, rtol: float = 1e-13):
    """Integrate the minimal (H = 0) profile through a neck of given radius.

    With ``r' = sin(theta)``, ``z' = cos(theta)`` the condition ``H = 0``
    reads ``theta' = (n - 1) cos(theta) / r``; its first integral is
    ``r^(n-1) cos(theta) = neck^(n-1)``.  The solution is mirrored through the
    neck, so the profile covers arc length ``[-span, span]``.

    Returns
    -------
    dict
        Profile spec ``{"kind": "catenoid", ...}`` holding the dense ODE
        solution and residual diagnostics.
    """
    if n < 2:
        raise BadSpec("catenoid needs n >= 2")
    if not neck_radius > 0:
        raise NonPositiveRadius("neck radius must be positive")
    if not span > 0:
        raise BadSpec("span must be positive")
    a = float(neck_radius)

    def rhs(t, y):
        r, z, th = y
        return [np.sin(th), np.cos(th), (n - 1) * np.cos(th) / r]

    sol = solve_ivp(rhs, (0.0, span), [a, 0.0, 0.0], method="DOP853", rtol=rtol,
                    atol=rtol * a, dense_output=True)
    if not sol.success:
        raise StepperFailure(sol.message)

    ts = np.linspace(0.0, span, 2001)
    r, z, th = sol.sol(ts)
    conservation = float(np.max(np.abs(r ** (n - 1) * np.cos(th) / a ** (n - 1) - 1)))
    # ODE residual: differentiate the dense output of theta independently
    h = 1e-3
    inner = ts[(ts > 2 * h) & (ts < span - 2 * h)]
    th_k = [sol.sol(inner + k * h)[2] for k in (-2, -1, 1, 2)]
    dth = (th_k[0] - 8 * th_k[1] + 8 * th_k[2] - th_k[3]) / (12 * h)
    r_in, _, th_in = sol.sol(inner)
    residual = float(np.max(np.abs(-dth + (n - 1) * np.cos(th_in) / r_in)))
    return {
        "kind": "catenoid",
        "n": n,
        "neck": a,
        "span": float(span),
        "solution": sol.sol,
        "conservation_residual": conservation,
        "ode_residual": residual,
    }


def _catenoid(n, neck=1.0, span=4.0, profile=None):
    prof = profile or solve_catenoid_profile(n, neck, span)
    dense = prof["solution"]
    a = prof["neck"]

    def geom(t):
        t = np.asarray(t, dtype=float)
        s = np.sign(t)
        s = np.where(s == 0, 1.0, s)
        r, z, th = dense(np.abs(t).ravel())
        r, z, th = (v.reshape(t.shape) for v in (r, z, th))
        z, th = s * z, s * th
        dth = (n - 1) * np.cos(th) / r
        return r, z, np.sin(th), np.cos(th), np.cos(th) * dth, -np.sin(th) * dth

    return RevolutionHypersurface(n, "catenoid", {"neck": a, "span": prof["span"]},
                                  -prof["span"], prof["span"], geom, (False, False), (0.0,),
                                  extra={k: prof[k] for k in ("conservation_residual", "ode_residual")})


def _sampled(n, t, r, z):
    """Spline profile through samples, re-parametrized by exact arc length."""
    u = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    if not (u.shape == r.shape == z.shape) or u.ndim != 1 or len(u) < 4:
        raise BadSpec("sampled profile needs matching 1-D arrays of length >= 4")
    if np.any(np.diff(u) <= 0):
        raise NonSmoothProfile("profile parameter must be strictly increasing")
    steps = np.hypot(np.diff(r), np.diff(z))
    if np.any(steps <= 1e-14 * steps.max()):
        raise NonSmoothProfile("repeated profile points")
    seg = np.stack([np.diff(r), np.diff(z)], axis=1) / steps[:, None]
    turn = np.arccos(np.clip(np.einsum("ij,ij->i", seg[1:], seg[:-1]), -1, 1))
    if turn.size and turn.max() > 0.5:
        raise NonSmoothProfile(f"profile turns by {turn.max():.2f} rad between samples")
    if np.any(r[1:-1] <= 0):
        raise NonPositiveRadius("profile radius must be positive in the interior")
    cr, cz = CubicSpline(u, r), CubicSpline(u, z)
    dcr, dcz = cr.derivative(), cz.derivative()
    ddcr, ddcz = dcr.derivative(), dcz.derivative()
    speed = lambda s: np.hypot(dcr(s), dcz(s))

    def table(count):
        uu = np.linspace(u[0], u[-1], count)
        x, w = composite_gauss(uu, 6)
        seglen = (speed(x) * w).reshape(count - 1, -1).sum(1)
        return uu, np.concatenate([[0.0], np.cumsum(seglen)])

    def make(uu, ss):
        xg, wg = composite_gauss(np.array([0.0, 1.0]), 8)

        def to_u(tt):
            uq = np.interp(tt, ss, uu)
            j = np.clip(np.searchsorted(uu, uq, side="right") - 1, 0, len(uu) - 2)
            for _ in range(4):
                h = uq - uu[j]
                pts = uu[j][:, None] + h[:, None] * xg[None, :]
                s_at = ss[j] + h * (speed(pts) * wg[None, :]).sum(1)
                uq = uq - (s_at - tt) / speed(uq)
            return uq

        def geom(tt):
            tt = np.asarray(tt, dtype=float)
            uq = to_u(tt.ravel()).reshape(tt.shape)
            rp, zp = dcr(uq), dcz(uq)
            rpp, zpp = ddcr(uq), ddcz(uq)
            sp_ = np.hypot(rp, zp)
            # derivatives with respect to arc length
            dr, dz = rp / sp_, zp / sp_
            dsp = (rp * rpp + zp * zpp) / sp_
            ddr = (rpp * sp_ - rp * dsp) / sp_**3
            ddz = (zpp * sp_ - zp * dsp) / sp_**3
            return cr(uq), cz(uq), dr, dz, ddr, ddz

        return geom, float(ss[-1])

    count = 2048
    uu, ss = table(count)
    geom, L = make(uu, ss)
    axis = (bool(abs(r[0]) < 1e-12), bool(abs(r[-1]) < 1e-12))
    prev = None
    while True:
        R = RevolutionHypersurface(n, "sampled", {"t": u.tolist(), "r": r.tolist(), "z": z.tolist()},
                                   0.0, L, geom, axis)
        tq, wq = R.nodes(64, 8)
        total = float(np.sum(wq * R.area_element(tq) * np.abs(R.mean_curvature(tq))))
        if prev is not None and abs(total - prev) <= 1e-10 * max(abs(total), 1e-300):
            return R
        if count >= 2**17:
            return R
        prev = total
        count *= 2
        uu, ss = table(count)
        geom, L = make(uu, ss)


_BUILDERS = {
    "sphere": lambda n, p: _sphere(n, p.get("R", 1.0)),
    "hyperplane_annulus": lambda n, p: _hyperplane_annulus(n, p.get("R0", 0.0), p.get("R1", 1.0)),
    "cylinder": lambda n, p: _cylinder(n, p.get("R", 1.0), p.get("L", 2.0)),
    "catenoid": lambda n, p: _catenoid(n, p.get("neck", 1.0), p.get("span", 4.0), p.get("profile")),
    "sampled": lambda n, p: _sampled(n, p["t"], p["r"], p["z"]),
}


def make_revolution(profile_spec, n: int) -> RevolutionHypersurface:
    """Build a revolution hypersurface.

    Parameters
    ----------
    profile_spec : dict or str
        ``{"kind": "sphere", "R": 1}``, ``{"kind": "hyperplane_annulus", "R0":
        0.01, "R1": 1}``, ``{"kind": "cylinder", "R": 1, "L": 2}``,
        ``{"kind": "catenoid", "neck": 1, "span": 4}`` or
        ``{"kind": "sampled", "t": [...], "r": [...], "z": [...]}``; a bare
        string names the kind with default parameters.
    n : int
        Intrinsic dimension, ``n >= 2``.
    """
    if isinstance(profile_spec, str):
        profile_spec = {"kind": profile_spec}
    spec = dict(profile_spec)
    kind = spec.pop("kind", None)
    if kind not in _BUILDERS:
        raise BadSpec(f"unknown profile kind {kind!r}")
    if int(n) != n or n < 2:
        raise BadSpec("n must be an integer >= 2")
    R = _BUILDERS[kind](int(n), spec)
    tt = np.linspace(R.t0, R.t1, 1025)[1:-1]
    if np.any(R.r(tt) <= 0):
        raise NonPositiveRadius("profile radius must be positive on the open domain")
    return R


def load_profile(path) -> RevolutionHypersurface:
    """Read the profile JSON schema ``{n, t, r, z}``."""
    with open(path) as fh:
        obj = json.load(fh)
    return make_revolution({"kind": "sampled", "t": obj["t"], "r": obj["r"], "z": obj["z"]}, obj["n"])
