"""Benchmark surfaces and test-function families.

Surfaces are built from compact specs.  A spec carrying an ``n`` key builds a
:class:`~hil.revolution.RevolutionHypersurface` (exact geometry, any ``n``);
otherwise a triangle mesh is generated::

    make_surface("icosphere:subdiv=4")
    make_surface("flat_annulus:n=3,R0=1e-4,R1=1")

Test functions are radial unless stated otherwise, so they can be used on
both paths.  ``random_bump`` draws from ``numpy.random.SeedSequence(seed)``
spawned into one child stream per bump (bump ``k`` uses child ``k``), which
keeps each bump stable when ``count`` grows.
"""

from __future__ import annotations

from math import ceil, log, pi

import numpy as np

from .errors import BadSpec, SupportOutsideSurface
from .fields import ScalarField
from .mesh import SimplicialHypersurface, build_mesh, load_mesh
from .revolution import RevolutionHypersurface, load_profile, make_revolution
from .specs import eval_expr, parse_spec, point_variables


# --- mesh generators ---------------------------------------------------------
def _subdivide(V, T):
    """Split every triangle into four by edge midpoints."""
    e = np.concatenate([T[:, [0, 1]], T[:, [1, 2]], T[:, [2, 0]]])
    key = np.sort(e, axis=1)
    uniq, inv = np.unique(key, axis=0, return_inverse=True)
    inv = inv.ravel()
    mids = 0.5 * (V[uniq[:, 0]] + V[uniq[:, 1]])
    m = len(V) + inv.reshape(3, -1).T  # midpoint index of edges (01, 12, 20)
    a, b, c = T[:, 0], T[:, 1], T[:, 2]
    m01, m12, m20 = m[:, 0], m[:, 1], m[:, 2]
    T2 = np.concatenate([
        np.stack([a, m01, m20], 1),
        np.stack([m01, b, m12], 1),
        np.stack([m20, m12, c], 1),
        np.stack([m01, m12, m20], 1),
    ])
    return np.vstack([V, mids]), T2


def _spherical(V, T, subdiv, radius):
    V = V / np.linalg.norm(V, axis=1)[:, None]
    for _ in range(subdiv):
        V, T = _subdivide(V, T)
        V = V / np.linalg.norm(V, axis=1)[:, None]
    return V * radius, T


def icosphere_arrays(subdiv: int = 3, radius: float = 1.0):
    g = (1 + 5**0.5) / 2
    V = np.array([
        [-1, g, 0], [1, g, 0], [-1, -g, 0], [1, -g, 0],
        [0, -1, g], [0, 1, g], [0, -1, -g], [0, 1, -g],
        [g, 0, -1], [g, 0, 1], [-g, 0, -1], [-g, 0, 1],
    ], dtype=float)
    T = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ])
    return _spherical(V, T, subdiv, radius)


def icosphere(subdiv: int = 3, radius: float = 1.0) -> SimplicialHypersurface:
    """Geodesic sphere from a subdivided icosahedron (20 * 4**subdiv faces)."""
    return build_mesh(*icosphere_arrays(int(subdiv), float(radius)))


def octasphere(subdiv: int = 4, radius: float = 1.0) -> SimplicialHypersurface:
    """Sphere from a subdivided octahedron (8 * 4**subdiv faces).

    The equator ``x3 = 0`` is a chain of mesh edges, so hemispheres are exact
    face subsets.
    """
    V = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], float)
    T = np.array([[0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4],
                  [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5]])
    return build_mesh(*_spherical(V, T, int(subdiv), float(radius)))


def _zip_rings(ia, ang_a, ib, ang_b):
    """Triangulate the strip between an inner ring ``a`` and an outer ring ``b``.

    Angles must start near each other and increase by one full turn around
    each ring.  Faces are counter-clockwise seen from +z.
    """
    na, nb = len(ia), len(ib)
    ext_a = np.append(ang_a, ang_a[0] + 2 * pi)
    ext_b = np.append(ang_b, ang_b[0] + 2 * pi)
    i = j = 0
    tris = []
    while i < na or j < nb:
        adv_a = j == nb or (i < na and ext_a[i + 1] <= ext_b[j + 1])
        if adv_a:
            tris.append((ia[i % na], ib[j % nb], ia[(i + 1) % na]))
            i += 1
        else:
            tris.append((ia[i % na], ib[j % nb], ib[(j + 1) % nb]))
            j += 1
    return tris


def _polar_mesh(radii, counts, offsets=None, center=False):
    """Planar mesh of concentric rings (optionally with a center vertex)."""
    offsets = np.zeros(len(radii)) if offsets is None else np.asarray(offsets, float)
    pts, rings = [], []
    start = 0
    if center:
        pts.append(np.zeros((1, 3)))
        start = 1
    for rad, m, off in zip(radii, counts, offsets):
        ang = off + 2 * pi * np.arange(m) / m
        pts.append(np.stack([rad * np.cos(ang), rad * np.sin(ang), np.zeros(m)], 1))
        rings.append((np.arange(start, start + m), ang))
        start += m
    tris = []
    if center:
        idx, _ = rings[0]
        m = len(idx)
        tris += [(0, idx[k], idx[(k + 1) % m]) for k in range(m)]
    for (ia, aa), (ib, ab) in zip(rings[:-1], rings[1:]):
        tris += _zip_rings(ia, aa, ib, ab)
    return np.vstack(pts), np.array(tris, dtype=np.int64)


def flat_disk(radius: float = 1.0, rings: int = 32) -> SimplicialHypersurface:
    """Planar disk in ``{x3 = 0}``; ring ``k`` is a regular ``6k``-gon of radius ``k R / rings``.

    Every ring is a closed chain of mesh edges, so ``{|x| < k R / rings}`` is
    an exact face subset.  Normal is ``+e3``.
    """
    rings = int(rings)
    if rings < 1 or radius <= 0:
        raise BadSpec("flat_disk needs radius > 0 and rings >= 1")
    k = np.arange(1, rings + 1)
    V, T = _polar_mesh(radius * k / rings, 6 * k, center=True)
    return build_mesh(V, T)


def flat_annulus(R0: float = 0.01, R1: float = 1.0, segments: int = 96,
                 rings: int | None = None) -> SimplicialHypersurface:
    """Planar annulus ``R0 <= |x| <= R1`` with geometrically spaced rings."""
    if not (0 < R0 < R1):
        raise BadSpec("flat_annulus needs 0 < R0 < R1")
    segments = int(segments)
    if rings is None:
        rings = max(2, ceil(log(R1 / R0) * segments / (2 * pi)))
    radii = np.geomspace(R0, R1, int(rings) + 1)
    offsets = (np.arange(len(radii)) % 2) * pi / segments
    V, T = _polar_mesh(radii, [segments] * len(radii), offsets)
    return build_mesh(V, T)


def _grid_tris(nu, nv, wrap_u, wrap_v):
    """Triangles of a ``nu x nv`` vertex grid, with optional periodicity."""
    iu = np.arange(nu if wrap_u else nu - 1)
    iv = np.arange(nv if wrap_v else nv - 1)
    U, W = np.meshgrid(iu, iv, indexing="ij")
    U, W = U.ravel(), W.ravel()
    a = U * nv + W
    b = ((U + 1) % nu) * nv + W
    c = ((U + 1) % nu) * nv + (W + 1) % nv
    d = U * nv + (W + 1) % nv
    # one diagonal direction everywhere: every vertex has valence 6, which
    # keeps the cotangent curvature free of the alternating-pattern bias
    t1 = np.stack([a, b, c], 1)
    t2 = np.stack([a, c, d], 1)
    return np.concatenate([t1, t2])


def _orient_by(V, T, outward):
    """Flip an open mesh so face normals agree with ``outward`` at most faces."""
    x = V[T]
    nrm = np.cross(x[:, 1] - x[:, 0], x[:, 2] - x[:, 0])
    if np.sum(np.einsum("ij,ij->i", nrm, outward(x.mean(1)))) < 0:
        T = T[:, ::-1]
    return T


def cylinder(R: float = 1.0, L: float = 2.0, segments: int = 64, nz: int | None = None):
    """Open circular tube of radius R and length L, normal pointing away from the axis."""
    segments = int(segments)
    nz = int(nz) if nz else max(2, ceil(L / (2 * pi * R / segments))) + 1
    th = 2 * pi * np.arange(segments) / segments
    zz = np.linspace(-L / 2, L / 2, nz)
    Z, TH = np.meshgrid(zz, th, indexing="ij")
    V = np.stack([R * np.cos(TH).ravel(), R * np.sin(TH).ravel(), Z.ravel()], 1)
    T = _grid_tris(nz, segments, False, True)
    T = _orient_by(V, T, lambda p: np.stack([p[:, 0], p[:, 1], 0 * p[:, 2]], 1))
    return build_mesh(V, T)


def torus(R: float = 2.0, r: float = 1.0, nu: int = 96, nv: int = 48):
    """Torus of revolution about the x3 axis (major radius R, minor radius r)."""
    if not (0 < r < R):
        raise BadSpec("torus needs 0 < r < R")
    u = 2 * pi * np.arange(int(nu)) / nu
    v = 2 * pi * np.arange(int(nv)) / nv
    U, W = np.meshgrid(u, v, indexing="ij")
    rho = R + r * np.cos(W)
    V = np.stack([(rho * np.cos(U)).ravel(), (rho * np.sin(U)).ravel(), (r * np.sin(W)).ravel()], 1)
    return build_mesh(V, _grid_tris(int(nu), int(nv), True, True))


def graph(f, radius: float = 1.0, rings: int = 32) -> SimplicialHypersurface:
    """Graph ``x3 = f(x1, x2)`` over the disk of the given radius.

    ``f`` is a callable of two arrays or an expression in ``x1, x2``.
    """
    base = flat_disk(radius, rings)
    V = base.vertices.copy()
    if isinstance(f, str):
        z = eval_expr(f, point_variables(V[:, :2]))
    else:
        z = f(V[:, 0], V[:, 1])
    V[:, 2] = np.broadcast_to(np.asarray(z, dtype=float), (len(V),))
    return build_mesh(V, base.triangles)


def ellipsoid(a: float = 1.0, b: float = 1.0, c: float = 1.0, subdiv: int = 4):
    V, T = icosphere_arrays(int(subdiv))
    return build_mesh(V * np.array([a, b, c], dtype=float), T)


def catenoid_mesh(neck: float = 1.0, height: float = 1.0, segments: int = 96, nz: int | None = None):
    """Catenoid ``r = neck cosh(x3 / neck)`` for ``|x3| <= height``."""
    segments = int(segments)
    nz = int(nz) if nz else max(3, ceil(2 * height / (2 * pi * neck / segments))) + 1
    th = 2 * pi * np.arange(segments) / segments
    zz = np.linspace(-height, height, nz)
    Z, TH = np.meshgrid(zz, th, indexing="ij")
    rr = neck * np.cosh(Z / neck)
    V = np.stack([(rr * np.cos(TH)).ravel(), (rr * np.sin(TH)).ravel(), Z.ravel()], 1)
    T = _grid_tris(nz, segments, False, True)
    T = _orient_by(V, T, lambda p: np.stack([p[:, 0], p[:, 1], 0 * p[:, 2]], 1))
    return build_mesh(V, T)


def perturbed_sphere(amplitude: float = 0.05, subdiv: int = 4):
    """Icosphere with radius ``1 + amplitude * P(x/|x|)``, a smooth non-symmetric bump.

    ``P = (3 u3^2 - 1)/2 + u1 u2`` with ``u = x/|x|``; amplitude 0 gives the
    icosphere itself.
    """
    V, T = icosphere_arrays(int(subdiv))
    P = 0.5 * (3 * V[:, 2] ** 2 - 1) + V[:, 0] * V[:, 1]
    return build_mesh(V * (1 + amplitude * P)[:, None], T)


_MESHES = {
    "icosphere": lambda p: icosphere(p.get("subdiv", 3), p.get("R", p.get("radius", 1.0))),
    "sphere": lambda p: icosphere(p.get("subdiv", 3), p.get("R", p.get("radius", 1.0))),
    "octasphere": lambda p: octasphere(p.get("subdiv", 4), p.get("R", p.get("radius", 1.0))),
    "flat_disk": lambda p: flat_disk(p.get("R", p.get("radius", 1.0)), p.get("rings", 32)),
    "flat_annulus": lambda p: flat_annulus(p.get("R0", p.get("eps", 0.01)), p.get("R1", p.get("R", 1.0)),
                                           p.get("segments", 96), p.get("rings")),
    "cylinder": lambda p: cylinder(p.get("R", 1.0), p.get("L", 2.0), p.get("segments", 64), p.get("nz")),
    "torus": lambda p: torus(p.get("R", 2.0), p.get("r", 1.0), p.get("nu", 96), p.get("nv", 48)),
    "graph": lambda p: graph(p.get("f", "0"), p.get("R", p.get("radius", 1.0)), p.get("rings", 32)),
    "ellipsoid": lambda p: ellipsoid(p.get("a", 1.0), p.get("b", 1.0), p.get("c", 1.0), p.get("subdiv", 4)),
    "catenoid": lambda p: catenoid_mesh(p.get("neck", 1.0), p.get("height", 1.0),
                                        p.get("segments", 96), p.get("nz")),
    "perturbed_sphere": lambda p: perturbed_sphere(p.get("amplitude", 0.05), p.get("subdiv", 4)),
    "file": lambda p: load_mesh(p["path"]),
}


def _revolution_spec(name, p):
    n = p.pop("n")
    if name == "sphere":
        return make_revolution({"kind": "sphere", "R": p.get("R", 1.0)}, n)
    if name in ("flat_annulus", "hyperplane_annulus"):
        return make_revolution({"kind": "hyperplane_annulus", "R0": p.get("R0", p.get("eps", 0.01)),
                                "R1": p.get("R1", p.get("R", 1.0))}, n)
    if name == "flat_disk":
        return make_revolution({"kind": "hyperplane_annulus", "R0": 0.0,
                                "R1": p.get("R", p.get("radius", 1.0))}, n)
    if name == "cylinder":
        return make_revolution({"kind": "cylinder", "R": p.get("R", 1.0), "L": p.get("L", 2.0)}, n)
    if name == "catenoid":
        return make_revolution({"kind": "catenoid", "neck": p.get("neck", 1.0),
                                "span": p.get("span", 4.0)}, n)
    if name == "profile":
        R = load_profile(p["path"])
        if R.n != n:
            raise BadSpec(f"profile file has n = {R.n}, spec asks for n = {n}")
        return R
    raise BadSpec(f"no revolution surface named {name!r}")


def make_surface(spec) -> SimplicialHypersurface | RevolutionHypersurface:
    """Build a benchmark surface from a spec string or dict.

    Examples
    --------
    >>> make_surface("sphere:n=3,R=1").n
    3
    >>> make_surface("torus:R=2,r=1").euler_characteristic
    0
    """
    name, p = parse_spec(spec)
    if "n" in p:
        return _revolution_spec(name, dict(p))
    if name not in _MESHES:
        raise BadSpec(f"unknown surface {name!r}; known: {sorted(_MESHES)}")
    try:
        return _MESHES[name](p)
    except (TypeError, KeyError) as exc:
        raise BadSpec(f"bad parameters for {name}: {exc}") from None


# --- test functions ------------------------------------------------------------
def _smoothstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u * u * (3 - 2 * u)


def _smoothstep_d(u):
    inside = (u > 0) & (u < 1)
    return np.where(inside, 6 * u * (1 - u), 0.0)


def radial_bump(delta: float, R: float) -> ScalarField:
    """``(1 - s^2)^3`` with ``s`` the affine map of ``[delta, R]`` onto ``[-1, 1]``."""
    if not (0 <= delta < R):
        raise BadSpec("radial_bump needs 0 <= delta < R")
    half = 0.5 * (R - delta)
    mid = 0.5 * (R + delta)

    def f(rho):
        s = (np.asarray(rho, float) - mid) / half
        return np.where(np.abs(s) < 1, (1 - s * s) ** 3, 0.0)

    def df(rho):
        s = (np.asarray(rho, float) - mid) / half
        return np.where(np.abs(s) < 1, -6 * s * (1 - s * s) ** 2 / half, 0.0)

    return ScalarField.from_radial(f, df, support=(delta, R), name=f"radial_bump({delta:g},{R:g})",
                                   smoothness="C2", breakpoints=(delta, R),
                                   meta={"family": "radial_bump", "delta": delta, "R": R})


def cone(R: float = 1.0) -> ScalarField:
    """``max(0, 1 - |x|/R)``: radial, decreasing, Lipschitz."""
    if R <= 0:
        raise BadSpec("cone needs R > 0")
    f = lambda rho: np.maximum(0.0, 1.0 - np.asarray(rho, float) / R)
    df = lambda rho: np.where(np.asarray(rho, float) < R, -1.0 / R, 0.0)
    return ScalarField.from_radial(f, df, support=(0.0, R), name=f"cone({R:g})", smoothness="C0",
                                   breakpoints=(R,), meta={"family": "cone", "R": R})


def constant(value: float = 1.0) -> ScalarField:
    f = lambda rho: np.full(np.shape(rho), float(value))
    df = lambda rho: np.zeros(np.shape(rho))
    return ScalarField.from_radial(f, df, support=(0.0, np.inf), name=f"constant({value:g})",
                                   smoothness="Cinf", meta={"family": "constant", "value": value})


def _log_profile(eps, R, power, eta, deta, name, meta, breaks):
    """Field ``|x|^(-power) * eta(log|x|)`` with ``eta`` supported in ``[log eps, log R]``."""

    def f(rho):
        rho = np.asarray(rho, float)
        inside = (rho > eps) & (rho < R)
        safe = np.where(inside, rho, 1.0)
        return np.where(inside, safe ** (-power) * eta(np.log(safe)), 0.0)

    def df(rho):
        rho = np.asarray(rho, float)
        inside = (rho > eps) & (rho < R)
        safe = np.where(inside, rho, 1.0)
        ell = np.log(safe)
        val = safe ** (-power - 1) * (deta(ell) - power * eta(ell))
        return np.where(inside, val, 0.0)

    return ScalarField.from_radial(f, df, support=(eps, R), name=name, smoothness="C1",
                                   breakpoints=tuple(breaks), meta=meta)


def log_cutoff(eps: float, R: float, n: int, p: float = 2.0) -> ScalarField:
    """Hardy quasi-extremizer ``|x|^(-(n-p)/p) eta(log|x|)``.

    ``eta`` is the C1 cubic smoothstep rising over the first half of
    ``[log eps, log R]`` and falling symmetrically over the second half.
    """
    if not (0 < eps < R):
        raise BadSpec("log_cutoff needs 0 < eps < R")
    l0, l1 = log(eps), log(R)
    w = 0.5 * (l1 - l0)
    eta = lambda ell: np.where(ell < l0 + w, _smoothstep((ell - l0) / w), _smoothstep((l1 - ell) / w))
    deta = lambda ell: np.where(ell < l0 + w, _smoothstep_d((ell - l0) / w) / w,
                                -_smoothstep_d((l1 - ell) / w) / w)
    power = (n - p) / p
    return _log_profile(eps, R, power, eta, deta, f"log_cutoff({eps:g},{R:g})",
                        {"family": "log_cutoff", "eps": eps, "R": R, "p": p},
                        (eps, (eps * R) ** 0.5, R))


def ground_state_cutoff(eps: float, R: float, n: int) -> ScalarField:
    """Ground state ``|x|^(-(n-2)/2)`` with a plateau cutoff in ``log|x|``.

    Ramps (C1 smoothstep) each occupy a quarter of ``[log eps, log R]``.
    """
    if not (0 < eps < R):
        raise BadSpec("ground_state_cutoff needs 0 < eps < R")
    l0, l1 = log(eps), log(R)
    w = 0.25 * (l1 - l0)
    eta = lambda ell: np.minimum(_smoothstep((ell - l0) / w), _smoothstep((l1 - ell) / w))
    deta = lambda ell: np.where(ell < 0.5 * (l0 + l1), _smoothstep_d((ell - l0) / w) / w,
                                -_smoothstep_d((l1 - ell) / w) / w)
    power = (n - 2) / 2
    br = (eps, np.exp(l0 + w), np.exp(l1 - w), R)
    return _log_profile(eps, R, power, eta, deta, f"ground_state_cutoff({eps:g},{R:g})",
                        {"family": "ground_state_cutoff", "eps": eps, "R": R}, br)


def _bump(s):
    return np.where(s < 1, (1 - s) ** 3, 0.0)  # s = squared normalized distance


def random_bump(surface, seed: int = 0, count: int = 5) -> ScalarField:
    """Sum of compact ``(1 - |x - c|^2 / w^2)^3`` bumps with random centers and widths.

    On a mesh, centers are mesh vertices at distance at least ``w`` from the
    origin and at least ``w`` from the boundary collar; widths are drawn in
    ``[5 h, diam / 4]`` with ``h`` the mean edge length.  On a revolution
    surface the bumps are radial, centered on random radii of the profile.
    Amplitudes are drawn in ``[0.5, 1.5]``.
    """
    if count < 1:
        raise BadSpec("random_bump needs count >= 1")
    children = np.random.SeedSequence(int(seed)).spawn(int(count))
    if isinstance(surface, RevolutionHypersurface):
        return _random_radial(surface, children, seed)
    M = surface
    h = M.mean_edge_length
    diam = M.bbox_diagonal
    wmin, wmax = 5 * h, max(diam / 4, 5 * h * 1.0001)
    V = M.vertices
    rad = np.linalg.norm(V, axis=1)
    bpts = V[M.boundary_collar]
    centers, widths, amps = [], [], []
    for child in children:
        rng = np.random.default_rng(child)
        w = rng.uniform(wmin, wmax)
        ok = rad > w
        if len(bpts):
            from scipy.spatial import cKDTree

            dist, _ = cKDTree(bpts).query(V)
            ok &= dist > w
        cand = np.flatnonzero(ok)
        while cand.size == 0 and w > wmin:
            w = 0.5 * (w + wmin) if w > 1.01 * wmin else wmin
            ok = rad > w
            if len(bpts):
                ok &= dist > w
            cand = np.flatnonzero(ok)
        if cand.size == 0:
            raise SupportOutsideSurface("no room for a bump away from the origin and boundary")
        centers.append(V[cand[rng.integers(cand.size)]])
        widths.append(w)
        amps.append(rng.uniform(0.5, 1.5))
    C, W, A = np.array(centers), np.array(widths), np.array(amps)

    def func(pts):
        d2 = ((pts[:, None, :] - C[None, :, :]) ** 2).sum(-1) / W[None, :] ** 2
        return (_bump(d2) * A[None, :]).sum(1)

    cr = np.linalg.norm(C, axis=1)
    support = (float(max(0.0, np.min(cr - W))), float(np.max(cr + W)))
    return ScalarField(kind="callable", func=func, support=support, smoothness="C2",
                       name=f"random_bump(seed={seed},count={count})",
                       meta={"family": "random_bump", "seed": seed, "count": count,
                             "centers": C.tolist(), "widths": W.tolist(), "amplitudes": A.tolist()})


def _random_radial(R: RevolutionHypersurface, children, seed):
    lo, hi = R.radius_range
    tol = 1e-9 * R.diameter
    bnd = [float(R.radius(t)) for t in R.boundary_params()]
    # the support must stay off the origin and off radii of boundary ends
    lo_fixed = lo <= tol or any(abs(b - lo) <= tol for b in bnd)
    hi_fixed = any(abs(b - hi) <= tol for b in bnd)
    floor = max(lo, 1e-3 * R.diameter)
    span = hi - lo
    cs, ws, amps = [], [], []
    for child in children:
        rng = np.random.default_rng(child)
        if span <= tol:
            # every point has the same |x|: the bump is a random positive constant
            w = rng.uniform(0.5, 1.0) * hi
            c = hi + rng.uniform(-0.4, 0.4) * w
        else:
            for _ in range(1000):
                w = rng.uniform(0.05, 0.3) * span
                c = rng.uniform(lo, hi)
                if lo_fixed and c - w <= floor:
                    continue
                if hi_fixed and c + w >= hi:
                    continue
                break
            else:
                raise SupportOutsideSurface("could not place a radial bump on the profile")
        cs.append(c)
        ws.append(w)
        amps.append(rng.uniform(0.5, 1.5))
    C, W, A = np.array(cs), np.array(ws), np.array(amps)

    def f(rho):
        s = ((np.asarray(rho, float)[..., None] - C) / W) ** 2
        return (_bump(s) * A).sum(-1)

    def df(rho):
        d = (np.asarray(rho, float)[..., None] - C) / W
        s = d * d
        return (np.where(s < 1, -6 * d * (1 - s) ** 2 / W, 0.0) * A).sum(-1)

    brk = tuple(sorted(set((C - W).tolist() + (C + W).tolist())))
    return ScalarField.from_radial(f, df, support=(max(0.0, float(np.min(C - W))), float(np.max(C + W))),
                                   name=f"random_bump(seed={seed},count={len(C)})", smoothness="C2",
                                   breakpoints=brk,
                                   meta={"family": "random_bump", "seed": seed, "count": len(C),
                                         "centers": C.tolist(), "widths": W.tolist(),
                                         "amplitudes": A.tolist()})


def surface_radius_range(surface) -> tuple:
    if isinstance(surface, RevolutionHypersurface):
        return surface.radius_range
    rad = np.linalg.norm(surface.vertices, axis=1)
    return float(rad.min()), float(rad.max())


def make_testfn(spec, surface) -> ScalarField:
    """Build a test function for ``surface`` from a spec string or dict.

    Families: ``radial_bump:delta=..,R=..``, ``log_cutoff:eps=..,R=..[,p=..]``,
    ``ground_state_cutoff:eps=..,R=..``, ``cone:R=..``,
    ``random_bump:seed=..,count=..``, ``constant[:value=..]`` and
    ``expr:f=<expression in x1,x2,x3,r>`` (mesh only).

    Raises
    ------
    SupportOutsideSurface
        If the declared support annulus misses the surface entirely.
    """
    name, p = parse_spec(spec)
    n = surface.n
    try:
        if name == "radial_bump":
            fld = radial_bump(p.get("delta", 0.25), p.get("R", 0.75))
        elif name == "cone":
            fld = cone(p.get("R", 1.0))
        elif name == "constant":
            fld = constant(p.get("value", 1.0))
        elif name == "log_cutoff":
            fld = log_cutoff(p.get("eps", 1e-2), p.get("R", 1.0), n, p.get("p", 2.0))
        elif name == "ground_state_cutoff":
            fld = ground_state_cutoff(p.get("eps", 1e-2), p.get("R", 1.0), n)
        elif name == "random_bump":
            fld = random_bump(surface, p.get("seed", 0), p.get("count", 5))
        elif name == "expr":
            if isinstance(surface, RevolutionHypersurface):
                raise BadSpec("expression test functions are mesh-only")
            text = p["f"]
            fld = ScalarField(kind="callable", func=lambda pts: eval_expr(text, point_variables(pts)),
                              name=f"expr({text})", meta={"family": "expr", "f": text})
        else:
            raise BadSpec(f"unknown test function {name!r}")
    except KeyError as exc:
        raise BadSpec(f"missing parameter {exc} for {name}") from None
    lo, hi = surface_radius_range(surface)
    s0, s1 = fld.support
    if s1 <= lo or s0 >= hi:
        raise SupportOutsideSurface(
            f"support [{s0:g}, {s1:g}] of {fld.name} misses the surface radii [{lo:g}, {hi:g}]"
        )
    return fld
