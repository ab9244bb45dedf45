"""Sharpness probes: quadratic forms, generalized Rayleigh quotients, descent.

A test function is expanded in a finite basis, ``phi_c = sum_i c_i b_i``.
For the ``p = 2`` inequalities both sides are quadratic forms, ``c^T A c``
(right-hand side) and ``c^T B c`` (left-hand side); the smallest value of
``c^T A c / c^T B c`` certifies the inequality on the subspace when it is at
least one.  Such a minimum lower-bounds nothing about the continuum: it only
says the inequality holds on the subspace.

The Hardy inequality proved by integration by parts has a product
right-hand side ``sqrt(P(c) Q(c))``.  Because
``sqrt(P Q) = min_s (e^s P + e^-s Q) / 2``, its quotient minimum is
``min_s lambda_min((e^s P + e^-s Q) / 2, B)``, a one-parameter pencil.

Bases: ``"mesh"`` uses the hat functions of a triangle mesh,
``"radial:k"`` uses ``k`` clamped cubic B-splines in the profile parameter
of a revolution hypersurface.  Basis functions that would violate the
support constraints (boundary collar, profile boundary ends, ball radius)
are dropped.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.interpolate import BSpline
from scipy.optimize import minimize_scalar
from scipy.sparse.linalg import splu

from .errors import (BadSpec, DimensionTooLow, NonQuadratic, NotMinimal, ParamOutOfRange, SingularIntegrand,
                     SingularPencil, SolverStall)
from .fields import ScalarField
from .inequalities import INEQUALITY_NAMES, _check_a, _check_p, _profile_functions
from .mesh import SimplicialHypersurface
from .quadrature import QuadratureSpec, mesh_nodes, radial_weight
from .revolution import RevolutionHypersurface

MAX_ITER = 500
REL_STOP = 1e-10
MINIMAL_TOL = 1e-6
QUADRATIC = ("hardy_ibp", "hardy_plain", "hardy_minimal", "carron", "carron_improved",
             "weighted_poincare", "hardy_poincare")


# --- basis and node data ------------------------------------------------------------
@dataclass
class NodeData:
    """Quadrature nodes with basis values and gradients.

    ``V`` maps coefficients to node values (nq, m); ``G`` maps them to
    stacked gradient components (k * nq, m), component-major per node.
    """

    W: np.ndarray
    rho: np.ndarray
    H: np.ndarray
    cos2: np.ndarray
    V: object
    G: object
    k: int
    n: int
    descriptor: dict
    to_field: object = field(repr=False)
    restrict: object = field(repr=False)
    spec: QuadratureSpec = field(default_factory=QuadratureSpec)

    @property
    def m(self) -> int:
        return self.V.shape[1]

    def weight(self, a: float) -> np.ndarray:
        if a > 0 and np.any(self.rho == 0):
            raise SingularIntegrand("a quadrature node sits at the origin")
        return radial_weight(self.rho, a, self.spec)

    def mass(self, dens) -> np.ndarray:
        d = self.W * dens
        return _sym(self.V.T @ _scale_rows(self.V, d))

    def stiffness(self, dens) -> np.ndarray:
        d = np.repeat(self.W * dens, self.k)
        return _sym(self.G.T @ _scale_rows(self.G, d))

    def values(self, c):
        return self.V @ c

    def gradients(self, c):
        return (self.G @ c).reshape(-1, self.k)


def _dense(M):
    return M.toarray() if sp.issparse(M) else np.asarray(M)


def _scale_rows(M, d):
    return sp.diags(d) @ M if sp.issparse(M) else d[:, None] * M


def _sym(M):
    M = M.toarray() if sp.issparse(M) else np.asarray(M)
    return 0.5 * (M + M.T)


def _mesh_basis(M: SimplicialHypersurface, spec: QuadratureSpec, r_ball=None) -> NodeData:
    nodes = mesh_nodes(M, spec.mesh_degree)
    keep = ~M.boundary_collar
    if r_ball is not None:
        far = np.zeros(len(M.vertices), dtype=bool)
        # a hat function reaches one ring: drop it if any face it touches leaves the ball
        out_face = np.linalg.norm(M.vertices[M.triangles], axis=2).max(axis=1) >= r_ball
        far[M.triangles[out_face].ravel()] = True
        keep &= ~far
    idx = np.flatnonzero(keep)
    if idx.size == 0:
        raise BadSpec("no admissible basis functions on this mesh")
    P = sp.csr_matrix((np.ones(idx.size), (idx, np.arange(idx.size))), shape=(len(M.vertices), idx.size))
    V = (nodes.interp @ P).tocsr()
    grad = M.gradient_operator @ P  # (3 nf, m)
    rows = (3 * nodes.face[:, None] + np.arange(3)[None, :]).ravel()
    G = grad.tocsr()[rows]
    nu = nodes.interp @ M.per_vertex_normal
    nu /= np.linalg.norm(nu, axis=1)[:, None]
    rho = nodes.radius
    with np.errstate(invalid="ignore", divide="ignore"):
        cos2 = np.where(rho > 0, np.einsum("ij,ij->i", nodes.points, nu) / rho, 0.0) ** 2

    def to_field(c):
        v = np.zeros(len(M.vertices))
        v[idx] = c
        return ScalarField.from_values(v, name="basis_combination")

    def restrict(fld):
        return np.asarray(fld.at_vertices(M), dtype=float)[idx]

    return NodeData(nodes.weights, rho, nodes.interp @ M.H_or_zero, cos2, V, G, 3, M.n,
                    {"basis": "mesh", "size": int(idx.size)}, to_field, restrict, spec)


def _radial_basis(R: RevolutionHypersurface, k: int, spec: QuadratureSpec, r_ball=None) -> NodeData:
    if k < 4:
        raise BadSpec("radial basis needs k >= 4")
    t0, t1 = R.t0, R.t1
    if r_ball is not None:
        hits = [t for t in R.t_at_radius(r_ball)]
        if R.radius(np.array([t0]))[0] < r_ball and hits:
            t1 = min(hits)
        elif hits:
            raise BadSpec("ball constraint needs the profile to start inside the ball")
    inner = R.panel_edges(k - 3)
    inner = inner[(inner > t0) & (inner < t1)]
    if r_ball is not None or len(inner) != k - 4:
        inner = np.interp(np.linspace(0, 1, k - 2)[1:-1], np.linspace(0, 1, len(inner) + 2),
                          np.concatenate([[t0], inner, [t1]]))
    knots = np.concatenate([[t0] * 4, inner, [t1] * 4])
    m = len(knots) - 4
    drop = set()
    if not (R.axis_ends[0] and t0 == R.t0):
        drop.add(0)
    if not (R.axis_ends[1] and t1 == R.t1) or r_ball is not None:
        drop.add(m - 1)
    keep = [i for i in range(m) if i not in drop]
    basis = [BSpline(knots, np.eye(m)[i], 3, extrapolate=False) for i in keep]
    brk = tuple(np.unique(knots))
    t, w = R.nodes(spec.profile_panels, spec.profile_order, brk)

    def evaluate(tt, deriv=0):
        out = np.column_stack([np.nan_to_num(b(tt, nu=deriv)) for b in basis])
        return np.where(((tt >= t0) & (tt <= t1))[:, None], out, 0.0)

    V = evaluate(t)
    G = evaluate(t, 1)

    def to_field(c):
        c = np.asarray(c, dtype=float)
        g = lambda tt: evaluate(np.atleast_1d(np.asarray(tt, dtype=float))) @ c
        dg = lambda tt: evaluate(np.atleast_1d(np.asarray(tt, dtype=float)), 1) @ c
        return ScalarField(kind="profile", profile=(g, dg), breakpoints=brk, name="basis_combination")

    def restrict(fld):
        g = _profile_functions(R, fld)[0]
        sw = np.sqrt(w)
        return np.linalg.lstsq(V * sw[:, None], sw * g(t), rcond=None)[0]

    rho = R.radius(t)
    return NodeData(w * R.area_element(t), rho, R.mean_curvature(t), (R.x_dot_nu(t) / rho) ** 2,
                    V, G, 1, R.n, {"basis": f"radial:{k}", "size": len(keep), "knots": brk},
                    to_field, restrict, spec)


def make_basis(M, basis: str = "auto", spec: QuadratureSpec | None = None, r_ball=None) -> NodeData:
    spec = spec or QuadratureSpec()
    if basis == "auto":
        basis = "radial:24" if isinstance(M, RevolutionHypersurface) else "mesh"
    if basis == "mesh":
        if not isinstance(M, SimplicialHypersurface):
            raise BadSpec("the mesh basis needs a triangle mesh")
        return _mesh_basis(M, spec, r_ball)
    if basis.startswith("radial:"):
        if not isinstance(M, RevolutionHypersurface):
            raise BadSpec("the radial basis needs a revolution hypersurface")
        return _radial_basis(M, int(basis.split(":")[1]), spec, r_ball)
    raise BadSpec(f"unknown basis {basis!r}")


# --- forms --------------------------------------------------------------------------
@dataclass
class FormPair:
    """Quadratic forms of an inequality on a finite basis.

    ``A`` is the right-hand side and ``B`` the left-hand side.  For the
    product form of the integration-by-parts Hardy inequality ``A`` is
    ``None`` and ``product = (P, Q)`` with right-hand side
    ``sqrt(c^T P c * c^T Q c)``.
    """

    A: np.ndarray | None
    B: np.ndarray
    inequality: str
    params: dict
    descriptor: dict
    nodes: NodeData = field(repr=False)
    product: tuple | None = None

    @property
    def m(self) -> int:
        return self.B.shape[0]

    def rhs(self, c) -> float:
        c = np.asarray(c, dtype=float)
        if self.product is not None:
            P, Q = self.product
            return float(np.sqrt(max(c @ P @ c, 0.0) * max(c @ Q @ c, 0.0)))
        return float(c @ self.A @ c)

    def lhs(self, c) -> float:
        c = np.asarray(c, dtype=float)
        return float(c @ self.B @ c)

    def pencil(self, s: float = 0.0) -> np.ndarray:
        """Right-hand matrix at log-parameter ``s`` (the matrix ``A`` itself for quadratic forms)."""
        if self.product is None:
            return self.A
        P, Q = self.product
        return 0.5 * (np.exp(s) * P + np.exp(-s) * Q)

    def field(self, c) -> ScalarField:
        return self.nodes.to_field(np.asarray(c, dtype=float))


def assemble_forms(M, inequality_name: str, params: dict | None = None, basis: str = "auto",
                   spec: QuadratureSpec | None = None) -> FormPair:
    """Assemble ``(A, B)`` for a ``p = 2`` inequality.

    Parameters
    ----------
    M : SimplicialHypersurface or RevolutionHypersurface
    inequality_name : str
        One of ``hardy_ibp``, ``hardy_plain``, ``hardy_minimal``, ``carron``,
        ``carron_improved``, ``weighted_poincare``, ``hardy_poincare``.
    params : dict
        ``p`` (must be 2), ``a`` and ``r`` where relevant.
    basis : str
        ``"mesh"``, ``"radial:k"`` or ``"auto"``.

    Raises
    ------
    NonQuadratic
        For ``p != 2`` or a non-quadratic inequality.
    """
    params = dict(params or {})
    p = float(params.get("p", 2.0))
    if p != 2.0 or inequality_name not in QUADRATIC:
        if inequality_name not in INEQUALITY_NAMES:
            raise ParamOutOfRange(f"unknown inequality {inequality_name!r}")
        raise NonQuadratic(f"{inequality_name} with p = {p:g} is not a quadratic form")
    if inequality_name in ("carron", "carron_improved") and M.n < 3:
        raise DimensionTooLow(f"Carron's inequality needs n >= 3, got n = {M.n}")
    if inequality_name in ("hardy_plain", "hardy_minimal") and not p < M.n:
        raise ParamOutOfRange(f"{inequality_name} needs p < n, got p = {p:g}, n = {M.n}")
    D = make_basis(M, basis, spec, _ball_radius(inequality_name, params))
    if inequality_name == "hardy_minimal":
        length = (M.diameter if isinstance(M, RevolutionHypersurface) else M.bbox_diagonal) / 2
        hmax = float(np.max(np.abs(D.H)))
        if hmax > MINIMAL_TOL / length:
            raise NotMinimal(f"max |H| = {hmax:.3g} exceeds {MINIMAL_TOL / length:.3g}")
    return _forms(D, inequality_name, params)


def _ball_radius(name, params):
    return float(params.get("r", 1.0)) if name in ("weighted_poincare", "hardy_poincare") else None


def _forms(D: NodeData, name: str, params: dict) -> FormPair:
    n = D.n
    one = np.ones_like(D.rho)
    H = D.H
    product = None
    A = None
    if name == "hardy_ibp":
        a = _check_a(params.get("a", 0.0), n)
        wa = D.weight(a)
        B = (n - a) * D.mass(wa) + a * D.mass(D.cos2 * wa)
        wq = D.rho ** (2 - a) if a <= 2 else D.weight(a - 2)
        product = (D.mass(wa), 4 * D.stiffness(wq) + D.mass(H**2 * wq))
    elif name == "hardy_plain":
        B = (n - 2) ** 2 * D.mass(D.weight(2.0))
        A = 2 * (4 * D.stiffness(one) + D.mass(H**2))
    elif name == "hardy_minimal":
        B = ((n - 2) / 2) ** 2 * D.mass(D.weight(2.0))
        A = D.stiffness(one)
    elif name in ("carron", "carron_improved"):
        w2 = D.weight(2.0)
        B = (n - 2) ** 2 / 4 * D.mass(w2)
        if name == "carron_improved":
            B = B + (n * n - 4) / 4 * D.mass(D.cos2 * w2)
        A = D.stiffness(one) + (n - 2) / 2 * D.mass(np.abs(H) * D.weight(1.0))
    elif name == "weighted_poincare":
        a = _check_a(params.get("a", 0.0), n)
        r = float(params.get("r", 1.0))
        wa = D.weight(a)
        B = (n - a) ** 2 * D.mass(wa)
        A = 2 * r**2 * (4 * D.stiffness(wa) + D.mass(H**2 * wa))
    else:  # hardy_poincare
        r = float(params.get("r", 1.0))
        # for n = 2 the Hardy coefficients vanish; skip the singular weights
        B = D.mass(one) / (2 * r * r)
        A = D.stiffness(one) + D.mass(H**2) / 4
        if n > 2:
            w2 = D.weight(2.0)
            B = B + (n - 2) ** 2 / 4 * D.mass(w2) + (n * n - 4) / 4 * D.mass(D.cos2 * w2)
            A = A + (n - 2) / 2 * D.mass(np.abs(H) * D.weight(1.0))
    return FormPair(A, B, name, {"p": 2.0, **params}, D.descriptor, D, product)


# --- generalized eigenvalues ----------------------------------------------------------
@dataclass
class RayleighResult:
    lambda_min: float
    vector: np.ndarray
    iterations: int
    converged: bool
    certified: bool
    note: str

    def to_dict(self) -> dict:
        return {"lambda_min": self.lambda_min, "iterations": self.iterations,
                "converged": self.converged, "certified": self.certified, "note": self.note}


def _smallest(A, B, block: int = 6, seed: int = 0, x0=None, max_iter: int = MAX_ITER):
    """Block inverse iteration with Rayleigh-Ritz for ``min c^T A c / c^T B c``.

    Iterates ``X <- A^-1 B X``, which amplifies the largest ``mu`` of
    ``B x = mu A x``; ``lambda = 1/mu``.  Directions in the kernel of ``B``
    have ``mu = 0`` and are deflated by the Ritz step.
    """
    m = A.shape[0]
    try:
        lu = splu(sp.csc_matrix(A))
    except RuntimeError as exc:
        raise SingularPencil(f"right-hand form is singular: {exc}") from None
    if not np.all(np.isfinite(lu.U.diagonal())) or np.min(np.abs(lu.U.diagonal())) == 0:
        raise SingularPencil("right-hand form is singular")
    b = min(block, m)
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((m, b))
    X[:, 0] = 1.0 if x0 is None else x0
    lam_old = np.inf
    for it in range(1, max_iter + 1):
        Y = lu.solve(B @ X)
        Y, _ = np.linalg.qr(Y)
        Ab, Bb = Y.T @ A @ Y, Y.T @ B @ Y
        Ab, Bb = 0.5 * (Ab + Ab.T), 0.5 * (Bb + Bb.T)
        try:
            mu, Z = la.eigh(Bb, Ab)
        except la.LinAlgError:
            raise SingularPencil("right-hand form is not positive definite on the basis") from None
        if mu[-1] <= 0:
            raise SingularPencil("left-hand form vanishes on the admissible subspace")
        order = np.argsort(mu)[::-1]
        X = Y @ Z[:, order]
        lam = 1.0 / mu[order[0]]
        if abs(lam - lam_old) <= REL_STOP * abs(lam):
            return lam, X[:, 0], it, True
        lam_old = lam
    return lam, X[:, 0], max_iter, False


def min_generalized_rayleigh(F: FormPair, tol: float = 1e-6, seed: int = 0) -> RayleighResult:
    """Minimum of ``rhs(c) / lhs(c)`` over the admissible basis span.

    Returns the value, a minimizing coefficient vector normalized to
    ``c^T B c = 1`` and the iteration count.  ``certified`` states that the
    minimum is at least ``1 - tol``, i.e. the inequality holds on the
    subspace; it never claims sharpness.

    Raises
    ------
    SolverStall
        No convergence within 500 iterations.
    SingularPencil
        The right-hand form is singular or the left-hand form vanishes.
    """
    if F.product is None:
        lam, c, its, ok = _smallest(F.A, F.B, seed=seed)
    else:
        cache = {}

        def f(s):
            out = _smallest(F.pencil(s), F.B, seed=seed)
            cache[s] = out
            return out[0]

        P, Q = F.product
        s0 = 0.5 * np.log(max(np.trace(Q), 1e-300) / max(np.trace(P), 1e-300))
        res = minimize_scalar(f, bounds=(s0 - 12, s0 + 12), method="bounded",
                              options={"xatol": 1e-7})
        lam, c, its, ok = cache.get(res.x) or _smallest(F.pencil(res.x), F.B, seed=seed)
        # only the evaluation at the optimal s must converge; far-off trial values of s
        # give badly conditioned pencils that are irrelevant to the minimum
        its = sum(v[2] for v in cache.values())
    if not ok:
        raise SolverStall(f"no convergence in {MAX_ITER} iterations (last estimate {lam:.6g})")
    bn = F.lhs(c)
    c = c / np.sqrt(bn) if bn > 0 else c
    if np.sum(c) < 0:
        c = -c
    cert = lam >= 1 - tol
    note = "certified >= 1 on subspace" if cert else "below 1 on subspace"
    return RayleighResult(float(lam), c, int(its), True, bool(cert), note)


def dense_min_rayleigh(F: FormPair, s: float = 0.0) -> float:
    """Reference value from a dense generalized eigensolver (for cross-checks)."""
    mu = la.eigh(F.B, F.pencil(s), eigvals_only=True)
    return float(1.0 / mu[-1])


# --- general-p descent ---------------------------------------------------------------
def _general_terms(D: NodeData, name: str, params: dict, p: float):
    """Return ``quotient(c) -> (q, grad)`` built from node data for exponent ``p``."""
    n = D.n
    H, cos2 = D.H, D.cos2

    def power(dens):
        def f(c):
            v = D.values(c)
            av = np.abs(v)
            val = float(np.sum(D.W * dens * av**p))
            g = D.V.T @ (D.W * dens * p * av ** (p - 1) * np.sign(v))
            return val, np.asarray(g).ravel()
        return f

    def gradient(dens):
        def f(c):
            gv = D.gradients(c)
            nrm = np.linalg.norm(gv, axis=1)
            val = float(np.sum(D.W * dens * nrm**p))
            with np.errstate(invalid="ignore", divide="ignore"):
                fac = np.where(nrm > 0, p * nrm ** (p - 2), 0.0)
            g = D.G.T @ ((D.W * dens * fac)[:, None] * gv).ravel()
            return val, np.asarray(g).ravel()
        return f

    def mixed(dens):
        def f(c):
            v = D.values(c)
            gv = D.gradients(c)
            base = p * p * np.sum(gv * gv, axis=1) + H**2 * v**2
            val = float(np.sum(D.W * dens * base ** (p / 2)))
            with np.errstate(invalid="ignore", divide="ignore"):
                fac = np.where(base > 0, p * base ** (p / 2 - 1), 0.0)
            g = D.G.T @ ((D.W * dens * fac * p * p)[:, None] * gv).ravel() \
                + D.V.T @ (D.W * dens * fac * H**2 * v)
            return val, np.asarray(g).ravel()
        return f

    if name == "hardy_ibp":
        a = _check_a(params.get("a", 0.0), n)
        wa = D.weight(a)
        wq = D.rho ** (p - a) if a <= p else D.weight(a - p)
        T = {"P": power(wa), "G": power(cos2 * wa), "Q": mixed(wq)}
        lhs = lambda t: (n - a) * t["P"] + a * t["G"]
        rhs = lambda t: t["P"] ** ((p - 1) / p) * t["Q"] ** (1 / p)
    elif name in ("hardy_plain", "hardy_minimal"):
        _check_p(p, 1.0, n, n)
        T = {"P": power(D.weight(p)), "D": gradient(np.ones_like(D.rho)),
             "C": power(np.abs(H) ** p)}
        if name == "hardy_minimal":
            lhs = lambda t: ((n - p) / p) ** p * t["P"]
            rhs = lambda t: t["D"]
        else:
            lhs = lambda t: (n - p) ** p * t["P"]
            rhs = lambda t: 2 ** (p - 1) * (p**p * t["D"] + t["C"])
    elif name == "weighted_poincare":
        a = _check_a(params.get("a", 0.0), n)
        r = float(params.get("r", 1.0))
        wa = D.weight(a)
        T = {"P": power(wa), "D": gradient(wa), "C": power(np.abs(H) ** p * wa)}
        lhs = lambda t: (n - a) ** p * t["P"]
        rhs = lambda t: 2 ** (p - 1) * r**p * (p**p * t["D"] + t["C"])
    elif name in ("carron", "carron_improved", "hardy_poincare"):
        if p != 2:
            raise ParamOutOfRange(f"{name} is a p = 2 inequality")
        F = _forms(D, name, params)
        T = None
    else:
        raise NonQuadratic(f"no descent quotient for {name!r}")

    if T is None:
        def quotient(c):
            Ac, Bc = F.A @ c, F.B @ c
            num, den = float(c @ Ac), float(c @ Bc)
            return num / den, (2 * Ac - 2 * (num / den) * Bc) / den
        return quotient

    def quotient(c):
        vals, grads = {}, {}
        for key, fn in T.items():
            vals[key], grads[key] = fn(c)
        L, R = lhs(vals), rhs(vals)
        if not L > 0:
            return np.inf, np.zeros_like(c)
        gq = np.zeros_like(c)
        for key in T:
            h = 1e-7 * max(abs(vals[key]), 1e-300)
            up, dn = dict(vals), dict(vals)
            up[key] += h
            dn[key] -= h if vals[key] > h else 0.0
            step = up[key] - dn[key]
            dq = (rhs(up) / lhs(up) - rhs(dn) / lhs(dn)) / step
            gq += dq * grads[key]
        return R / L, gq

    return quotient


@dataclass
class QuotientResult:
    best_quotient: float
    coefficients: np.ndarray
    field: ScalarField
    starts: list
    iterations: int

    def to_dict(self) -> dict:
        return {"best_quotient": self.best_quotient, "starts": self.starts, "iterations": self.iterations}


def optimize_quotient(M, inequality_name: str, params: dict | None = None, p: float = 2.0,
                      basis: str = "auto", starts: int = 8, seed: int = 0, start=None,
                      max_iter: int = MAX_ITER) -> QuotientResult:
    """Minimize ``rhs/lhs`` over normalized coefficient vectors by projected gradient descent.

    Each of ``starts`` seeded starting vectors (the first one is ``start``
    when given, a field or a coefficient vector) is normalized to the unit
    L2 sphere of the basis, moved along the tangential gradient in the H1
    metric ``mass + l^2 stiffness`` (Polak-Ribiere momentum, backtracking
    line search) and renormalized.  The quotient is homogeneous of degree zero, so the
    projection loses nothing.  The best value found is returned; no claim of
    global optimality is made.

    Raises
    ------
    SolverStall
        If no start reaches the stopping rule within ``max_iter`` steps.
    """
    params = dict(params or {})
    p = float(p)
    D = make_basis(M, basis, None, _ball_radius(inequality_name, params))
    quotient = _general_terms(D, inequality_name, params, p)
    rng = np.random.default_rng(seed)
    inits = []
    if start is not None:
        inits.append(_project_start(D, M, start))
    while len(inits) < starts:
        inits.append(np.abs(rng.standard_normal(D.m)) + 0.1)
    best = (np.inf, None)
    log_rows, total_its, converged = [], 0, 0
    gram = D.mass(np.ones_like(D.rho))
    stiff = D.stiffness(np.ones_like(D.rho))
    # H1 Riesz map: the L2 gradient alone is dominated by oscillating modes
    metric = _dense(gram) + np.trace(_dense(gram)) / max(np.trace(_dense(stiff)), 1e-300) * _dense(stiff)
    gram_f = la.cho_factor(metric + 1e-14 * np.trace(metric) / D.m * np.eye(D.m))
    unit = lambda v: v / np.sqrt(v @ gram @ v)
    for k, c in enumerate(inits):
        c = unit(c)
        q, g = quotient(c)
        step = 1.0
        done = False
        d_old = r_old = None
        for it in range(1, max_iter + 1):
            # gradient in the L2 metric of the basis, projected to the tangent space
            r = la.cho_solve(gram_f, g)
            r = r - (c @ gram @ r) * c
            if d_old is None:
                d = -r
            else:
                beta = max(0.0, float(g @ (r - r_old)) / max(float(g_old @ r_old), 1e-300))
                d = -r + beta * d_old
                if g @ d >= 0:
                    d = -r
            dn = np.sqrt(abs(d @ gram @ d))
            if dn == 0 or not np.isfinite(q):
                done = True
                break
            improved = False
            while step > 1e-14:
                trial = unit(c + step * d / dn)
                qt, gtr = quotient(trial)
                if qt < q:
                    improved = True
                    break
                step *= 0.5
            if not improved:
                done = True
                break
            rel = (q - qt) / max(abs(q), 1e-300)
            d_old, r_old, g_old = d, r, g
            c, q, g = trial, qt, gtr
            step = min(2 * step, 1.0)
            if rel < REL_STOP:
                done = True
                break
        total_its += it
        converged += done
        log_rows.append({"start": k, "quotient": float(q), "iterations": it, "converged": done})
        if q < best[0]:
            best = (q, c)
    if not converged:
        raise SolverStall(f"no start converged in {max_iter} iterations")
    q, c = best
    return QuotientResult(float(q), c, D.to_field(c), log_rows, total_its)


def _project_start(D: NodeData, M, start):
    if isinstance(start, str):
        from .corpus import make_testfn

        start = make_testfn(start, M)
    if isinstance(start, ScalarField):
        return D.restrict(start)
    return np.asarray(start, dtype=float)


# --- sweeps -------------------------------------------------------------------------
SWEEP_COLUMNS = ("surface", "inequality", "p", "a", "param", "lambda_min", "iterations")


def sweep_rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items() if k in SWEEP_COLUMNS})
    return buf.getvalue()
