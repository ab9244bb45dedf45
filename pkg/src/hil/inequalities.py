"""Both sides of the Hardy, Sobolev and Poincare type inequalities.

Every evaluator takes a surface (mesh or revolution), a test function and the
inequality parameters, and returns an :class:`InequalityReport`.  The surface
is first reduced to a :class:`Sample`: quadrature weights together with the
pointwise quantities every integrand is built from,

* ``phi`` and ``grad2 = |grad_T phi|^2``,
* ``H`` (signed, sum of principal curvatures),
* ``cos2 = (x/|x| . nu)^2`` and ``rho = |x|``.

Only flip-invariant combinations of ``H`` and ``nu`` enter the integrands.
Each report is evaluated with two quadrature rules; their difference is the
reported ``error_estimate``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import (
    DimensionTooLow,
    ExponentOutOfRange,
    HILError,
    NotMinimal,
    ParamOutOfRange,
    SupportExceedsBall,
    SupportViolation,
)
from .fields import ScalarField
from .mesh import SimplicialHypersurface
from .quadrature import QuadratureSpec, guard_density, mesh_nodes, psum, radial_weight
from .revolution import RevolutionHypersurface

REVOLUTION_REL_TOL = 1e-8
MESH_NOTE = "mesh path: verified up to the reported discretization tolerance"


# --- report --------------------------------------------------------------------
@dataclass
class InequalityReport:
    """Both sides of one inequality instance, with provenance.

    ``terms["lhs"]`` and ``terms["rhs"]`` hold the additive pieces of each
    side; ``factors`` holds raw integrals (for instance the two Hoelder
    factors of a product-form right-hand side).
    """

    name: str
    params: dict
    lhs: float
    rhs: float
    terms: dict
    factors: dict = field(default_factory=dict)
    tolerance: float = 0.0
    verdict: str = "pass"
    error_estimate: float = 0.0
    quadrature: dict = field(default_factory=dict)
    surface: dict = field(default_factory=dict)
    testfn: str = ""
    notes: list = field(default_factory=list)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs != 0 else float("nan")

    @property
    def passed(self) -> bool:
        return self.verdict != "fail"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["margin"] = self.margin
        d["ratio"] = self.ratio
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, default=_json_default, **kw)

    def flat(self) -> dict:
        """One CSV row: scalars plus dotted term and parameter names."""
        row = {"name": self.name, "surface": self.surface.get("fingerprint", ""),
               "testfn": self.testfn, "lhs": self.lhs, "rhs": self.rhs, "margin": self.margin,
               "ratio": self.ratio, "tolerance": self.tolerance, "verdict": self.verdict,
               "error_estimate": self.error_estimate}
        for k in ("n", "p", "a", "b", "r"):
            row[k] = self.params.get(k)
        for side in ("lhs", "rhs"):
            for k, v in self.terms.get(side, {}).items():
                row[f"{side}.{k}"] = v
        return row


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def reports_to_csv(reports) -> str:
    rows = [r.flat() for r in reports]
    cols = []
    for r in rows:
        cols += [k for k in r if k not in cols]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


# --- sampling --------------------------------------------------------------------
@dataclass
class Sample:
    """Quadrature nodes of a surface carrying the integrand ingredients."""

    weights: np.ndarray
    rho: np.ndarray
    phi: np.ndarray
    grad2: np.ndarray
    H: np.ndarray
    cos2: np.ndarray
    n: int
    spec: QuadratureSpec
    kind: str
    near_radius: float | np.ndarray
    support_radius: float  # largest |x| where phi does not vanish

    def integral(self, density, a: float = 0.0) -> float:
        """``int density / |x|^a`` with the singular guard for ``a > 0``."""
        density = np.asarray(density, dtype=float)
        if a > 0:
            guard_density(density, self.rho, a, self.spec, self.near_radius,
                          surface_kind=self.kind, n=self.n)
        return psum(self.weights * radial_weight(self.rho, a, self.spec) * density)


def _field_values(surface, phi):
    if isinstance(phi, ScalarField):
        return phi
    return ScalarField.from_values(phi)


def default_spec(surface, phi: ScalarField, quad: QuadratureSpec | None) -> QuadratureSpec:
    """Quadrature defaults: exclusion below the support of ``phi`` when it is away from 0."""
    quad = quad or QuadratureSpec()
    if quad.policy is not None:
        return quad
    lo = phi.support[0]
    if isinstance(surface, SimplicialHypersurface):
        lo -= surface.max_edge_length  # the PL interpolant spreads one ring further
    if lo > 0:
        return quad.with_policy("exclusion", lo)
    return quad


def sample(surface, phi, quad: QuadratureSpec | None = None, *, alt: bool = False) -> Sample:
    """Reduce ``(surface, phi)`` to quadrature arrays.

    ``alt=True`` selects the comparison rule used for the error estimate.
    """
    phi = _field_values(surface, phi)
    spec = default_spec(surface, phi, quad)
    if isinstance(surface, RevolutionHypersurface):
        return _sample_revolution(surface, phi, spec, alt)
    return _sample_mesh(surface, phi, spec, alt)


def _sample_mesh(M: SimplicialHypersurface, phi, spec, alt):
    from .calculus import _require_collar_zero, tangential_gradient

    v = phi.at_vertices(M)
    _require_collar_zero(M, v)
    degree = {2: 4, 4: 6, 6: 4}[spec.mesh_degree] if alt else spec.mesh_degree
    nodes = mesh_nodes(M, degree)
    g = tangential_gradient(M, v)
    nu = nodes.interp @ M.per_vertex_normal
    nu /= np.linalg.norm(nu, axis=1)[:, None]
    rho = nodes.radius
    with np.errstate(invalid="ignore", divide="ignore"):
        cos2 = np.where(rho > 0, np.einsum("ij,ij->i", nodes.points, nu) / rho, 0.0) ** 2
    phq = nodes.interp @ v
    nz = np.abs(v) > 0
    touched = nz[M.triangles].any(axis=1)
    sup_r = float(np.linalg.norm(M.vertices[M.triangles[touched]], axis=2).max()) if touched.any() else 0.0
    return Sample(
        weights=nodes.weights, rho=rho, phi=phq, grad2=np.sum(g * g, axis=1)[nodes.face],
        H=nodes.interp @ M.H_or_zero, cos2=cos2, n=M.n, spec=spec, kind="mesh",
        near_radius=nodes.face_size, support_radius=sup_r,
    )


def _profile_functions(R: RevolutionHypersurface, phi: ScalarField):
    """``(g(t), g'(t), extra panel breakpoints)`` for a field on a profile."""
    if phi.kind == "profile":
        g, dg = phi.profile
        return g, dg, tuple(phi.breakpoints)
    if phi.radial is None:
        raise HILError("revolution surfaces take radial or profile test functions only")
    f, df = phi.radial
    g = lambda t: np.asarray(f(R.radius(t)), dtype=float) * np.ones_like(t)
    dg = lambda t: np.asarray(df(R.radius(t)), dtype=float) * R.radial_derivative(t)
    rad = [b for b in (*phi.breakpoints, *phi.support) if np.isfinite(b) and b > 0]
    brk = tuple(t for b in rad for t in R.t_at_radius(b))
    return g, dg, brk


def _sample_revolution(R: RevolutionHypersurface, phi, spec, alt):
    g, dg, brk = _profile_functions(R, phi)
    order = max(2, spec.profile_order - 4) if alt else spec.profile_order
    t, w = R.nodes(spec.profile_panels, order, brk)
    vals = g(t)
    scale = max(float(np.max(np.abs(vals))), 1e-300)
    for tb in R.boundary_params():
        if abs(float(g(np.array([tb]))[0])) > 1e-12 * scale:
            raise SupportViolation(f"test function does not vanish at the profile end t = {tb:g}")
    rho = R.radius(t)
    nz = np.abs(vals) > 1e-14 * scale
    return Sample(
        weights=w * R.area_element(t), rho=rho, phi=vals, grad2=dg(t) ** 2,
        H=R.mean_curvature(t), cos2=(R.x_dot_nu(t) / rho) ** 2, n=R.n, spec=spec,
        kind="revolution", near_radius=1e-3 * R.diameter,
        support_radius=float(rho[nz].max()) if nz.any() else 0.0,
    )


# --- shared plumbing ---------------------------------------------------------------
def _check_p(p, lo=1.0, hi=None, n=None):
    p = float(p)
    if not np.isfinite(p) or p < lo or (hi is not None and p >= hi):
        rng = f"[{lo:g}, {hi:g})" if hi is not None else f">= {lo:g}"
        raise ParamOutOfRange(f"p = {p:g} must be {rng}" + (f" for n = {n}" if n else ""))
    return p


def _check_a(a, n):
    a = float(a)
    if not (0.0 <= a < n):
        raise ExponentOutOfRange(f"weight exponent a = {a:g} must lie in [0, n) with n = {n}")
    return a


def _surface_info(surface) -> dict:
    if isinstance(surface, RevolutionHypersurface):
        return {"fingerprint": surface.fingerprint(), "kind": "revolution",
                "profile": surface.kind, "n": surface.n, "params": _plain(surface.params)}
    return {"fingerprint": surface.fingerprint(), "kind": "mesh", "n": surface.n,
            "vertices": len(surface.vertices), "faces": len(surface.triangles),
            "h_max": surface.max_edge_length}


def _plain(d):
    return {k: (v if isinstance(v, (int, float, str, bool)) else str(v)) for k, v in d.items()}


def _tolerance(surface, s: Sample, lhs, rhs, err) -> float:
    scale = max(abs(lhs), abs(rhs))
    if isinstance(surface, RevolutionHypersurface):
        return REVOLUTION_REL_TOL * scale + 10 * err
    # Mesh path: O(h^2) consistency error of the PL discretization.  The
    # length scale is the smaller of the least radius on the support and the
    # curvature radius 2/|H|; the constant is calibrated on sphere equality
    # cases, where the measured relative defect is about 0.11 (h/R)^2.
    on = np.abs(s.phi) > 0
    rmin = float(s.rho[on].min()) if on.any() else 1.0
    hmax = float(np.max(np.abs(s.H[on]))) if on.any() else 0.0
    ell = min(rmin, 2.0 / hmax) if hmax > 0 else rmin
    h = surface.max_edge_length
    rel = MESH_H2_CONST * (h / max(ell, h)) ** 2
    return rel * scale + 10 * err


MESH_H2_CONST = 0.5


def _finish(name, surface, phi, params, quad, compute, verdict_mode="theorem", notes=()):
    """Evaluate ``compute(sample)`` with the main and comparison rules."""
    phi = _field_values(surface, phi)
    s = sample(surface, phi, quad)
    lhs_t, rhs_t, lhs, rhs, factors = compute(s)
    s2 = sample(surface, phi, quad, alt=True)
    _, _, lhs2, rhs2, _ = compute(s2)
    err = max(abs(lhs - lhs2), abs(rhs - rhs2))
    tol = _tolerance(surface, s, lhs, rhs, err)
    if verdict_mode == "empirical":
        verdict = "empirical"
    else:
        verdict = "pass" if rhs - lhs >= -tol else "fail"
    note = list(notes)
    if isinstance(surface, SimplicialHypersurface):
        note.append(MESH_NOTE)
    full = {"n": surface.n, "p": None, "a": None, "b": None, "r": None}
    full.update(params)
    return InequalityReport(
        name=name, params=full, lhs=float(lhs), rhs=float(rhs),
        terms={"lhs": {k: float(v) for k, v in lhs_t.items()},
               "rhs": {k: float(v) for k, v in rhs_t.items()}},
        factors={k: float(v) for k, v in factors.items()}, tolerance=float(tol), verdict=verdict,
        error_estimate=float(err), quadrature={**s.spec.to_dict(), "error_estimate": float(err)},
        surface=_surface_info(surface), testfn=phi.name, notes=note,
    )


def _require_in_ball(surface, phi, r):
    r = float(r)
    if not r > 0:
        raise ParamOutOfRange("ball radius r must be positive")
    s = sample(surface, phi)
    if s.support_radius >= r * (1 + 1e-12):
        raise SupportExceedsBall(
            f"test function is nonzero at |x| = {s.support_radius:.6g} >= r = {r:g}"
        )
    return r


# --- evaluators ---------------------------------------------------------------------
def eval_hardy_ibp(M, phi, p: float = 2.0, a: float = 0.0, quad=None) -> InequalityReport:
    """Hardy inequality proved by integration by parts, exponent ``p >= 1``.

    ``lhs = (n-a) int |phi|^p/|x|^a + a int (x/|x|.nu)^2 |phi|^p/|x|^a`` and
    ``rhs = (int |phi|^p/|x|^a)^((p-1)/p) (int |p grad phi - H nu phi|^p / |x|^(a-p))^(1/p)``.
    Since ``grad_T phi`` is orthogonal to the normal,
    ``|p grad phi - H nu phi|^2 = p^2 |grad phi|^2 + H^2 phi^2`` for every ``p``.
    """
    n = M.n
    p = _check_p(p)
    a = _check_a(a, n)

    def compute(s):
        ap = np.abs(s.phi) ** p
        P = s.integral(ap, a)
        G = s.integral(s.cos2 * ap, a)
        mix = (p * p * s.grad2 + s.H**2 * s.phi**2) ** (p / 2)
        Q = s.integral(mix, a - p) if a - p > 0 else psum(s.weights * s.rho ** (p - a) * mix)
        lhs_t = {"hardy_term": (n - a) * P, "geometric_term": a * G}
        rhs = P ** ((p - 1) / p) * Q ** (1 / p)
        return lhs_t, {"holder_product": rhs}, sum(lhs_t.values()), rhs, \
            {"weighted_lp": P, "geometric_integral": G, "gradient_curvature_integral": Q}

    return _finish("hardy_ibp", M, phi, {"p": p, "a": a}, quad, compute)


def eval_hardy_plain(M, phi, p: float = 2.0, minimal_mode: bool = False, quad=None,
                     minimal_tol: float = 1e-6) -> InequalityReport:
    """Hardy inequality with weight ``|x|^-p``.

    Default form: ``(n-p)^p int |phi|^p/|x|^p <= 2^(p-1) int (p^p |grad phi|^p + |H phi|^p)``.
    ``minimal_mode`` checks the sharp form on minimal hypersurfaces,
    ``((n-p)/p)^p int |phi|^p/|x|^p <= int |grad phi|^p``, and requires
    ``max |H| <= minimal_tol / (surface radius)`` on the support of ``phi``.
    """
    n = M.n
    p = _check_p(p, 1.0, n, n)
    phi = _field_values(M, phi)
    if minimal_mode:
        s = sample(M, phi, quad)
        on = np.abs(s.phi) > 0
        hmax = float(np.max(np.abs(s.H[on]))) if on.any() else 0.0
        length = (M.diameter if isinstance(M, RevolutionHypersurface) else M.bbox_diagonal) / 2
        if hmax > minimal_tol / length:
            raise NotMinimal(f"max |H| = {hmax:.3g} on the support exceeds {minimal_tol / length:.3g}")

    def compute(s):
        ap = np.abs(s.phi) ** p
        P = s.integral(ap, p)
        grad_p = s.grad2 ** (p / 2)
        if minimal_mode:
            lhs = ((n - p) / p) ** p * P
            D = psum(s.weights * grad_p)
            return {"hardy_term": lhs}, {"gradient_term": D}, lhs, D, \
                {"weighted_lp": P, "max_abs_H": float(np.max(np.abs(s.H[np.abs(s.phi) > 0]), initial=0.0))}
        lhs = (n - p) ** p * P
        D = psum(s.weights * grad_p)
        C = psum(s.weights * np.abs(s.H * s.phi) ** p)
        c = 2 ** (p - 1)
        return {"hardy_term": lhs}, {"gradient_term": c * p**p * D, "curvature_term": c * C}, \
            lhs, c * (p**p * D + C), {"weighted_lp": P, "gradient_integral": D, "curvature_integral": C}

    name = "hardy_minimal" if minimal_mode else "hardy_plain"
    return _finish(name, M, phi, {"p": p, "a": p}, quad, compute)


def eval_carron(M, phi, improved: bool = False, quad=None) -> InequalityReport:
    """Carron's inequality (``improved=False``) or its improvement with the geometric term.

    ``lhs = (n-2)^2/4 int phi^2/|x|^2 [+ (n^2-4)/4 int (x/|x|.nu)^2 phi^2/|x|^2]``,
    ``rhs = int |grad phi|^2 + (n-2)/2 int |H| phi^2/|x|``.
    """
    n = M.n
    if n < 3:
        raise DimensionTooLow(f"Carron's inequality needs n >= 3, got n = {n}")

    def compute(s):
        p2 = s.phi**2
        P = s.integral(p2, 2.0)
        G = s.integral(s.cos2 * p2, 2.0)
        D = psum(s.weights * s.grad2)
        C = s.integral(np.abs(s.H) * p2, 1.0)
        lhs_t = {"hardy_term": (n - 2) ** 2 / 4 * P,
                 "geometric_term": (n * n - 4) / 4 * G if improved else 0.0}
        rhs_t = {"gradient_term": D, "curvature_term": (n - 2) / 2 * C}
        return lhs_t, rhs_t, sum(lhs_t.values()), sum(rhs_t.values()), \
            {"weighted_l2": P, "geometric_integral": G}

    name = "carron_improved" if improved else "carron"
    return _finish(name, M, phi, {"p": 2.0, "a": 2.0}, quad, compute)


def eval_sobolev(M, phi, p: float = 1.0, quad=None) -> InequalityReport:
    """Michael-Simon and Allard Sobolev inequality, as an empirical constant.

    ``lhs = ||phi||_{p*}^p`` with ``p* = np/(n-p)``; ``rhs = int (|grad phi|^p + |H phi|^p)``.
    The ratio ``lhs/rhs`` is a lower bound for the (non-explicit) constant.
    """
    n = M.n
    p = _check_p(p, 1.0, n, n)
    ps = n * p / (n - p)

    def compute(s):
        N = psum(s.weights * np.abs(s.phi) ** ps)
        D = psum(s.weights * s.grad2 ** (p / 2))
        C = psum(s.weights * np.abs(s.H * s.phi) ** p)
        lhs = N ** (p / ps)
        return {"sobolev_norm": lhs}, {"gradient_term": D, "curvature_term": C}, lhs, D + C, \
            {"lpstar_integral": N, "p_star": ps}

    return _finish("sobolev", M, phi, {"p": p}, quad, compute, verdict_mode="empirical",
                   notes=("constant not explicit: ratio is an empirical lower bound for C",))


def eval_hardy_sobolev(M, phi, p: float = 2.0, b: float = 0.5, quad=None) -> InequalityReport:
    """Hardy-Sobolev interpolation, as an empirical constant.

    ``lhs = (int |phi|^q / |x|^(bp))^((n-p)/(n-bp))`` with ``q = p(n-bp)/(n-p)``;
    ``rhs = int (|grad phi|^p + |H phi|^p)``.  ``factors["holder_bound"]`` is the
    interpolation bound ``(int |phi|^p/|x|^p)^b (int |phi|^p*)^(1-b)`` on the
    inner integral.
    """
    n = M.n
    p = _check_p(p, 1.0, n, n)
    b = float(b)
    if not (0.0 <= b <= 1.0):
        raise ParamOutOfRange(f"b = {b:g} must lie in [0, 1]")
    q = p * (n - b * p) / (n - p)
    ps = n * p / (n - p)

    def compute(s):
        ap = np.abs(s.phi)
        inner = s.integral(ap**q, b * p)
        D = psum(s.weights * s.grad2 ** (p / 2))
        C = psum(s.weights * np.abs(s.H * s.phi) ** p)
        lhs = inner ** ((n - p) / (n - b * p))
        hardy = s.integral(ap**p, p) if b > 0 else np.nan
        sob = psum(s.weights * ap**ps)
        bound = (hardy**b if b > 0 else 1.0) * sob ** (1 - b)
        return {"hardy_sobolev_norm": lhs}, {"gradient_term": D, "curvature_term": C}, lhs, D + C, \
            {"inner_integral": inner, "hardy_integral": hardy, "lpstar_integral": sob,
             "holder_bound": bound, "q": q}

    return _finish("hardy_sobolev", M, phi, {"p": p, "b": b}, quad, compute,
                   verdict_mode="empirical",
                   notes=("constant not explicit: ratio is an empirical lower bound for C",))


def eval_weighted_poincare(M, phi, p: float = 2.0, a: float = 0.0, r: float = 1.0,
                           quad=None) -> InequalityReport:
    """Weighted Poincare inequality for ``phi`` supported in the ball ``B_r``.

    ``lhs = (n-a)^p int |phi|^p/|x|^a``;
    ``rhs = 2^(p-1) r^p int (p^p |grad phi|^p + |H phi|^p)/|x|^a``.
    """
    n = M.n
    p = _check_p(p)
    a = _check_a(a, n)
    phi = _field_values(M, phi)
    r = _require_in_ball(M, phi, r)

    def compute(s):
        P = s.integral(np.abs(s.phi) ** p, a)
        D = s.integral(s.grad2 ** (p / 2), a)
        C = s.integral(np.abs(s.H * s.phi) ** p, a)
        c = 2 ** (p - 1) * r**p
        lhs = (n - a) ** p * P
        rhs_t = {"gradient_term": c * p**p * D, "curvature_term": c * C}
        return {"poincare_term": lhs}, rhs_t, lhs, sum(rhs_t.values()), \
            {"weighted_lp": P, "gradient_integral": D, "curvature_integral": C}

    return _finish("weighted_poincare", M, phi, {"p": p, "a": a, "r": r}, quad, compute)


def eval_hardy_poincare(M, phi, r: float = 1.0, quad=None) -> InequalityReport:
    """Improved Hardy inequality in the Poincare sense, ``phi`` supported in ``B_r``.

    ``lhs = (n-2)^2/4 int phi^2/|x|^2 + (n^2-4)/4 int (x/|x|.nu)^2 phi^2/|x|^2
    + 1/(2 r^2) int phi^2``;
    ``rhs = int |grad phi|^2 + (n-2)/2 int |H| phi^2/|x| + 1/4 int H^2 phi^2``.
    """
    n = M.n
    if n < 2:
        raise DimensionTooLow("n must be at least 2")
    phi = _field_values(M, phi)
    r = _require_in_ball(M, phi, r)

    def compute(s):
        p2 = s.phi**2
        # for n = 2 both Hardy coefficients vanish; skip the singular integrals
        P = s.integral(p2, 2.0) if n > 2 else 0.0
        G = s.integral(s.cos2 * p2, 2.0) if n > 2 else 0.0
        L2 = psum(s.weights * p2)
        D = psum(s.weights * s.grad2)
        C = s.integral(np.abs(s.H) * p2, 1.0) if n > 2 else 0.0
        H2 = psum(s.weights * s.H**2 * p2)
        lhs_t = {"hardy_term": (n - 2) ** 2 / 4 * P, "geometric_term": (n * n - 4) / 4 * G,
                 "poincare_term": L2 / (2 * r * r)}
        rhs_t = {"gradient_term": D, "curvature_term": (n - 2) / 2 * C + H2 / 4}
        return lhs_t, rhs_t, sum(lhs_t.values()), sum(rhs_t.values()), \
            {"weighted_l2": P, "geometric_integral": G, "l2": L2, "abs_H_integral": C,
             "H2_integral": H2}

    return _finish("hardy_poincare", M, phi, {"p": 2.0, "r": r}, quad, compute)


# --- registry ----------------------------------------------------------------------
def evaluate(name: str, surface, phi, *, p=None, a=None, b=None, r=None, quad=None) -> InequalityReport:
    """Dispatch by inequality name (the names used by the command line)."""
    opt = lambda v, d: d if v is None else v
    if name == "hardy_ibp":
        return eval_hardy_ibp(surface, phi, opt(p, 2.0), opt(a, 0.0), quad)
    if name == "hardy_plain":
        return eval_hardy_plain(surface, phi, opt(p, 2.0), False, quad)
    if name == "hardy_minimal":
        return eval_hardy_plain(surface, phi, opt(p, 2.0), True, quad)
    if name in ("carron", "carron_improved"):
        _require_p2(p, name)
        return eval_carron(surface, phi, name == "carron_improved", quad)
    if name == "sobolev":
        return eval_sobolev(surface, phi, opt(p, 1.0), quad)
    if name == "hardy_sobolev":
        return eval_hardy_sobolev(surface, phi, opt(p, 2.0), opt(b, 0.5), quad)
    if name == "weighted_poincare":
        return eval_weighted_poincare(surface, phi, opt(p, 2.0), opt(a, 0.0), opt(r, 1.0), quad)
    if name == "hardy_poincare":
        _require_p2(p, name)
        return eval_hardy_poincare(surface, phi, opt(r, 1.0), quad)
    raise ParamOutOfRange(f"unknown inequality {name!r}; known: {', '.join(INEQUALITY_NAMES)}")


def _require_p2(p, name):
    if p is not None and float(p) != 2.0:
        raise ParamOutOfRange(f"{name} is a p = 2 inequality")


INEQUALITY_NAMES = ("hardy_ibp", "hardy_plain", "hardy_minimal", "carron", "carron_improved",
                    "sobolev", "hardy_sobolev", "weighted_poincare", "hardy_poincare")
