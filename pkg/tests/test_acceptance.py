"""Acceptance criteria, each run at its stated tolerance.

Every test records one PASS/FAIL line (collected in the terminal summary)
before asserting, so a failing criterion is still reported with its numbers.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

import cases
from acceptance_log import record
from hil import make_surface, make_testfn
from hil.calculus import ibp_residuals, identity_residuals, position_tangential, tangential_divergence
from hil.corpus import icosphere, octasphere
from hil.errors import DimensionTooLow, NotMinimal, ParamOutOfRange
from hil.foliation import FoliationProblem, coarea_consistency, eval_foliated_hardy
from hil.inequalities import eval_hardy_plain, eval_hardy_poincare, evaluate
from hil.isoperimetry import eval_isoperimetric, monotonicity_profile, regular_polygon_measures
from hil.sharpness import QUADRATIC, assemble_forms, min_generalized_rayleigh
from oracles import j0_first_zero, sphere_area


# --- 1 ---------------------------------------------------------------------------------
def test_criterion_1_curvature_convention():
    worst = 0.0
    for n in range(2, 7):
        S = make_surface(f"sphere:n={n}")
        t = np.linspace(S.t0, S.t1, 4001)
        worst = max(worst, float(np.max(np.abs(S.mean_curvature(t) - n))))
    errs = []
    for k in (6, 7):  # 32768 and 131072 faces
        M = octasphere(k)
        errs.append(float(np.mean(np.abs(M.per_vertex_mean_curvature - 2.0)) / 2.0))
    faces = len(octasphere(6).triangles)
    ok = worst <= 1e-10 and errs[0] <= 0.02 and errs[1] <= 0.5 * errs[0]
    record(1, ok, f"revolution max|H-n| = {worst:.2e}; mesh ({faces} faces) mean rel err "
                  f"{errs[0]:.2e} -> {errs[1]:.2e} after refinement")
    assert ok


# --- 2 ---------------------------------------------------------------------------------
MESH_CORPUS = ("icosphere:subdiv=3", "octasphere:subdiv=4", "flat_disk", "flat_annulus", "cylinder",
               "torus", "graph:f=0.3*x1*x2", "ellipsoid:a=1,b=2,c=0.5,subdiv=3", "catenoid",
               "perturbed_sphere:amplitude=0.1,subdiv=3")


def _observed_order(values, h, floor=1e-12):
    """Least-squares slope of log(residual) against log(h); ``inf`` when at roundoff."""
    values = np.asarray(values, float)
    if np.all(values <= floor):
        return math.inf
    return float(np.polyfit(np.log(h), np.log(np.maximum(values, floor)), 1)[0])


def test_criterion_2_identity_suite():
    div_x = max(float(np.max(np.abs(tangential_divergence(M, M.vertices) - M.n)))
                for M in map(make_surface, MESH_CORPUS))
    h, res = [], {"scalar": [], "vector": [], "divthm": [], "div_xT": []}
    for k in (3, 4, 5):
        M = icosphere(k)
        x = M.vertices
        v = np.exp(-((x[:, 0] - 0.3) ** 2 + x[:, 1] ** 2) / 0.2) * x[:, 0]
        w = np.exp(-x[:, 1] ** 2) * x[:, 1] + x[:, 2]
        omega = x[M.triangles].mean(axis=1)[:, 2] > 0.2
        r = ibp_residuals(M, v, w, Z=position_tangential(M), omega=omega)
        h.append(M.mean_edge_length)
        res["scalar"].append(float(np.max(r["res_scalar"])))
        res["vector"].append(r["res_vector"])
        res["divthm"].append(r["res_divthm"])
        res["div_xT"].append(identity_residuals(M)["res_div_xT"])
    orders = {k: _observed_order(v, h) for k, v in res.items()}
    # the criterion names the three integration by parts residuals; div_xT is reported only
    ok = div_x <= 1e-10 and all(orders[k] >= 1.0 for k in ("scalar", "vector", "divthm"))
    record(2, ok, f"max|div_T x - n| = {div_x:.1e}; observed orders "
                  + ", ".join(f"{k} {v:.2f}" for k, v in orders.items()) + " (div_xT not gated)")
    assert ok


# --- 3 ---------------------------------------------------------------------------------
def _rel(x, y):
    return abs(x - y) / abs(y)


def test_criterion_3_forced_equalities():
    errs = []
    for n in (3, 4, 5):
        S = make_surface(f"sphere:n={n}")
        r = evaluate("carron_improved", S, make_testfn("constant", S))
        target = n * (n - 2) / 2 * sphere_area(n)
        errs += [_rel(r.lhs, target), _rel(r.rhs, target)]
    ea = max(errs)
    errs = []
    for n in (2, 3, 4):
        S = make_surface(f"sphere:n={n}")
        for p in (1, 2, 3):
            for a in (0, 1):
                r = evaluate("hardy_ibp", S, make_testfn("constant", S), p=p, a=a)
                errs += [_rel(r.lhs, n * sphere_area(n)), _rel(r.rhs, n * sphere_area(n))]
    eb = max(errs)
    # (c) the cone does not vanish at an inner rim, so the annulus is taken to its disk limit
    D = make_surface("flat_disk:n=2,R=2")
    r = evaluate("hardy_ibp", D, make_testfn("cone:R=1", D), p=1, a=1)
    ec = max(_rel(r.lhs, math.pi), _rel(r.rhs, math.pi))
    ok = max(ea, eb, ec) <= 1e-8
    record(3, ok, f"rel errors (a) {ea:.1e} (b) {eb:.1e} (c) {ec:.1e}, tolerance 1e-8")
    assert ok


# --- 4 ---------------------------------------------------------------------------------
def _carron_ratio_oracle(n, eps, R=1.0):
    """Carron quotient of the log cutoff on flat R^n, reduced to log-radius integrals.

    With ``phi = |x|^-alpha eta(log|x|)`` and ``alpha = (n-2)/2`` the cross
    term integrates to zero, so the quotient is
    ``alpha^2 I0 / (I1 + alpha^2 I0)``, ``I0 = int eta^2``, ``I1 = int eta'^2``.
    """
    alpha = (n - 2) / 2
    w = 0.5 * math.log(R / eps)
    s = lambda u: u * u * (3 - 2 * u)
    ds = lambda u: 6 * u * (1 - u)
    i0 = 2 * w * quad(lambda u: s(u) ** 2, 0, 1)[0]
    i1 = 2 / w * quad(lambda u: ds(u) ** 2, 0, 1)[0]
    return alpha**2 * i0 / (i1 + alpha**2 * i0)


def test_criterion_4_sharpness_approach():
    eps_list = (1e-1, 1e-2, 1e-3, 1e-4)
    lines, ok, oracle_gap = [], True, 0.0
    for n in (3, 4):
        for name in ("carron", "hardy_plain"):
            ratios = []
            for eps in eps_list:
                S = make_surface(f"flat_annulus:n={n},R0={eps / 2},R1=1.5")
                ratios.append(evaluate(name, S, make_testfn(f"log_cutoff:eps={eps},R=1", S), p=2).ratio)
            # hardy_plain carries the factor 2^(p-1) p^p = 8 against (n-2)^2 = 4 alpha^2
            scale = 1.0 if name == "carron" else 0.5
            oracle = [scale * _carron_ratio_oracle(n, e) for e in eps_list]
            oracle_gap = max(oracle_gap, max(abs(a - b) for a, b in zip(ratios, oracle)))
            monotone = all(b > a for a, b in zip(ratios, ratios[1:]))
            within = abs(ratios[-1] - 1) <= 0.1
            ok &= monotone and within
            lines.append(f"n={n} {name} {ratios[-1]:.4f}{'' if monotone else ' (not monotone)'}")
    ok &= oracle_gap <= 1e-8
    record(4, ok, f"ratio at eps=1e-4 (needs within 10% of 1): {'; '.join(lines)}; "
                  f"max gap to radial oracle {oracle_gap:.1e}")
    assert ok


# --- 5 ---------------------------------------------------------------------------------
ANALYTIC_CORPUS = ("sphere:n=2", "sphere:n=3", "sphere:n=4", "sphere:n=5,R=2",
                   "flat_annulus:n=2,R0=0.01,R1=1", "flat_annulus:n=3,R0=0.01,R1=1",
                   "flat_annulus:n=4,R0=0.01,R1=1", "flat_disk:n=2", "catenoid:n=2,span=2",
                   "catenoid:n=3,span=2", "cylinder:n=2,R=1,L=2", "cylinder:n=3,R=1,L=2")


def test_criterion_5_eigen_certification():
    worst, count = math.inf, 0
    for spec in ANALYTIC_CORPUS:
        S = make_surface(spec)
        for name in QUADRATIC:
            for a in ((0.0, 1.0) if name in ("hardy_ibp", "weighted_poincare") else (None,)):
                params = {} if a is None else {"a": a}
                if name in ("weighted_poincare", "hardy_poincare"):
                    params["r"] = 1.001 * S.radius_range[1]
                try:
                    F = assemble_forms(S, name, params)
                except (DimensionTooLow, NotMinimal, ParamOutOfRange):
                    continue  # the inequality does not apply to this surface
                worst = min(worst, min_generalized_rayleigh(F).lambda_min)
                count += 1
    S = make_surface("sphere:n=3")
    F = assemble_forms(S, "carron_improved")
    res = min_generalized_rayleigh(F)
    v = F.nodes.values(res.vector)
    W = F.nodes.W
    cosine = abs(np.sum(W * v)) / math.sqrt(np.sum(W * v * v) * np.sum(W))
    ok = worst >= 1 - 1e-6 and abs(res.lambda_min - 1) <= 1e-6 and cosine >= 0.999
    record(5, ok, f"min lambda over {count} pencils = {worst:.8f}; S^3 Carron-improved "
                  f"lambda = {res.lambda_min:.10f}, cosine to constant {cosine:.6f}")
    assert ok


# --- 6 ---------------------------------------------------------------------------------
def test_criterion_6_property_sweep():
    n_cases, margin_fail, inv_fail, worst_inv = 500, [], [], 0.0
    for seed in range(n_cases):
        case = cases.draw_case(seed)
        rep = cases.run(case)
        if not cases.margin_ok(case, rep):
            margin_fail.append(seed)
        inv = max(cases.invariance_errors(case, rep).values())
        worst_inv = max(worst_inv, inv)
        if inv > cases.REL_INVARIANCE:
            inv_fail.append(seed)
    ok = not margin_fail and not inv_fail
    record(6, ok, f"{n_cases} random cases: {len(margin_fail)} margin failures, "
                  f"{len(inv_fail)} invariance failures (worst rel change {worst_inv:.1e})")
    assert ok, (margin_fail, inv_fail)


# --- 7 ---------------------------------------------------------------------------------
def test_criterion_7_minimal_surfaces():
    hmax, margins = 0.0, []
    for n in (2, 3):
        C = make_surface(f"catenoid:n={n},span=3")
        t = np.linspace(C.t0, C.t1, 4001)
        hmax = max(hmax, C.extra["ode_residual"], float(np.max(np.abs(C.mean_curvature(t)))))
    C = make_surface("catenoid:n=3,span=3")
    lo, hi = C.radius_range
    for d in np.linspace(0.0, 0.8 * hi, 5):
        for frac in (0.3, 0.6, 0.95):
            R = max(d, lo) + frac * (hi - max(d, lo))
            phi = make_testfn(f"radial_bump:delta={d:.6g},R={R:.6g}", C)
            margins.append(eval_hardy_plain(C, phi, 2.0, minimal_mode=True).margin)
    for eps in (1.05, 1.2):
        phi = make_testfn(f"log_cutoff:eps={eps},R={0.9 * hi:.6g}", C)
        margins.append(eval_hardy_plain(C, phi, 2.0, minimal_mode=True).margin)
    ok = hmax <= 1e-8 and min(margins) >= 0
    record(7, ok, f"catenoid max|H| (incl. ODE residual) = {hmax:.1e}; min minimal-form Hardy margin "
                  f"over {len(margins)} radial test functions = {min(margins):.4g}")
    assert ok


# --- 8 ---------------------------------------------------------------------------------
def test_criterion_8_isoperimetry():
    omega2 = math.pi
    poly = regular_polygon_measures(2**16)
    gap_poly = abs(2 * math.sqrt(omega2 * poly["area"]) - poly["perimeter"]) / poly["perimeter"]
    D = make_surface("flat_disk")
    mesh = eval_isoperimetric(D, "|x-(0,0,0)|<0.75", mode="flat_equality")
    gap_mesh = abs(mesh.ratio - 1)
    S = make_surface("sphere:n=2")
    prof = monotonicity_profile(S, (0.0, 2.0), (0.0, 0.0, -1.0), np.geomspace(1e-3, 1.5, 200))
    drop = -min(prof.min_forward_difference, 0.0)
    gap_lim = abs(prof.limit_estimate / omega2 - 1)
    ok = gap_poly <= 1e-6 and gap_mesh <= 0.01 and drop <= 1e-6 * omega2 and gap_lim <= 0.01
    record(8, ok, f"polygon equality gap {gap_poly:.1e}, mesh gap {gap_mesh:.1e}; profile "
                  f"min forward difference {prof.min_forward_difference:.2e}, limit/omega_2 - 1 = {gap_lim:.1e}")
    assert ok


# --- 9 ---------------------------------------------------------------------------------
@pytest.fixture(scope="module")
def radial_box():
    return FoliationProblem.box("r", "radial_bump:delta=0.5,R=1.5", a=1.0)


def test_criterion_9_foliation(radial_box):
    co_r = coarea_consistency(radial_box)["relative_difference"]
    co_z = coarea_consistency(FoliationProblem.box("x3", "radial_bump:delta=0.5,R=1.5"))["relative_difference"]
    grid = eval_foliated_hardy(radial_box)
    analytic = [eval_foliated_hardy(FoliationProblem.radial_problem(n, "radial_bump:delta=0.5,R=1.5", a=1.0))
                for n in (2, 3, 5)]
    gap_grid = abs(grid.ratio - 1)
    gap_an = max(abs(r.ratio - 1) for r in analytic)
    ok = co_r <= 0.03 and co_z <= 0.03 and gap_grid <= 0.03 and gap_an <= 1e-8
    record(9, ok, f"coarea |x| {co_r:.1e}, x3 {co_z:.1e} (128^3); radial collapse grid {gap_grid:.1e}, "
                  f"analytic {gap_an:.1e}")
    assert ok


# --- 10 --------------------------------------------------------------------------------
def test_criterion_10_hardy_poincare_disk():
    j0 = j0_first_zero()
    margins, quotients = [], []
    for spec in ("flat_disk:n=2", "flat_disk"):
        D = make_surface(spec)
        for d, R in ((0.0, 0.9), (0.2, 0.8), (0.5, 0.95)):
            rep = eval_hardy_poincare(D, make_testfn(f"radial_bump:delta={d},R={R}", D), r=1.0)
            margins.append(rep.margin - rep.tolerance)
            # reduced form (1/2) int phi^2 <= int |grad phi|^2: the Dirichlet quotient
            quotients.append(rep.terms["rhs"]["gradient_term"] / rep.terms["lhs"]["poincare_term"] / 2)
    F = assemble_forms(make_surface("flat_disk:n=2"), "hardy_poincare", {"r": 1.0}, basis="radial:32")
    lam = min_generalized_rayleigh(F).lambda_min
    ok = (min(margins) >= 0 and min(quotients) >= j0**2 * (1 - 1e-3)
          and abs(lam / (2 * j0**2) - 1) <= 1e-3)
    record(10, ok, f"j0^2 = {j0 ** 2:.6f} (bisection); min Dirichlet quotient of test functions "
                   f"{min(quotients):.4f}; discrete lambda_min/2 = {lam / 2:.6f}")
    assert ok
