"""Randomized (surface, test function, parameters) cases shared by the
property suite and the acceptance sweep.

A case is drawn from a single integer seed so that hypothesis can shrink it
and the acceptance sweep can replay a fixed list.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.spatial.transform import Rotation

from hil import ScalarField, make_surface, make_testfn
from hil.corpus import surface_radius_range
from hil.inequalities import evaluate
from hil.revolution import RevolutionHypersurface

REVOLUTION_SPECS = (
    "sphere:n=2", "sphere:n=3", "sphere:n=4,R=2", "sphere:n=6",
    "flat_annulus:n=2,R0=0.01,R1=2", "flat_annulus:n=3,R0=0.01,R1=2", "flat_annulus:n=5,R0=0.05,R1=1",
    "catenoid:n=2,span=2", "catenoid:n=3,span=2", "cylinder:n=3,R=1,L=2",
)
MESH_SPECS = (
    "icosphere:subdiv=3", "perturbed_sphere:amplitude=0.1,subdiv=3",
    "ellipsoid:a=1,b=1.4,c=0.8,subdiv=3", "torus:nu=48,nv=24", "catenoid:segments=48",
    "cylinder:segments=48", "flat_annulus:R0=0.05,R1=1,segments=48",
)
VERDICT_INEQUALITIES = ("hardy_ibp", "hardy_plain", "carron", "carron_improved",
                        "weighted_poincare", "hardy_poincare")
EMPIRICAL_INEQUALITIES = ("sobolev", "hardy_sobolev")
SCALARS = ("lhs", "rhs")
REL_INVARIANCE = 1e-10


@lru_cache(maxsize=None)
def surface(spec: str):
    return make_surface(spec)


def admissible_radii(M) -> tuple:
    """Radius interval a radial support may occupy without touching the boundary collar."""
    lo, hi = surface_radius_range(M)
    if isinstance(M, RevolutionHypersurface) or M.is_closed:
        return lo, hi
    rad = np.linalg.norm(M.vertices, axis=1)
    collar = rad[M.boundary_collar]
    mid = np.median(rad)
    inner, outer = collar[collar < mid], collar[collar >= mid]
    return (inner.max() if inner.size else lo), (outer.min() if outer.size else hi)


def _testfn(M, rng: np.random.Generator):
    """A random admissible test function on ``M``."""
    lo, hi = admissible_radii(M)
    span = hi - lo
    closed = M.is_closed
    family = str(rng.choice(["radial_bump", "random_bump", "log_cutoff", "constant"]))
    if family == "constant" and not closed:
        family = "radial_bump"
    if family == "log_cutoff" and (closed or lo == 0):
        family = "radial_bump"
    if family == "constant":
        return family, make_testfn("constant", M)
    if family == "random_bump":
        fld = make_testfn(f"random_bump:seed={int(rng.integers(1 << 30))},count={int(rng.integers(1, 6))}", M)
        if isinstance(M, RevolutionHypersurface):
            return family, fld
        values = fld.at_vertices(M)
        values[M.boundary_collar] = 0.0  # admissible: vanishes on the boundary collar
        return family, ScalarField.from_values(values, name=fld.name)
    if closed:
        # the support may cover the whole surface or cut through it
        d = float(rng.uniform(0.0, lo + 0.6 * span))
        R = max(d, lo) + float(rng.uniform(0.1, 1.0)) * (span + 0.5 * lo + 0.1)
    else:
        # strictly inside the radius range so the field vanishes near the boundary
        d = lo + span * float(rng.uniform(0.02, 0.5))
        R = d + (hi - d) * float(rng.uniform(0.3, 0.95))
    if family == "log_cutoff":
        return family, make_testfn(f"log_cutoff:eps={d:.12g},R={R:.12g},p=2", M)
    return family, make_testfn(f"radial_bump:delta={d:.12g},R={R:.12g}", M)


def draw_case(seed: int, mesh: bool | None = None) -> dict:
    """Random case from an integer seed."""
    rng = np.random.default_rng(seed)
    if mesh is None:
        mesh = rng.uniform() < 0.3
    spec = str(rng.choice(MESH_SPECS if mesh else REVOLUTION_SPECS))
    M = surface(spec)
    n = M.n
    family, phi = _testfn(M, rng)
    name = str(rng.choice(VERDICT_INEQUALITIES + EMPIRICAL_INEQUALITIES))
    p = float(rng.uniform(1.0, 3.0))
    a = float(rng.uniform(0.0, n)) * 0.999
    b = float(rng.uniform(0.0, 1.0))
    if name in ("hardy_plain", "sobolev", "hardy_sobolev"):
        p = 1.0 + (min(3.0, n) - 1.0) * float(rng.uniform(0.0, 0.98))
    if name in ("carron", "carron_improved") and n < 3:
        name = "hardy_ibp"
    if name in ("carron", "carron_improved", "hardy_poincare"):
        p = 2.0
    r = None
    if name in ("weighted_poincare", "hardy_poincare"):
        r = 1.001 * surface_radius_range(M)[1]
    return {"seed": seed, "spec": spec, "surface": M, "family": family, "phi": phi, "name": name,
            "p": p, "a": a, "b": b, "r": r}


def run(case, M=None):
    M = case["surface"] if M is None else M
    kw = {k: case[k] for k in ("p", "a", "b", "r")}
    return evaluate(case["name"], M, case["phi"], **kw)


def margin_ok(case, rep) -> bool:
    """Margin condition of the property suite (empirical reports are exempt)."""
    if rep.verdict == "empirical":
        return True
    if isinstance(case["surface"], RevolutionHypersurface):
        return rep.margin >= -1e-6 * max(rep.lhs, rep.rhs, 1.0)
    return rep.margin >= -rep.tolerance


def scalars(rep) -> np.ndarray:
    vals = [rep.lhs, rep.rhs]
    for side in ("lhs", "rhs"):
        vals += [rep.terms[side][k] for k in sorted(rep.terms.get(side, {}))]
    return np.array(vals, dtype=float)


def rel_diff(x, y) -> float:
    scale = max(np.max(np.abs(x)), np.max(np.abs(y)), 1e-300)
    return float(np.max(np.abs(x - y)) / scale)


def invariance_errors(case, rep) -> dict:
    """Relative change of every report scalar under normal flip and rotation.

    Meshes: opposite orientation and a random rotation about the origin.
    Revolution surfaces: the reflection ``z -> -z`` (an ambient isometry
    fixing the origin that also reverses the profile normal).
    """
    M = case["surface"]
    base = scalars(rep)
    out = {}
    if isinstance(M, RevolutionHypersurface):
        out["reflect"] = rel_diff(base, scalars(run(case, M.reflected())))
        return out
    out["flip"] = rel_diff(base, scalars(run(case, M.flipped())))
    Q = Rotation.random(random_state=case["seed"] % (2**32)).as_matrix()
    out["rotate"] = rel_diff(base, scalars(run(case, M.transformed(Q))))
    return out
