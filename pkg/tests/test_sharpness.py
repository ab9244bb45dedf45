"""Quadratic forms, generalized Rayleigh quotients and quotient descent."""

from __future__ import annotations

import csv
import io

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from hil import make_surface, make_testfn
from hil.errors import DimensionTooLow, NonQuadratic, NotMinimal, ParamOutOfRange
from hil.inequalities import evaluate
from hil.sharpness import (SWEEP_COLUMNS, assemble_forms, dense_min_rayleigh, min_generalized_rayleigh,
                           optimize_quotient, sweep_rows_to_csv)


@pytest.fixture(scope="module")
def sphere3():
    return make_surface("sphere:n=3")


@pytest.fixture(scope="module")
def annulus3():
    return make_surface("flat_annulus:n=3,R0=0.1,R1=1")


def test_forms_are_symmetric(annulus3):
    F = assemble_forms(annulus3, "carron_improved")
    for X in (F.A, F.B):
        X = X.toarray() if hasattr(X, "toarray") else np.asarray(X)
        assert np.max(np.abs(X - X.T)) <= 1e-12 * np.max(np.abs(X))
    B = F.B.toarray() if hasattr(F.B, "toarray") else np.asarray(F.B)
    assert np.linalg.eigvalsh(B).min() >= -1e-12 * np.abs(B).max()


def test_forms_match_evaluator(annulus3):
    F = assemble_forms(annulus3, "carron")
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(20):
        c = rng.standard_normal(F.m)
        rep = evaluate("carron", annulus3, F.field(c), p=2.0)
        worst = max(worst, abs(F.rhs(c) / F.lhs(c) / (rep.rhs / rep.lhs) - 1))
    assert worst <= 1e-8


def test_sphere_constant_vector_is_equality(sphere3):
    F = assemble_forms(sphere3, "carron_improved")
    c = np.ones(F.m)
    assert F.rhs(c) == pytest.approx(F.lhs(c), rel=1e-10)


def test_sphere_carron_improved_minimum(sphere3):
    F = assemble_forms(sphere3, "carron_improved")
    res = min_generalized_rayleigh(F)
    assert res.lambda_min == pytest.approx(1.0, abs=1e-6)
    v = res.vector
    cos = abs(v.sum()) / (np.linalg.norm(v) * np.sqrt(v.size))
    assert cos >= 0.999


def test_iterative_matches_dense(annulus3):
    F = assemble_forms(annulus3, "carron")
    assert min_generalized_rayleigh(F).lambda_min == pytest.approx(dense_min_rayleigh(F), rel=1e-8)


def test_carron_lambda_decreases_toward_one():
    lams = []
    for eps in (1e-1, 1e-2, 1e-3, 1e-4):
        F = assemble_forms(make_surface(f"flat_annulus:n=3,R0={eps},R1=1"), "carron")
        lams.append(min_generalized_rayleigh(F).lambda_min)
    assert min(lams) >= 1 - 1e-6
    assert all(x > y for x, y in zip(lams, lams[1:]))


def test_mesh_hardy_ibp_certified():
    M = make_surface("perturbed_sphere:amplitude=0.05,subdiv=3")
    F = assemble_forms(M, "hardy_ibp", {"a": 1.0})
    assert min_generalized_rayleigh(F).lambda_min >= 1 - 1e-3


def test_lambda_invariant_under_rotation():
    M = make_surface("ellipsoid:a=1,b=1.3,c=0.8,subdiv=2")
    Q = Rotation.random(random_state=5).as_matrix()
    lam = min_generalized_rayleigh(assemble_forms(M, "hardy_ibp", {"a": 0.5})).lambda_min
    rot = min_generalized_rayleigh(assemble_forms(M.transformed(Q), "hardy_ibp", {"a": 0.5})).lambda_min
    assert rot == pytest.approx(lam, rel=1e-8)


def test_errors(sphere3):
    with pytest.raises(NonQuadratic):
        assemble_forms(sphere3, "hardy_ibp", {"p": 3.0})
    with pytest.raises(DimensionTooLow):
        assemble_forms(make_surface("sphere:n=2"), "carron")
    with pytest.raises(NotMinimal):
        assemble_forms(sphere3, "hardy_minimal")
    with pytest.raises(ParamOutOfRange):
        assemble_forms(make_surface("sphere:n=2"), "hardy_plain")


def test_minimal_surface_certified():
    F = assemble_forms(make_surface("catenoid:n=3,span=2"), "hardy_minimal")
    assert min_generalized_rayleigh(F).lambda_min >= 1 - 1e-6


def test_p1_cone_quotient_is_one():
    # the quotient exceeds 1 by the inner boundary term, of order R0^(n-1)
    M = make_surface("flat_annulus:n=3,R0=1e-3,R1=1")
    res = optimize_quotient(M, "hardy_ibp", {"a": 1.0}, p=1.0, start="cone:R=1", starts=2)
    assert res.best_quotient == pytest.approx(1.0, abs=1e-4)


def test_sphere_ibp_quotient_near_one(sphere3):
    res = optimize_quotient(sphere3, "hardy_ibp", {"a": 1.0}, p=2.0, starts=2)
    assert 1 - 1e-6 <= res.best_quotient <= 1 + 1e-3


def test_sweep_csv():
    rows = [{"surface": "sphere:n=3", "inequality": "carron", "p": 2.0, "a": 0.0, "param": "",
             "lambda_min": 1.25, "iterations": 4}]
    text = sweep_rows_to_csv(rows)
    back = list(csv.DictReader(io.StringIO(text)))
    assert tuple(back[0]) == SWEEP_COLUMNS
    assert float(back[0]["lambda_min"]) == 1.25


def test_catenoid_carron_quotient_certified():
    res = optimize_quotient(make_surface("catenoid:n=3,span=2"), "carron", p=2.0, starts=3)
    assert res.best_quotient >= 1 - 1e-6
