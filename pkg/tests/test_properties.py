"""Property-based checks over random surfaces, test functions and parameters."""

from __future__ import annotations

import numpy as np
from cases import REL_INVARIANCE, draw_case, invariance_errors, margin_ok, run
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

SEEDS = st.integers(min_value=0, max_value=2**31 - 1)
SETTINGS = dict(deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow])


@settings(max_examples=500, **SETTINGS)
@given(SEEDS)
def test_margin_nonnegative(seed):
    case = draw_case(seed)
    rep = run(case)
    assert np.isfinite(rep.lhs) and np.isfinite(rep.rhs)
    assert margin_ok(case, rep), (case["spec"], case["name"], case["family"], rep.margin, rep.tolerance)


@settings(max_examples=150, **SETTINGS)
@given(SEEDS, st.booleans())
def test_flip_and_rotation_invariance(seed, mesh):
    case = draw_case(seed, mesh=mesh)
    errs = invariance_errors(case, run(case))
    assert max(errs.values()) <= REL_INVARIANCE, (case["spec"], case["name"], errs)

