"""How close can test functions get to the Carron constant?

The constant ``(n-2)^2/4`` is sharp but not attained.  On flat annuli
``eps < |x| < 1`` the discrete minimum of rhs/lhs over a spline basis
decreases toward 1 as ``eps -> 0``, and the log-radius cutoffs approach 1
only logarithmically.
"""

from __future__ import annotations

from hil import make_surface, make_testfn
from hil.inequalities import evaluate
from hil.sharpness import assemble_forms, min_generalized_rayleigh


def main() -> None:
    print("discrete minimum of rhs/lhs on flat_annulus n = 3")
    for eps in (1e-1, 1e-2, 1e-3, 1e-4):
        M = make_surface(f"flat_annulus:n=3,R0={eps},R1=1")
        res = min_generalized_rayleigh(assemble_forms(M, "carron"))
        print(f"  eps = {eps:.0e}: lambda_min = {res.lambda_min:.6f}")

    print("log-radius cutoff quotient lhs/rhs on flat_annulus n = 3")
    for eps in (1e-2, 1e-4, 1e-8):
        M = make_surface(f"flat_annulus:n=3,R0={eps / 2},R1=1.5")
        rep = evaluate("carron", M, make_testfn(f"log_cutoff:eps={eps},R=1", M))
        print(f"  eps = {eps:.0e}: ratio = {rep.ratio:.4f}")


if __name__ == "__main__":
    main()
