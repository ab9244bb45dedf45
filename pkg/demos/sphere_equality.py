"""Equality on round spheres.

On the unit sphere every Hardy-type inequality in the package collapses to
an identity for constant test functions, because ``x . nu = |x|`` and the
tangential gradient vanishes.  This script prints both sides for the
improved Carron inequality in several dimensions, then repeats the check on
a triangle mesh where equality holds up to the reported tolerance.
"""

from __future__ import annotations

from hil import make_surface, make_testfn
from hil.inequalities import evaluate


def main() -> None:
    for n in (3, 4, 6, 9):
        S = make_surface(f"sphere:n={n}")
        rep = evaluate("carron_improved", S, make_testfn("constant", S))
        print(f"S^{n}: lhs = {rep.lhs:.12g}  rhs = {rep.rhs:.12g}  ratio = {rep.ratio:.15f}")

    M = make_surface("icosphere:subdiv=5")
    rep = evaluate("hardy_ibp", M, make_testfn("constant", M), p=2.0, a=1.0)
    print(f"icosphere (n = 2), hardy_ibp a = 1: ratio = {rep.ratio:.6f}, "
          f"margin = {rep.margin:.3g}, tolerance = {rep.tolerance:.3g}")


if __name__ == "__main__":
    main()
