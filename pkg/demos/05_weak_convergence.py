"""Weak convergence of the adjoint series and of the approximated equation.

For :math:`F = (1 - t)^4` the partial sums of the right-derivative series are
paired against :math:`e^{\\pm t}`; for a polynomial test function of degree
*d* the pairing is exact once *N >= d*. The same holds for the approximated
Euler-Lagrange expression of a Lagrangian whose :math:`\\partial_p L`
vanishes at the right end.
"""

import warnings

from fracvar import SmoothFunctionModel, TestFunction, get_lagrangian, proposition_check, theorem_check
from fracvar.expansion import HypothesisWarning
from fracvar.weak import max_rows

warnings.simplefilter("ignore", HypothesisWarning)
F = SmoothFunctionModel.polynomial([1.0, -4.0, 6.0, -4.0, 1.0])
for phis in ([TestFunction.exponential(1.0), TestFunction.exponential(-1.0)],
             [TestFunction.monomial(k) for k in range(3)]):
    recs = max_rows(proposition_check(F, 0.5, phis, [0, 2, 4, 8]))
    print("proposition, phi in", [p.id for p in phis])
    for r in recs:
        print(f"  N = {r.N}: weak error {r.weak_error:.2e}, conforming {r.conforming}")

L, _ = get_lagrangian("example1-smoothed", 0.5)
recs = max_rows(theorem_check(L, SmoothFunctionModel.polynomial([1.0]), 0.5,
                              [TestFunction.shifted(0.0, [0.0, 1.0, -1.0])], [0, 2, 4, 8]))
print("theorem, phi = t(1 - t)")
for r in recs:
    print(f"  N = {r.N}: weak error {r.weak_error:.2e}")
