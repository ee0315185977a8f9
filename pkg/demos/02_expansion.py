"""Integer-order expansion of the left derivative.

For :math:`f(t) = e^t` the partial sums of the expansion converge to the
grid derivative until the grid's own discretization error is reached. For a
polynomial of degree *N* the sum with *N + 1* terms is exact.
"""

import numpy as np

from fracvar import GridFunction, SmoothFunctionModel, interior_mask, left_expansion_sum, rl_derivative
from fracvar.expansion import term_table

alpha = 0.5
print("coefficients c_i:", np.array2string(term_table(alpha, 5).coefficients, precision=4))

f = SmoothFunctionModel.chebyshev(np.exp, (-1.0, 2.0))
u = GridFunction.from_callable(np.exp, 0.0, 1.0, 2048)
ref = rl_derivative(u, alpha).values
m = interior_mask(u.n)
for N in (0, 1, 2, 4, 8, 12):
    s = left_expansion_sum(f, alpha, 0.0, N, u)
    print(f"  N = {N:2d}: interior distance to the grid derivative {np.max(np.abs(s.values - ref)[m]):.2e}")

p = SmoothFunctionModel.polynomial([1.0, -2.0, 0.5])
s = left_expansion_sum(p, alpha, 0.0, 2, (0.0, 1.0, 8))
print("degree-2 polynomial, N = 2:", np.array2string(s.values[1:], precision=6))
