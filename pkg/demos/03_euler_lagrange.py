"""Euler-Lagrange residuals for a Lagrangian whose extremal is known.

For :math:`L = u^2 (1 - t)^{-\\alpha} / (2 \\Gamma(1 - \\alpha)) - D^\\alpha u`
the constant :math:`u \\equiv 1` makes the residual vanish. With a memory
segment :math:`(a, A)` the second equation is generally not satisfied, and
the constancy map shows by how much.
"""

import numpy as np

from fracvar import (
    GridFunction,
    MemoryWindow,
    get_lagrangian,
    memory_constancy,
    residual_corrected,
    residual_generalized,
    residual_rl,
    total_variation,
)

alpha = 0.5
L, _ = get_lagrangian("example1", alpha)
for n in (256, 1024, 4096):
    u = GridFunction(0.0, 1.0, np.ones(n + 1))
    print(f"n = {n:5d}: rl {residual_rl(L, u, alpha).interior_sup:.2e}, "
          f"corrected {residual_corrected(L, u, alpha).interior_sup:.2e}")

w = MemoryWindow(-0.5, 0.0, 1.0, 1.0)
u = GridFunction(-0.5, 1.0, np.ones(1501))
first, second = residual_generalized(L, u, alpha, w)
M = memory_constancy(L, u, alpha, w)
print(f"memory window {w}: on (A, B) {first.interior_sup:.2e}, on (a, A) {second.interior_sup:.2e}")
print(f"total variation of the constancy map on [a, A]: {total_variation(M):.4f}")
