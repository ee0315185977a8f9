"""Fractional integrals and derivatives on a uniform grid.

The left Riemann-Liouville derivative of order 1/2 of :math:`t^2` is
:math:`\\Gamma(3) / \\Gamma(2.5) \\, t^{1.5}`. We compare the grid operator with
that closed form, check the Riemann-Liouville/Caputo relation, and verify
fractional integration by parts for a non-symmetric pair of functions.
"""

import math

import numpy as np
from scipy.integrate import trapezoid

from fracvar import GridFunction, caputo_derivative, interior_mask, rl_caputo_gap, rl_derivative

alpha = 0.5
print("left RL derivative of t^2, alpha = 1/2")
for n in (256, 1024, 4096):
    u = GridFunction.from_callable(lambda t: t**2, 0.0, 1.0, n)
    d = rl_derivative(u, alpha, "left")
    exact = math.gamma(3) / math.gamma(2.5) * d.t**1.5
    m = interior_mask(n)
    print(f"  n = {n:5d}: interior max error {np.max(np.abs(d.values - exact)[m]):.2e}")

u = GridFunction.from_callable(lambda t: np.cosh(t), 0.0, 1.0, 2048)
for side in ("left", "right"):
    gap = rl_derivative(u, alpha, side).values - caputo_derivative(u, alpha, side).values
    model = rl_caputo_gap(u, alpha, side).values
    m = interior_mask(u.n)
    print(f"RL - Caputo ({side}) vs endpoint kernel: {np.max(np.abs(gap - model)[m]):.2e}")

f = GridFunction.from_callable(lambda t: np.sin(np.pi * (1 - t) / 2) ** 2, 0.0, 1.0, 4096)
g = GridFunction.from_callable(lambda t: t * np.exp(t), 0.0, 1.0, 4096)
lhs = trapezoid(f.values * rl_derivative(g, alpha, "left").values, dx=f.h)
rhs = trapezoid(g.values * rl_derivative(f, alpha, "right").values, dx=f.h)
print(f"integration by parts: <f, aD g> = {lhs:.6f}, <g, tD f> = {rhs:.6f}")
