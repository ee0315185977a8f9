r"""Riemann-Liouville, Caputo and Riesz-Caputo operators on uniform grids.

Fractional integrals use product integration: the density is replaced by its
piecewise linear interpolant and the kernel :math:`(t - \theta)^{\beta - 1}`
is integrated exactly on every subinterval. On a uniform grid this gives

.. math::

    {}_aI_t^\beta u(t_k) \approx \frac{h^\beta}{\Gamma(\beta + 2)}
        \Big(a_{0,k} u_0 + \sum_{j=1}^k c_{k-j} u_j\Big),

with :math:`c_0 = 1`, :math:`c_m = (m+1)^{\beta+1} - 2 m^{\beta+1} + (m-1)^{\beta+1}`
and :math:`a_{0,k} = (k-1)^{\beta+1} - (k-1-\beta) k^\beta`. Right-sided
operators are obtained by reflecting the grid.

Two derivative schemes are available:

* ``"stencil"`` (default): the classical derivative is taken with second-order
  centered differences (second-order one-sided at the ends), either after
  (Riemann-Liouville) or before (Caputo) the fractional integral.
* ``"l1"``: the derivative of the piecewise linear interpolant is evaluated
  exactly at the nodes. The resulting left matrices are lower triangular,
  which the direct solver relies on.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import gamma

from fracvar.grid import GridFunction, Side, check_order

# {{{ weights


def _toeplitz_weights(m: np.ndarray, beta: float) -> np.ndarray:
    """:math:`c_m` for :math:`m \\ge 1`, written to avoid cancellation."""
    p = beta + 1.0
    out = np.empty(m.shape)
    one = m == 1
    out[one] = 2.0**p - 2.0
    mm = m[~one]
    x = 1.0 / mm
    out[~one] = mm**p * (np.expm1(p * np.log1p(x)) + np.expm1(p * np.log1p(-x)))
    return out


def _first_column_weights(k: np.ndarray, beta: float) -> np.ndarray:
    """:math:`a_{0,k}` for :math:`k \\ge 1`."""
    p = beta + 1.0
    out = np.empty(k.shape)
    one = k == 1
    out[one] = beta
    kk = k[~one]
    out[~one] = kk**p * (np.expm1(p * np.log1p(-1.0 / kk)) + p / kk)
    return out


@lru_cache(maxsize=64)
def _weights(n: int, beta: float) -> tuple[np.ndarray, np.ndarray]:
    c = np.empty(n)
    c[0] = 1.0
    if n > 1:
        c[1:] = _toeplitz_weights(np.arange(1, n, dtype=np.float64), beta)
    a0 = _first_column_weights(np.arange(1, n + 1, dtype=np.float64), beta)
    c.setflags(write=False)
    a0.setflags(write=False)
    return c, a0


def _left_integral(u: np.ndarray, h: float, beta: float) -> np.ndarray:
    n = u.size - 1
    c, a0 = _weights(n, beta)
    out = np.zeros_like(u)
    out[1:] = np.convolve(c, u[1:])[:n] + a0 * u[0]
    return h**beta / gamma(beta + 2.0) * out


def _integral(u: np.ndarray, h: float, beta: float, side: Side) -> np.ndarray:
    if side is Side.Left:
        return _left_integral(u, h, beta)
    return _left_integral(u[::-1], h, beta)[::-1]


def integral_matrix(n: int, h: float, beta: float, side: Side | str) -> np.ndarray:
    """Dense product-integration matrix for the fractional integral of order *beta*.

    Lower triangular for the left side, upper triangular for the right side.
    """
    side = Side.parse(side)
    c, a0 = _weights(n, beta)
    W = np.zeros((n + 1, n + 1))
    k = np.arange(1, n + 1)
    for j in range(1, n + 1):
        W[j:, j] = c[: n + 1 - j]
    W[k, 0] = a0
    W *= h**beta / gamma(beta + 2.0)
    if side is Side.Right:
        W = W[::-1, ::-1].copy()
    return W


def gradient_matrix(n: int, h: float) -> np.ndarray:
    """Matrix of the second-order difference stencil used by :func:`numpy.gradient`."""
    G = np.zeros((n + 1, n + 1))
    if n == 1:
        G[:, 0], G[:, 1] = -1.0 / h, 1.0 / h
        return G
    i = np.arange(1, n)
    G[i, i - 1] = -0.5 / h
    G[i, i + 1] = 0.5 / h
    G[0, :3] = np.array([-3.0, 4.0, -1.0]) / (2.0 * h)
    G[n, n - 2 :] = np.array([1.0, -4.0, 3.0]) / (2.0 * h)
    return G


def _l1_weights(n: int, alpha: float) -> np.ndarray:
    r""":math:`b_m = (m + 1)^{1 - \alpha} - m^{1 - \alpha}`, :math:`m = 0, \dots, n - 1`."""
    p = 1.0 - alpha
    m = np.arange(n, dtype=np.float64)
    b = np.empty(n)
    b[0] = 1.0
    b[1:] = m[1:] ** p * np.expm1(p * np.log1p(1.0 / m[1:]))
    return b


def _left_caputo_l1(u: np.ndarray, h: float, alpha: float) -> np.ndarray:
    n = u.size - 1
    out = np.zeros_like(u)
    out[1:] = np.convolve(_l1_weights(n, alpha), np.diff(u))[:n]
    return h**-alpha / gamma(2.0 - alpha) * out


def _left_kernel(n: int, h: float, alpha: float) -> np.ndarray:
    # (t - a)^{-alpha} / Gamma(1 - alpha), singular node copied from its neighbour
    k = np.arange(n + 1, dtype=np.float64)
    k[0] = 1.0
    return (k * h) ** -alpha / gamma(1.0 - alpha)


def _gradient(u: np.ndarray, h: float) -> np.ndarray:
    if u.size == 2:
        d = (u[1] - u[0]) / h
        return np.array([d, d])
    return np.gradient(u, h, edge_order=2)


# }}}

# {{{ operators

SCHEMES = ("stencil", "l1")


def _check_scheme(scheme: str) -> str:
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    return scheme


def _reflected(fn, u: np.ndarray, *args) -> np.ndarray:
    return fn(u[::-1], *args)[::-1]


def _rl(u: np.ndarray, h: float, alpha: float, side: Side, scheme: str) -> np.ndarray:
    if scheme == "l1":
        def left(v):
            return _left_caputo_l1(v, h, alpha) + v[0] * _left_kernel(v.size - 1, h, alpha)

        return left(u) if side is Side.Left else _reflected(left, u)

    d = _gradient(_integral(u, h, 1.0 - alpha, side), h)
    return d if side is Side.Left else -d


def _caputo(u: np.ndarray, h: float, alpha: float, side: Side, scheme: str) -> np.ndarray:
    if scheme == "l1":
        if side is Side.Left:
            return _left_caputo_l1(u, h, alpha)
        return _reflected(_left_caputo_l1, u, h, alpha)

    d = _integral(_gradient(u, h), h, 1.0 - alpha, side)
    return d if side is Side.Left else -d


def frac_integral(u: GridFunction, alpha: float, side: Side | str = Side.Left) -> GridFunction:
    r"""Left :math:`{}_aI_t^\alpha u` or right :math:`{}_tI_b^\alpha u`."""
    alpha = check_order(alpha, allow_zero=False)
    return u.with_values(_integral(u.values, u.h, alpha, Side.parse(side)))


def rl_derivative(
    u: GridFunction,
    alpha: float,
    side: Side | str = Side.Left,
    *,
    scheme: str = "stencil",
) -> GridFunction:
    r"""Riemann-Liouville derivative: :math:`\frac{d}{dt} {}_aI_t^{1-\alpha} u`
    (left) or :math:`-\frac{d}{dt} {}_tI_b^{1-\alpha} u` (right).

    The value at the singular endpoint (:math:`t = a` on the left when
    :math:`u(a) \ne 0`) is whatever the scheme produces there and should be
    masked by callers.
    """
    alpha = check_order(alpha)
    if alpha == 0.0:
        return u
    side = Side.parse(side)
    return u.with_values(_rl(u.values, u.h, alpha, side, _check_scheme(scheme)))


def caputo_derivative(
    u: GridFunction,
    alpha: float,
    side: Side | str = Side.Left,
    *,
    scheme: str = "stencil",
) -> GridFunction:
    r"""Caputo derivative: :math:`{}_aI_t^{1-\alpha} \dot{u}` (left) or
    :math:`-{}_tI_b^{1-\alpha} \dot{u}` (right).
    """
    alpha = check_order(alpha)
    if alpha == 0.0:
        return u
    side = Side.parse(side)
    return u.with_values(_caputo(u.values, u.h, alpha, side, _check_scheme(scheme)))


def riesz_caputo_derivative(
    u: GridFunction, alpha: float, *, scheme: str = "stencil"
) -> GridFunction:
    r"""Symmetrized Caputo derivative
    :math:`\frac{1}{2}({}_a^cD_t^\alpha u - {}_t^cD_b^\alpha u)`.

    Order zero is defined as the identity.
    """
    alpha = check_order(alpha)
    if alpha == 0.0:
        return u

    left = caputo_derivative(u, alpha, Side.Left, scheme=scheme).values
    right = caputo_derivative(u, alpha, Side.Right, scheme=scheme).values
    return u.with_values(0.5 * (left - right))


def rl_caputo_gap(u: GridFunction, alpha: float, side: Side | str = Side.Left) -> GridFunction:
    r"""Difference between the Riemann-Liouville and Caputo derivatives.

    This is :math:`u(a) (t - a)^{-\alpha} / \Gamma(1 - \alpha)` on the left and
    :math:`u(b) (b - t)^{-\alpha} / \Gamma(1 - \alpha)` on the right. The
    singular endpoint takes the value of its neighbouring node.
    """
    alpha = check_order(alpha, allow_zero=False)
    side = Side.parse(side)

    kernel = _left_kernel(u.n, u.h, alpha)
    if side is Side.Left:
        return u.with_values(u.values[0] * kernel)
    return u.with_values(u.values[-1] * kernel[::-1])


DERIVATIVE_KINDS = ("riemann-liouville", "caputo", "riesz-caputo")


def fractional_derivative(
    u: GridFunction, alpha: float, kind: str, *, scheme: str = "stencil"
) -> GridFunction:
    """Left derivative of the given *kind*; one of :data:`DERIVATIVE_KINDS`."""
    if kind == "riemann-liouville":
        return rl_derivative(u, alpha, Side.Left, scheme=scheme)
    if kind == "caputo":
        return caputo_derivative(u, alpha, Side.Left, scheme=scheme)
    if kind == "riesz-caputo":
        return riesz_caputo_derivative(u, alpha, scheme=scheme)
    raise ValueError(f"unknown derivative kind: {kind!r}")


# }}}

# {{{ operator matrices


def _l1_caputo_matrix(n: int, h: float, alpha: float) -> np.ndarray:
    b = _l1_weights(n, alpha)
    C = np.zeros((n + 1, n + 1))
    for k in range(1, n + 1):
        coef = b[k - 1 :: -1]
        C[k, 1 : k + 1] += coef
        C[k, :k] -= coef
    return h**-alpha / gamma(2.0 - alpha) * C


def derivative_matrix(
    n: int,
    h: float,
    alpha: float,
    kind: str,
    side: Side | str = Side.Left,
    *,
    scheme: str = "stencil",
) -> np.ndarray:
    """Dense matrix *M* such that ``M @ u.values`` is the requested derivative.

    *kind* is one of :data:`DERIVATIVE_KINDS`; ``"riesz-caputo"`` ignores *side*.
    With ``scheme="l1"`` the left matrices are lower triangular.
    """
    alpha = check_order(alpha)
    if kind not in DERIVATIVE_KINDS:
        raise ValueError(f"unknown derivative kind: {kind!r}")
    if alpha == 0.0:
        return np.eye(n + 1)

    side = Side.parse(side)
    if kind == "riesz-caputo":
        left = derivative_matrix(n, h, alpha, "caputo", Side.Left, scheme=scheme)
        right = derivative_matrix(n, h, alpha, "caputo", Side.Right, scheme=scheme)
        return 0.5 * (left - right)

    if _check_scheme(scheme) == "l1":
        M = _l1_caputo_matrix(n, h, alpha)
        if kind == "riemann-liouville":
            M[:, 0] += _left_kernel(n, h, alpha)
        return M if side is Side.Left else M[::-1, ::-1].copy()

    G = gradient_matrix(n, h)
    sign = 1.0 if side is Side.Left else -1.0
    if kind == "riemann-liouville":
        return sign * (G @ integral_matrix(n, h, 1.0 - alpha, side))
    return sign * (integral_matrix(n, h, 1.0 - alpha, side) @ G)


# }}}
