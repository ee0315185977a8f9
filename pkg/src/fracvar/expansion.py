r"""Integer-order expansion of the left Riemann-Liouville derivative.

For *f* real analytic on a window :math:`(c, d)` containing every closed ball
of radius :math:`b - a` around :math:`t \in [a, b]`,

.. math::

    {}_aD_t^\alpha f = \sum_{i=0}^\infty \binom{\alpha}{i}
        \frac{(t - a)^{i - \alpha}}{\Gamma(i + 1 - \alpha)} f^{(i)}(t).

The formally adjoint partial sums

.. math::

    S_N(t) = \sum_{i=0}^N \Big(-\frac{d}{dt}\Big)^i \left(F \binom{\alpha}{i}
        \frac{(t - a)^{i - \alpha}}{\Gamma(i + 1 - \alpha)}\right)

approximate the right derivative :math:`{}_tD_b^\alpha F` in the weak sense
when every derivative of *F* vanishes at *b*.

All classical derivatives come from exact polynomial calculus or Chebyshev
coefficient differentiation; nothing here differentiates samples.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial
from scipy.special import comb, gamma

from fracvar.grid import GridFunction, check_order

#: Largest number of expansion terms accepted by default.
N_MAX = 30


class HypothesisWarning(UserWarning):
    """A smoothness or boundary hypothesis needed for convergence fails."""


# {{{ smooth function models


@dataclass(frozen=True)
class SmoothFunctionModel:
    """A smooth function with exact classical derivatives.

    Either a polynomial (``kind="polynomial"``, ascending coefficients in *t*)
    or a Chebyshev series on *window* (``kind="chebyshev"``).
    """

    kind: str
    data: np.ndarray
    window: tuple[float, float] = (-math.inf, math.inf)
    #: Largest derivative order callers may request.
    max_order: int = N_MAX

    _series: Polynomial | Chebyshev = field(init=False, repr=False, compare=False)
    _derivatives: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 1 or data.size == 0 or not np.all(np.isfinite(data)):
            raise ValueError("model data must be a non-empty 1d array of finite values")
        c, d = (float(x) for x in self.window)
        if not c < d:
            raise ValueError(f"window must satisfy c < d, got {self.window}")

        if self.kind == "polynomial":
            series = Polynomial(data)
        elif self.kind == "chebyshev":
            if not (math.isfinite(c) and math.isfinite(d)):
                raise ValueError("a Chebyshev model needs a finite window")
            series = Chebyshev(data, domain=[c, d])
        else:
            raise ValueError(f"unknown model kind: {self.kind!r}")

        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "window", (c, d))
        object.__setattr__(self, "_series", series)
        object.__setattr__(self, "_derivatives", {0: series})

    @classmethod
    def polynomial(cls, coefficients, window=(-math.inf, math.inf), **kwargs):
        return cls("polynomial", np.asarray(coefficients, dtype=np.float64), window, **kwargs)

    @classmethod
    def chebyshev(
        cls,
        f,
        window: tuple[float, float],
        degree: int = 64,
        *,
        chop: float = 1.0e-14,
        **kwargs,
    ):
        """Interpolate *f* at Chebyshev points of the first kind on *window*.

        The endpoints of the window are never evaluated. Trailing coefficients
        below ``chop`` times the largest one are dropped, since differentiating
        them only amplifies rounding noise.
        """
        if not all(math.isfinite(float(x)) for x in window):
            raise ValueError("a Chebyshev model needs a finite window")
        coef = Chebyshev.interpolate(f, int(degree), domain=list(window)).coef
        big = np.flatnonzero(np.abs(coef) > chop * np.max(np.abs(coef)))
        coef = coef[: big[-1] + 1] if big.size else coef[:1]
        return cls("chebyshev", coef, window, **kwargs)

    def __call__(self, t, order: int = 0) -> np.ndarray:
        return self.derivative(order)(np.asarray(t, dtype=np.float64))

    def derivative(self, order: int):
        """The *order*-th derivative as a numpy series object."""
        if order < 0:
            raise ValueError(f"derivative order must be non-negative, got {order}")
        if order > self.max_order:
            raise ValueError(
                f"derivative of order {order} exceeds the model budget {self.max_order}"
            )
        if order not in self._derivatives:
            self._derivatives[order] = self._series.deriv(order)
        return self._derivatives[order]

    def contains(self, lo: float, hi: float) -> bool:
        return self.window[0] <= lo and hi <= self.window[1]

    def to_json(self) -> list[float]:
        """Ascending coefficients of a polynomial model."""
        if self.kind != "polynomial":
            raise ValueError("only polynomial models serialize to a coefficient list")
        return [float(x) for x in self.data]

    @classmethod
    def from_json(cls, coefficients, **kwargs) -> SmoothFunctionModel:
        if not isinstance(coefficients, list) or not coefficients:
            raise ValueError("a polynomial model is a non-empty JSON array of numbers")
        return cls.polynomial([float(x) for x in coefficients], **kwargs)


# }}}

# {{{ coefficients


def frac_binomial(alpha: float, i: int) -> float:
    r"""Generalized binomial coefficient :math:`\binom{\alpha}{i}` by the
    recurrence :math:`\binom{\alpha}{i} = \binom{\alpha}{i-1} (\alpha - i + 1) / i`.
    """
    alpha = check_order(alpha)
    if i < 0:
        raise ValueError(f"index must be non-negative, got {i}")

    out = 1.0
    for k in range(1, i + 1):
        out *= (alpha - (k - 1)) / k
    return out


@dataclass(frozen=True)
class ExpansionTermTable:
    r"""Coefficients :math:`\binom{\alpha}{i} / \Gamma(i + 1 - \alpha)`, :math:`i \le N`."""

    N: int
    alpha: float
    coefficients: np.ndarray


@lru_cache(maxsize=128)
def term_table(alpha: float, N: int) -> ExpansionTermTable:
    alpha = check_order(alpha)
    binom = np.array([frac_binomial(alpha, i) for i in range(N + 1)])
    coefficients = binom / gamma(np.arange(N + 1) + 1.0 - alpha)
    coefficients.setflags(write=False)
    return ExpansionTermTable(N, alpha, coefficients)


def _check_N(N: int, model: SmoothFunctionModel, n_max: int) -> int:
    N = int(N)
    if N < 0:
        raise ValueError(f"N must be non-negative, got {N}")
    if N > n_max:
        raise ValueError(f"N = {N} exceeds the cap {n_max}")
    if N > model.max_order:
        raise ValueError(f"N = {N} exceeds the model derivative budget {model.max_order}")
    return N


def _grid_nodes(grid) -> tuple[float, float, np.ndarray]:
    if isinstance(grid, GridFunction):
        return grid.a, grid.b, grid.t
    lo, hi, n = grid
    return float(lo), float(hi), np.linspace(lo, hi, int(n) + 1)


def _fill_singular_start(values: np.ndarray, t: np.ndarray, a: float) -> np.ndarray:
    if t[0] == a and values.size > 1:
        values[0] = values[1]
    return values


# }}}

# {{{ sums


def left_expansion_sum(
    f: SmoothFunctionModel,
    alpha: float,
    a: float,
    N: int,
    grid,
    *,
    n_max: int = N_MAX,
) -> GridFunction:
    """Partial sum with :math:`N + 1` terms of the expansion of :math:`{}_aD_t^\\alpha f`.

    *grid* is a :class:`~fracvar.grid.GridFunction` (only its nodes are used)
    or a tuple ``(lo, hi, n)`` with ``lo >= a``. The node :math:`t = a` carries
    the :math:`(t - a)^{-\\alpha}` singularity and takes the value of its
    neighbour.
    """
    lo, hi, t = _grid_nodes(grid)
    if lo < a:
        raise ValueError(f"grid starts at {lo}, before the lower terminal {a}")
    out = left_expansion_values(f, alpha, a, N, t, b=hi, n_max=n_max)
    return GridFunction(lo, hi, _fill_singular_start(out, t, a))


def left_expansion_values(
    f: SmoothFunctionModel,
    alpha: float,
    a: float,
    N: int,
    t: np.ndarray,
    *,
    b: float,
    n_max: int = N_MAX,
) -> np.ndarray:
    """Expansion partial sum at arbitrary points ``t`` in :math:`(a, b]`.

    The model window must contain :math:`[a - (b - a), b + (b - a)]`.
    """
    alpha = check_order(alpha)
    N = _check_N(N, f, n_max)
    if not f.contains(a - (b - a), b + (b - a)):
        raise ValueError(
            f"model window {f.window} must contain [{a - (b - a)}, {b + (b - a)}]"
        )

    t = np.asarray(t, dtype=np.float64)
    c = term_table(alpha, N).coefficients
    s = t - a
    out = np.zeros_like(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        for i in range(N + 1):
            out += c[i] * s ** (i - alpha) * f(t, i)
    return out


@lru_cache(maxsize=128)
def _adjoint_coefficients(alpha: float, N: int) -> np.ndarray:
    r""":math:`A_{N,j} = \sum_{i=j}^N (-1)^i \binom{\alpha}{i} \binom{i}{j} / \Gamma(j + 1 - \alpha)`."""
    binom = np.array([frac_binomial(alpha, i) for i in range(N + 1)])
    sign = (-1.0) ** np.arange(N + 1)
    A = np.array([
        np.sum(sign[j:] * binom[j:] * comb(np.arange(j, N + 1), j, exact=False))
        for j in range(N + 1)
    ])
    A /= gamma(np.arange(N + 1) + 1.0 - alpha)
    A.setflags(write=False)
    return A


def vanishing_defect(F: SmoothFunctionModel, a: float, b: float, order: int) -> float:
    r"""Largest :math:`|F^{(j)}(b)|`, :math:`j < order`, relative to
    :math:`1 + \max_{[a, b]} |F|`.
    """
    if order <= 0:
        return 0.0
    vals = np.array([float(F(b, j)) for j in range(order)])
    scale = 1.0 + float(np.max(np.abs(F(np.linspace(a, b, 65)))))
    return float(np.max(np.abs(vals))) / scale


def right_weak_sum(
    F: SmoothFunctionModel,
    alpha: float,
    a: float,
    N: int,
    grid,
    *,
    b: float | None = None,
    tol: float = 1.0e-10,
    n_max: int = N_MAX,
) -> GridFunction:
    r"""Pointwise partial sum :math:`S_N` on :math:`[a, b]`.

    The *i*-th term is expanded with the Leibniz rule, which after collecting
    powers of :math:`t - a` gives

    .. math::

        S_N(t) = \sum_{j=0}^N A_{N,j} F^{(j)}(t) (t - a)^{j - \alpha}.

    A :class:`HypothesisWarning` is issued when :math:`F^{(j)}(b) \ne 0` for
    some :math:`j < N`; in that case the pointwise sum misses the boundary
    contributions of the zero extension of *F* and is not the weak partial sum.
    """
    alpha = check_order(alpha)
    N = _check_N(N, F, n_max)
    lo, hi, t = _grid_nodes(grid)
    if lo < a:
        raise ValueError(f"grid starts at {lo}, before the lower terminal {a}")
    b = hi if b is None else b

    defect = vanishing_defect(F, a, b, N)
    if defect > tol:
        warnings.warn(
            f"F^(j)(b) does not vanish for some j < {N} (relative size {defect:.3e})",
            HypothesisWarning,
            stacklevel=2,
        )

    A = _adjoint_coefficients(alpha, N)
    s = t - a
    out = np.zeros_like(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        for j in range(N + 1):
            out += A[j] * s ** (j - alpha) * F(t, j)

    return GridFunction(lo, hi, _fill_singular_start(out, t, a))


# }}}
