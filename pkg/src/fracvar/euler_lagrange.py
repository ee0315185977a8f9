r"""Grid residuals of the Euler-Lagrange equations of

.. math::

    J[u] = \int_A^B L(t, u(t), {}_aD_t^\alpha u(t)) \,\mathrm{d}t.

Write :math:`g(t) = \partial_3 L(t, u, p)` along the candidate. The formulations
are

* ``"rl"``: :math:`\partial_2 L + {}_tD_b^\alpha g`,
* ``"corrected"``: :math:`\partial_2 L + {}_t^cD_b^\alpha g
  + g(b) (b - t)^{-\alpha} / \Gamma(1 - \alpha)`,
* ``"generalized"``: the corrected form on :math:`(A, B)` together with
  :math:`{}_tD_B^\alpha g - {}_tD_A^\alpha g` on :math:`(a, A)`,
* ``"approx-N"``: :math:`\partial_2 L` plus the integer-order partial sum of
  the adjoint expansion.

A left Caputo derivative inside *L* has the same adjoint as the left
Riemann-Liouville one (variations vanish at *a*), so ``kind="caputo"`` only
changes how *p* is computed. For ``kind="riesz-caputo"`` the adjoint is
:math:`\frac{1}{2}({}_tD_b^\alpha g - {}_aD_t^\alpha g)`.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from fracvar.expansion import (
    HypothesisWarning,
    SmoothFunctionModel,
    left_expansion_sum,
    left_expansion_values,
    right_weak_sum,
)
from fracvar.grid import MASK_FRACTION, GridFunction, MemoryWindow, check_order, interior_mask
from fracvar.lagrangian import Lagrangian
from fracvar.operators import (
    caputo_derivative,
    frac_integral,
    fractional_derivative,
    rl_caputo_gap,
    rl_derivative,
)

FORMULATIONS = ("rl", "corrected", "generalized-AB", "generalized-aA", "approx-N")


# {{{ report


@dataclass(frozen=True)
class ResidualReport:
    """Residual of one formulation on a grid, with its interior sup-norm.

    ``masked_fraction`` of the grid is excluded next to each endpoint before
    taking the sup. An empty report (``residual is None``) stands for a
    formulation that does not apply, e.g. the memory equation when
    :math:`a = A`.
    """

    formulation: str
    residual: GridFunction | None
    interior_sup: float
    masked_fraction: float = MASK_FRACTION
    #: :math:`|\partial_3 L|` at the right end, a transversality diagnostic.
    transversality: float | None = None

    @classmethod
    def build(
        cls,
        formulation: str,
        residual: GridFunction | None,
        *,
        masked_fraction: float = MASK_FRACTION,
        transversality: float | None = None,
    ) -> ResidualReport:
        if residual is None:
            return cls(formulation, None, 0.0, masked_fraction, transversality)
        mask = interior_mask(residual.n, masked_fraction)
        vals = np.abs(residual.values[mask])
        sup = float(np.max(vals)) if vals.size else 0.0
        return cls(formulation, residual, sup, masked_fraction, transversality)

    @property
    def empty(self) -> bool:
        return self.residual is None

    def transversality_ok(self, tol: float = 1.0e-8) -> bool | None:
        """Whether :math:`\\partial_3 L` vanishes at the right end (free-end condition)."""
        return None if self.transversality is None else self.transversality <= tol

    def to_json(self) -> str:
        return json.dumps(
            {
                "formulation": self.formulation,
                "interior_sup": self.interior_sup,
                "masked_fraction": self.masked_fraction,
                "transversality": self.transversality,
                "residual": None if self.residual is None else self.residual.to_csv(),
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> ResidualReport:
        obj = json.loads(text)
        csv = obj["residual"]
        return cls(
            str(obj["formulation"]),
            None if csv is None else GridFunction.from_csv(csv),
            float(obj["interior_sup"]),
            float(obj["masked_fraction"]),
            None if obj["transversality"] is None else float(obj["transversality"]),
        )


# }}}

# {{{ helpers


def _evaluate(fn, t: np.ndarray, u: np.ndarray, p: np.ndarray, what: str) -> np.ndarray:
    """Evaluate a Lagrangian partial; non-finite endpoint values take the
    neighbouring value, non-finite interior values are an error.
    """
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.array(np.broadcast_to(fn(t, u, p), t.shape), dtype=np.float64)

    bad = ~np.isfinite(out)
    if np.any(bad[1:-1]):
        k = int(np.flatnonzero(bad[1:-1])[0]) + 1
        raise FloatingPointError(f"{what} is not finite at interior node t = {t[k]}")
    if bad[0]:
        out[0] = out[1]
    if bad[-1]:
        out[-1] = out[-2]
    if not np.all(np.isfinite(out)):
        raise FloatingPointError(f"{what} is not finite")
    return out


def _partials(
    L: Lagrangian, u: GridFunction, alpha: float, kind: str, scheme: str
) -> tuple[np.ndarray, GridFunction]:
    p = fractional_derivative(u, alpha, kind, scheme=scheme)
    t = u.t
    d_u = _evaluate(L.d_u, t, u.values, p.values, "d_u")
    g = u.with_values(_evaluate(L.d_p, t, u.values, p.values, "d_p"))
    return d_u, g


def _right_kernel(g: GridFunction, alpha: float) -> np.ndarray:
    return rl_caputo_gap(g, alpha, "right").values


def _check_classical(u: GridFunction, window: MemoryWindow | None) -> None:
    if window is not None and (window.a != u.a or window.A != u.a or window.B != u.b or window.b != u.b):
        raise ValueError("this formulation needs a = A and B = b on the grid of u")


# }}}

# {{{ classical residuals


def residual_rl(
    L: Lagrangian,
    u: GridFunction,
    alpha: float,
    *,
    kind: str = "riemann-liouville",
    scheme: str = "stencil",
    window: MemoryWindow | None = None,
    masked_fraction: float = MASK_FRACTION,
) -> ResidualReport:
    r""":math:`\partial_2 L + {}_tD_b^\alpha \partial_3 L` along *u* on :math:`[a, b]`."""
    alpha = check_order(alpha)
    _check_classical(u, window)
    d_u, g = _partials(L, u, alpha, kind, scheme)

    if alpha == 0.0:
        adj = g.values
    elif kind == "riesz-caputo":
        adj = 0.5 * (
            rl_derivative(g, alpha, "right", scheme=scheme).values
            - rl_derivative(g, alpha, "left", scheme=scheme).values
        )
    else:
        adj = rl_derivative(g, alpha, "right", scheme=scheme).values

    return ResidualReport.build(
        "rl",
        u.with_values(d_u + adj),
        masked_fraction=masked_fraction,
        transversality=abs(float(g.values[-1])),
    )


def _corrected_values(
    d_u: np.ndarray, g: GridFunction, alpha: float, kind: str, scheme: str
) -> np.ndarray:
    if alpha == 0.0:
        return d_u + g.values

    right = caputo_derivative(g, alpha, "right", scheme=scheme).values + _right_kernel(g, alpha)
    if kind != "riesz-caputo":
        return d_u + right

    left = caputo_derivative(g, alpha, "left", scheme=scheme).values
    left = left + rl_caputo_gap(g, alpha, "left").values
    return d_u + 0.5 * (right - left)


def residual_corrected(
    L: Lagrangian,
    u: GridFunction,
    alpha: float,
    *,
    kind: str = "riemann-liouville",
    scheme: str = "stencil",
    window: MemoryWindow | None = None,
    masked_fraction: float = MASK_FRACTION,
) -> ResidualReport:
    r""":math:`\partial_2 L + {}_t^cD_b^\alpha g + g(b) (b - t)^{-\alpha} / \Gamma(1 - \alpha)`.

    The boundary term is singular at :math:`t = b`, which is therefore masked
    (and filled from its neighbour).
    """
    alpha = check_order(alpha)
    _check_classical(u, window)
    d_u, g = _partials(L, u, alpha, kind, scheme)

    return ResidualReport.build(
        "corrected",
        u.with_values(_corrected_values(d_u, g, alpha, kind, scheme)),
        masked_fraction=masked_fraction,
        transversality=abs(float(g.values[-1])),
    )


# }}}

# {{{ memory window


def _window_indices(u: GridFunction, w: MemoryWindow) -> tuple[int, int]:
    if w.a != u.a or w.b != u.b:
        raise ValueError(
            f"the grid of u spans [{u.a}, {u.b}] but the window spans [{w.a}, {w.b}]"
        )
    return u.index_of(w.A), u.index_of(w.B)


def residual_generalized(
    L: Lagrangian,
    u: GridFunction,
    alpha: float,
    w: MemoryWindow,
    *,
    kind: str = "riemann-liouville",
    scheme: str = "stencil",
    masked_fraction: float = MASK_FRACTION,
) -> tuple[ResidualReport, ResidualReport]:
    r"""Residuals on :math:`(A, B)` and on the memory segment :math:`(a, A)`.

    *u* lives on :math:`[a, b]` and the derivative inside *L* starts at *a*.
    The first report is the corrected equation with *b* replaced by *B*; the
    second is :math:`{}_tD_B^\alpha g - {}_tD_A^\alpha g`, and is empty when
    :math:`a = A`.
    """
    alpha = check_order(alpha)
    if kind == "riesz-caputo":
        raise ValueError("the Riesz-Caputo kind is only supported with a = A and B = b")
    iA, iB = _window_indices(u, w)

    d_u, g = _partials(L, u, alpha, kind, scheme)
    g_AB = g.restrict(w.A, w.B)
    first = ResidualReport.build(
        "generalized-AB",
        g_AB.with_values(_corrected_values(d_u[iA : iB + 1], g_AB, alpha, kind, scheme)),
        masked_fraction=masked_fraction,
        transversality=abs(float(g.values[iB])),
    )

    if iA == 0:
        return first, ResidualReport.build("generalized-aA", None, masked_fraction=masked_fraction)

    to_B = rl_derivative(g.restrict(w.a, w.B), alpha, "right", scheme=scheme).values[: iA + 1]
    to_A = rl_derivative(g.restrict(w.a, w.A), alpha, "right", scheme=scheme).values
    second = ResidualReport.build(
        "generalized-aA",
        GridFunction(w.a, w.A, to_B - to_A),
        masked_fraction=masked_fraction,
    )
    return first, second


def memory_constancy(
    L: Lagrangian,
    u: GridFunction,
    alpha: float,
    w: MemoryWindow,
    *,
    kind: str = "riemann-liouville",
    scheme: str = "stencil",
) -> GridFunction:
    r"""The map :math:`t \mapsto \frac{1}{\Gamma(1 - \alpha)} \int_A^B g(\theta) (\theta - t)^{-\alpha} \,\mathrm{d}\theta`
    on :math:`[a, A]`.

    It is computed as :math:`{}_tI_B^{1-\alpha} g - {}_tI_A^{1-\alpha} g`. Its
    derivative is the negated memory residual, so its total variation
    measures how far that equation is from holding.
    """
    alpha = check_order(alpha)
    if not w.has_memory:
        raise ValueError("memory_constancy needs a < A")
    iA, _ = _window_indices(u, w)

    _, g = _partials(L, u, alpha, kind, scheme)
    if alpha == 0.0:
        # the kernel is 1 and the map is the integral of g over [A, B]
        gAB = g.restrict(w.A, w.B)
        return GridFunction(w.a, w.A, np.full(iA + 1, trapezoid(gAB.values, dx=gAB.h)))

    to_B = frac_integral(g.restrict(w.a, w.B), 1.0 - alpha, "right").values[: iA + 1]
    to_A = frac_integral(g.restrict(w.a, w.A), 1.0 - alpha, "right").values
    return GridFunction(w.a, w.A, to_B - to_A)


def total_variation(f: GridFunction) -> float:
    return float(np.sum(np.abs(np.diff(f.values))))


# }}}

# {{{ integer-order approximation


def composite_model(
    L: Lagrangian,
    u: SmoothFunctionModel,
    alpha: float,
    N: int,
    a: float,
    b: float,
    *,
    degree: int = 64,
) -> SmoothFunctionModel:
    r"""Chebyshev model on :math:`[a, b]` of :math:`t \mapsto \partial_3 L(t, u, p_N)`,
    with :math:`p_N` the expansion partial sum of the left derivative of *u*.

    Sampling happens at Chebyshev points of the first kind, so neither
    endpoint (where :math:`p_N` may be singular) is evaluated.
    """
    alpha = check_order(alpha)
    def composite(t):
        t = np.asarray(t, dtype=np.float64)
        p = left_expansion_values(u, alpha, a, N, t, b=b)
        return np.broadcast_to(L.d_p(t, u(t), p), t.shape)

    return SmoothFunctionModel.chebyshev(
        composite, (a, b), degree, max_order=L.smoothness_note
    )


def residual_approx_N(
    L: Lagrangian,
    u: SmoothFunctionModel,
    alpha: float,
    N: int,
    grid,
    *,
    degree: int = 64,
    masked_fraction: float = MASK_FRACTION,
) -> ResidualReport:
    r"""Residual of the integer-order approximated equation

    .. math::

        \partial_2 L + \sum_{i = 0}^N \Big(-\frac{d}{dt}\Big)^i \Big(g \binom{\alpha}{i}
            \frac{(t - a)^{i - \alpha}}{\Gamma(i + 1 - \alpha)}\Big)

    on *grid* (a :class:`~fracvar.grid.GridFunction` or ``(a, b, n)``). The
    composite :math:`g` is resampled on Chebyshev points and differentiated
    spectrally, so it must be smooth on :math:`(a, b)`.
    """
    alpha = check_order(alpha)
    N = int(N)
    if N > L.smoothness_note:
        raise ValueError(f"N = {N} exceeds the Lagrangian smoothness budget {L.smoothness_note}")

    if isinstance(grid, GridFunction):
        a, b, n = grid.a, grid.b, grid.n
    else:
        a, b, n = float(grid[0]), float(grid[1]), int(grid[2])

    p = left_expansion_sum(u, alpha, a, N, (a, b, n))
    t = p.t
    d_u = _evaluate(L.d_u, t, u(t), p.values, "d_u")

    G = composite_model(L, u, alpha, N, a, b, degree=degree)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HypothesisWarning)
        S = right_weak_sum(G, alpha, a, N, (a, b, n), b=b)

    return ResidualReport.build(
        "approx-N",
        GridFunction(a, b, d_u + S.values),
        masked_fraction=masked_fraction,
        transversality=abs(float(G(b))),
    )


# }}}
