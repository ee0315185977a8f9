r"""Pairings against analytic test functions and weak convergence studies.

A grid function *f* on :math:`[a, b]`, extended by zero, acts on a test
function by :math:`\langle f, \varphi \rangle = \int_a^b f \varphi \,\mathrm{d}t`.
The adjoint partial sums

.. math::

    S_N = \sum_{i=0}^N \Big(-\frac{d}{dt}\Big)^i \Big(F c_i (t - a)^{i - \alpha}\Big),
    \qquad c_i = \binom{\alpha}{i} \frac{1}{\Gamma(i + 1 - \alpha)},

are paired as distributions, with the derivatives moved onto the test function:

.. math::

    \langle S_N, \varphi \rangle = \sum_{i=0}^N c_i \int_a^b F(t) (t - a)^{i - \alpha}
        \varphi^{(i)}(t) \,\mathrm{d}t.

This agrees with pairing the pointwise sum only when :math:`F^{(j)}(b) = 0`
for :math:`j < N`; records carry a ``conforming`` flag for that case.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from numpy.polynomial import Legendre, Polynomial
from scipy.integrate import trapezoid
from scipy.special import roots_jacobi

from fracvar.euler_lagrange import composite_model, residual_corrected
from fracvar.expansion import (
    HypothesisWarning,
    SmoothFunctionModel,
    left_expansion_values,
    right_weak_sum,
    term_table,
    vanishing_defect,
)
from fracvar.grid import GridFunction, check_order
from fracvar.lagrangian import Lagrangian
from fracvar.operators import frac_integral, rl_derivative

#: Number of Gauss-Jacobi nodes used by the series pairings.
QUADRATURE_NODES = 96


# {{{ test functions


@dataclass(frozen=True)
class TestFunction:
    """Real-analytic test function with closed-form derivatives.

    * ``TestFunction.monomial(k)``: :math:`t^k`,
    * ``TestFunction.exponential(k)``: :math:`e^{k t}`,
    * ``TestFunction.shifted(c, coeffs)``: :math:`\\sum_j p_j (t - c)^j`.
    """

    __test__ = False

    kind: str
    params: tuple[float, ...]

    def __post_init__(self) -> None:
        params = tuple(float(x) for x in self.params)
        if not all(math.isfinite(x) for x in params):
            raise ValueError("test function parameters must be finite")
        if self.kind == "monomial":
            if len(params) != 1 or params[0] < 0 or params[0] != int(params[0]):
                raise ValueError("a monomial takes one non-negative integer degree")
        elif self.kind == "exp":
            if len(params) != 1:
                raise ValueError("an exponential takes one rate")
        elif self.kind == "shifted":
            if len(params) < 2:
                raise ValueError("a shifted polynomial takes a center and coefficients")
        else:
            raise ValueError(f"unknown test function kind {self.kind!r}")
        object.__setattr__(self, "params", params)

    @classmethod
    def monomial(cls, k: int) -> TestFunction:
        return cls("monomial", (k,))

    @classmethod
    def exponential(cls, k: float) -> TestFunction:
        return cls("exp", (k,))

    @classmethod
    def shifted(cls, center: float, coefficients) -> TestFunction:
        return cls("shifted", (center, *coefficients))

    @classmethod
    def parse(cls, text: str) -> TestFunction:
        """Inverse of :attr:`id`."""
        text = text.strip()
        if text.startswith("t^"):
            return cls.monomial(int(text[2:]))
        if text.startswith("exp(") and text.endswith("t)"):
            return cls.exponential(float(text[4:-2]))
        if text.startswith("poly(") and text.endswith(")"):
            center, _, rest = text[5:-1].partition(";")
            return cls.shifted(float(center), [float(x) for x in rest.split(",")])
        raise ValueError(f"cannot parse test function id {text!r}")

    @property
    def id(self) -> str:
        if self.kind == "monomial":
            return f"t^{int(self.params[0])}"
        if self.kind == "exp":
            return f"exp({self.params[0]!r}t)"
        center, *coef = self.params
        return f"poly({center!r};{','.join(repr(x) for x in coef)})"

    def _polynomial(self) -> Polynomial:
        if self.kind == "monomial":
            k = int(self.params[0])
            return Polynomial([0.0] * k + [1.0])
        center, *coef = self.params
        return Polynomial(coef, domain=[center - 1.0, center + 1.0], window=[-1.0, 1.0])

    def __call__(self, t, order: int = 0) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        if order < 0:
            raise ValueError("derivative order must be non-negative")
        if self.kind == "exp":
            k = self.params[0]
            return k**order * np.exp(k * t)
        return self._polynomial().deriv(order)(t) + 0.0 * t

    def sup(self, a: float, b: float) -> float:
        return float(np.max(np.abs(self(np.linspace(a, b, 513)))))


def witness_family(degree: int = 12) -> list[TestFunction]:
    """Monomials up to *degree* and :math:`e^{\\pm t}`."""
    return [TestFunction.monomial(k) for k in range(degree + 1)] + [
        TestFunction.exponential(1.0),
        TestFunction.exponential(-1.0),
    ]


# }}}

# {{{ pairings


def _extrapolate_start(g: np.ndarray) -> np.ndarray:
    g = g.copy()
    g[0] = 2.0 * g[1] - g[2] if g.size > 2 else g[1]
    return g


def pairing(
    f: GridFunction,
    phi: TestFunction,
    *,
    singular: str | None = None,
    alpha: float | None = None,
) -> float:
    r""":math:`\int_a^b f \varphi \,\mathrm{d}t` by the trapezoid rule.

    With ``singular="left"`` (or ``"right"``) *f* is taken to behave like
    :math:`(t - a)^{-\alpha}` (or :math:`(b - t)^{-\alpha}`) times a smooth
    function: the smooth factor is interpolated linearly and integrated
    against the kernel exactly, and the sample at the singular end is ignored.
    """
    vals = f.values * phi(f.t)
    if singular is None:
        return float(trapezoid(vals, dx=f.h))

    if alpha is None:
        raise ValueError("a singular pairing needs the exponent alpha")
    alpha = check_order(alpha, allow_zero=False)
    s = np.arange(f.n + 1, dtype=np.float64) * f.h

    if singular == "left":
        g = _extrapolate_start(vals * s**alpha)
        I = frac_integral(f.with_values(g), 1.0 - alpha, "right").values[0]
    elif singular == "right":
        g = _extrapolate_start((vals * s[::-1] ** alpha)[::-1])[::-1]
        I = frac_integral(f.with_values(g), 1.0 - alpha, "left").values[-1]
    else:
        raise ValueError(f"singular must be None, 'left' or 'right', got {singular!r}")

    return float(math.gamma(1.0 - alpha) * I)


@lru_cache(maxsize=32)
def _jacobi(m: int, left: float, right: float) -> tuple[np.ndarray, np.ndarray]:
    # scipy's convention: weight (1 - x)^left_exponent (1 + x)^right_exponent
    x, w = roots_jacobi(m, right, left)
    return x, w


def singular_integral(
    fn, a: float, b: float, alpha: float, *, both: bool = False, m: int = QUADRATURE_NODES
) -> float:
    r""":math:`\int_a^b (t - a)^{-\alpha} \psi(t) \,\mathrm{d}t` for smooth :math:`\psi`
    (Gauss-Jacobi).

    With ``both=True`` the weight is :math:`(t - a)^{-\alpha} (b - t)^{-\alpha}`.
    """
    x, w = _jacobi(m, -alpha, -alpha if both else 0.0)
    half = 0.5 * (b - a)
    t = a + half * (1.0 + x)
    scale = half ** (1.0 - 2.0 * alpha) if both else half ** (1.0 - alpha)
    return float(scale * np.dot(w, fn(t)))


def series_pairing(
    F: SmoothFunctionModel,
    alpha: float,
    a: float,
    b: float,
    N: int,
    phi: TestFunction,
    *,
    m: int = QUADRATURE_NODES,
) -> np.ndarray:
    r"""Cumulative pairings :math:`\langle S_K, \varphi \rangle` for :math:`K = 0, \dots, N`,
    with the derivatives of :math:`S_K` moved onto :math:`\varphi`.
    """
    alpha = check_order(alpha)
    c = term_table(alpha, N).coefficients
    terms = np.array([
        c[i] * singular_integral(lambda t, i=i: F(t) * (t - a) ** i * phi(t, i), a, b, alpha, m=m)
        for i in range(N + 1)
    ])
    return np.cumsum(terms)


# }}}

# {{{ moment identification


def moment_projection(f: GridFunction, K: int = 12, *, singular=None, alpha=None) -> GridFunction:
    """Polynomial of degree *K* with the same pairings as *f* against
    :math:`1, t, \\dots, t^K`.

    The moments are converted to shifted Legendre coefficients; for a
    continuous *f* whose moments all vanish the result is the zero function,
    and for a polynomial of degree at most *K* it is *f* itself.
    """
    moments = np.array([
        pairing(f, TestFunction.monomial(k), singular=singular, alpha=alpha) for k in range(K + 1)
    ])
    out = np.zeros(f.n + 1)
    for j in range(K + 1):
        P = Legendre.basis(j, domain=[f.a, f.b]).convert(kind=Polynomial)
        proj = float(np.dot(P.coef, moments[: P.coef.size]))
        out += (2 * j + 1) / (f.b - f.a) * proj * Legendre.basis(j, domain=[f.a, f.b])(f.t)
    return f.with_values(out)


# }}}

# {{{ convergence records


@dataclass(frozen=True)
class ConvergenceRecord:
    N: int
    phi_id: str
    weak_error: float
    strong_l1_error: float = math.nan
    conforming: bool = True

    def __post_init__(self) -> None:
        if not self.weak_error >= 0.0:
            raise ValueError(f"weak error must be non-negative, got {self.weak_error}")


CSV_HEADER = ("N", "phi_id", "weak_error", "strong_l1_error", "conforming")


def records_to_csv(records: list[ConvergenceRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow([r.N, r.phi_id, repr(r.weak_error), repr(r.strong_l1_error),
                         "true" if r.conforming else "false"])
    return buf.getvalue()


def records_from_csv(text: str) -> list[ConvergenceRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"convergence CSV must start with {','.join(CSV_HEADER)}")
    out = []
    for row in rows[1:]:
        if not row:
            continue
        N, phi_id, weak, strong, conf = row
        if conf not in ("true", "false"):
            raise ValueError(f"conforming must be 'true' or 'false', got {conf!r}")
        out.append(ConvergenceRecord(int(N), phi_id, float(weak), float(strong), conf == "true"))
    return out


def write_records(records: list[ConvergenceRecord], path: str | Path) -> None:
    Path(path).write_text(records_to_csv(records))


def max_rows(records: list[ConvergenceRecord]) -> list[ConvergenceRecord]:
    """The ``phi_id == "max"`` rows, in order of *N*."""
    return sorted((r for r in records if r.phi_id == "max"), key=lambda r: r.N)


def _assemble(
    N_list, phis, weak: dict, strong: dict, conforming: dict
) -> list[ConvergenceRecord]:
    records = []
    for N in sorted(set(N_list)):
        for phi in phis:
            records.append(ConvergenceRecord(N, phi.id, weak[N, phi.id], strong[N], conforming[N]))
        records.append(ConvergenceRecord(
            N, "max", max(weak[N, phi.id] for phi in phis), strong[N], conforming[N]
        ))
    return records


def _check_lists(phis, N_list) -> None:
    if not phis:
        raise ValueError("need at least one test function")
    if not N_list or min(N_list) < 0:
        raise ValueError("need a non-empty list of non-negative N")


# }}}

# {{{ checks


def proposition_check(
    F: SmoothFunctionModel,
    alpha: float,
    phis: list[TestFunction],
    N_list: list[int],
    *,
    a: float = 0.0,
    b: float = 1.0,
    n: int = 4096,
    tol: float = 1.0e-10,
) -> list[ConvergenceRecord]:
    r"""Weak error of :math:`S_N` against the grid right derivative of *F*.

    ``weak_error`` is :math:`|\langle S_N, \varphi \rangle - \langle {}_tD_b^\alpha F, \varphi \rangle|`;
    the reference derivative comes from the operator module on an *n*-interval
    grid. ``strong_l1_error`` is the :math:`L^1` distance between the
    pointwise sum and the reference, reported only for conforming *N*.
    """
    alpha = check_order(alpha, allow_zero=False)
    _check_lists(phis, N_list)
    Nmax = max(N_list)

    grid = GridFunction.from_callable(lambda t: F(t), a, b, n)
    ref = rl_derivative(grid, alpha, "right")
    singular = "right" if abs(float(F(b))) > tol else None
    ref_pair = {phi.id: pairing(ref, phi, singular=singular, alpha=alpha) for phi in phis}

    series = {phi.id: series_pairing(F, alpha, a, b, Nmax, phi) for phi in phis}
    weak, strong, conforming = {}, {}, {}
    for N in N_list:
        conforming[N] = vanishing_defect(F, a, b, N) <= tol
        for phi in phis:
            weak[N, phi.id] = abs(float(series[phi.id][N]) - ref_pair[phi.id])

        strong[N] = math.nan
        if conforming[N]:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", HypothesisWarning)
                S = right_weak_sum(F, alpha, a, N, grid, b=b)
            diff = S - ref
            strong[N] = pairing(diff.with_values(np.abs(diff.values)), TestFunction.monomial(0),
                                singular="left", alpha=alpha)

    bad = sorted(N for N in conforming if not conforming[N])
    if bad:
        warnings.warn(
            f"F^(j)(b) does not vanish for the orders needed by N = {bad}; the "
            "pointwise partial sums differ from the weak ones there",
            HypothesisWarning,
            stacklevel=2,
        )
    return _assemble(N_list, phis, weak, strong, conforming)


def theorem_check(
    L: Lagrangian,
    u: SmoothFunctionModel,
    alpha: float,
    phis: list[TestFunction],
    N_list: list[int],
    *,
    a: float = 0.0,
    b: float = 1.0,
    n: int = 2048,
    tol: float = 1.0e-10,
    degree: int = 64,
) -> list[ConvergenceRecord]:
    r"""Weak distance between the approximated and the exact Euler-Lagrange
    expressions along *u*.

    The exact side :math:`P` is :func:`~fracvar.euler_lagrange.residual_corrected`
    on an *n*-interval grid, paired by the trapezoid rule. The approximated
    side is

    .. math::

        \langle P_N, \varphi \rangle = \langle \partial_2 L(t, u, p_N), \varphi \rangle
            + \langle S_N[g_N], \varphi \rangle,

    with :math:`p_N` the expansion of the left derivative of *u* and
    :math:`g_N = \partial_3 L(t, u, p_N)` (a Chebyshev model).
    """
    alpha = check_order(alpha, allow_zero=False)
    _check_lists(phis, N_list)

    grid = GridFunction.from_callable(lambda t: u(t), a, b, n)
    P = residual_corrected(L, grid, alpha).residual
    P_pair = {phi.id: pairing(P, phi) for phi in phis}

    weak, strong, conforming = {}, {}, {}
    for N in sorted(set(N_list)):
        G = composite_model(L, u, alpha, N, a, b, degree=degree)
        conforming[N] = vanishing_defect(G, a, b, N) <= tol

        def d_u(t, N=N):
            p = left_expansion_values(u, alpha, a, N, t, b=b)
            return L.d_u(t, u(t), p)

        for phi in phis:
            du_pair = singular_integral(
                lambda t, phi=phi: d_u(t) * phi(t) * ((t - a) * (b - t)) ** alpha,
                a, b, alpha, both=True,
            )
            S_pair = series_pairing(G, alpha, a, b, N, phi)[N]
            weak[N, phi.id] = abs(du_pair + float(S_pair) - P_pair[phi.id])

        strong[N] = math.nan
        if conforming[N]:
            from fracvar.euler_lagrange import residual_approx_N

            PN = residual_approx_N(L, u, alpha, N, grid, degree=degree).residual
            diff = PN - P
            strong[N] = pairing(diff.with_values(np.abs(diff.values)), TestFunction.monomial(0),
                                singular="left", alpha=alpha)

    bad = sorted(N for N in conforming if not conforming[N])
    if bad:
        warnings.warn(
            f"the composite d_p does not vanish at b to the orders needed by N = {bad}",
            HypothesisWarning,
            stacklevel=2,
        )
    return _assemble(N_list, phis, weak, strong, conforming)


# }}}
