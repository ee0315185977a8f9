r"""Direct method for fractional variational problems.

The action :math:`\int_A^B L(t, u, D^\alpha u) \,\mathrm{d}t` is discretized
with a composite trapezoid rule on the grid over :math:`[a, b]`, the derivative
being a precomputed weight matrix *M* (exact derivative of the piecewise
linear interpolant, lower triangular for left operators). The gradient with
respect to the grid values is

.. math::

    \nabla J = w \circ \partial_2 L + M^T (w \circ \partial_3 L),

and the free values are found by limited-memory quasi-Newton iterations.

An end panel whose endpoint carries a singularity is integrated with the
value at its interior node: this is the case at :math:`t = a` when
:math:`A = a` (the derivative is singular or, for Caputo, forced to zero
there) and at :math:`t = B` for Lagrangians flagged ``right_singular``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from fracvar.euler_lagrange import ResidualReport, residual_corrected, residual_generalized
from fracvar.grid import GridFunction, MemoryWindow, check_order
from fracvar.lagrangian import Lagrangian, get_lagrangian
from fracvar.operators import DERIVATIVE_KINDS, derivative_matrix

#: Derivative scheme behind the solver's weight matrices.
SOLVER_SCHEME = "l1"


class ConvergenceError(RuntimeError):
    """Raised by callers that require a converged solve."""


# {{{ problem


@dataclass(frozen=True)
class ProblemSpec:
    """A discretized fractional variational problem.

    The grid has ``n`` intervals on :math:`[a, b]`; *A* and *B* must be grid
    nodes. The value at *a* is always pinned; the value at *B* is pinned when
    *right* is given. Nodes past *B* do not enter the action and are held
    at the initial guess.
    """

    lagrangian: Lagrangian
    window: MemoryWindow
    alpha: float
    kind: str = "riemann-liouville"
    left: float = 0.0
    right: float | None = None
    n: int = 256
    #: Registry id of the Lagrangian, needed for JSON round trips.
    lagrangian_id: str | None = None
    gtol: float | None = None
    maxiter: int = 2000

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", check_order(self.alpha))
        if self.kind not in DERIVATIVE_KINDS:
            raise ValueError(f"unknown derivative kind {self.kind!r}")
        if self.kind == "riesz-caputo" and (
            self.window.a != self.window.A or self.window.B != self.window.b
        ):
            raise ValueError("the Riesz-Caputo kind needs a = A and B = b")
        if int(self.n) < 4:
            raise ValueError(f"need at least 4 grid intervals, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if not math.isfinite(self.left):
            raise ValueError("the left boundary value must be finite")
        if self.right is not None and not math.isfinite(self.right):
            raise ValueError("the right boundary value must be finite or absent")
        if self.maxiter < 0:
            raise ValueError("maxiter must be non-negative")
        # validates that A and B are nodes
        self.indices  # noqa: B018

    @property
    def h(self) -> float:
        return (self.window.b - self.window.a) / self.n

    @property
    def t(self) -> np.ndarray:
        return np.linspace(self.window.a, self.window.b, self.n + 1)

    @property
    def indices(self) -> tuple[int, int]:
        """Grid indices of *A* and *B*."""
        grid = GridFunction(self.window.a, self.window.b, np.zeros(self.n + 1))
        return grid.index_of(self.window.A), grid.index_of(self.window.B)

    def free_mask(self) -> np.ndarray:
        iA, iB = self.indices
        free = np.zeros(self.n + 1, dtype=bool)
        free[1 : iB + 1] = True
        if self.right is not None:
            free[iB] = False
        return free

    def quadrature_weights(self) -> np.ndarray:
        """Trapezoid weights on :math:`[A, B]`, with singular end panels opened."""
        iA, iB = self.indices
        h = self.h
        w = np.zeros(self.n + 1)
        w[iA : iB + 1] = h
        w[iA] = w[iB] = 0.5 * h
        if iA == 0:
            w[0], w[1] = 0.0, w[1] + 0.5 * h
        if self.lagrangian.right_singular:
            w[iB], w[iB - 1] = 0.0, w[iB - 1] + 0.5 * h
        return w

    def matrix(self) -> np.ndarray:
        return _matrix(self.n, self.h, self.alpha, self.kind)

    def initial_guess(self) -> GridFunction:
        """Linear interpolation of the boundary data, or the constant left
        value when the right end is free.
        """
        iA, iB = self.indices
        t = self.t
        if self.right is None:
            u = np.full(t.size, self.left)
        else:
            u = self.left + (self.right - self.left) * (t - t[0]) / (t[iB] - t[0])
            u[iB:] = self.right
        return GridFunction(self.window.a, self.window.b, u)

    def check_boundary(self, u: GridFunction, *, rtol: float = 1.0e-12) -> None:
        if u.n != self.n or u.a != self.window.a or u.b != self.window.b:
            raise ValueError(
                f"u lives on [{u.a}, {u.b}] with n = {u.n}, expected "
                f"[{self.window.a}, {self.window.b}] with n = {self.n}"
            )
        if abs(u.values[0] - self.left) > rtol * (1.0 + abs(self.left)):
            raise ValueError(f"u(a) = {u.values[0]} does not match the pinned value {self.left}")
        if self.right is not None:
            uB = u.values[self.indices[1]]
            if abs(uB - self.right) > rtol * (1.0 + abs(self.right)):
                raise ValueError(f"u(B) = {uB} does not match the pinned value {self.right}")

    # {{{ json

    def to_dict(self) -> dict:
        if self.lagrangian_id is None:
            raise ValueError("only registry Lagrangians can be serialized")
        w = self.window
        return {
            "lagrangian": self.lagrangian_id,
            "kind": self.kind,
            "alpha": self.alpha,
            "window": {"a": w.a, "A": w.A, "B": w.B, "b": w.b},
            "boundary": {"left": self.left, "right": self.right},
            "n": self.n,
            "optimizer": {"gtol": self.gtol, "maxiter": self.maxiter},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, obj: dict) -> ProblemSpec:
        try:
            name = str(obj["lagrangian"])
            alpha = float(obj["alpha"])
            win = obj.get("window", {"a": 0.0, "A": 0.0, "B": 1.0, "b": 1.0})
            if isinstance(win, (list, tuple)):
                win = dict(zip("aABb", win))
            window = MemoryWindow(*(float(win[k]) for k in ("a", "A", "B", "b")))
            boundary = obj.get("boundary", {})
            left = float(boundary["left"])
            right = boundary.get("right")
            opt = obj.get("optimizer") or {}
            n = int(obj.get("n", 256))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed problem config: missing or invalid {exc}") from None

        lag, kind = get_lagrangian(name, alpha, window.B)
        return cls(
            lag,
            window,
            alpha,
            kind=str(obj.get("kind") or kind),
            left=left,
            right=None if right is None else float(right),
            n=n,
            lagrangian_id=name,
            gtol=None if opt.get("gtol") is None else float(opt["gtol"]),
            maxiter=int(opt.get("maxiter", 2000)),
        )

    @classmethod
    def from_json(cls, text: str) -> ProblemSpec:
        return cls.from_dict(json.loads(text))

    # }}}


_MATRICES: dict = {}


def _matrix(n: int, h: float, alpha: float, kind: str) -> np.ndarray:
    key = (n, h, alpha, kind)
    if key not in _MATRICES:
        M = derivative_matrix(n, h, alpha, kind, "left", scheme=SOLVER_SCHEME)
        M.setflags(write=False)
        if len(_MATRICES) > 16:
            _MATRICES.clear()
        _MATRICES[key] = M
    return _MATRICES[key]


# }}}

# {{{ functional


def _active_values(fn, t, u, p, active, what) -> np.ndarray:
    out = np.zeros(t.size)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        vals = np.broadcast_to(fn(t[active], u[active], p[active]), (int(active.sum()),))
    if not np.all(np.isfinite(vals)):
        k = np.flatnonzero(active)[np.flatnonzero(~np.isfinite(vals))[0]]
        raise FloatingPointError(
            f"{what} is not finite at t = {t[k]} (u = {u[k]}, p = {p[k]})"
        )
    out[active] = vals
    return out


def _objective_and_gradient(spec: ProblemSpec, u: np.ndarray, *, gradient: bool = True):
    M = spec.matrix()
    w = spec.quadrature_weights()
    active = w > 0.0
    t = spec.t
    p = M @ u

    L = spec.lagrangian
    J = float(np.dot(w, _active_values(L.value, t, u, p, active, "L")))
    if not gradient:
        return J, None

    d_u = _active_values(L.d_u, t, u, p, active, "d_u")
    d_p = _active_values(L.d_p, t, u, p, active, "d_p")
    return J, w * d_u + M.T @ (w * d_p)


def discretize_functional(spec: ProblemSpec, u: GridFunction) -> float:
    r"""Trapezoid approximation of :math:`\int_A^B L(t, u, D^\alpha u) \,\mathrm{d}t`."""
    spec.check_boundary(u)
    return _objective_and_gradient(spec, u.values, gradient=False)[0]


def functional_gradient(spec: ProblemSpec, u: GridFunction) -> np.ndarray:
    """Gradient of :func:`discretize_functional` with respect to all grid values."""
    spec.check_boundary(u)
    return _objective_and_gradient(spec, u.values)[1]


# }}}

# {{{ solve


@dataclass(frozen=True)
class SolveResult:
    u: GridFunction
    objective: float
    iterations: int
    converged: bool
    el_check: ResidualReport | None
    #: Objective after each accepted iteration, starting with the initial guess.
    history: tuple[float, ...] = field(default=())
    gradient_norm: float = math.nan
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "objective": self.objective,
            "iterations": self.iterations,
            "converged": self.converged,
            "gradient_norm": self.gradient_norm,
            "message": self.message,
            "history": list(self.history),
            "u_end": float(self.u.values[-1]),
            "el_check": None if self.el_check is None else json.loads(self.el_check.to_json()),
            "u": self.u.to_csv(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> SolveResult:
        obj = json.loads(text)
        el = obj["el_check"]
        return cls(
            u=GridFunction.from_csv(obj["u"]),
            objective=float(obj["objective"]),
            iterations=int(obj["iterations"]),
            converged=bool(obj["converged"]),
            el_check=None if el is None else ResidualReport.from_json(json.dumps(el)),
            history=tuple(float(x) for x in obj["history"]),
            gradient_norm=float(obj["gradient_norm"]),
            message=str(obj["message"]),
        )

    def write(self, directory: str | Path, stem: str = "solution") -> tuple[Path, Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        js, csv = directory / f"{stem}.json", directory / f"{stem}.csv"
        js.write_text(self.to_json())
        csv.write_text(self.u.to_csv())
        return js, csv


def solve_direct(
    spec: ProblemSpec,
    initial: GridFunction | None = None,
    *,
    gtol: float | None = None,
    maxiter: int | None = None,
    el_check: bool = True,
) -> SolveResult:
    """Minimize the discretized action over the free grid values.

    Convergence means that the sup-norm of the gradient over the free values
    is at most *gtol* (default ``1e-8 (1 + |J(initial)|)``). A run that stops
    for any other reason is returned with ``converged=False``.
    """
    initial = spec.initial_guess() if initial is None else initial
    spec.check_boundary(initial)

    free = spec.free_mask()
    u0 = np.array(initial.values)
    J0, g0 = _objective_and_gradient(spec, u0)

    gtol = spec.gtol if gtol is None else gtol
    gtol = 1.0e-8 * (1.0 + abs(J0)) if gtol is None else float(gtol)
    maxiter = spec.maxiter if maxiter is None else int(maxiter)

    def fun(x):
        u = u0.copy()
        u[free] = x
        J, g = _objective_and_gradient(spec, u)
        return J, g[free]

    history = [J0]

    def callback(intermediate_result):
        history.append(float(intermediate_result.fun))

    if not np.any(free) or np.max(np.abs(g0[free]), initial=0.0) <= gtol:
        x, nit, message = u0[free], 0, "initial guess satisfies the gradient tolerance"
    elif maxiter == 0:
        x, nit, message = u0[free], 0, "no iterations allowed"
    else:
        res = minimize(
            fun,
            u0[free],
            jac=True,
            method="L-BFGS-B",
            callback=callback,
            options={"maxcor": 10, "gtol": gtol, "ftol": 0.0, "maxiter": maxiter,
                     "maxfun": 20 * maxiter + 100},
        )
        x, nit, message = res.x, int(res.nit), str(res.message)

    u = u0.copy()
    u[free] = x
    J, g = _objective_and_gradient(spec, u)
    if J > J0:
        # never hand back something worse than the start
        u, J, g = u0, J0, g0
    gnorm = float(np.max(np.abs(g[free]), initial=0.0))

    result = SolveResult(
        u=initial.with_values(u),
        objective=J,
        iterations=nit,
        converged=gnorm <= gtol,
        el_check=None,
        history=tuple(history),
        gradient_norm=gnorm,
        message=message,
    )
    if el_check:
        result = replace(result, el_check=verify_extremal(spec, result))
    return result


def verify_extremal(spec: ProblemSpec, result: SolveResult) -> ResidualReport:
    """Euler-Lagrange residual of the solver output.

    Uses the corrected formulation when :math:`a = A` and the first report of
    the generalized one otherwise; the derivative kind of the problem is used
    throughout.
    """
    w = spec.window
    u = result.u
    if w.a == w.A and w.B == w.b:
        return residual_corrected(spec.lagrangian, u, spec.alpha, kind=spec.kind)
    first, _ = residual_generalized(spec.lagrangian, u, spec.alpha, w, kind=spec.kind)
    return first


# }}}
