"""Lagrangians :math:`L(t, u, p)` with analytic partials, and a small registry.

Here *p* stands for the fractional derivative of *u* that the Lagrangian
depends on. Callables must be reentrant and vectorized over numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gamma

from fracvar.grid import check_order

Partial = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Lagrangian:
    """A Lagrangian together with :math:`\\partial_u L` and :math:`\\partial_p L`.

    On construction the partials are compared against centered finite
    differences of :attr:`value` at random points of ``domain x R x R``;
    a mismatch beyond ``1e-5`` relative raises :class:`ValueError`.
    """

    value: Partial
    d_u: Partial
    d_p: Partial
    name: str = "custom"
    #: Open *t*-interval on which the callables are finite.
    domain: tuple[float, float] = (0.0, 1.0)
    #: Whether *L* blows up at the right end of the action interval; the
    #: discretized functional then skips that node.
    right_singular: bool = False
    #: Largest derivative order in *t* of the composite ``d_p`` that the
    #: integer-order expansion may request.
    smoothness_note: int = 30
    check: bool = True

    def __post_init__(self) -> None:
        if self.check:
            self.self_check()

    def self_check(self, npoints: int = 16, rtol: float = 1.0e-5, seed: int = 0) -> None:
        rng = np.random.default_rng(seed)
        lo, hi = self.domain
        t = lo + (hi - lo) * (0.05 + 0.9 * rng.random(npoints))
        u = rng.uniform(-2.0, 2.0, npoints)
        p = rng.uniform(-2.0, 2.0, npoints)

        for label, partial, du, dp in (("d_u", self.d_u, 1.0, 0.0), ("d_p", self.d_p, 0.0, 1.0)):
            eps = 1.0e-6 * (1.0 + np.abs(u if du else p))
            fd = (
                self.value(t, u + eps * du, p + eps * dp)
                - self.value(t, u - eps * du, p - eps * dp)
            ) / (2.0 * eps)
            exact = np.broadcast_to(partial(t, u, p), t.shape)
            scale = np.maximum(np.maximum(np.abs(exact), np.abs(fd)), 1.0e-3)
            err = np.max(np.abs(fd - exact) / scale)
            if not err <= rtol:
                raise ValueError(
                    f"Lagrangian {self.name!r}: {label} disagrees with finite "
                    f"differences (relative error {err:.3e})"
                )

    def scaled(self, c: float) -> Lagrangian:
        """The Lagrangian :math:`c L`."""
        c = float(c)
        return Lagrangian(
            lambda t, u, p: c * self.value(t, u, p),
            lambda t, u, p: c * self.d_u(t, u, p),
            lambda t, u, p: c * self.d_p(t, u, p),
            name=f"{c!r}*{self.name}",
            domain=self.domain,
            right_singular=self.right_singular,
            smoothness_note=self.smoothness_note,
            check=False,
        )


def _zeros(t, u, p):
    return np.zeros(np.broadcast(t, u, p).shape)


ZERO = Lagrangian(_zeros, _zeros, _zeros, name="zero", domain=(-np.inf, np.inf), check=False)


# {{{ registry


def example1(alpha: float, B: float = 1.0) -> Lagrangian:
    r""":math:`L = \frac{u^2}{2 \Gamma(1 - \alpha) (B - t)^\alpha} - p`.

    Its Riemann-Liouville Euler-Lagrange equation forces :math:`u \equiv 1`.
    """
    alpha = check_order(alpha)
    g = gamma(1.0 - alpha)

    def kernel(t):
        return (B - t) ** -alpha / g

    return Lagrangian(
        lambda t, u, p: 0.5 * u**2 * kernel(t) - p,
        lambda t, u, p: u * kernel(t),
        lambda t, u, p: -np.ones(np.broadcast(t, u, p).shape),
        name="example1",
        domain=(B - 1.0, B),
        right_singular=True,
        smoothness_note=30,
    )


def example1_smoothed(alpha: float, B: float = 1.0) -> Lagrangian:
    r""":math:`L = \frac{\Gamma(5)}{2 \Gamma(5 - \alpha)} (B - t)^{4 - \alpha} u^2 - (B - t)^4 p`.

    The coefficient of *p* and its first three derivatives vanish at *B*, and
    :math:`u \equiv 1` still solves the Euler-Lagrange equation because
    :math:`{}_tD_B^\alpha (B - t)^4 = \Gamma(5) / \Gamma(5 - \alpha) (B - t)^{4 - \alpha}`.
    """
    alpha = check_order(alpha)
    c = gamma(5.0) / gamma(5.0 - alpha)

    return Lagrangian(
        lambda t, u, p: 0.5 * c * (B - t) ** (4.0 - alpha) * u**2 - (B - t) ** 4 * p,
        lambda t, u, p: c * (B - t) ** (4.0 - alpha) * u,
        lambda t, u, p: -((B - t) ** 4) * np.ones(np.broadcast(t, u, p).shape),
        name="example1-smoothed",
        domain=(B - 1.0, B),
        smoothness_note=30,
    )


def eigen(alpha: float, B: float = 1.0) -> Lagrangian:
    """:math:`L = (p - u)^2`, minimized by solutions of :math:`D^\\alpha u = u`."""
    return Lagrangian(
        lambda t, u, p: (p - u) ** 2,
        lambda t, u, p: -2.0 * (p - u) * np.ones_like(np.asarray(t, dtype=np.float64)),
        lambda t, u, p: 2.0 * (p - u) * np.ones_like(np.asarray(t, dtype=np.float64)),
        name="eigen",
        domain=(B - 1.0, B),
    )


def quadratic(alpha: float, B: float = 1.0) -> Lagrangian:
    """:math:`L = (p^2 + u^2) / 2`."""
    return Lagrangian(
        lambda t, u, p: 0.5 * (p**2 + u**2) + 0.0 * t,
        lambda t, u, p: u + 0.0 * (t + p),
        lambda t, u, p: p + 0.0 * (t + u),
        name="quadratic",
        domain=(B - 1.0, B),
    )


#: id -> (factory(alpha, B), derivative kind inside L)
REGISTRY: dict[str, tuple[Callable[..., Lagrangian], str]] = {
    "example1": (example1, "riemann-liouville"),
    "example1-smoothed": (example1_smoothed, "riemann-liouville"),
    "rl-eigen": (eigen, "riemann-liouville"),
    "caputo-eigen": (eigen, "caputo"),
    "riesz-eigen": (eigen, "riesz-caputo"),
    "quadratic": (quadratic, "riemann-liouville"),
}


def get_lagrangian(name: str, alpha: float, B: float = 1.0) -> tuple[Lagrangian, str]:
    """Build a registry Lagrangian; returns it with its derivative kind."""
    try:
        factory, kind = REGISTRY[name]
    except KeyError:
        raise ValueError(
            f"unknown Lagrangian {name!r}; expected one of {sorted(REGISTRY)}"
        ) from None
    lag = factory(alpha, B)
    if lag.name != name:
        lag = Lagrangian(
            lag.value, lag.d_u, lag.d_p,
            name=name, domain=lag.domain, right_singular=lag.right_singular,
            smoothness_note=lag.smoothness_note, check=False,
        )
    return lag, kind


# }}}
