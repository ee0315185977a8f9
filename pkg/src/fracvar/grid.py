"""Uniform-grid carriers for sampled functions and the memory window."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

#: Default fraction of the grid masked next to each singular endpoint.
MASK_FRACTION = 0.05


class Side(enum.Enum):
    """Side of a fractional operator."""

    #: Integrates over :math:`[a, t]`.
    Left = "left"
    #: Integrates over :math:`[t, b]`.
    Right = "right"

    @classmethod
    def parse(cls, value: Side | str) -> Side:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"side must be 'left' or 'right', got {value!r}") from None


def check_order(alpha: float, *, allow_zero: bool = True) -> float:
    """Validate a fractional order and return it as a float."""
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha < 0.0 or alpha >= 1.0:
        raise ValueError(f"order must satisfy 0 <= alpha < 1, got {alpha}")
    if not allow_zero and alpha == 0.0:
        raise ValueError("order 0 is the identity here; use the function directly")
    return alpha


@dataclass(frozen=True)
class GridFunction:
    r"""A real function sampled on the uniform grid
    :math:`t_k = a + k (b - a) / n`, :math:`k = 0, \dots, n`.
    """

    a: float
    b: float
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("values must be a 1d array with at least 2 samples")
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or self.b <= self.a:
            raise ValueError(f"need a < b, got a={self.a}, b={self.b}")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        """Number of intervals."""
        return self.values.size - 1

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def t(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n + 1)

    @classmethod
    def from_callable(cls, f, a: float, b: float, n: int) -> GridFunction:
        t = np.linspace(a, b, int(n) + 1)
        return cls(a, b, np.broadcast_to(np.asarray(f(t), dtype=np.float64), t.shape))

    def with_values(self, values: np.ndarray) -> GridFunction:
        return GridFunction(self.a, self.b, values)

    def index_of(self, x: float, *, rtol: float = 1.0e-9) -> int:
        """Index of the grid node at *x*; raises if *x* is not a node."""
        k = round((x - self.a) / self.h)
        if k < 0 or k > self.n or abs(self.a + k * self.h - x) > rtol * (self.b - self.a):
            raise ValueError(f"{x} is not a node of the grid on [{self.a}, {self.b}]")
        return int(k)

    def restrict(self, lo: float, hi: float) -> GridFunction:
        """Sub-grid function on :math:`[lo, hi]`; both must be grid nodes."""
        i, j = self.index_of(lo), self.index_of(hi)
        if j <= i:
            raise ValueError(f"empty restriction [{lo}, {hi}]")
        return GridFunction(self.t[i], self.t[j], self.values[i : j + 1])

    def __add__(self, other: GridFunction) -> GridFunction:
        _check_same_grid(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: GridFunction) -> GridFunction:
        _check_same_grid(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, c: float) -> GridFunction:
        return self.with_values(float(c) * self.values)

    __rmul__ = __mul__

    # {{{ csv

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,u\n")
        for tk, uk in zip(self.t, self.values):
            buf.write(f"{tk:.17g},{uk:.17g}\n")
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())

    @classmethod
    def from_csv(cls, text: str, *, rtol: float = 1.0e-9) -> GridFunction:
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["t", "u"]:
            raise ValueError("grid CSV must start with the header 't,u'")
        data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=np.float64)
        if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] != 2:
            raise ValueError("grid CSV needs at least two rows of 't,u'")

        t, u = data[:, 0], data[:, 1]
        n = t.size - 1
        expected = np.linspace(t[0], t[-1], n + 1)
        if np.max(np.abs(t - expected)) > rtol * (t[-1] - t[0]):
            raise ValueError("grid CSV abscissae are not uniformly spaced")

        return cls(t[0], t[-1], u)

    @classmethod
    def read_csv(cls, path: str | Path) -> GridFunction:
        return cls.from_csv(Path(path).read_text())

    # }}}


def _check_same_grid(f: GridFunction, g: GridFunction) -> None:
    if f.n != g.n or f.a != g.a or f.b != g.b:
        raise ValueError("grid functions live on different grids")


@dataclass(frozen=True)
class MemoryWindow:
    """Memory start *a*, action interval :math:`(A, B)` and domain end *b*."""

    a: float
    A: float
    B: float
    b: float

    def __post_init__(self) -> None:
        if not (self.a <= self.A < self.B <= self.b):
            raise ValueError(
                f"need a <= A < B <= b, got {self.a}, {self.A}, {self.B}, {self.b}"
            )

    @classmethod
    def classical(cls, a: float, b: float) -> MemoryWindow:
        return cls(a, a, b, b)

    @property
    def has_memory(self) -> bool:
        return self.a < self.A


def interior_mask(
    n: int,
    fraction: float = MASK_FRACTION,
    *,
    left: bool = True,
    right: bool = True,
) -> np.ndarray:
    """Boolean mask of the unmasked nodes of an *n*-interval grid.

    ``fraction`` of the grid is removed next to each requested endpoint
    (at least the endpoint itself).
    """
    if not 0.0 <= fraction < 0.5:
        raise ValueError(f"mask fraction must be in [0, 0.5), got {fraction}")

    m = max(1, int(round(fraction * n)))
    mask = np.ones(n + 1, dtype=bool)
    if left:
        mask[:m] = False
    if right:
        mask[n + 1 - m :] = False
    return mask
