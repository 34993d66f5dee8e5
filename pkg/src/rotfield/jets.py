"""Truncated bivariate Taylor arithmetic (total degree <= 3).

A :class:`Jet3` stores the ten scaled Taylor coefficients

    c[i, j] = d^(i+j) f / du^i dv^j / (i! j!)     for i + j <= 3

of a scalar function at a base point ``(u0, v0)``.  Coefficients are held
in graded-lexicographic order in an array of shape ``(10, *batch)`` so one
jet can describe a whole grid of base points at once.

``order`` is the degree through which the coefficients are exact.  Seeded
and composed jets have order 3; each :meth:`Jet3.deriv` lowers it by one,
and arithmetic takes the minimum of its operands.  Coefficients above
``order`` are kept at zero.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "IDX",
    "Jet3",
    "JetError",
    "JetDomainError",
    "BasePointMismatch",
    "seed_variable",
    "constant",
    "arith",
    "unary",
]

IDX: tuple[tuple[int, int], ...] = (
    (0, 0),
    (1, 0), (0, 1),
    (2, 0), (1, 1), (0, 2),
    (3, 0), (2, 1), (1, 2), (0, 3),
)
POS = {ij: k for k, ij in enumerate(IDX)}
DEGREE = np.array([i + j for i, j in IDX])

# (k, a, b): IDX[a] + IDX[b] == IDX[k]
_MUL_TABLE = tuple(
    (POS[(ia + ib, ja + jb)], a, b)
    for a, (ia, ja) in enumerate(IDX)
    for b, (ib, jb) in enumerate(IDX)
    if ia + ib + ja + jb <= 3
)

# d/du maps c[i+1, j] * (i+1) -> c[i, j]; likewise for v
_DU = tuple((POS[(i, j)], POS[(i + 1, j)], i + 1) for i, j in IDX if i + j <= 2)
_DV = tuple((POS[(i, j)], POS[(i, j + 1)], j + 1) for i, j in IDX if i + j <= 2)


class JetError(ValueError):
    pass


class JetDomainError(JetError):
    """A unary function was applied outside its domain."""


class BasePointMismatch(JetError):
    pass


class Jet3:
    __slots__ = ("c", "u0", "v0", "order")

    def __init__(self, c, u0, v0, order: int = 3):
        c = np.asarray(c)
        if c.shape[:1] != (10,):
            raise ValueError(f"expected 10 coefficients, got shape {c.shape}")
        if not np.iscomplexobj(c):
            c = c.astype(float, copy=False)
        if order < 3:
            c = np.where(_degree_mask(order, c.ndim), c, 0)
        self.c = c
        self.u0 = np.asarray(u0, dtype=float)
        self.v0 = np.asarray(v0, dtype=float)
        self.order = order

    # -- construction -------------------------------------------------------

    @classmethod
    def from_derivatives(cls, u0, v0, derivs: dict[tuple[int, int], object], order: int = 3) -> Jet3:
        """Build a jet from partial derivatives keyed by ``(i, j)``; missing ones are zero."""
        u0 = np.asarray(u0, dtype=float)
        c = np.zeros((10,) + u0.shape, dtype=np.result_type(float, *derivs.values()))
        for (i, j), d in derivs.items():
            c[POS[(i, j)]] = np.asarray(d) / (math.factorial(i) * math.factorial(j))
        return cls(c, u0, v0, order)

    def _like(self, c, order=None) -> Jet3:
        out = Jet3.__new__(Jet3)
        out.c = c
        out.u0 = self.u0
        out.v0 = self.v0
        out.order = self.order if order is None else order
        return out

    # -- reading ------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.c.shape[1:]

    def coeff(self, i: int, j: int):
        return self.c[POS[(i, j)]]

    def partial(self, i: int, j: int):
        """The partial derivative d^(i+j)/du^i dv^j at the base point."""
        if i + j > self.order:
            raise JetError(f"derivative ({i},{j}) exceeds jet order {self.order}")
        return self.c[POS[(i, j)]] * (math.factorial(i) * math.factorial(j))

    @property
    def val(self):
        return self.c[0]

    @property
    def du(self):
        return self.partial(1, 0)

    @property
    def dv(self):
        return self.partial(0, 1)

    @property
    def duu(self):
        return self.partial(2, 0)

    @property
    def duv(self):
        return self.partial(1, 1)

    @property
    def dvv(self):
        return self.partial(0, 2)

    @property
    def grad(self):
        return self.du, self.dv

    def deriv(self, which: str) -> Jet3:
        """Jet of the partial derivative in ``u`` or ``v`` (order drops by one)."""
        if self.order < 1:
            raise JetError("cannot differentiate an order-0 jet")
        table = {"u": _DU, "v": _DV}[which]
        c = np.zeros_like(self.c)
        for k, src, f in table:
            c[k] = f * self.c[src]
        return self._like(c, self.order - 1)

    @property
    def real(self) -> Jet3:
        return self._like(self.c.real)

    @property
    def imag(self) -> Jet3:
        return self._like(self.c.imag)

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> Jet3 | None:
        if isinstance(other, Jet3):
            if other.u0 is not self.u0 and not (
                np.array_equal(other.u0, self.u0) and np.array_equal(other.v0, self.v0)
            ):
                raise BasePointMismatch("jets live at different base points")
            return other
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            c = self.c.astype(np.result_type(self.c, other), copy=True)
            c[0] = c[0] + other
            return self._like(c)
        return self._like(self.c + o.c, min(self.order, o.order))

    __radd__ = __add__

    def __neg__(self):
        return self._like(-self.c)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return self._like(self.c * other)
        a, b = self.c, o.c
        c = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.result_type(a, b))
        for k, i, j in _MUL_TABLE:
            c[k] += a[i] * b[j]
        return self._like(c, min(self.order, o.order))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return self._like(self.c / other)
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Jet3):
            return (self.log() * p).exp()
        if float(p) == int(p):
            return self.pow_int(int(p))
        return self.pow_real(float(p))

    def __repr__(self):
        return f"Jet3(order={self.order}, shape={self.shape}, c00={self.c[0]!r})"

    # -- composition with univariate functions ------------------------------

    def compose(self, f0, f1, f2, f3) -> Jet3:
        """f(self) given f and its first three derivatives at the constant term."""
        d = self._like(self.c.copy())
        d.c[0] = 0
        d2 = d * d
        d3 = d2 * d
        c = f1 * d.c + (f2 / 2) * d2.c + (f3 / 6) * d3.c
        c[0] = f0
        return self._like(c)

    def reciprocal(self) -> Jet3:
        x = self.c[0]
        if np.any(x == 0):
            raise JetDomainError("division by a jet with zero constant term")
        r = 1 / x
        return self.compose(r, -r**2, 2 * r**3, -6 * r**4)

    def sin(self):
        s, c = np.sin(self.c[0]), np.cos(self.c[0])
        return self.compose(s, c, -s, -c)

    def cos(self):
        s, c = np.sin(self.c[0]), np.cos(self.c[0])
        return self.compose(c, -s, -c, s)

    def sinh(self):
        s, c = np.sinh(self.c[0]), np.cosh(self.c[0])
        return self.compose(s, c, s, c)

    def cosh(self):
        s, c = np.sinh(self.c[0]), np.cosh(self.c[0])
        return self.compose(c, s, c, s)

    def exp(self):
        e = np.exp(self.c[0])
        return self.compose(e, e, e, e)

    def sqrt(self):
        x = self.c[0]
        if np.any(np.real(x) <= 0):
            raise JetDomainError("sqrt needs a positive constant term")
        s = np.sqrt(x)
        return self.compose(s, 0.5 / s, -0.25 / (s * x), 0.375 / (s * x * x))

    def log(self):
        x = self.c[0]
        if np.any(np.real(x) <= 0):
            raise JetDomainError("ln needs a positive constant term")
        r = 1 / x
        return self.compose(np.log(x), r, -r**2, 2 * r**3)

    def atan(self):
        x = self.c[0]
        w = 1 / (1 + x * x)
        return self.compose(np.arctan(x), w, -2 * x * w**2, (6 * x * x - 2) * w**3)

    def pow_int(self, n: int) -> Jet3:
        if n < 0:
            return self.reciprocal().pow_int(-n)
        x = self.c[0]
        falling = (1, n, n * (n - 1), n * (n - 1) * (n - 2))
        terms = [falling[k] * x ** (n - k) if n >= k else np.zeros_like(x) for k in range(4)]
        return self.compose(*terms)

    def pow_real(self, p: float) -> Jet3:
        x = self.c[0]
        if np.any(np.real(x) <= 0):
            raise JetDomainError("real power needs a positive constant term")
        xp = x**p
        return self.compose(xp, p * xp / x, p * (p - 1) * xp / x**2, p * (p - 1) * (p - 2) * xp / x**3)


def _degree_mask(order: int, ndim: int) -> np.ndarray:
    return (DEGREE <= order).reshape((10,) + (1,) * (ndim - 1))


def seed_variable(which: str, u0, v0) -> Jet3:
    """Jet of the coordinate function ``u`` or ``v`` at ``(u0, v0)``."""
    u0 = np.asarray(u0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    u0, v0 = np.broadcast_arrays(u0, v0)
    c = np.zeros((10,) + u0.shape)
    if which == "u":
        c[0], c[POS[(1, 0)]] = u0, 1.0
    elif which == "v":
        c[0], c[POS[(0, 1)]] = v0, 1.0
    else:
        raise ValueError(f"unknown variable {which!r}")
    return Jet3(c, u0, v0)


def constant(value, like: Jet3) -> Jet3:
    c = np.zeros((10,) + like.shape, dtype=np.result_type(float, value))
    c[0] = value
    return like._like(c)


_BINARY = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
    "neg": lambda a, b: -a,
}

_UNARY = {
    "sin": Jet3.sin,
    "cos": Jet3.cos,
    "sinh": Jet3.sinh,
    "cosh": Jet3.cosh,
    "exp": Jet3.exp,
    "sqrt": Jet3.sqrt,
    "ln": Jet3.log,
    "atan": Jet3.atan,
}


def arith(op: str, a: Jet3, b: Jet3 | None = None) -> Jet3:
    return _BINARY[op](a, b)


def unary(f: str, a: Jet3, p=None) -> Jet3:
    if f == "pow_int":
        return a.pow_int(int(p))
    if f == "pow_real":
        return a.pow_real(float(p))
    return _UNARY[f](a)
