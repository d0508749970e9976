"""Truncated multivariate Taylor jets (forward-mode AD to a fixed order).

A jet of arity ``m`` and order ``K`` holds the raw partial derivatives
``d^alpha f(x0)`` for every multi-index ``|alpha| <= K`` (not the
factorial-scaled Taylor coefficients). Storage is a dense vector in graded
order: total degree ascending, and inside one degree the multi-indices in
descending lexicographic order, e.g. for ``m = 2, K = 2``::

    (0,0) (1,0) (0,1) (2,0) (1,1) (0,2)

so truncating to a lower order is a prefix slice.

Two layers live here. ``JetAlgebra`` works on plain ndarrays whose last axis
is the coefficient axis, with arbitrary leading (batch / tensor) axes; the
geometry code uses it for jet-valued vectors and matrices. ``Jet`` is the
immutable scalar wrapper exposed by the DSL (:func:`eval_jet`).
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import product
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, DomainError, IndexOutOfOrder, OrderTooLarge
from .expr import Binary, Constant, Expr, Unary, Variable, evaluate

DEFAULT_MAX_ORDER = 6


def multi_indices(m: int, order: int) -> list:
    out = []
    for degree in range(order + 1):
        block = [a for a in product(range(degree + 1), repeat=m) if sum(a) == degree]
        block.sort(reverse=True)
        out.extend(block)
    return out


def _multi_factorial(alpha):
    return math.prod(math.factorial(a) for a in alpha)


class JetAlgebra:
    """Arithmetic tables for jets of a fixed arity and order."""

    def __init__(self, m: int, order: int):
        if m < 1 or order < 0:
            raise ValueError("arity must be >= 1 and order >= 0")
        self.m = m
        self.order = order
        self.indices = multi_indices(m, order)
        self.size = len(self.indices)
        self.position = {a: k for k, a in enumerate(self.indices)}
        self.degree = np.array([sum(a) for a in self.indices])

        # Leibniz table: d^c(ab) = sum_{a+b=c} c!/(a!b!) d^a(a) d^b(b)
        ia, ib, ic, w = [], [], [], []
        fact = [_multi_factorial(a) for a in self.indices]
        for p, a in enumerate(self.indices):
            for q, b in enumerate(self.indices):
                c = tuple(x + y for x, y in zip(a, b))
                r = self.position.get(c)
                if r is None:
                    continue
                ia.append(p)
                ib.append(q)
                ic.append(r)
                w.append(fact[r] / (fact[p] * fact[q]))
        self._ia = np.array(ia)
        self._ib = np.array(ib)
        self._w = np.array(w)
        scatter = np.zeros((len(ic), self.size))
        scatter[np.arange(len(ic)), ic] = 1.0
        self._scatter = scatter

    def __repr__(self):
        return f"JetAlgebra(m={self.m}, order={self.order})"

    # construction -----------------------------------------------------
    def constant(self, value, shape=()):
        out = np.zeros(tuple(shape) + (self.size,))
        out[..., 0] = value
        return out

    def variables(self, point) -> np.ndarray:
        """Seed jets of the coordinate functions at ``point``; shape (..., m, size)."""
        point = np.asarray(point, dtype=float)
        if point.shape[-1] != self.m:
            raise DimensionMismatch(f"point has {point.shape[-1]} coordinates, expected {self.m}")
        out = np.zeros(point.shape + (self.size,))
        out[..., 0] = point
        if self.order >= 1:
            for i in range(self.m):
                out[..., i, 1 + i] = 1.0
        return out

    # arithmetic -------------------------------------------------------
    def mul(self, a, b):
        return (a[..., self._ia] * b[..., self._ib] * self._w) @ self._scatter

    def matmul(self, a, b):
        """Jet-valued matrix product: (..., i, k, size) x (..., k, j, size)."""
        terms = np.einsum("...ikq,...kjq->...ijq", a[..., self._ia], b[..., self._ib] * self._w)
        return terms @ self._scatter

    def dot(self, a, b):
        """Contract the last tensor axis: (..., k, size) . (..., k, size) -> (..., size)."""
        terms = np.einsum("...kq,...kq->...q", a[..., self._ia], b[..., self._ib] * self._w)
        return terms @ self._scatter

    def compose(self, a, derivs):
        """phi(a) given ``derivs[..., k] = phi^(k)(a0)`` for k = 0..order."""
        delta = np.array(a, dtype=float, copy=True)
        delta[..., 0] = 0.0
        out = self.constant(0.0, a.shape[:-1])
        out[..., 0] = derivs[..., 0]
        power = delta
        for k in range(1, self.order + 1):
            out = out + (derivs[..., k] / math.factorial(k))[..., None] * power
            if k < self.order:
                power = self.mul(power, delta)
        return out

    def recip(self, a):
        a0 = a[..., 0]
        if np.any(a0 == 0):
            raise DomainError("division by a jet with zero value")
        return self.compose(a, _power_derivs(a0, -1.0, self.order))

    def div(self, a, b):
        return self.mul(a, self.recip(b))

    def sqrt(self, a):
        a0 = a[..., 0]
        if np.any(a0 < 0) or (self.order > 0 and np.any(a0 == 0)):
            raise DomainError("sqrt of a non-positive value")
        return self.compose(a, _power_derivs(a0, 0.5, self.order))

    def ipow(self, a, n: int):
        if n < 0:
            return self.recip(self.ipow(a, -n))
        result = self.constant(1.0, a.shape[:-1])
        base = a
        while n:
            if n & 1:
                result = self.mul(result, base)
            n >>= 1
            if n:
                base = self.mul(base, base)
        return result

    def rpow(self, a, c: float):
        """a^c for real c. Non-integer exponents go through exp(c log a) and need a > 0."""
        if float(c).is_integer():
            return self.ipow(a, int(c))
        a0 = a[..., 0]
        if np.any(a0 <= 0):
            raise DomainError("non-integer power of a non-positive base")
        return self.compose(a, _power_derivs(a0, c, self.order))

    def unary(self, op: str, a):
        a0 = a[..., 0]
        K = self.order
        if op == "neg":
            return -a
        if op == "sin":
            return self.compose(a, _cyclic(np.sin(a0), np.cos(a0), K))
        if op == "cos":
            return self.compose(a, _cyclic(np.cos(a0), -np.sin(a0), K))
        if op == "exp":
            return self.compose(a, np.repeat(np.exp(a0)[..., None], K + 1, axis=-1))
        if op == "sinh":
            return self.compose(a, _alternating(np.sinh(a0), np.cosh(a0), K))
        if op == "cosh":
            return self.compose(a, _alternating(np.cosh(a0), np.sinh(a0), K))
        if op == "log":
            if np.any(a0 <= 0):
                raise DomainError("log of a non-positive value")
            d = np.empty(a0.shape + (K + 1,))
            d[..., 0] = np.log(a0)
            for k in range(1, K + 1):
                d[..., k] = (-1) ** (k - 1) * math.factorial(k - 1) / a0**k
            return self.compose(a, d)
        if op == "sqrt":
            return self.sqrt(a)
        if op == "tan":
            c = self.unary("cos", a)
            if np.any(np.abs(c[..., 0]) < 1e-300):
                raise DomainError("tan at a pole")
            return self.div(self.unary("sin", a), c)
        if op == "tanh":
            return self.div(self.unary("sinh", a), self.unary("cosh", a))
        raise ValueError(f"unknown unary op {op!r}")

    # calculus ---------------------------------------------------------
    @property
    def lower(self) -> "JetAlgebra":
        return algebra(self.m, self.order - 1)

    def truncate(self, a, order: int):
        return a[..., : algebra(self.m, order).size]

    def derivative(self, a, i: int):
        """d/dx_i of a jet array: returns an order-(K-1) jet array."""
        if self.order == 0:
            raise IndexOutOfOrder("cannot differentiate an order-0 jet")
        return a[..., self._shift(i)]

    def gradient(self, a):
        """Stack of partial derivatives: (..., m, size(K-1))."""
        return np.stack([self.derivative(a, i) for i in range(self.m)], axis=-2)

    @lru_cache(maxsize=None)
    def _shift(self, i):
        lower = multi_indices(self.m, self.order - 1)
        src = []
        for a in lower:
            b = list(a)
            b[i] += 1
            src.append(self.position[tuple(b)])
        return np.array(src)

    def values(self, a):
        return a[..., 0]

    def first(self, a):
        """Point values of first partials: (..., m)."""
        return a[..., 1 : 1 + self.m]

    def second(self, a):
        """Point values of the Hessian: (..., m, m)."""
        out = np.empty(a.shape[:-1] + (self.m, self.m))
        for i in range(self.m):
            for j in range(self.m):
                alpha = [0] * self.m
                alpha[i] += 1
                alpha[j] += 1
                out[..., i, j] = a[..., self.position[tuple(alpha)]]
        return out

    def inv_matrix(self, a):
        """Inverse of a jet-valued square matrix (..., n, n, size) via the nilpotent series."""
        a0 = a[..., 0]
        x0 = np.linalg.inv(a0)
        x = self.constant(0.0, x0.shape)
        x[..., 0] = x0
        delta = np.array(a, copy=True)
        delta[..., 0] = 0.0
        step = -self.matmul(x, delta)
        out = x
        term = x
        for _ in range(self.order):
            term = self.matmul(step, term)
            out = out + term
        return out


def _cyclic(v, d, K):
    """Derivative sequence v, d, -v, -d, ... (sin / cos)."""
    seq = [v, d, -v, -d]
    return np.stack([seq[k % 4] for k in range(K + 1)], axis=-1)


def _alternating(v, d, K):
    seq = [v, d]
    return np.stack([seq[k % 2] for k in range(K + 1)], axis=-1)


def _power_derivs(a0, c, K):
    d = np.empty(np.shape(a0) + (K + 1,))
    coef = 1.0
    for k in range(K + 1):
        d[..., k] = coef * np.power(a0, c - k)
        coef *= c - k
    return d


@lru_cache(maxsize=None)
def algebra(m: int, order: int) -> JetAlgebra:
    return JetAlgebra(m, order)


# ---------------------------------------------------------------------------
# expression evaluation


def _eval(node: Expr, alg: JetAlgebra, seeds: dict, batch_shape):
    if isinstance(node, Variable):
        return seeds[node.name]
    if isinstance(node, Constant):
        return alg.constant(node.value, batch_shape)
    if isinstance(node, Unary):
        return alg.unary(node.op, _eval(node.child, alg, seeds, batch_shape))
    a = _eval(node.left, alg, seeds, batch_shape)
    if node.op == "^":
        exponent = float(evaluate(node.right, {}))
        return alg.rpow(a, exponent)
    b = _eval(node.right, alg, seeds, batch_shape)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return alg.mul(a, b)
    if node.op == "/":
        return alg.div(a, b)
    raise ValueError(f"unknown binary op {node.op!r}")


def eval_jet_array(
    exprs: Sequence[Expr],
    variables: Sequence[str],
    points,
    order: int,
    max_order: int = DEFAULT_MAX_ORDER,
) -> np.ndarray:
    """Raw jet coefficients of several expressions at one or many points.

    ``points`` has shape (m,) or (P, m); the result has shape
    (len(exprs), size) or (P, len(exprs), size).
    """
    if order > max_order:
        raise OrderTooLarge(f"jet order {order} exceeds maximum {max_order}")
    if order < 0:
        raise ValueError("jet order must be non-negative")
    points = np.asarray(points, dtype=float)
    alg = algebra(len(variables), order)
    seeds_arr = alg.variables(points)
    batch_shape = points.shape[:-1]
    seeds = {name: seeds_arr[..., i, :] for i, name in enumerate(variables)}
    with np.errstate(divide="raise", invalid="raise", over="raise", under="ignore"):
        try:
            cols = [np.broadcast_to(_eval(e, alg, seeds, batch_shape), batch_shape + (alg.size,)) for e in exprs]
        except FloatingPointError as exc:
            raise DomainError(str(exc)) from exc
    out = np.stack(cols, axis=-2)
    if not np.all(np.isfinite(out)):
        raise DomainError("non-finite jet coefficient")
    return out


class Jet:
    """Immutable scalar jet: raw partial derivatives up to ``order`` at a point."""

    __slots__ = ("arity", "order", "_derivs")

    def __init__(self, arity: int, order: int, derivs):
        derivs = np.array(derivs, dtype=float)
        alg = algebra(arity, order)
        if derivs.shape != (alg.size,):
            raise DimensionMismatch(f"expected {alg.size} coefficients, got {derivs.shape}")
        derivs.setflags(write=False)
        object.__setattr__(self, "arity", arity)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "_derivs", derivs)

    def __setattr__(self, name, value):
        raise AttributeError("Jet is immutable")

    @property
    def algebra(self) -> JetAlgebra:
        return algebra(self.arity, self.order)

    @property
    def derivs(self) -> np.ndarray:
        return self._derivs

    @property
    def coeffs(self) -> dict:
        return dict(zip(self.algebra.indices, self._derivs.tolist()))

    @property
    def value(self) -> float:
        return float(self._derivs[0])

    @classmethod
    def constant(cls, value, arity, order):
        return cls(arity, order, algebra(arity, order).constant(value))

    @classmethod
    def variable(cls, i, point, order):
        point = np.asarray(point, dtype=float)
        return cls(len(point), order, algebra(len(point), order).variables(point)[i])

    def extract(self, alpha) -> float:
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.arity:
            raise DimensionMismatch(f"multi-index {alpha} has wrong arity")
        if any(a < 0 for a in alpha):
            raise ValueError("negative multi-index")
        if sum(alpha) > self.order:
            raise IndexOutOfOrder(f"|{alpha}| exceeds jet order {self.order}")
        return float(self._derivs[self.algebra.position[alpha]])

    def derivative(self, i: int) -> "Jet":
        return Jet(self.arity, self.order - 1, self.algebra.derivative(self._derivs, i))

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise IndexOutOfOrder("cannot raise the order of a jet")
        return Jet(self.arity, order, self._derivs[: algebra(self.arity, order).size])

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.arity != self.arity or other.order != self.order:
                raise DimensionMismatch(
                    f"jet mismatch: (m={self.arity}, K={self.order}) vs (m={other.arity}, K={other.order})"
                )
            return other._derivs
        if isinstance(other, (int, float, np.floating, np.integer)):
            return self.algebra.constant(float(other))
        return NotImplemented

    def _wrap(self, d):
        return Jet(self.arity, self.order, d)

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self._derivs + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self._derivs - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(o - self._derivs)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.algebra.mul(self._derivs, o))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.algebra.div(self._derivs, o))

    def __rtruediv__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.algebra.div(o, self._derivs))

    def __neg__(self):
        return self._wrap(-self._derivs)

    def __pow__(self, c):
        return self._wrap(self.algebra.rpow(self._derivs, float(c)))

    def apply(self, op: str) -> "Jet":
        """Apply a named unary function (sin, log, ...) by truncated composition."""
        return self._wrap(self.algebra.unary(op, self._derivs))

    def __repr__(self):
        return f"Jet(arity={self.arity}, order={self.order}, value={self.value!r})"


def eval_jet(e: Expr, point, order: int, variables: Sequence[str] | None = None, max_order: int = DEFAULT_MAX_ORDER) -> Jet:
    """Jet of ``e`` at ``point``. Variables default to the sorted free names of ``e``."""
    from .expr import variables_of

    point = np.atleast_1d(np.asarray(point, dtype=float))
    if variables is None:
        variables = sorted(variables_of(e))
        if len(variables) != len(point):
            raise DimensionMismatch("pass `variables` explicitly when the point arity differs")
    arr = eval_jet_array([e], variables, point, order, max_order=max_order)[0]
    return Jet(len(variables), order, arr)


def jet_extract(j: Jet, alpha) -> float:
    return j.extract(alpha)
