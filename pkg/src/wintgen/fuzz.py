"""Random expressions, immersions and finite-difference oracles for property checks."""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from .errors import DomainError
from .expr import Constant, Expr, Variable, const, evaluate, func
from .immersion import ImmersionSpec
from .jets import algebra, eval_jet_array


def random_polynomial(rng, variables: Sequence[str], degree: int, low=-1.0, high=1.0, density=1.0) -> Expr:
    """Sum of monomials of total degree <= ``degree`` with uniform coefficients."""
    terms = None
    m = len(variables)
    for alpha in itertools.product(range(degree + 1), repeat=m):
        if sum(alpha) > degree or rng.random() > density:
            continue
        c = round(float(rng.uniform(low, high)), 6)
        if c == 0:
            continue
        mono = None
        for name, k in zip(variables, alpha):
            if k == 0:
                continue
            f = Variable(name) if k == 1 else Variable(name) ** k
            mono = f if mono is None else mono * f
        term = const(abs(c)) if mono is None else const(abs(c)) * mono
        if terms is None:
            terms = term if c > 0 else -term
        else:
            terms = terms + term if c > 0 else terms - term
    return terms if terms is not None else Constant(0.0)


def random_graph_immersion(rng, m: int = 3, p: int = 2, degree: int = 3) -> ImmersionSpec:
    """Graph x -> (x, P_1(x), ..., P_p(x)) of random polynomials (always an immersion)."""
    names = [f"x{k + 1}" for k in range(m)]
    comps = [Variable(n) for n in names] + [random_polynomial(rng, names, degree) for _ in range(p)]
    return ImmersionSpec.create(names, comps, [(-1.0, 1.0)] * m)


_SAFE_UNARY = ("sin", "cos", "exp", "tanh", "sinh", "cosh")


def random_expression(rng, variables: Sequence[str], depth: int = 4) -> Expr:
    """Random smooth expression; log/sqrt/division only on strictly positive arguments."""
    if depth <= 0 or rng.random() < 0.2:
        if rng.random() < 0.6:
            return Variable(variables[rng.integers(len(variables))])
        return Constant(round(float(rng.uniform(0.1, 2.0)), 3))
    kind = rng.integers(8)
    sub = lambda: random_expression(rng, variables, depth - 1)  # noqa: E731
    if kind == 0:
        return sub() + sub()
    if kind == 1:
        return sub() - sub()
    if kind == 2:
        return sub() * sub()
    if kind == 3:
        inner = sub()
        return sub() / (Constant(1.5) + inner * inner)
    if kind == 4:
        return sub() ** int(rng.integers(2, 4))
    if kind == 5:
        inner = sub()
        return func(["log", "sqrt"][rng.integers(2)], Constant(1.0) + inner * inner)
    if kind == 6:
        return -sub()
    return func(_SAFE_UNARY[rng.integers(len(_SAFE_UNARY))], Constant(0.5) * sub() if rng.random() < 0.5 else sub())


def central_richardson(fn, x, i, h=1e-3):
    """d/dx_i by a Richardson-extrapolated central difference."""

    def D(step):
        e = np.zeros_like(x)
        e[i] = step
        return (fn(x + e) - fn(x - e)) / (2 * step)

    return (4 * D(h / 2) - D(h)) / 3


def second_richardson(fn, x, i, j, h=1e-3):
    def D(step):
        ei = np.zeros_like(x)
        ej = np.zeros_like(x)
        ei[i] = step
        ej[j] = step
        if i == j:
            return (fn(x + ei) - 2 * fn(x) + fn(x - ei)) / step**2
        return (fn(x + ei + ej) - fn(x + ei - ej) - fn(x - ei + ej) + fn(x - ei - ej)) / (4 * step * step)

    return (4 * D(h / 2) - D(h)) / 3


def jet_vs_fd_error(e: Expr, variables, x, h=1e-3) -> float:
    """Worst relative error |jet - FD| / (1 + |jet|) over first and second partials."""
    x = np.asarray(x, dtype=float)
    jet = eval_jet_array([e], variables, x, 2)[0]
    m = len(variables)

    def fn(p):
        return float(evaluate(e, dict(zip(variables, p))))

    worst = 0.0
    for i in range(m):
        a = jet[1 + i]
        b = central_richardson(fn, x, i, h)
        worst = max(worst, abs(a - b) / (1 + abs(a)))
    position = algebra(m, 2).position
    for i in range(m):
        for j in range(i, m):
            alpha = [0] * m
            alpha[i] += 1
            alpha[j] += 1
            a = jet[position[tuple(alpha)]]
            b = second_richardson(fn, x, i, j, h)
            worst = max(worst, abs(a - b) / (1 + abs(a)))
    return worst


def fuzz_corpus(seed: int, count: int, variables=("u", "v", "w"), depth: int = 4):
    """``count`` (expression, point) pairs whose value and jets are finite at the point."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        nvars = int(rng.integers(1, len(variables) + 1))
        names = list(variables[:nvars])
        e = random_expression(rng, names, depth)
        x = rng.uniform(-1, 1, nvars)
        try:
            val = eval_jet_array([e], names, x, 2)
        except DomainError:
            continue
        if np.max(np.abs(val)) > 1e6:
            continue
        out.append((e, names, x))
    return out
