"""Parametric immersions f: U in R^m -> R^n described by DSL expressions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, StencilOutsideDomain, ValidationError
from .expr import Expr, evaluate, parse, to_text, variables_of
from .jets import algebra, eval_jet_array


@dataclass(frozen=True)
class ImmersionSpec:
    """Variables, component expressions, a parameter box and free-form options.

    ``m = len(variables)`` parameters, ``n = len(components)`` ambient
    coordinates, codimension ``p = n - m``. Curves (m = 1) are accepted so they
    can serve as bases of constructions; the DDVV machinery itself needs m >= 2.
    """

    variables: tuple
    components: tuple
    domain: tuple
    options: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.variables) < 1:
            raise ValidationError("an immersion needs at least one variable")
        if len(set(self.variables)) != len(self.variables):
            raise ValidationError("duplicate variable names")
        if len(self.components) <= len(self.variables):
            raise ValidationError("codimension must be at least 1")
        declared = set(self.variables)
        for c in self.components:
            extra = variables_of(c) - declared
            if extra:
                raise ValidationError(f"component {to_text(c)!r} uses undeclared variables {sorted(extra)}")
        if len(self.domain) != len(self.variables):
            raise ValidationError("domain must give one interval per variable")
        for lo, hi in self.domain:
            if not lo < hi:
                raise ValidationError(f"empty domain interval [{lo}, {hi}]")

    @classmethod
    def create(cls, variables: Sequence[str], components: Sequence, domain=None, **options) -> "ImmersionSpec":
        variables = tuple(variables)
        comps = tuple(c if isinstance(c, Expr) else parse(str(c), variables) for c in components)
        if domain is None:
            domain = [(-1.0, 1.0)] * len(variables)
        domain = tuple((float(lo), float(hi)) for lo, hi in domain)
        return cls(variables, comps, domain, dict(options))

    @property
    def m(self) -> int:
        return len(self.variables)

    @property
    def n(self) -> int:
        return len(self.components)

    @property
    def p(self) -> int:
        return self.n - self.m

    def component_texts(self) -> list:
        return [to_text(c) for c in self.components]

    def with_components(self, components, variables=None, domain=None) -> "ImmersionSpec":
        return ImmersionSpec.create(
            variables if variables is not None else self.variables,
            components,
            domain if domain is not None else self.domain,
            **self.options,
        )

    # evaluation -----------------------------------------------------------
    def positions(self, points) -> np.ndarray:
        """Float positions f(x) for points of shape (m,) or (P, m)."""
        points = np.asarray(points, dtype=float)
        env = {name: points[..., i] for i, name in enumerate(self.variables)}
        cols = [np.broadcast_to(evaluate(c, env), points.shape[:-1]) for c in self.components]
        return np.stack(cols, axis=-1)

    def jets(self, points, order: int) -> np.ndarray:
        """Raw jet coefficients of every component, shape (..., n, size)."""
        return eval_jet_array(self.components, self.variables, points, order)

    def algebra(self, order: int):
        return algebra(self.m, order)

    # domain ---------------------------------------------------------------
    def contains(self, x, margin: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        lo = np.array([d[0] for d in self.domain])
        hi = np.array([d[1] for d in self.domain])
        return bool(np.all(x - margin >= lo - 1e-12) and np.all(x + margin <= hi + 1e-12))

    def check_stencil(self, x, reach: float):
        if not self.contains(x, reach):
            raise StencilOutsideDomain(f"stencil of radius {reach:g} around {list(map(float, x))} leaves the domain")

    def grid(self, counts: Sequence[int]) -> np.ndarray:
        return grid_points(self.domain, counts)


def grid_points(domain, counts) -> np.ndarray:
    """Tensor lattice of the box (endpoints included), last axis varying fastest."""
    if len(counts) != len(domain):
        raise DimensionMismatch("one grid count per axis required")
    axes = [np.linspace(lo, hi, int(k)) for (lo, hi), k in zip(domain, counts)]
    return np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, len(domain))


def reparametrize(spec: ImmersionSpec, mapping, domain=None) -> ImmersionSpec:
    """Precompose with a change of parameters given as {old_name: expression in the same names}."""
    from .expr import substitute

    subs = {k: (v if isinstance(v, Expr) else parse(str(v), spec.variables)) for k, v in mapping.items()}
    comps = [substitute(c, subs) for c in spec.components]
    return ImmersionSpec.create(spec.variables, comps, domain if domain is not None else spec.domain, **spec.options)
