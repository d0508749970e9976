import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wintgen.errors import IndexOutOfOrder
from wintgen.expr import parse, substitute
from wintgen.fuzz import fuzz_corpus, jet_vs_fd_error, random_polynomial
from wintgen.jets import algebra, eval_jet, eval_jet_array, jet_extract, multi_indices


def test_polynomial_plus_sine():
    j = eval_jet(parse("u^2 + sin(v)", ["u", "v"]), (1, 0), 2, ["u", "v"])
    want = {(0, 0): 1, (1, 0): 2, (0, 1): 1, (2, 0): 2, (0, 2): 0, (1, 1): 0}
    for alpha, val in want.items():
        assert j.extract(alpha) == pytest.approx(val, abs=1e-15)


def test_exp_all_ones():
    j = eval_jet(parse("exp(u)", ["u"]), [0.0], 4)
    assert [j.extract((k,)) for k in range(5)] == pytest.approx([1.0] * 5, abs=1e-15)


def test_sqrt_against_finite_differences():
    j = eval_jet(parse("sqrt(u)", ["u"]), [1.0], 2)
    h = 1e-5
    d1 = (math.sqrt(1 + h) - math.sqrt(1 - h)) / (2 * h)
    d2 = (math.sqrt(1 + 1e-3) - 2 + math.sqrt(1 - 1e-3)) / 1e-6
    assert j.extract((1,)) == pytest.approx(d1, rel=1e-6)
    assert j.extract((2,)) == pytest.approx(d2, rel=1e-6)
    assert (j.extract((1,)), j.extract((2,))) == (0.5, -0.25)


def test_extract_and_order_guard():
    j = eval_jet(parse("u*v", ["u", "v"]), (2, 3), 2, ["u", "v"])
    assert jet_extract(j, (1, 1)) == 1
    assert jet_extract(j, (1, 0)) == 3
    with pytest.raises(IndexOutOfOrder):
        jet_extract(j, (0, 3))


def test_graded_ordering():
    assert multi_indices(2, 2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert algebra(4, 6).size == 210


def _random_poly(rng, m, degree):
    """Coefficient table {alpha: c} and the matching expression text."""
    names = ["u", "v", "w"][:m]
    coeffs = {}
    for alpha in itertools.product(range(degree + 1), repeat=m):
        if sum(alpha) <= degree:
            coeffs[alpha] = round(float(rng.uniform(-1, 1)), 6)
    terms = []
    for alpha, c in coeffs.items():
        mono = "*".join(f"{n}^{k}" for n, k in zip(names, alpha) if k)
        terms.append(f"({c!r})" + (f"*{mono}" if mono else ""))
    return names, coeffs, " + ".join(terms)


def _poly_derivative(coeffs, alpha, x):
    total = 0.0
    for beta, c in coeffs.items():
        if any(b < a for a, b in zip(alpha, beta)):
            continue
        term = c
        for a, b, xi in zip(alpha, beta, x):
            term *= math.perm(b, a) * xi ** (b - a)
        total += term
    return total


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_polynomial_jets_exact(seed, m):
    rng = np.random.default_rng(seed)
    names, coeffs, text = _random_poly(rng, m, 4)
    e = parse(text, names)
    x = rng.uniform(-1, 1, m)
    jet = eval_jet_array([e], names, x, 3)[0]
    pos = algebra(m, 3).position
    scale = sum(abs(c) for c in coeffs.values()) * 4**3
    for alpha in multi_indices(m, 3):
        want = _poly_derivative(coeffs, alpha, x)
        assert abs(jet[pos[alpha]] - want) <= 1e-12 * max(1.0, scale)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_chain_rule_consistency(seed):
    rng = np.random.default_rng(seed)
    inner = random_polynomial(rng, ["u", "v"], 2)
    outer = parse("sin(t) + t^3", ["t"])
    composed = substitute(outer, {"t": inner})
    x = rng.uniform(-1, 1, 2)
    direct = eval_jet_array([composed], ["u", "v"], x, 3)[0]
    alg = algebra(2, 3)
    ij = eval_jet_array([inner], ["u", "v"], x, 3)[0]
    comp = alg.unary("sin", ij) + alg.ipow(ij, 3)
    np.testing.assert_allclose(direct, comp, rtol=1e-12, atol=1e-12)


def test_non_polynomial_fuzz():
    for e, names, x in fuzz_corpus(7, 100):
        assert jet_vs_fd_error(e, names, x, 1e-3) <= 1e-6
