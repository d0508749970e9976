import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wintgen import constructions as C
from wintgen.ddvv import (
    canonical_form,
    commutator_equality,
    commutator_sides,
    curvature_ellipse,
    ddvv_report,
    deficit_scale,
    normal_form_operators,
    report_from_operators,
    wintgen_scan,
)
from wintgen.errors import NotASurface, NotEquality
from wintgen.fuzz import random_graph_immersion
from wintgen.geometry import point_geometry
from wintgen.immersion import ImmersionSpec


def _conjugate(rng, ops):
    p, m, _ = ops.shape
    Qt = np.linalg.qr(rng.normal(size=(m, m)))[0]
    Qn = np.linalg.qr(rng.normal(size=(p, p)))[0]
    return np.einsum("rs,sij->rij", Qn, np.einsum("ia,sab,jb->sij", Qt, ops, Qt))


def test_commutator_oracle_sixteen():
    ops = normal_form_operators(3, 3, (0, 0, 0), 1.0)
    Abar = ops - np.trace(ops, axis1=1, axis2=2)[:, None, None] / 3 * np.eye(3)
    assert np.sum(Abar[0] ** 2) == pytest.approx(2.0)
    assert np.sum(Abar[1] ** 2) == pytest.approx(2.0)
    comm = Abar[0] @ Abar[1] - Abar[1] @ Abar[0]
    assert np.sum(comm**2) == pytest.approx(8.0)
    assert commutator_sides(ops) == pytest.approx((16.0, 16.0))


def test_canonical_form_fixed_point():
    lam = (0.5, -0.2, 0.1)
    mu0 = 1 / math.sqrt(6)
    cf = canonical_form(normal_form_operators(3, 3, lam, mu0))
    assert cf.lambdas == pytest.approx(lam, abs=1e-12)
    assert cf.mu0 == pytest.approx(mu0, abs=1e-12)
    np.testing.assert_allclose(np.abs(cf.tangent_basis), np.eye(3), atol=1e-12)
    np.testing.assert_allclose(np.abs(cf.normal_basis), np.eye(3), atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 5))
def test_canonical_form_gauge_round_trip(seed, p):
    rng = np.random.default_rng(seed)
    lam = tuple(rng.uniform(-1, 1, 3))
    mu0 = float(rng.uniform(0.05, 1))
    rot = _conjugate(rng, normal_form_operators(3, p, lam, mu0))
    cf = canonical_form(rot)
    assert cf.residual <= 1e-8
    assert cf.mu0 == pytest.approx(mu0, abs=1e-8)
    assert abs(cf.lambda3) == pytest.approx(abs(lam[2]), abs=1e-8)
    assert cf.lambda1**2 + cf.lambda2**2 == pytest.approx(lam[0] ** 2 + lam[1] ** 2, abs=1e-8)


def test_random_operators_not_equality(rng):
    for _ in range(20):
        X = rng.uniform(-1, 1, (3, 3, 3))
        with pytest.raises(NotEquality):
            canonical_form(X + X.transpose(0, 2, 1))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.integers(1, 4))
def test_inequality_and_criteria_agree(seed, m, p):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1, 1, (p, m, m))
    rep = report_from_operators(np.zeros(m), X + X.transpose(0, 2, 1))
    assert rep.deficit >= -1e-8 * deficit_scale(rep.s, rep.s_perp, rep.H2)
    assert rep.is_equality == commutator_equality(rep.commutator_lhs, rep.commutator_rhs)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_equality_detected_on_normal_forms(seed):
    rng = np.random.default_rng(seed)
    ops = _conjugate(rng, normal_form_operators(3, 4, tuple(rng.uniform(-1, 1, 3)), rng.uniform(0.05, 1)))
    rep = report_from_operators(np.zeros(3), ops)
    assert rep.is_equality and rep.canonical is not None


def test_scan_examples(cylinder_z2, graph3):
    _, s = wintgen_scan(cylinder_z2, cylinder_z2.grid([5, 5, 5]), workers=1)
    assert s.wintgen_ideal_on_grid and s.errors == 0
    _, s = wintgen_scan(graph3, graph3.grid([4, 4, 4]), workers=1)
    assert not s.wintgen_ideal_on_grid and s.min_deficit > 0
    flat = ImmersionSpec.create(["u", "v", "w"], ["u", "v", "w", "0"])
    reps, s = wintgen_scan(flat, flat.grid([3, 3, 3]), workers=1)
    assert s.wintgen_ideal_on_grid and not s.umbilic_free and all(r.is_umbilic for r in reps)


def test_scan_errors_are_recorded():
    spec = ImmersionSpec.create(["u", "v"], ["u", "v", "sqrt(u)"], [(-1, 1), (-1, 1)])
    reps, s = wintgen_scan(spec, spec.grid([3, 3]), workers=1)
    assert s.errors == 6 and s.evaluated == 3
    assert all("DomainError" in r.error for r in reps if not r.ok)


def test_parallel_scan_matches_sequential(monkeypatch, cylinder_z2):
    import wintgen.ddvv as ddvv

    monkeypatch.setattr(ddvv, "PARALLEL_THRESHOLD", 10)
    grid = cylinder_z2.grid([3, 3, 3])
    seq, _ = wintgen_scan(cylinder_z2, grid, workers=1)
    par, _ = wintgen_scan(cylinder_z2, grid, workers=2)
    assert [r.point for r in seq] == [r.point for r in par]
    assert [r.deficit for r in seq] == [r.deficit for r in par]


def test_worker_cap(monkeypatch):
    from wintgen.ddvv import worker_count

    monkeypatch.setenv("WINTGEN_THREADS", "1")
    assert worker_count() == 1


@pytest.mark.parametrize("k", [0.5, 2.0, 10.0])
def test_equality_flag_scale_invariant(k, rng):
    for spec in (C.build("cone", C.catalog("veronese"), 0), random_graph_immersion(rng, 3, 2)):
        scaled = C.apply_transform(spec, C.MoebiusTransform.scaling(k))
        x = np.array([d[0] + 0.4 * (d[1] - d[0]) for d in spec.domain])
        a = ddvv_report(point_geometry(spec, x))
        b = ddvv_report(point_geometry(scaled, x))
        assert a.is_equality == b.is_equality


def test_ellipse_examples():
    cl = C.catalog("clifford_torus").spec
    e = curvature_ellipse(point_geometry(cl, [0.3, 0.4]))
    assert not e.is_circle and e.semi_axes[1] == pytest.approx(0.0, abs=1e-12)
    s2 = ImmersionSpec.create(["u", "v"], ["cos(u)*cos(v)", "cos(u)*sin(v)", "sin(u)"])
    e = curvature_ellipse(point_geometry(s2, [0.3, 0.4]))
    assert e.degenerate and not e.is_circle
    ver = C.catalog("veronese").spec
    assert curvature_ellipse(point_geometry(ver, [1.0, 0.2])).is_circle
    with pytest.raises(NotASurface):
        curvature_ellipse(point_geometry(random_graph_immersion(np.random.default_rng(0)), [0.1, 0.1, 0.1]))
