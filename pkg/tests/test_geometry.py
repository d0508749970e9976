import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wintgen.errors import DegenerateImmersion
from wintgen.fuzz import random_graph_immersion
from wintgen.geometry import intrinsic_curvature_crosscheck, point_geometry, scalar_curvatures
from wintgen.immersion import ImmersionSpec, reparametrize

PLANE = ImmersionSpec.create(["u", "v"], ["u", "v", "0"])
GRAPH = ImmersionSpec.create(["u", "v"], ["u", "v", "u^2+v^2", "0"])
S2 = ImmersionSpec.create(["u", "v"], ["cos(u)*cos(v)", "cos(u)*sin(v)", "sin(u)"])


def test_unit_sphere_scalars(sphere3):
    g = point_geometry(sphere3, [0.3, 0.2, 0.1])
    s, s_perp, H2 = scalar_curvatures(g)
    assert s == pytest.approx(1.0, abs=1e-12)
    assert s_perp == pytest.approx(0.0, abs=1e-12)
    assert H2 == pytest.approx(1.0, abs=1e-12)
    assert g.is_umbilic


def test_ambient_curvature_shifts_s():
    g = point_geometry(GRAPH, [0.2, 0.1])
    s0, _, _ = scalar_curvatures(g, 0.0)
    s1, _, _ = scalar_curvatures(g, 1.0)
    assert s1 - s0 == pytest.approx(1.0)


def test_frames_orthonormal_and_h_symmetric(rng):
    spec = random_graph_immersion(rng, 3, 3)
    g = point_geometry(spec, rng.uniform(-0.5, 0.5, 3))
    F = np.vstack([g.tangent_frame, g.normal_frame])
    np.testing.assert_allclose(F @ F.T, np.eye(6), atol=1e-12)
    np.testing.assert_allclose(g.h, np.swapaxes(g.h, 1, 2), atol=1e-12)


def test_riemann_symmetries(rng):
    spec = random_graph_immersion(rng, 3, 2)
    R = point_geometry(spec, rng.uniform(-0.5, 0.5, 3)).R
    np.testing.assert_allclose(R, -R.transpose(1, 0, 2, 3), atol=1e-12)
    np.testing.assert_allclose(R, -R.transpose(0, 1, 3, 2), atol=1e-12)
    np.testing.assert_allclose(R, R.transpose(2, 3, 0, 1), atol=1e-12)


@pytest.mark.parametrize("spec, x, bound", [(PLANE, [0.1, 0.2], 1e-12), (S2, [0.3, 0.4], 1e-5), (GRAPH, [0.3, -0.2], 1e-5)])
def test_intrinsic_crosscheck(spec, x, bound):
    assert intrinsic_curvature_crosscheck(spec, x, 1e-3) <= bound


def test_degenerate_immersion():
    spec = ImmersionSpec.create(["u", "v"], ["u", "u", "u^2"])
    with pytest.raises(DegenerateImmersion):
        point_geometry(spec, [0.1, 0.2])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_normal_gauge_invariance(seed):
    rng = np.random.default_rng(seed)
    from wintgen.ddvv import shape_operator_invariants

    spec = random_graph_immersion(rng, 3, 3)
    g = point_geometry(spec, rng.uniform(-0.5, 0.5, 3))
    Q = np.linalg.qr(rng.normal(size=(3, 3)))[0]
    a = shape_operator_invariants(g.h)
    b = shape_operator_invariants(np.einsum("rs,sij->rij", Q, g.h))
    np.testing.assert_allclose(a, b, atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_affine_reparametrization_invariance(seed):
    rng = np.random.default_rng(seed)
    spec = random_graph_immersion(rng, 3, 2)
    M = np.eye(3) + 0.3 * rng.uniform(-1, 1, (3, 3))
    b = rng.uniform(-0.2, 0.2, 3)
    names = spec.variables
    mapping = {
        names[i]: " + ".join(f"({float(M[i, j])!r})*{names[j]}" for j in range(3)) + f" + ({float(b[i])!r})" for i in range(3)
    }
    re = reparametrize(spec, mapping)
    y = rng.uniform(-0.3, 0.3, 3)
    x = M @ y + b
    a = scalar_curvatures(point_geometry(spec, x))
    c = scalar_curvatures(point_geometry(re, y))
    np.testing.assert_allclose(a, c, rtol=1e-8, atol=1e-8)
