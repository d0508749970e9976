import math

import numpy as np
import pytest

from wintgen import constructions as C
from wintgen.errors import NotEquality, UmbilicPoint
from wintgen.fuzz import random_graph_immersion
from wintgen.geometry import point_geometry
from wintgen.immersion import ImmersionSpec, reparametrize
from wintgen.moebius import (
    canonical_moebius_form_check,
    distribution_bracket_residual,
    frame_gram_residual,
    integrability_residuals,
    local_data,
    lorentz_gram,
    lorentz_inner,
    mean_curvature_spheres,
    moebius_factor,
    moebius_frame,
    moebius_lift,
    moebius_mu,
)


@pytest.fixture(scope="module")
def generic():
    return random_graph_immersion(np.random.default_rng(3), 3, 2)


def test_lorentz_inner_signature():
    assert lorentz_inner(np.array([1.0, 0, 0]), np.array([1.0, 0, 0])) == -1.0
    assert lorentz_inner(np.array([0, 1.0, 0]), np.array([0, 1.0, 0])) == 1.0


def test_factor_formula(generic):
    g = point_geometry(generic, [0.1, 0.2, -0.1])
    tau2 = float(np.sum(g.traceless**2))
    assert moebius_factor(g) == pytest.approx(math.sqrt(3 * tau2 / 2), rel=1e-14)


def test_umbilic_points_rejected(sphere3):
    with pytest.raises(UmbilicPoint):
        moebius_lift(sphere3, [0.1, 0.2, 0.3])
    flat = ImmersionSpec.create(["u", "v", "w"], ["u", "v", "w", "0"])
    with pytest.raises(UmbilicPoint):
        local_data(flat, [0.1, 0.2, 0.3])


def test_lift_and_frame_gram(generic):
    d = local_data(generic, [0.1, -0.2, 0.3])
    assert lorentz_inner(d.Y, d.Y) == pytest.approx(0.0, abs=1e-12)
    assert frame_gram_residual(d) <= 1e-8
    xi = mean_curvature_spheres(d.geometry, d.rho)
    np.testing.assert_allclose(lorentz_gram(xi), np.eye(2), atol=1e-10)
    np.testing.assert_allclose(lorentz_gram(xi, d.Y[None, :]), 0.0, atol=1e-10)


def test_b_identities_and_routes(generic):
    fr = moebius_frame(generic, [0.1, -0.2, 0.3], 1e-3)
    assert fr.residuals["B_trace"] <= 1e-12
    assert fr.residuals["B_norm"] <= 1e-10
    assert fr.residuals["B_routes"] <= 1e-4
    assert fr.residuals["A_symmetry"] <= 1e-4


def test_trace_identity_converges_quadratically(generic):
    x = [0.1, -0.2, 0.3]
    r1 = moebius_frame(generic, x, 2e-3).residuals["A_trace"]
    r2 = moebius_frame(generic, x, 1e-3).residuals["A_trace"]
    assert r2 <= 10 * 1e-6
    assert 3 <= r1 / r2 <= 5


def test_b_norm_on_cone(veronese_cone):
    fr = moebius_frame(veronese_cone, [1.1, 1.2, 0.2])
    assert np.sum(fr.B**2) == pytest.approx(2 / 3, abs=1e-10)


def test_canonical_mu(veronese_cone, cylinder_z2, graph3):
    assert moebius_mu(3) == pytest.approx(1 / math.sqrt(6))
    for spec, x in ((veronese_cone, [1.1, 1.2, 0.2]), (cylinder_z2, [0.3, 0.2, 0.1])):
        chk = canonical_moebius_form_check(spec, x)
        assert chk.mu_measured == pytest.approx(chk.mu_expected, abs=1e-6)
        assert chk.residual_to_model <= 1e-8
    with pytest.raises(NotEquality):
        canonical_moebius_form_check(graph3, [0.3, 0.2, 0.1])


def test_contraction_bounded_by_gauss(cylinder_z2):
    r = integrability_residuals(cylinder_z2, [0.3, 0.2, 0.1], 5e-3)
    assert r["ricci_contraction"] <= 3 * r["gauss"] + 1e-12


def test_invariance_under_conformal_maps(generic):
    x = np.array([0.2, -0.1, 0.3])
    d0 = local_data(generic, x)
    for T in (
        C.MoebiusTransform.translation([0.3, -1.0, 0.5, 2.0, 0.1]),
        C.MoebiusTransform.scaling(10.0),
        C.MoebiusTransform.inversion([2.0, 2.0, 2.0, 2.0, 2.0]),
    ):
        d1 = local_data(C.apply_transform(generic, T), x)
        np.testing.assert_allclose(d1.metric, d0.metric, rtol=1e-6, atol=1e-6)
        assert np.sum(d1.B**2) == pytest.approx(np.sum(d0.B**2), abs=1e-6)


def test_distribution_bracket_on_coordinate_chart(cylinder_z2):
    assert distribution_bracket_residual(cylinder_z2, [0.3, 0.2, 0.1], 1e-3) <= 1e-8


def test_distribution_bracket_reparametrized(cylinder_z2):
    spec = reparametrize(cylinder_z2, {"u": "u + 0.2*s^2", "s": "s + 0.3*u*v", "v": "v + 0.1*u^2"})
    r1 = distribution_bracket_residual(spec, [0.3, 0.2, 0.1], 1e-2)
    r2 = distribution_bracket_residual(spec, [0.3, 0.2, 0.1], 5e-3)
    assert r1 <= 10 * 1e-4 and 3 <= r1 / r2 <= 5
