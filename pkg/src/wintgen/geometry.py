"""Euclidean submanifold invariants of a parametric immersion at a point.

Conventions used throughout the package:

* The tangent frame e_1..e_m is Gram-Schmidt of the coordinate vectors
  df(d/dx_1), ..., df(d/dx_m) in index order; ``T`` is the lower-triangular
  change of basis with e_a = sum_i T[a, i] df(d/dx_i).
* The normal frame is Gram-Schmidt of the standard basis of R^n (in index
  order) against the tangent space, skipping candidates whose residual norm
  is below 1e-6.
* h[r, a, b] = <d^2 f(e_a, e_b), n_r>, H^r = tr(h[r]) / m.
* R[i, j, k, l] = sum_r h_ik h_jl - h_il h_jk, so R[i, j, i, j] is the
  sectional curvature of the (e_i, e_j) plane.
* Rperp[i, j, r, s] = ([A_r, A_s])_ij with A_r = h[r].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateImmersion, DomainError, WintgenError
from .immersion import ImmersionSpec

DEGENERACY_RATIO = 1e-8
NORMAL_SEED_THRESHOLD = 1e-6
UMBILIC_TOL = 1e-10


@dataclass(frozen=True)
class PointGeometry:
    point: np.ndarray
    position: np.ndarray
    jacobian: np.ndarray  # (m, n): rows are df(d/dx_i)
    hessian: np.ndarray  # (m, m, n)
    tangent_change: np.ndarray  # T, (m, m)
    tangent_frame: np.ndarray  # (m, n)
    normal_frame: np.ndarray  # (p, n)
    metric: np.ndarray  # induced metric in coordinates
    h: np.ndarray  # (p, m, m)
    H: np.ndarray  # (p,)
    R: np.ndarray  # (m, m, m, m)
    Rperp: np.ndarray  # (m, m, p, p)

    @property
    def m(self) -> int:
        return self.jacobian.shape[0]

    @property
    def p(self) -> int:
        return self.normal_frame.shape[0]

    @property
    def shape_operators(self) -> np.ndarray:
        return self.h

    @property
    def traceless(self) -> np.ndarray:
        return self.h - self.H[:, None, None] * np.eye(self.m)

    @property
    def mean_curvature_vector(self) -> np.ndarray:
        return self.H @ self.normal_frame

    @property
    def is_umbilic(self) -> bool:
        return is_umbilic(self.h)

    def second_fundamental_form_coords(self) -> np.ndarray:
        """Coordinate components <d_i d_j f, n_r>, shape (p, m, m)."""
        return np.einsum("ijk,rk->rij", self.hessian, self.normal_frame)


def is_umbilic(h: np.ndarray, tol: float = UMBILIC_TOL) -> bool:
    """True when ||II - (tr II / m) I|| < tol * (1 + ||II||) (Frobenius over all normals)."""
    m = h.shape[-1]
    traceless = h - (np.trace(h, axis1=-2, axis2=-1) / m)[:, None, None] * np.eye(m)
    return bool(np.linalg.norm(traceless) < tol * (1.0 + np.linalg.norm(h)))


def tangent_frame(jacobian: np.ndarray):
    """(T, e) with e = T @ jacobian orthonormal; raises DegenerateImmersion on rank loss."""
    sv = np.linalg.svd(jacobian, compute_uv=False)
    if sv[-1] < DEGENERACY_RATIO * sv[0]:
        raise DegenerateImmersion(f"Jacobian singular values {sv.tolist()}")
    metric = jacobian @ jacobian.T
    L = np.linalg.cholesky(metric)
    T = np.linalg.inv(L)
    return T, T @ jacobian


def normal_frame(tangent: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal complement of the rows of ``tangent``."""
    m, n = tangent.shape
    basis = [row for row in tangent]
    normals = []
    for k in range(n):
        v = np.zeros(n)
        v[k] = 1.0
        for _ in range(2):  # re-orthogonalise once for accuracy
            for b in basis:
                v = v - (v @ b) * b
        norm = np.linalg.norm(v)
        if norm < NORMAL_SEED_THRESHOLD:
            continue
        v = v / norm
        basis.append(v)
        normals.append(v)
        if len(normals) == n - m:
            break
    return np.array(normals).reshape(n - m, n)


def geometry_from_derivatives(point, position, jacobian, hessian) -> PointGeometry:
    T, e = tangent_frame(jacobian)
    nf = normal_frame(e)
    m = jacobian.shape[0]
    hess_frame = np.einsum("ai,bj,ijk->abk", T, T, hessian)
    h = np.einsum("abk,rk->rab", hess_frame, nf)
    h = 0.5 * (h + np.swapaxes(h, 1, 2))
    H = np.trace(h, axis1=1, axis2=2) / m
    R = np.einsum("rik,rjl->ijkl", h, h) - np.einsum("ril,rjk->ijkl", h, h)
    comm = np.einsum("rik,skj->ijrs", h, h)
    Rperp = comm - np.einsum("sik,rkj->ijrs", h, h)
    return PointGeometry(
        point=np.asarray(point, dtype=float),
        position=np.asarray(position, dtype=float),
        jacobian=jacobian,
        hessian=hessian,
        tangent_change=T,
        tangent_frame=e,
        normal_frame=nf,
        metric=jacobian @ jacobian.T,
        h=h,
        H=H,
        R=R,
        Rperp=Rperp,
    )


def _from_jet(spec: ImmersionSpec, x, jet) -> PointGeometry:
    alg = spec.algebra(2)
    position = alg.values(jet)
    jac = alg.first(jet).T
    hess = np.moveaxis(alg.second(jet), 0, -1)
    return geometry_from_derivatives(x, position, jac, hess)


def point_geometry(spec: ImmersionSpec, x) -> PointGeometry:
    """Frames, fundamental forms and curvature tensors from order-2 jets at ``x``."""
    x = np.asarray(x, dtype=float)
    return _from_jet(spec, x, spec.jets(x, 2))


def point_geometries(spec: ImmersionSpec, points) -> list:
    """Batch version: one PointGeometry or WintgenError instance per point."""
    points = np.asarray(points, dtype=float).reshape(-1, spec.m)
    try:
        jets = spec.jets(points, 2)
    except DomainError:
        jets = None
    out = []
    for k, x in enumerate(points):
        try:
            jet = jets[k] if jets is not None else spec.jets(x, 2)
            out.append(_from_jet(spec, x, jet))
        except WintgenError as exc:
            out.append(exc)
    return out


def scalar_curvatures(g: PointGeometry, c: float = 0.0):
    """(s, s_perp, H2) at a point.

    ``c`` is the curvature of the ambient space form the shape operators are
    read in; it enters s through the space-form Gauss equation
    (s = c + flat part). The engine's own immersions are Euclidean (c = 0).
    """
    m = g.m
    if m < 2:
        raise ValueError("scalar curvature needs m >= 2")
    norm = 2.0 / (m * (m - 1))
    iu, ju = np.triu_indices(m, 1)
    s = norm * float(np.sum(g.R[iu, ju, iu, ju])) + c
    ru, su = np.triu_indices(g.p, 1)
    rperp_sq = float(np.sum(g.Rperp[iu, ju][:, ru, su] ** 2))
    s_perp = norm * np.sqrt(rperp_sq)
    H2 = float(np.sum(g.H**2))
    return s, float(s_perp), H2


def fundamental_forms(spec: ImmersionSpec, x, normals) -> tuple:
    """Coordinate first fundamental form and second fundamental forms along given normals.

    ``normals`` is (k, n); returns (I, II) with II of shape (k, m, m).
    """
    g = point_geometry(spec, x)
    normals = np.atleast_2d(np.asarray(normals, dtype=float))
    II = np.einsum("ijk,rk->rij", g.hessian, normals)
    return g.metric, II


# ---------------------------------------------------------------------------
# intrinsic curvature from a metric


def christoffel(metric, dmetric):
    """Gamma[e, a, b] from g and dg[c, a, b] = d_c g_ab."""
    ginv = np.linalg.inv(metric)
    # Gamma_{l,ab} = (d_a g_bl + d_b g_al - d_l g_ab) / 2
    lower = 0.5 * (dmetric + np.einsum("bal->abl", dmetric) - np.einsum("lab->abl", dmetric))
    return np.einsum("el,abl->eab", ginv, lower)


def riemann_coords(metric, gamma, dgamma):
    """Rm[a, b, c, d] = <R(d_a, d_b) d_c, d_d> from Gamma and dGamma[a, e, b, c] = d_a Gamma^e_bc."""
    Rup = (
        np.einsum("aebc->ecab", dgamma)
        - np.einsum("beac->ecab", dgamma)
        + np.einsum("eaf,fbc->ecab", gamma, gamma)
        - np.einsum("ebf,fac->ecab", gamma, gamma)
    )
    return np.einsum("de,ecab->abcd", metric, Rup)


def frame_riemann(Rm, T):
    """R[i, j, k, l] = Rm(E_i, E_j, E_l, E_k) for the frame E_a = sum_i T[a, i] d_i."""
    return np.einsum("ia,jb,lc,kd,abcd->ijkl", T, T, T, T, Rm)


def _metric_and_derivative(spec, x):
    jet = spec.jets(x, 2)
    alg = spec.algebra(2)
    J = alg.first(jet).T  # (m, n)
    hess = np.moveaxis(alg.second(jet), 0, -1)  # (m, m, n)
    metric = J @ J.T
    dmetric = np.einsum("cak,bk->cab", hess, J) + np.einsum("ak,cbk->cab", J, hess)
    return metric, dmetric


def intrinsic_curvature_crosscheck(spec: ImmersionSpec, x, h: float = 1e-3) -> float:
    """max |R_intrinsic - R_gauss| over all frame components.

    The intrinsic tensor comes from the induced metric: g and dg are exact
    (order-2 jets) at each stencil point, dGamma is a central difference.
    """
    x = np.asarray(x, dtype=float)
    spec.check_stencil(x, h)
    m = spec.m
    metric, dmetric = _metric_and_derivative(spec, x)
    gamma = christoffel(metric, dmetric)
    dgamma = np.empty((m,) + gamma.shape)
    for a in range(m):
        step = np.zeros(m)
        step[a] = h
        gp = christoffel(*_metric_and_derivative(spec, x + step))
        gm = christoffel(*_metric_and_derivative(spec, x - step))
        dgamma[a] = (gp - gm) / (2 * h)
    Rm = riemann_coords(metric, gamma, dgamma)
    g = point_geometry(spec, x)
    R_int = frame_riemann(Rm, g.tangent_change)
    return float(np.max(np.abs(R_int - g.R)))
