"""Moebius invariants of an umbilic-free immersion f: U -> R^{m+p}.

Pointwise ("local") quantities are jet-exact from order-4 jets of f:
rho, the lift Y as an order-2 jet, the Moebius metric g = rho^2 I, its
Laplacian of Y, N, the frame Y_i = E_i(Y), the mean curvature spheres xi_r,
B from its closed form and the curvature tensor of g.

Everything that involves derivatives of N, Y_i or xi_r (A, C, a second route
for B, the connection forms, covariant derivatives) is obtained by central
differences of those jet-exact fields, so those quantities carry an
O(step^2) truncation error. Frame components always refer to the
g-orthonormal frame E_a = sum_i T[a, i] d/dx_i obtained by Gram-Schmidt of
the coordinate vectors with respect to g.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .ddvv import canonical_form, normal_form_operators
from .errors import (
    DimensionMismatch,
    GaugeAlignmentFailure,
    NotEquality,
    UmbilicPoint,
)
from .geometry import (
    PointGeometry,
    geometry_from_derivatives,
    frame_riemann,
    is_umbilic,
    point_geometry,
    riemann_coords,
)
from .immersion import ImmersionSpec
from .jets import algebra

JET_ORDER = 4
DEFAULT_FD_STEP = 1e-3
TOL_EXACT = 1e-8
TOL_FD_CONSTANT = 10.0


def lorentz_inner(Y, Z):
    """<Y, Z> = -Y_0 Z_0 + sum_k Y_k Z_k (broadcasts over leading axes)."""
    Y = np.asarray(Y, dtype=float)
    Z = np.asarray(Z, dtype=float)
    if Y.shape[-1] != Z.shape[-1]:
        raise DimensionMismatch(f"Lorentz vectors of length {Y.shape[-1]} and {Z.shape[-1]}")
    return -Y[..., 0] * Z[..., 0] + np.sum(Y[..., 1:] * Z[..., 1:], axis=-1)


def lorentz_gram(rows_a, rows_b=None):
    rows_b = rows_a if rows_b is None else rows_b
    a = np.array(rows_a, dtype=float)
    b = np.array(rows_b, dtype=float)
    a[..., 0] = -a[..., 0]
    return a @ b.T


def light_cone_point(f):
    """((1 + |f|^2) / 2, (1 - |f|^2) / 2, f)."""
    f = np.asarray(f, dtype=float)
    q = float(f @ f)
    return np.concatenate([[(1 + q) / 2, (1 - q) / 2], f])


def moebius_factor(g: PointGeometry) -> float:
    """rho = sqrt(m/(m-1) |II - tr(II)/m I|^2); raises UmbilicPoint when it vanishes."""
    if is_umbilic(g.h):
        raise UmbilicPoint(f"umbilic point at {g.point.tolist()}")
    m = g.m
    return math.sqrt(m / (m - 1) * float(np.sum(g.traceless**2)))


def mean_curvature_spheres(g: PointGeometry, rho: Optional[float] = None) -> np.ndarray:
    """xi_r = H^r X(f) + (f.n_r, -f.n_r, n_r), one row per normal."""
    X = light_cone_point(g.position)
    fn = g.normal_frame @ g.position
    rows = [g.H[r] * X + np.concatenate([[fn[r], -fn[r]], g.normal_frame[r]]) for r in range(g.p)]
    return np.array(rows).reshape(g.p, len(X))


# ---------------------------------------------------------------------------
# jet-exact local data


@dataclass(frozen=True)
class LocalData:
    point: np.ndarray
    geometry: PointGeometry
    rho: float
    X: np.ndarray
    Y: np.ndarray
    dY: np.ndarray  # (m, n+2): coordinate derivatives of Y
    metric: np.ndarray  # Moebius metric g in coordinates
    T: np.ndarray  # E_a = sum_i T[a, i] d_i
    Yi: np.ndarray  # (m, n+2)
    laplace_Y: np.ndarray
    N: np.ndarray
    xi: np.ndarray  # (p, n+2)
    B: np.ndarray  # (p, m, m), closed form
    R: np.ndarray  # curvature tensor of g in the frame E


def _rho_squared_jet(alg2, F, dF, ddF, m):
    """rho^2 as an order-2 jet from f's jet arrays (coordinate-invariant formula)."""
    J = alg2.truncate(dF, 2).swapaxes(0, 1)  # (m, n, S)
    D2 = alg2.truncate(ddF, 2).transpose(1, 2, 0, 3)  # (m, m, n, S)
    G = alg2.dot(J[:, None], J[None, :])  # (m, m, S)
    Ginv = alg2.inv_matrix(G)
    c = alg2.dot(D2[:, :, None], J[None, None])  # (m, m, m, S): <d_ab f, d_c f>
    q = np.sum(alg2.mul(Ginv[None, None], c[:, :, None, :]), axis=3)  # (m, m, d, S)
    II = D2 - np.sum(alg2.mul(q[:, :, :, None, :], J[None, None]), axis=2)  # (m, m, n, S)
    P = alg2.dot(II[:, :, None, None], II[None, None])  # (a, b, c, d, S)
    t1 = np.sum(alg2.mul(Ginv[:, None, :, None], P), axis=(0, 2))  # g^{ac} P_abcd -> (b, d)
    norm2 = np.sum(alg2.mul(Ginv, t1), axis=(0, 1))
    trII = np.sum(alg2.mul(Ginv[:, :, None], II), axis=(0, 1))  # (n, S)
    tr2 = alg2.dot(trII, trII)
    return (m / (m - 1)) * (norm2 - tr2 / m), G


def _christoffel_jets(alg, g):
    """Gamma[e, a, b] as an order-(K-1) jet array from a jet metric of order K."""
    low = alg.lower
    dg = np.moveaxis(alg.gradient(g), 2, 0)  # (c, a, b, S): d_c g_ab
    ginv = low.inv_matrix(low.truncate(g, low.order))
    lower = 0.5 * (dg + np.einsum("bal...->abl...", dg) - np.einsum("lab...->abl...", dg))  # [a,b,l]
    return np.sum(low.mul(ginv[:, None, None, :, :], lower[None]), axis=3)  # (e, a, b, S)


def local_data(spec: ImmersionSpec, x, order: int = JET_ORDER) -> LocalData:
    x = np.asarray(x, dtype=float)
    m, n = spec.m, spec.n
    if m < 2:
        raise DimensionMismatch("Moebius geometry needs m >= 2")
    if order < JET_ORDER:
        raise DimensionMismatch(f"Moebius data needs jets of order >= {JET_ORDER}")
    F = spec.jets(x, order)
    a4 = algebra(m, order)
    a3, a2 = a4.lower, algebra(m, 2)
    dF = a4.gradient(F)  # (n, m, S3)
    ddF = a3.gradient(dF)  # (n, m, m, S2)

    geom = geometry_from_derivatives(
        x, F[:, 0], dF[:, :, 0].T, np.moveaxis(ddF[..., 0], 0, -1)
    )
    rho = moebius_factor(geom)

    rho2, G = _rho_squared_jet(a2, F, dF, ddF, m)
    rho_j = a2.sqrt(rho2)
    F2 = a2.truncate(F, 2)
    q = a2.dot(F2, F2)
    one = a2.constant(1.0)
    Xj = np.concatenate([((one + q) / 2)[None], ((one - q) / 2)[None], F2], axis=0)
    Yj = a2.mul(rho_j[None], Xj)  # (n+2, S2)
    gj = a2.mul(rho2[None, None], G)  # Moebius metric as order-2 jet

    Y = Yj[:, 0]
    dY = a2.first(Yj).T  # (m, n+2)
    d2Y = np.moveaxis(a2.second(Yj), 0, -1)  # (m, m, n+2)
    metric = gj[..., 0]
    gamma_j = _christoffel_jets(a2, gj)  # order 1
    gamma = gamma_j[..., 0]
    dgamma = np.moveaxis(algebra(m, 1).first(gamma_j), -1, 0)  # (a, e, b, c)
    ginv = np.linalg.inv(metric)
    lap = np.einsum("ij,ijk->k", ginv, d2Y - np.einsum("kij,kl->ijl", gamma, dY))
    N = -lap / m - lorentz_inner(lap, lap) / (2 * m * m) * Y

    T = np.linalg.inv(np.linalg.cholesky(metric))
    Yi = T @ dY
    xi = mean_curvature_spheres(geom, rho)
    B = geom.traceless / rho
    R = frame_riemann(riemann_coords(metric, gamma, dgamma), T)
    return LocalData(x, geom, rho, Xj[:, 0], Y, dY, metric, T, Yi, lap, N, xi, B, R)


def moebius_lift(spec: ImmersionSpec, x):
    """(Y, g) at x: the Moebius position vector and the Moebius metric in coordinates."""
    d = local_data(spec, x)
    return d.Y, d.metric


def frame_gram_residual(d: LocalData) -> float:
    """Largest deviation of the Lorentz Gram matrix of {Y, N, Y_i, xi_r} from its model."""
    m, p = d.Yi.shape[0], d.xi.shape[0]
    rows = np.vstack([d.Y, d.N, d.Yi, d.xi])
    G = lorentz_gram(rows)
    model = np.zeros_like(G)
    model[0, 1] = model[1, 0] = 1.0
    model[2:, 2:] = np.eye(m + p)
    return float(np.max(np.abs(G - model)))


# ---------------------------------------------------------------------------
# finite-difference layer


class _Stencil:
    """Caches local data on the lattice x + h * a, a integer offsets."""

    def __init__(self, spec, x, h, order=JET_ORDER):
        self.spec = spec
        self.x = np.asarray(x, dtype=float)
        self.h = float(h)
        self.m = spec.m
        self.order = order
        self._cache = {}

    def local(self, offset) -> LocalData:
        key = tuple(int(v) for v in offset)
        if key not in self._cache:
            self._cache[key] = local_data(self.spec, self.x + self.h * np.array(key, dtype=float), self.order)
        return self._cache[key]

    def unit(self, a):
        e = np.zeros(self.m, dtype=int)
        e[a] = 1
        return e

    def coord_derivative(self, offset, fieldfn):
        """Central differences d_a of fieldfn(local) at ``offset``; stacked over a."""
        out = []
        base = np.array(offset, dtype=int)
        for a in range(self.m):
            u = self.unit(a)
            plus = fieldfn(self.local(base + u))
            minus = fieldfn(self.local(base - u))
            out.append((plus - minus) / (2 * self.h))
        return np.array(out)


@dataclass(frozen=True)
class FirstOrder:
    """Frame data that needs one derivative of local fields."""

    A: np.ndarray  # (m, m)
    C: np.ndarray  # (p, m)
    B_fd: np.ndarray  # (p, m, m)
    omega: np.ndarray  # omega[i, j, k] = omega_ij(E_k)
    theta: np.ndarray  # theta[r, s, k] = theta_rs(E_k)
    theta_coords: np.ndarray  # theta[r, s, a] = theta_rs(d_a)


def _first_order(st: _Stencil, offset) -> FirstOrder:
    d = st.local(offset)
    T = d.T
    dYi = st.coord_derivative(offset, lambda L: L.Yi)  # (a, i, V)
    dN = st.coord_derivative(offset, lambda L: L.N)  # (a, V)
    dxi = st.coord_derivative(offset, lambda L: L.xi)  # (a, r, V)
    EYi = np.einsum("ka,aiv->ikv", T, dYi)  # E_k(Y_i) stored [i, k]
    EN = T @ dN  # (k, V)
    Exi = np.einsum("ka,arv->rkv", T, dxi)  # E_k(xi_r) stored [r, k]

    A = -lorentz_inner(EYi, d.N[None, None])  # A[i, j] = -<E_j(Y_i), N>
    B_fd = np.einsum("ijr->rij", lorentz_inner(EYi[:, :, None, :], d.xi[None, None]))
    omega = lorentz_inner(EYi[:, :, None, :], d.Yi[None, None]).transpose(0, 2, 1)  # [i, j, k]
    C = lorentz_inner(EN[None], d.xi[:, None]).reshape(d.xi.shape[0], -1)  # C[r, i] = <E_i(N), xi_r>
    theta = lorentz_inner(Exi[:, :, None, :], d.xi[None, None]).transpose(0, 2, 1)  # [r, s, k]
    theta_c = lorentz_inner(np.swapaxes(dxi, 0, 1)[:, :, None, :], d.xi[None, None]).transpose(0, 2, 1)
    return FirstOrder(A, C, B_fd, omega, theta, theta_c)


@dataclass(frozen=True)
class MoebiusFrame:
    point: np.ndarray
    rho: float
    Y: np.ndarray
    N: np.ndarray
    Yi: np.ndarray
    xi: np.ndarray
    E: np.ndarray  # rows: E_a in coordinates
    g: np.ndarray
    A: np.ndarray
    B: np.ndarray  # closed form
    B_fd: np.ndarray  # structure-equation route
    C: np.ndarray
    kappa: float
    R: np.ndarray
    fd_step: float
    residuals: dict = field(default_factory=dict)

    @property
    def trace_A(self) -> float:
        return float(np.trace(self.A))


def moebius_frame(spec: ImmersionSpec, x, fd_step: float = DEFAULT_FD_STEP, order: int = JET_ORDER) -> MoebiusFrame:
    x = np.asarray(x, dtype=float)
    spec.check_stencil(x, fd_step)
    st = _Stencil(spec, x, fd_step, order)
    zero = np.zeros(spec.m, dtype=int)
    d = st.local(zero)
    fo = _first_order(st, zero)
    return _assemble_frame(d, fo, fd_step)


def _assemble_frame(d: LocalData, fo: FirstOrder, h: float) -> MoebiusFrame:
    m = d.T.shape[0]
    kappa = float(np.einsum("ijij->", d.R)) / (m * (m - 1))
    B = d.B
    res = {
        "frame_gram": frame_gram_residual(d),
        "B_trace": float(np.max(np.abs(np.trace(B, axis1=1, axis2=2)))),
        "B_norm": abs(float(np.sum(B**2)) - (m - 1) / m),
        "A_trace": abs(float(np.trace(fo.A)) - (1 + m * m * kappa) / (2 * m)),
        "B_routes": float(np.max(np.abs(B - fo.B_fd))),
        "A_symmetry": float(np.max(np.abs(fo.A - fo.A.T))),
    }
    return MoebiusFrame(
        point=d.point,
        rho=d.rho,
        Y=d.Y,
        N=d.N,
        Yi=d.Yi,
        xi=d.xi,
        E=d.T,
        g=d.metric,
        A=fo.A,
        B=B,
        B_fd=fo.B_fd,
        C=fo.C,
        kappa=kappa,
        R=d.R,
        fd_step=h,
        residuals=res,
    )


def tol_fd(step: float, constant: float = TOL_FD_CONSTANT) -> float:
    return constant * step * step


# ---------------------------------------------------------------------------
# integrability conditions


def integrability_residuals(spec: ImmersionSpec, x, fd_step: float = DEFAULT_FD_STEP, order: int = JET_ORDER) -> dict:
    """Max-norm residuals of the Moebius integrability conditions at x.

    Keys: codazzi_A, ricci_C, codazzi_B, gauss, ricci_normal, ricci_contraction.
    """
    x = np.asarray(x, dtype=float)
    spec.check_stencil(x, 2 * fd_step)
    st = _Stencil(spec, x, fd_step, order)
    m, p = spec.m, spec.p
    zero = np.zeros(m, dtype=int)
    d = st.local(zero)
    fo = _first_order(st, zero)
    first = {}

    def fo_at(offset):
        key = tuple(offset)
        if key not in first:
            first[key] = _first_order(st, np.array(offset))
        return first[key]

    def deriv(fieldfn):
        out = []
        for a in range(m):
            u = st.unit(a)
            out.append((fieldfn(fo_at(tuple(u)), u) - fieldfn(fo_at(tuple(-u)), -u)) / (2 * fd_step))
        return np.moveaxis(np.tensordot(d.T, np.array(out), axes=(1, 0)), 0, -1)

    A, C, B = fo.A, fo.C, d.B
    om, th = fo.omega, fo.theta
    I = np.eye(m)

    # covariant derivatives, last index = direction
    dA = deriv(lambda f, u: f.A)  # [i, j, k]
    A_cov = dA + np.einsum("il,ljk->ijk", A, om) + np.einsum("lj,lik->ijk", A, om)
    dB = deriv(lambda f, u: st.local(u).B)  # [r, i, j, k]
    B_cov = (
        dB
        + np.einsum("ril,ljk->rijk", B, om)
        + np.einsum("rlj,lik->rijk", B, om)
        + np.einsum("sij,srk->rijk", B, th)
    )
    dC = deriv(lambda f, u: f.C)  # [r, i, j]
    C_cov = dC + np.einsum("rk,kij->rij", C, om) + np.einsum("si,srj->rij", C, th)

    codazzi_A = (
        A_cov
        - np.swapaxes(A_cov, 1, 2)
        - (np.einsum("rik,rj->ijk", B, C) - np.einsum("rij,rk->ijk", B, C))
    )
    ricci_C = C_cov - np.swapaxes(C_cov, 1, 2) - (np.einsum("rik,kj->rij", B, A) - np.einsum("rjk,ki->rij", B, A))
    codazzi_B = B_cov - np.swapaxes(B_cov, 2, 3) - (
        np.einsum("ij,rk->rijk", I, C) - np.einsum("ik,rj->rijk", I, C)
    )
    gauss_model = (
        np.einsum("rik,rjl->ijkl", B, B)
        - np.einsum("ril,rjk->ijkl", B, B)
        + np.einsum("ik,jl->ijkl", I, A)
        + np.einsum("jl,ik->ijkl", I, A)
        - np.einsum("il,jk->ijkl", I, A)
        - np.einsum("jk,il->ijkl", I, A)
    )
    gauss = d.R - gauss_model
    ricci = np.einsum("ikjk->ij", d.R)
    ricci_model = -np.einsum("rik,rkj->ij", B, B) + np.trace(A) * I + (m - 2) * A
    ricci_contraction = ricci - ricci_model

    # normal curvature from the coordinate connection forms
    dth = []
    for a in range(m):
        u = st.unit(a)
        dth.append((fo_at(tuple(u)).theta_coords - fo_at(tuple(-u)).theta_coords) / (2 * fd_step))
    dth = np.array(dth)  # [a, r, s, b] = d_a theta_rs(d_b)
    tc = fo.theta_coords
    dtheta = np.einsum("arsb->rsab", dth) - np.einsum("brsa->rsab", dth)
    wedge = np.einsum("rta,tsb->rsab", tc, tc) - np.einsum("rtb,tsa->rsab", tc, tc)
    omega_curv = np.einsum("ka,lb,rsab->rskl", d.T, d.T, dtheta - wedge)
    rperp_model = np.einsum("rkj,sjl->rskl", B, B) - np.einsum("skj,rjl->rskl", B, B)
    ricci_normal = -omega_curv - rperp_model

    def mx(a):
        return float(np.max(np.abs(a))) if a.size else 0.0

    return {
        "codazzi_A": mx(codazzi_A),
        "ricci_C": mx(ricci_C),
        "codazzi_B": mx(codazzi_B),
        "gauss": mx(gauss),
        "ricci_normal": mx(ricci_normal),
        "ricci_contraction": mx(ricci_contraction),
    }


# ---------------------------------------------------------------------------
# canonical form of B and the distribution D


def moebius_mu(m: int) -> float:
    return math.sqrt((m - 1) / (4 * m))


@dataclass(frozen=True)
class CanonicalMoebiusCheck:
    mu_measured: float
    mu_expected: float
    residual_to_model: float
    tangent_basis: np.ndarray
    normal_basis: np.ndarray


def canonical_moebius_form_check(spec: ImmersionSpec, x, tol: float = TOL_EXACT) -> CanonicalMoebiusCheck:
    """Canonical form of the closed-form B; raises NotEquality off the ideal locus."""
    g = point_geometry(spec, x)
    rho = moebius_factor(g)
    B = g.traceless / rho
    cf = canonical_form(B, tol)
    mu = moebius_mu(g.m)
    model = normal_form_operators(g.m, g.p, (0.0, 0.0, 0.0), mu)
    residual = float(np.max(np.abs(cf.rotated(B) - model)))
    return CanonicalMoebiusCheck(cf.mu0, mu, residual, cf.tangent_basis, cf.normal_basis)


def _distribution_frame(spec, x, tol):
    """g-unit coordinate vectors (2, m) spanning D at x, plus the Moebius metric there."""
    g = point_geometry(spec, x)
    rho = moebius_factor(g)
    cf = canonical_form(g.traceless / rho, tol)
    if cf.degenerate:
        raise NotEquality("canonical distribution undefined at a point with vanishing B")
    E = g.tangent_change / rho  # rows: g-orthonormal frame in coordinates
    V = cf.tangent_basis[:, :2].T @ E
    return V, rho * rho * g.metric


def distribution_bracket_residual(spec: ImmersionSpec, x, fd_step: float = DEFAULT_FD_STEP, tol: float = TOL_EXACT) -> float:
    """g-norm of the component of [V1, V2] orthogonal to D = span(V1, V2) at x."""
    x = np.asarray(x, dtype=float)
    spec.check_stencil(x, fd_step)
    m = spec.m
    V, gx = _distribution_frame(spec, x, tol)
    dV = np.empty((m, 2, m))  # dV[a, c, b] = d_a V_c^b
    for a in range(m):
        u = np.zeros(m)
        u[a] = fd_step
        sides = []
        for sign in (1.0, -1.0):
            W, _ = _distribution_frame(spec, x + sign * u, tol)
            M = W @ gx @ V.T  # overlap in the centre metric
            U_, s, Vt = np.linalg.svd(M)
            if s[-1] < 0.5:
                raise GaugeAlignmentFailure(f"distribution planes at {x.tolist()} and neighbour do not match")
            R = (U_ @ Vt).T
            sides.append(R @ W)
        dV[a] = (sides[0] - sides[1]) / (2 * fd_step)
    bracket = np.einsum("a,ab->b", V[0], dV[:, 1]) - np.einsum("a,ab->b", V[1], dV[:, 0])
    G2 = V @ gx @ V.T
    coef = np.linalg.solve(G2, V @ gx @ bracket)
    perp = bracket - coef @ V
    return float(math.sqrt(max(perp @ gx @ perp, 0.0)))


def distribution_integrability(spec: ImmersionSpec, region, fd_step: float = DEFAULT_FD_STEP, tol: float = TOL_EXACT) -> float:
    """Max bracket residual over the points of ``region`` ((P, m) array)."""
    pts = np.asarray(region, dtype=float).reshape(-1, spec.m)
    return max(distribution_bracket_residual(spec, x, fd_step, tol) for x in pts)
