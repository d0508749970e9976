"""DDVV inequality, its commutator form, the equality normal form and the
curvature ellipse of a surface.

With traceless shape operators B_r = A_r - (tr A_r / m) I one has, for flat
or space-form ambient data,

    deficit = c + H2 - s_perp - s = (sqrt(rhs) - sqrt(lhs)) / (m (m - 1)),

where lhs = sum over ordered pairs ||[B_r, B_s]||^2 and
rhs = (sum_r ||B_r||^2)^2 (Frobenius norms). The two equality tests used
below are therefore the same statement measured on different scales.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, NotASurface, NotEquality, WintgenError
from .geometry import PointGeometry, is_umbilic, point_geometry, scalar_curvatures
from .immersion import ImmersionSpec

TOL_EQUALITY = 1e-8


def ddvv_deficit(s: float, s_perp: float, H2: float, c: float = 0.0) -> float:
    return c + H2 - s_perp - s


def deficit_scale(s, s_perp, H2, c=0.0) -> float:
    return 1.0 + abs(c) + H2 + abs(s) + s_perp


def is_equality(deficit, s, s_perp, H2, c=0.0, tol=TOL_EQUALITY) -> bool:
    return abs(deficit) <= tol * deficit_scale(s, s_perp, H2, c)


def _as_operators(shape_ops) -> np.ndarray:
    ops = np.asarray(shape_ops, dtype=float)
    if ops.ndim == 2:
        ops = ops[None]
    if ops.ndim != 3 or ops.shape[0] < 1 or ops.shape[1] != ops.shape[2]:
        raise DimensionMismatch(f"expected a stack of square matrices, got shape {ops.shape}")
    return ops


def traceless_parts(shape_ops):
    ops = _as_operators(shape_ops)
    m = ops.shape[1]
    lam = np.trace(ops, axis1=1, axis2=2) / m
    return lam, ops - lam[:, None, None] * np.eye(m)


def commutator_sides(shape_ops):
    """(lhs, rhs) of sum_{r,s} ||[B_r, B_s]||^2 <= (sum_r ||B_r||^2)^2."""
    _, B = traceless_parts(shape_ops)
    prod = np.einsum("rij,sjk->rsik", B, B)
    comm = prod - np.swapaxes(prod, 0, 1)
    lhs = float(np.sum(comm**2))
    rhs = float(np.sum(B**2)) ** 2
    return lhs, rhs


def commutator_equality(lhs, rhs, tol=TOL_EQUALITY) -> bool:
    """Equality of the commutator form, compared on the deficit scale."""
    gap = math.sqrt(max(rhs, 0.0)) - math.sqrt(max(lhs, 0.0))
    return abs(gap) <= tol * (1.0 + math.sqrt(max(rhs, 0.0)))


def shape_operator_invariants(shape_ops, c: float = 0.0):
    """(s, s_perp, H2) directly from shape operators in an orthonormal frame."""
    ops = _as_operators(shape_ops)
    ops = 0.5 * (ops + np.swapaxes(ops, 1, 2))
    m = ops.shape[1]
    p = ops.shape[0]
    H = np.trace(ops, axis1=1, axis2=2) / m
    R = np.einsum("rik,rjl->ijkl", ops, ops) - np.einsum("ril,rjk->ijkl", ops, ops)
    Rperp = np.einsum("rik,skj->ijrs", ops, ops) - np.einsum("sik,rkj->ijrs", ops, ops)
    g = PointGeometry(
        point=np.zeros(m),
        position=np.zeros(m + p),
        jacobian=np.eye(m, m + p),
        hessian=np.zeros((m, m, m + p)),
        tangent_change=np.eye(m),
        tangent_frame=np.eye(m, m + p),
        normal_frame=np.eye(p, m + p, m),
        metric=np.eye(m),
        h=ops,
        H=H,
        R=R,
        Rperp=Rperp,
    )
    return scalar_curvatures(g, c)


# ---------------------------------------------------------------------------
# equality normal form


@dataclass(frozen=True)
class CanonicalForm:
    lambdas: tuple  # (lambda1, lambda2, lambda3)
    mu0: float
    tangent_basis: np.ndarray  # columns e_1..e_m
    normal_basis: np.ndarray  # columns n_1..n_p
    residual: float
    degenerate: bool = False

    @property
    def lambda1(self):
        return self.lambdas[0]

    @property
    def lambda2(self):
        return self.lambdas[1]

    @property
    def lambda3(self):
        return self.lambdas[2]

    def rotated(self, shape_ops) -> np.ndarray:
        """Shape operators expressed in the canonical bases."""
        ops = _as_operators(shape_ops)
        mixed = np.einsum("rs,rij->sij", self.normal_basis, ops)
        return np.einsum("ia,sij,jb->sab", self.tangent_basis, mixed, self.tangent_basis)


def normal_form_operators(m: int, p: int, lambdas, mu0: float) -> np.ndarray:
    """The model operators A_1..A_p of the equality case."""
    if m < 2:
        raise DimensionMismatch("normal form needs m >= 2")
    lam = list(lambdas) + [0.0] * 3
    ops = np.zeros((p, m, m))
    I = np.eye(m)
    for r in range(min(p, 3)):
        ops[r] = lam[r] * I
    if p >= 1:
        ops[0, 0, 1] += mu0
        ops[0, 1, 0] += mu0
    if p >= 2:
        ops[1, 0, 0] += mu0
        ops[1, 1, 1] -= mu0
    return ops


def _complete_basis(vectors, dim):
    """Extend orthonormal columns to an orthonormal basis (standard-basis seeds)."""
    basis = [np.asarray(v, dtype=float) for v in vectors]
    for k in range(dim):
        if len(basis) == dim:
            break
        v = np.zeros(dim)
        v[k] = 1.0
        for _ in range(2):
            for b in basis:
                v = v - (v @ b) * b
        nv = np.linalg.norm(v)
        if nv > 1e-6:
            basis.append(v / nv)
    return np.column_stack(basis) if basis else np.zeros((dim, 0))


def canonical_form(shape_ops, tol: float = TOL_EQUALITY) -> CanonicalForm:
    """Bases in which the shape operators take the equality normal form.

    Raises NotEquality when the operators do not realise equality.
    """
    ops = _as_operators(shape_ops)
    ops = 0.5 * (ops + np.swapaxes(ops, 1, 2))
    p, m, _ = ops.shape
    if m < 2:
        raise DimensionMismatch("normal form needs m >= 2")
    lam, B = traceless_parts(ops)
    lhs, rhs = commutator_sides(ops)
    scale = 1.0 + float(np.sum(ops**2))
    tnorm2 = float(np.sum(B**2))

    if math.sqrt(tnorm2) < tol * math.sqrt(scale):
        # umbilic: every frame works, trace vector carried by n_1
        lnorm = np.linalg.norm(lam)
        seeds = [lam / lnorm] if lnorm > tol * math.sqrt(scale) else []
        N = _complete_basis(seeds, p)
        lam_c = N.T @ lam
        lambdas = tuple(float(lam_c[k]) if k < p else 0.0 for k in range(3))
        form = CanonicalForm(lambdas, 0.0, np.eye(m), N, 0.0, degenerate=True)
        return _with_residual(form, ops, p, m)

    if not commutator_equality(lhs, rhs, tol):
        raise NotEquality(f"commutator sides differ: lhs={lhs:.6g}, rhs={rhs:.6g}")
    G = np.einsum("rij,sij->rs", B, B)
    w, V = np.linalg.eigh(G)
    order = np.argsort(-w, kind="stable")
    w, V = w[order], V[:, order]
    gtol = math.sqrt(tol) * (1.0 + w[0])
    if p < 2 or abs(w[0] - w[1]) > gtol or (p > 2 and w[2] > gtol):
        raise NotEquality(f"Gram spectrum {w.tolist()} is not of the form (2mu^2, 2mu^2, 0, ...)")

    # normal basis: active plane first, oriented as close to the input basis as possible
    P = V[:, :2] @ V[:, :2].T
    k1 = int(np.argmax(np.linalg.norm(P, axis=0)))
    n1 = P[:, k1] / np.linalg.norm(P[:, k1])
    cand = P - np.outer(n1, n1 @ P)
    k2 = int(np.argmax(np.linalg.norm(cand, axis=0)))
    n2 = cand[:, k2] / np.linalg.norm(cand[:, k2])
    lam_kernel = lam - (lam @ n1) * n1 - (lam @ n2) * n2
    seeds = [n1, n2]
    if np.linalg.norm(lam_kernel) > tol * math.sqrt(scale):
        seeds.append(lam_kernel / np.linalg.norm(lam_kernel))
    N = _complete_basis(seeds, p)

    # tangent basis: diagonalise the second active operator
    B1 = np.einsum("r,rij->ij", N[:, 0], B)
    B2 = np.einsum("r,rij->ij", N[:, 1], B)
    ev, U = np.linalg.eigh(B2)
    rest = list(range(1, m - 1))
    E = np.column_stack([U[:, -1], U[:, 0]] + [U[:, k] for k in rest])
    if E[:, 0] @ B1 @ E[:, 1] < 0:
        E[:, 1] = -E[:, 1]
    mu0 = float(ev[-1] - ev[0]) / 2.0
    lam_c = N.T @ lam
    lambdas = tuple(float(lam_c[k]) if k < p else 0.0 for k in range(3))
    return _with_residual(CanonicalForm(lambdas, mu0, E, N, 0.0), ops, p, m)


def _with_residual(form: CanonicalForm, ops, p, m) -> CanonicalForm:
    model = normal_form_operators(m, p, form.lambdas, form.mu0)
    residual = float(np.max(np.abs(form.rotated(ops) - model)))
    return CanonicalForm(form.lambdas, form.mu0, form.tangent_basis, form.normal_basis, residual, form.degenerate)


# ---------------------------------------------------------------------------
# pointwise reports and grid scans


@dataclass(frozen=True)
class DdvvReport:
    point: tuple
    s: float = math.nan
    s_perp: float = math.nan
    H2: float = math.nan
    c: float = 0.0
    deficit: float = math.nan
    commutator_lhs: float = math.nan
    commutator_rhs: float = math.nan
    is_umbilic: bool = False
    is_equality: bool = False
    canonical: Optional[CanonicalForm] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def mu0(self):
        return self.canonical.mu0 if self.canonical is not None else None


def report_from_operators(point, shape_ops, c=0.0, tol=TOL_EQUALITY) -> DdvvReport:
    s, s_perp, H2 = shape_operator_invariants(shape_ops, c)
    return _report(point, np.asarray(shape_ops, dtype=float), s, s_perp, H2, c, tol)


def ddvv_report(geom: PointGeometry, c: float = 0.0, tol: float = TOL_EQUALITY) -> DdvvReport:
    s, s_perp, H2 = scalar_curvatures(geom, c)
    return _report(geom.point, geom.h, s, s_perp, H2, c, tol)


def _report(point, ops, s, s_perp, H2, c, tol):
    deficit = ddvv_deficit(s, s_perp, H2, c)
    lhs, rhs = commutator_sides(ops)
    eq = is_equality(deficit, s, s_perp, H2, c, tol)
    canonical = None
    if eq:
        try:
            canonical = canonical_form(ops, tol)
        except NotEquality:
            canonical = None
    return DdvvReport(
        point=tuple(float(v) for v in np.atleast_1d(point)),
        s=s,
        s_perp=s_perp,
        H2=H2,
        c=c,
        deficit=deficit,
        commutator_lhs=lhs,
        commutator_rhs=rhs,
        is_umbilic=is_umbilic(ops),
        is_equality=eq,
        canonical=canonical,
    )


def evaluate_point(spec: ImmersionSpec, x, c: float = 0.0, tol: float = TOL_EQUALITY) -> DdvvReport:
    """DDVV report at one parameter point; engine errors are stored, not raised."""
    try:
        return ddvv_report(point_geometry(spec, x), c, tol)
    except WintgenError as exc:
        return DdvvReport(point=tuple(float(v) for v in x), c=c, error=f"{type(exc).__name__}: {exc}")


@dataclass(frozen=True)
class ScanSummary:
    points: int
    evaluated: int
    wintgen_ideal_on_grid: bool
    umbilic_free: bool
    min_deficit: float
    max_deficit: float
    errors: int = 0

    def as_dict(self) -> dict:
        return {
            "points": self.points,
            "evaluated": self.evaluated,
            "errors": self.errors,
            "wintgen_ideal_on_grid": self.wintgen_ideal_on_grid,
            "umbilic_free": self.umbilic_free,
            "min_deficit": self.min_deficit,
            "max_deficit": self.max_deficit,
        }


def summarize(reports: Sequence[DdvvReport]) -> ScanSummary:
    good = [r for r in reports if r.ok]
    deficits = [r.deficit for r in good]
    return ScanSummary(
        points=len(reports),
        evaluated=len(good),
        wintgen_ideal_on_grid=bool(good) and all(r.is_equality for r in good),
        umbilic_free=not any(r.is_umbilic for r in good),
        min_deficit=min(deficits) if deficits else math.nan,
        max_deficit=max(deficits) if deficits else math.nan,
        errors=len(reports) - len(good),
    )


def worker_count() -> int:
    cap = os.environ.get("WINTGEN_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return n


PARALLEL_THRESHOLD = 2000


def _scan_chunk(args):
    spec, pts, c, tol = args
    return [evaluate_point(spec, x, c, tol) for x in pts]


def wintgen_scan(spec: ImmersionSpec, grid, c: float = 0.0, tol: float = TOL_EQUALITY, workers: Optional[int] = None):
    """Reports for every grid point (input order) and their summary."""
    grid = np.asarray(grid, dtype=float).reshape(-1, spec.m)
    workers = worker_count() if workers is None else max(1, int(workers))
    if workers > 1 and len(grid) >= PARALLEL_THRESHOLD:
        chunks = np.array_split(grid, workers * 4)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_scan_chunk, [(spec, ch, c, tol) for ch in chunks])
            reports = [r for part in parts for r in part]
    else:
        reports = [evaluate_point(spec, x, c, tol) for x in grid]
    return reports, summarize(reports)


# ---------------------------------------------------------------------------
# curvature ellipse


@dataclass(frozen=True)
class CurvatureEllipse:
    center: np.ndarray  # mean curvature vector in R^n
    semi_axes: tuple  # (a, b), a >= b >= 0
    axes: np.ndarray  # (2, n): the vectors v1, v2 in R^n
    is_circle: bool
    degenerate: bool = False  # a == 0: the ellipse is a point


ELLIPSE_EPS = 1e-12


def curvature_ellipse(g: PointGeometry, tol: float = TOL_EQUALITY) -> CurvatureEllipse:
    if g.m != 2:
        raise NotASurface(f"curvature ellipse needs m = 2, got m = {g.m}")
    v1 = 0.5 * (g.h[:, 0, 0] - g.h[:, 1, 1])
    v2 = g.h[:, 0, 1]
    sv = np.linalg.svd(np.column_stack([v1, v2]), compute_uv=False)
    a = float(sv[0])
    b = float(sv[1]) if sv.size > 1 else 0.0
    circle = a > ELLIPSE_EPS and abs(a - b) <= tol * (a + b + ELLIPSE_EPS)
    axes = np.vstack([v1 @ g.normal_frame, v2 @ g.normal_frame])
    return CurvatureEllipse(g.mean_curvature_vector, (a, b), axes, bool(circle), degenerate=a <= ELLIPSE_EPS)
