"""Cylinders, cones and rotational submanifolds over a base immersion, the
hyperboloid isometry tau, conformal transformations and a small catalog of
base surfaces.

All constructions work at the expression level: the resulting ImmersionSpec
is again a list of DSL expressions and can be serialized to a config file.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    CenterOnImage,
    DimensionMismatch,
    NotInUpperHalfSpace,
    NotOnSphere,
    PoleOnImage,
    UnknownName,
    ValidationError,
)
from .expr import Expr, Variable, as_expr, const, evaluate, func, parse
from .geometry import normal_frame, point_geometry, tangent_frame
from .immersion import ImmersionSpec
from .jets import eval_jet_array
from .moebius import lorentz_inner, local_data

SPHERE_TOL = 1e-10
CONE_T_DOMAIN = (0.5, 2.0)
FLAT_DOMAIN = (-1.0, 1.0)
POLAR_DOMAIN = (0.5, math.pi - 0.5)
AZIMUTH_DOMAIN = (-1.0, 1.0)


@dataclass(frozen=True)
class BaseSurface:
    name: str
    spec: ImmersionSpec
    lies_on_unit_sphere: bool = False
    lies_in_upper_half_space: bool = False
    expected_superminimal: bool = False
    space_form: str = "euclidean"  # the space form the base is minimal in: euclidean | sphere | hyperbolic


def _fresh(name, taken):
    while name in taken:
        name = name + "_"
    return name


def _fresh_names(prefix, count, taken, single=None):
    names = []
    taken = set(taken)
    for k in range(count):
        base = single if (single and count == 1) else f"{prefix}{k + 1}"
        nm = _fresh(base, taken)
        taken.add(nm)
        names.append(nm)
    return names


def _spec_of(base):
    return base.spec if isinstance(base, BaseSurface) else base


def _sample_points(spec, per_axis=5):
    return spec.grid([per_axis] * spec.m)


# ---------------------------------------------------------------------------
# the three constructions


def cylinder(base, extra: int) -> ImmersionSpec:
    """f(x, y) = (u(x), y) with y in R^extra."""
    u = _spec_of(base)
    if extra < 1:
        raise ValidationError("cylinder needs extra >= 1")
    ys = _fresh_names("s", extra, u.variables, single="s")
    comps = list(u.components) + [Variable(y) for y in ys]
    domain = list(u.domain) + [FLAT_DOMAIN] * extra
    return ImmersionSpec.create(list(u.variables) + ys, comps, domain, construction="cylinder", base_dim=u.m)


def check_on_sphere(spec: ImmersionSpec, points=None):
    pts = _sample_points(spec) if points is None else points
    norms = np.linalg.norm(spec.positions(pts), axis=-1)
    err = float(np.max(np.abs(norms - 1.0)))
    if err > SPHERE_TOL:
        raise NotOnSphere(f"base leaves the unit sphere by {err:.3g}")


def cone(base, extra: int = 0, t_domain=CONE_T_DOMAIN) -> ImmersionSpec:
    """f(t, y, x) = (y, t u(x)) for u in the unit sphere, t > 0, y in R^extra."""
    u = _spec_of(base)
    if extra < 0:
        raise ValidationError("cone needs extra >= 0")
    if isinstance(base, BaseSurface) and not base.lies_on_unit_sphere:
        raise NotOnSphere(f"base {base.name!r} is not flagged as lying on the unit sphere")
    check_on_sphere(u)
    if not t_domain[0] > 0:
        raise ValidationError("cone parameter t must stay positive")
    t = _fresh("t", set(u.variables))
    ys = _fresh_names("y", extra, set(u.variables) | {t}, single="y")
    comps = [Variable(y) for y in ys] + [Variable(t) * c for c in u.components]
    domain = [tuple(t_domain)] + [FLAT_DOMAIN] * extra + list(u.domain)
    return ImmersionSpec.create([t] + ys + list(u.variables), comps, domain, construction="cone", base_dim=u.m)


def sphere_chart(names: Sequence[str]) -> list:
    """Iterated polar parametrization of S^k in R^{k+1}, k = len(names).

    phi = (cos a1, sin a1 cos a2, ..., sin a1 ... sin a_{k-1} cos a_k,
    sin a1 ... sin a_k); a1..a_{k-1} are polar angles, a_k the azimuth.
    """
    k = len(names)
    angles = [Variable(n) for n in names]
    out = []
    prefix: Optional[Expr] = None
    for j in range(k):
        c = func("cos", angles[j])
        out.append(c if prefix is None else prefix * c)
        s = func("sin", angles[j])
        prefix = s if prefix is None else prefix * s
    out.append(prefix)
    return out


def sphere_chart_domain(k: int):
    return [POLAR_DOMAIN] * (k - 1) + [AZIMUTH_DOMAIN]


def check_upper_half_space(spec: ImmersionSpec, points=None):
    pts = _sample_points(spec) if points is None else points
    last = spec.positions(pts)[..., -1]
    if np.any(last <= 0):
        raise NotInUpperHalfSpace(f"last coordinate reaches {float(np.min(last)):.3g}")


def rotational(base, sphere_dim: int) -> ImmersionSpec:
    """f(x, a) = (u_1, ..., u_{n-1}, u_n phi(a)) with phi a chart of S^sphere_dim."""
    u = _spec_of(base)
    if sphere_dim < 1:
        raise ValidationError("rotational needs sphere_dim >= 1")
    if isinstance(base, BaseSurface) and not base.lies_in_upper_half_space:
        raise NotInUpperHalfSpace(f"base {base.name!r} is not flagged as lying in the upper half-space")
    check_upper_half_space(u)
    names = _fresh_names("a", sphere_dim, u.variables, single="a")
    phi = sphere_chart(names)
    last = u.components[-1]
    comps = list(u.components[:-1]) + [last * c for c in phi]
    domain = list(u.domain) + sphere_chart_domain(sphere_dim)
    return ImmersionSpec.create(list(u.variables) + names, comps, domain, construction="rotational", base_dim=u.m)


# ---------------------------------------------------------------------------
# tau: upper half-space -> hyperboloid


def tau_exprs(xs: Sequence[Expr]) -> list:
    xs = [as_expr(v) for v in xs]
    q = xs[0] * xs[0]
    for v in xs[1:]:
        q = q + v * v
    xn = xs[-1]
    return [(1 + q) / (2 * xn), (1 - q) / (2 * xn)] + [v / xn for v in xs[:-1]]


def tau(x) -> np.ndarray:
    """Isometry of the upper half-space model onto the hyperboloid <y, y> = -1, y_0 > 0."""
    x = np.asarray(x, dtype=float)
    if x[-1] <= 0:
        raise NotInUpperHalfSpace(f"last coordinate {x[-1]} is not positive")
    q = float(x @ x)
    y = np.concatenate([[(1 + q) / (2 * x[-1]), (1 - q) / (2 * x[-1])], x[:-1] / x[-1]])
    assert abs(lorentz_inner(y, y) + 1.0) <= 1e-9 * (1 + y[0] ** 2) and y[0] >= 1 - 1e-12
    return y


def tau_jacobian(x) -> np.ndarray:
    """d tau at x: rows d tau / d x_k."""
    x = np.asarray(x, dtype=float)
    names = [f"x{k}" for k in range(len(x))]
    exprs = tau_exprs([Variable(n) for n in names])
    jet = eval_jet_array(exprs, names, x, 1)
    return jet[:, 1:].T


# ---------------------------------------------------------------------------
# conformal transformations


@dataclass(frozen=True)
class MoebiusTransform:
    kind: str  # translation | scaling | inversion
    vector: tuple = ()
    factor: float = 1.0

    @classmethod
    def translation(cls, a):
        return cls("translation", tuple(float(v) for v in a))

    @classmethod
    def scaling(cls, k):
        if not k > 0:
            raise ValidationError("scaling factor must be positive")
        return cls("scaling", factor=float(k))

    @classmethod
    def inversion(cls, center):
        return cls("inversion", tuple(float(v) for v in center))


CENTER_TOL = 1e-6


def apply_transform(spec: ImmersionSpec, T: MoebiusTransform, check_points=None) -> ImmersionSpec:
    comps = list(spec.components)
    if T.kind == "scaling":
        new = [T.factor * c for c in comps]
    elif T.kind in ("translation", "inversion"):
        if len(T.vector) != len(comps):
            raise DimensionMismatch(f"{T.kind} vector has {len(T.vector)} entries, immersion has {len(comps)}")
        if T.kind == "translation":
            new = [c + const(a) if a else c for c, a in zip(comps, T.vector)]
        else:
            pts = _sample_points(spec) if check_points is None else check_points
            dist = np.linalg.norm(spec.positions(pts) - np.array(T.vector), axis=-1)
            if np.min(dist) < CENTER_TOL:
                raise CenterOnImage(f"inversion centre within {float(np.min(dist)):.3g} of the image")
            shifted = [c - const(a) if a else c for c, a in zip(comps, T.vector)]
            q = shifted[0] * shifted[0]
            for s in shifted[1:]:
                q = q + s * s
            new = [s / q + const(a) if a else s / q for s, a in zip(shifted, T.vector)]
    else:
        raise ValidationError(f"unknown transform kind {T.kind!r}")
    return spec.with_components(new)


POLE_TOL = 1e-6


def stereographic(spec: ImmersionSpec, check_points=None) -> ImmersionSpec:
    """Projection from the pole (0, ..., 0, 1) of the unit sphere."""
    check_on_sphere(spec, check_points)
    pts = _sample_points(spec) if check_points is None else check_points
    last = spec.positions(pts)[..., -1]
    if np.max(last) > 1 - POLE_TOL:
        raise PoleOnImage("the image reaches the projection pole")
    comps = list(spec.components)
    denom = 1 - comps[-1]
    return spec.with_components([c / denom for c in comps[:-1]])


def inverse_stereographic(spec: ImmersionSpec) -> ImmersionSpec:
    """R^n -> unit sphere in R^{n+1}, inverse of :func:`stereographic`."""
    comps = list(spec.components)
    q = comps[0] * comps[0]
    for c in comps[1:]:
        q = q + c * c
    denom = q + 1
    return spec.with_components([2 * c / denom for c in comps] + [(q - 1) / denom])


# ---------------------------------------------------------------------------
# catalog


def _veronese() -> BaseSurface:
    names = ("theta", "phi")
    th, ph = Variable("theta"), Variable("phi")
    x = func("sin", th) * func("cos", ph)
    y = func("sin", th) * func("sin", ph)
    z = func("cos", th)
    r3 = func("sqrt", 3)
    comps = [
        r3 * x * y,
        r3 * x * z,
        r3 * y * z,
        r3 / 2 * (x * x - y * y),
        (x * x + y * y - 2 * z * z) / 2,
    ]
    spec = ImmersionSpec.create(names, comps, [(0.3, math.pi - 0.3), (-1.0, 1.0)])
    return BaseSurface("veronese", spec, lies_on_unit_sphere=True, expected_superminimal=True, space_form="sphere")


def _binomial_parts(k):
    """(Re z^k, Im z^k) as expressions in u, v."""
    u, v = Variable("u"), Variable("v")
    re_terms, im_terms = [], []
    for j in range(k + 1):
        coeff = math.comb(k, j)
        mono = None
        if k - j:
            mono = u if k - j == 1 else u ** (k - j)
        if j:
            vp = v if j == 1 else v**j
            mono = vp if mono is None else mono * vp
        if mono is None:
            mono = const(1)
        sign = (-1) ** (j // 2)
        term = (coeff, sign, mono)
        (re_terms if j % 2 == 0 else im_terms).append(term)
    return re_terms, im_terms


def _sum_terms(terms):
    out = None
    for c, mono in terms:
        if abs(c) < 1e-15:
            continue
        if out is None:
            out = mono if c == 1 else (-mono if c == -1 else const(c) * mono)
        elif c < 0:
            out = out - (mono if c == -1 else const(-c) * mono)
        else:
            out = out + (mono if c == 1 else const(c) * mono)
    return const(0) if out is None else out


def holomorphic_polynomial(coeffs) -> tuple:
    """(Re P, Im P) for P(z) = sum_k coeffs[k] z^k, z = u + i v."""
    re_acc, im_acc = {}, {}
    for k, c in enumerate(coeffs):
        c = complex(c)
        if c == 0:
            continue
        re_terms, im_terms = _binomial_parts(k)
        # Re(c w) = a Re w - b Im w ; Im(c w) = a Im w + b Re w
        for coeff, sign, mono in re_terms:
            key = (k, str(mono))
            re_acc.setdefault(key, [0.0, mono])[0] += c.real * coeff * sign
            im_acc.setdefault(key, [0.0, mono])[0] += c.imag * coeff * sign
        for coeff, sign, mono in im_terms:
            key = (k, str(mono))
            re_acc.setdefault(key, [0.0, mono])[0] += -c.imag * coeff * sign
            im_acc.setdefault(key, [0.0, mono])[0] += c.real * coeff * sign
    re = _sum_terms([(c, mono) for c, mono in re_acc.values()])
    im = _sum_terms([(c, mono) for c, mono in im_acc.values()])
    return re, im


def polynomial_coefficients(text: str, max_degree: int = 16) -> list:
    """Coefficients of a polynomial in z written in the DSL, e.g. ``z^3 + 2*z``."""
    e = parse(text, ["z"])
    n = max_degree + 1
    zs = np.exp(2j * np.pi * np.arange(n) / n)
    vals = np.array([complex(evaluate(e, {"z": zv})) for zv in zs])
    coeffs = np.fft.fft(vals) / n
    coeffs = np.where(np.abs(coeffs) < 1e-12, 0, coeffs)
    probe = np.array([0.3 + 0.7j, -1.1 + 0.2j, 1.7 - 0.4j])
    direct = np.array([complex(evaluate(e, {"z": zv})) for zv in probe])
    if not np.allclose(np.polyval(coeffs[::-1], probe), direct, rtol=1e-9, atol=1e-9):
        raise ValidationError(f"{text!r} is not a polynomial of degree <= {max_degree} in z")
    coeffs = [complex(round(c.real, 12), round(c.imag, 12)) for c in coeffs]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def holomorphic_curve(coeffs=(0, 0, 1), domain=None) -> BaseSurface:
    """z -> (z, P(z)) in C^2 = R^4."""
    re, im = holomorphic_polynomial(coeffs)
    comps = [Variable("u"), Variable("v"), re, im]
    spec = ImmersionSpec.create(("u", "v"), comps, domain or [(-1.0, 1.0), (-1.0, 1.0)])
    label = ",".join(_fmt_coeff(c) for c in coeffs)
    return BaseSurface(f"holomorphic_curve({label})", spec, expected_superminimal=True, space_form="euclidean")


def _fmt_coeff(c):
    c = complex(c)
    if c.imag == 0:
        r = c.real
        return str(int(r)) if float(r).is_integer() else repr(r)
    return repr(c)


def _clifford_torus() -> BaseSurface:
    r2 = func("sqrt", 2)
    u, v = Variable("u"), Variable("v")
    comps = [func("cos", u) / r2, func("sin", u) / r2, func("cos", v) / r2, func("sin", v) / r2]
    spec = ImmersionSpec.create(("u", "v"), comps, [(-1.0, 1.0), (-1.0, 1.0)])
    return BaseSurface("clifford_torus", spec, lies_on_unit_sphere=True, expected_superminimal=False, space_form="sphere")


def _sphere_surface(name, height, superminimal) -> BaseSurface:
    th, ph = Variable("theta"), Variable("phi")
    r = math.sqrt(1 - height * height)
    pts = [func("sin", th) * func("cos", ph), func("sin", th) * func("sin", ph), func("cos", th)]
    comps = [p if r == 1 else const(r) * p for p in pts] + [const(height)]
    spec = ImmersionSpec.create(("theta", "phi"), comps, [(0.5, math.pi - 0.5), (-1.0, 1.0)])
    return BaseSurface(name, spec, lies_on_unit_sphere=True, expected_superminimal=superminimal, space_form="sphere")


def _geodesic_hemisphere() -> BaseSurface:
    th, ph = Variable("theta"), Variable("phi")
    comps = [func("sin", th) * func("cos", ph), func("sin", th) * func("sin", ph), func("cos", th)]
    spec = ImmersionSpec.create(("theta", "phi"), comps, [(0.3, 1.2), (-1.0, 1.0)])
    return BaseSurface(
        "geodesic_hemisphere_H3", spec, lies_in_upper_half_space=True, expected_superminimal=True, space_form="hyperbolic"
    )


CATALOG_NAMES = (
    "veronese",
    "holomorphic_curve",
    "clifford_torus",
    "round_sphere_chart",
    "great_sphere_chart",
    "geodesic_hemisphere_H3",
)

_HOLO_RE = re.compile(r"^holomorphic(?:_curve)?(?::|\()(.*?)\)?$")


def catalog(name: str, coeffs=None) -> BaseSurface:
    """Named base surface. ``holomorphic:z^2`` / ``holomorphic:0,0,1`` select a curve z -> (z, P(z))."""
    name = name.strip()
    if name == "veronese":
        return _veronese()
    if name == "clifford_torus":
        return _clifford_torus()
    if name == "round_sphere_chart":
        # a small 2-sphere of S^3: umbilic in R^4, not minimal in S^3
        return _sphere_surface("round_sphere_chart", 0.5, False)
    if name == "great_sphere_chart":
        return _sphere_surface("great_sphere_chart", 0.0, True)
    if name == "geodesic_hemisphere_H3":
        return _geodesic_hemisphere()
    if name == "holomorphic_curve":
        return holomorphic_curve(coeffs if coeffs is not None else (0, 0, 1))
    m = _HOLO_RE.match(name)
    if m:
        body = m.group(1).strip()
        if re.fullmatch(r"[-+0-9.eEj ,]+", body):
            cs = [complex(s.strip().replace(" ", "")) for s in body.split(",") if s.strip()]
        else:
            cs = polynomial_coefficients(body)
        return holomorphic_curve(cs)
    raise UnknownName(f"unknown base surface {name!r}; known: {', '.join(CATALOG_NAMES)}")


# ---------------------------------------------------------------------------
# verification helpers


def _jet2(spec, x):
    jet = spec.jets(np.asarray(x, dtype=float), 2)
    alg = spec.algebra(2)
    J = alg.first(jet).T
    Hs = np.moveaxis(alg.second(jet), 0, -1)
    return jet[:, 0], J, Hs


def _forms(spec, x, normals):
    _, J, Hs = _jet2(spec, x)
    return J @ J.T, np.einsum("abk,rk->rab", Hs, np.atleast_2d(normals))


def _blockdiag(*blocks):
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n))
    k = 0
    for b in blocks:
        s = b.shape[0]
        out[k : k + s, k : k + s] = b
        k += s
    return out


def euclidean_normals(J):
    _, e = tangent_frame(J)
    return normal_frame(e)


def sphere_normals(u, J):
    """Orthonormal normals of a sphere submanifold: orthogonal to u and to its tangent space."""
    rows = np.vstack([J, u])
    _, e = tangent_frame(rows)
    return normal_frame(e)


def cylinder_identity_residual(base, f: ImmersionSpec, x) -> float:
    u = _spec_of(base)
    x = np.asarray(x, dtype=float)
    xu = x[: u.m]
    _, Ju, Hu = _jet2(u, xu)
    eta = euclidean_normals(Ju)
    Iu = Ju @ Ju.T
    IIu = np.einsum("abk,rk->rab", Hu, eta)
    extra = f.m - u.m
    normals = np.hstack([eta, np.zeros((eta.shape[0], extra))])
    I, II = _forms(f, x, normals)
    I_model = _blockdiag(Iu, np.eye(extra))
    II_model = np.array([_blockdiag(h, np.zeros((extra, extra))) for h in IIu])
    return float(max(np.max(np.abs(I - I_model)), np.max(np.abs(II - II_model))))


def cone_identity_residual(base, f: ImmersionSpec, x) -> float:
    u = _spec_of(base)
    x = np.asarray(x, dtype=float)
    t = x[0]
    extra = f.m - u.m - 1
    xu = x[1 + extra :]
    uval, Ju, Hu = _jet2(u, xu)
    eta = sphere_normals(uval, Ju)
    Iu = Ju @ Ju.T
    IIu = np.einsum("abk,rk->rab", Hu, eta)
    normals = np.hstack([np.zeros((eta.shape[0], extra)), eta])
    I, II = _forms(f, x, normals)
    I_model = _blockdiag(np.eye(1 + extra), t * t * Iu)
    II_model = np.array([_blockdiag(np.zeros((1 + extra, 1 + extra)), t * h) for h in IIu])
    return float(max(np.max(np.abs(I - I_model)), np.max(np.abs(II - II_model))))


def hyperbolic_forms(base, x):
    """Hyperbolic I_u, II_u (per normal) and the normals eta (Euclidean length x_n).

    II_u is evaluated on the hyperboloid: <d^2 (tau o u), d tau(eta)>.
    """
    u = _spec_of(base)
    x = np.asarray(x, dtype=float)
    uval, Ju, _ = _jet2(u, x)
    xn = uval[-1]
    nu = euclidean_normals(Ju)
    eta = xn * nu
    Iu = Ju @ Ju.T / xn**2
    tu = u.with_components(tau_exprs(u.components))
    _, _, Ht = _jet2(tu, x)
    dtau = tau_jacobian(uval)  # (n, n+1)
    N = eta @ dtau  # Lorentz normals, one row per eta
    IIu = np.array([[[lorentz_inner(Ht[a, b], Nr) for b in range(u.m)] for a in range(u.m)] for Nr in N])
    return Iu, IIu, eta, nu


def rotational_identity_residual(base, f: ImmersionSpec, x) -> float:
    u = _spec_of(base)
    x = np.asarray(x, dtype=float)
    xu, ang = x[: u.m], x[u.m :]
    k = len(ang)
    Iu, IIu, eta, nu = hyperbolic_forms(u, xu)
    xn = u.positions(xu)[-1]
    names = [f"a{j}" for j in range(k)]
    phi_spec = ImmersionSpec.create(names, sphere_chart(names), [(-10.0, 10.0)] * k)
    phi, Jphi, _ = _jet2(phi_spec, ang)
    IS = Jphi @ Jphi.T
    xi = np.hstack([nu[:, :-1], nu[:, -1:] * phi[None, :]])
    I, II = _forms(f, x, xi)
    G = _blockdiag(Iu, IS)
    I_model = xn * xn * G
    II_model = np.array([_blockdiag(xn * IIu[r], np.zeros((k, k))) - eta[r, -1] * G for r in range(len(eta))])
    return float(max(np.max(np.abs(I - I_model)), np.max(np.abs(II - II_model))))


def construction_identity_residual(kind: str, base, f: ImmersionSpec, x) -> float:
    fn = {
        "cylinder": cylinder_identity_residual,
        "cone": cone_identity_residual,
        "rotational": rotational_identity_residual,
    }[kind]
    return fn(base, f, x)


def base_mean_curvature(base: BaseSurface, x) -> float:
    """|H| of the base inside its own space form."""
    spec = base.spec
    x = np.asarray(x, dtype=float)
    if base.space_form == "hyperbolic":
        Iu, IIu, _, _ = hyperbolic_forms(spec, x)
        Ginv = np.linalg.inv(Iu)
        H = np.einsum("ab,rab->r", Ginv, IIu) / spec.m
        return float(np.linalg.norm(H))
    g = point_geometry(spec, x)
    Hv = g.mean_curvature_vector
    if base.space_form == "sphere":
        f = g.position
        Hv = Hv - (Hv @ f) * f / (f @ f)
    return float(np.linalg.norm(Hv))


def tau_pullback_residual(curve_points, h: float = 1e-5) -> float:
    """Compare |d tau(c')|_L^2 with the hyperbolic |c'|^2 / c_n^2 along sampled curve points.

    ``curve_points`` is a callable s -> point (upper half-space) evaluated on s in [0, 1].
    """
    worst = 0.0
    for s in np.linspace(0.1, 0.9, 9):
        dc = (np.asarray(curve_points(s + h)) - np.asarray(curve_points(s - h))) / (2 * h)
        c = np.asarray(curve_points(s))
        v = dc @ tau_jacobian(c)
        lhs = float(lorentz_inner(v, v))
        rhs = float(dc @ dc) / c[-1] ** 2
        worst = max(worst, abs(lhs - rhs))
    return worst


# ---------------------------------------------------------------------------
# splitting of the Moebius position vector


def moebius_split_residual(kind: str, base, f: ImmersionSpec, x, probe_shift=0.1) -> float:
    """Check the product structure of Y for a construction at x.

    cylinder: the trailing block of Y is rho * y, and rho does not depend on y;
    cone: Y / (rho t) = (hyperbolic point of (t, y), u(x)), rho t independent of (t, y);
    rotational: Y / (rho x_n) = (tau(u), phi), rho x_n independent of the angles.
    """
    u = _spec_of(base)
    x = np.asarray(x, dtype=float)
    r = u.m
    d = local_data(f, x)
    Y, rho = d.Y, d.rho
    if kind == "cylinder":
        y = x[r:]
        res = np.max(np.abs(Y[-len(y):] - rho * y))
        x2 = x.copy()
        x2[r:] += probe_shift
        res = max(res, abs(local_data(f, x2).rho - rho) / rho)
        return float(res)
    if kind == "cone":
        extra = f.m - r - 1
        t, y, xu = x[0], x[1 : 1 + extra], x[1 + extra :]
        scale = rho * t
        Z = Y / scale
        q = t * t + float(y @ y)
        hyper = np.concatenate([[(1 + q) / (2 * t), (1 - q) / (2 * t)], y / t])
        res = max(np.max(np.abs(Z[: 2 + extra] - hyper)), np.max(np.abs(Z[2 + extra :] - u.positions(xu))))
        x2 = x.copy()
        x2[: 1 + extra] += probe_shift
        d2 = local_data(f, x2)
        res = max(res, abs(d2.rho * x2[0] - scale) / scale)
        return float(res)
    if kind == "rotational":
        xu, ang = x[:r], x[r:]
        xn = u.positions(xu)[-1]
        scale = rho * xn
        Z = Y / scale
        names = [f"a{j}" for j in range(len(ang))]
        phi = ImmersionSpec.create(names, sphere_chart(names), [(-10.0, 10.0)] * len(ang)).positions(ang)
        n_h = u.n + 1
        res = max(np.max(np.abs(Z[:n_h] - tau(u.positions(xu)))), np.max(np.abs(Z[n_h:] - phi)))
        x2 = x.copy()
        x2[r:] += probe_shift
        res = max(res, abs(local_data(f, x2).rho - rho) / rho)
        return float(res)
    raise ValidationError(f"unknown construction {kind!r}")


def build(kind: str, base, extra: int = 1) -> ImmersionSpec:
    if kind == "cylinder":
        return cylinder(base, extra)
    if kind == "cone":
        return cone(base, extra)
    if kind == "rotational":
        return rotational(base, extra)
    raise ValidationError(f"unknown construction kind {kind!r}")


def default_extra(kind: str) -> int:
    return 0 if kind == "cone" else 1
