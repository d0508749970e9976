"""Property suites behind ``wintgen verify``.

Each suite is a list of named checks; a check returns ``(ok, detail)``.
All randomness comes from ``numpy.random.default_rng(seed)``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import constructions as C
from .ddvv import (
    canonical_form,
    commutator_sides,
    ddvv_report,
    normal_form_operators,
    report_from_operators,
    wintgen_scan,
)
from .errors import ExprSyntaxError, NotEquality, UmbilicPoint
from .expr import parse, to_text
from .fuzz import fuzz_corpus, jet_vs_fd_error, random_expression, random_graph_immersion
from .geometry import intrinsic_curvature_crosscheck, point_geometry, scalar_curvatures
from .immersion import ImmersionSpec
from .jets import eval_jet
from .moebius import (
    canonical_moebius_form_check,
    moebius_frame,
    moebius_lift,
)


@dataclass
class CheckResult:
    suite: str
    name: str
    ok: bool
    detail: str
    seconds: float


def _ok(cond, detail=""):
    return bool(cond), detail


# parser -----------------------------------------------------------------


def _parser_examples(rng):
    e = parse("u^2 - v^2", ["u", "v"])
    okay = to_text(e) == "u^2 - v^2"
    try:
        parse("u +", ["u"])
        offset = None
    except ExprSyntaxError as exc:
        offset = exc.offset
    return _ok(okay and offset == 3, f"print={to_text(e)!r}, offset={offset}")


def _parser_roundtrip(rng):
    for _ in range(300):
        e = random_expression(rng, ["u", "v", "w"], 5)
        t1 = to_text(e)
        e2 = parse(t1, ["u", "v", "w"])
        if to_text(e2) != t1:
            return False, f"print/parse not a fixed point for {t1!r}"
    return True, "300 random expressions"


# jets -------------------------------------------------------------------


def _jets_examples(rng):
    j = eval_jet(parse("sqrt(u)", ["u"]), [1.0], 2)
    return _ok(
        abs(j.extract((1,)) - 0.5) < 1e-14 and abs(j.extract((2,)) + 0.25) < 1e-14,
        f"d={j.extract((1,))}, dd={j.extract((2,))}",
    )


def _jets_fd(rng):
    corpus = fuzz_corpus(int(rng.integers(1 << 30)), 200)
    worst = max(jet_vs_fd_error(e, names, x) for e, names, x in corpus)
    return _ok(worst <= 1e-6, f"worst relative error {worst:.3g} over 200 expressions")


# geometry ---------------------------------------------------------------

SPHERE3 = ImmersionSpec.create(
    ["u", "v", "w"],
    ["cos(u)*cos(v)*cos(w)", "cos(u)*cos(v)*sin(w)", "cos(u)*sin(v)", "sin(u)"],
)


def _geometry_sphere(rng):
    g = point_geometry(SPHERE3, [0.3, 0.2, 0.1])
    s, sp, H2 = scalar_curvatures(g)
    res = intrinsic_curvature_crosscheck(SPHERE3, [0.3, 0.2, 0.1], 1e-3)
    ok = abs(s - 1) < 1e-12 and sp < 1e-12 and abs(H2 - 1) < 1e-12 and res < 1e-5
    return _ok(ok, f"s={s:.15g}, s_perp={sp:.3g}, H2={H2:.15g}, crosscheck={res:.3g}")


def _geometry_gauge(rng):
    spec = random_graph_immersion(rng, 3, 3)
    x = rng.uniform(-0.5, 0.5, 3)
    g = point_geometry(spec, x)
    Q = np.linalg.qr(rng.normal(size=(3, 3)))[0]
    h2 = np.einsum("rs,sij->rij", Q, g.h)
    a = report_from_operators(x, g.h)
    b = report_from_operators(x, h2)
    worst = max(abs(a.s - b.s), abs(a.s_perp - b.s_perp), abs(a.H2 - b.H2))
    return _ok(worst < 1e-10, f"max change {worst:.3g}")


# ddvv -------------------------------------------------------------------


def _ddvv_oracle(rng):
    ops = normal_form_operators(3, 3, (0, 0, 0), 1.0)
    lhs, rhs = commutator_sides(ops)
    rep = report_from_operators(np.zeros(3), ops)
    return _ok(
        abs(lhs - 16) < 1e-12 and abs(rhs - 16) < 1e-12 and abs(rep.deficit) < 1e-12,
        f"lhs={lhs}, rhs={rhs}, deficit={rep.deficit:.3g}",
    )


def _ddvv_random(rng):
    for _ in range(1000):
        X = rng.uniform(-1, 1, (3, 3, 3))
        X = 0.5 * (X + X.transpose(0, 2, 1))
        lhs, rhs = commutator_sides(X)
        if lhs > rhs * (1 + 1e-12):
            return False, f"lhs {lhs} > rhs {rhs}"
    return True, "1000 random operator triples"


def _ddvv_canonical(rng):
    ops = normal_form_operators(3, 4, tuple(rng.uniform(-1, 1, 3)), rng.uniform(0.1, 1))
    Qt = np.linalg.qr(rng.normal(size=(3, 3)))[0]
    Qn = np.linalg.qr(rng.normal(size=(4, 4)))[0]
    rot = np.einsum("rs,sij->rij", Qn, np.einsum("ia,sab,jb->sij", Qt, ops, Qt))
    cf = canonical_form(rot)
    return _ok(cf.residual < 1e-8, f"reconstruction residual {cf.residual:.3g}")


def _ddvv_scan(rng):
    cyl = C.build("cylinder", C.catalog("holomorphic:z^2"), 1)
    _, s1 = wintgen_scan(cyl, cyl.grid([4, 4, 4]), workers=1)
    graph = ImmersionSpec.create(["u", "v", "w"], ["u", "v", "w", "u^2+v^2", "u*v"])
    _, s2 = wintgen_scan(graph, graph.grid([4, 4, 4]), workers=1)
    return _ok(s1.wintgen_ideal_on_grid and not s2.wintgen_ideal_on_grid, f"cylinder={s1.as_dict()}, graph={s2.as_dict()}")


# moebius ----------------------------------------------------------------


def _moebius_frame(rng):
    spec = random_graph_immersion(rng, 3, 2)
    x = rng.uniform(-0.5, 0.5, 3)
    fr = moebius_frame(spec, x, 1e-3)
    r = fr.residuals
    ok = r["frame_gram"] < 1e-8 and r["B_trace"] < 1e-12 and r["B_norm"] < 1e-10 and r["B_routes"] < 1e-4
    ok = ok and r["A_trace"] < 1e-4
    return _ok(ok, ", ".join(f"{k}={v:.3g}" for k, v in r.items()))


def _moebius_mu(rng):
    cone = C.build("cone", C.catalog("veronese"), 0)
    chk = canonical_moebius_form_check(cone, [1.1, 1.2, 0.2])
    return _ok(abs(chk.mu_measured - 1 / math.sqrt(6)) < 1e-6, f"mu={chk.mu_measured:.12g}")


def _moebius_umbilic(rng):
    try:
        moebius_lift(SPHERE3, [0.1, 0.2, 0.3])
    except UmbilicPoint:
        return True, "round sphere rejected"
    return False, "round sphere accepted"


def _moebius_non_ideal(rng):
    graph = ImmersionSpec.create(["u", "v", "w"], ["u", "v", "w", "u^2+v^2", "u*v"])
    try:
        canonical_moebius_form_check(graph, [0.3, 0.2, 0.1])
    except NotEquality:
        return True, "graph rejected"
    return False, "non-ideal graph accepted"


# constructions ----------------------------------------------------------


def _constructions_identities(rng):
    worst = 0.0
    cases = [
        ("cylinder", C.catalog("holomorphic:z^2")),
        ("cone", C.catalog("veronese")),
        ("rotational", C.catalog("geodesic_hemisphere_H3")),
    ]
    for kind, base in cases:
        f = C.build(kind, base, C.default_extra(kind))
        lo = np.array([d[0] for d in f.domain])
        hi = np.array([d[1] for d in f.domain])
        for _ in range(5):
            x = lo + (hi - lo) * rng.uniform(0.1, 0.9, f.m)
            worst = max(worst, C.construction_identity_residual(kind, base, f, x))
    return _ok(worst < 1e-8, f"worst identity residual {worst:.3g}")


def _constructions_transfer(rng):
    out = []
    for kind, name in (("cylinder", "holomorphic:z^2"), ("cone", "veronese"), ("rotational", "geodesic_hemisphere_H3")):
        f = C.build(kind, C.catalog(name), C.default_extra(kind))
        _, summ = wintgen_scan(f, f.grid([3] * f.m), workers=1)
        out.append(summ.wintgen_ideal_on_grid)
    f = C.build("cone", C.catalog("clifford_torus"), 0)
    _, neg = wintgen_scan(f, f.grid([3] * f.m), workers=1)
    return _ok(all(out) and not neg.wintgen_ideal_on_grid, f"ideal={out}, clifford cone ideal={neg.wintgen_ideal_on_grid}")


# invariance -------------------------------------------------------------


def _invariance_metric(rng):
    spec = random_graph_immersion(rng, 3, 2)
    x = np.array([0.2, -0.1, 0.3])
    _, g0 = moebius_lift(spec, x)
    worst = 0.0
    transforms = [
        C.MoebiusTransform.translation(rng.uniform(-1, 1, spec.n)),
        C.MoebiusTransform.scaling(2.0),
        C.MoebiusTransform.inversion(np.full(spec.n, 3.0)),
    ]
    for T in transforms:
        _, g1 = moebius_lift(C.apply_transform(spec, T), x)
        worst = max(worst, float(np.max(np.abs(g1 - g0))) / (1 + float(np.max(np.abs(g0)))))
    return _ok(worst < 1e-6, f"worst relative change of g {worst:.3g}")


def _invariance_stereo(rng):
    v = C.catalog("veronese").spec
    proj = C.stereographic(v)
    x = np.array([1.0, 0.4])
    a = ddvv_report(point_geometry(v, x))
    b = ddvv_report(point_geometry(proj, x))
    return _ok(a.is_equality == b.is_equality, f"sphere side {a.is_equality}, projected {b.is_equality}")


SUITES = {
    "parser": [("examples", _parser_examples), ("print-parse fixed point", _parser_roundtrip)],
    "jets": [("sqrt example", _jets_examples), ("jets vs finite differences", _jets_fd)],
    "geometry": [("round 3-sphere", _geometry_sphere), ("normal gauge invariance", _geometry_gauge)],
    "ddvv": [
        ("normal-form oracle (16 = 16)", _ddvv_oracle),
        ("random operators obey inequality", _ddvv_random),
        ("canonical form round trip", _ddvv_canonical),
        ("grid scans", _ddvv_scan),
    ],
    "moebius": [
        ("frame relations and identities", _moebius_frame),
        ("canonical mu on the Veronese cone", _moebius_mu),
        ("umbilic rejection", _moebius_umbilic),
        ("non-ideal rejection", _moebius_non_ideal),
    ],
    "constructions": [("fundamental-form identities", _constructions_identities), ("ideality transfer", _constructions_transfer)],
    "invariance": [("Moebius metric", _invariance_metric), ("stereographic flags", _invariance_stereo)],
}


def suite_names(requested):
    names = []
    for s in requested or ["all"]:
        if s == "all":
            names.extend(SUITES)
        elif s in SUITES:
            names.append(s)
        else:
            raise KeyError(s)
    seen = []
    for n in names:
        if n not in seen:
            seen.append(n)
    return seen


def run_suites(requested, seed: int = 0):
    results = []
    for suite in suite_names(requested):
        for k, (name, fn) in enumerate(SUITES[suite]):
            rng = np.random.default_rng([seed, len(suite), k])
            t0 = time.perf_counter()
            try:
                ok, detail = fn(rng)
            except Exception as exc:  # a crashing check is a failing check
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            results.append(CheckResult(suite, name, ok, detail, time.perf_counter() - t0))
    return results
