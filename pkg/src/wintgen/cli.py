"""Command line interface: ``wintgen {check,moebius,construct,verify,ellipse}``.

Exit codes: 0 success, 1 engine error, 2 config error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import constructions as C
from .config import RunConfig, config_for_spec, dumps_config, load_config
from .ddvv import commutator_equality, commutator_sides, curvature_ellipse, wintgen_scan
from .errors import ConfigError, UmbilicPoint, WintgenError
from .geometry import point_geometry
from .moebius import canonical_moebius_form_check, integrability_residuals, moebius_frame, tol_fd
from .report import dumps, records_to_csv
from .verify import SUITES, run_suites

EXIT_OK, EXIT_ENGINE, EXIT_CONFIG = 0, 1, 2


def _rho_from_report(rep, m):
    # sum of squared traceless parts is sqrt(commutator_rhs)
    tau2 = math.sqrt(max(rep.commutator_rhs, 0.0))
    return math.sqrt(m * tau2 / (m - 1)) if not rep.is_umbilic else None


def point_record(index: int, rep, m: int) -> dict:
    if not rep.ok:
        return {"type": "skip", "index": index, "point": list(rep.point), "reason": rep.error}
    residuals = {"commutator": abs(math.sqrt(max(rep.commutator_rhs, 0.0)) - math.sqrt(max(rep.commutator_lhs, 0.0)))}
    residuals["canonical"] = rep.canonical.residual if rep.canonical is not None else None
    return {
        "type": "point",
        "index": index,
        "point": list(rep.point),
        "s": rep.s,
        "s_perp": rep.s_perp,
        "H2": rep.H2,
        "deficit": rep.deficit,
        "umbilic": rep.is_umbilic,
        "equality": rep.is_equality,
        "mu0": rep.mu0,
        "rho": _rho_from_report(rep, m),
        "residuals": residuals,
    }


def check_records(cfg: RunConfig, workers=None) -> list:
    """Point/skip records followed by one summary record."""
    grid = cfg.grid_points()
    reports, summary = wintgen_scan(cfg.spec, grid, cfg.ambient_c, cfg.tol_exact, workers)
    records = [point_record(i, r, cfg.spec.m) for i, r in enumerate(reports)]
    worst = {}
    for rec in records:
        for k, v in rec.get("residuals", {}).items():
            if v is not None:
                worst[k] = max(worst.get(k, 0.0), v)
    head = {"type": "summary"}
    head.update(summary.as_dict())
    head["skipped"] = sum(r["type"] == "skip" for r in records)
    head["worst_residuals"] = worst
    head["config"] = cfg.to_dict()
    head["version"] = __version__
    records.append(head)
    return records


def _emit(text: str, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_check(args) -> int:
    cfg = load_config(args.config)
    records = check_records(cfg)
    jsonl = "".join(dumps(r) + "\n" for r in records)
    if args.csv and not args.out:
        sys.stdout.write(records_to_csv(records))
        return EXIT_OK
    _emit(jsonl, args.out)
    if args.csv:
        Path(args.out).with_suffix(".csv").write_text(records_to_csv(records), encoding="utf-8")
    return EXIT_OK


def _parse_point(text: str, m: int) -> np.ndarray:
    try:
        x = np.array([float(v) for v in text.split(",")], dtype=float)
    except ValueError:
        raise ConfigError(f"--point must be comma-separated numbers, got {text!r}") from None
    if x.shape != (m,):
        raise ConfigError(f"--point needs {m} coordinates, got {x.size}")
    return x


def moebius_record(cfg: RunConfig, x) -> dict:
    spec = cfg.spec
    order = int(cfg.options["jet_order"])
    fr = moebius_frame(spec, x, cfg.fd_step, order)
    integ = integrability_residuals(spec, x, cfg.fd_step, order)
    try:
        chk = canonical_moebius_form_check(spec, x, cfg.tol_exact)
        canonical = {"mu": chk.mu_measured, "mu_expected": chk.mu_expected, "residual": chk.residual_to_model}
    except WintgenError as exc:
        canonical = {"error": f"{type(exc).__name__}: {exc}"}
    return {
        "type": "moebius",
        "point": list(x),
        "rho": fr.rho,
        "g": fr.g,
        "B": fr.B,
        "B_fd": fr.B_fd,
        "A": fr.A,
        "C": fr.C,
        "kappa": fr.kappa,
        "residuals": fr.residuals,
        "integrability": integ,
        "tol_fd": tol_fd(cfg.fd_step, cfg.options["tol_fd_constant"]),
        "canonical": canonical,
        "version": __version__,
    }


def cmd_moebius(args) -> int:
    cfg = load_config(args.config)
    x = _parse_point(args.point, cfg.spec.m)
    if not cfg.spec.contains(x):
        raise ConfigError(f"point {args.point} lies outside the domain")
    sys.stdout.write(dumps(moebius_record(cfg, x)) + "\n")
    return EXIT_OK


def resolve_base(text: str):
    """A catalog name, or a path to a config file whose immersion is the base."""
    if Path(text).is_file():
        return load_config(text).spec
    return C.catalog(text)


def construct_config(kind: str, base_text: str, extra=None) -> RunConfig:
    base = resolve_base(base_text)
    extra = C.default_extra(kind) if extra is None else extra
    spec = C.build(kind, base, extra)
    return config_for_spec(spec, name=f"{kind} over {base_text}")


def cmd_construct(args) -> int:
    cfg = construct_config(args.kind, args.base, args.extra)
    _emit(dumps_config(cfg), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    suites = (args.suite or []) + (args.suites or []) or ["all"]
    unknown = [s for s in suites if s != "all" and s not in SUITES]
    if unknown:
        raise ConfigError(f"unknown suite(s) {unknown}; choose from {['all', *SUITES]}")
    results = run_suites(suites, args.seed)
    width = max(len(f"{r.suite}/{r.name}") for r in results)
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        print(f"{status}  {f'{r.suite}/{r.name}':<{width}}  {r.seconds:7.2f}s  {r.detail}")
    failed = [r for r in results if not r.ok]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    if failed:
        print(f"first failure: {failed[0].suite}/{failed[0].name}: {failed[0].detail}", file=sys.stderr)
        return EXIT_ENGINE
    return EXIT_OK


def ellipse_records(cfg: RunConfig) -> list:
    records = []
    circles = agree = evaluated = degenerate = 0
    for i, x in enumerate(cfg.grid_points()):
        try:
            g = point_geometry(cfg.spec, x)
        except WintgenError as exc:
            if cfg.spec.m != 2:
                raise
            records.append({"type": "skip", "index": i, "point": list(x), "reason": f"{type(exc).__name__}: {exc}"})
            continue
        e = curvature_ellipse(g, cfg.tol_exact)
        lhs, rhs = commutator_sides(g.h)
        eq = commutator_equality(lhs, rhs, cfg.tol_exact)
        evaluated += 1
        degenerate += e.degenerate
        circles += e.is_circle
        # a point ellipse is not a circle, so compare against equality with a nonzero ellipse
        agree += e.is_circle == (eq and not e.degenerate)
        records.append(
            {
                "type": "ellipse",
                "index": i,
                "point": list(x),
                "center": e.center,
                "semi_axes": list(e.semi_axes),
                "is_circle": e.is_circle,
                "degenerate": e.degenerate,
                "commutator_equality": eq,
            }
        )
    records.append(
        {
            "type": "summary",
            "points": len(records),
            "evaluated": evaluated,
            "degenerate": degenerate,
            "circle_away_from_degenerate": evaluated > degenerate and circles == evaluated - degenerate,
            "agrees_with_equality": agree == evaluated,
            "version": __version__,
        }
    )
    return records


def cmd_ellipse(args) -> int:
    cfg = load_config(args.config)
    sys.stdout.write("".join(dumps(r) + "\n" for r in ellipse_records(cfg)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wintgen", description="DDVV and Moebius analysis of parametric immersions.")
    p.add_argument("--version", action="version", version=f"wintgen {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="scan a config grid for DDVV equality")
    c.add_argument("--config", required=True)
    c.add_argument("--out", help="write the JSON-lines report here instead of stdout")
    c.add_argument("--csv", action="store_true", help="also export CSV (next to --out, else to stdout)")
    c.set_defaults(func=cmd_check)

    mo = sub.add_parser("moebius", help="Moebius frame report at one point")
    mo.add_argument("--config", required=True)
    mo.add_argument("--point", required=True, help='comma-separated coordinates, e.g. "1.0,0.5,0.2"')
    mo.set_defaults(func=cmd_moebius)

    co = sub.add_parser("construct", help="write the config of a cone, cylinder or rotational construction")
    co.add_argument("kind", choices=["cylinder", "cone", "rotational"])
    co.add_argument("--base", required=True, help="catalog name (e.g. veronese, holomorphic:z^2) or config path")
    co.add_argument("--extra", type=int, help="extra flat dimensions / sphere dimension")
    co.add_argument("--out")
    co.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", help="run the property suites")
    v.add_argument("suites", nargs="*", help="suite names (same as --suite)")
    v.add_argument("--suite", action="append", help="suite name; repeatable (default: all)")
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("ellipse", help="curvature ellipse report for a surface config")
    e.add_argument("--config", required=True)
    e.set_defaults(func=cmd_ellipse)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UmbilicPoint as exc:
        print(f"engine error: UmbilicPoint: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    except WintgenError as exc:
        print(f"engine error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ENGINE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
