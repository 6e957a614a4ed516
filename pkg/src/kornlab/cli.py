"""``korn-lab`` command line.

Exit status: 0 when every verdict holds, 1 on a failed verdict, 2 on a bad
configuration, 3 when a solver does not converge.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import verify as V
from .discretize import build_mesh, write_mesh_csv
from .errors import KornLabError, NoConvergence, SingularSystem
from .geometry import ThinDomain2D
from .operators import laplacian, operator_from_dict
from .report import RunConfig, emit_report
from .solve import korn_first_constant, solve_elliptic, strong_ratio_sup

EXIT_OK, EXIT_VERDICT, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3
VERIFY_CHECKS = ("hardy", "lemma21", "lemma22", "thm11", "thm13", "thm14", "thm18")
COMMANDS = tuple(f"verify-{c}" for c in VERIFY_CHECKS) + (
    "korn-first", "strong-ratio", "solve", "mesh-dump")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- helpers

def _domain_factory(spec: dict):
    """``{"family": name, "l": ...}`` or a full domain dict -> ``h -> domain``."""
    if "family" in spec:
        extra = {k: spec[k] for k in ("rho1", "a2") if k in spec}
        try:
            return V.family(spec["family"], float(spec.get("l", 1.0)), **extra)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    try:
        d = ThinDomain2D.from_dict(spec)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad domain spec: {exc}") from exc
    return lambda h: d


def _operator(spec, seed: int):
    if spec is None or spec == "laplacian":
        return laplacian(2)
    if spec == "random":
        return V.random_operator(np.random.default_rng(seed))
    try:
        return operator_from_dict(spec)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad operator spec: {exc}") from exc


def _mesh(cfg: RunConfig, d):
    nx, ny = V.default_mesh(d)
    return cfg.nx or nx, cfg.ny or ny


def _h(cfg: RunConfig) -> float:
    if not cfg.h_sweep:
        raise ConfigError("need at least one h value")
    return float(cfg.h_sweep[0])


def _suite_summary(reports):
    verdicts = [r.verdict for r in reports]
    return {"cases": len(reports), "holds": verdicts.count("holds"),
            "all_hold": all(v == "holds" for v in verdicts)}


# ---------------------------------------------------------------- commands

def _verify_hardy(cfg):
    o = cfg.options
    cases = int(o.get("cases", 200))
    eps = o.get("eps")
    if eps is not None and not 0 < float(eps) <= 1:
        raise ConfigError(f"eps must lie in (0, 1], got {eps}")
    reports = V.hardy_suite(cases, cfg.seed, quad_n=int(o.get("quad_n", 64)), dump_dir=o.get("dump_dir"),
                            eps=None if eps is None else float(eps))
    return [r.to_dict() for r in reports], _suite_summary(reports), None


def _verify_weighted_gradient(cfg):
    reports = V.weighted_gradient_suite(int(cfg.options.get("cases", 100)), cfg.seed,
                                        dump_dir=cfg.options.get("dump_dir"))
    return [r.to_dict() for r in reports], _suite_summary(reports), None


def _verify_weighted_gradient_La(cfg):
    reports = V.weighted_gradient_La_suite(int(cfg.options.get("cases", 100)), cfg.seed,
                                           dump_dir=cfg.options.get("dump_dir"))
    return [r.to_dict() for r in reports], _suite_summary(reports), None


def _sweep_result(rep):
    return [rep.to_dict()], {"exponent": rep.exponent, "all_hold": rep.verdict == "holds"}, rep.csv_rows()


def _verify_elliptic_ratio(cfg):
    scenario = cfg.options.get("scenario", "cylinder")
    if scenario not in V.KORN_LIKE:
        raise ConfigError(f"scenario must be one of {V.KORN_LIKE}")
    op = _operator(cfg.operator, cfg.seed)
    return _sweep_result(V.verify_korn_like(scenario, op, cfg.h_sweep, cfg.seed))


def _verify_sheared(cfg):
    cases = V.shear_constants_suite(int(cfg.options.get("cases", 100)), cfg.seed)
    sweep = V.verify_korn_like("hyperplane", None, cfg.h_sweep, cfg.seed,
                               a2=float(cfg.options.get("a2", 0.5)))
    ok_consts = all(c["lam_ok"] and c["Lam_ok"] for c in cases)
    gap_ok = sweep.extra["max_flattened_gap"] <= 0.02
    summary = {"constants_ok": ok_consts, "max_flattened_gap": sweep.extra["max_flattened_gap"],
               "all_hold": ok_consts and gap_ok and sweep.verdict == "holds"}
    return cases + [sweep.to_dict()], summary, sweep.csv_rows()


def _strong_sweep(cfg, bc):
    fam = cfg.domain.get("family")
    make = fam if fam and set(cfg.domain) <= {"family"} else _domain_factory(cfg.domain)
    rep = V.verify_strong_second_korn(make, cfg.h_sweep, bc,
                                      grid_check=bool(cfg.options.get("grid_check", False)))
    return _sweep_result(rep)


def _verify_strong_ends(cfg):
    return _strong_sweep(cfg, "dirichlet_ends")


def _verify_strong_periodic(cfg):
    return _strong_sweep(cfg, "periodic")


def _korn_first(cfg):
    make = _domain_factory(cfg.domain)

    def point(i, h):
        d = make(h)
        nx, ny = _mesh(cfg, d)
        r = korn_first_constant(d, nx, ny, cfg.bc)
        return {"h": h, "lhs": r.K, "rhs": None, "ratio": r.K, "residual": r.residual,
                "friedrichs": r.friedrichs, "nx": nx, "ny": ny}

    rows = V._map(point, [float(h) for h in cfg.h_sweep])
    # rhs is the fitted K ~ C/h^2 bound with 10% headroom
    C_fit = math.exp(float(np.mean([math.log(r["ratio"] * r["h"] ** 2) for r in rows])))
    for r in rows:
        r["rhs"] = 1.1 * C_fit / r["h"] ** 2
    summary = {"all_hold": all(r["lhs"] <= r["rhs"] for r in rows), "C_fit": C_fit}
    if len(rows) >= 3:
        p, c, r2 = V.fit_scaling([(r["h"], r["ratio"]) for r in rows])
        summary.update(exponent=p, log_constant=c, r2=r2, window=[-2.3, -1.7],
                       all_hold=summary["all_hold"] and -2.3 <= p <= -1.7)
    return rows, summary, [(r["h"], r["lhs"], r["rhs"], r["ratio"]) for r in rows]


def _strong_ratio(cfg):
    make = _domain_factory(cfg.domain)
    rows = []
    for h in cfg.h_sweep:
        d = make(float(h))
        nx, ny = _mesh(cfg, d)
        r = strong_ratio_sup(d, nx, ny, cfg.bc)
        rows.append({"h": float(h), "lhs": r.R, "rhs": 1.0, "ratio": r.R, "t_star": r.t,
                     "residual": r.residual, "probe_ratio": r.probe_ratio, "nx": nx, "ny": ny})
    summary = {"all_hold": True}
    if len(rows) >= 3:
        p, c, r2 = V.fit_scaling([(r["h"], r["ratio"]) for r in rows])
        summary.update(exponent=p, r2=r2, window=[-0.4, 0.4], all_hold=-0.4 <= p <= 0.4)
    return rows, summary, [(r["h"], r["lhs"], r["rhs"], r["ratio"]) for r in rows]


def _solve(cfg):
    h = _h(cfg)
    d = _domain_factory(cfg.domain)(h)
    nx, ny = _mesh(cfg, d)
    mesh = build_mesh(d, nx, ny)
    op = _operator(cfg.operator, cfg.seed)
    data = V.random_boundary_data(np.random.default_rng(cfg.seed), d.l)
    u = solve_elliptic(op, mesh, data)
    n = V._elliptic_norms(mesh, u)
    if cfg.options.get("field_csv"):
        write_mesh_csv(mesh, cfg.options["field_csv"], {"u": u})
    rec = {"h": h, "nx": nx, "ny": ny, **n, "ratio": V.elliptic_ratio(n, h)}
    return [rec], {"all_hold": True}, None


def _mesh_dump(cfg):
    h = _h(cfg)
    d = _domain_factory(cfg.domain)(h)
    nx, ny = _mesh(cfg, d)
    mesh = build_mesh(d, nx, ny)
    path = cfg.options.get("mesh_csv") or "mesh.csv"
    write_mesh_csv(mesh, path)
    return [{"h": h, "nx": nx, "ny": ny, "nodes": mesh.n_nodes, "aspect_ratio": mesh.aspect_ratio,
             "path": path}], {"all_hold": True}, None


DISPATCH = {
    "verify-hardy": _verify_hardy, "verify-lemma21": _verify_weighted_gradient,
    "verify-lemma22": _verify_weighted_gradient_La, "verify-thm11": _verify_elliptic_ratio,
    "verify-thm13": _verify_sheared, "verify-thm14": _verify_strong_ends,
    "verify-thm18": _verify_strong_periodic, "korn-first": _korn_first,
    "strong-ratio": _strong_ratio, "solve": _solve, "mesh-dump": _mesh_dump,
}


def run(cfg: RunConfig, timestamp: str | None = None):
    """Execute a configuration; returns ``(exit_code, report)``."""
    if cfg.command not in DISPATCH:
        return EXIT_CONFIG, {"error": f"unknown command {cfg.command!r}"}
    if cfg.bc not in ("dirichlet_ends", "periodic"):
        return EXIT_CONFIG, {"error": f"unknown bc {cfg.bc!r}"}
    try:
        records, summary, csv_rows = DISPATCH[cfg.command](cfg)
    except (NoConvergence, SingularSystem) as exc:
        return EXIT_SOLVER, {"error": str(exc)}
    except (ConfigError, KornLabError, ValueError) as exc:
        return EXIT_CONFIG, {"error": str(exc)}
    report = emit_report(cfg, records, summary, csv_rows, timestamp)
    return (EXIT_OK if summary.get("all_hold", True) else EXIT_VERDICT), report


# ---------------------------------------------------------------- argument parsing

def _floats(text: str):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from exc


def _common(p: argparse.ArgumentParser, sweep=True):
    p.add_argument("--config", help="JSON run configuration (flags override it)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="report JSON path")
    p.add_argument("--csv", help="sweep curve CSV path")
    p.add_argument("--domain", help="family name (rect, cap, curved, sheared) or JSON domain")
    p.add_argument("--l", type=float)
    p.add_argument("--nx", type=int)
    p.add_argument("--ny", type=int)
    p.add_argument("--bc", choices=["dirichlet-ends", "periodic"])
    p.add_argument("--op", help="laplacian, random, or a JSON operator")
    if sweep:
        p.add_argument("--h-sweep", type=_floats, dest="h_sweep")
    p.add_argument("--h", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="korn-lab", description="Korn-type inequality checks and constants on thin domains.")
    sub = parser.add_subparsers(dest="command", required=True)
    ver = sub.add_parser("verify", help="inequality suites and h-sweeps")
    vsub = ver.add_subparsers(dest="check", required=True)
    for name in VERIFY_CHECKS:
        p = vsub.add_parser(name)
        _common(p)
        p.add_argument("--cases", type=int)
        p.add_argument("--dump-dir", dest="dump_dir")
        if name == "hardy":
            p.add_argument("--eps", type=float)
        if name == "thm11":
            p.add_argument("--scenario", choices=V.KORN_LIKE)
        if name in ("thm14", "thm18"):
            p.add_argument("--grid-check", action="store_true", dest="grid_check", default=None)
    for name in ("korn-first", "strong-ratio", "solve", "mesh-dump"):
        p = sub.add_parser(name)
        _common(p)
        if name == "solve":
            p.add_argument("--field-csv", dest="field_csv")
        if name == "mesh-dump":
            p.add_argument("--mesh-csv", dest="mesh_csv")
    return parser


OPTION_KEYS = ("cases", "eps", "scenario", "grid_check", "dump_dir", "field_csv", "mesh_csv")


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    command = f"verify-{ns.check}" if ns.command == "verify" else ns.command
    if ns.config:
        with open(ns.config) as fh:
            cfg = RunConfig.from_dict(json.load(fh))
        cfg.command = command
    else:
        cfg = RunConfig(command)
    if ns.seed is not None:
        cfg.seed = ns.seed
    for key in ("out", "csv", "nx", "ny"):
        if getattr(ns, key) is not None:
            setattr(cfg, key, getattr(ns, key))
    if ns.bc is not None:
        cfg.bc = ns.bc.replace("-", "_")
    if getattr(ns, "h_sweep", None) is not None:
        cfg.h_sweep = ns.h_sweep
    if ns.h is not None:
        cfg.h_sweep = [ns.h]
    if ns.domain is not None:
        text = ns.domain.strip()
        cfg.domain = json.loads(text) if text.startswith("{") else {"family": text}
    if ns.l is not None:
        cfg.domain = dict(cfg.domain, l=ns.l)
    if ns.op is not None:
        text = ns.op.strip()
        cfg.operator = json.loads(text) if text.startswith("{") else text
    for key in OPTION_KEYS:
        val = getattr(ns, key, None)
        if val is not None:
            cfg.options = dict(cfg.options, **{key: val})
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_CONFIG
    try:
        cfg = config_from_args(ns)
    except (OSError, ValueError) as exc:
        print(f"korn-lab: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code, report = run(cfg)
    if "error" in report:
        print(f"korn-lab: {report['error']}", file=sys.stderr)
    else:
        s = report["summary"]
        print(f"korn-lab {cfg.command}: {'all verdicts hold' if code == 0 else 'verdict failed'}"
              + (f" (exponent {s['exponent']:.4f})" if "exponent" in s else ""))
    return code


if __name__ == "__main__":
    sys.exit(main())
