"""Command-line front end.

Exit codes: 0 success, 1 failed check, 2 configuration error,
3 numerical breakdown.
"""
import argparse
import os
import sys
import time

from . import __version__, checks, experiments
from .exceptions import (
    BudgetExceeded,
    CatalogInsufficient,
    ConfigInvalid,
    DegenerateSlope,
    EmitRefused,
    NumericalOverflow,
    ReductionStalled,
    StepBlowup,
    SurfRotError,
)
from .group import build_group
from .io import config_hash, emit
from .structure import LabeledGraph, cycle_mean_polytope
from .torus import OxtobyField, TorusPoint, cutting_sequence, is_balanced, torus_rotation_vector

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
NUMERIC_ERRORS = (StepBlowup, NumericalOverflow, ReductionStalled, CatalogInsufficient, BudgetExceeded)


def _provenance(cfg, command):
    return {"command": command, "config_hash": config_hash(cfg), "version": __version__}


def _scenario_config(args):
    if args.config is None:
        raise ConfigInvalid("a scenario config is required (--config PATH)")
    raw = experiments.load_json(args.config)
    if args.seed_grid is not None:
        raw = dict(raw, seeds=f"grid:{args.seed_grid}")
    return experiments.validate(raw, experiments.SCENARIO_SCHEMA, experiments.DEFAULTS)


def cmd_selftest_geom(args):
    n = args.samples
    rows = checks.run_suite(n, seed=0)
    report = {
        "checks": [{"check": c, "n": k, "value": v, "tolerance": t, "pass": p} for c, k, v, t, p in rows],
        "provenance": _provenance({"samples": n}, "selftest-geom"),
    }
    series = {"selftest-geom-residuals": (["check", "n", "value", "tolerance", "pass"], rows)}
    emit(report, args.out, "selftest-geom", args.format, series)
    for c, _, v, t, p in rows:
        print(f"{'PASS' if p else 'FAIL'} {c} value={v:.3g} tol={t:.3g}")
    return EXIT_OK if all(r[-1] for r in rows) else EXIT_FAIL


def cmd_build_surface(args):
    if args.config is not None:
        raw = experiments.load_json(args.config)
        genus = raw.get("genus")
        if not isinstance(genus, int):
            raise ConfigInvalid("genus: an integer is required")
    else:
        genus = args.genus
    G = build_group(genus)
    report = {"group": G.to_dict(), "provenance": _provenance({"genus": genus}, "build-surface")}
    emit(report, args.out, "surface", args.format)
    R = G.element(G.relator)
    ok = R.isclose(R.identity(), 1e-8)
    print(f"genus {genus}: relator {'ok' if ok else 'FAILED'}; area {G.domain_area():.12g}")
    return EXIT_OK if ok else EXIT_FAIL


def _series(results):
    out = {}
    for r in results:
        rec = r.get("record")
        if rec is None:
            continue
        part = rec.homology_partials()
        est = r.get("estimate")
        rows = []
        for n in range(rec.N + 1):
            res = est.residuals[n - 1] if est is not None and est.status == "Tracked" and n > 0 else ""
            rows.append([n, float(rec.L[n]), float(rec.L[n] / n) if n else 0.0, res] + [int(x) for x in part[n]])
        header = ["n", "L_n", "theta_n", "residual_n"] + [f"h{i}" for i in range(part.shape[1])]
        out[f"series-{r['label']}"] = (header, rows)
    return out


def cmd_simulate(args, estimate=False):
    cfg = _scenario_config(args)
    G, scenario, results = experiments.run_seeds(cfg, estimate=estimate, jobs=args.jobs)
    name = "estimate" if estimate else "simulate"
    report = {
        "scenario": scenario.name,
        "seeds": [r["summary"] for r in results],
        "provenance": _provenance(cfg, name),
    }
    emit(report, args.out, name, args.format, _series(results))
    for r in results:
        s = r["summary"]
        status = s.get("tracking", {}).get("status", "-")
        print(f"{s['label']}: theta={s['theta_forward']:.6g} homology={[str(c) for c in s['homology']]} status={status}")
    return EXIT_OK


def cmd_classify(args):
    cfg = _scenario_config(args)
    G, scenario, results = experiments.run_seeds(cfg, estimate=True, jobs=args.jobs)
    samples, part, report = experiments.classify_results(cfg, G, results)
    out = {
        "scenario": scenario.name,
        "seeds": [r["summary"] for r in results],
        "partition": part.to_dict(),
        "theorem_a": report,
        "skipped": experiments.skipped(results),
        "provenance": _provenance(cfg, "classify"),
    }
    emit(out, args.out, "classify", args.format)
    for cls, kind in zip(part.classes, part.kinds):
        print(f"{kind}: {sorted(cls)}")
    print(f"shape checks: {'pass' if report['all_pass'] else 'FAIL'}")
    return EXIT_OK if report["all_pass"] else EXIT_FAIL


def cmd_polytope(args):
    path = args.graph or args.config
    if path is None:
        raise ConfigInvalid("a graph JSON path is required")
    raw = experiments.load_json(path)
    experiments.validate(raw, experiments.GRAPH_SCHEMA)
    try:
        graph = LabeledGraph.from_dict(raw)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigInvalid(str(exc)) from exc
    poly = cycle_mean_polytope(graph)
    report = {"polytope": poly.to_dict(), "provenance": _provenance(raw, "polytope")}
    emit(report, args.out, "polytope", args.format)
    for v in poly.vertices:
        print("vertex", " ".join(str(x) for x in v))
    return EXIT_OK


def cmd_torus(args):
    raw = experiments.load_json(args.config) if args.config else {}
    cfg = experiments.validate(raw, experiments.TORUS_SCHEMA, experiments.TORUS_DEFAULTS)
    F = OxtobyField(cfg["alpha"])
    runs = []
    series = {}
    for i, (x, y) in enumerate(cfg["seeds"]):
        v, diag = torus_rotation_vector(F, TorusPoint(x, y), cfg["T"], cfg["h"])
        runs.append({"seed": [x, y], "v": list(v), "slope": diag["slope"], "cauchy_tail": diag["cauchy_tail"]})
        series[f"torus-rotation-{i}"] = (
            ["time", "v1", "v2"],
            [[float(t), float(a), float(b)] for t, a, b in zip(diag["times"], diag["v1"], diag["v2"])],
        )
    try:
        word, density = cutting_sequence(cfg["alpha"], cfg["length"])
    except DegenerateSlope as exc:
        raise ConfigInvalid(str(exc)) from exc
    report = {
        "alpha": cfg["alpha"],
        "rotation": runs,
        "cutting": {"length": cfg["length"], "b_density": density, "expected": 1.0 / (1.0 + cfg["alpha"]),
                    "balanced_prefix": is_balanced(word[:2000], 200)},
        "provenance": _provenance(cfg, "torus"),
    }
    emit(report, args.out, "torus", args.format, series)
    with open(os.path.join(args.out, "cutting-sequence.txt"), "w") as fh:
        fh.write(word + "\n")
    for r in runs:
        print(f"seed {r['seed']}: slope {r['slope']:.8g} (alpha {cfg['alpha']:.8g})")
    print(f"b density {density:.8g} (expected {1.0 / (1.0 + cfg['alpha']):.8g})")
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for independent seeds")
    common.add_argument("--seed-grid", type=int, default=None, metavar="K", help="use a KxK grid of seeds")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    p = argparse.ArgumentParser(prog="surfrot", description="Rotation theory laboratory for hyperbolic surfaces")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("selftest-geom", parents=[common], help="run the disk-kernel identity suite")
    s.add_argument("--samples", type=int, default=10_000)
    s.set_defaults(func=cmd_selftest_geom)

    s = sub.add_parser("build-surface", parents=[common], help="emit the genus-g group description")
    s.add_argument("--genus", type=int, default=2)
    s.set_defaults(func=cmd_build_surface)

    for name, fn in (
        ("simulate", lambda a: cmd_simulate(a, False)),
        ("estimate", lambda a: cmd_simulate(a, True)),
        ("classify", cmd_classify),
    ):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("scenario_config", nargs="?", help="scenario JSON (same as --config)")
        s.set_defaults(func=fn)

    s = sub.add_parser("polytope", parents=[common], help="rotation polytope of a labelled graph")
    s.add_argument("graph", nargs="?", help="graph JSON")
    s.set_defaults(func=cmd_polytope)

    s = sub.add_parser("torus", parents=[common], help="Oxtoby flow and cutting sequence experiments")
    s.set_defaults(func=cmd_torus)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "scenario_config", None) and args.config is None:
        args.config = args.scenario_config
    if args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    start = time.perf_counter()
    try:
        code = args.func(args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"numerical breakdown: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except EmitRefused as exc:
        print(f"emission refused: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except SurfRotError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(f"wall time {time.perf_counter() - start:.2f}s", file=sys.stderr)
    return code


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
