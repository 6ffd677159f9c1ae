"""Configuration loading and end-to-end scenario runs shared by the CLI and tests."""
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from importlib import resources

import jsonschema

from .dynamics import SCENARIOS, EquivariantMap, PushSpec, Scenario, make_scenario
from .estimators import (
    COINCIDENT,
    TRACKED,
    TrackingEstimator,
    homology_rotation,
    rotation_speed,
    run_orbit,
    time_cocycle_mean,
)
from .exceptions import ConfigInvalid, NotLoxodromic, OutsideDisk
from .geometry import disk_point
from .group import build_group
from .structure import GeodesicSample, partition_classes, theorem_a_report

_positive = {"type": "number", "exclusiveMinimum": 0}

SCENARIO_SCHEMA = {
    "type": "object",
    "properties": {
        "genus": {"type": "integer", "minimum": 2},
        "scenario": {"enum": list(SCENARIOS)},
        "pushes": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "coreWord": {"type": "string", "minLength": 1},
                    "speed": {"type": "number"},
                    "bumpRadius": {"anyOf": [_positive, {"type": "null"}]},
                    "profile": {"enum": ["quartic"]},
                },
                "required": ["coreWord", "speed"],
                "additionalProperties": False,
            },
        },
        "seeds": {
            "anyOf": [
                {"const": "auto"},
                {"type": "string", "pattern": "^grid:[1-9][0-9]*$"},
                {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                },
            ]
        },
        "N": {"type": "integer", "minimum": 100, "maximum": 10**7},
        "h": _positive,
        "k": {"type": "integer", "minimum": 1},
        "speedFloor": _positive,
        "gapFloor": _positive,
        "thetaMin": _positive,
        "maxWordLen": {"type": "integer", "minimum": 1, "maximum": 12},
        "out": {"type": "string"},
    },
    "required": ["genus"],
    "oneOf": [{"required": ["scenario"]}, {"required": ["pushes"]}],
    "additionalProperties": False,
}

TORUS_SCHEMA = {
    "type": "object",
    "properties": {
        "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "T": _positive,
        "h": _positive,
        "seeds": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        },
        "length": {"type": "integer", "minimum": 1},
        "out": {"type": "string"},
    },
    "additionalProperties": False,
}

GRAPH_SCHEMA = {
    "type": "object",
    "properties": {
        "nodes": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "from": {"type": "string"},
                    "to": {"type": "string"},
                    "label": {"type": "array", "items": {"type": ["integer", "string", "number"]}},
                },
                "required": ["from", "to", "label"],
                "additionalProperties": False,
            },
        },
    },
    "required": ["nodes", "edges"],
}

DEFAULTS = {
    "seeds": "auto",
    "N": 10_000,
    "h": 1e-2,
    "k": 10,
    "speedFloor": 1e-3,
    "gapFloor": 1e-2,
    "thetaMin": 0.05,
    "maxWordLen": 8,
}

TORUS_DEFAULTS = {"alpha": (math.sqrt(5.0) - 1.0) / 2.0, "T": 1e4, "h": 1e-3, "seeds": [[0.3, 0.1], [0.71, 0.45]], "length": 100_000}


def resolve_path(path):
    """Use ``path`` if it exists, else look it up among the bundled data files."""
    if os.path.exists(path):
        return path
    if not os.path.isabs(path):
        bundled = resources.files("surfrot") / "data" / path
        if bundled.is_file():
            return str(bundled)
    raise ConfigInvalid(f"{path}: file not found")


def load_json(path):
    path = resolve_path(path)
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def validate(config, schema, defaults=None):
    """Schema-check a config and fill defaults; errors name the offending field."""
    errors = sorted(jsonschema.Draft7Validator(schema).iter_errors(config), key=lambda e: list(e.path))
    if errors:
        msgs = []
        for e in errors:
            where = "/".join(str(p) for p in e.path) or "<root>"
            msgs.append(f"{where}: {e.message}")
        raise ConfigInvalid("; ".join(msgs))
    out = dict(defaults or {})
    out.update(config)
    return out


def build_dynamics(cfg, G):
    """Scenario object (maps, seeds, expectations) for a validated config."""
    if "scenario" in cfg:
        return make_scenario(cfg["scenario"], G, k=cfg["k"], h=cfg["h"])
    try:
        specs = [
            PushSpec(p["coreWord"], p["speed"], p.get("bumpRadius"), p.get("profile", "quartic")) for p in cfg["pushes"]
        ]
        m = EquivariantMap(G, specs, h=cfg["h"])
    except (ValueError, NotLoxodromic) as exc:
        raise ConfigInvalid(f"pushes: {exc}") from exc
    seeds = []
    for i, p in enumerate(m.pushes):
        seeds.append({"label": f"core-{i}", "point": G.reduce(p.axis.point_at(0.0))[0], "homology": None})
    return Scenario("custom", m, [m], seeds, {})


def resolve_seeds(cfg, scenario, G):
    spec = cfg["seeds"]
    if spec == "auto":
        return [(s["label"], s["point"]) for s in scenario.seeds]
    if isinstance(spec, str):
        k = int(spec.split(":")[1])
        return grid_seeds(G, k)
    out = []
    for i, (x, y) in enumerate(spec):
        try:
            p = disk_point(complex(x, y))
        except OutsideDisk as exc:
            raise ConfigInvalid(f"seeds/{i}: {exc}") from exc
        if not G.in_domain(p):
            raise ConfigInvalid(f"seeds/{i}: point is not in the fundamental domain")
        out.append((f"seed-{i}", p))
    return out


def grid_seeds(G, k):
    box = abs(G.domain_vertices[0])
    out = []
    for i in range(k):
        for j in range(k):
            p = complex(-box + (2 * i + 1) * box / k, -box + (2 * j + 1) * box / k)
            if abs(p) < 1 and G.in_domain(p):
                out.append((f"grid-{i}-{j}", p))
    return out


def analyze_seed(cfg, scenario, label, point, estimate=True):
    """Orbit, speeds, homology and (optionally) tracking for one seed."""
    rec = run_orbit(scenario.dynamics, point, cfg["N"], with_backward=estimate)
    vec, _ = homology_rotation(rec)
    fwd, bwd, diag = rotation_speed(rec)
    out = {
        "label": label,
        "seed": point,
        "record": rec,
        "homology": vec,
        "summary": {
            "label": label,
            "seed": point,
            "theta_forward": fwd,
            "theta_backward": bwd,
            "homology": vec,
            "L_final": float(rec.L[-1]),
            "subadditivity_violations": diag["subadditivity_violations"],
        },
    }
    if estimate:
        est = TrackingEstimator(cfg["speedFloor"], cfg["gapFloor"]).fit(rec)
        out["estimator"] = est
        out["summary"]["tracking"] = est.estimate_.to_dict()
        if est.status_ == TRACKED:
            mean_t, _ = time_cocycle_mean(rec, est.estimate_)
            out["summary"]["time_cocycle_mean"] = mean_t
    return out


def _seed_job(args):
    cfg, label, point, estimate = args
    G = build_group(cfg["genus"])
    scenario = build_dynamics(cfg, G)
    res = analyze_seed(cfg, scenario, label, point, estimate)
    res.pop("record")
    est = res.pop("estimator", None)
    if est is not None:
        res["estimate"] = est.estimate_
    return res


def run_seeds(cfg, estimate=True, jobs=1):
    G = build_group(cfg["genus"])
    scenario = build_dynamics(cfg, G)
    seeds = resolve_seeds(cfg, scenario, G)
    if jobs > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_seed_job, [(cfg, l, p, estimate) for l, p in seeds]))
    else:
        results = []
        for l, p in seeds:
            r = analyze_seed(cfg, scenario, l, p, estimate)
            if "estimator" in r:
                r["estimate"] = r["estimator"].estimate_
            results.append(r)
    return G, scenario, results


def classify_results(cfg, G, results):
    """Partition tracked seeds and check the class-shape constraints."""
    samples = []
    vectors = {}
    for r in results:
        est = r.get("estimate")
        if est is None or est.status != TRACKED:
            continue
        vec = r["homology"]
        samples.append(GeodesicSample(r["label"], [est], vec))
        vectors[r["label"]] = vec
    part = partition_classes(samples, G, cfg["thetaMin"], cfg["maxWordLen"])
    report = theorem_a_report(part, vectors, G.genus)
    return samples, part, report


def skipped(results):
    return [
        {"label": r["label"], "status": r["estimate"].status}
        for r in results
        if r.get("estimate") is not None and r["estimate"].status in (COINCIDENT, "NoSpeed")
    ]


__all__ = [
    "SCENARIO_SCHEMA",
    "TORUS_SCHEMA",
    "GRAPH_SCHEMA",
    "load_json",
    "validate",
    "run_seeds",
    "classify_results",
]
