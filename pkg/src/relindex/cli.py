"""Batch entry point: ``relindex verify | experiment CONFIG | sweep CONFIG``.

Exit codes: 0 all contracts hold, 1 a contract failed, 2 ambiguous kernel
(or an internal error in ``verify``), 3 invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import os
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .errors import AmbiguousKernelError, ConfigError, RelIndexError
from .algebra import rep_apply
from .fredholm import (
    central_bump,
    commutator_norm,
    defect_report,
    opnorm,
    square_defect,
    standard_test_elements,
)
from .index import relative_index_experiment
from .models import (
    DomainWallConfig,
    MassProfile,
    WALL_FRACTION,
    boundary_patterns,
    build_agreeing_pair,
    bulk_gap_floor,
    pattern_label,
)
from .surgery import CChoice, diamond, endpoint_check, homotopy_operator, lipschitz_constant, t_grid
from .symbolic.rewrite import RewriteSystem
from .symbolic.verify import verify_homotopy, verify_proposition

ENDPOINT_TOL = 1e-12
NOISE_FLOOR = 1e-13
PROFILE_LIMIT = 20

INDEX_COLUMNS = ("ind_x", "ind_xt", "ind_x_diamond_xt", "ind_xt_diamond_x", "residual")
DEFECT_COLUMNS = ("commutator", "corner_sigma5", "agreement_sigma5", "bulk_gap")
SWEEP_COLUMNS = ("pattern", "N") + DEFECT_COLUMNS + INDEX_COLUMNS
MONOTONE = ("commutator", "corner_sigma5", "agreement_sigma5")

_MASS = {
    "oneOf": [
        {"type": "object", "additionalProperties": False,
         "required": ["breakpoints", "values"],
         "properties": {"breakpoints": {"type": "array", "items": {"type": "number"}},
                        "values": {"type": "array", "items": {"type": "number"}, "minItems": 1}}},
        {"type": "object", "additionalProperties": False,
         "required": ["signs"],
         "properties": {"signs": {"type": "array", "minItems": 3, "maxItems": 3,
                                  "items": {"enum": [-1, 1]}},
                        "wall_fraction": {"type": "number", "exclusiveMinimum": 0,
                                          "exclusiveMaximum": 1},
                        "magnitude": {"type": "number", "exclusiveMinimum": 0}}},
    ]
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["mode", "model"],
    "properties": {
        "mode": {"enum": ["verify", "experiment", "sweep"]},
        "seed": {"type": "integer", "minimum": 0},
        "model": {
            "type": "object",
            "additionalProperties": False,
            "required": ["sites", "mass", "mass_tilde"],
            "properties": {
                "half_length": {"type": "number", "exclusiveMinimum": 0},
                "sites": {"type": "integer", "minimum": 2},
                "mass": _MASS,
                "mass_tilde": _MASS,
                "wilson_r": {"type": "number", "minimum": 0},
                "middle": {"type": "array", "items": {"type": "number"},
                           "minItems": 2, "maxItems": 2},
                "thresholds": {
                    "type": "object", "additionalProperties": False,
                    "properties": {"min_gap_ratio": {"type": "number", "exclusiveMinimum": 1},
                                   "cutoff_factor": {"type": "number", "exclusiveMinimum": 0}}},
                "boundary": {"enum": ["chiral", "dirichlet"]},
            },
        },
        "surgery": {
            "type": "object", "additionalProperties": False,
            "properties": {"c_choice": {"enum": [c.value for c in CChoice]},
                           "t_grid": {"type": "integer", "minimum": 2}},
        },
        "sweep": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "sites": {"type": "array", "minItems": 1,
                          "items": {"type": "integer", "minimum": 2}},
                "scaling": {"enum": ["fixed_spacing", "fixed_length"]},
                "patterns": {"enum": ["boundary"]},
                "middle_sign": {"enum": [-1, 1]},
            },
        },
        "output": {
            "type": "object", "additionalProperties": False,
            "properties": {"directory": {"type": "string"},
                           "formats": {"type": "array", "minItems": 1,
                                       "items": {"enum": ["json", "csv"]}}},
        },
    },
}


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {where}: {exc.message}") from None
    return cfg


def _mass(section: dict, half_length: float) -> MassProfile:
    if "signs" in section:
        return MassProfile.walls(section["signs"], half_length,
                                 section.get("wall_fraction", WALL_FRACTION),
                                 section.get("magnitude", 1.0))
    return MassProfile(tuple(section["breakpoints"]), tuple(section["values"]))


def model_config(model: dict) -> DomainWallConfig:
    L = float(model.get("half_length", 10.0))
    th = model.get("thresholds", {})
    kw = {}
    if "min_gap_ratio" in th:
        kw["min_gap_ratio"] = float(th["min_gap_ratio"])
    if "cutoff_factor" in th:
        kw["cutoff_factor"] = float(th["cutoff_factor"])
    cfg = DomainWallConfig(
        sites=int(model["sites"]),
        mass=_mass(model["mass"], L),
        mass_tilde=_mass(model["mass_tilde"], L),
        half_length=L,
        wilson_r=float(model.get("wilson_r", 1.0)),
        middle=tuple(model["middle"]) if "middle" in model else None,
        boundary=model.get("boundary", "chiral"),
        **kw,
    )
    cfg.validate()
    return cfg


def _jsonable(obj):
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj).__name__}")


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable, allow_nan=False) + "\n"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _write_meta(path: Path, started: float, exit_code: int, argv) -> None:
    meta = {
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "seconds": round(time.time() - started, 3),
        "version": __version__,
        "argv": list(argv),
        "exit_code": exit_code,
    }
    _write(path.with_name(path.name + ".meta.json"), _dumps(meta))


def _csv(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                    for k, v in r.items()})
    return buf.getvalue()


def _formats(args, cfg: dict, default: str) -> list[str]:
    if args.format:
        return [args.format]
    return cfg.get("output", {}).get("formats", [default])


def _out_dir(args, cfg: dict) -> Path:
    return Path(args.out or cfg.get("output", {}).get("directory", "relindex_out"))


def _seed(args, cfg: dict) -> int:
    return int(args.seed if args.seed is not None else cfg.get("seed", 0))


# verify


def run_verify(args) -> int:
    try:
        rs = RewriteSystem.default()
        if args.drop_axiom:
            rs = rs.without(args.drop_axiom)
        certs = [verify_proposition(rs), verify_homotopy(rs)]
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - reported as an internal failure
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    total = passed = 0
    for cert in certs:
        for e in cert.entries:
            total += 1
            passed += e.passed
            status = "PASS" if e.passed else "FAIL"
            line = f"{status} {cert.name} {e.label}"
            if not e.passed:
                line += f" stuck at: {e.normal_form.format(ascii=True)}"
            print(line)
        for name, ok in cert.checks.items():
            print(f"{'PASS' if ok else 'FAIL'} {cert.name} {name}")
    ok = all(c.passed for c in certs)
    if ok:
        print(f"{passed} entries PASS")
    else:
        first = next((f"{c.name} {c.failures[0].label}" for c in certs if c.failures), "side check")
        print(f"{total - passed} of {total} entries FAIL (first: {first})")
    trace_path = Path(args.trace) if args.trace else (
        Path(args.out) / "verify_trace.json" if args.out else None)
    if trace_path is not None:
        trace = {c.name: {e.label: [s.to_list() for s in e.trace] for e in c.entries}
                 for c in certs}
        trace["axioms"] = certs[0].axioms
        _write(trace_path, _dumps(trace))
    if args.out:
        _write(Path(args.out) / "verify.json", _dumps({c.name: c.to_dict() for c in certs}))
    return 0 if ok else 1


# experiment


def experiment_report(cfg: DomainWallConfig, seed: int = 0, c_choice=CChoice.FROM_X,
                      n_grid: int = 11) -> tuple[dict, dict]:
    """Report body and contract flags for one configuration."""
    bundle = build_agreeing_pair(cfg)
    p = bundle.pair
    c_choice = CChoice(c_choice)
    grid = t_grid(n_grid)
    kw = dict(min_gap_ratio=cfg.min_gap_ratio, cutoff_factor=cfg.cutoff_factor)
    rel = relative_index_experiment(p, grid, c_choice=c_choice, **kw)
    tests = standard_test_elements(p.x.algebra, seed=seed)
    mirror = diamond(p.swapped(), c_choice)
    homotopy = []
    for t in grid:
        F = homotopy_operator(p, float(t), with_report=False).F
        homotopy.append({"t": float(t),
                         "square_defect": opnorm(square_defect(F))})
    defects = {
        "x": defect_report(p.x, tests).to_dict(PROFILE_LIMIT),
        "xt": defect_report(p.xt, tests).to_dict(PROFILE_LIMIT),
        "x_diamond_xt": defect_report(diamond(p, c_choice), tests).to_dict(PROFILE_LIMIT),
        "xt_diamond_x": defect_report(mirror, tests).to_dict(PROFILE_LIMIT),
        "corner": {"x": p.corner_profiles[0].to_dict(PROFILE_LIMIT),
                   "xt": p.corner_profiles[1].to_dict(PROFILE_LIMIT)},
        "agreement": bundle.agreement.to_dict(PROFILE_LIMIT),
        "homotopy": homotopy,
        "lipschitz_constant": lipschitz_constant(p),
    }
    endpoint = endpoint_check(p)
    tr = rel.homotopy_trace
    indices = {
        "x": rel.x.to_dict(), "xt": rel.xt.to_dict(),
        "x_diamond_xt": rel.diamond.to_dict(), "xt_diamond_x": rel.mirror.to_dict(),
        "oracle": {k: [list(v) if isinstance(v, tuple) else v for v in vals]
                   for k, vals in bundle.oracle.items()},
    }
    report = {
        "config_echo": cfg.to_dict() | {"seed": seed, "c_choice": c_choice.value,
                                        "t_grid": n_grid},
        "defects": defects,
        "indices": indices,
        "residual": rel.residual,
        "homotopy_trace": [dict(t=t, **r.to_dict()) for t, r in zip(rel.grid, tr)],
        "endpoint_residual": endpoint,
    }
    contract = {
        "residual_zero": rel.residual == 0,
        "endpoint": endpoint <= ENDPOINT_TOL,
        "trace_constant": rel.trace_constant(),
    }
    return report, contract


def run_experiment(args) -> int:
    started = time.time()
    try:
        raw = load_config(args.config)
        cfg = model_config(raw["model"])
    except (ConfigError, RelIndexError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    surgery = raw.get("surgery", {})
    seed = _seed(args, raw)
    try:
        report, contract = experiment_report(cfg, seed, surgery.get("c_choice", "FromX"),
                                             surgery.get("t_grid", 11))
    except AmbiguousKernelError as exc:
        print(f"ambiguous kernel in operator {exc.operator}: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    ind = report["indices"]
    print("indices (x, xt, x<>xt, xt<>x) = ({}, {}, {}, {})".format(
        *(ind[k]["index"] for k in ("x", "xt", "x_diamond_xt", "xt_diamond_x"))))
    print(f"residual = {report['residual']}")
    print(f"endpoint residual = {report['endpoint_residual']:.3e}")
    for name, ok in contract.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    code = 0 if all(contract.values()) else 1
    out = _out_dir(args, raw)
    for fmt in _formats(args, raw, "json"):
        path = out / f"experiment.{fmt}"
        if fmt == "json":
            _write(path, _dumps(report))
        else:
            row = {"pattern": "config", "N": cfg.sites, "residual": report["residual"]}
            row.update({c: ind[k]["index"] for c, k in zip(
                INDEX_COLUMNS[:4], ("x", "xt", "x_diamond_xt", "xt_diamond_x"))})
            _write(path, _csv([row], ("pattern", "N") + INDEX_COLUMNS))
        _write_meta(path, started, code, sys.argv)
    return code


# sweep


def sweep_row(cfg: DomainWallConfig, label: str, c_choice=CChoice.FROM_X,
              n_grid: int = 11) -> tuple[dict, dict]:
    """Monitored defects, indices and per-row contract flags."""
    bundle = build_agreeing_pair(cfg)
    p = bundle.pair
    kw = dict(min_gap_ratio=cfg.min_gap_ratio, cutoff_factor=cfg.cutoff_factor)
    rel = relative_index_experiment(p, t_grid(n_grid), c_choice=c_choice, **kw)
    comm = max(commutator_norm(m.F, rep_apply(m.rep, central_bump(m.algebra)))
               for m in (p.x, p.xt))
    results = (rel.x, rel.xt, rel.diamond, rel.mirror)
    row = {
        "pattern": label,
        "N": cfg.sites,
        "commutator": comm,
        "corner_sigma5": max(pr.sigma(5) for pr in p.corner_profiles),
        "agreement_sigma5": bundle.agreement.sigma(5),
        "bulk_gap": min(r.smallest_bulk for r in results),
        "ind_x": rel.x.index,
        "ind_xt": rel.xt.index,
        "ind_x_diamond_xt": rel.diamond.index,
        "ind_xt_diamond_x": rel.mirror.index,
        "residual": rel.residual,
    }
    walls = bundle.oracle["walls"]
    kernels = [(r.kernel_plus, r.kernel_minus) for r in (rel.x, rel.xt)]
    checks = {
        "residual_zero": rel.residual == 0,
        "trace_constant": rel.trace_constant(),
        "endpoint": endpoint_check(p) <= ENDPOINT_TOL,
        "kernels_match_walls": kernels == [tuple(w) for w in walls],
        "bulk_gap": row["bulk_gap"] >= bulk_gap_floor(cfg),
    }
    return row, checks


def sweep_jobs(raw: dict) -> list[tuple[str, DomainWallConfig]]:
    """Labelled, validated configurations of a sweep file."""
    section = raw.get("sweep")
    if not section or not (section.get("sites") or section.get("patterns")):
        raise ConfigError("sweep needs a non-empty 'sites' list or 'patterns'")
    base = model_config(raw["model"])
    jobs = []
    if section.get("patterns"):
        L = base.half_length
        for s, st in boundary_patterns(section.get("middle_sign", 1)):
            cfg = DomainWallConfig(base.sites, MassProfile.walls(s, L),
                                   MassProfile.walls(st, L), L, base.wilson_r,
                                   base.middle, base.min_gap_ratio, base.cutoff_factor,
                                   base.boundary)
            cfg.validate()
            jobs.append((pattern_label(s, st), cfg))
    else:
        keep = section.get("scaling", "fixed_spacing") == "fixed_spacing"
        for n in section["sites"]:
            cfg = base.with_sites(int(n), keep_spacing=keep)
            cfg.validate()
            jobs.append(("config", cfg))
    return jobs


def monotone_nonincreasing(values, floor: float = NOISE_FLOOR) -> bool:
    v = np.maximum(np.asarray(values, dtype=float), floor)
    return bool(np.all(np.diff(v) <= 0))


def run_sweep(args) -> int:
    started = time.time()
    try:
        raw = load_config(args.config)
        jobs = sweep_jobs(raw)
        section = raw["sweep"]
    except (ConfigError, RelIndexError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    surgery = raw.get("surgery", {})
    rows, failures = [], []
    try:
        for label, cfg in jobs:
            row, checks = sweep_row(cfg, label, surgery.get("c_choice", "FromX"),
                                    surgery.get("t_grid", 11))
            rows.append(row)
            bad = [k for k, ok in checks.items() if not ok]
            failures += [f"{label} N={cfg.sites}: {k}" for k in bad]
            print(f"{'PASS' if not bad else 'FAIL'} {label} N={cfg.sites} "
                  f"residual={row['residual']} bulk_gap={row['bulk_gap']:.3f}"
                  + (f" ({', '.join(bad)})" if bad else ""))
    except AmbiguousKernelError as exc:
        print(f"ambiguous kernel in operator {exc.operator}: {exc}", file=sys.stderr)
        return 2
    if not section.get("patterns"):
        for col in MONOTONE:
            if not monotone_nonincreasing([r[col] for r in rows]):
                failures.append(f"{col} not monotone in N")
                print(f"FAIL {col} not monotone nonincreasing in N")
    code = 0 if not failures else 1
    out = _out_dir(args, raw)
    for fmt in _formats(args, raw, "csv"):
        path = out / f"sweep.{fmt}"
        if fmt == "csv":
            _write(path, _csv(rows, SWEEP_COLUMNS))
        else:
            _write(path, _dumps({"config_echo": raw, "rows": rows, "failures": failures}))
        _write_meta(path, started, code, sys.argv)
    return code


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--seed", type=int, help="seed for random test elements")
    common.add_argument("--format", choices=("json", "csv"), help="report format")
    parser = argparse.ArgumentParser(prog="relindex", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", parents=[common], help="symbolic certificates")
    v.add_argument("--drop-axiom", metavar="ID", help="remove one axiom (e.g. A6, KILL)")
    v.add_argument("--trace", metavar="PATH", help="write the rewrite trace as JSON")
    v.set_defaults(func=run_verify)
    e = sub.add_parser("experiment", parents=[common], help="one pasting experiment")
    e.add_argument("config")
    e.set_defaults(func=run_experiment)
    s = sub.add_parser("sweep", parents=[common], help="resolution or pattern sweep")
    s.add_argument("config")
    s.set_defaults(func=run_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
