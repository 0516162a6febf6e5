"""Command-line front end: ``entcrit {check,audit,scan,optimize,verify,limit}``.

Jobs are JSON files; reports are JSON (tagged ``"schema": 1``) or CSV with
floats written to 17 significant digits. Exit status: 0 on success (a
verdict is data, not a failure), 2 on bad input, 3 when an invariant check
fails (violations in a separable audit, identity deviations above 1e-10).
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys
from typing import Sequence

import jsonschema
import numpy as np

from . import criteria, explore, opdsl, ptrans
from .space import CompositeSpace
from .states import from_spec, rng_stream

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INPUT, EXIT_INVARIANT = 0, 2, 3
VERIFY_TOL = 1e-10


class InputError(Exception):
    """Bad job file or arguments; maps to exit status 2."""


# --- job schemas ------------------------------------------------------------

_NUMBER = {"type": "number"}
_MODE = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["boson", "spin", "su11"]},
        "cutoff": {"type": "integer", "minimum": 0},
        "two_j": {"type": "integer", "minimum": 1},
        "two_k": {"type": "integer", "minimum": 1},
        "j": _NUMBER,
        "k": _NUMBER,
    },
}
_SPACE = {
    "type": "object",
    "required": ["modes"],
    "properties": {"modes": {"type": "array", "minItems": 1, "items": _MODE}},
}
_STATE = {"type": "object", "required": ["type"], "properties": {"type": {"type": "string"}}}
_COMMON = {
    "space": _SPACE,
    "criterion": {"type": "string"},
    "params": {"type": "object"},
    "operators": {
        "type": "object",
        "required": ["A", "B", "C"],
        "properties": {k: {"type": "string"} for k in "ABC"},
        "additionalProperties": False,
    },
    "subset": {"type": "array", "items": {"type": "integer", "minimum": 1}},
    "tolerance": {"type": "number", "exclusiveMinimum": 0},
    "seed": {"type": "integer", "minimum": 0},
}
_GRID_AXIS = {
    "oneOf": [
        {"type": "array", "items": _NUMBER},
        {
            "type": "object",
            "required": ["start", "stop", "num"],
            "properties": {"start": _NUMBER, "stop": _NUMBER, "num": {"type": "integer", "minimum": 0}},
            "additionalProperties": False,
        },
    ]
}

SCHEMAS = {
    "check": {
        "type": "object",
        "required": ["space", "state"],
        "properties": {**_COMMON, "state": _STATE},
        "anyOf": [{"required": ["criterion"]}, {"required": ["operators"]}],
    },
    "audit": {
        "type": "object",
        "required": ["space", "sampler", "n"],
        "properties": {
            **_COMMON,
            "sampler": _STATE,
            "n": {"type": "integer", "minimum": 0},
            "separable": {"type": "boolean"},
            "margins_csv": {"type": "string"},
        },
        "anyOf": [{"required": ["criterion"]}, {"required": ["operators"]}],
    },
    "scan": {
        "type": "object",
        "required": ["space", "family", "grid"],
        "properties": {**_COMMON, "family": _STATE, "grid": {"type": "object", "additionalProperties": _GRID_AXIS}},
        "anyOf": [{"required": ["criterion"]}, {"required": ["operators"]}],
    },
    "optimize": {
        "type": "object",
        "required": ["space", "family", "bounds"],
        "properties": {
            **_COMMON,
            "family": _STATE,
            "bounds": {
                "type": "object",
                "minProperties": 1,
                "additionalProperties": {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2},
            },
            "config": {"type": "object"},
        },
        "anyOf": [{"required": ["criterion"]}, {"required": ["operators"]}],
    },
    "limit": {
        "type": "object",
        "required": ["kind", "values"],
        "properties": {
            "kind": {"enum": ["su2", "su11"]},
            "values": {"type": "array", "minItems": 1, "items": {"type": "number", "exclusiveMinimum": 0}},
            "probe_max": {"type": "integer", "minimum": 1},
        },
        "additionalProperties": False,
    },
}


def load_job(path: str | None, command: str) -> dict:
    if path is None:
        raise InputError(f"{command} needs --job")
    try:
        with open(path, encoding="utf-8") as fh:
            job = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read job file {path}: {exc}") from exc
    validate(job, command)
    return job


def validate(job, command: str) -> None:
    try:
        jsonschema.validate(job, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"invalid {command} job at {where}: {exc.message}") from exc


# --- shared helpers ---------------------------------------------------------

def _tolerance(job: dict, args) -> float:
    if args.tolerance is not None:
        return args.tolerance
    return float(job.get("tolerance", criteria.DEFAULT_TOL))


def _seed(job: dict, args) -> int:
    return args.seed if args.seed is not None else int(job.get("seed", 0))


def build_criterion(job: dict, space: CompositeSpace, tolerance: float):
    """Built-in criterion by id, or a generic one over DSL-specified operators."""
    params = dict(job.get("params", {}))
    if "operators" in job:
        a, b, c = (opdsl.lower(job["operators"][k], space) for k in "ABC")
        cid = job.get("criterion", "pt_product")
        c_param = float(params.pop("c", params.pop("c_param", 1.0)))
        if params:
            raise InputError(f"unexpected params {sorted(params)} for operator criterion")
        return criteria.operator_criterion(cid, a, b, c, job.get("subset"), c_param=c_param, tolerance=tolerance)
    return criteria.get_criterion(job["criterion"], tolerance=tolerance, **params)


def make_family(space: CompositeSpace, template: dict, names: Sequence[str]):
    template = dict(template)

    def family(x):
        spec = dict(template)
        spec.update({name: float(v) for name, v in zip(names, x)})
        return from_spec(space, spec)

    return family


def _grid_axis(axis) -> list[float]:
    if isinstance(axis, dict):
        return [float(v) for v in np.linspace(axis["start"], axis["stop"], axis["num"])]
    return [float(v) for v in axis]


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else fmt(v) for v in row])
    return buf.getvalue()


def _json_text(payload: dict) -> str:
    return json.dumps({"schema": SCHEMA_VERSION, **payload}, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# --- commands ---------------------------------------------------------------

def cmd_check(args) -> int:
    job = load_job(args.job, "check")
    space = CompositeSpace.from_json(job["space"])
    tol = _tolerance(job, args)
    crit = build_criterion(job, space, tol)
    state_spec = job["state"]
    rng = rng_stream(_seed(job, args), int(state_spec.get("stream", 0)))
    report = crit(from_spec(space, state_spec, rng))
    _emit(_json_text({"command": "check", "report": report.to_json()}), args.out)
    return EXIT_OK


def cmd_audit(args) -> int:
    job = load_job(args.job, "audit")
    space = CompositeSpace.from_json(job["space"])
    tol = _tolerance(job, args)
    crit = build_criterion(job, space, tol)
    sampler = job["sampler"]
    separable = job.get("separable", sampler["type"] == "random_separable")
    report = explore.mc_audit(crit, sampler, job["n"], _seed(job, args), tol, args.threads, space)
    _emit(_json_text({"command": "audit", "separable": separable, "report": report.to_json()}), args.out)
    if job.get("margins_csv"):
        rows = [(i, m, m < -tol) for i, m in enumerate(report.margins)]
        _emit(_csv_text(("index", "margin", "detected"), rows), job["margins_csv"])
    if separable and report.violations:
        print(f"separable audit found {report.violations} violations", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_scan(args) -> int:
    job = load_job(args.job, "scan")
    space = CompositeSpace.from_json(job["space"])
    tol = _tolerance(job, args)
    crit = build_criterion(job, space, tol)
    names = list(job["grid"])
    axes = [_grid_axis(job["grid"][n]) for n in names]
    family = make_family(space, job["family"], names)
    points = list(itertools.product(*axes)) if names else []

    def one(point):
        rep = crit(family(point))
        return (*point, rep.lhs, rep.rhs, rep.margin, rep.detected)

    rows = explore._map(one, points, args.threads)
    _emit(_csv_text((*names, "lhs", "rhs", "margin", "detected"), rows), args.out)
    return EXIT_OK


def cmd_optimize(args) -> int:
    job = load_job(args.job, "optimize")
    space = CompositeSpace.from_json(job["space"])
    tol = _tolerance(job, args)
    crit = build_criterion(job, space, tol)
    names = list(job["bounds"])
    bounds = [tuple(job["bounds"][n]) for n in names]
    config = explore.OptConfig.from_json(job.get("config"))
    family = make_family(space, job["family"], names)
    result = explore.maximize_violation(crit, family, bounds, config, _seed(job, args), args.threads)
    payload = {"command": "optimize", "params": names, "result": result.to_json()}
    _emit(_json_text(payload), args.out)
    return EXIT_OK


def _parse_params(pairs: Sequence[str]) -> dict:
    params = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep:
            raise InputError(f"--param expects KEY=VALUE, got {pair!r}")
        try:
            params[key] = int(value)
        except ValueError:
            raise InputError(f"--param {key} must be an integer") from None
    return params


def cmd_verify(args) -> int:
    params = _parse_params(args.param)
    identities = ptrans.verify_pt_identities(args.kind, **params)
    commutators = ptrans.commutator_suite(args.kind, **params)
    worst = max(identities.max_deviation, commutators.max_deviation)
    passed = worst <= VERIFY_TOL
    payload = {
        "command": "verify",
        "kind": args.kind,
        "tolerance": VERIFY_TOL,
        "passed": passed,
        "identities": identities.to_json(),
        "commutators": commutators.to_json(),
    }
    _emit(_json_text(payload), args.out)
    return EXIT_OK if passed else EXIT_INVARIANT


def cmd_limit(args) -> int:
    job = load_job(args.job, "limit")
    study = explore.hp_limit_study(job["kind"], job["values"], job.get("probe_max", 2))
    cols = explore.LIMIT_COLUMNS
    rows = []
    for i, row in enumerate(study.rows):
        ratio = study.ratios[i - 1] if i else None
        rows.append([row["value"], *(row[c] for c in cols), *((ratio[c] if ratio else None) for c in cols)])
    header = ("value", *cols, *(c.replace("err_", "ratio_") for c in cols))
    _emit(_csv_text(header, rows), args.out)
    return EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "audit": cmd_audit,
    "scan": cmd_scan,
    "optimize": cmd_optimize,
    "verify": cmd_verify,
    "limit": cmd_limit,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entcrit", description="Uncertainty-relation entanglement criteria.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name == "verify":
            p.add_argument("kind", choices=["boson3", "boson_n", "su2", "su11"])
            p.add_argument("--param", action="append", metavar="KEY=VALUE",
                           help="integer parameter such as two_j=3, cutoff=8, n=4")
        p.add_argument("--job", help="job file (JSON)")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--seed", type=int, help="overrides the job seed")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--tolerance", type=float, help="detection tolerance (default 1e-9)")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the message
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    if args.seed is not None and args.seed < 0:
        print("error: --seed must be non-negative", file=sys.stderr)
        return EXIT_INPUT
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return COMMANDS[args.command](args)
    except criteria.NumericalError as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (InputError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
