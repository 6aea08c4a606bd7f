"""Command-line front end: ``kramers-sep <command> [options]``.

Every command that takes a JSON config validates it against
``schema/config.json`` first and echoes the resolved config (defaults
filled in) together with the package version in its JSON output.

Exit codes: 0 success, 1 validation or domain error, 2 numerical failure
or a verification bound that was not met.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from importlib import resources

import jsonschema
import numpy as np

from . import __version__, acceptance
from .errors import DomainError, EvaluationWarning, NumericalError, ValidationError
from .model import KramersParams, SchemeTag, classify
from .reduced import SpectralPair, build_solution
from .separation import build_coordinate_system, check_constraint
from .timebasis import ConstantsAB, RChoice, RFunction, build_R
from .verify import GridSpec, eval_grid, fd_simulate, residual_scan, write_fields_csv

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2

DEFAULTS = {"lambda": [0.0, 0.0], "h": 1e-2, "branch": "first", "qform": "standard",
            "tol": {"constraint": 1e-9, "residual": 1e-6}}


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _schema() -> dict:
    text = resources.files(__package__).joinpath("schema/config.json").read_text()
    return json.loads(text)


def load_config(path) -> dict:
    """Read, validate and resolve a config file (``-`` reads stdin)."""
    try:
        if path == "-":
            raw = json.load(sys.stdin)
        else:
            with open(path) as fh:
                raw = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}") from None
    return resolve_config(raw)


def resolve_config(raw: dict) -> dict:
    """Validate ``raw`` against the schema and fill in defaults."""
    if isinstance(raw, dict) and isinstance(raw.get("nu"), (int, float)) and raw["nu"] <= 0:
        raise ValidationError("nu must be positive")
    try:
        jsonschema.validate(raw, _schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "config"
        raise ValidationError(f"{where}: {exc.message}") from None
    cfg = json.loads(json.dumps(raw))
    for key, val in DEFAULTS.items():
        if key == "tol":
            cfg["tol"] = {**val, **cfg.get("tol", {})}
        else:
            cfg.setdefault(key, val)
    cfg["nu"], cfg["k"] = float(cfg["nu"]), float(cfg["k"])
    cfg["lambda"] = [float(v) for v in cfg["lambda"]]
    if "grid" in cfg:
        cfg["grid"].setdefault("nt", 1)
    if "t_interval" not in cfg:
        if "grid" not in cfg:
            raise ValidationError("config needs grid or t_interval")
        t0, t1 = cfg["grid"]["t"]
        pad = 4 * cfg["h"]
        cfg["t_interval"] = [t0 - pad, t1 + pad]
    out = cfg.setdefault("output", {})
    out.setdefault("format", "json")
    return cfg


def _params(cfg) -> KramersParams:
    return KramersParams(cfg["nu"], cfg["k"])


def _sources(cfg, tag: SchemeTag, params: KramersParams, force: bool):
    const = cfg.get("constants")
    if tag is SchemeTag.SecondOrderFree:
        return None
    if tag is SchemeTag.SecondOrderSpecialK:
        if not const or "R_choice" not in const:
            raise ValidationError("SecondOrderSpecialK needs constants.R_choice")
        if force and tag not in classify(params).available:
            # rate of the nearer special k, so a mismatched k can be probed
            nu, k = params.nu, params.k
            a = nu / 4 if abs(k - 3 * nu * nu / 16) <= abs(k + 3 * nu * nu / 4) else nu / 2
            return RFunction(RChoice.parse(const["R_choice"]), a)
        return build_R(const["R_choice"], params)
    if not const or "A" not in const:
        raise ValidationError(f"{tag.value} needs constants.A and constants.B")
    return ConstantsAB(tuple(const["A"]), tuple(const["B"]))


def build_from_config(cfg: dict, force: bool = False):
    """SeparatedSolution described by a resolved config."""
    tag = SchemeTag.parse(cfg["scheme"])
    params = _params(cfg)
    src = _sources(cfg, tag, params, force)
    cs = build_coordinate_system(tag, src, params, cfg["t_interval"], force=force,
                                 qform=cfg["qform"], tol=cfg["tol"]["constraint"])
    return build_solution(tag, cs, SpectralPair(*cfg["lambda"]), cfg.get("t_ref"),
                          branch=cfg["branch"])


def _grid(cfg) -> GridSpec:
    if "grid" not in cfg:
        raise ValidationError("this command needs a grid")
    g = cfg["grid"]
    return GridSpec(g["x"], g["y"], g["nx"], g["ny"], g["t"][0], g["t"][1], g["nt"])


def _constraint(cfg) -> dict | None:
    tag = SchemeTag.parse(cfg["scheme"])
    const = cfg.get("constants") or {}
    if not tag.is_first_order or "A" not in const:
        return None
    rep = check_constraint(tag, ConstantsAB(tuple(const["A"]), tuple(const["B"])),
                           _params(cfg), cfg["tol"]["constraint"])
    return {"satisfied": bool(rep.satisfied), "residual": float(rep.residual),
            "condition": rep.condition_text}


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True)


def _emit(doc: dict, cfg: dict | None, stdout) -> None:
    """Write ``doc`` to output.path (format json) or to stdout."""
    text = _dumps(doc) + "\n"
    out = (cfg or {}).get("output", {})
    if out.get("path") and out.get("format") == "json":
        with open(out["path"], "w", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _header(cfg) -> dict:
    return {"version": __version__, "config": cfg}


# ---------------------------------------------------------------------------
# commands


def cmd_classify(args, stdout) -> int:
    params = KramersParams(args.nu, args.k)
    doc = _header({"nu": params.nu, "k": params.k})
    doc["regime"] = classify(params).to_dict()
    _emit(doc, None, stdout)
    return EXIT_OK


def cmd_build(args, stdout) -> int:
    cfg = load_config(args.config)
    sol = build_from_config(cfg, force=args.force)
    doc = _header(cfg)
    desc = {"scheme": sol.scheme.value, "lambda": sol.lam.as_list(), "t_ref": sol.t_ref,
            "constants": cfg.get("constants"), "phi2_kind": sol.phi2_kind,
            "branch": sol.branch}
    if args.dump:
        desc["coordinate_system"] = sol.cs.to_dict()
    doc["solution"] = desc
    doc["constraint"] = _constraint(cfg)
    _emit(doc, cfg, stdout)
    return EXIT_OK


def _write_csv(cfg, fields, doc, stdout) -> None:
    path = cfg["output"].get("path")
    if not path:
        raise ValidationError("csv output needs output.path")
    doc["rows"] = write_fields_csv(path, fields)
    doc["csv"] = path
    with open(path + ".meta.json", "w", newline="\n") as fh:
        fh.write(_dumps(doc) + "\n")
    stdout.write(_dumps(doc) + "\n")


def cmd_eval(args, stdout) -> int:
    cfg = load_config(args.config)
    sol = build_from_config(cfg, force=args.force)
    fields = eval_grid(sol, _grid(cfg))
    doc = _header(cfg)
    if cfg["output"]["format"] == "csv":
        _write_csv(cfg, fields, doc, stdout)
    else:
        doc["fields"] = [{"t": f.time, "x": f.spec.x.tolist(), "y": f.spec.y.tolist(),
                          "values": np.asarray(f.values).tolist()} for f in fields]
        _emit(doc, cfg, stdout)
    return EXIT_OK


def cmd_verify(args, stdout) -> int:
    cfg = load_config(args.config)
    sol = build_from_config(cfg, force=args.force)
    rep = residual_scan(sol, _grid(cfg), cfg["h"])
    bound = cfg["tol"]["residual"]
    passed = bool(rep.rel_max <= bound)
    doc = _header(cfg)
    doc.update({"residual": rep.to_dict(), "bound": bound, "passed": passed,
                "constraint": _constraint(cfg), "forced": bool(args.force)})
    _emit(doc, cfg, stdout)
    return EXIT_OK if passed else EXIT_NUMERICAL


def cmd_simulate(args, stdout) -> int:
    cfg = load_config(args.config)
    sol = build_from_config(cfg, force=args.force)
    res = fd_simulate(sol, _grid(cfg), backend=args.backend)
    doc = _header(cfg)
    doc["simulation"] = res.to_dict()
    if cfg["output"]["format"] == "csv":
        _write_csv(cfg, [res.numeric], doc, stdout)
    else:
        _emit(doc, cfg, stdout)
    return EXIT_OK


def cmd_selftest(args, stdout) -> int:
    only = set(args.only) if args.only else None
    results = []
    for fn in acceptance.CRITERIA:
        number = int(fn.__name__.rsplit("_", 1)[1])
        if only is not None and number not in only:
            continue
        res = fn()
        results.append(res)
        if args.verbose:
            print(res.line(), file=sys.stderr, flush=True)
    doc = {"version": __version__, "criteria": [r.to_dict() for r in results],
           "passed": all(r.passed for r in results)}
    text = _dumps(doc) + "\n"
    if args.output:
        with open(args.output, "w", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK if doc["passed"] else EXIT_NUMERICAL


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kramers-sep",
                                description="Separated-variable solutions of the Kramers equation.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="list the schemes available for (nu, k)")
    c.add_argument("--nu", type=float, required=True)
    c.add_argument("--k", type=float, required=True)
    c.set_defaults(func=cmd_classify)

    def with_config(name, fn, help_text):
        s = sub.add_parser(name, help=help_text)
        s.add_argument("config", help="JSON config file, or - for stdin")
        s.add_argument("--force", action="store_true",
                       help="skip constraint and regime checks (negative controls)")
        s.set_defaults(func=fn)
        return s

    b = with_config("build", cmd_build, "print the solution descriptor")
    b.add_argument("--dump", action="store_true", help="include the coordinate system")
    with_config("eval", cmd_eval, "evaluate the solution on the grid")
    with_config("verify", cmd_verify, "PDE residual scan on the grid")
    s = with_config("simulate", cmd_simulate, "finite-difference cross-check")
    s.add_argument("--backend", choices=("cython", "python"), default=None)

    t = sub.add_parser("selftest", help="run the acceptance matrix")
    t.add_argument("--only", type=int, nargs="+", metavar="N", help="criterion numbers to run")
    t.add_argument("--output", help="write the JSON report here instead of stdout")
    t.add_argument("-v", "--verbose", action="store_true", help="progress lines on stderr")
    t.set_defaults(func=cmd_selftest)
    return p


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", EvaluationWarning)
            return args.func(args, stdout)
    except (ValidationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
