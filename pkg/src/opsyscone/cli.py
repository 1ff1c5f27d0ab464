"""Command-line surface: one subcommand per procedure, JSON reports.

Every invocation writes a single JSON envelope (schema 1) embedding the
resolved config, the seed, the tool version, and the wall time, so a report
can be replayed from its own config block.  Exit codes are the machine
contract: 0 success, 2 verification failure, 3 lineality found, 4 usage
error.  `gram` and `pi-check` can export CSV instead via --format csv.
"""

import argparse
import csv
import io
import json
import os
import re
import sys
import time

from . import __version__
from ._jsonutil import canonical_dumps
from .cones import (
    ConeOracle,
    ProbeBudget,
    TSequence,
    build_initial_cone,
    gram_matrix,
    lp_member,
    omax_member,
    properness_probe,
    t_thresholds,
)
from .errors import NumericInputError, OpsysError, SearchFailed
from .instances import (
    load_instance,
    mub_generate,
    pi_positivity_check,
    save_instance,
    sic_search,
    soundness_check,
    verify_instance,
)
from .iteration import run_iteration
from .projections import SearchBudget, cnp_member, dmin_refute, relation_check
from .spaces import HermLevel, VElement, build_space, element_from_json

EXIT_OK = 0
EXIT_VERIFY = 2
EXIT_LINEALITY = 3
EXIT_USAGE = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse would sys.exit(2); route everything through one usage path
    def error(self, message):
        raise UsageError(message)


def _floats(text):
    try:
        return tuple(float(v) for v in str(text).split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}")


def _kind(text):
    t = str(text).lower()
    if t not in ("sic", "mub"):
        raise argparse.ArgumentTypeError(f"kind must be sic or mub, got {text!r}")
    return t


def _fmt(text):
    t = str(text).lower()
    if t not in ("json", "csv"):
        raise argparse.ArgumentTypeError(f"format must be json or csv, got {text!r}")
    return t


# Option table entry: dest -> (converter, default, required).  Flags always
# win; a --config file fills what flags left unset; defaults fill the rest.
_D = ("-d",)
_COMMON = [
    (("--config",), "config", str, None, False),
    (("--out",), "out", str, None, False),
]
_TSEQ = [
    (("--t0",), "t0", float, None, False),
    (("--slope",), "slope", float, None, False),
    (("--ratio",), "ratio", float, None, False),
    (("--tlist",), "tlist", _floats, None, False),
]


def _spec(*rows):
    return list(_COMMON) + [list(r) for r in rows]


_SUBCOMMANDS = {
    "gram": _spec(
        (("--kind",), "kind", _kind, None, True),
        (_D, "d", int, None, True),
        (("--format",), "format", _fmt, "json", False),
    ),
    "thresholds": _spec(
        (_D, "d", int, None, True),
    ),
    "build-cone": _spec(
        (("--kind",), "kind", _kind, None, True),
        (_D, "d", int, None, True),
        *_TSEQ,
        (("--nmax",), "nmax", int, None, True),
    ),
    "member": _spec(
        (("--kind",), "kind", _kind, None, True),
        (_D, "d", int, None, True),
        *_TSEQ,
        (("--nmax",), "nmax", int, None, True),
        (("--level",), "level", int, None, False),
        (("--x",), "x", str, None, False),
        (("--x-file",), "x_file", str, None, False),
        (("--eps",), "eps", float, 1e-6, False),
        (("--threads",), "threads", int, None, False),
    ),
    "relation": _spec(
        (("--kind",), "kind", _kind, None, True),
        (_D, "d", int, None, True),
        *_TSEQ,
        (("--nmax",), "nmax", int, None, True),
        (("-i",), "i", int, None, True),
        (("-j",), "j", int, None, True),
        (("--patience",), "patience", int, None, False),
    ),
    "cnp": _spec(
        (("--kind",), "kind", _kind, None, True),
        (_D, "d", int, None, True),
        *_TSEQ,
        (("--nmax",), "nmax", int, None, True),
        (("-p",), "p", int, None, True),
        (("--x",), "x", str, None, False),
        (("--x-file",), "x_file", str, None, False),
        (("--eps",), "eps", float, 1e-6, False),
        (("--patience",), "patience", int, None, False),
        (("--attempts",), "attempts", int, None, False),
    ),
    "dmin-refute": _spec(
        (("--kind",), "kind", _kind, None, True),
        (_D, "d", int, None, True),
        *_TSEQ,
        (("--nmax",), "nmax", int, None, True),
        (("--level",), "level", int, None, False),
        (("--x",), "x", str, None, False),
        (("--x-file",), "x_file", str, None, False),
        (("--eps",), "eps", float, 1e-6, False),
        (("--restarts",), "restarts", int, None, False),
        (("--steps",), "steps", int, None, False),
        (("--seed",), "seed", int, None, False),
    ),
    "probe": _spec(
        (("--kind",), "kind", _kind, None, True),
        (_D, "d", int, None, True),
        *_TSEQ,
        (("--nmax",), "nmax", int, None, True),
        (("--level",), "level", int, 1, False),
        (("--directions",), "directions", int, None, False),
        (("--ascent-steps",), "ascent_steps", int, None, False),
        (("--seed",), "seed", int, None, False),
        (("--threads",), "threads", int, None, False),
    ),
    "iterate": _spec(
        (("--kind",), "kind", _kind, None, True),
        (_D, "d", int, None, True),
        *_TSEQ,
        (("--nmax",), "nmax", int, None, True),
        (("--stages",), "stages", int, None, True),
        (("--seed",), "seed", int, None, False),
        (("--relation-samples",), "relation_samples", int, None, False),
        (("--dmin-samples",), "dmin_samples", int, None, False),
        (("--cnp-patience",), "cnp_patience", int, None, False),
        (("--cnp-attempts",), "cnp_attempts", int, None, False),
        (("--probe-directions",), "probe_directions", int, None, False),
        (("--ascent-steps",), "ascent_steps", int, None, False),
        (("--probe-work",), "probe_work", int, None, False),
        (("--heavy-work",), "heavy_work", int, None, False),
        (("--threads",), "threads", int, None, False),
    ),
    "sic-search": _spec(
        (_D, "d", int, None, True),
        (("--restarts",), "restarts", int, 20, False),
        (("--max-iters",), "max_iters", int, 4000, False),
        (("--seed",), "seed", int, None, False),
        (("--save",), "save", str, None, False),
    ),
    "mub-gen": _spec(
        (_D, "d", int, None, True),
        (("--save",), "save", str, None, False),
    ),
    "verify": _spec(
        (("--instance",), "instance", str, None, True),
        (("--tol",), "tol", float, 1e-8, False),
    ),
    "pi-check": _spec(
        (("--instance",), "instance", str, None, True),
        *_TSEQ,
        (("--nmax",), "nmax", int, None, True),
        (("--tol",), "tol", float, 1e-9, False),
        (("--format",), "format", _fmt, "json", False),
    ),
    "soundness": _spec(
        (("--instance",), "instance", str, None, True),
        (("--report",), "report", str, None, False),
        (("--kind",), "kind", _kind, None, False),
        (_D, "d", int, None, False),
        *_TSEQ,
        (("--nmax",), "nmax", int, None, False),
        (("--stages",), "stages", int, None, False),
        (("--seed",), "seed", int, None, False),
        (("--tol-scale",), "tol_scale", float, 1e-6, False),
    ),
}


def _build_parser():
    parser = _Parser(prog="opsyscone",
                     description="Operator-system cone experiments with JSON reports.")
    parser.add_argument("--version", action="version",
                        version=f"opsyscone {__version__}")
    subs = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, rows in _SUBCOMMANDS.items():
        sp = subs.add_parser(name)
        for flags, dest, conv, _default, _req in rows:
            sp.add_argument(*flags, dest=dest, type=conv, default=None)
    return parser


def _read_config_file(path):
    entries = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                key, sep, value = line.partition("=")
                if not sep or not key.strip():
                    raise UsageError(f"{path}:{lineno}: expected key=value")
                entries[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}")
    return entries


def _merge_config(args, rows):
    table = {dest: (flags[0], conv, default, required)
             for flags, dest, conv, default, required in rows}
    file_entries = {}
    if getattr(args, "config", None):
        file_entries = _read_config_file(args.config)
        for key in file_entries:
            if key not in table or key in ("config", "out"):
                raise UsageError(f"unknown config key {key!r}")
    cfg = {}
    for dest, (flag, conv, default, required) in table.items():
        value = getattr(args, dest, None)
        if value is None and dest in file_entries:
            try:
                value = conv(file_entries[dest])
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"config key {dest!r}: {exc}")
        if value is None:
            value = default
        if value is None and required:
            raise UsageError(f"missing required option {flag}")
        cfg[dest] = value
    return cfg


def _resolve_seed(cfg):
    if cfg.get("seed") is not None:
        return int(cfg["seed"])
    env = os.environ.get("OPSYS_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"OPSYS_SEED must be an integer, got {env!r}")
    return 0


def _tseq_from(cfg):
    if cfg.get("tlist"):
        return TSequence.explicit(cfg["tlist"])
    if cfg.get("t0") is None:
        raise UsageError("a t-sequence needs --t0 (with --slope or --ratio) or --tlist")
    if cfg.get("ratio") is not None:
        if cfg.get("slope") is not None:
            raise UsageError("give either --slope or --ratio, not both")
        return TSequence.geometric(cfg["t0"], cfg["ratio"])
    slope = cfg["slope"] if cfg.get("slope") is not None else 1.0
    return TSequence.affine(cfg["t0"], slope)


def _parse_inline_element(space, text):
    t = text.strip()
    m = re.fullmatch(r"(-?)e", t)
    if m:
        el = space.unit()
        return -el if m.group(1) else el
    m = re.fullmatch(r"(-?)p(\d+)", t)
    if m:
        el = space.label_element(int(m.group(2)))
        return -el if m.group(1) else el
    try:
        vals = [float(v) for v in t.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse element {text!r} "
                         "(use e, -e, pK, -pK, or comma-separated coefficients)")
    if len(vals) != space.dim:
        raise UsageError(f"element needs {space.dim} coefficients, got {len(vals)}")
    return VElement(space, vals)


def _resolve_element(space, cfg):
    if cfg.get("x_file"):
        try:
            with open(cfg["x_file"]) as fh:
                payload = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read element file {cfg['x_file']}: {exc}")
        return element_from_json(payload, space)
    if cfg.get("x"):
        return _parse_inline_element(space, cfg["x"])
    raise UsageError("give the query element via --x or --x-file")


def _at_level(el, level):
    if isinstance(el, HermLevel):
        if level is not None and level != el.n:
            raise UsageError(f"--level {level} conflicts with level-{el.n} element file")
        return el
    if level is None or level == 1:
        return el
    return el.to_level(1).pad(level)


# --- subcommand runners ---------------------------------------------------------
# Each returns (result_dict, exit_code, csv_rows_or_None).

def _run_gram(cfg, seed):
    g = gram_matrix(build_space(cfg["kind"], cfg["d"]))
    rows = [[f"{v:.17g}" for v in row] for row in g.matrix]
    return g.to_json_dict(), EXIT_OK, rows


def _run_thresholds(cfg, seed):
    return t_thresholds(cfg["d"]).to_json_dict(), EXIT_OK, None


def _run_build_cone(cfg, seed):
    space = build_space(cfg["kind"], cfg["d"])
    cone = build_initial_cone(space, _tseq_from(cfg), cfg["nmax"])
    return cone.to_json_dict(), EXIT_OK, None


def _run_member(cfg, seed):
    space = build_space(cfg["kind"], cfg["d"])
    cone = build_initial_cone(space, _tseq_from(cfg), cfg["nmax"])
    el = _at_level(_resolve_element(space, cfg), cfg.get("level"))
    if isinstance(el, VElement):
        res = lp_member(cone, el, cfg["eps"])
    else:
        res = omax_member(cone, el, cfg["eps"])
    return res.to_json_dict(), EXIT_OK, None


def _run_relation(cfg, seed):
    space = build_space(cfg["kind"], cfg["d"])
    cone = build_initial_cone(space, _tseq_from(cfg), cfg["nmax"])
    oracle = ConeOracle(cone)
    verdict = relation_check(oracle, space.label_element(cfg["j"]),
                             space.label_element(cfg["i"]), space.constant,
                             unknown_patience=cfg.get("patience"))
    return verdict.to_json_dict(), EXIT_OK, None


def _run_cnp(cfg, seed):
    space = build_space(cfg["kind"], cfg["d"])
    cone = build_initial_cone(space, _tseq_from(cfg), cfg["nmax"])
    oracle = ConeOracle(cone)
    el = _resolve_element(space, cfg)
    x = el.to_level(1) if isinstance(el, VElement) else el
    res = cnp_member(oracle, x, space.label_element(cfg["p"]), cfg["eps"],
                     oracle_1=oracle, unknown_patience=cfg.get("patience"),
                     max_attempts=cfg.get("attempts"))
    return res.to_json_dict(), EXIT_OK, None


def _run_dmin_refute(cfg, seed):
    space = build_space(cfg["kind"], cfg["d"])
    cone = build_initial_cone(space, _tseq_from(cfg), cfg["nmax"])
    level = cfg.get("level") or space.d + 1
    el = _at_level(_resolve_element(space, cfg), level)
    if isinstance(el, VElement):
        el = el.to_level(1)
    search = SearchBudget(seed=seed)
    if cfg.get("restarts") is not None:
        search = SearchBudget(restarts=cfg["restarts"],
                              steps=cfg.get("steps") or SearchBudget().steps,
                              seed=seed)
    outcome = dmin_refute(ConeOracle(cone), el, cfg["eps"], search=search)
    return outcome.to_json_dict(), EXIT_OK, None


def _run_probe(cfg, seed):
    space = build_space(cfg["kind"], cfg["d"])
    cone = build_initial_cone(space, _tseq_from(cfg), cfg["nmax"])
    budget = ProbeBudget(seed=seed)
    if cfg.get("directions") is not None or cfg.get("ascent_steps") is not None:
        budget = ProbeBudget(
            directions=cfg.get("directions") or ProbeBudget.directions,
            ascent_steps=cfg.get("ascent_steps") or ProbeBudget.ascent_steps,
            seed=seed)
    probe = properness_probe(ConeOracle(cone), space, level=cfg["level"],
                             budget=budget, threads=cfg.get("threads"))
    code = EXIT_LINEALITY if probe.found else EXIT_OK
    return probe.to_json_dict(), code, None


def _iterate_report(cfg, seed):
    space = build_space(cfg["kind"], cfg["d"])
    tseq = _tseq_from(cfg)
    kwargs = {}
    for key in ("relation_samples", "dmin_samples", "cnp_patience",
                "cnp_attempts", "probe_work", "heavy_work"):
        if cfg.get(key) is not None:
            kwargs[key] = cfg[key]
    if cfg.get("probe_directions") is not None or cfg.get("ascent_steps") is not None:
        kwargs["probe_budget"] = ProbeBudget(
            directions=cfg.get("probe_directions") or 48,
            ascent_steps=cfg.get("ascent_steps") or 12,
            seed=seed)
    return run_iteration(space, tseq, n_max=cfg["nmax"], stages=cfg["stages"],
                         seed=seed, threads=cfg.get("threads"), **kwargs)


def _run_iterate(cfg, seed):
    report = _iterate_report(cfg, seed)
    if report.aborted:
        code = EXIT_LINEALITY
    elif report.error is not None:
        code = EXIT_VERIFY
    else:
        code = EXIT_OK
    return report.to_json_dict(), code, None


def _run_sic_search(cfg, seed):
    try:
        inst = sic_search(cfg["d"], restarts=cfg["restarts"],
                          max_iters=cfg["max_iters"], seed=seed)
    except SearchFailed as exc:
        result = {"ok": False, "message": str(exc),
                  "overlap_error": exc.error}
        return result, EXIT_VERIFY, None
    if cfg.get("save"):
        save_instance(inst, cfg["save"])
    return {"ok": True, "instance": inst.to_json_dict()}, EXIT_OK, None


def _run_mub_gen(cfg, seed):
    inst = mub_generate(cfg["d"])
    if cfg.get("save"):
        save_instance(inst, cfg["save"])
    return {"ok": True, "instance": inst.to_json_dict()}, EXIT_OK, None


def _run_verify(cfg, seed):
    inst = load_instance(cfg["instance"])
    try:
        report = verify_instance(inst, tol=cfg["tol"])
    except NumericInputError as exc:
        # malformed numerics are a failed verification, not a usage slip
        return {"ok": False, "error": str(exc)}, EXIT_VERIFY, None
    return report.to_json_dict(), EXIT_OK if report.ok else EXIT_VERIFY, None


def _run_pi_check(cfg, seed):
    inst = load_instance(cfg["instance"])
    space = build_space(inst.kind, inst.d)
    report = pi_positivity_check(space, inst, _tseq_from(cfg), cfg["nmax"],
                                 tol=cfg["tol"])
    code = EXIT_OK if report.ok else EXIT_VERIFY
    return report.to_json_dict(), code, report.csv_rows()


def _strip_timing(obj):
    if isinstance(obj, dict):
        return {k: _strip_timing(v) for k, v in obj.items() if k != "wall_time_s"}
    if isinstance(obj, list):
        return [_strip_timing(v) for v in obj]
    return obj


def _iterate_cfg_from_report(payload):
    """Accept either a CLI envelope or a bare iteration report payload."""
    if "schema" in payload and "config" in payload:
        cfg = dict(payload["config"])
        cfg.setdefault("seed", payload.get("seed"))
        stored = payload.get("result")
        return cfg, stored
    config = payload.get("config", payload)
    flat = {"kind": config["space"]["kind"], "d": config["space"]["d"],
            "nmax": config["n_max"], "stages": config["stages"],
            "seed": config["seed"]}
    ts = config["tseq"]
    if ts["rule"] == "affine":
        flat["t0"], flat["slope"] = ts["params"]
    elif ts["rule"] == "geometric":
        flat["t0"], flat["ratio"] = ts["params"]
    else:
        flat["tlist"] = tuple(ts["params"])
    return flat, payload if "stages" in payload else None


def _run_soundness(cfg, seed):
    inst = load_instance(cfg["instance"])
    stored = None
    if cfg.get("report"):
        try:
            with open(cfg["report"]) as fh:
                payload = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read report {cfg['report']}: {exc}")
        run_cfg, stored = _iterate_cfg_from_report(payload)
        run_cfg = {**cfg, **run_cfg}
    else:
        for key in ("kind", "d", "nmax", "stages"):
            if cfg.get(key) is None:
                raise UsageError("soundness needs --report or the full iterate "
                                 "config (--kind -d --t0... --nmax --stages)")
        run_cfg = cfg
    run_seed = run_cfg.get("seed")
    report = _iterate_report(run_cfg, int(run_seed) if run_seed is not None else seed)
    sound = soundness_check(report, inst, tol_scale=cfg["tol_scale"])
    result = {"soundness": sound.to_json_dict(),
              "iterate": report.to_json_dict()}
    ok = sound.ok
    if stored is not None:
        replay_match = (_strip_timing(stored) == _strip_timing(result["iterate"]))
        result["replay_match"] = replay_match
        ok = ok and replay_match
    return result, EXIT_OK if ok else EXIT_VERIFY, None


_RUNNERS = {
    "gram": _run_gram,
    "thresholds": _run_thresholds,
    "build-cone": _run_build_cone,
    "member": _run_member,
    "relation": _run_relation,
    "cnp": _run_cnp,
    "dmin-refute": _run_dmin_refute,
    "probe": _run_probe,
    "iterate": _run_iterate,
    "sic-search": _run_sic_search,
    "mub-gen": _run_mub_gen,
    "verify": _run_verify,
    "pi-check": _run_pi_check,
    "soundness": _run_soundness,
}

_CSV_COMMANDS = ("gram", "pi-check")


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(rows):
    buf = io.StringIO()
    csv.writer(buf).writerows(rows)
    return buf.getvalue()


def run(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required "
                             f"(one of: {', '.join(_SUBCOMMANDS)})")
        cfg = _merge_config(args, _SUBCOMMANDS[args.command])
        seed = _resolve_seed(cfg)
        start = time.perf_counter()
        result, code, csv_rows = _RUNNERS[args.command](cfg, seed)
        wall = time.perf_counter() - start
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OpsysError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if cfg.get("format") == "csv" and args.command in _CSV_COMMANDS:
        _emit(_csv_text(csv_rows), cfg.get("out"))
        return code

    shown = {k: v for k, v in cfg.items()
             if k not in ("out", "config", "format") and v is not None}
    shown["seed"] = seed
    if "tlist" in shown:
        shown["tlist"] = list(shown["tlist"])
    envelope = {
        "schema": 1,
        "tool": {"name": "opsyscone", "version": __version__},
        "command": args.command,
        "config": shown,
        "seed": seed,
        "wall_time_s": wall,
        "result": result,
    }
    _emit(canonical_dumps(envelope, indent=2) + "\n", cfg.get("out"))
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
