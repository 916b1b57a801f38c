"""Command-line front end.

Subcommands::

    gfcohom derham --variety torus --n 2 --truncation 2
    gfcohom cohomology lplus --n 1 --module trivial --kmax 3
    gfcohom cohomology gf --variety affine --n 1 --module weight:1 --kmax 2 --pmax 6
    gfcohom verify main --variety torus --n 1 --module weight:1 --kmax 3 --pmax 6
    gfcohom verify star-leibniz --samples 100 --seed 7
    gfcohom lplus --n 1 --max-degree 4
    gfcohom report

Output is JSON (``--format text`` for a short human summary).  Exit codes:
0 success, 1 malformed configuration, 2 a comparison failed, 3 a result did
not stabilize.  The log level can be set with ``GFCOHOM_LOG_LEVEL``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

from .coefficient_modules import LPlusModule, parse_module_spec
from .cochain_complex import lplus_cohomology, sound_truncation, stabilized_gf_cohomology
from .coordinate_algebras import Affine, PuncturedSphere, Torus, parse_variety
from .derham import derham_betti
from .kunneth import (
    SemidirectContext,
    assemble_rhs,
    compare_main_theorem,
    random_star_sample,
    verify_star_leibniz,
)
from .lie_vectorfields import build_lplus

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_MISMATCH, EXIT_UNSTABLE = 0, 1, 2, 3

log = logging.getLogger("gfcohom")

DEFAULTS: Dict[str, Any] = {
    "variety": "affine",
    "n": 1,
    "punctures": "0",
    "module": "trivial",
    "truncation": 2,
    "kmax": 3,
    "pmax": 6,
    "weight": "0",
    "max_degree": 3,
    "samples": 100,
    "seed": 0,
    "threads": 1,
    "format": "json",
}


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _common(p: argparse.ArgumentParser, *names: str) -> None:
    p.add_argument("--config", help="JSON file with default values for the flags")
    p.add_argument("--threads", type=int)
    p.add_argument("--format", choices=["json", "text"])
    p.add_argument("--json", dest="format", action="store_const", const="json")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings (output no longer byte-stable)")
    for name in names:
        if name == "variety":
            p.add_argument("--variety", choices=["affine", "torus", "sphere"])
        elif name == "n":
            p.add_argument("--n", type=int)
        elif name == "punctures":
            p.add_argument("--punctures", help="comma separated rationals, e.g. 0,1,1/2")
        elif name == "module":
            p.add_argument("--module", help="trivial | weight:LAMBDA | standard | path to JSON")
        elif name == "truncation":
            p.add_argument("--truncation", type=int)
        elif name == "kmax":
            p.add_argument("--kmax", type=int)
        elif name == "pmax":
            p.add_argument("--pmax", type=int)
        elif name == "weight":
            p.add_argument("--weight")
        elif name == "max_degree":
            p.add_argument("--max-degree", dest="max_degree", type=int)
        elif name == "samples":
            p.add_argument("--samples", type=int)
        elif name == "seed":
            p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gfcohom", description="Exact Gelfand-Fuks cohomology computations")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("derham", help="de Rham Betti numbers")
    _common(p, "variety", "n", "punctures", "truncation")

    p = sub.add_parser("cohomology", help="cohomology tables")
    csub = p.add_subparsers(dest="target", required=True, parser_class=_Parser)
    q = csub.add_parser("lplus", help="weight slices of H(L+, W)")
    _common(q, "n", "module", "kmax", "truncation", "weight")
    q = csub.add_parser("gf", help="finite-order cohomology with values in A (x) W")
    _common(q, "variety", "n", "module", "kmax", "pmax")

    p = sub.add_parser("verify", help="cross-checks")
    vsub = p.add_subparsers(dest="target", required=True, parser_class=_Parser)
    q = vsub.add_parser("main", help="direct side against de Rham (x) L+ assembly")
    _common(q, "variety", "n", "punctures", "module", "kmax", "pmax")
    q = vsub.add_parser("star-leibniz", help="randomized Leibniz identity of the star map")
    _common(q, "variety", "n", "punctures", "module", "samples", "seed")

    p = sub.add_parser("lplus", help="basis and bracket table of a truncated L+")
    _common(p, "n", "max_degree")

    p = sub.add_parser("report", help="reproduce the affine, torus and punctured-sphere tables")
    _common(p, "kmax", "pmax", "truncation")
    return parser


def _resolve(ns: argparse.Namespace) -> Dict[str, Any]:
    cfg: Dict[str, Any] = {}
    if getattr(ns, "config", None):
        try:
            with open(ns.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
    out: Dict[str, Any] = {}
    for key, default in DEFAULTS.items():
        if not hasattr(ns, key):
            continue
        val = getattr(ns, key)
        if val is None:
            val = cfg.get(key.replace("_", "-"), cfg.get(key, default))
        out[key] = val
    for key in ("n", "truncation", "kmax", "pmax", "max_degree", "samples", "threads"):
        if key in out:
            try:
                out[key] = int(out[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{key} must be an integer") from exc
    minima = {"n": 1, "truncation": 1, "kmax": 0, "pmax": 2, "max_degree": 0, "samples": 1, "threads": 1}
    for key, lo in minima.items():
        if key in out and out[key] < lo:
            raise ConfigError(f"{key} must be >= {lo}")
    if "seed" not in out:
        out["seed"] = cfg.get("seed", DEFAULTS["seed"])
    out["timings"] = bool(getattr(ns, "timings", False))
    return out


def _variety(cfg):
    pts = [p for p in str(cfg.get("punctures", "0")).split(",") if p.strip()]
    try:
        return parse_variety(cfg["variety"], cfg.get("n", 1), [Fraction(p.strip()) for p in pts])
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(str(exc)) from exc


def _module(cfg, n: int) -> LPlusModule:
    try:
        return parse_module_spec(cfg["module"], n)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"bad module spec: {exc}") from exc


def _pmap(fn, items: Sequence, threads: int) -> List:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# ---------------------------------------------------------------- commands


def cmd_derham(cfg) -> Dict[str, Any]:
    var = _variety(cfg)
    rows = _pmap(lambda k: derham_betti(var, k, cfg["truncation"]), range(var.n + 1), cfg["threads"])
    stable = all(r.stabilized for r in rows)
    return {
        "variety": var.label(),
        "dims": [r.betti for r in rows],
        "rows": [r.to_json() for r in rows],
        "stabilized": stable,
        "_exit": EXIT_OK if stable else EXIT_UNSTABLE,
    }


def cmd_cohomology_lplus(cfg) -> Dict[str, Any]:
    W = _module(cfg, cfg["n"])
    try:
        weight = Fraction(cfg["weight"])
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError("weight must be rational") from exc
    need = sound_truncation(W, weight)
    trunc = max(cfg["truncation"], need)
    slices = lplus_cohomology(W, cfg["kmax"], weight, trunc, cfg["threads"])
    return {
        "algebra": f"lplus(n={cfg['n']},max_degree={trunc})",
        "module": W.to_json(),
        "weight": str(weight),
        "truncation": trunc,
        "dims": [s.betti for s in slices],
        "slices": [s.to_json() for s in slices],
        "_exit": EXIT_OK,
    }


def _check_direct(var):
    if not (isinstance(var, Affine) or (isinstance(var, Torus) and var.n == 1)):
        raise ConfigError("direct computation supports affine (any n) and torus with n = 1")


def cmd_cohomology_gf(cfg) -> Dict[str, Any]:
    var = _variety(cfg)
    _check_direct(var)
    W = _module(cfg, var.n)
    results = _pmap(lambda k: stabilized_gf_cohomology(var, W, k, cfg["pmax"]), range(cfg["kmax"] + 1), cfg["threads"])
    stable = all(r.stabilized for r in results)
    return {
        "variety": var.label(),
        "module": W.to_json(),
        "dims": [r.value for r in results],
        "rows": [r.to_json() for r in results],
        "stabilized": stable,
        "_exit": EXIT_OK if stable else EXIT_UNSTABLE,
    }


def cmd_verify_main(cfg) -> Dict[str, Any]:
    var = _variety(cfg)
    W = _module(cfg, var.n)
    rep = compare_main_theorem(var, W, cfg["kmax"], cfg["pmax"], cfg["threads"])
    code = {"confirmed": EXIT_OK, "rhs_only": EXIT_OK, "mismatch": EXIT_MISMATCH, "not_stabilized": EXIT_UNSTABLE}
    rep["_exit"] = code[rep["status"]]
    return rep


def cmd_verify_star(cfg) -> Dict[str, Any]:
    var = _variety(cfg)
    W = _module(cfg, var.n)
    lplus = build_lplus(var.n, max(2, W.annihilation_degree))
    ctx = SemidirectContext(var, lplus, W)
    total = cfg["samples"]
    master = random.Random(cfg["seed"])
    shapes = [(k, m) for k in range(var.n + 1) for m in range(3)]
    jobs = []
    left = total
    while left > 0:
        k, m = shapes[len(jobs) % len(shapes)]
        take = min(4, left)
        jobs.append((master.getrandbits(64), k, m, take))
        left -= take

    def run(job):
        seed, k, m, take = job
        alpha, beta, samples = random_star_sample(random.Random(seed), var, ctx, k, m, n_args=take)
        return verify_star_leibniz(alpha, k, beta, ctx, samples)

    tallies = _pmap(run, jobs, cfg["threads"])
    passed = sum(p for p, _ in tallies)
    return {
        "variety": var.label(),
        "module": W.to_json(),
        "seed": cfg["seed"],
        "passed": passed,
        "total": total,
        "tally": f"{passed}/{total}",
        "_exit": EXIT_OK if passed == total else EXIT_MISMATCH,
    }


def cmd_lplus(cfg) -> Dict[str, Any]:
    alg = build_lplus(cfg["n"], cfg["max_degree"])
    table = []
    for i in range(len(alg)):
        for j in range(i + 1, len(alg)):
            vec = alg.bracket(i, j)
            if vec.entries:
                table.append({
                    "i": i,
                    "j": j,
                    "bracket": {str(alg.basis[t]): str(c) for t, c in vec.entries},
                })
    return {
        "algebra": alg.name,
        "dim": len(alg),
        "basis": [{"index": i, "label": str(g), "weight": g.weight} for i, g in enumerate(alg.basis)],
        "brackets": table,
        "_exit": EXIT_OK,
    }


def cmd_report(cfg) -> Dict[str, Any]:
    K = cfg["truncation"]
    kmax, pmax = cfg["kmax"], cfg["pmax"]
    out: Dict[str, Any] = {"derham": [], "lplus": [], "main": [], "kn": []}
    worst = EXIT_OK
    varieties = [Affine(n) for n in (1, 2, 3)] + [Torus(n) for n in (1, 2, 3)]
    varieties += [PuncturedSphere(tuple(range(m))) for m in (1, 2, 3)]
    for var in varieties:
        rows = _pmap(lambda k: derham_betti(var, k, K), range(var.n + 1), cfg["threads"])
        out["derham"].append({"variety": var.label(), "dims": [r.betti for r in rows],
                              "stabilized": all(r.stabilized for r in rows)})
        if not all(r.stabilized for r in rows):
            worst = max(worst, EXIT_UNSTABLE)
    lplus_dims = {}
    for spec in ("trivial", "weight:1", "weight:-1"):
        W = parse_module_spec(spec, 1)
        dims = [s.betti for s in lplus_cohomology(W, kmax, 0, max(3, sound_truncation(W)))]
        lplus_dims[spec] = dims
        out["lplus"].append({"module": spec, "dims": dims})
    for var, spec in [(Affine(1), "trivial"), (Affine(1), "weight:1"), (Affine(1), "weight:-1"), (Torus(1), "trivial")]:
        rep = compare_main_theorem(var, parse_module_spec(spec, 1), min(kmax, 2), pmax, cfg["threads"])
        out["main"].append({"variety": var.label(), "module": spec, "direct": rep["direct"],
                            "rhs": rep["rhs"]["dims"], "status": rep["status"]})
        if rep["status"] == "mismatch":
            worst = max(worst, EXIT_MISMATCH)
        elif rep["status"] != "confirmed":
            worst = max(worst, EXIT_UNSTABLE)
    for m in (1, 2, 3):
        var = PuncturedSphere(tuple(range(m)))
        for spec, h in lplus_dims.items():
            rhs, _, _ = assemble_rhs(var, parse_module_spec(spec, 1), kmax, K, lplus_dims=h)
            expected = [h[k] + m * (h[k - 1] if k else 0) for k in range(kmax + 1)]
            ok = rhs.dims == expected
            out["kn"].append({"punctures": m, "module": spec, "dims": rhs.dims, "expected": expected, "match": ok})
            if not ok:
                worst = max(worst, EXIT_MISMATCH)
    out["_exit"] = worst
    return out


COMMANDS = {
    ("derham", None): cmd_derham,
    ("cohomology", "lplus"): cmd_cohomology_lplus,
    ("cohomology", "gf"): cmd_cohomology_gf,
    ("verify", "main"): cmd_verify_main,
    ("verify", "star-leibniz"): cmd_verify_star,
    ("lplus", None): cmd_lplus,
    ("report", None): cmd_report,
}


def _text(result: Dict[str, Any]) -> str:
    lines = []
    for key, val in result.items():
        if key in ("config", "schema_version"):
            continue
        if isinstance(val, (list, dict)) and len(json.dumps(val)) > 100:
            val = json.dumps(val)[:97] + "..."
        lines.append(f"{key}: {val}")
    return "\n".join(lines)


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    level = os.environ.get("GFCOHOM_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=stderr)
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        cfg = _resolve(ns)
        fn = COMMANDS[(ns.command, getattr(ns, "target", None))]
        start = time.perf_counter()
        result = fn(cfg)
        elapsed = time.perf_counter() - start
    except ConfigError as exc:
        print(f"gfcohom: error: {exc}", file=stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    code = result.pop("_exit")
    command = ns.command + (f" {ns.target}" if getattr(ns, "target", None) else "")
    report = {"schema_version": SCHEMA_VERSION, "command": command, "config": {k: v for k, v in cfg.items() if k != "timings"}}
    report.update(result)
    report["exit_code"] = code
    if cfg["timings"]:
        report["timings"] = {"wall_seconds": round(elapsed, 6)}
    log.info("%s finished with exit code %d", command, code)
    if cfg.get("format") == "text":
        print(_text(report), file=stdout)
    else:
        print(json.dumps(report, indent=2, sort_keys=True), file=stdout)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
