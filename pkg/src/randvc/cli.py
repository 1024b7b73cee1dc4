"""Command-line front end.

Every report is JSON with sorted keys and rationals printed as p/q, so the
same argv and seed always give the same bytes.  Exit codes: 0 success,
1 usage or input error, 2 when a bound verification finds a VIOLATION.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from . import __version__
from .bounds import main_theorem_bound, stability_bound, verify_bound
from .dividing_lines import (
    ladder_from_shatter,
    ladder_from_sop,
    ladder_index,
    measure_ladder,
    randomized_ladder,
    randomized_vc,
    sop_chain,
    vc_dim,
)
from .indiscernibles import FLAVORS, RamseyOverflow, RowArray, array_colors, ramsey_extract, ramsey_upper_bound
from .measures import AverageMeasure, Side, approximate_measure, min_support_oracle, parse_measure
from .randomization import bracket_prob, parse_randomization, to_measure, transfer_identity_check
from .structures import (
    FormulaTable,
    dump_table,
    format_rational,
    gen_random,
    make_rng,
    parse_generator,
    read_table,
)

SCHEMA = "randvc/1"
EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def rational_arg(text: str) -> Fraction:
    """Integers or p/q only; decimals would invite float round-trips."""
    t = text.strip()
    num, slash, den = t.partition("/")
    ok = num.lstrip("-").isdigit() and (not slash or den.isdigit())
    if not ok:
        raise argparse.ArgumentTypeError(f"expected an integer or p/q, got {text!r}")
    try:
        return Fraction(t)
    except ZeroDivisionError:
        raise argparse.ArgumentTypeError(f"zero denominator in {text!r}") from None


def seed_arg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# -- operations shared by single runs and sweeps ------------------------------


@dataclass
class ExperimentConfig:
    operation: str
    instances: list[str] = field(default_factory=list)
    params: dict = field(default_factory=dict)
    seed: int = 0
    random_sweep: dict | None = None
    out: str | None = None
    csv: str | None = None

    def __post_init__(self):
        if self.operation not in OPERATIONS:
            raise UsageError(f"unknown operation {self.operation!r}; choose from {sorted(OPERATIONS)}")
        p = self.params
        if "r" in p and "s" in p and Fraction(p["r"]) >= Fraction(p["s"]):
            raise UsageError("config needs r < s")
        if not 0 <= int(self.seed) < 2**64:
            raise UsageError("seed must fit in an unsigned 64-bit integer")

    @classmethod
    def from_json(cls, text: str) -> ExperimentConfig:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"config is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise UsageError("config must be a JSON object")
        known = {"operation", "instances", "params", "seed", "random_sweep", "out", "csv"}
        extra = set(raw) - known
        if extra:
            raise UsageError(f"unknown config keys: {sorted(extra)}")
        if "operation" not in raw:
            raise UsageError("config needs an 'operation'")
        params = {key: _param(key, v) for key, v in raw.get("params", {}).items()}
        return cls(raw["operation"], list(raw.get("instances", [])), params, int(raw.get("seed", 0)),
                   raw.get("random_sweep"), raw.get("out"), raw.get("csv"))


_RATIONAL_PARAMS = {"r", "s", "eps"}
_INT_PARAMS = {"k", "tmax", "nmax", "search_cap"}


def _param(key: str, v):
    if key in _RATIONAL_PARAMS:
        try:
            return rational_arg(str(v))
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"param {key}: {exc}") from None
    if key in _INT_PARAMS:
        if not isinstance(v, int) or v < 1:
            raise UsageError(f"param {key} must be a positive integer")
        return v
    raise UsageError(f"unknown param {key!r}")


def _op_vc(table, p):
    res = vc_dim(table, p.get("nmax"))
    out = res.to_json()
    lad = ladder_from_shatter(res.witness)
    out["derived_ladder"] = {"length": len(lad), "verified": lad.verify(table), **lad.to_json()}
    return out


def _op_ladder(table, p):
    return ladder_index(table, p.get("r", 0), p.get("s", 1), p.get("nmax")).to_json()


def _op_sop(table, p):
    res = sop_chain(table, p.get("eps", 1))
    out = res.to_json()
    if res.witness.epsilon == 1 and table.is_classical:
        lad = ladder_from_sop(res.witness)
        out["derived_ladder"] = {"length": len(lad), "verified": lad.verify(table), **lad.to_json()}
    return out


def _need(p, *keys):
    missing = [k for k in keys if k not in p]
    if missing:
        raise UsageError(f"missing parameter(s): {', '.join('--' + k for k in missing)}")


def _op_rvc(table, p):
    _need(p, "r", "s", "k", "tmax")
    return randomized_vc(table, p["r"], p["s"], p["k"], p["tmax"], p.get("nmax")).to_json()


def _op_mladder(table, p):
    _need(p, "r", "s", "k")
    return measure_ladder(table, p["r"], p["s"], p["k"], p.get("nmax")).to_json()


def _op_rladder(table, p):
    _need(p, "r", "s", "k")
    return randomized_ladder(table, p["r"], p["s"], p["k"], p.get("nmax")).to_json()


def _op_verify(table, p):
    _need(p, "r", "s", "k", "tmax")
    return verify_bound(table, p["r"], p["s"], p["k"], p["tmax"], p.get("search_cap", 8)).to_json()


OPERATIONS = {
    "vc": _op_vc,
    "ladder": _op_ladder,
    "sop": _op_sop,
    "rvc": _op_rvc,
    "mladder": _op_mladder,
    "rladder": _op_rladder,
    "verify": _op_verify,
}


def _json_params(p: dict) -> dict:
    return {k: format_rational(v) if isinstance(v, Fraction) else v for k, v in sorted(p.items())}


def _load_instance(source: str, seed: int) -> FormulaTable:
    if source.startswith("file:"):
        return read_table(source[5:])
    return parse_generator(source, seed)


def _random_instances(spec: dict, seed: int) -> list[tuple[str, int]]:
    """Expand a random_sweep block into (generator spec, seed) pairs.

    Table i takes its shape, density and seed from one PCG64 stream, so the
    list depends only on the block and the top-level seed.  ``max_vc``
    rejects tables whose VC dimension is too large and draws again.
    """
    count = int(spec["count"])
    rows = spec.get("rows", [3, 8])
    cols = spec.get("cols", [3, 10])
    dens = [str(rational_arg(str(d))) for d in spec.get("densities", ["1/2"])]
    max_vc = spec.get("max_vc")
    rng = make_rng(seed)
    out: list[tuple[str, int]] = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 100 * count + 1000:
            raise UsageError("random_sweep: too many rejected draws; relax max_vc or the shape")
        nr = int(rng.integers(rows[0], rows[1] + 1))
        nc = int(rng.integers(cols[0], cols[1] + 1))
        d = dens[int(rng.integers(0, len(dens)))]
        s = int(rng.integers(0, 2**63))
        gen = f"random:{nr},{nc},{d}"
        if max_vc is not None and vc_dim(gen_random(nr, nc, Fraction(d), s)).value > max_vc:
            continue
        out.append((gen, s))
    return out


def _run_one(job: tuple[str, str, int, dict]) -> dict:
    op, source, seed, params = job
    table = _load_instance(source, seed)
    result = OPERATIONS[op](table, params)
    return {"instance": source, "seed": seed, "shape": [table.rows, table.cols], "result": result}


def run_config(cfg: ExperimentConfig, jobs: int = 1) -> list[dict]:
    work = [(cfg.operation, src, cfg.seed, cfg.params) for src in cfg.instances]
    if cfg.random_sweep:
        work += [(cfg.operation, g, s, cfg.params) for g, s in _random_instances(cfg.random_sweep, cfg.seed)]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_one, work, chunksize=max(1, len(work) // (4 * jobs))))
    return [_run_one(w) for w in work]


def _status(row: dict) -> str:
    return row["result"].get("status", "ok")


def sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["instance", "seed", "rows", "cols", "index", "value", "capped", "status"])
    for row in rows:
        res = row["result"]
        search = res.get("search", res)
        w.writerow([row["instance"], row["seed"], row["shape"][0], row["shape"][1],
                    search.get("index_name", ""), search.get("value", ""),
                    search.get("capped", ""), _status(row)])
    return buf.getvalue()


# -- argument handling ---------------------------------------------------------


def _add_source(p: argparse.ArgumentParser, required: bool = True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--gen", metavar="NAME:PARAMS", help="halfgraph:n, powerset:n, intervals:n or random:rows,cols,p/q")
    g.add_argument("--file", metavar="PATH", help="table v1 document")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=seed_arg, default=0, help="u64 seed (default 0), echoed in the report")
    p.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="randvc", description="Brute-force dividing-line indices on finite formula tables.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="emit a generated table as a table v1 document")
    _add_source(p)
    _add_common(p)

    for name, helptext, extra in [
        ("vc", "VC dimension with a shatter witness", ()),
        ("ladder", "ladder (order property) index", ("r", "s")),
        ("sop", "longest strict-order chain", ("eps",)),
        ("rvc", "randomized VC dimension over k-averages", ("r", "s", "k", "tmax")),
        ("mladder", "ladder between k-average row measures and columns", ("r", "s", "k")),
        ("rladder", "ladder between k-average row and column measures", ("r", "s", "k")),
        ("verify", "check randomized_vc against the explicit bound", ("r", "s", "k", "tmax")),
    ]:
        p = sub.add_parser(name, help=helptext)
        _add_source(p, required=name != "verify")
        _add_common(p)
        if "r" in extra:
            p.add_argument("--r", type=rational_arg, default=None if name not in ("ladder",) else Fraction(0))
            p.add_argument("--s", type=rational_arg, default=None if name not in ("ladder",) else Fraction(1))
        if "k" in extra:
            p.add_argument("--k", type=positive_int)
        if "tmax" in extra:
            p.add_argument("--tmax", type=positive_int)
        if "eps" in extra:
            p.add_argument("--eps", type=rational_arg, default=Fraction(1))
        if name != "sop":
            p.add_argument("--nmax", type=positive_int)
        if name == "verify":
            p.add_argument("--search-cap", type=positive_int, default=8, dest="search_cap")
            p.add_argument("--sweep", metavar="CONFIG", help="JSON config; one verdict line per table")
            p.add_argument("--jobs", type=positive_int, default=1)
            p.add_argument("--csv", metavar="PATH", help="also write the sweep table as CSV")

    p = sub.add_parser("ramsey", help="hypergraph Ramsey bound, optionally with an extraction")
    p.add_argument("--colors", type=positive_int)
    p.add_argument("--n", type=positive_int, required=True)
    p.add_argument("--m", type=positive_int, required=True)
    _add_source(p, required=False)
    p.add_argument("--array", metavar="PATH", help="array v1 document over the table")
    p.add_argument("--random-array", metavar="M,K", help="draw an (M,K)-array of rows with the seed")
    p.add_argument("--flavor", choices=FLAVORS, default="plain")
    p.add_argument("--r", type=rational_arg, default=Fraction(0))
    p.add_argument("--s", type=rational_arg, default=Fraction(1))
    _add_common(p)

    p = sub.add_parser("approx", help="least uniform sample approximating a measure")
    _add_source(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--support", metavar="I,J,...", help="uniform measure over these rows (multiset)")
    g.add_argument("--measure", metavar="LINE", help="'measure v1 row i:w ...'")
    p.add_argument("--eps", type=rational_arg, required=True)
    p.add_argument("--nmax", type=positive_int, help="also run the exact minimum-size oracle up to this size")
    _add_common(p)

    p = sub.add_parser("bracket", help="bracket probability of two random elements")
    _add_source(p)
    p.add_argument("--randomization", metavar="PATH", required=True,
                   help="space v1 / relem v1 lines; the first two relems are f (rows) and g (columns)")
    _add_common(p)

    p = sub.add_parser("bounds", help="explicit bound report")
    p.add_argument("--d", type=int, required=True, help="VC dimension, or ladder index with --ladder")
    p.add_argument("--r", type=rational_arg, required=True)
    p.add_argument("--s", type=rational_arg, required=True)
    p.add_argument("--k", type=positive_int, required=True)
    p.add_argument("--ladder", action="store_true", help="report the ladder bound instead")
    _add_common(p)

    p = sub.add_parser("sweep", help="run an operation over the instances of a JSON config")
    p.add_argument("--config", metavar="PATH", required=True)
    p.add_argument("--jobs", type=positive_int, default=1)
    p.add_argument("--csv", metavar="PATH")
    _add_common(p)
    return parser


def _table(args) -> FormulaTable:
    if args.file:
        return read_table(args.file)
    return parse_generator(args.gen, args.seed)


def _source(args) -> str:
    return f"file:{args.file}" if args.file else args.gen


def _params(args, keys: Sequence[str]) -> dict:
    out = {}
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            out[k] = v
    return out


def _report(command: str, args, body: dict) -> dict:
    return {"schema": SCHEMA, "command": command, "seed": args.seed, **body}


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_gen(args) -> int:
    _emit(dump_table(_table(args)), args.out)
    return EXIT_OK


def _cmd_index(args) -> int:
    params = _params(args, ["r", "s", "k", "tmax", "nmax", "eps", "search_cap"])
    if "r" in params and "s" in params and params["r"] >= params["s"]:
        raise UsageError("need r < s")
    table = _table(args)
    result = OPERATIONS[args.command](table, params)
    result["seed"] = args.seed
    rep = _report(args.command, args, {"instance": _source(args), "params": _json_params(params), "result": result})
    _emit(dumps(rep), args.out)
    return EXIT_VIOLATION if result.get("status") == "VIOLATION" else EXIT_OK


def _cmd_verify(args) -> int:
    if args.sweep:
        with open(args.sweep, encoding="utf-8") as fh:
            cfg = ExperimentConfig.from_json(fh.read())
        if cfg.operation != "verify":
            raise UsageError("verify --sweep needs a config with operation 'verify'")
        rows = run_config(cfg, args.jobs)
        lines = [json.dumps({"instance": r["instance"], "seed": r["seed"], "status": _status(r),
                             "vc_d": r["result"]["vc_d"], "value": r["result"]["search"]["value"]},
                            sort_keys=True) for r in rows]
        _emit("\n".join(lines) + "\n", args.out)
        if args.csv:
            _emit(sweep_csv(rows), args.csv)
        return EXIT_VIOLATION if any(_status(r) == "VIOLATION" for r in rows) else EXIT_OK
    if not (args.gen or args.file):
        raise UsageError("verify needs --gen, --file or --sweep")
    return _cmd_index(args)


def _cmd_ramsey(args) -> int:
    body: dict[str, Any] = {"n": args.n, "m": args.m}
    if args.n > args.m:
        raise UsageError("need n <= m")
    arr = None
    if args.array or args.random_array:
        if not (args.gen or args.file):
            raise UsageError("an array needs a table (--gen or --file)")
        table = _table(args)
        if args.array:
            from .indiscernibles import parse_array

            with open(args.array, encoding="utf-8") as fh:
                arr = parse_array(fh.read(), table)
        else:
            try:
                M, K = (int(x) for x in args.random_array.split(","))
            except ValueError:
                raise UsageError("--random-array expects M,K") from None
            rng = make_rng(args.seed)
            cells = rng.integers(0, table.rows, size=(M, K)).tolist()
            arr = RowArray(tuple(tuple(r) for r in cells), table)
        if args.m > arr.m:
            raise UsageError("need m <= array length")
        body["instance"] = _source(args)
        body["flavor"] = args.flavor
        body["array_colors"] = len(array_colors(arr, args.n, args.flavor, args.r, args.s))
    colors = args.colors if args.colors is not None else body.get("array_colors")
    if colors is None:
        raise UsageError("ramsey needs --colors or an array")
    body["colors"] = colors
    try:
        body["N_bound"] = ramsey_upper_bound(colors, args.n, args.m)
    except RamseyOverflow:
        body["N_bound"] = "overflow"
    if arr is not None:
        ext = ramsey_extract(arr, args.n, args.m, args.flavor, r=args.r, s=args.s)
        body["array"] = [list(r) for r in arr.cells]
        body["extraction"] = None if ext is None else list(ext.indices)
    _emit(dumps(_report("ramsey", args, body)), args.out)
    return EXIT_OK


def _cmd_approx(args) -> int:
    table = _table(args)
    if args.measure:
        mu = parse_measure(args.measure, table)
    else:
        try:
            idx = [int(x) for x in args.support.split(",")]
        except ValueError:
            raise UsageError("--support expects comma-separated row indices") from None
        mu = AverageMeasure.uniform(table, idx, Side.ROW)
    cert = approximate_measure(mu, args.eps)
    body = {"instance": _source(args), "measure": [[i, format_rational(w)] for i, w in mu.support],
            "certificate": cert.to_json()}
    if args.nmax:
        found = min_support_oracle(mu, args.eps, args.nmax)
        body["min_support"] = found if found is not None else f">{args.nmax}"
    _emit(dumps(_report("approx", args, body)), args.out)
    return EXIT_OK


def _cmd_bracket(args) -> int:
    table = _table(args)
    with open(args.randomization, encoding="utf-8") as fh:
        _, elems = parse_randomization(fh.read())
    if len(elems) < 2:
        raise UsageError("randomization file needs two relem lines")
    f, g = elems[0], elems[1]
    body: dict[str, Any] = {"instance": _source(args)}
    if f.space == g.space:
        body["bracket"] = format_rational(bracket_prob(f, g, table))
    mu, nu = to_measure(f, table, Side.ROW), to_measure(g, table, Side.COLUMN)
    body["pushforward_f"] = [[i, format_rational(w)] for i, w in mu.support]
    body["pushforward_g"] = [[i, format_rational(w)] for i, w in nu.support]
    body["transfer_identity"] = transfer_identity_check(f, g, table)
    _emit(dumps(_report("bracket", args, body)), args.out)
    return EXIT_OK


def _cmd_bounds(args) -> int:
    if args.r >= args.s:
        raise UsageError("need r < s")
    if args.d < 0:
        raise UsageError("--d must be non-negative")
    fn = stability_bound if args.ladder else main_theorem_bound
    rep = fn(args.d, args.r, args.s, args.k)
    _emit(dumps(_report("bounds", args, {"report": rep.to_json()})), args.out)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        cfg = ExperimentConfig.from_json(fh.read())
    rows = run_config(cfg, args.jobs)
    body = {"operation": cfg.operation, "config_seed": cfg.seed, "params": _json_params(cfg.params), "rows": rows}
    _emit(dumps(_report("sweep", args, body)), args.out or cfg.out)
    csv_path = args.csv or cfg.csv
    if csv_path:
        _emit(sweep_csv(rows), csv_path)
    return EXIT_VIOLATION if any(_status(r) == "VIOLATION" for r in rows) else EXIT_OK


COMMANDS = {
    "gen": _cmd_gen,
    "vc": _cmd_index,
    "ladder": _cmd_index,
    "sop": _cmd_index,
    "rvc": _cmd_index,
    "mladder": _cmd_index,
    "rladder": _cmd_index,
    "verify": _cmd_verify,
    "ramsey": _cmd_ramsey,
    "approx": _cmd_approx,
    "bracket": _cmd_bracket,
    "bounds": _cmd_bounds,
    "sweep": _cmd_sweep,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError, IndexError, OSError, KeyError) as exc:
        print(f"randvc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
