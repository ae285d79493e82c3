"""Command-line interface.

Every command writes one record set, as CSV (header row then records) or as
a JSON object ``{"config": ..., "results": [...]}``.  Floats carry 12
significant digits.  Exit status: 0 on success, 2 on invalid arguments, 1
when a size guard is hit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from . import stats, walks
from .cayley import sample_uniform_parking
from .errors import InvalidInputError, ParkfunError, SizeLimitError
from .parking import count_parking, enumerate_parking
from .selftest import run_selftest
from .streams import DEFAULT_SEED, TAG_PARKING, map_replicates

COMMANDS = ("sample", "enumerate", "pmf", "cdf", "tv", "kolmogorov", "limit-sum", "limit-max", "tail", "selftest")

PMF_DP_MAX_CELLS = 10**4

DEFAULT_SAMPLES = {
    "sample": 1,
    "tv": 10000,
    "kolmogorov": 10000,
    "limit-sum": 2000,
    "limit-max": 2000,
    "tail": 50000,
}


@dataclass
class RunConfig:
    command: str
    n: Optional[object] = None
    k: Optional[int] = None
    a: Optional[int] = None
    c: Optional[float] = None
    seed: int = DEFAULT_SEED
    samples: Optional[int] = None
    method: str = stats.AUTO
    format: str = "csv"
    out: Optional[str] = None


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    if isinstance(v, (list, tuple)):
        return " ".join(str(x) for x in v)
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (float, np.floating)):
        return float(f"{float(v):.12g}")
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


def render(config: RunConfig, rows: list[dict]) -> str:
    if config.format == "json":
        payload = {
            "config": {key: _json_value(v) for key, v in asdict(config).items()},
            "results": [{key: _json_value(v) for key, v in row.items()} for row in rows],
        }
        return json.dumps(payload, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if rows:
        header = list(rows[0])
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row[h]) for h in header])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands


def _require(value, flag: str):
    if value is None:
        raise InvalidInputError(f"{flag} is required")
    return value


def _single_n(config: RunConfig) -> int:
    n = _require(config.n, "--n")
    if isinstance(n, list):
        if len(n) != 1:
            raise InvalidInputError("this command takes a single --n")
        n = n[0]
    return n


def cmd_sample(config: RunConfig, threads: int) -> list[dict]:
    n = _single_n(config)
    samples = config.samples
    if samples < 1:
        raise InvalidInputError("--samples must be >= 1")
    pfs = map_replicates(lambda rng: sample_uniform_parking(n, rng), samples, config.seed, TAG_PARKING, threads)
    return [{"replicate": i, "places": list(p.places)} for i, p in enumerate(pfs)]


def cmd_enumerate(config: RunConfig, count_only: bool) -> list[dict]:
    n = _single_n(config)
    if count_only:
        return [{"n": n, "count": len(enumerate_parking(n))}]
    return [{"index": i, "places": list(p.places)} for i, p in enumerate(enumerate_parking(n))]


def pmf_rows(n: int, k: int, method: str) -> list[dict]:
    if method in (stats.AUTO, stats.EXACT_DP) and k <= stats.DP_MAX_K and n <= stats.DP_MAX_N:
        arr = stats.exact_pmf_array(n, k, stats.EXACT_DP)
    elif method == stats.EXACT_ENUM or (method == stats.AUTO and n <= stats.ENUM_MAX_N):
        arr = stats.exact_pmf_array(n, k, stats.EXACT_ENUM)
    elif method in (stats.AUTO, stats.EXACT_DP):
        if n**k > PMF_DP_MAX_CELLS:
            raise SizeLimitError(f"pmf via per-tuple dp needs n^k <= {PMF_DP_MAX_CELLS}")
        arr = np.zeros((n,) * k)
        for key in walks.all_tuples(n, k):
            arr[tuple(i - 1 for i in key)] = walks.joint_pmf(n, key)
    else:
        raise InvalidInputError(f"pmf does not support method {method!r}")
    rows = []
    for key in walks.all_tuples(n, k):
        row = {f"i{j + 1}": v for j, v in enumerate(key)}
        row["probability"] = float(arr[tuple(i - 1 for i in key)])
        rows.append(row)
    return rows


def cmd_cdf(config: RunConfig) -> list[dict]:
    n = _single_n(config)
    k = config.k or 1
    a_values = [config.a] if config.a is not None else list(range(n))
    return [
        {"n": n, "k": k, "a": a, "threshold": n - a, "probability": walks.cdf_symmetric(n, k, a)} for a in a_values
    ]


def _distance_rows(config: RunConfig, threads: int, fn) -> list[dict]:
    ns = _require(config.n, "--n")
    ns = ns if isinstance(ns, list) else [ns]
    k = config.k or 1
    rows = []
    for n in ns:
        rep = fn(n, k, config.method, config.samples, config.seed, threads)
        d = rep.as_dict()
        del d["kind"]
        rows.append({key: d[key] for key in ("n", "k", "value", "sqrt_n_times_value", "method", "samples", "stderr", "lower_bound")})
    return rows


def cmd_limit(config: RunConfig, threads: int, fn) -> list[dict]:
    n = _single_n(config)
    k = _require(config.k, "--k")
    return [fn(n, k, config.samples, config.seed, threads).as_dict()]


def cmd_tail(config: RunConfig, threads: int) -> list[dict]:
    n = _single_n(config)
    c = _require(config.c, "--c")
    a = config.a if config.a is not None else 1
    return [stats.tail_comparison(n, c, a, config.samples, config.seed, threads).as_dict()]


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="parkfun", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name in ("tv", "kolmogorov"):
            p.add_argument("--n", type=int, nargs="+")
        else:
            p.add_argument("--n", type=int)
        p.add_argument("--k", type=int)
        p.add_argument("--a", type=int)
        p.add_argument("--c", type=float)
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--samples", type=int)
        p.add_argument("--method", choices=stats.METHODS, default=stats.AUTO)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out")
        p.add_argument("--threads", type=int, default=1)
        if name == "enumerate":
            p.add_argument("--count-only", action="store_true")
    return parser


def execute(args: argparse.Namespace) -> tuple[RunConfig, list[dict], int]:
    if args.seed < 0 or args.seed >= 2**64:
        raise InvalidInputError("--seed must be a 64-bit unsigned integer")
    samples = args.samples if args.samples is not None else DEFAULT_SAMPLES.get(args.command)
    config = RunConfig(
        command=args.command,
        n=args.n,
        k=args.k,
        a=args.a,
        c=args.c,
        seed=args.seed,
        samples=samples,
        method=args.method,
        format=args.format,
        out=args.out,
    )
    threads = max(1, args.threads)
    status = 0
    cmd = args.command
    if cmd == "sample":
        rows = cmd_sample(config, threads)
    elif cmd == "enumerate":
        rows = cmd_enumerate(config, args.count_only)
    elif cmd == "pmf":
        rows = pmf_rows(_single_n(config), config.k or 1, config.method)
    elif cmd == "cdf":
        rows = cmd_cdf(config)
    elif cmd == "tv":
        rows = _distance_rows(config, threads, stats.tv_distance)
    elif cmd == "kolmogorov":
        rows = _distance_rows(config, threads, stats.kolmogorov_distance)
    elif cmd == "limit-sum":
        rows = cmd_limit(config, threads, stats.sum_clt_test)
    elif cmd == "limit-max":
        rows = cmd_limit(config, threads, stats.max_exponential_test)
    elif cmd == "tail":
        rows = cmd_tail(config, threads)
    else:
        rows = run_selftest()
        status = 0 if all(r["passed"] for r in rows) else 1
    return config, rows, status


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config, rows, status = execute(args)
    except SizeLimitError as exc:
        print(f"parkfun: size limit: {exc}", file=sys.stderr)
        return 1
    except ParkfunError as exc:
        print(f"parkfun: {exc}", file=sys.stderr)
        return 2
    text = render(config, rows)
    if config.out:
        with open(config.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
