"""Batch experiment front end.

Every subcommand maps one library operation onto a reproducible report:
JSON by default, CSV tables with --csv, optional PNG figures with
--figures DIR.  Reports echo the fully resolved configuration, so feeding
the echoed values back reproduces the run.  A JSON config file supplies
defaults (keys are flag names with hyphens as underscores); explicit
flags always win over the file.

Exit codes: 0 success, 1 precondition or numeric failure, 2 capacity
exceeded, 64 usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import metadata

import numpy as np

from .admissible import (
    HTuple,
    is_admissible,
    load_tuple_file,
    parse_tuple_line,
    search_narrow_tuple,
)
from .arith import sieve
from .correlation import ZMatrix, empirical_correlation, euler_product_experiment
from .correlation import polynomial_forms_average
from .errors import (
    CapacityError,
    NumericError,
    PreconditionError,
    UnsupportedCaseError,
)
from .local_factors import (
    LinearFormSystem,
    classify_prime,
    linear_local_factor,
    verify_local_estimates,
)
from .majorant import build_evaluator
from .polynomials import parse_polynomial_list
from .progressions import run_pipeline, search_bounded_gap, search_in_a
from .reports import dump_csv, dump_json, dump_json_lines, report_payload, to_jsonable
from .wtrick import (
    MaynardParams,
    build_maynard_set,
    choose_parameters,
    load_set,
    save_set,
)

EX_OK = 0
EX_FAIL = 1
EX_CAPACITY = 2
EX_USAGE = 64


class _Parser(argparse.ArgumentParser):
    """argparse with the usage exit code this tool promises (64, not 2)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _version_string() -> str:
    try:
        ver = metadata.version("sievelab")
    except metadata.PackageNotFoundError:
        ver = "0+unknown"
    py = sys.version.split()[0]
    return f"sievelab {ver} (python {py}, numpy {np.__version__})"


# ── parser construction ───────────────────────────────────────────────


def build_parser(defaults: dict | None = None) -> _Parser:
    """Construct the CLI; defaults (from a config file) seed every subcommand.

    Subparsers parse into a fresh namespace, so file-sourced defaults must
    be installed on each of them rather than on the root parser; explicit
    flags still override because defaults only fill unparsed slots.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", help="write the report to this file")
    common.add_argument(
        "--csv", action="store_true", help="emit the tabular view instead of JSON"
    )
    common.add_argument(
        "--figures", metavar="DIR", help="render PNG figures into DIR"
    )
    common.add_argument(
        "--threads",
        type=int,
        default=os.cpu_count() or 1,
        help="worker threads for bulk evaluation (results do not depend on it)",
    )
    common.add_argument(
        "--seed", type=int, default=0, help="seed for subset sampling"
    )
    common.add_argument(
        "--config", help="JSON file of default flag values (flags win)"
    )

    ctx = argparse.ArgumentParser(add_help=False)
    ctx.add_argument("--nprime", type=int, help="upper end of the unscaled range")
    ctx.add_argument("--tuple", help='shift offsets, e.g. "0 2 6"')
    ctx.add_argument("--tuple-file", help="file holding one offsets line")
    ctx.add_argument("--m", type=int, help="required count of prime shifts minus one")
    ctx.add_argument("--eps0", type=float, help="roughness exponent in (0,1)")
    ctx.add_argument("--jmax", type=int, default=1, help="form budget per offset")
    ctx.add_argument("--w", type=int, help="override the small-prime cutoff w")
    ctx.add_argument("--eta0", type=float, help="override the sieve exponent")
    ctx.add_argument("--c0", type=float, help="override the scaling constant")
    ctx.add_argument("--b", type=int, help="override the residue class mod W")

    parser = _Parser(
        prog="sievelab",
        description="desk-scale sieve and progression experiments",
    )
    parser.add_argument("--version", action="version", version=_version_string())
    sub = parser.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    subparsers: list[argparse.ArgumentParser] = []

    p = sub.add_parser("sieve", parents=[common], help="prime table statistics")
    subparsers.append(p)
    p.add_argument("--limit", type=int, help="sieve primes up to this bound")
    p.set_defaults(func=_cmd_sieve)

    p = sub.add_parser(
        "admissible", parents=[common], help="verify or search shift tuples"
    )
    subparsers.append(p)
    p.add_argument("--tuple", help='offsets to verify, e.g. "0 2 6"')
    p.add_argument("--tuple-file", help="file holding one offsets line")
    p.add_argument("--narrow", type=int, metavar="K", help="search for a K-tuple")
    p.add_argument(
        "--max-diameter", type=int, help="diameter bound for --narrow"
    )
    p.add_argument(
        "--budget", type=int, default=2_000_000, help="search step budget"
    )
    p.set_defaults(func=_cmd_admissible)

    p = sub.add_parser(
        "maynard-set", parents=[common, ctx], help="build the rough-shift set"
    )
    subparsers.append(p)
    p.add_argument("--out-set", help="also export the members to this file")
    p.set_defaults(func=_cmd_maynard_set)

    p = sub.add_parser(
        "nu-stats", parents=[common, ctx], help="majorant value statistics"
    )
    subparsers.append(p)
    p.add_argument("--n", type=int, help="scan length (default: full scaled range)")
    p.add_argument("--bins", type=int, default=40, help="histogram bucket count")
    p.set_defaults(func=_cmd_nu_stats)

    p = sub.add_parser(
        "local-factors", parents=[common], help="local densities of a form system"
    )
    subparsers.append(p)
    p.add_argument("--forms", help="JSON file holding W, b, shifts, offsets")
    p.add_argument("--pmax", type=int, default=100, help="scan primes up to this")
    p.add_argument(
        "--verify-subsets",
        action="store_true",
        help="also survey subset densities against the scaled bound",
    )
    p.set_defaults(func=_cmd_local_factors)

    p = sub.add_parser(
        "correlation", parents=[common, ctx], help="shifted majorant products"
    )
    subparsers.append(p)
    p.add_argument("--shifts", help='integer shifts, e.g. "0,2"')
    p.add_argument("--n", type=int, help="average length (default: full range)")
    p.add_argument(
        "--euler", action="store_true", help="track the local-factor product"
    )
    p.add_argument(
        "--pmax", type=int, default=10_000, help="prime limit for --euler"
    )
    p.set_defaults(func=_cmd_correlation)

    p = sub.add_parser(
        "poly-forms", parents=[common, ctx], help="polynomial-shift averages"
    )
    subparsers.append(p)
    p.add_argument("--polys", help='shift polynomials, e.g. "y,2*y"')
    p.add_argument("--h", type=int, help="grid side length")
    p.add_argument("--n", type=int, help="average length (default: full range)")
    p.set_defaults(func=_cmd_poly_forms)

    p = sub.add_parser(
        "search", parents=[common], help="find progressions x + P_j(y)"
    )
    subparsers.append(p)
    p.add_argument("--polys", help='polynomials, e.g. "y^2,2*y^2"')
    p.add_argument("--xmax", type=int, help="search x in [1, xmax]")
    p.add_argument("--ymax", type=int, help="search y in [1, ymax]")
    p.add_argument(
        "--bmax",
        type=int,
        help="also require x + P_j(y) + b prime for some b <= bmax",
    )
    p.add_argument(
        "--set-file", help="membership set exported by maynard-set --out-set"
    )
    p.add_argument(
        "--first-only", action="store_true", help="stop at the first hit"
    )
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser(
        "pipeline", parents=[common, ctx], help="count, search, and cross-check"
    )
    subparsers.append(p)
    p.add_argument("--polys", help='progression polynomials with P(0) = 0')
    p.add_argument("--mrange", type=int, help="y ranges over [1, mrange]")
    p.set_defaults(func=_cmd_pipeline)

    p = sub.add_parser("selftest", parents=[common], help="run exact-oracle checks")
    subparsers.append(p)
    p.set_defaults(func=_cmd_selftest)

    if defaults:
        for sp in subparsers:
            sp.set_defaults(**defaults)
    return parser


# ── shared plumbing ───────────────────────────────────────────────────


def _require(args, *names: str) -> None:
    missing = [n for n in names if getattr(args, n.replace("-", "_"), None) is None]
    if missing:
        flags = ", ".join("--" + n for n in missing)
        raise PreconditionError(f"missing required flag(s): {flags}")


def _offsets(args) -> HTuple:
    inline = getattr(args, "tuple", None)
    path = getattr(args, "tuple_file", None)
    if inline is not None and path is not None:
        raise PreconditionError("give --tuple or --tuple-file, not both")
    if inline is not None:
        return parse_tuple_line(inline)
    if path is not None:
        return load_tuple_file(path)
    raise PreconditionError("missing required flag(s): --tuple or --tuple-file")


def _context(args):
    _require(args, "nprime", "m", "eps0")
    t = _offsets(args)
    return choose_parameters(
        args.nprime,
        t,
        args.m,
        args.eps0,
        args.jmax,
        w=args.w,
        eta0=args.eta0,
        c0=args.c0,
        b=args.b,
    )


def _config_echo(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def _write(path: str | None, text: str) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit(args, kind, body, *, header=None, rows=None, figure_paths=None) -> int:
    if args.csv:
        if rows is None:
            flat = to_jsonable(body)
            if not isinstance(flat, dict):
                flat = {"value": flat}
            header = ("key", "value")
            rows = sorted(flat.items())
        text = dump_csv(header, rows)
    else:
        payload = report_payload(kind, _config_echo(args), body)
        if figure_paths is not None:
            payload["figures"] = [str(f) for f in figure_paths]
        text = dump_json(payload)
    _write(args.output, text)
    return EX_OK


def _parse_int_list(text: str, what: str) -> list[int]:
    try:
        return [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError as exc:
        raise PreconditionError(f"cannot parse {what}: {text!r}") from exc


def _downsample(xs, ys, cap: int = 2000):
    stride = max(1, len(xs) // cap)
    return xs[::stride], ys[::stride]


# ── subcommands ───────────────────────────────────────────────────────


def _cmd_sieve(args) -> int:
    _require(args, "limit")
    if args.limit < 2:
        raise PreconditionError(f"--limit must be >= 2, got {args.limit}")
    table = sieve(args.limit)
    primes = table.primes_upto(args.limit)
    gaps = np.diff(primes)
    hist: dict[int, int] = {}
    if gaps.size:
        vals, counts = np.unique(gaps, return_counts=True)
        hist = {int(g): int(c) for g, c in zip(vals, counts)}
    body = {
        "limit": args.limit,
        "prime_count": int(primes.size),
        "largest_prime": int(primes[-1]) if primes.size else None,
        "first_primes": [int(p) for p in primes[:20]],
        "gap_histogram": hist,
    }
    figs = None
    if args.figures:
        from . import figures as figmod

        figs = [
            figmod.save_histogram(
                args.figures,
                "prime_gaps.png",
                gaps.tolist(),
                bins=max(4, min(40, len(hist) or 4)),
                title=f"prime gaps up to {args.limit}",
                xlabel="gap",
            )
        ]
    rows = [(g, c) for g, c in sorted(hist.items())]
    return _emit(
        args, "sieve", body, header=("gap", "count"), rows=rows, figure_paths=figs
    )


def _cmd_admissible(args) -> int:
    if args.narrow is not None:
        _require(args, "max-diameter")
        res = search_narrow_tuple(args.narrow, args.max_diameter, args.budget)
        body = {
            "tuple": list(res.tuple.h),
            "diameter": res.tuple.diameter,
            "ok": res.ok,
            "evaluations": res.evaluations,
        }
        return _emit(args, "admissible", body)
    t = _offsets(args)
    res = is_admissible(t)
    body = {
        "tuple": list(t.h),
        "diameter": t.diameter,
        "admissible": res.admissible,
        "witness": dict(res.witness.avoided) if res.witness else None,
        "covering_prime": res.covering_prime,
    }
    return _emit(args, "admissible", body)


def _cmd_maynard_set(args) -> int:
    _require(args, "nprime", "m", "eps0")
    t = _offsets(args)
    params = MaynardParams(offsets=t, m=args.m, epsilon0=args.eps0, nprime=args.nprime)
    table = sieve(args.nprime + t.h[-1])
    members = build_maynard_set(params, table)
    if args.out_set:
        save_set(args.out_set, members, params)
    body = {
        "size": int(members.size),
        "density": float(members.size) / args.nprime,
        "min": int(members[0]) if members.size else None,
        "max": int(members[-1]) if members.size else None,
        "first_members": [int(x) for x in members[:20]],
        "exported_to": args.out_set,
    }
    figs = None
    if args.figures and members.size:
        from . import figures as figmod

        xs, ys = _downsample(
            members.tolist(), list(range(1, members.size + 1))
        )
        figs = [
            figmod.save_series(
                args.figures,
                "set_growth.png",
                xs,
                ys,
                title="members below n",
                xlabel="n",
                ylabel="count",
            )
        ]
    rows = [(int(x),) for x in members]
    return _emit(
        args, "maynard-set", body, header=("member",), rows=rows, figure_paths=figs
    )


def _cmd_nu_stats(args) -> int:
    ctx = _context(args)
    ev = build_evaluator(ctx)
    n = args.n if args.n is not None else ctx.N
    if not 1 <= n <= ctx.N:
        raise PreconditionError(f"--n must lie in [1, {ctx.N}], got {n}")
    window = np.concatenate(ev.chunked_values(1, n, args.threads))
    mean = ev.mean(n, args.threads)
    counts, edges = np.histogram(window, bins=args.bins)
    body = {
        "params": ctx,
        "N": n,
        "mean": mean,
        "min": float(window.min()),
        "max": float(window.max()),
        "histogram": {
            "edges": [float(e) for e in edges],
            "counts": [int(c) for c in counts],
        },
    }
    figs = None
    if args.figures:
        from . import figures as figmod

        running = np.cumsum(window) / np.arange(1, n + 1)
        xs, ys = _downsample(list(range(1, n + 1)), running.tolist())
        figs = [
            figmod.save_histogram(
                args.figures,
                "nu_values.png",
                window.tolist(),
                bins=args.bins,
                title="majorant values",
                xlabel="nu(x)",
            ),
            figmod.save_series(
                args.figures,
                "nu_running_mean.png",
                xs,
                ys,
                title="running mean of nu",
                xlabel="x",
                ylabel="mean",
            ),
        ]
    rows = [
        (float(edges[i]), float(edges[i + 1]), int(counts[i]))
        for i in range(len(counts))
    ]
    return _emit(
        args,
        "nu-stats",
        body,
        header=("bucket_lo", "bucket_hi", "count"),
        rows=rows,
        figure_paths=figs,
    )


def _load_form_system(path: str) -> LinearFormSystem:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise PreconditionError(f"cannot read forms file {path}: {exc}") from exc
    for key in ("W", "b", "shifts", "offsets"):
        if key not in data:
            raise PreconditionError(f"forms file missing key {key!r}")
    return LinearFormSystem(
        W=int(data["W"]),
        b=int(data["b"]),
        shifts=tuple(int(r) for r in data["shifts"]),
        offsets=tuple(int(h) for h in data["offsets"]),
    )


def _cmd_local_factors(args) -> int:
    _require(args, "forms")
    sys_ = _load_form_system(args.forms)
    if args.pmax < 2:
        raise PreconditionError(f"--pmax must be >= 2, got {args.pmax}")
    table = sieve(args.pmax)
    rows = []
    entries = []
    for p in (int(q) for q in table.primes_upto(args.pmax)):
        c = linear_local_factor(sys_, p, range(sys_.size))
        kind = classify_prime(sys_, p).kind.value
        rows.append((p, kind, c.numerator, c.denominator))
        entries.append(
            {"p": p, "class": kind, "num": c.numerator, "den": c.denominator}
        )
    body = {
        "system": sys_,
        "pmax": args.pmax,
        "factors": entries,
    }
    if args.verify_subsets:
        body["subset_survey"] = verify_local_estimates(
            sys_, args.pmax, seed=args.seed, table=table
        )
    figs = None
    if args.figures:
        from . import figures as figmod

        figs = [
            figmod.save_series(
                args.figures,
                "scaled_local_factors.png",
                [r[0] for r in rows],
                [r[0] * r[2] / r[3] for r in rows],
                title="p times the local density",
                xlabel="p",
                ylabel="p * c_p",
                logx=True,
            )
        ]
    return _emit(
        args,
        "local-factors",
        body,
        header=("p", "class", "numerator", "denominator"),
        rows=rows,
        figure_paths=figs,
    )


def _cmd_correlation(args) -> int:
    _require(args, "shifts")
    ctx = _context(args)
    shifts = _parse_int_list(args.shifts, "--shifts")
    n = args.n if args.n is not None else ctx.N
    ev = build_evaluator(ctx)
    rep = empirical_correlation(ev, shifts, n, threads=args.threads)
    body: dict = {"correlation": rep}
    rows = None
    header = None
    figs = None
    if args.euler:
        sys_ = LinearFormSystem.from_context(ctx, shifts)
        z = ZMatrix.zero(ctx.log_R, sys_.k, sys_.j_count)
        euler = euler_product_experiment(sys_, z, args.pmax)
        body["euler"] = euler
        header = ("prime_limit", "partial_product_re", "partial_product_im")
        rows = [
            (cp.prime_limit, cp.partial_product.real, cp.partial_product.imag)
            for cp in euler.checkpoints
        ]
        if args.figures:
            from . import figures as figmod

            figs = [
                figmod.save_convergence(
                    args.figures,
                    "euler_product.png",
                    [cp.prime_limit for cp in euler.checkpoints],
                    [abs(cp.partial_product) for cp in euler.checkpoints],
                    euler.target,
                    title="local-factor product vs target",
                    xlabel="prime limit",
                )
            ]
    return _emit(
        args, "correlation", body, header=header, rows=rows, figure_paths=figs
    )


def _cmd_poly_forms(args) -> int:
    _require(args, "polys", "h")
    ctx = _context(args)
    polys = parse_polynomial_list(args.polys)
    n = args.n if args.n is not None else ctx.N
    ev = build_evaluator(ctx)
    rep = polynomial_forms_average(ev, polys, args.h, n, threads=args.threads)
    figs = None
    if args.figures:
        from . import figures as figmod

        xs, ys = _downsample(
            list(range(1, len(rep.grid_averages) + 1)), list(rep.grid_averages)
        )
        figs = [
            figmod.save_series(
                args.figures,
                "grid_averages.png",
                xs,
                ys,
                title="per-point shifted products",
                xlabel="grid index",
                ylabel="average",
            )
        ]
    rows = [(i + 1, v) for i, v in enumerate(rep.grid_averages)]
    return _emit(
        args,
        "poly-forms",
        rep,
        header=("grid_index", "average"),
        rows=rows,
        figure_paths=figs,
    )


def _cmd_search(args) -> int:
    _require(args, "polys", "xmax", "ymax")
    polys = parse_polynomial_list(args.polys)
    if any(q.nvars > 1 for q in polys):
        raise UnsupportedCaseError("search handles univariate polynomials only")
    if args.xmax < 1 or args.ymax < 1:
        raise PreconditionError("--xmax and --ymax must be >= 1")
    if args.bmax is not None:
        hits = search_bounded_gap(
            polys, args.bmax, args.xmax, args.ymax, first_only=args.first_only
        )
    else:
        if args.set_file:
            members, _params = load_set(args.set_file)
            arr = np.sort(np.asarray(members, dtype=np.int64))
        else:
            reach = 0
            for q in polys:
                reach = max(
                    reach, max(q.evaluate(y) for y in range(1, args.ymax + 1))
                )
            bound = max(2, args.xmax + reach)
            arr = sieve(bound).primes_upto(bound)
        hits = search_in_a(arr, polys, args.xmax, args.ymax, args.first_only)
    lines = [
        {"x": h.x0, "y": h.y0, "gap": h.gap, "values": list(h.values)}
        for h in hits
    ]
    figs = None
    if args.figures and hits:
        from . import figures as figmod

        figs = [
            figmod.save_scatter(
                args.figures,
                "hits.png",
                [h.x0 for h in hits],
                [h.y0 for h in hits],
                title="progression hits",
                xlabel="x",
                ylabel="y",
            )
        ]
    if args.csv:
        rows = [
            (h.x0, h.y0, h.gap, json.dumps(list(h.values))) for h in hits
        ]
        text = dump_csv(("x", "y", "gap", "values"), rows)
    else:
        text = dump_json_lines(lines)
    _write(args.output, text)
    if figs:
        print("\n".join(figs), file=sys.stderr)
    return EX_OK


def _cmd_pipeline(args) -> int:
    _require(args, "nprime", "m", "eps0", "polys", "mrange")
    t = _offsets(args)
    polys = parse_polynomial_list(args.polys)
    rep = run_pipeline(
        args.nprime,
        t,
        args.m,
        args.eps0,
        polys,
        args.mrange,
        jmax=args.jmax,
        w=args.w,
        eta0=args.eta0,
        c0=args.c0,
        b=args.b,
    )
    figs = None
    if args.figures and rep.hits:
        from . import figures as figmod

        figs = [
            figmod.save_scatter(
                args.figures,
                "pipeline_hits.png",
                [h.x0 for h in rep.hits],
                [h.y0 for h in rep.hits],
                title="pipeline hits (original coordinates)",
                xlabel="x0",
                ylabel="y0",
            )
        ]
    rows = [
        (h.x0, h.y0, json.dumps(list(h.values))) for h in rep.hits
    ]
    return _emit(
        args,
        "pipeline",
        rep,
        header=("x0", "y0", "values"),
        rows=rows,
        figure_paths=figs,
    )


def _cmd_selftest(args) -> int:
    from . import selftest

    failures = selftest.run()
    return EX_FAIL if failures else EX_OK


# ── entry point ───────────────────────────────────────────────────────


def _find_config(argv: list[str]) -> str | None:
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise PreconditionError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise PreconditionError(f"config {path} must hold a JSON object")
    clean = {
        str(k).replace("-", "_"): v
        for k, v in data.items()
        if not str(k).startswith("_")
    }
    clean.pop("func", None)
    clean.pop("cmd", None)
    return clean


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    try:
        cfg_path = _find_config(argv)
        parser = build_parser(
            _load_config(cfg_path) if cfg_path is not None else None
        )
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            code = exc.code
            if code is None:
                return EX_OK
            return code if isinstance(code, int) else EX_FAIL
        try:
            args.threads = int(args.threads)
        except (TypeError, ValueError):
            raise PreconditionError(f"--threads must be an integer: {args.threads!r}")
        if args.threads < 1:
            raise PreconditionError(f"--threads must be >= 1, got {args.threads}")
        return args.func(args)
    except (PreconditionError, UnsupportedCaseError, NumericError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_FAIL
    except CapacityError as exc:
        print(f"capacity: {exc}", file=sys.stderr)
        return EX_CAPACITY


if __name__ == "__main__":
    raise SystemExit(main())
