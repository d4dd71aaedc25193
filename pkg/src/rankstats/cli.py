"""Command-line interface.

One subcommand per library operation, with table/CSV/JSON output, optional
on-disk caching of sieve tables, a thread bound for the censuses, and
optional figure rendering next to the delimited output.

Exit codes: 0 on success, 1 on domain or verification errors (with a
machine-readable JSON object on stderr), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import __version__, cache, census, construct, report
from .arith import mult_order
from .classify import classify_prime, classify_up, in_Q_pm, in_R_p, varpi_count
from .errors import (
    DomainError,
    InsufficientInputError,
    RangeLimitError,
    VerificationError,
)
from .rank import iq, phi_over_lambda_bound, rank_lower_bound
from .sieve import SPF_CAP, PrimeTable, sieve_primes, spf_table

COMMANDS = {}


def _command(name):
    def wrap(fn):
        COMMANDS[name] = fn
        return fn
    return wrap


def _require(args, *names):
    missing = [n for n in names if getattr(args, n.replace("-", "_"), None) is None]
    if missing:
        _usage_error(f"missing required parameter(s): {', '.join('--' + n for n in missing)}")


def _usage_error(msg: str):
    print(f"error: {msg}", file=sys.stderr)
    raise SystemExit(2)


def _table_for(x: int, args) -> PrimeTable:
    if args.cache_dir is None:
        return PrimeTable(x)
    cdir = Path(args.cache_dir)
    spf_limit = min(x, SPF_CAP)
    primes = cache.load(cdir, cache.KIND_PRIMES, x)
    spf = cache.load(cdir, cache.KIND_SPF, spf_limit)
    if primes is None:
        primes = sieve_primes(x)
        cache.store(cdir, cache.KIND_PRIMES, x, primes)
    if spf is None:
        spf = spf_table(spf_limit)
        cache.store(cdir, cache.KIND_SPF, spf_limit, spf)
    return PrimeTable(x, primes=primes, spf=spf)


def _emit_record(record: dict, args, extra_table: str = ""):
    if args.output == "json":
        sys.stdout.write(report.dump_json(record))
    elif args.output == "csv":
        flat = {k: v for k, v in record.items()
                if not isinstance(v, (dict, list, tuple))}
        sys.stdout.write(",".join(flat.keys()) + "\n")
        sys.stdout.write(",".join("" if v is None else str(v)
                                  for v in flat.values()) + "\n")
    else:
        for k, v in record.items():
            if isinstance(v, (dict, list, tuple)):
                continue
            sys.stdout.write(f"{k:<18} {v}\n")
        if extra_table:
            sys.stdout.write(extra_table)


def _emit_census(rep: census.CensusReport, args, figure_renderer=None):
    if args.output == "json":
        sys.stdout.write(report.dump_json(report.census_json(rep)))
    elif args.output == "csv":
        sys.stdout.write(report.census_csv(rep))
    else:
        sys.stdout.write(report.census_table(rep))
    if args.figure:
        (figure_renderer or report.render_census_figure)(rep, args.figure)


# ------------------------------------------------------------------ commands
@_command("rank")
def _cmd_rank(args):
    _require(args, "q", "d")
    membership = classify_up(_char_p(args.q), args.d)
    record = {"q": args.q, "d": args.d}
    terms = ""
    if math.gcd(args.q, args.d) == 1:
        bracket = iq(args.q, args.d)
        record.update(i_q=bracket.i_q, lower=bracket.lower, upper=bracket.upper)
        record["terms"] = [[t.divisor, t.phi, t.order, t.contribution]
                           for t in bracket.terms]
        terms = "".join(f"  e={t.divisor:<8} phi={t.phi:<8} order={t.order:<8} "
                        f"contribution={t.contribution}\n" for t in bracket.terms)
    else:
        # the invariant is undefined, but the unconditional bounds below
        # still apply to every d
        record.update(i_q=None, lower=None, upper=None)
    record.update(member=membership.member,
                  witness_exponent=membership.witness_exponent,
                  rejection=membership.rejection)
    if not membership.member:
        record["note"] = ("bracket upper is only certified for divisor-set "
                          "members; unconditional bounds follow")
        record["dp_lower"] = rank_lower_bound(args.q, args.d).lower
        record["phi_over_lambda_lower"] = phi_over_lambda_bound(args.q, args.d).lower
    _emit_record(record, args, terms)


def _char_p(q: int) -> int:
    from .rank import characteristic
    return characteristic(q)[0]


@_command("member")
def _cmd_member(args):
    _require(args, "p", "d")
    ver = classify_up(args.p, args.d)
    _emit_record({
        "p": ver.p, "d": ver.d, "member": ver.member, "k": ver.k,
        "witness_exponent": ver.witness_exponent, "rejection": ver.rejection,
    }, args)


@_command("classify")
def _cmd_classify(args):
    _require(args, "p", "r")
    cls = classify_prime(args.p, args.r)
    record = {"p": cls.p, "r": cls.r, "k": cls.k,
              "in_R_p": in_R_p(args.p, args.r),
              "order": mult_order(args.p, args.r).order}
    if args.m is not None:
        record["m"] = args.m
        record["in_Q_pm"] = in_Q_pm(args.p, args.m, args.r)
    _emit_record(record, args)


@_command("census-rpk")
def _cmd_census_rpk(args):
    _require(args, "p", "x")
    table = _table_for(args.x, args)
    rep = census.rpk_census(args.p, args.x, args.kmax, table=table,
                            threads=args.threads)
    _emit_census(rep, args)


@_command("census-q")
def _cmd_census_q(args):
    _require(args, "p", "m", "x")
    table = _table_for(args.x, args)
    rep = census.qpm_census(args.p, args.m, args.x, table=table,
                            threads=args.threads)
    _emit_census(rep, args)


@_command("census-np")
def _cmd_census_np(args):
    _require(args, "p", "x", "k")
    table = _table_for(args.x, args)
    rep = census.npk_census(args.p, args.x, args.k, table=table,
                            threads=args.threads)
    _emit_census(rep, args)


@_command("census-up")
def _cmd_census_up(args):
    _require(args, "p", "x")
    table = _table_for(args.x, args)
    rep = census.up_census(args.p, args.x, table=table, threads=args.threads,
                           collect_members=args.members)
    _emit_census(rep, args)


@_command("varpi")
def _cmd_varpi(args):
    _require(args, "p", "x", "n", "d")
    table = _table_for(args.x, args)
    count = varpi_count(args.p, args.x, args.n, args.d, table.prime_list(args.x))
    _emit_record({"p": args.p, "x": args.x, "n": args.n, "d": args.d,
                  "count": count}, args)


@_command("survey-average")
def _cmd_survey_average(args):
    _require(args, "q", "x")
    table = _table_for(args.x, args)
    survey = census.average_rank_survey(args.q, args.x, table=table,
                                        threads=args.threads)
    if args.output == "json":
        sys.stdout.write(report.dump_json(report.average_survey_json(survey)))
    elif args.output == "csv":
        sys.stdout.write(report.average_survey_csv(survey))
    else:
        sys.stdout.write(report.average_survey_table(survey))
    if args.figure:
        report.render_average_survey_figure(survey, args.figure)


@_command("survey-normal")
def _cmd_survey_normal(args):
    _require(args, "p", "x")
    sample_size = args.sample_size
    if sample_size is None:
        sample_size = args.x if args.x <= 10**6 else 10**5
    if sample_size < args.x and args.seed is None:
        _usage_error("sampled surveys require --seed (no wall-clock default)")
    table = _table_for(args.x, args)
    survey = census.normal_order_survey(args.p, args.x, sample_size, args.seed,
                                        table=table)
    if args.output == "json":
        sys.stdout.write(report.dump_json(report.normal_survey_json(survey)))
    elif args.output == "csv":
        sys.stdout.write(report.normal_survey_csv(survey))
    else:
        sys.stdout.write(report.normal_survey_table(survey))
    if args.figure:
        report.render_normal_survey_figure(survey, args.figure)


@_command("construct")
def _cmd_construct(args):
    _require(args, "q")
    delta = Fraction(args.delta) if args.delta else construct.DEFAULT_DELTA
    if args.mode == construct.MODE_PAPER:
        _require(args, "x")
        spec = construct.ConstructionSpec(
            q=args.q, mode=args.mode, x=args.x, delta=delta,
            interval_filter=args.interval_filter, limit=args.limit)
    else:
        _require(args, "y", "window")
        spec = construct.ConstructionSpec(
            q=args.q, mode=construct.MODE_DIRECT, y=args.y,
            z_low=args.window[0], z_high=args.window[1], m=args.m or 1,
            interval_filter=bool(args.interval_filter), limit=args.limit)
    derived = spec.derive()
    # --m overrides the derived arity in paper-faithful mode.
    m = args.m if args.m else derived.m
    table = _table_for(derived.z_high, args)
    found = construct.find_Q(spec, table.prime_list())
    if len(found.primes) < m:
        err = InsufficientInputError(len(found.primes), m)
        _fail({"type": "insufficient-input", "message": str(err),
               "available": err.available, "needed": err.needed,
               "diagnostics": found.diagnostics})
    certs = construct.build_candidates(args.q, found.primes, m, args.limit,
                                       m_y=derived.m_y)
    payload = {
        "q": args.q,
        "mode": args.mode,
        "parameters": {
            "p": derived.p, "u": derived.u, "y": derived.y, "m_y": derived.m_y,
            "window": [derived.z_low, derived.z_high],
            "interval": list(derived.interval) if derived.interval else None,
            "m": m,
        },
        "find_q": found.diagnostics,
        **report.certificates_json(certs),
    }
    if args.output == "json":
        sys.stdout.write(report.dump_json(payload))
    elif args.output == "csv":
        sys.stdout.write(report.certificates_csv(certs))
    else:
        sys.stdout.write(f"window [{derived.z_low}, {derived.z_high}], "
                         f"u = {derived.u}, m_y = {derived.m_y}, "
                         f"|Q| = {len(found.primes)}, m = {m}\n")
        sys.stdout.write(report.certificates_table(certs))
    if args.figure:
        report.render_certificates_figure(certs, args.figure)


@_command("verify")
def _cmd_verify(args):
    _require(args, "input")
    if args.input == "-":
        raw = sys.stdin.read()
    else:
        raw = Path(args.input).read_text()
    payload = json.loads(raw)
    entries = payload.get("certificates", [payload]) if isinstance(payload, dict) \
        else payload
    results = []
    for entry in entries:
        for key in ("q", "d", "m_y"):
            if key not in entry:
                raise VerificationError("schema", f"certificate lacks {key!r}")
        cert = construct.certify(entry["q"], entry["d"], entry["m_y"])
        canon = report.certificate_json(cert)
        if canon != entry:
            mism = [k for k in canon if entry.get(k) != canon[k]]
            raise VerificationError(
                "recomputation-mismatch",
                f"certificate for d = {entry['d']} disagrees with "
                f"recomputation on: {', '.join(mism)}")
        results.append({"d": cert.d, "ok": True, "rank_lower": cert.rank_lower})
    record = {"verified": len(results), "results": results}
    if args.output == "json":
        sys.stdout.write(report.dump_json(record))
    else:
        for r in results:
            sys.stdout.write(f"d = {r['d']}: ok (rank_lower = {r['rank_lower']})\n")
        sys.stdout.write(f"verified {len(results)} certificate(s)\n")


# --------------------------------------------------------------------- driver
def _fail(err: dict):
    sys.stderr.write(report.dump_json({"error": err}))
    raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rankstats",
        description="Rank brackets, divisor-set censuses, and certified "
                    "high-rank constructions for the curves "
                    "y^2 + xy = x^3 - t^d over F_q(t).")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add(name, help_, *flags):
        sp = sub.add_parser(name, help=help_)
        for flag, kwargs in flags:
            sp.add_argument(flag, **kwargs)
        sp.add_argument("--output", choices=("table", "csv", "json"),
                        default="table")
        sp.add_argument("--cache-dir", default=None)
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--figure", default=None,
                        help="render a figure of the report to this file")
        sp.add_argument("--config", default=None,
                        help="JSON file of parameter defaults; flags override")
        return sp

    intf = lambda **kw: dict(type=int, **kw)
    add("rank", "exact invariant and rank bracket",
        ("--q", intf()), ("--d", intf()))
    add("member", "divisor-set membership verdict",
        ("--p", intf()), ("--d", intf()))
    add("classify", "order class of an odd prime",
        ("--p", intf()), ("--r", intf()), ("--m", intf()))
    add("census-rpk", "prime census by order class",
        ("--p", intf()), ("--x", intf()), ("--kmax", intf(default=5)))
    add("census-q", "prime census in a residue class within R_p",
        ("--p", intf()), ("--m", intf()), ("--x", intf()))
    add("census-np", "two-part census with inclusion-exclusion check",
        ("--p", intf()), ("--x", intf()), ("--k", intf()))
    add("census-up", "divisor-set member count",
        ("--p", intf()), ("--x", intf()),
        ("--members", dict(action="store_true")))
    add("varpi", "complete-splitting prime count",
        ("--p", intf()), ("--x", intf()), ("--n", intf()), ("--d", intf()))
    add("survey-average", "invariant distribution over members",
        ("--q", intf()), ("--x", intf()))
    add("survey-normal", "order-statistic survey",
        ("--p", intf()), ("--x", intf()), ("--sample-size", intf()),
        ("--seed", intf()))
    add("construct", "find and certify high-rank parameters",
        ("--q", intf()), ("--mode", dict(choices=(construct.MODE_PAPER,
                                                  construct.MODE_DIRECT),
                                         default=construct.MODE_DIRECT)),
        ("--x", intf()), ("--delta", dict(type=str, default=None)),
        ("--y", intf()), ("--window", intf(nargs=2, metavar=("LO", "HI"))),
        ("--m", intf()), ("--limit", intf(default=1000)),
        ("--interval-filter", dict(action=argparse.BooleanOptionalAction,
                                   default=None)))
    add("verify", "re-certify serialized certificates",
        ("--input", dict(type=str)))
    return parser


def _apply_config(parser, argv):
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        _usage_error("--config needs a file path")
    path = argv[idx + 1]
    try:
        conf = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        _usage_error(f"cannot read config {path}: {exc}")
    if not isinstance(conf, dict):
        _usage_error("config must be a JSON object")
    known = {a.replace("_", "-") for a in (
        "q", "p", "d", "x", "m", "n", "k", "y", "delta", "window", "seed",
        "limit", "sample_size", "kmax", "output", "cache_dir", "threads",
        "figure", "r", "mode", "input", "members", "interval_filter")}
    extra = list(argv)
    for key, value in conf.items():
        if key not in known:
            _usage_error(f"unknown config key {key!r}")
        flag = f"--{key}"
        if flag in argv:
            continue  # explicit flags override the config file
        if isinstance(value, bool):
            if value:
                extra.append(flag)
        elif isinstance(value, list):
            extra.append(flag)
            extra.extend(str(v) for v in value)
        else:
            extra.extend([flag, str(value)])
    return extra


def main(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    argv = _apply_config(parser, argv)
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    if args.threads < 1:
        _usage_error("--threads must be >= 1")
    try:
        COMMANDS[args.command](args)
    except InsufficientInputError as exc:
        _fail({"type": "insufficient-input", "message": str(exc),
               "available": exc.available, "needed": exc.needed})
    except VerificationError as exc:
        _fail({"type": "verification", "clause": exc.clause, "message": str(exc)})
    except RangeLimitError as exc:
        _fail({"type": "range", "message": str(exc)})
    except DomainError as exc:
        _fail({"type": "domain", "message": str(exc)})
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
