"""Command-line front end: ``irvaudit {tabulate,plan,simulate,grid,verify}``."""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import experiment as ex
from .ballots import ParseError, load_election, tabulate_irv
from .plans import (KINDS, METHODS, AuditPlan, FullRecount, build_plan, check_plan_tallies,
                    plan_from_dict, plan_to_dict)
from .raire import raire, verify_plan_soundness

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_RECOUNT = 2

RECOUNT_MSG = "full recount necessary"


class UsageError(Exception):
    pass


def _pct(x: float) -> str:
    return ex.fmt_pct(x)


def _asn(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:.1f}"


def _write(text: str, path: str | None):
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(args):
    return load_election(args.election, args.format)


# -- tabulate ---------------------------------------------------------------

def cmd_tabulate(args) -> int:
    e = _load(args)
    seq = tabulate_irv(e)
    print(f"winner: {e.candidates[seq.winner]}; order: {','.join(e.names(seq.order))}")
    for r in seq.tie_breaks:
        tied = [c for c, v in seq.round_tallies[r].items() if v == min(seq.round_tallies[r].values())]
        print(f"tie in round {r + 1} among {','.join(e.names(tied))}: "
              f"eliminated {e.candidates[seq.order[r]]} (lowest roster index)")
    if not seq.round_tallies:
        print("rounds: 0")
        return EXIT_OK
    header = ["Candidate"] + [f"Rnd{i + 1}" for i in range(len(seq.round_tallies))]
    body = []
    for c in range(e.n):
        body.append([e.candidates[c]] + [f"{t[c]:,}" if c in t else "–" for t in seq.round_tallies])
    sys.stdout.write(ex.table_to_text(header, body))
    return EXIT_OK


# -- plan -------------------------------------------------------------------

def _make_plan(e, args):
    if args.method == "raire":
        from .ballots import reported_winner
        return raire(e, reported_winner(e), args.kind, args.alpha, args.gamma, trace=args.trace)
    return build_plan(e, args.method, args.kind, args.alpha, args.gamma, args.se_strategy)


def cmd_plan(args) -> int:
    e = _load(args)
    plan = _make_plan(e, args)
    if isinstance(plan, FullRecount):
        seq = ",".join(e.names(plan.sequence))
        print(f"{RECOUNT_MSG}: no assertion rules out elimination order {seq}", file=sys.stderr)
        return EXIT_RECOUNT
    doc = plan_to_dict(plan, e)
    _write(json.dumps(doc, indent=1) + "\n", args.output)
    out = sys.stderr if args.output is None else sys.stdout
    for u in plan.units:
        for h in u.hypotheses:
            a = h.asn(plan.kind)
            if math.isinf(a) or a >= e.total:
                print(f"hypothesis {h.describe(e)}: ASN {_asn(a)} exceeds |B| = {e.total}",
                      file=out)
    print(f"overall ASN: {_asn(plan.overall_asn)} ballots ({_pct(plan.asn_pct)}% of {e.total})",
          file=out)
    if plan.overall_asn >= e.total:
        print(RECOUNT_MSG, file=out)
        return EXIT_RECOUNT
    return EXIT_OK


# -- simulate / grid ----------------------------------------------------------

def _emit_rows(rows, args):
    if args.output_format == "json":
        _write(ex.rows_to_json(rows), args.output)
    else:
        _write(ex.rows_to_csv(rows), args.output)


def cmd_simulate(args) -> int:
    e = _load(args)
    if args.reps < 1:
        raise UsageError("reps must be ≥ 1")
    cfg = ex.GridConfig(methods=(args.method,), kinds=(args.kind,), alphas=(args.alpha,),
                        gammas=(args.gamma,), error_rates=(args.error_rate,),
                        zero_error_reps=args.reps, error_seeds=(args.error_seed,),
                        sample_seeds=tuple(range(args.sample_seed, args.sample_seed + args.reps)),
                        max_draws=args.max_draws, se_strategy=args.se_strategy)
    name = Path(args.election).stem
    cell = ex.grid_cells([(name, e)], cfg)[0]
    row = ex.run_cell(cell, cfg)
    _emit_rows([row], args)
    return EXIT_OK


def _parse_list(text, conv=float):
    return tuple(conv(x) for x in text.split(",") if x.strip())


def cmd_grid(args) -> int:
    elections = [(Path(p).stem, load_election(p, args.format)) for p in args.elections]
    if args.reps < 1:
        raise UsageError("reps must be ≥ 1")
    cfg = ex.GridConfig(methods=_parse_list(args.methods, str.lower),
                        kinds=_parse_list(args.kinds, str.lower),
                        alphas=_parse_list(args.alphas), gammas=_parse_list(args.gammas),
                        error_rates=_parse_list(args.error_rates),
                        zero_error_reps=args.reps,
                        error_seeds=tuple(range(args.error_seeds)),
                        sample_seeds=tuple(range(args.sample_seeds)),
                        max_draws=args.max_draws, se_strategy=args.se_strategy)
    rows = ex.run_experiment(elections, cfg, workers=args.workers)
    if args.table == "rows":
        _emit_rows(rows, args)
        return EXIT_OK
    rate = cfg.error_rates[0]
    if args.table == "raire":
        header, body = ex.raire_table(rows, cfg.alphas[0], cfg.gammas, rate)
    else:
        header, body = ex.method_table(rows, args.table, cfg.alphas, cfg.gammas[0], rate)
    if args.output_format == "text":
        _write(ex.table_to_text(header, body), args.output)
    else:
        _write(ex.table_to_csv(header, body), args.output)
    return EXIT_OK


# -- verify -----------------------------------------------------------------

def cmd_verify(args) -> int:
    e = _load(args)
    if args.plan:
        plan = plan_from_dict(json.loads(Path(args.plan).read_text(encoding="utf-8")), e)
    else:
        plan = _make_plan(e, args)
        if isinstance(plan, FullRecount):
            print(RECOUNT_MSG, file=sys.stderr)
            return EXIT_RECOUNT
    bad = check_plan_tallies(plan, e)
    if bad:
        print(f"tally mismatch: {', '.join(h.describe(e) for h in bad)}")
        return EXIT_ERROR
    rep = verify_plan_soundness(plan, e, plan.winner, max_candidates=args.max_candidates)
    if rep.sound:
        print(f"sound: all {rep.checked} alternative elimination orders ruled out")
        return EXIT_OK
    for order in rep.uncovered:
        print(f"uncovered: {','.join(e.names(order))}")
    print("unsound plan")
    return EXIT_ERROR


# -- argument parsing -------------------------------------------------------

def _common(p, multi=False):
    if multi:
        p.add_argument("elections", nargs="+", help="election files")
    else:
        p.add_argument("election", help="election file (.json or .csv)")
    p.add_argument("--format", choices=["json", "csv"], default=None,
                   help="input format (default: by extension)")
    p.add_argument("-o", "--output", default=None, help="write output here instead of stdout")


def _plan_flags(p):
    p.add_argument("--method", choices=METHODS, default="eo")
    p.add_argument("--kind", choices=KINDS, default="bp")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--gamma", type=float, default=1.1)
    p.add_argument("--se-strategy", choices=["asn-greedy", "maximal", "none"],
                   default="asn-greedy")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="irvaudit", description="IRV risk-limiting audit toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tabulate", help="run the IRV count")
    _common(p)
    p.set_defaults(func=cmd_tabulate)

    p = sub.add_parser("plan", help="build an audit plan")
    _common(p)
    _plan_flags(p)
    p.add_argument("--trace", action="store_true", help="include the RAIRE search trace")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="simulate audits of one plan")
    _common(p)
    _plan_flags(p)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--error-rate", type=float, default=0.0)
    p.add_argument("--error-seed", type=int, default=0)
    p.add_argument("--sample-seed", type=int, default=0)
    p.add_argument("--max-draws", type=int, default=None)
    p.add_argument("--output-format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("grid", help="run a parameter grid and emit rows or tables")
    _common(p, multi=True)
    p.add_argument("--methods", default=",".join(METHODS))
    p.add_argument("--kinds", default=",".join(KINDS))
    p.add_argument("--alphas", default="0.05")
    p.add_argument("--gammas", default="1.1")
    p.add_argument("--error-rates", default="0")
    p.add_argument("--reps", type=int, default=10, help="repetitions for zero-error cells")
    p.add_argument("--error-seeds", type=int, default=10)
    p.add_argument("--sample-seeds", type=int, default=5)
    p.add_argument("--max-draws", type=int, default=None)
    p.add_argument("--se-strategy", choices=["asn-greedy", "maximal", "none"],
                   default="asn-greedy")
    p.add_argument("--workers", type=int, default=None,
                   help=f"process pool size (default: ${ex.WORKERS_ENV} or CPU count)")
    p.add_argument("--table", choices=["rows", "eo", "se", "wo", "raire"], default="rows")
    p.add_argument("--output-format", choices=["csv", "json", "text"], default="csv")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("verify", help="check a plan rules out every other winner")
    _common(p)
    _plan_flags(p)
    p.add_argument("--plan", default=None, help="plan JSON (default: build with --method)")
    p.add_argument("--trace", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("--max-candidates", type=int, default=7)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return args.func(args)
    except (ParseError, UsageError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
