"""Grid runner over elections, methods and parameters, plus table rendering."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .ballots import Election
from .plans import BP, CP, KINDS, METHODS, AuditPlan, build_plan
from .simulation import ErrorModel, SimConfig, inject_errors, simulate

WORKERS_ENV = "IRVAUDIT_WORKERS"
ALT_METHODS = ("eo", "se", "wo")


@dataclass(frozen=True)
class GridConfig:
    methods: tuple = METHODS
    kinds: tuple = KINDS
    alphas: tuple = (0.05,)
    gammas: tuple = (1.1,)
    error_rates: tuple = (0.0,)
    zero_error_reps: int = 10
    error_seeds: tuple = tuple(range(10))
    sample_seeds: tuple = tuple(range(5))
    max_draws: int | None = None
    se_strategy: str = "asn-greedy"

    def __post_init__(self):
        if self.zero_error_reps < 1:
            raise ValueError("reps must be ≥ 1")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        for k in self.kinds:
            if k not in KINDS:
                raise ValueError(f"unknown kind {k!r}")


@dataclass(frozen=True)
class Cell:
    name: str
    election: Election
    method: str
    kind: str
    alpha: float
    gamma: float | None
    error_rate: float


@dataclass
class Row:
    election: str
    method: str
    kind: str
    alpha: float
    gamma: float | None
    error_rate: float
    polls_pct: float
    asn_pct: float
    outcome_counts: dict
    candidates: int = 0
    total: int = 0
    mov: int | None = None
    note: str = ""
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "election": self.election,
            "method": self.method,
            "kind": self.kind,
            "alpha": self.alpha,
            "gamma": self.gamma,
            "error_rate": self.error_rate,
            "polls_pct": report_value(self.polls_pct),
            "asn_pct": report_value(self.asn_pct),
            "outcome_counts": dict(self.outcome_counts),
            "candidates": self.candidates,
            "total": self.total,
            "mov": self.mov,
            "note": self.note,
        }


def report_value(pct: float):
    """Raw percentage, or the literal ``"inf"`` above 100%."""
    return "inf" if math.isinf(pct) or pct > 100 else pct


def fmt_pct(pct) -> str:
    """One decimal; values under 0.1 keep two so they do not print as zero."""
    if pct is None:
        return ""
    if pct == "inf" or math.isinf(pct) or pct > 100:
        return "inf"
    if 0 < pct < 0.1:
        return f"{pct:.2f}"
    return f"{pct:.1f}"


def grid_cells(elections, cfg: GridConfig) -> list:
    """Every (election, method, kind, alpha, gamma, rate) combination.

    Ballot-polling does not depend on gamma, so BP cells are emitted once with
    ``gamma=None``.
    """
    cells = []
    for name, e in elections:
        for method in cfg.methods:
            for kind in cfg.kinds:
                for alpha in cfg.alphas:
                    gammas = cfg.gammas if kind == CP else (None,)
                    for gamma in gammas:
                        for rate in cfg.error_rates:
                            cells.append(Cell(name, e, method, kind, alpha, gamma, rate))
    return cells


def _trials(cell: Cell, cfg: GridConfig):
    """``(reported, actual, error_seed, sample_seeds, reps)`` per injected error pattern."""
    e = cell.election
    if cell.error_rate == 0:
        yield e, e, 0, (0,), cfg.zero_error_reps
        return
    for es in cfg.error_seeds:
        reported, actual = inject_errors(e, ErrorModel(cell.error_rate, es))
        yield reported, actual, es, cfg.sample_seeds, 1


def run_cell(cell: Cell, cfg: GridConfig) -> Row:
    """Plan and simulate one grid cell. Failures become full-recount rows."""
    e = cell.election
    gamma = cell.gamma if cell.gamma is not None else (cfg.gammas[0] if cfg.gammas else 1.1)
    row = Row(cell.name, cell.method, cell.kind, cell.alpha, cell.gamma, cell.error_rate,
              math.inf, math.inf, {"confirmed": 0, "full-recount": 0},
              candidates=e.n, total=e.total, mov=e.metadata.get("mov"))
    draws, asns = [], []
    counts = row.outcome_counts
    try:
        for reported, actual, es, sample_seeds, reps in _trials(cell, cfg):
            plan = build_plan(reported, cell.method, cell.kind, cell.alpha, gamma,
                              cfg.se_strategy)
            n_sims = len(sample_seeds) * reps
            max_draws = cfg.max_draws or e.total
            if not isinstance(plan, AuditPlan) or math.isinf(plan.overall_asn):
                asns.append(math.inf)
                draws.extend([max_draws] * n_sims)
                counts["full-recount"] += n_sims
                continue
            asns.append(plan.asn_pct)
            for ss in sample_seeds:
                sim = SimConfig(cell.alpha, gamma, cfg.max_draws, cell.kind, reps, ss, es)
                res = simulate(plan, reported, actual, sim)
                draws.extend(res.draws.tolist())
                for k, v in res.outcome_counts.items():
                    counts[k] += v
    except Exception as exc:  # a bad cell must not abort the grid
        row.note = f"{type(exc).__name__}: {exc}"
        row.outcome_counts = {"confirmed": 0, "full-recount": max(1, sum(counts.values()))}
        return row
    row.asn_pct = float(np.mean(asns)) if asns else math.inf
    if counts["confirmed"] == 0:
        row.polls_pct = math.inf
    else:
        row.polls_pct = 100.0 * float(np.mean(draws)) / e.total
    return row


def _run_cell_args(args):
    return run_cell(*args)


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_experiment(elections, cfg: GridConfig | None = None, methods=None,
                   workers: int | None = 1) -> list:
    """Run the grid and return one :class:`Row` per cell, in grid order.

    ``elections`` is a list of ``(name, Election)`` pairs. ``workers > 1``
    farms cells out to a process pool; results do not depend on it.
    """
    cfg = cfg or GridConfig()
    if methods is not None:
        cfg = GridConfig(**{**cfg.__dict__, "methods": tuple(m.lower() for m in methods)})
    cells = grid_cells(elections, cfg)
    if not cells:
        return []
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(cells) == 1:
        return [run_cell(c, cfg) for c in cells]
    with ProcessPoolExecutor(max_workers=min(workers, len(cells))) as pool:
        return list(pool.map(_run_cell_args, [(c, cfg) for c in cells]))


# -- report output ------------------------------------------------------------

ROW_FIELDS = ("election", "method", "kind", "alpha", "gamma", "error_rate",
              "polls_pct", "asn_pct", "outcome_counts")


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ROW_FIELDS)
    for r in rows:
        d = r.as_dict()
        oc = ";".join(f"{k}:{v}" for k, v in d["outcome_counts"].items())
        w.writerow([d["election"], d["method"], d["kind"], d["alpha"],
                    "" if d["gamma"] is None else d["gamma"], d["error_rate"],
                    d["polls_pct"], d["asn_pct"], oc])
    return buf.getvalue()


def rows_to_json(rows) -> str:
    return json.dumps([r.as_dict() for r in rows], indent=1) + "\n"


def _pct_label(alpha) -> str:
    return f"{100 * alpha:g}%"


def _index(rows):
    return {(r.election, r.method, r.kind, r.alpha, r.gamma, r.error_rate): r for r in rows}


def _elections(rows):
    seen = {}
    for r in rows:
        seen.setdefault(r.election, r)
    return list(seen.values())


def _mov_cell(r) -> str:
    if r.mov is None:
        return ""
    return f"{r.mov:,} ({round(100 * r.mov / r.total)}%)"


def method_table(rows, method: str, alphas, gamma: float = 1.1, error_rate: float = 0.0):
    """Per-method comparison: BP and CP polls/ASN side by side for each alpha.

    The elimination-order layout also carries election name, roster size and
    margin of victory; the others carry only the ballot count.
    """
    idx = _index(rows)
    long = method == "eo"
    header = ["#", "Election", "|C|", "|B|", "MOV"] if long else ["#", "|B|"]
    for a in alphas:
        for kind, g in ((BP, None), (CP, gamma)):
            label = "BP" if kind == BP else f"CP (γ={g:g})"
            header += [f"α={_pct_label(a)} {label} Polls %", f"α={_pct_label(a)} {label} ASN %"]
    body = []
    for i, ref in enumerate(_elections(rows), 1):
        line = [str(i), ref.election, str(ref.candidates), f"{ref.total:,}", _mov_cell(ref)] \
            if long else [str(i), f"{ref.total:,}"]
        for a in alphas:
            for kind, g in ((BP, None), (CP, gamma)):
                r = idx.get((ref.election, method, kind, a, g, error_rate))
                line += [fmt_pct(r.polls_pct), fmt_pct(r.asn_pct)] if r else ["", ""]
        body.append(line)
    return header, body


def best_alternative(idx, election, kind, alpha, gamma, error_rate):
    """Methods among EO/SE/WO with the lowest simulated polls, and that value."""
    found = []
    for m in ALT_METHODS:
        r = idx.get((election, m, kind, alpha, gamma, error_rate))
        if r is not None:
            found.append((r.polls_pct, m))
    finite = [(p, m) for p, m in found if not math.isinf(p) and p <= 100]
    if not finite:
        return "--", math.inf
    best = min(p for p, _ in finite)
    names = [m.upper() for p, m in finite if fmt_pct(p) == fmt_pct(best)]
    return ",".join(names), best


def raire_table(rows, alpha: float = 0.05, gammas=(1.1, 1.2, 1.3), error_rate: float = 0.0):
    """RAIRE against the best of EO/SE/WO, for BP and for CP at each gamma."""
    idx = _index(rows)
    g0 = gammas[0]
    header = ["#", "|B|",
              "BP Best Alt. Method", "BP Best Alt. Polls %", "BP RAIRE Polls %", "BP RAIRE ASN %",
              f"CP Best Alt. (γ={g0:g}) Method", f"CP Best Alt. (γ={g0:g}) Polls %"]
    for g in gammas:
        header += [f"CP RAIRE γ={g:g} Polls %", f"CP RAIRE γ={g:g} ASN %"]
    body = []
    for i, ref in enumerate(_elections(rows), 1):
        name = ref.election
        m, p = best_alternative(idx, name, BP, alpha, None, error_rate)
        r = idx.get((name, "raire", BP, alpha, None, error_rate))
        line = [str(i), f"{ref.total:,}", m, fmt_pct(p)]
        line += [fmt_pct(r.polls_pct), fmt_pct(r.asn_pct)] if r else ["", ""]
        m, p = best_alternative(idx, name, CP, alpha, g0, error_rate)
        line += [m, fmt_pct(p)]
        for g in gammas:
            r = idx.get((name, "raire", CP, alpha, g, error_rate))
            line += [fmt_pct(r.polls_pct), fmt_pct(r.asn_pct)] if r else ["", ""]
        body.append(line)
    return header, body


def table_to_csv(header, body) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(body)
    return buf.getvalue()


def table_to_text(header, body) -> str:
    widths = [max(len(str(x)) for x in col) for col in zip(header, *body)]
    lines = ["  ".join(str(x).rjust(w) for x, w in zip(line, widths)) for line in [header, *body]]
    return "\n".join(lines) + "\n"
