"""Error injection and Monte Carlo simulation of ballot-polling and comparison audits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .ballots import Election, run_length_election
from .plans import BP, CP, AuditPlan, check_plan_tallies, interpret

CHUNK = 2048

OPERATIONS = ("replace", "insert", "swap", "remove")


class PlanMismatchError(ValueError):
    pass


# -- error injection ----------------------------------------------------------

@dataclass(frozen=True)
class ErrorModel:
    rate: float
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.rate <= 1:
            raise ValueError("error rate must lie in [0, 1]")


def replace_candidate(r, pos, c):
    return r[:pos] + (c,) + r[pos + 1:]


def insert_candidate(r, pos, c):
    return r[:pos] + (c,) + r[pos:]


def swap_positions(r, i, j):
    r = list(r)
    r[i], r[j] = r[j], r[i]
    return tuple(r)


def remove_position(r, pos):
    return r[:pos] + r[pos + 1:]


def feasible_operations(r, n: int) -> list:
    absent = len(r) < n
    ops = []
    if r and absent:
        ops.append("replace")
    if absent:
        ops.append("insert")
    if len(r) >= 2:
        ops.append("swap")
    if r:
        ops.append("remove")
    return ops


def manipulate(r: tuple, n: int, rng: np.random.Generator) -> tuple:
    """Apply one uniformly chosen recording error to ranking ``r``.

    An operation that cannot apply to ``r`` is replaced by a uniform draw
    among those that can.
    """
    op = OPERATIONS[rng.integers(4)]
    ok = feasible_operations(r, n)
    if not ok:
        return r
    if op not in ok:
        op = ok[rng.integers(len(ok))]
    absent = [c for c in range(n) if c not in r]
    if op == "replace":
        return replace_candidate(r, rng.integers(len(r)), absent[rng.integers(len(absent))])
    if op == "insert":
        return insert_candidate(r, rng.integers(len(r) + 1), absent[rng.integers(len(absent))])
    if op == "swap":
        i, j = rng.choice(len(r), size=2, replace=False)
        return swap_positions(r, int(i), int(j))
    return remove_position(r, rng.integers(len(r)))


def inject_errors(e: Election, model: ErrorModel):
    """Return ``(reported, actual)``; reported ballots line up with ``actual.expand()``."""
    if model.rate == 0:
        return e, e
    rng = np.random.default_rng(model.seed)
    ballots = e.expand()
    hit = rng.random(len(ballots)) < model.rate
    out = list(ballots)
    for i in np.flatnonzero(hit):
        out[i] = manipulate(ballots[i], e.n, rng)
    meta = {k: v for k, v in e.metadata.items() if k != "reported_winner"}
    return run_length_election(e.candidates, out, meta), e


def manipulated_count(reported: Election, actual: Election) -> int:
    return sum(a != b for a, b in zip(reported.expand(), actual.expand()))


# -- simulation ---------------------------------------------------------------

@dataclass(frozen=True)
class SimConfig:
    alpha: float = 0.05
    gamma: float = 1.1
    max_draws: int | None = None
    kind: str = BP
    reps: int = 10
    sample_seed: int = 0
    error_seed: int = 0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.gamma < 1:
            raise ValueError("gamma must be at least 1")
        if self.max_draws is not None and self.max_draws < 1:
            raise ValueError("max_draws must be at least 1")
        if self.reps < 1:
            raise ValueError("reps must be ≥ 1")


@dataclass
class SimResult:
    draws: np.ndarray
    outcomes: list
    total: int
    max_draws: int
    asn: float = math.nan
    extra: dict = field(default_factory=dict)

    @property
    def mean_draws(self) -> float:
        return float(np.mean(self.draws))

    @property
    def mean_polls_pct(self) -> float:
        return 100.0 * self.mean_draws / self.total

    @property
    def outcome_counts(self) -> dict:
        return {"confirmed": self.outcomes.count("confirmed"),
                "full-recount": self.outcomes.count("full-recount")}


def _segments(reported: Election, actual: Election):
    """Maximal index ranges on which both the reported and actual ranking are fixed."""
    def runs(e):
        out, pos = [], 0
        for bc in e.ballots:
            if bc.count:
                out.append((pos + bc.count, bc.ranking))
                pos += bc.count
        return out

    rr, aa = runs(reported), runs(actual)
    ends, reps, acts = [], [], []
    i = j = 0
    while i < len(rr) and j < len(aa):
        end = min(rr[i][0], aa[j][0])
        ends.append(end)
        reps.append(rr[i][1])
        acts.append(aa[j][1])
        if rr[i][0] == end:
            i += 1
        if aa[j][0] == end:
            j += 1
    return np.array(ends, dtype=np.int64), reps, acts


def _bp_increments(plan: AuditPlan, acts, alpha):
    hyps = plan.hypotheses
    L = np.zeros((len(acts), len(hyps)))
    for k, h in enumerate(hyps):
        st = kernels.BravoState.start(h.winner_tally, h.loser_tally, alpha)
        lw, ll = st.log_winner_factor, st.log_loser_factor
        for s, r in enumerate(acts):
            p = interpret(r, h.interp)
            if p == h.winner:
                L[s, k] = lw
            elif p == h.loser:
                L[s, k] = ll
    return L


def unit_pairs(unit):
    return [(h.winner, h.loser, h.margin, h.interp) for h in unit.hypotheses]


def _cp_increments(plan: AuditPlan, reps, acts, gamma):
    L = np.zeros((len(acts), len(plan.units)))
    for k, u in enumerate(plan.units):
        if u.v_min <= 0:
            L[:, k] = math.inf
            continue
        st = kernels.MacroState(plan.total, u.v_min, gamma)
        pairs = unit_pairs(u)
        for s, (rep, act) in enumerate(zip(reps, acts)):
            e_b = kernels.macro_discrepancy(pairs, rep, act, interpret)
            try:
                L[s, k] = st.log_multiplier(e_b)
            except kernels.Escalation:
                L[s, k] = math.inf
    return L


def _run_one(L, ends, total, max_draws, rng, kind, alpha):
    """Draws used and outcome for one repetition over increment table ``L``."""
    H = L.shape[1]
    if H == 0:
        return 0, "confirmed"
    cum = np.zeros(H)
    open_ = np.ones(H, dtype=bool)
    crossed = np.zeros(H, dtype=np.int64)
    drawn = 0
    if kind == BP:
        threshold = math.log(1 / alpha)
    else:
        threshold = math.log(alpha)
    while drawn < max_draws and open_.any():
        k = min(CHUNK, max_draws - drawn)
        seg = np.searchsorted(ends, rng.integers(0, total, size=k), side="right")
        cols = np.flatnonzero(open_)
        inc = L[np.ix_(seg, cols)]
        path = np.cumsum(np.vstack([cum[cols], inc]), axis=0)[1:]
        if kind == BP:
            hit = path >= threshold
        else:
            hit = path <= threshold
            if np.isposinf(path).any():
                esc = np.isposinf(path) & ~np.maximum.accumulate(hit, axis=0)
                if esc.any():
                    return max_draws, "full-recount"
        any_hit = hit.any(axis=0)
        first = hit.argmax(axis=0)
        for c, col in enumerate(cols):
            if any_hit[c]:
                open_[col] = False
                crossed[col] = drawn + first[c] + 1
        cum[cols] = path[-1]
        drawn += k
    if open_.any():
        return max_draws, "full-recount"
    return int(crossed.max()), "confirmed"


def simulate(plan: AuditPlan, reported: Election, actual: Election, cfg: SimConfig) -> SimResult:
    """Run ``cfg.reps`` independent audits of ``plan``.

    Ballots are drawn uniformly with replacement from the actual ballots. In a
    ballot-polling audit every hypothesis sees every draw; a comparison audit
    pairs each drawn actual ballot with its reported record by position.
    """
    if reported.total != actual.total:
        raise PlanMismatchError("reported and actual ballot counts differ")
    bad = check_plan_tallies(plan, reported)
    if bad:
        raise PlanMismatchError(f"{len(bad)} hypothesis tallies do not match the reported ballots")
    if plan.kind != cfg.kind:
        raise PlanMismatchError(f"plan kind {plan.kind!r} but config kind {cfg.kind!r}")
    total = actual.total
    max_draws = cfg.max_draws or total
    ends, reps, acts = _segments(reported, actual)
    if cfg.kind == BP:
        L = _bp_increments(plan, acts, cfg.alpha)
    else:
        L = _cp_increments(plan, reps, acts, cfg.gamma)
    draws, outcomes = [], []
    for rep in range(cfg.reps):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.error_seed, cfg.sample_seed, rep]))
        m, outcome = _run_one(L, ends, total, max_draws, rng, cfg.kind, cfg.alpha)
        draws.append(m)
        outcomes.append(outcome)
    return SimResult(np.array(draws, dtype=np.int64), outcomes, total, max_draws,
                     asn=plan.overall_asn)
