"""Vote interpretation modes, pairwise hypotheses and the EO/SE/WO plan builders.

A hypothesis claims the winner party's tally exceeds the loser party's under
some rule for reading a ballot. An audit plan is a set of units, each of
which is one BRAVO test per hypothesis (ballot-polling) or one MACRO test
over all of its hypotheses (comparison).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

from . import kernels
from .ballots import (Election, first_standing, group_eliminations, reported_winner,
                      tabulate_irv, tally)

BP = "bp"
CP = "cp"
KINDS = (BP, CP)
METHODS = ("eo", "se", "wo", "raire")


# -- vote interpretation ------------------------------------------------------

@dataclass(frozen=True)
class Standing:
    """Ballot counts for its most preferred candidate among ``standing``."""
    standing: frozenset


@dataclass(frozen=True)
class WinnerOnlyPair:
    """Winner gets first preferences only; loser gets every ballot preferring it to the winner."""
    winner: int
    loser: int


@dataclass(frozen=True)
class GroupedLoser:
    """Like :class:`Standing`, with the candidates in ``group`` pooled into one party."""
    standing: frozenset
    group: frozenset


VoteInterp = Union[Standing, WinnerOnlyPair, GroupedLoser]


def interpret(ranking, interp: VoteInterp):
    """The party ``ranking`` counts for under ``interp``, or None."""
    if isinstance(interp, Standing):
        return first_standing(ranking, interp.standing)
    if isinstance(interp, WinnerOnlyPair):
        if ranking and ranking[0] == interp.winner:
            return interp.winner
        if first_standing(ranking, (interp.winner, interp.loser)) == interp.loser:
            return interp.loser
        return None
    if isinstance(interp, GroupedLoser):
        c = first_standing(ranking, interp.standing)
        return interp.group if c in interp.group else c
    raise TypeError(f"not a vote interpretation: {interp!r}")


def party_tallies(e: Election, interp: VoteInterp) -> dict:
    if isinstance(interp, Standing):
        return tally(e, interp.standing)
    if isinstance(interp, WinnerOnlyPair):
        w, l = interp.winner, interp.loser
        return {w: tally(e, e.roster)[w], l: tally(e, {w, l})[l]}
    if isinstance(interp, GroupedLoser):
        t = tally(e, interp.standing)
        out = {c: v for c, v in t.items() if c not in interp.group}
        out[interp.group] = sum(t[c] for c in interp.group)
        return out
    raise TypeError(f"not a vote interpretation: {interp!r}")


# -- hypotheses ---------------------------------------------------------------

@dataclass(frozen=True)
class Hypothesis:
    """Claim that ``winner`` out-polls ``loser`` under ``interp``.

    ``active`` counts ballots that go to some party of the interpretation; it
    is the electorate the ballot-polling ASN is expressed over.
    """
    winner: int
    loser: object            # candidate index, or frozenset for a pooled group
    interp: VoteInterp
    winner_tally: int
    loser_tally: int
    active: int
    total: int
    asn_bp: float
    asn_cp: float

    @property
    def margin(self) -> int:
        return self.winner_tally - self.loser_tally

    def asn(self, kind: str) -> float:
        return self.asn_bp if kind == BP else self.asn_cp

    @property
    def mode(self) -> str:
        if isinstance(self.interp, WinnerOnlyPair):
            return "wo"
        if isinstance(self.interp, GroupedLoser):
            return "grouped"
        return "irv"

    def key(self):
        loser = tuple(sorted(self.loser)) if isinstance(self.loser, frozenset) else (self.loser,)
        standing = getattr(self.interp, "standing", frozenset())
        return (self.mode, self.winner, loser, tuple(sorted(standing)))

    def describe(self, e: Election) -> str:
        name = e.candidates
        w = name[self.winner]
        if isinstance(self.loser, frozenset):
            l = "{" + ",".join(name[c] for c in sorted(self.loser)) + "}"
        else:
            l = name[self.loser]
        if self.mode == "wo":
            return f"WO({w},{l})"
        S = ",".join(name[c] for c in sorted(self.interp.standing))
        tag = "IRV" if self.mode == "irv" else "SE"
        return f"{tag}({w},{l},{{{S}}})"


def make_hypothesis(e: Election, winner, loser, interp: VoteInterp,
                    alpha: float, gamma: float) -> Hypothesis:
    t = party_tallies(e, interp)
    tw, tl = t[winner], t[loser]
    active = sum(t.values())
    total = e.total
    return Hypothesis(
        winner=winner, loser=loser, interp=interp,
        winner_tally=tw, loser_tally=tl, active=active, total=total,
        asn_bp=kernels.asn_bp(tw, tl, active, alpha),
        asn_cp=kernels.asn_cp(total, tw - tl, alpha, gamma),
    )


def hypothesis_asn(h: Hypothesis, kind: str, alpha: float, gamma: float, total=None) -> float:
    """ASN of ``h`` recomputed from its stored tallies."""
    if h.margin <= 0:
        return math.inf
    if kind == BP:
        return kernels.asn_bp(h.winner_tally, h.loser_tally, h.active, alpha)
    return kernels.asn_cp(h.total if total is None else total, h.margin, alpha, gamma)


def wo_assertion(e, w, l, alpha, gamma) -> Hypothesis:
    return make_hypothesis(e, w, l, WinnerOnlyPair(w, l), alpha, gamma)


def irv_assertion(e, w, l, standing, alpha, gamma) -> Hypothesis:
    return make_hypothesis(e, w, l, Standing(frozenset(standing)), alpha, gamma)


# -- units and plans ----------------------------------------------------------

@dataclass(frozen=True)
class AuditUnit:
    hypotheses: tuple
    kind: str
    alpha: float
    gamma: float
    total: int

    @property
    def v_min(self) -> int:
        return min(h.margin for h in self.hypotheses)

    @property
    def u(self) -> float:
        return kernels.diluted_bound(self.total, self.v_min, self.gamma)

    @property
    def asn(self) -> float:
        if self.kind == BP:
            return max(h.asn_bp for h in self.hypotheses)
        return kernels.asn_cp(self.total, self.v_min, self.alpha, self.gamma)


@dataclass(frozen=True)
class AuditPlan:
    method: str
    kind: str
    alpha: float
    gamma: float
    total: int
    units: tuple
    winner: int
    trace: dict = field(default=None, compare=False)

    @property
    def overall_asn(self) -> float:
        if not self.units:
            return 0.0
        return max(u.asn for u in self.units)

    @property
    def asn_pct(self) -> float:
        return 100.0 * self.overall_asn / self.total

    @property
    def hypotheses(self) -> list:
        return [h for u in self.units for h in u.hypotheses]


@dataclass(frozen=True)
class FullRecount:
    """Verdict that no plan of the chosen method avoids a full recount."""
    method: str
    kind: str
    reason: str
    sequence: tuple = ()


def _unit(hyps, kind, alpha, gamma, total):
    return AuditUnit(tuple(hyps), kind, alpha, gamma, total)


def _check_kind(kind):
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")


def round_hypotheses(e, standing, group, alpha, gamma) -> list:
    """Hypotheses that every survivor out-polls the eliminated ``group``."""
    standing = frozenset(standing)
    group = tuple(group)
    survivors = [c for c in sorted(standing) if c not in group]
    if len(group) == 1:
        interp = Standing(standing)
        loser = group[0]
    else:
        interp = GroupedLoser(standing, frozenset(group))
        loser = frozenset(group)
    return [make_hypothesis(e, w, loser, interp, alpha, gamma) for w in survivors]


def _plan_from_groups(e, groups, order, method, kind, alpha, gamma) -> AuditPlan:
    units = []
    i = 0
    for group in groups:
        standing = frozenset(order[i:])
        hyps = round_hypotheses(e, standing, group, alpha, gamma)
        units.append(_unit(hyps, kind, alpha, gamma, e.total))
        i += len(group)
    return AuditPlan(method, kind, alpha, gamma, e.total, tuple(units), order[-1])


def plan_eo(e: Election, kind: str, alpha: float, gamma: float = 1.1) -> AuditPlan:
    """Audit every round of the reported elimination order."""
    _check_kind(kind)
    seq = tabulate_irv(e)
    groups = [(c,) for c in seq.order[:-1]]
    return _plan_from_groups(e, groups, seq.order, "eo", kind, alpha, gamma)


def plan_se(e: Election, kind: str, alpha: float, gamma: float = 1.1,
            strategy: str = "asn-greedy") -> AuditPlan:
    """Elimination-order audit with simultaneously eliminated groups pooled."""
    _check_kind(kind)
    seq = tabulate_irv(e)

    def unit_asn(standing, group):
        hyps = round_hypotheses(e, standing, group, alpha, gamma)
        return _unit(hyps, kind, alpha, gamma, e.total).asn

    groups = group_eliminations(e, seq, strategy, unit_asn=unit_asn)
    return _plan_from_groups(e, groups, seq.order, "se", kind, alpha, gamma)


def plan_wo(e: Election, kind: str, alpha: float, gamma: float = 1.1, winner=None) -> AuditPlan:
    """Winner-only audit: the winner's first preferences beat each loser's best case."""
    _check_kind(kind)
    w = reported_winner(e) if winner is None else winner
    units = [_unit([wo_assertion(e, w, l, alpha, gamma)], kind, alpha, gamma, e.total)
             for l in range(e.n) if l != w]
    return AuditPlan("wo", kind, alpha, gamma, e.total, tuple(units), w)


def build_plan(e: Election, method: str, kind: str, alpha: float, gamma: float = 1.1,
               se_strategy: str = "asn-greedy"):
    """Dispatch to a plan builder. RAIRE may return :class:`FullRecount`."""
    method = method.lower()
    if method == "eo":
        return plan_eo(e, kind, alpha, gamma)
    if method == "se":
        return plan_se(e, kind, alpha, gamma, se_strategy)
    if method == "wo":
        return plan_wo(e, kind, alpha, gamma)
    if method == "raire":
        from .raire import raire
        return raire(e, reported_winner(e), kind, alpha, gamma)
    raise ValueError(f"unknown method {method!r}")


def check_plan_tallies(plan: AuditPlan, e: Election) -> list:
    """Hypotheses whose stored tallies disagree with ``e``; empty when consistent."""
    bad = []
    for h in plan.hypotheses:
        t = party_tallies(e, h.interp)
        if t.get(h.winner) != h.winner_tally or t.get(h.loser) != h.loser_tally:
            bad.append(h)
    return bad


# -- soundness semantics ------------------------------------------------------

def contradicts(h: Hypothesis, order) -> bool:
    """True if ``h`` holding rules out the complete elimination ``order``."""
    pos = {c: i for i, c in enumerate(order)}
    if isinstance(h.interp, WinnerOnlyPair):
        return pos[h.winner] < pos[h.loser]
    S = h.interp.standing
    k = len(order) - len(S)
    if k < 0 or frozenset(order[k:]) != S:
        return False
    suffix = order[k:]
    if isinstance(h.interp, Standing):
        return suffix[0] == h.winner
    group = h.interp.group
    first_other = next(c for c in suffix if c not in group)
    return first_other == h.winner and any(pos[g] > pos[h.winner] for g in group)


# -- JSON ---------------------------------------------------------------------

def _num(x):
    return "inf" if math.isinf(x) else x


def _party(e, p):
    if isinstance(p, frozenset):
        return [e.candidates[c] for c in sorted(p)]
    return e.candidates[p]


def hypothesis_to_dict(h: Hypothesis, e: Election, kind: str) -> dict:
    d = {
        "assertion": h.describe(e),
        "winner": _party(e, h.winner),
        "loser": _party(e, h.loser),
        "mode": h.mode,
        "winner_tally": h.winner_tally,
        "loser_tally": h.loser_tally,
        "margin": h.margin,
        "asn": _num(h.asn(kind)),
    }
    if isinstance(h.interp, (Standing, GroupedLoser)):
        d["standing"] = [e.candidates[c] for c in sorted(h.interp.standing)]
    if isinstance(h.interp, GroupedLoser):
        d["group"] = [e.candidates[c] for c in sorted(h.interp.group)]
    return d


def plan_to_dict(plan: AuditPlan, e: Election) -> dict:
    d = {
        "method": plan.method,
        "kind": plan.kind,
        "alpha": plan.alpha,
        "gamma": plan.gamma,
        "total_ballots": plan.total,
        "winner": e.candidates[plan.winner],
        "overall_asn": _num(plan.overall_asn),
        "overall_asn_pct": _num(plan.asn_pct),
        "units": [
            {"asn": _num(u.asn), "v_min": u.v_min,
             "hypotheses": [hypothesis_to_dict(h, e, plan.kind) for h in u.hypotheses]}
            for u in plan.units
        ],
    }
    if plan.trace is not None:
        d["trace"] = plan.trace
    return d


def plan_from_dict(doc: dict, e: Election) -> AuditPlan:
    """Rebuild a plan from its JSON form, recomputing tallies against ``e``."""
    idx = e.index
    kind, alpha, gamma = doc["kind"], float(doc["alpha"]), float(doc["gamma"])

    def party(x):
        return frozenset(idx(n) for n in x) if isinstance(x, list) else idx(x)

    units = []
    for u in doc["units"]:
        hyps = []
        for hd in u["hypotheses"]:
            w, l = party(hd["winner"]), party(hd["loser"])
            if hd["mode"] == "wo":
                interp = WinnerOnlyPair(w, l)
            elif hd["mode"] == "grouped":
                interp = GroupedLoser(frozenset(idx(n) for n in hd["standing"]),
                                      frozenset(idx(n) for n in hd["group"]))
            else:
                interp = Standing(frozenset(idx(n) for n in hd["standing"]))
            hyps.append(make_hypothesis(e, w, l, interp, alpha, gamma))
        units.append(_unit(hyps, kind, alpha, gamma, e.total))
    return AuditPlan(doc["method"], kind, alpha, gamma, e.total, tuple(units),
                     idx(doc["winner"]))
