"""Best-first search for the cheapest set of assertions confirming an IRV winner."""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field

from .ballots import Election
from .plans import (AuditPlan, AuditUnit, FullRecount, contradicts, irv_assertion,
                    wo_assertion)


class AssertionCache:
    """Memoised WO and IRV assertions for one election and parameter set."""

    def __init__(self, e: Election, kind: str, alpha: float, gamma: float):
        self.e, self.kind, self.alpha, self.gamma = e, kind, alpha, gamma
        self._wo = {}
        self._irv = {}

    def wo(self, w, l):
        key = (w, l)
        if key not in self._wo:
            self._wo[key] = wo_assertion(self.e, w, l, self.alpha, self.gamma)
        return self._wo[key]

    def irv(self, w, l, standing):
        key = (w, l, frozenset(standing))
        if key not in self._irv:
            self._irv[key] = irv_assertion(self.e, w, l, key[2], self.alpha, self.gamma)
        return self._irv[key]

    def asn(self, h) -> float:
        return h.asn(self.kind)


def assertion_family(seq, n: int, cache: AssertionCache) -> list:
    """Every assertion that, if true, rules out outcomes ending in ``seq``."""
    c = seq[0]
    later = seq[1:]
    members = set(seq)
    fam = [cache.wo(c, other) for other in later]
    fam += [cache.wo(other, c) for other in range(n) if other not in members]
    fam += [cache.irv(c, other, members) for other in later]
    return fam


def find_best_audit(seq, e: Election, kind: str, alpha: float, gamma: float = 1.1,
                    cache: AssertionCache | None = None):
    """Cheapest assertion ruling out ``seq``, as ``(assertion, asn)``.

    Returns ``(None, inf)`` when nothing in the family needs fewer than
    ``e.total`` ballots.
    """
    cache = cache or AssertionCache(e, kind, alpha, gamma)
    best, best_asn = None, math.inf
    for h in assertion_family(tuple(seq), e.n, cache):
        a = cache.asn(h)
        if a < best_asn:
            best, best_asn = h, a
    if best_asn >= e.total:
        return None, math.inf
    return best, best_asn


@dataclass
class FrontierNode:
    seq: tuple
    asr: object
    asn: float
    ba: tuple


@dataclass
class SearchTrace:
    expanded: int = 0
    commits: list = field(default_factory=list)
    pruned: int = 0

    def as_dict(self, e: Election) -> dict:
        return {
            "nodes_expanded": self.expanded,
            "commits": [h.describe(e) for h in self.commits],
            "nodes_pruned": self.pruned,
        }


def _is_suffix(suffix, seq) -> bool:
    k = len(seq) - len(suffix)
    return k >= 0 and seq[k:] == suffix


def raire(e: Election, winner: int, kind: str, alpha: float, gamma: float = 1.1,
          trace: bool = False):
    """Search alternate elimination orders for the minimal max-ASN assertion set.

    Returns an :class:`AuditPlan` with one single-assertion unit per committed
    assertion, or :class:`FullRecount` when some alternate outcome cannot be
    ruled out with fewer than ``e.total`` ballots.
    """
    n = e.n
    cache = AssertionCache(e, kind, alpha, gamma)
    nodes: dict = {}
    frontier: set = set()
    heap: list = []
    chosen: dict = {}
    lb = 0.0
    tr = SearchTrace()

    def push(node):
        nodes[node.seq] = node
        frontier.add(node.seq)
        heapq.heappush(heap, (-node.asn, len(node.seq), node.seq))

    def commit(h):
        key = h.key()
        if key not in chosen:
            chosen[key] = h
            tr.commits.append(h)

    def prune(suffix):
        doomed = [s for s in frontier if _is_suffix(suffix, s)]
        frontier.difference_update(doomed)
        tr.pruned += len(doomed)

    for c in range(n):
        if c == winner:
            continue
        seq = (c,)
        a, asn = find_best_audit(seq, e, kind, alpha, gamma, cache)
        push(FrontierNode(seq, a, asn, seq))

    while frontier:
        _, _, seq = heapq.heappop(heap)
        if seq not in frontier:
            continue
        frontier.discard(seq)
        node = nodes[seq]
        best = nodes[node.ba]
        if best.asn <= lb:
            commit(best.asr)
            prune(best.seq)
            continue
        tr.expanded += 1
        for c in range(n):
            if c in seq:
                continue
            child_seq = (c,) + seq
            a, asn = find_best_audit(child_seq, e, kind, alpha, gamma, cache)
            ba = child_seq if asn < best.asn else best.seq
            child = FrontierNode(child_seq, a, asn, ba)
            nodes[child_seq] = child
            if len(child_seq) == n:
                anc = nodes[ba]
                if math.isinf(anc.asn):
                    return FullRecount("raire", kind, "full recount necessary", child_seq)
                commit(anc.asr)
                lb = max(lb, anc.asn)
                prune(anc.seq)
            else:
                push(child)

    units = tuple(AuditUnit((h,), kind, alpha, gamma, e.total) for h in chosen.values())
    return AuditPlan("raire", kind, alpha, gamma, e.total, units, winner,
                     trace=tr.as_dict(e) if trace else None)


# -- soundness ----------------------------------------------------------------

@dataclass(frozen=True)
class SoundnessReport:
    sound: bool
    checked: int
    uncovered: tuple = ()


def verify_plan_soundness(plan, e: Election, winner: int, max_candidates: int = 7,
                          limit: int = 10) -> SoundnessReport:
    """Check every elimination order ending in another candidate is ruled out.

    Enumerates all ``n!`` orders, so the roster is capped at ``max_candidates``.
    Up to ``limit`` uncovered orders are reported.
    """
    if e.n > max_candidates:
        raise ValueError(f"{e.n} candidates exceeds the enumeration bound {max_candidates}")
    hyps = plan.hypotheses if isinstance(plan, AuditPlan) else list(plan)
    uncovered = []
    checked = 0
    for order in itertools.permutations(range(e.n)):
        if order[-1] == winner:
            continue
        checked += 1
        if not any(contradicts(h, order) for h in hyps):
            uncovered.append(order)
            if len(uncovered) >= limit:
                break
    return SoundnessReport(not uncovered, checked, tuple(uncovered))
