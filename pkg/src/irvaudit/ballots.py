"""Ballot and election data model, file I/O, tallies and IRV tabulation."""
from __future__ import annotations

import csv
import io
import json
import logging
import re
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

log = logging.getLogger(__name__)

Ranking = tuple  # tuple[int, ...] of candidate indices, most preferred first


class ParseError(ValueError):
    """Raised for malformed election files; carries the offending position."""

    def __init__(self, message: str, position: str | None = None):
        self.position = position
        super().__init__(f"{position}: {message}" if position else message)


@dataclass(frozen=True)
class BallotClass:
    ranking: tuple
    count: int


@dataclass(frozen=True)
class Election:
    """A roster of candidate names plus a multiset of rankings.

    Ballot classes are kept in the order given. Elections produced by
    :func:`parse_election` are canonical (merged, sorted). Elections produced
    by error injection are not: their class order lines up ballot-by-ballot
    with the election they were derived from (see :meth:`expand`).
    """

    candidates: tuple
    ballots: tuple
    metadata: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        n = len(self.candidates)
        if len(set(self.candidates)) != n:
            raise ValueError("duplicate candidate names in roster")
        total = 0
        for bc in self.ballots:
            if bc.count < 0:
                raise ValueError("negative ballot count")
            if len(set(bc.ranking)) != len(bc.ranking):
                raise ValueError(f"duplicate candidate in ranking {bc.ranking}")
            for c in bc.ranking:
                if not 0 <= c < n:
                    raise ValueError(f"candidate index {c} outside roster")
            total += bc.count
        if total <= 0:
            raise ValueError("no ballots")

    @property
    def n(self) -> int:
        return len(self.candidates)

    @property
    def total(self) -> int:
        return sum(bc.count for bc in self.ballots)

    @property
    def roster(self) -> frozenset:
        return frozenset(range(self.n))

    def index(self, name: str) -> int:
        try:
            return self.candidates.index(name)
        except ValueError:
            raise KeyError(f"unknown candidate {name!r}") from None

    def names(self, ranking: Iterable[int]) -> list:
        return [self.candidates[c] for c in ranking]

    def expand(self) -> list:
        """One ranking per ballot, in class order."""
        out = []
        for bc in self.ballots:
            out.extend([bc.ranking] * bc.count)
        return out

    def canonical(self) -> "Election":
        merged: dict = {}
        for bc in self.ballots:
            if bc.count:
                merged[bc.ranking] = merged.get(bc.ranking, 0) + bc.count
        classes = tuple(BallotClass(r, merged[r]) for r in sorted(merged))
        return Election(self.candidates, classes, dict(self.metadata))

    @property
    def reported_winner(self) -> int | None:
        w = self.metadata.get("reported_winner")
        return None if w is None else self.index(w)


def make_election(candidates: Sequence[str], ballots, metadata=None) -> Election:
    """Build a canonical election from ``(ranking_names, count)`` pairs."""
    candidates = tuple(candidates)
    lookup = {name: i for i, name in enumerate(candidates)}
    classes = []
    for names, count in ballots:
        classes.append(BallotClass(tuple(lookup[x] for x in names), int(count)))
    return Election(candidates, tuple(classes), dict(metadata or {})).canonical()


def run_length_election(candidates, rankings: Sequence[tuple], metadata=None) -> Election:
    """Election whose classes are runs of equal consecutive rankings.

    Keeps the ballot order of ``rankings`` so ``expand()`` returns them back.
    """
    classes = []
    prev, run = None, 0
    for r in rankings:
        if r == prev:
            run += 1
            continue
        if run:
            classes.append(BallotClass(prev, run))
        prev, run = r, 1
    if run:
        classes.append(BallotClass(prev, run))
    return Election(tuple(candidates), tuple(classes), dict(metadata or {}))


# -- parsing -----------------------------------------------------------------

_NAT = re.compile(r"(\d+)")


def _natural_key(name: str):
    return [int(p) if p.isdigit() else p for p in _NAT.split(name)]


def _rank_from_names(names, lookup, where):
    seen = set()
    ranking = []
    for name in names:
        if name not in lookup:
            raise ParseError(f"unknown candidate {name!r}", where)
        if name in seen:
            raise ParseError(f"duplicate candidate {name!r} within ranking", where)
        seen.add(name)
        ranking.append(lookup[name])
    if not ranking:
        raise ParseError("empty ranking", where)
    return tuple(ranking)


def _parse_count(value, where) -> int:
    if isinstance(value, bool):
        raise ParseError(f"bad count {value!r}", where)
    try:
        count = int(value)
    except (TypeError, ValueError):
        raise ParseError(f"bad count {value!r}", where) from None
    if isinstance(value, float) and value != count:
        raise ParseError(f"bad count {value!r}", where)
    if count < 0:
        raise ParseError(f"negative count {count}", where)
    return count


def _finish(candidates, classes, metadata) -> Election:
    if sum(c.count for c in classes) <= 0:
        raise ParseError("no ballots")
    e = Election(tuple(candidates), tuple(classes), metadata).canonical()
    w = metadata.get("reported_winner")
    if w is not None and w not in e.candidates:
        raise ParseError(f"unknown reported winner {w!r}", "metadata")
    return e


def parse_json(text: str) -> Election:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} col {exc.colno}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    candidates = doc.get("candidates")
    if not isinstance(candidates, list) or not all(isinstance(c, str) for c in candidates):
        raise ParseError("'candidates' must be a list of names", "candidates")
    if len(set(candidates)) != len(candidates):
        raise ParseError("duplicate candidate names", "candidates")
    lookup = {name: i for i, name in enumerate(candidates)}
    raw = doc.get("ballots")
    if not isinstance(raw, list):
        raise ParseError("'ballots' must be a list", "ballots")
    classes = []
    for i, item in enumerate(raw):
        where = f"ballots[{i}]"
        if not isinstance(item, dict) or "ranking" not in item or "count" not in item:
            raise ParseError("expected {'ranking': [...], 'count': int}", where)
        if not isinstance(item["ranking"], list):
            raise ParseError("'ranking' must be a list", where)
        ranking = _rank_from_names(item["ranking"], lookup, where)
        classes.append(BallotClass(ranking, _parse_count(item["count"], where)))
    metadata = doc.get("metadata") or {}
    if not isinstance(metadata, dict):
        raise ParseError("'metadata' must be an object", "metadata")
    return _finish(candidates, classes, dict(metadata))


def parse_csv(text: str, candidates: Sequence[str] | None = None) -> Election:
    """Parse ``ranking,count`` rows; rankings are ``;``-separated names.

    Without an explicit roster the candidates are the names seen, in natural
    sort order (so ``c2`` precedes ``c10``).
    """
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [h.strip() for h in rows[0]] != ["ranking", "count"]:
        raise ParseError("header must be 'ranking,count'", "line 1")
    parsed = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not x.strip() for x in row):
            continue
        where = f"line {lineno}"
        if len(row) != 2:
            raise ParseError(f"expected 2 fields, got {len(row)}", where)
        names = [x.strip() for x in row[0].split(";") if x.strip()]
        parsed.append((names, _parse_count(row[1].strip(), where), where))
    if candidates is None:
        seen = {name for names, _, _ in parsed for name in names}
        candidates = sorted(seen, key=_natural_key)
    lookup = {name: i for i, name in enumerate(candidates)}
    classes = [BallotClass(_rank_from_names(names, lookup, where), count)
               for names, count, where in parsed]
    return _finish(candidates, classes, {})


def parse_election(source, format: str = "json", candidates=None) -> Election:
    """Parse an election from bytes or text in ``json`` or ``csv`` format."""
    if isinstance(source, (bytes, bytearray)):
        source = source.decode("utf-8")
    elif hasattr(source, "read"):
        data = source.read()
        source = data.decode("utf-8") if isinstance(data, bytes) else data
    if format in ("json", "canonical-json"):
        return parse_json(source)
    if format in ("csv", "ranking-count-csv"):
        return parse_csv(source, candidates)
    raise ValueError(f"unknown format {format!r}")


def load_election(path, format: str | None = None, candidates=None) -> Election:
    path = str(path)
    if format is None:
        format = "csv" if path.lower().endswith(".csv") else "json"
    with open(path, "rb") as fh:
        return parse_election(fh.read(), format, candidates)


def to_dict(e: Election) -> dict:
    doc = {
        "candidates": list(e.candidates),
        "ballots": [{"ranking": e.names(bc.ranking), "count": bc.count}
                    for bc in e.ballots],
    }
    meta = {k: v for k, v in e.metadata.items() if v is not None}
    if meta:
        doc["metadata"] = meta
    return doc


def serialize(e: Election, format: str = "json") -> str:
    if format == "json":
        return json.dumps(to_dict(e), indent=1, ensure_ascii=False) + "\n"
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["ranking", "count"])
        for bc in e.ballots:
            w.writerow([";".join(e.names(bc.ranking)), bc.count])
        return buf.getvalue()
    raise ValueError(f"unknown format {format!r}")


# -- projection and tallies ---------------------------------------------------

def project(ranking: Sequence[int], standing) -> tuple:
    """Largest subsequence of ``ranking`` made of members of ``standing``."""
    return tuple(c for c in ranking if c in standing)


def first_standing(ranking: Sequence[int], standing):
    for c in ranking:
        if c in standing:
            return c
    return None


def tally(e: Election, standing) -> dict:
    standing = frozenset(standing)
    if not standing:
        raise ValueError("empty standing set")
    out = {c: 0 for c in sorted(standing)}
    for bc in e.ballots:
        c = first_standing(bc.ranking, standing)
        if c is not None:
            out[c] += bc.count
    return out


def first_preferences(e: Election) -> dict:
    return tally(e, e.roster)


# -- IRV ----------------------------------------------------------------------

@dataclass(frozen=True)
class EliminationSequence:
    order: tuple                 # first eliminated first, winner last
    round_tallies: tuple         # one {candidate: tally} per elimination round
    tie_breaks: tuple = ()       # rounds whose loser was picked by roster index

    @property
    def winner(self) -> int:
        return self.order[-1]

    @property
    def eliminated(self) -> tuple:
        return self.order[:-1]


def tabulate_irv(e: Election) -> EliminationSequence:
    standing = set(range(e.n))
    order, rounds, ties = [], [], []
    while len(standing) > 1:
        t = tally(e, standing)
        low = min(t.values())
        tied = sorted(c for c, v in t.items() if v == low)
        loser = tied[0]
        if len(tied) > 1:
            ties.append(len(rounds))
            log.info("round %d: tie among %s, eliminating %s by roster index",
                     len(rounds) + 1, e.names(tied), e.candidates[loser])
        rounds.append(t)
        order.append(loser)
        standing.discard(loser)
    order.extend(standing)
    return EliminationSequence(tuple(order), tuple(rounds), tuple(ties))


def reported_winner(e: Election) -> int:
    w = e.reported_winner
    return tabulate_irv(e).winner if w is None else w


def group_is_valid(e: Election, standing, group) -> bool:
    """True if ``group`` can be eliminated together from ``standing``."""
    standing = frozenset(standing)
    group = frozenset(group)
    rest = standing - group
    if not group or not rest or not group <= standing:
        return False
    t = tally(e, standing)
    combined = sum(t[c] for c in group)
    return all(t[c] > combined for c in rest)


def group_eliminations(e: Election, seq: EliminationSequence, strategy: str = "maximal",
                       unit_asn=None) -> list:
    """Split the elimination order into consecutive groups.

    ``strategy`` is ``"none"`` (singletons), ``"maximal"`` (each group grown as
    far as the grouping condition permits) or ``"asn-greedy"``. The latter
    needs ``unit_asn(standing, group) -> float`` and picks, over all valid
    groupings of the order, the one whose largest unit ASN is smallest.
    Singleton groups are always allowed; they are ordinary rounds.
    """
    check = tabulate_irv(e).order
    if tuple(seq.order) != check:
        warnings.warn("elimination order differs from the tabulated order; "
                      "grouping the order as given")
    order = list(seq.order)
    n = len(order)
    if n < 2:
        return []

    def valid_sizes(i):
        standing = frozenset(order[i:])
        sizes = [1]
        for k in range(2, n - i):
            if group_is_valid(e, standing, order[i:i + k]):
                sizes.append(k)
        return sizes

    if strategy == "none":
        return [(c,) for c in order[:-1]]
    if strategy == "maximal":
        groups, i = [], 0
        while i < n - 1:
            k = max(valid_sizes(i))
            groups.append(tuple(order[i:i + k]))
            i += k
        return groups
    if strategy == "asn-greedy":
        if unit_asn is None:
            raise ValueError("asn-greedy grouping needs a unit_asn callback")
        best = {n - 1: (0.0, [])}
        for i in range(n - 2, -1, -1):
            standing = frozenset(order[i:])
            options = []
            for k in valid_sizes(i):
                group = tuple(order[i:i + k])
                here = unit_asn(standing, group)
                rest_cost, rest = best[i + k]
                # prefer lower overall cost, then the cheaper first unit, then larger groups
                options.append((max(here, rest_cost), here, -k, [group] + rest))
            cost, _, _, groups = min(options, key=lambda o: o[:3])
            best[i] = (cost, groups)
        return best[0][1]
    raise ValueError(f"unknown grouping strategy {strategy!r}")
