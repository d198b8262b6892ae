"""BRAVO (ballot-polling) and MACRO (ballot-comparison) sequential tests.

States are immutable; ``*_update`` returns the next state. Test statistics are
accumulated in log space so long runs cannot overflow or underflow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

INF = math.inf


class Signal(Enum):
    FOR_WINNER = 1
    FOR_LOSER = -1
    NEUTRAL = 0


class ClosedStateError(RuntimeError):
    pass


class Escalation(RuntimeError):
    """A comparison discrepancy too large for the running P-value to absorb."""


def asn_bp(tally_w, tally_l, total, alpha) -> float:
    """Expected ballots a BRAVO test needs to show ``tally_w > tally_l``."""
    if total <= 0 or tally_w <= tally_l:
        return INF
    p_w = tally_w / total
    p_l = tally_l / total
    s = tally_w / (tally_w + tally_l)
    denom = p_w * math.log(2 * s)
    if tally_l > 0:
        denom += p_l * math.log(2 - 2 * s)
    if denom <= 0:
        return INF
    return (math.log(1 / alpha) + 0.5 * math.log(2 * s)) / denom


def diluted_bound(total, v_min, gamma) -> float:
    """U = 2 * gamma * total / v_min."""
    if v_min <= 0:
        return INF
    return 2 * gamma * total / v_min


def asn_cp(total, v_min, alpha, gamma) -> float:
    """Expected ballots a zero-error MACRO audit inspects: -ln(alpha) * U."""
    if v_min <= 0:
        return INF
    return -math.log(alpha) * diluted_bound(total, v_min, gamma)


def cp_run_length(u: float, alpha: float) -> int:
    """Draws until a zero-discrepancy MACRO run confirms."""
    if alpha >= 1:
        return 0
    return math.ceil(math.log(alpha) / math.log1p(-1 / u))


# -- BRAVO ----------------------------------------------------------------------

@dataclass(frozen=True)
class BravoState:
    s_wl: float
    alpha: float
    log_t: float = 0.0
    rejected: bool = False

    @classmethod
    def start(cls, tally_w, tally_l, alpha) -> "BravoState":
        if tally_w + tally_l <= 0:
            s = 0.0
        else:
            s = tally_w / (tally_w + tally_l)
        return cls(s, alpha)

    @property
    def t_wl(self) -> float:
        return math.exp(self.log_t)

    @property
    def status(self) -> str:
        return "rejected-null" if self.rejected else "open"

    @property
    def log_winner_factor(self) -> float:
        return _log(2 * self.s_wl)

    @property
    def log_loser_factor(self) -> float:
        return _log(2 - 2 * self.s_wl)


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -INF


def bravo_update(st: BravoState, sig: Signal) -> BravoState:
    if st.rejected:
        raise ClosedStateError("null hypothesis already rejected")
    if sig is Signal.FOR_WINNER:
        log_t = st.log_t + st.log_winner_factor
    elif sig is Signal.FOR_LOSER:
        log_t = st.log_t + st.log_loser_factor
    else:
        return st
    return replace(st, log_t=log_t, rejected=log_t >= math.log(1 / st.alpha))


def bravo_statistic(s_wl: float, k_w: int, k_l: int) -> float:
    """Closed form of T after ``k_w`` winner and ``k_l`` loser draws."""
    return (2 * s_wl) ** k_w * (2 - 2 * s_wl) ** k_l


# -- MACRO ----------------------------------------------------------------------

@dataclass(frozen=True)
class MacroState:
    total_ballots: int
    v_min: float
    gamma: float
    log_p: float = 0.0
    confirmed: bool = False

    def __post_init__(self):
        if self.v_min <= 0:
            raise ValueError("MACRO needs a positive smallest margin")
        if self.gamma < 1:
            raise ValueError("gamma must be at least 1")

    @property
    def u(self) -> float:
        return diluted_bound(self.total_ballots, self.v_min, self.gamma)

    @property
    def p_km(self) -> float:
        return math.exp(self.log_p)

    @property
    def status(self) -> str:
        return "confirmed" if self.confirmed else "open"

    def log_multiplier(self, e_b: float) -> float:
        denom = 1 - e_b * self.v_min / (2 * self.gamma)
        if denom <= 0:
            raise Escalation(f"discrepancy {e_b} leaves no room in the P-value")
        return math.log1p(-1 / self.u) - math.log(denom)


def macro_update(st: MacroState, e_b: float, alpha: float) -> MacroState:
    if st.confirmed:
        raise ClosedStateError("unit already confirmed")
    log_p = st.log_p + st.log_multiplier(e_b)
    return replace(st, log_p=log_p, confirmed=log_p <= math.log(alpha))


def macro_discrepancy(pairs, reported, actual, interpret) -> float:
    """Maximum relative overstatement of one ballot over a unit's pairs.

    ``pairs`` holds ``(winner, loser, margin, interp)`` tuples; ``interpret``
    maps ``(ranking, interp)`` to the party the ballot counts for, or None.
    """
    best = -INF
    for w, l, margin, interp in pairs:
        if margin <= 0:
            raise ValueError("pair margins must be positive")
        rep = interpret(reported, interp)
        act = interpret(actual, interp)
        num = (rep == w) - (act == w) - (rep == l) + (act == l)
        best = max(best, num / margin)
    return best
