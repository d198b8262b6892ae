"""Acceptance checks, one group per criterion (see the summary printed at the end)."""
import csv
import itertools
import math
import subprocess
import sys

import numpy as np
import pytest
from scipy import stats

from irvaudit.ballots import (BallotClass, Election, load_election, run_length_election,
                              serialize, tabulate_irv)
from irvaudit.experiment import GridConfig, method_table, raire_table, run_experiment
from irvaudit.kernels import asn_bp, asn_cp, cp_run_length, macro_discrepancy
from irvaudit.plans import (BP, CP, AuditPlan, GroupedLoser, Standing, WinnerOnlyPair,
                            build_plan, interpret, plan_eo, plan_se, plan_wo)
from irvaudit.raire import raire, verify_plan_soundness
from irvaudit.simulation import (ErrorModel, SimConfig, inject_errors, manipulated_count,
                                 simulate)
from conftest import DATA
from generators import random_election
from oracles import optimal_max_asn

ALPHA = 0.05


def crit(n):
    return pytest.mark.criterion(n)


def close(got, want, rel=None, abs_=None):
    tol = max(rel * abs(want) if rel else 0.0, abs_ or 0.0)
    return abs(got - want) <= tol


def printed(got, want, rel):
    """Within ``rel`` of a value printed to one decimal, or rounding to it."""
    return close(got, want, rel=rel) or round(got, 1) == want


# -- 1 ---------------------------------------------------------------------------

@crit(1)
def test_c1_table1_first_round_asns():
    for tw, want in ((26000, 44.5), (10000, 6885), (15000, 246)):
        got = asn_bp(tw, 9000, 60000, ALPHA)
        assert close(got, want, rel=2e-3, abs_=0.5), (tw, got, want)


@crit(1)
def test_c1_example4_first_round_asn():
    got = asn_bp(500, 499, 21999, ALPHA)
    assert close(got, 13_165_239, rel=1e-3), got


# -- 2 ---------------------------------------------------------------------------

@crit(2)
def test_c2_table1_eo_bp(table1):
    plan = plan_eo(table1, BP, ALPHA)
    rounds = [[h.asn_bp for h in u.hypotheses] for u in plan.units]
    assert all(close(g, w, rel=0.01) for g, w in zip(rounds[1], [51.8, 64.0]))
    assert close(rounds[2][0], 1186, rel=0.01)
    assert close(plan.overall_asn, 6885, rel=0.01)


@crit(2)
def test_c2_table1_eo_cp(table1):
    plan = plan_eo(table1, CP, ALPHA, 1.1)
    asns = [u.asn for u in plan.units]
    for got, want in zip(asns, [395.4, 28.2, 98.9]):
        assert printed(got, want, 1e-3), (got, want)
    assert printed(plan.overall_asn, 395.4, 1e-3)
    assert close(plan.units[0].u, 132, rel=1e-3)


# -- 3 ---------------------------------------------------------------------------

@crit(3)
def test_c3_example4_se_bp_pair_group(example4):
    plan = plan_se(example4, BP, ALPHA)
    assert plan.units[0].hypotheses[0].loser == frozenset(
        {example4.index("c4"), example4.index("c5")})
    got = [[h.asn_bp for h in u.hypotheses] for u in plan.units]
    for g, w in zip(got[0], [17.0, 36.2, 49.1]):
        assert printed(g, w, 1e-3), (g, w)
    for g, w in zip(got[1], [77.6, 1402]):
        assert close(g, w, rel=1e-3, abs_=0.05), (g, w)


@crit(3)
def test_c3_example4_triple_group(example4):
    plan = plan_se(example4, BP, ALPHA, strategy="maximal")
    assert len(plan.units[0].hypotheses) == 2   # c1 and c2 against {c3, c4, c5}
    worst = max(h.asn_bp for h in plan.units[0].hypotheses)
    assert close(worst, 158_156_493, rel=1e-3), worst


@crit(3)
def test_c3_example4_se_cp(example4):
    plan = plan_se(example4, CP, ALPHA, 1.1)
    asns = [u.asn for u in plan.units]
    for g, w in zip(asns, [36.2, 145, 48.3]):
        assert close(g, w, rel=0.01), (g, w)
    assert close(plan.overall_asn, 145, rel=0.01)


# -- 4 ---------------------------------------------------------------------------

@crit(4)
def test_c4_example6_wo(example6, example6_variant):
    bp = plan_wo(example6, BP, ALPHA)
    assert [abs(u.asn - w) <= 0.5 for u, w in zip(bp.units, [98.4, 98.3])] == [True, True]
    cp = plan_wo(example6, CP, ALPHA, 1.1)
    assert all(abs(u.asn - 36.2) <= 0.1 for u in cp.units)
    c3 = example6.index("c3")
    assert [u.v_min for u in cp.units if u.hypotheses[0].loser == c3] == [4001]
    h = [h for h in plan_wo(example6_variant, BP, ALPHA).hypotheses
         if h.loser == example6_variant.index("c3")][0]
    assert h.asn_bp == math.inf


# -- 5 ---------------------------------------------------------------------------

@crit(5)
def test_c5_example3_discrepancy():
    S = Standing(frozenset(range(4)))
    pairs = [(0, 2, 17000, S), (1, 2, 1000, S), (3, 2, 6000, S)]
    assert macro_discrepancy(pairs, (1, 2, 3), (2, 3), interpret) == 2e-3


@crit(5)
def test_c5_integrality_over_all_four_candidate_rankings():
    n = 4
    rankings = [()] + [p for k in range(1, n + 1) for p in itertools.permutations(range(n), k)]
    interps = []
    for w, l in itertools.permutations(range(n), 2):
        interps.append((w, l, WinnerOnlyPair(w, l)))
        for k in range(2, n + 1):
            for S in itertools.combinations(range(n), k):
                if w in S and l in S:
                    interps.append((w, l, Standing(frozenset(S))))
    for k in range(2, n + 1):
        for S in itertools.combinations(range(n), k):
            for gk in range(1, k):
                for E in itertools.combinations(S, gk):
                    E = frozenset(E)
                    for w in set(S) - E:
                        interps.append((w, E, GroupedLoser(frozenset(S), E)))
    V = 7
    for w, l, interp in interps:
        for r, a in itertools.product(rankings, repeat=2):
            x = macro_discrepancy([(w, l, V, interp)], r, a, interpret) * V
            assert abs(x - round(x)) < 1e-12 and round(x) in (-2, -1, 0, 1, 2)


# -- 6 ---------------------------------------------------------------------------

@crit(6)
def test_c6_example8_bp(example8):
    plan = raire(example8, example8.index("c1"), BP, ALPHA)
    assert close(plan.overall_asn, 270, rel=0.05), plan.overall_asn
    assert close(100 * plan.overall_asn / 27000, 1.0, abs_=0.05)


@crit(6)
def test_c6_example8_cp(example8):
    plan = raire(example8, example8.index("c1"), CP, ALPHA, 1.1)
    assert abs(100 * plan.overall_asn / 27000 - 0.17) <= 0.01
    got = sorted(100 * h.asn_cp / 27000 for h in plan.hypotheses)
    # the pairwise members; the pooled-group item (0.04%) is not a pairwise assertion
    want = sorted([0.17, 0.07, 0.11, 0.13])
    assert len(got) == len(want)
    assert all(abs(g - w) <= 0.01 for g, w in zip(got, want)), got


# -- 7 ---------------------------------------------------------------------------

@crit(7)
@pytest.mark.parametrize("kind", [BP, CP])
def test_c7_raire_sound_and_minimal_on_random_elections(kind):
    plans = recounts = 0
    for seed in range(1000):
        e = random_election(np.random.default_rng(seed), 3, 5, 2000)
        assert 3 <= e.n <= 5 and e.total <= 2000
        w = tabulate_irv(e).winner
        result = raire(e, w, kind, ALPHA, 1.1)
        opt = optimal_max_asn(e, w, kind, ALPHA, 1.1)
        if isinstance(result, AuditPlan):
            plans += 1
            assert verify_plan_soundness(result, e, w).sound, seed
            assert result.overall_asn == opt, (seed, result.overall_asn, opt)
        else:
            recounts += 1
            assert opt == math.inf, seed
    assert plans > 500


# -- 8 ---------------------------------------------------------------------------

@crit(8)
@pytest.mark.parametrize("name, method", [("table1", "eo"), ("table1", "se"), ("example4", "se"),
                                          ("example6", "wo"), ("example8", "raire"),
                                          ("example8", "eo")])
def test_c8_cp_units_confirm_at_closed_form(request, name, method):
    e = request.getfixturevalue(name)
    plan = build_plan(e, method, CP, ALPHA, 1.1)
    for unit in plan.units:
        single = AuditPlan(plan.method, CP, ALPHA, 1.1, e.total, (unit,), plan.winner)
        res = simulate(single, e, e, SimConfig(ALPHA, 1.1, kind=CP, reps=3))
        want = math.ceil(math.log(ALPHA) / math.log(1 - 1 / unit.u))
        assert res.draws.tolist() == [want] * 3
    res = simulate(plan, e, e, SimConfig(ALPHA, 1.1, kind=CP, reps=3))
    assert res.draws.tolist() == [max(cp_run_length(u.u, ALPHA) for u in plan.units)] * 3


@crit(8)
def test_c8_u132_runs_394(table1):
    assert cp_run_length(132, ALPHA) == 394
    assert abs(394 - asn_cp(60000, 1000, ALPHA, 1.1)) / 395.4 < 0.01


# -- 9 ---------------------------------------------------------------------------

def wrong_winner_pair(scenario):
    """Records say c1 wins; the physical ballots elect c2.

    ``blatant`` misrecords 250 of 2000 ballots. ``tie`` leaves the true final
    round exactly tied (c2 survives on roster order), the hardest case for a
    risk limit.
    """
    names = ("c1", "c2", "c3")
    if scenario == "blatant":
        actual = [(0,)] * 900 + [(1,)] * 100 + [(1,)] * 850 + [(2, 1)] * 150
        reported = [(0,)] * 900 + [(0,)] * 100 + [(1,)] * 850 + [(2, 0)] * 150
    else:
        actual = [(0,)] * 1000 + [(1,)] * 850 + [(2, 1)] * 150
        reported = [(0,)] * 1000 + [(1,)] * 850 + [(2, 0)] * 100 + [(2, 1)] * 50
    return run_length_election(names, reported), run_length_election(names, actual)


@crit(9)
@pytest.mark.parametrize("scenario", ["blatant", "tie"])
@pytest.mark.parametrize("kind", [BP, CP])
@pytest.mark.parametrize("method", ["eo", "se", "wo", "raire"])
def test_c9_wrong_outcome_rarely_confirmed(method, kind, scenario):
    reported, actual = wrong_winner_pair(scenario)
    assert tabulate_irv(reported).winner == 0 and tabulate_irv(actual).winner == 1
    plan = build_plan(reported, method, kind, ALPHA, 1.1)
    assert isinstance(plan, AuditPlan)
    reps = 1000
    res = simulate(plan, reported, actual, SimConfig(ALPHA, 1.1, kind=kind, reps=reps))
    rate = res.outcome_counts["confirmed"] / reps
    assert rate <= ALPHA + 3 * math.sqrt(ALPHA * (1 - ALPHA) / reps), rate


# -- 10 --------------------------------------------------------------------------

def ten_thousand_ballots():
    rng = np.random.default_rng(2024)
    classes = []
    for count in rng.multinomial(10000, np.full(24, 1 / 24)):
        perm = rng.permutation(4)
        classes.append(BallotClass(tuple(int(c) for c in perm[:rng.integers(1, 5)]), int(count)))
    return Election(("c1", "c2", "c3", "c4"), tuple(classes)).canonical()


@crit(10)
@pytest.mark.parametrize("rate", [0.01, 0.03, 0.05])
def test_c10_manipulated_fraction_in_binomial_interval(rate):
    e = ten_thousand_ballots()
    assert e.total == 10000
    lo, hi = stats.binom.interval(0.99, e.total, rate)
    for seed in range(3):
        reported, actual = inject_errors(e, ErrorModel(rate, seed))
        k = manipulated_count(reported, actual)
        assert lo <= k <= hi, (rate, seed, k, lo, hi)


@crit(10)
def test_c10_rate_zero_files_identical(tmp_path):
    e = ten_thousand_ballots()
    reported, actual = inject_errors(e, ErrorModel(0.0, 1))
    for fmt in ("json", "csv"):
        (tmp_path / f"r.{fmt}").write_text(serialize(reported, fmt))
        (tmp_path / f"a.{fmt}").write_text(serialize(actual, fmt))
        assert (tmp_path / f"r.{fmt}").read_bytes() == (tmp_path / f"a.{fmt}").read_bytes()


# -- 11 --------------------------------------------------------------------------

FILES = ["table1.json", "example4.json", "example6.json", "example8.json"]


@crit(11)
def test_c11_method_tables_from_files():
    out = subprocess.run([sys.executable, "-m", "irvaudit.cli", "grid",
                          *[str(DATA / f) for f in FILES], "--methods", "eo",
                          "--alphas", "0.01,0.05", "--table", "eo"],
                         capture_output=True, text=True, check=True).stdout.splitlines()
    head = out[0].split(",")
    assert head == ["#", "Election", "|C|", "|B|", "MOV",
                    "α=1% BP Polls %", "α=1% BP ASN %", "α=1% CP (γ=1.1) Polls %",
                    "α=1% CP (γ=1.1) ASN %",
                    "α=5% BP Polls %", "α=5% BP ASN %", "α=5% CP (γ=1.1) Polls %",
                    "α=5% CP (γ=1.1) ASN %"]
    assert len(out) == 1 + len(FILES)
    rows = list(csv.reader(out))
    assert rows[1][:4] == ["1", "table1", "4", "60,000"]
    assert rows[1][12] == "0.7"          # 395.4 / 60000
    assert rows[2][6] == "inf"          # example 4 needs a full recount under EO polling


@crit(11)
def test_c11_short_and_raire_layouts():
    els = [(f.split(".")[0], load_election(DATA / f)) for f in FILES]
    rows = run_experiment(els, GridConfig(alphas=(0.01, 0.05), gammas=(1.1, 1.2, 1.3)))
    for m in ("se", "wo"):
        head, body = method_table(rows, m, (0.01, 0.05))
        assert head[:2] == ["#", "|B|"] and len(head) == 10 and len(body) == 4
    head, body = raire_table(rows, 0.05, (1.1, 1.2, 1.3))
    assert len(head) == 14 and len(body) == 4
    ex8 = body[3]
    assert ex8[1] == "27,000" and ex8[5] == "1.0"
