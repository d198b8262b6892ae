"""Recompute the worked-example audit figures and print them next to the reference values."""
from __future__ import annotations

import argparse
from pathlib import Path

from irvaudit import kernels
from irvaudit.ballots import load_election, tabulate_irv
from irvaudit.plans import BP, CP, plan_eo, plan_se, plan_wo
from irvaudit.raire import raire, verify_plan_soundness
from irvaudit.simulation import SimConfig, simulate

DATA = Path(__file__).resolve().parent.parent / "data"


def show(label, got, ref):
    print(f"  {label:<44} {got:>16,.1f}   ref {ref}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=0.05)
    ap.add_argument("--gamma", type=float, default=1.1)
    args = ap.parse_args()
    a, g = args.alpha, args.gamma

    t1 = load_election(DATA / "table1.json")
    print("table1:", ",".join(t1.names(tabulate_irv(t1).order)))
    for tw, ref in ((26000, "44.5"), (10000, "6885"), (15000, "246")):
        show(f"BP first round {tw} vs 9000", kernels.asn_bp(tw, 9000, 60000, a), ref)
    eo = plan_eo(t1, BP, a)
    for i, (u, ref) in enumerate(zip(eo.units[1:], ("51.8 / 64.0", "1186")), 2):
        show(f"BP EO round {i} (max)", u.asn, ref)
    show("BP EO overall", eo.overall_asn, "6885")
    cp = plan_eo(t1, CP, a, g)
    for i, (u, ref) in enumerate(zip(cp.units, ("395.4", "28.2", "98.9")), 1):
        show(f"CP EO round {i} (U={u.u:.1f})", u.asn, ref)
    sim = simulate(cp, t1, t1, SimConfig(a, g, kind=CP, reps=10))
    show("CP EO simulated draws (mean of 10)", sim.mean_draws, "394")

    e4 = load_election(DATA / "example4.json")
    print("example4:", ",".join(e4.names(tabulate_irv(e4).order)))
    show("BP first round 500 vs 499", kernels.asn_bp(500, 499, 21999, a), "13,165,239")
    se = plan_se(e4, BP, a)
    for i, u in enumerate(se.units, 1):
        print(f"  BP SE unit {i}: " + ", ".join(f"{h.asn_bp:.1f}" for h in u.hypotheses))
    print("  ref 17.0, 36.2, 49.1 | 77.6, 1402")
    mx = plan_se(e4, BP, a, strategy="maximal")
    show("BP SE triple group (max)", mx.units[0].asn, "158,156,493")
    show("CP SE overall", plan_se(e4, CP, a, g).overall_asn, "145")

    e6 = load_election(DATA / "example6.json")
    print("example6:")
    for u in plan_wo(e6, BP, a).units:
        show(f"BP WO {u.hypotheses[0].describe(e6)}", u.asn, "98.4 / 98.3")
    for u in plan_wo(e6, CP, a, g).units:
        show(f"CP WO {u.hypotheses[0].describe(e6)} V={u.v_min}", u.asn, "36.2")

    e8 = load_election(DATA / "example8.json")
    print("example8:", ",".join(e8.names(tabulate_irv(e8).order)))
    for kind, ref in ((BP, "1% (270)"), (CP, "0.17%")):
        plan = raire(e8, 0, kind, a, g)
        rep = verify_plan_soundness(plan, e8, 0)
        print(f"  RAIRE {kind}: overall {plan.overall_asn:.1f} ({plan.asn_pct:.2f}%)  ref {ref}"
              f"  sound={rep.sound} ({rep.checked} orders)")
        for h in plan.hypotheses:
            print(f"    {h.describe(e8):<24} {100 * h.asn(kind) / e8.total:.3f}%")


if __name__ == "__main__":
    main()
