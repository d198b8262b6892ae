"""Instant-runoff tabulation, risk-limiting audit planning and audit simulation."""
from .ballots import (BallotClass, Election, EliminationSequence, ParseError, first_preferences,
                      group_eliminations, load_election, make_election, parse_election, project,
                      serialize, tabulate_irv, tally)
from .kernels import (BravoState, MacroState, Signal, asn_bp, asn_cp, bravo_update,
                      macro_discrepancy, macro_update)
from .plans import (BP, CP, AuditPlan, AuditUnit, FullRecount, GroupedLoser, Hypothesis, Standing,
                    WinnerOnlyPair, build_plan, interpret, plan_eo, plan_se, plan_wo)
from .raire import find_best_audit, raire, verify_plan_soundness
from .simulation import ErrorModel, SimConfig, SimResult, inject_errors, simulate
from .experiment import GridConfig, run_experiment

__all__ = [
    "BallotClass", "Election", "EliminationSequence", "ParseError", "first_preferences",
    "group_eliminations", "load_election", "make_election", "parse_election", "project",
    "serialize", "tabulate_irv", "tally",
    "BravoState", "MacroState", "Signal", "asn_bp", "asn_cp", "bravo_update",
    "macro_discrepancy", "macro_update",
    "BP", "CP", "AuditPlan", "AuditUnit", "FullRecount", "GroupedLoser", "Hypothesis",
    "Standing", "WinnerOnlyPair", "build_plan", "interpret", "plan_eo", "plan_se", "plan_wo",
    "find_best_audit", "raire", "verify_plan_soundness",
    "ErrorModel", "SimConfig", "SimResult", "inject_errors", "simulate",
    "GridConfig", "run_experiment",
]
