"""Workbench for many-sorted first-order hybrid logic with rigid symbols.

Modules: sigcat (signatures, morphisms, pushouts, interpolation criterion),
syntax (terms, sentences, translation), kripke (finite models, reducts,
amalgamation, basic models), oracle (bounded satisfiability and entailment),
forcing (conditions, generic chains, interpolant search), textio (the .hwb
document format and JSON reports), suites (corpus scenarios), cli.
"""

__version__ = "0.1.0"

__all__ = [
    "cli", "errors", "forcing", "kripke", "oracle", "sigcat", "suites",
    "syntax", "textio",
]
