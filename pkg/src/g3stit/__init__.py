"""Labelled sequent calculi G3Ldm, G3Tstit and G3Xstit: proof search, countermodels, semantics."""

from .axioms import corpus as axiom_corpus
from .calculus import rule_table
from .countermodel import BranchSnapshot, CountermodelError, ExtractionResult, extract, verify
from .formula import FormulaError, negate, parse, render
from .proof import ProofTree, check_proof, proof_from_json, proof_text, proof_to_json
from .prover import (
    Derivable, Refuted, SearchConfig, Unknown, admissibility_suite, certificate, prove, prove_formula, prove_many,
)
from .semantics import (
    RelationalModel, enumerate_frames, model_check, sequent_countermodel, valid_on_models, validate_frame,
)
from .sequent import Equality, Labelled, RelAtom, Sequent, parse_sequent, satisfies, singleton

__version__ = "0.1.0"

__all__ = [
    "BranchSnapshot", "CountermodelError", "Derivable", "Equality", "ExtractionResult", "FormulaError", "Labelled",
    "ProofTree", "Refuted", "RelAtom", "RelationalModel", "SearchConfig", "Sequent", "Unknown",
    "admissibility_suite", "axiom_corpus", "certificate", "check_proof", "enumerate_frames", "extract",
    "model_check", "negate", "parse", "parse_sequent", "proof_from_json", "proof_text", "proof_to_json", "prove",
    "prove_formula", "prove_many", "render", "rule_table", "satisfies", "sequent_countermodel", "singleton",
    "valid_on_models", "validate_frame", "verify",
]
