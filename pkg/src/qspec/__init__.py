"""Specification theories over structured labels: modal refinement, refinement
distances and the compositional operators for DMTS, acceptance automata and
normal-form nu-calculus."""
from .errors import (BudgetError, CapabilityError, KindMismatchError, ParseError, QSpecError,
                     StructureMismatchError, ValidationError)
from .labels import (Discrete, Interval, LabelSet, LabelStructure, Weighted, conj_label,
                     is_implementation_label, label_distance, refines_label, residual_labels,
                     sync_label)
from .model import (AA, DMTS, LTS, AcceptanceAutomaton, NuExpr, QuotientState, SpecDocument, bd,
                    db, ddh, embed_lts, hd, is_implementation, translate, validate)
from .ops import (compose, conjoin, disjoin, inconsistent_initials, is_consistent, lattice_bounds,
                  prune_inconsistent, quotient, split_divisor)
from .quant import (DistanceTable, TraceDistanceSpec, composition_bound_P, make_metric,
                    refinement_distance, relaxed_membership, thorough_distance_oracle,
                    witness_family)
from .refine import (RefinementWitness, implementations_upto, mc_nu, mr_aa, mr_dmts, mr_nu,
                     refines, tr_oracle)
from .syntax import load_spec, parse_json, parse_spec, serialize

__version__ = "0.1.0"

__all__ = [
    "AA",
    "AcceptanceAutomaton",
    "BudgetError",
    "CapabilityError",
    "DMTS",
    "Discrete",
    "DistanceTable",
    "Interval",
    "KindMismatchError",
    "LTS",
    "LabelSet",
    "LabelStructure",
    "NuExpr",
    "ParseError",
    "QSpecError",
    "QuotientState",
    "RefinementWitness",
    "SpecDocument",
    "StructureMismatchError",
    "TraceDistanceSpec",
    "ValidationError",
    "Weighted",
    "bd",
    "compose",
    "composition_bound_P",
    "conj_label",
    "conjoin",
    "db",
    "ddh",
    "disjoin",
    "embed_lts",
    "hd",
    "implementations_upto",
    "inconsistent_initials",
    "is_consistent",
    "is_implementation",
    "is_implementation_label",
    "label_distance",
    "lattice_bounds",
    "load_spec",
    "make_metric",
    "mc_nu",
    "mr_aa",
    "mr_dmts",
    "mr_nu",
    "parse_json",
    "parse_spec",
    "prune_inconsistent",
    "quotient",
    "refinement_distance",
    "refines",
    "refines_label",
    "relaxed_membership",
    "residual_labels",
    "serialize",
    "split_divisor",
    "sync_label",
    "thorough_distance_oracle",
    "tr_oracle",
    "translate",
    "validate",
    "witness_family",
]
