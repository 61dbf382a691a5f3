"""Regular expressions with backreferences and their grammar and automaton models."""
from .analysis import Bounds, BoundsDiverged, compute_bounds, is_closed, is_closed_star, ts_sequence
from .grammar import Grammar, bounded_language, parse_grammar, serialize
from .mcfg import NotClosedStar, build_mcfg, construct_mcfg, mcfg_block_trace
from .nesa import Nesa, accepts, build_nesa, istep_bigstep
from .nfa import ExtNfa, build_nfa, open_sets
from .pmcfg import build_pmcfg, construct_pmcfg, functional_deref_trace
from .refstring import deref, lang_oracle, mem, parse_refstring, ref_enumerate
from .syntax import parse, parse_valid, pretty, validate

__all__ = [
    "Bounds", "BoundsDiverged", "ExtNfa", "Grammar", "Nesa", "NotClosedStar",
    "accepts", "bounded_language", "build_mcfg", "build_nesa", "build_nfa", "build_pmcfg",
    "compute_bounds", "construct_mcfg", "construct_pmcfg", "deref", "functional_deref_trace",
    "is_closed", "is_closed_star", "istep_bigstep", "lang_oracle", "mcfg_block_trace", "mem",
    "open_sets", "parse", "parse_grammar", "parse_refstring", "parse_valid", "pretty",
    "ref_enumerate", "serialize", "ts_sequence", "validate",
]
