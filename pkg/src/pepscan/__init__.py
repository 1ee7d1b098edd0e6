"""Multi-pattern peptide matching with Aho-Corasick automata."""

from .ac_core import (Alphabet, Automaton, MatchEvent, PatternSet, WorkProfile, build_automaton,
                      build_failure, build_goto, compile_dense, match_dense, match_naive,
                      match_sparse)
from .hw_model import ComponentSim, CostModel, estimate_time, mm_read, mm_write, run_protein_list

__all__ = [
    "Alphabet", "Automaton", "MatchEvent", "PatternSet", "WorkProfile", "build_automaton",
    "build_failure", "build_goto", "compile_dense", "match_dense", "match_naive", "match_sparse",
    "ComponentSim", "CostModel", "estimate_time", "mm_read", "mm_write", "run_protein_list",
]

__version__ = "0.1.0"
