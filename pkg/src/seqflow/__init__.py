"""Solver library for the sequential flow problem over capacity words."""
from .errors import (InfeasibleFlow, ParseError, ResourceLimitError, SeqflowError, UsageError,
                     ValidationError)
from .flow_algebra import (FlowSemigroup, PairClass, SharpExpression, classify_pair,
                           decompose_unstable, find_witness, generate_closure, omega_structure,
                           parse_expression, realize_flow, sharp)
from .instance import Instance, Nfa, load_instance, make_instance, parse_instance, serialize_instance
from .maxflow import (Cut, TokenFlow, extract_token_flow, max_flow_word, min_cut_word,
                      validate_token_flow)
from .mm_algebra import OMEGA, AbstractMatrix, CapacityMatrix, MMValue, abstract, product
from .qualitative import (Verdict, check_fair_unbounded, check_regular_unbounded, check_unbounded,
                          is_in_rec)
from .quantitative import exists_flow_of_value, one_step, optimal_value, reach

__all__ = [name for name in dir() if not name.startswith("_")]
