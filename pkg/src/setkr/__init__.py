"""setkr: knowledge representation with assertions over hereditarily finite sets.

The layers, bottom-up:

* :mod:`setkr.hfset`: the value domain (atoms, tuples, extensional sets);
* :mod:`setkr.syntax`: structures, terms, assertions, definitions;
* :mod:`setkr.parser`: the ``.skr`` language and its printer;
* :mod:`setkr.definitions`: dependency checks and fixpoint evaluation;
* :mod:`setkr.desugar`: lowering of logic sugar to primitive equalities;
* :mod:`setkr.semantics`: model checking, bounded entailment, fact queries;
* :mod:`setkr.dl`: description-logic translation;
* :mod:`setkr.cli`: the ``setkr`` command.
"""
__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .hfset import (BOT, EMPTY, TOP, Atom, HSet, Tup, Value, cardinality, cartesian_product,  # noqa: F401
                    member, nat, nat_value, parse_value, power_set, render, set_difference,
                    set_intersect, set_union, subset)
from .syntax import (Assertion, Diagnostic, KnowledgeBase, SourceSpan, SyntacticStructure,  # noqa: F401
                     ground_schema, is_primitive, validate_structure)
from .parser import format_kb, parse_assertion, parse_formula, parse_kb  # noqa: F401
from .definitions import (build_dependency_graph, check_nonrecursive, evaluate,  # noqa: F401
                          evaluate_comprehension)
from .desugar import (FreshNamer, desugar_kb, desugar_logic, desugar_multi,  # noqa: F401
                      desugar_quantifier, flatten_nested)
from .semantics import (Interpretation, check_entails, classify_fragment, eval_term,  # noqa: F401
                        models, models_kb, query_database)
