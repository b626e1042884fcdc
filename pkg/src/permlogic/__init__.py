"""Logic on permutations: FO/MSO model checking in the theory of two orders,
formula compilers, the special constructions and the graph reduction."""

from .perm import Permutation, VincularPattern, count_vincular, occurrences, statistics
from .logic import (
    INCIDENCE, TOG, TOLO, TOTO, Formula, FormulaError, ParseError, Signature, Structure, format_formula,
    parse_formula, structure_of_graph, structure_of_linear_order, structure_of_permutation, structure_of_word,
)
from .evaluator import BudgetExceeded, EvaluationError, Evaluator, count_tuples, evaluate
from .transformers import (
    expand_card, interpret_incidence, merge_sentence, modular_count_sentence, relativize, skew_merged_sentence,
    word_simulation,
)
from .constructions import (
    Graph, GriddingMatrix, check_gridding, incidence_graph, incidence_structure, pi_kl, spiral, staircase_matrix,
    treewidth,
)
from .efgames import DUPLICATOR, SPOILER, ef_winner
from .merge import admissible_coloring, verify_coloring
from .reduction import ReductionOutput, decode_graph, encode_graph, track_closure, translate_sentence

__version__ = "0.1.0"
