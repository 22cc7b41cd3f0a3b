from .ast import (FALSE, TRUE, And, Atom, Const, Eps, Eq, Exists, Forall, FreshNames, Implies, Not, Or,
                  atom, conj, disj, distinct, eq, exists, forall, iff, implies, neg, neq, substitute)
from .evaluator import EvaluationError, Evaluator, evaluate, evaluate_naive
from .normal import (CNFTooLarge, is_prenex_cnf, miniscope, nnf, prenex, prenex_cnf, prenex_form,
                     quantifier_rank, substitute_relation, substitute_relation_direct)
from .parser import FormulaSyntaxError, ShadowWarning, parse_formula
from .printer import to_text

__all__ = [
    "FALSE", "TRUE", "And", "Atom", "Const", "Eps", "Eq", "Exists", "Forall", "FreshNames", "Implies", "Not",
    "Or", "atom", "conj", "disj", "distinct", "eq", "exists", "forall", "iff", "implies", "neg", "neq",
    "substitute", "EvaluationError", "Evaluator", "evaluate", "evaluate_naive", "CNFTooLarge", "is_prenex_cnf",
    "miniscope", "nnf", "prenex", "prenex_cnf", "prenex_form", "quantifier_rank", "substitute_relation",
    "substitute_relation_direct", "FormulaSyntaxError", "ShadowWarning", "parse_formula", "to_text",
]
