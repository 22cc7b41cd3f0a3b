"""Finite model theory toolkit for order-, presentation- and choice-invariant
first-order logic on small structures."""

from .structures import (HanfSignature, NeighborhoodType, Structure, StructureError, Vocabulary, ball,
                         canonical_form, distance, hanf_equivalent, hanf_signature, is_isomorphic,
                         neighborhood_type, parse_structure, serialize_structure)
from .logic import Evaluator, evaluate, parse_formula, to_text

__version__ = "0.1.0"
