"""seqsolve: a decision procedure for quantifier-free constraints over
integer sequences with concatenation, element arithmetic and regular
membership.

The pipeline: parse -> elaborate (rewrite shorthand into the core
language) -> encode (reduce to word equations with regular constraints
over a four-letter alphabet) -> solve (Nielsen transformation search).
A separate evaluation oracle and a verification-condition generator for
small sequence programs sit on top of it.
"""

__version__ = "0.1.0"

from .ast import Formula, qf
from .parser import FragmentError, ParseError, parse_formula, parse_matrix
from .printer import print_formula, print_matrix

__all__ = [
    "Formula",
    "qf",
    "FragmentError",
    "ParseError",
    "parse_formula",
    "parse_matrix",
    "print_formula",
    "print_matrix",
    "__version__",
]
