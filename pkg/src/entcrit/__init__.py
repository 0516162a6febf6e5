"""Entanglement criteria from uncertainty relations of partially transposed operators.

Modules
-------
space     composite Hilbert spaces and operator matrices
ops       ladder matrices and the three-mode operator families
ptrans    partial transposition and the family transpose identities
criteria  separability inequalities and their margins
states    named states and random ensembles
explore   Monte-Carlo audits, violation search, large-j limit study
opdsl     a small operator expression language
cli       the ``entcrit`` command
"""

from .criteria import CRITERIA, CriterionReport, Verdict, get_criterion, operator_criterion
from .space import CompositeSpace, ModeSpec, OperatorMatrix, safe_projector
from .states import QuantumState, rng_stream

__all__ = [
    "CRITERIA",
    "CompositeSpace",
    "CriterionReport",
    "ModeSpec",
    "OperatorMatrix",
    "QuantumState",
    "Verdict",
    "get_criterion",
    "operator_criterion",
    "rng_stream",
    "safe_projector",
]
__version__ = "0.1.0"
