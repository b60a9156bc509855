from .scalars import Scalar
from .terms import NcTerm, SpaceLabel, Symbol, parse_term
from .rewrite import Rule, RewriteSystem, Step, reduce

__all__ = ["NcTerm", "Rule", "RewriteSystem", "Scalar", "SpaceLabel", "Step",
           "Symbol", "parse_term", "reduce"]
