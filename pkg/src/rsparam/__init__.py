"""Exact algebra of decorated trees, renormalisation of regularity structures
and a numerical lab for paracontrolled brackets."""
from .trees import Tree, PlusTree, parse_tree, parse_plus
from .algebra import LinComb
from .hopf import HopfStructure
from .rules import EquationSpec, Basis, generate_basis, load_spec, shipped_spec
from .renorm import Character, PreparationMap, Renormalization, make_R_ell

__all__ = ["Tree", "PlusTree", "parse_tree", "parse_plus", "LinComb", "HopfStructure",
           "EquationSpec", "Basis", "generate_basis", "load_spec", "shipped_spec",
           "Character", "PreparationMap", "Renormalization", "make_R_ell"]
__version__ = "0.1.0"
