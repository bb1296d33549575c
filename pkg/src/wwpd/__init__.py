"""Counting quasimorphisms from WWPD actions on trees, at desk scale."""
from .words import CyclicWord, ReducedWord, cyclic_reduce, primitive_root
from .tree import Axis, BoundaryPair, Ray, axis_of, boundary_pair, sim_equivalent
from .wreath import GammaElement, ProductWord, SemidirectModel, model_a, model_b

__version__ = "0.1.0"

__all__ = [
    "CyclicWord",
    "ReducedWord",
    "cyclic_reduce",
    "primitive_root",
    "Axis",
    "BoundaryPair",
    "Ray",
    "axis_of",
    "boundary_pair",
    "sim_equivalent",
    "GammaElement",
    "ProductWord",
    "SemidirectModel",
    "model_a",
    "model_b",
]
