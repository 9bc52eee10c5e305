"""Exact tools for hyperplane slicings of the Boolean hypercube."""

from .cube_core import (CubeEdge, Hyperplane, HyperplaneFamily, covers, cover_to_slicing,
                        find_unsliced_edge, slices, slices_all_edges)
from .product_measure import ProductMeasure

__all__ = ["CubeEdge", "Hyperplane", "HyperplaneFamily", "ProductMeasure", "covers",
           "cover_to_slicing", "find_unsliced_edge", "slices", "slices_all_edges"]
__version__ = "0.1.0"
