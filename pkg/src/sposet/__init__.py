"""Succinct partial-order representation with constant-time queries."""

from .bitseq import CompressedBitSequence, build_bitseq, concat_build
from .order import (
    AntichainDecomposition,
    ClosureMatrix,
    Digraph,
    InvalidPosetError,
    LinearExtension,
    NotADagError,
    height_decomposition,
    linear_extension,
    transitive_closure,
    transitive_reduction,
    validate_poset,
)

__version__ = "0.1.0"
