"""Partition reductions of gammoids to partition matroids."""

__version__ = "0.1.0"

from .errors import (
    GenerationFailed,
    InvariantViolation,
    ListTooSmall,
    NoCaseApplies,
    NotIndependent,
    ParseError,
    TooLarge,
    UncolorableSource,
    UniverseMismatch,
)
from .flow import FlowState, coloring_number, feasible_flow, pad_with_dummies
from .instance import (
    GammoidInstance,
    VertexMap,
    is_independent,
    normalize,
    parse_instance,
    rank,
    serialize_instance,
)
from .reduce import PartitionReduction, partition_reduction
