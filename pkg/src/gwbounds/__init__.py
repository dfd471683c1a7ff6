"""Lower bounds of the (fused) Gromov-Wasserstein distance and their sliced variants."""

__version__ = "0.1.0"

from .bounds import (
    BOUNDS,
    BoundConfig,
    DistanceResult,
    compute,
    fgw_entropic,
    flb,
    ftlb,
    gw_bruteforce,
    pairwise_distances,
    sftlb,
    slb,
    stlb,
    tlb,
)
from .estimators import (
    BoundDistance,
    FreeSupportBarycenter,
    PrecomputedKNNClassifier,
    QuantileEmbedder,
)
from .exceptions import (
    ConvergenceError,
    ConvergenceWarning,
    DomainError,
    GWBoundsError,
    ParseError,
    ValidationError,
)
from .quantile import QuadratureRule, embed, fused_embedding, midpoint_rule
from .spaces import (
    MmSpace,
    PointCloud,
    StructuredSpace,
    load_space,
    mm_from_point_cloud,
    save_space,
)
from .sliced import ProjectionSet, dimension_constant, sample_directions, sw2_squared

__all__ = [
    "BOUNDS", "BoundConfig", "BoundDistance", "ConvergenceError", "ConvergenceWarning",
    "DistanceResult", "DomainError", "FreeSupportBarycenter", "GWBoundsError", "MmSpace",
    "ParseError", "PointCloud", "PrecomputedKNNClassifier", "ProjectionSet", "QuadratureRule",
    "QuantileEmbedder", "StructuredSpace", "ValidationError", "compute", "dimension_constant",
    "embed", "fgw_entropic", "flb", "ftlb", "fused_embedding", "gw_bruteforce", "load_space",
    "midpoint_rule", "mm_from_point_cloud", "pairwise_distances", "sample_directions", "save_space", "sftlb", "slb",
    "stlb", "sw2_squared", "tlb",
]
