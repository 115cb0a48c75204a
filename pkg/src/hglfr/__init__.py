"""Hierarchical LFR-style benchmark generator with resolution-window diagnostics."""

__version__ = "0.1.0"

from .analysis import (
    OmegaMatrix,
    ResolutionWindow,
    SweepResult,
    achieved_mu,
    community_mu,
    gamma_grid,
    gamma_sweep,
    modularity,
    omega_matrix,
    resolution_window,
)
from .detection import DetectionResult, label_propagation, maximize_modularity, nmi
from .errors import (
    ConfigError,
    DegenerateCommunityError,
    GenerationError,
    HGLFRError,
    ParameterError,
    SelfLoopError,
    UndefinedInputError,
    UndefinedWindowError,
    ValidationError,
)
from .graph import Graph, Hierarchy, Partition, build_graph, coarsen, inter_community_edge_counts
from .sampling import PARAMETRIZATIONS, GeneratorParams, HierarchyParams
from .wiring import GeneratedNetwork, generate

__all__ = [
    "Graph",
    "Partition",
    "Hierarchy",
    "build_graph",
    "coarsen",
    "inter_community_edge_counts",
    "GeneratorParams",
    "HierarchyParams",
    "PARAMETRIZATIONS",
    "GeneratedNetwork",
    "generate",
    "modularity",
    "omega_matrix",
    "resolution_window",
    "achieved_mu",
    "community_mu",
    "gamma_grid",
    "gamma_sweep",
    "OmegaMatrix",
    "ResolutionWindow",
    "SweepResult",
    "DetectionResult",
    "label_propagation",
    "maximize_modularity",
    "nmi",
    "HGLFRError",
    "ValidationError",
    "SelfLoopError",
    "ParameterError",
    "GenerationError",
    "UndefinedInputError",
    "DegenerateCommunityError",
    "UndefinedWindowError",
    "ConfigError",
]
