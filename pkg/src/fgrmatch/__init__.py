"""Hierarchical spatial template recognition with fuzzy geometric relations.

Templates describe how objects sit relative to one another through a DAG
of graded geometric relations; recognition matches them against observed
situations and attaches a proximity measure in [0, 1] to every instance.
"""

from .errors import (
    DegenerateGeometryError,
    FormatError,
    InfeasiblePlantError,
    SpecValidationError,
    TemplateValidationError,
)
from .fuzzy import ANY, AnySet, TrapezoidalSet, combine_min
from .geometry import (
    Line2,
    OrientedPoint,
    Point2,
    foot_and_offset,
    interior_angle,
    isometry_apply,
    normalize_angle,
    principal_axis_fit,
    relative_orientation,
)
from .oracle import brute_force_recognize, brute_force_with_stats
from .recognition import (
    SearchStats,
    Situation,
    SituationObject,
    TemplateInstance,
    ZeroProximityReport,
    candidate_stream,
    evaluate_assignment,
    recognize,
    recognize_with_stats,
)
from .relations import (
    RelationKind,
    RelationResult,
    RelationSpec,
    evaluate,
    reference_point,
    shape_proximity,
)
from .spatial_index import KnnTable, build_knn_table, span_filter
from .template import (
    AttributeSchema,
    ConstraintNode,
    ObjectArg,
    RelationArg,
    Template,
    TemplateObject,
    max_span_bound,
    topological_order,
    validate_template,
)

__version__ = "0.1.0"

__all__ = [
    "ANY",
    "AnySet",
    "AttributeSchema",
    "ConstraintNode",
    "DegenerateGeometryError",
    "FormatError",
    "InfeasiblePlantError",
    "KnnTable",
    "Line2",
    "ObjectArg",
    "OrientedPoint",
    "Point2",
    "RelationArg",
    "RelationKind",
    "RelationResult",
    "RelationSpec",
    "SearchStats",
    "Situation",
    "SituationObject",
    "SpecValidationError",
    "Template",
    "TemplateInstance",
    "TemplateObject",
    "TemplateValidationError",
    "TrapezoidalSet",
    "ZeroProximityReport",
    "brute_force_recognize",
    "brute_force_with_stats",
    "build_knn_table",
    "candidate_stream",
    "combine_min",
    "evaluate",
    "evaluate_assignment",
    "foot_and_offset",
    "interior_angle",
    "isometry_apply",
    "max_span_bound",
    "normalize_angle",
    "principal_axis_fit",
    "recognize",
    "recognize_with_stats",
    "reference_point",
    "relative_orientation",
    "shape_proximity",
    "span_filter",
    "topological_order",
    "validate_template",
]
