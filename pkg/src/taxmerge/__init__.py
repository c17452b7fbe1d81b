"""Target-driven merging of is-a taxonomies."""

from .filters import And, Not, Predicate, parse as parse_filter, render as render_filter
from .graphs import EdgeKind, LabelMode, build_icg, build_matching_graph, gen_attribute_list, gen_label
from .mappings import OutputMappings, eval_filter, generate_mappings, migrate_instances
from .merge_base import MergedTaxonomy, MergeError, merge_base
from .merge_ext import merge_extended
from .model import (
    Concept,
    Correspondence,
    CorrespondenceKind,
    InputMapping,
    Instance,
    Taxonomy,
    TaxonomyError,
    count_root_paths,
    is_implied,
    validate_mapping,
    validate_taxonomy,
)
from .verify import verify_all

__version__ = "0.1.0"

__all__ = [
    "And",
    "Not",
    "Predicate",
    "parse_filter",
    "render_filter",
    "EdgeKind",
    "LabelMode",
    "build_icg",
    "build_matching_graph",
    "gen_attribute_list",
    "gen_label",
    "OutputMappings",
    "eval_filter",
    "generate_mappings",
    "migrate_instances",
    "MergedTaxonomy",
    "MergeError",
    "merge_base",
    "merge_extended",
    "Concept",
    "Correspondence",
    "CorrespondenceKind",
    "InputMapping",
    "Instance",
    "Taxonomy",
    "TaxonomyError",
    "count_root_paths",
    "is_implied",
    "validate_mapping",
    "validate_taxonomy",
    "verify_all",
]
