"""Probe LLMs for Wikidata objects, link them to QIDs, and score the result."""

from .dataset import QueryRecord, GroundTruthRecord, RelationId, load_records, relation_profile
from .evaluation import overall_report, row_scores
from .prompting import parse_object_list

__version__ = "0.1.0"

__all__ = [
    "GroundTruthRecord",
    "QueryRecord",
    "RelationId",
    "load_records",
    "overall_report",
    "parse_object_list",
    "relation_profile",
    "row_scores",
]
