"""In-memory relational storage and execution."""

from .catalog import DEFAULT_PAGE_SIZE, Database, TableStats, compute_stats, pages_for, schema_for
from .operators import (
    Cmp,
    distinct,
    hash_inner_join,
    hash_left_outer_join,
    nested_loop_join,
    project,
    rename,
    select,
)
from .relation import Column, Relation, Schema
from .values import Kind, Value

__all__ = [
    "DEFAULT_PAGE_SIZE", "Database", "TableStats", "compute_stats", "pages_for", "schema_for",
    "Cmp", "distinct", "hash_inner_join", "hash_left_outer_join", "nested_loop_join",
    "project", "rename", "select", "Column", "Relation", "Schema", "Kind", "Value",
]
