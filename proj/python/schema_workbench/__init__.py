"""Python bindings for the schema matching workbench."""

from schema_workbench._core import (
    Error,
    Link,
    MatchConfig,
    MatchMatrix,
    PartitionReport,
    Schema,
    Session,
    export_concept_sheet,
    export_element_sheet,
    export_matrix,
    load_session,
    match,
    parse_ddl,
    parse_xsd,
    partition,
    read_canonical,
    render_partition,
    save_session,
    suggest_concepts,
    write_canonical,
)

__all__ = [
    "Error",
    "Link",
    "MatchConfig",
    "MatchMatrix",
    "PartitionReport",
    "Schema",
    "Session",
    "export_concept_sheet",
    "export_element_sheet",
    "export_matrix",
    "load_session",
    "match",
    "parse_ddl",
    "parse_xsd",
    "partition",
    "read_canonical",
    "render_partition",
    "save_session",
    "suggest_concepts",
    "write_canonical",
]
