"""Exception hierarchy shared by every starforge module.

Query errors carry a stable ``code`` string that the HTTP service reuses
verbatim in its error bodies, so renaming a code is a wire-format change.
"""

from __future__ import annotations


class StarforgeError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"


class DdlSyntaxError(StarforgeError):
    """DDL input that does not match the subset grammar."""

    code = "ddl_syntax"

    def __init__(self, message: str, line: int, column: int, expected: str | None = None):
        location = f"line {line}, column {column}"
        suffix = f" (expected {expected})" if expected else ""
        super().__init__(f"{message} at {location}{suffix}")
        self.line = line
        self.column = column
        self.expected = expected


class UnsupportedFeatureError(StarforgeError):
    """Input uses a construct that is deliberately outside the supported subset."""

    code = "unsupported_feature"


class SchemaViolationError(StarforgeError):
    """A catalog document or catalog value breaks a structural invariant."""

    code = "schema_violation"


class NoPathFoundError(StarforgeError):
    """No foreign-key path exists from the fact source to a grain attribute."""

    code = "no_path"


class DesignError(StarforgeError):
    """A design document field cannot be resolved against the catalog."""

    code = "design_error"


class NotNumericError(DesignError):
    """Non-COUNT aggregation requested over a non-numeric column."""

    code = "not_numeric"


class MixedSourceTablesError(DesignError):
    """Measures drawn from more than one source table."""

    code = "mixed_source_tables"


class UnknownColumnError(DesignError):
    """A (table, column) reference that does not exist in the catalog."""

    code = "unknown_column"


class MissingFileError(StarforgeError):
    """An input file required by the pipeline is absent."""

    code = "missing_file"


class RowValueError(StarforgeError):
    """A CSV cell that does not parse under its declared column type."""

    code = "row_value"

    def __init__(self, message: str, table: str, row: int, column: str):
        super().__init__(f"{table}.{column}, row {row}: {message}")
        self.table = table
        self.row = row
        self.column = column


class ReferentialError(StarforgeError):
    """A foreign-key value with no matching primary-key row."""

    code = "referential"


class QueryError(StarforgeError):
    """Base class for cube-query validation errors."""

    code = "bad_query"

    def __init__(self, message: str, detail: str | None = None):
        super().__init__(message)
        self.detail = detail


class UnknownDimensionError(QueryError):
    code = "unknown_dimension"


class UnknownLevelError(QueryError):
    code = "unknown_level"


class UnknownMemberError(QueryError):
    code = "unknown_member"


class UnknownMeasureError(QueryError):
    code = "unknown_measure"


class AtTopLevelError(QueryError):
    code = "at_top_level"


class AtBottomLevelError(QueryError):
    code = "at_bottom_level"


class AxisMismatchError(QueryError):
    code = "axis_mismatch"
