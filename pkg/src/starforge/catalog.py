"""Relational source metadata: tables, columns, keys, and their validation.

The catalog is the machine form of the operational schema every later stage
consumes. It can be built from a DDL file (see :mod:`starforge.ddl`) or from
a JSON catalog document; both routes produce structurally identical values
and both refuse catalogs whose necessary integrity conditions fail.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable

from .errors import SchemaViolationError

SUPPORTED_BASE_TYPES = ("INTEGER", "BIGINT", "DECIMAL", "VARCHAR", "DATE", "TIMESTAMP", "BOOLEAN")
NUMERIC_BASE_TYPES = ("INTEGER", "BIGINT", "DECIMAL")

_BARE_IDENT = re.compile(r"^[a-z_][a-z0-9_]*$")
_TYPE_TEXT = re.compile(
    r"^\s*(INTEGER|BIGINT|DATE|TIMESTAMP|BOOLEAN|DECIMAL\s*\(\s*(\d+)\s*,\s*(\d+)\s*\)|VARCHAR\s*\(\s*(\d+)\s*\))\s*$",
    re.IGNORECASE,
)


@dataclass(frozen=True)
class ColumnType:
    """A type from the supported subset, with its parameters."""

    base: str
    precision: int | None = None  # DECIMAL only
    scale: int | None = None  # DECIMAL only
    length: int | None = None  # VARCHAR only

    def __post_init__(self) -> None:
        if self.base not in SUPPORTED_BASE_TYPES:
            raise SchemaViolationError(f"unsupported data type {self.base!r}")
        if self.base == "DECIMAL":
            if self.precision is None or self.scale is None:
                raise SchemaViolationError("DECIMAL requires precision and scale")
            if self.scale < 0 or self.precision <= 0 or self.scale > self.precision:
                raise SchemaViolationError(
                    f"invalid DECIMAL({self.precision},{self.scale})"
                )
        if self.base == "VARCHAR" and (self.length is None or self.length <= 0):
            raise SchemaViolationError("VARCHAR requires a positive length")

    @property
    def is_numeric(self) -> bool:
        return self.base in NUMERIC_BASE_TYPES

    def render(self) -> str:
        if self.base == "DECIMAL":
            return f"DECIMAL({self.precision},{self.scale})"
        if self.base == "VARCHAR":
            return f"VARCHAR({self.length})"
        return self.base

    @classmethod
    def parse(cls, text: str) -> "ColumnType":
        """Parse a rendered type string, e.g. ``DECIMAL(10,2)``."""
        m = _TYPE_TEXT.match(text)
        if not m:
            raise SchemaViolationError(f"unsupported data type {text.strip()!r}")
        spec = m.group(1).upper()
        if spec.startswith("DECIMAL"):
            return cls("DECIMAL", precision=int(m.group(2)), scale=int(m.group(3)))
        if spec.startswith("VARCHAR"):
            return cls("VARCHAR", length=int(m.group(4)))
        return cls(spec)


def integer_type() -> ColumnType:
    return ColumnType("INTEGER")


@dataclass(frozen=True)
class ColumnDef:
    name: str
    data_type: ColumnType
    nullable: bool = True


@dataclass(frozen=True)
class FkDef:
    columns: tuple[str, ...]
    ref_table: str
    ref_columns: tuple[str, ...]


@dataclass(frozen=True)
class TableDef:
    name: str
    columns: tuple[ColumnDef, ...]
    primary_key: tuple[str, ...]
    foreign_keys: tuple[FkDef, ...] = ()

    def column(self, name: str) -> ColumnDef | None:
        for col in self.columns:
            if col.name == name:
                return col
        return None

    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def constraint_class(self, column_name: str) -> str:
        """Classify a column as primary, foreign, unique, or none.

        Derived from the table-level declarations so it can never drift from
        them; ``primary`` wins when a column sits in both the PK and an FK
        (the usual shape of fact tables). ``unique`` is reserved for future
        backends -- the file formats cannot declare it.
        """
        if column_name in self.primary_key:
            return "primary"
        for fk in self.foreign_keys:
            if column_name in fk.columns:
                return "foreign"
        return "none"


@dataclass(frozen=True)
class RelationalCatalog:
    schema_name: str
    tables: tuple[TableDef, ...]

    def table(self, name: str) -> TableDef | None:
        for t in self.tables:
            if t.name == name:
                return t
        return None

    def table_names(self) -> list[str]:
        return [t.name for t in self.tables]


@dataclass(frozen=True)
class SourceDescriptor:
    """Connection descriptor for an operational source.

    Network fields are accepted and stored so a live-DB backend can be added
    later without a format change; only the file backend is implemented, so
    ``catalog_path`` must be set. The password itself is never stored --
    ``secret_ref`` names an environment variable that would hold it.
    """

    schema_name: str
    catalog_path: str
    data_dir: str | None = None
    host: str | None = None
    port: int | None = None
    user: str | None = None
    secret_ref: str | None = None

    def __post_init__(self) -> None:
        if not self.catalog_path:
            raise SchemaViolationError("source descriptor needs a catalog_path (file backend)")
        if self.port is not None and not (1 <= self.port <= 65535):
            raise SchemaViolationError(f"port {self.port} outside 1-65535")


@dataclass(frozen=True)
class Finding:
    severity: str  # "error" | "warning"
    table: str
    message: str


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "error"]

    @property
    def warnings(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors


def validate_catalog(catalog: RelationalCatalog) -> ValidationReport:
    """Check the necessary, metadata-checkable source conditions.

    Full 3NF verification is not possible from table metadata alone; this
    checks what can be checked (keys, references, type agreement) and flags
    the suspicious-but-legal cases as warnings.
    """
    report = ValidationReport()
    seen: dict[str, str] = {}
    for table in catalog.tables:
        folded = table.name.casefold()
        if folded in seen:
            report.findings.append(
                Finding("error", table.name, f"duplicate table name (clashes with {seen[folded]})")
            )
        seen[folded] = table.name

    for table in catalog.tables:
        names = table.column_names()
        for name in names:
            if names.count(name) > 1:
                report.findings.append(
                    Finding("error", table.name, f"duplicate column name {name}")
                )
        if not table.primary_key:
            report.findings.append(Finding("error", table.name, "missing primary key"))
        for pk_col in table.primary_key:
            col = table.column(pk_col)
            if col is None:
                report.findings.append(
                    Finding("error", table.name, f"primary key column {pk_col} does not exist")
                )
            elif col.nullable:
                report.findings.append(
                    Finding("error", table.name, f"primary key column {pk_col} is nullable")
                )
        for fk in table.foreign_keys:
            _validate_fk(catalog, table, fk, report)

    _flag_isolated_tables(catalog, report)
    return report


def _validate_fk(
    catalog: RelationalCatalog, table: TableDef, fk: FkDef, report: ValidationReport
) -> None:
    for local in fk.columns:
        col = table.column(local)
        if col is None:
            report.findings.append(
                Finding("error", table.name, f"foreign key column {local} does not exist")
            )
            return
        if col.nullable:
            report.findings.append(
                Finding("warning", table.name, f"foreign key column {local} is nullable")
            )
    target = catalog.table(fk.ref_table)
    if target is None:
        report.findings.append(
            Finding("error", table.name, f"foreign key references missing table {fk.ref_table}")
        )
        return
    if len(fk.columns) != len(fk.ref_columns):
        report.findings.append(
            Finding("error", table.name, f"foreign key to {fk.ref_table} has mismatched arity")
        )
        return
    if tuple(fk.ref_columns) != tuple(target.primary_key):
        report.findings.append(
            Finding(
                "error",
                table.name,
                f"foreign key to {fk.ref_table} must reference its primary key "
                f"({', '.join(target.primary_key) or 'none declared'})",
            )
        )
        return
    for local, remote in zip(fk.columns, fk.ref_columns):
        local_col = table.column(local)
        remote_col = target.column(remote)
        if local_col is None or remote_col is None:
            continue
        if local_col.data_type != remote_col.data_type:
            report.findings.append(
                Finding(
                    "error",
                    table.name,
                    f"type mismatch on foreign key {local} "
                    f"({local_col.data_type.render()}) -> {fk.ref_table}.{remote} "
                    f"({remote_col.data_type.render()})",
                )
            )


def _flag_isolated_tables(catalog: RelationalCatalog, report: ValidationReport) -> None:
    if len(catalog.tables) < 2:
        return
    connected: set[str] = set()
    for table in catalog.tables:
        for fk in table.foreign_keys:
            if catalog.table(fk.ref_table) is not None:
                connected.add(table.name)
                connected.add(fk.ref_table)
    for table in catalog.tables:
        if table.name not in connected:
            report.findings.append(
                Finding("warning", table.name, "table unreachable from any other table")
            )


def ensure_valid(catalog: RelationalCatalog) -> RelationalCatalog:
    """Raise SchemaViolationError if validation finds any error."""
    report = validate_catalog(catalog)
    if not report.ok:
        first = report.errors[0]
        raise SchemaViolationError(f"{first.table}: {first.message}")
    return catalog


# ---------------------------------------------------------------------------
# JSON catalog documents (the data-dictionary import route)


def load_catalog(document: str | dict) -> RelationalCatalog:
    """Build a catalog from a JSON catalog document (text or parsed object)."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaViolationError(f"catalog document is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise SchemaViolationError("catalog document must be a JSON object")

    _reject_extras(document, {"schema", "tables"}, "catalog")
    schema = _require(document, "schema", str, "catalog")
    tables_doc = _require(document, "tables", list, "catalog")

    tables = []
    for i, tdoc in enumerate(tables_doc):
        where = f"tables[{i}]"
        if not isinstance(tdoc, dict):
            raise SchemaViolationError(f"{where} must be an object")
        _reject_extras(tdoc, {"name", "columns", "primary_key", "foreign_keys"}, where)
        name = _require(tdoc, "name", str, where)
        columns_doc = _require(tdoc, "columns", list, where)
        pk = _require(tdoc, "primary_key", list, where)
        fks_doc = tdoc.get("foreign_keys", [])
        if not isinstance(fks_doc, list):
            raise SchemaViolationError(f"{where}.foreign_keys must be a list")

        columns = []
        for j, cdoc in enumerate(columns_doc):
            cwhere = f"{where}.columns[{j}]"
            if not isinstance(cdoc, dict):
                raise SchemaViolationError(f"{cwhere} must be an object")
            _reject_extras(cdoc, {"name", "type", "nullable"}, cwhere)
            cname = _require(cdoc, "name", str, cwhere)
            ctype = ColumnType.parse(_require(cdoc, "type", str, cwhere))
            nullable = cdoc.get("nullable", True)
            if not isinstance(nullable, bool):
                raise SchemaViolationError(f"{cwhere}.nullable must be a boolean")
            if cname in pk:
                nullable = False
            columns.append(ColumnDef(cname, ctype, nullable))

        fks = []
        for j, fdoc in enumerate(fks_doc):
            fwhere = f"{where}.foreign_keys[{j}]"
            if not isinstance(fdoc, dict):
                raise SchemaViolationError(f"{fwhere} must be an object")
            _reject_extras(fdoc, {"columns", "ref_table", "ref_columns"}, fwhere)
            fks.append(
                FkDef(
                    columns=tuple(_require(fdoc, "columns", list, fwhere)),
                    ref_table=_require(fdoc, "ref_table", str, fwhere),
                    ref_columns=tuple(_require(fdoc, "ref_columns", list, fwhere)),
                )
            )
        tables.append(
            TableDef(name=name, columns=tuple(columns), primary_key=tuple(pk), foreign_keys=tuple(fks))
        )

    return ensure_valid(RelationalCatalog(schema_name=schema, tables=tuple(tables)))


def dump_catalog(catalog: RelationalCatalog) -> dict:
    """Inverse of load_catalog (modulo key ordering)."""
    return {
        "schema": catalog.schema_name,
        "tables": [
            {
                "name": t.name,
                "columns": [
                    {"name": c.name, "type": c.data_type.render(), "nullable": c.nullable}
                    for c in t.columns
                ],
                "primary_key": list(t.primary_key),
                "foreign_keys": [
                    {
                        "columns": list(fk.columns),
                        "ref_table": fk.ref_table,
                        "ref_columns": list(fk.ref_columns),
                    }
                    for fk in t.foreign_keys
                ],
            }
            for t in catalog.tables
        ],
    }


def _require(doc: dict, key: str, expected: type, where: str):
    if key not in doc:
        raise SchemaViolationError(f"{where} is missing required field {key!r}")
    value = doc[key]
    if not isinstance(value, expected):
        raise SchemaViolationError(f"{where}.{key} must be of type {expected.__name__}")
    return value


def _reject_extras(doc: dict, allowed: set[str], where: str) -> None:
    extras = sorted(set(doc) - allowed)
    if extras:
        raise SchemaViolationError(f"{where} has unknown field(s): {', '.join(extras)}")


# ---------------------------------------------------------------------------
# Canonical DDL emission


def render_identifier(name: str) -> str:
    if _BARE_IDENT.match(name):
        return name
    return '"' + name.replace('"', '""') + '"'


def emit_catalog_ddl(catalog: RelationalCatalog) -> str:
    """Render the catalog back into the DDL subset, canonically formatted.

    Re-parsing the result yields a structurally equal catalog (the round-trip
    property the tests pin down).
    """
    statements = []
    for table in catalog.tables:
        lines = []
        for col in table.columns:
            suffix = "" if col.nullable else " NOT NULL"
            lines.append(f"  {render_identifier(col.name)} {col.data_type.render()}{suffix}")
        if table.primary_key:
            cols = ", ".join(render_identifier(c) for c in table.primary_key)
            lines.append(f"  PRIMARY KEY ({cols})")
        for fk in table.foreign_keys:
            local = ", ".join(render_identifier(c) for c in fk.columns)
            remote = ", ".join(render_identifier(c) for c in fk.ref_columns)
            lines.append(
                f"  FOREIGN KEY ({local}) REFERENCES {render_identifier(fk.ref_table)} ({remote})"
            )
        body = ",\n".join(lines)
        statements.append(f"CREATE TABLE {render_identifier(table.name)} (\n{body}\n);")
    return "\n\n".join(statements) + "\n"


def catalogs_equal(a: RelationalCatalog, b: RelationalCatalog, ordered: bool = False) -> bool:
    """Structural equality of the tables; order-normalized unless ``ordered``.

    The schema name is a label, not structure (DDL cannot even express it),
    so it does not participate.
    """

    def norm(cat: RelationalCatalog):
        tables = []
        for t in cat.tables:
            fks = [(fk.columns, fk.ref_table, fk.ref_columns) for fk in t.foreign_keys]
            entry = (
                t.name,
                tuple((c.name, c.data_type, c.nullable) for c in t.columns),
                t.primary_key,
                tuple(fks) if ordered else tuple(sorted(fks)),
            )
            tables.append(entry)
        if not ordered:
            tables.sort()
        return tuple(tables)

    return norm(a) == norm(b)


def tables_in_source_order(catalog: RelationalCatalog) -> Iterable[TableDef]:
    return catalog.tables
