"""Star-schema design: from measures and grain to a full dimensional model.

The designer walks the catalog top-down: resolve measures against one source
table, resolve every grain attribute to a foreign-key path from that table,
then grow one denormalized dimension per grain attribute. A dimension's
hierarchy starts at the grain attribute and climbs towards coarser labels --
first through the remaining text columns of the grain table, then through
the chain of parent tables -- while DATE grain attributes become the
calendar hierarchy day -> month -> quarter -> year.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .catalog import ColumnType, RelationalCatalog, render_identifier
from .errors import (
    DesignError,
    MixedSourceTablesError,
    NotNumericError,
    UnknownColumnError,
    UnsupportedFeatureError,
)
from .graph import FkEdge, FkPath, SchemaGraph, find_paths

AGGREGATIONS = ("SUM", "COUNT", "MIN", "MAX", "AVG")

CALENDAR_LEVELS = ("day", "month", "quarter", "year")
_CALENDAR_TYPES = {
    "day": ColumnType("VARCHAR", length=10),
    "month": ColumnType("VARCHAR", length=7),
    "quarter": ColumnType("VARCHAR", length=7),
    "year": ColumnType("VARCHAR", length=4),
}

SURROGATE_KEY_TYPE = ColumnType("BIGINT")


@dataclass(frozen=True)
class MeasureRequest:
    table: str
    column: str
    aggregations: tuple[str, ...]
    output_name: str | None = None


@dataclass(frozen=True)
class MeasureSpec:
    table: str
    column: str
    aggregations: tuple[str, ...]
    output_name: str
    column_type: ColumnType


@dataclass(frozen=True)
class GrainAttribute:
    table: str
    column: str
    path_index: int = 0


@dataclass(frozen=True)
class GrainSpec:
    attributes: tuple[GrainAttribute, ...]


@dataclass(frozen=True)
class HierarchyLevel:
    """One level of a dimension hierarchy, lowest (grain) first.

    ``derived`` marks calendar levels computed from the grain DATE value
    instead of read from a source column.
    """

    name: str
    data_type: ColumnType
    table: str | None = None
    column: str | None = None
    derived: str | None = None


@dataclass(frozen=True)
class HierarchySpec:
    levels: tuple[HierarchyLevel, ...]

    def level_names(self) -> list[str]:
        return [level.name for level in self.levels]


@dataclass(frozen=True)
class AttributeSpec:
    table: str
    column: str
    output_name: str
    data_type: ColumnType


@dataclass(frozen=True)
class DimensionSpec:
    name: str
    surrogate_key_name: str
    natural_key: tuple[str, str]
    natural_key_type: ColumnType
    hierarchy: HierarchySpec
    descriptive_attributes: tuple[AttributeSpec, ...]
    fact_path: FkPath  # fact source -> grain table (the measure-to-grain path)
    extension_edges: tuple[FkEdge, ...]  # grain table -> coarser hierarchy tables

    @property
    def grain_table(self) -> str:
        return self.fact_path.end

    @property
    def source_path(self) -> FkPath:
        return FkPath(start=self.fact_path.start, edges=self.fact_path.edges + self.extension_edges)

    @property
    def is_calendar(self) -> bool:
        return all(level.derived for level in self.hierarchy.levels)


@dataclass(frozen=True)
class ResolvedMeasure:
    """A measure column of the fact table.

    AVG is stored as a (sum, count) column pair so every stored aggregate
    stays distributive; ``storage`` lists the backing fact columns in order.
    """

    name: str
    agg: str
    source_table: str
    source_column: str
    value_scale: int
    storage: tuple[str, ...]
    storage_types: tuple[ColumnType, ...]


@dataclass(frozen=True)
class FactTableSpec:
    name: str
    grain: GrainSpec
    foreign_keys: tuple[tuple[str, str], ...]  # (dimension name, surrogate key column)
    measures: tuple[ResolvedMeasure, ...]


@dataclass(frozen=True)
class StarSchema:
    fact: FactTableSpec
    dimensions: tuple[DimensionSpec, ...]

    @property
    def fact_source_table(self) -> str:
        return self.fact.measures[0].source_table

    def dimension(self, name: str) -> DimensionSpec | None:
        for dim in self.dimensions:
            if dim.name == name:
                return dim
        return None


@dataclass(frozen=True)
class DesignDocument:
    measures: tuple[MeasureRequest, ...]
    grain: tuple[GrainAttribute, ...]
    fact_name: str | None = None
    hierarchy_overrides: dict[str, tuple[tuple[str, str], ...]] | None = None


# ---------------------------------------------------------------------------
# Measure selection


def select_measures(
    catalog: RelationalCatalog, requests: list[MeasureRequest]
) -> list[MeasureSpec]:
    if not requests:
        raise DesignError("a design needs at least one measure")
    specs: list[MeasureSpec] = []
    seen_names: set[str] = set()
    source_tables: set[str] = set()
    for request in requests:
        table = catalog.table(request.table)
        if table is None:
            raise UnknownColumnError(f"unknown table {request.table}")
        column = table.column(request.column)
        if column is None:
            raise UnknownColumnError(f"unknown column {request.table}.{request.column}")
        aggs = _canonical_aggs(request.aggregations, request.table, request.column)
        for agg in aggs:
            if agg != "COUNT" and not column.data_type.is_numeric:
                raise NotNumericError(
                    f"{agg} requires a numeric column; "
                    f"{request.table}.{request.column} is {column.data_type.render()}"
                )
        output_name = request.output_name or request.column
        if output_name in seen_names:
            raise DesignError(f"duplicate measure output name {output_name}")
        seen_names.add(output_name)
        source_tables.add(request.table)
        specs.append(
            MeasureSpec(
                table=request.table,
                column=request.column,
                aggregations=aggs,
                output_name=output_name,
                column_type=column.data_type,
            )
        )
    if len(source_tables) > 1:
        raise MixedSourceTablesError(
            "measures must come from a single table; got " + ", ".join(sorted(source_tables))
        )
    return specs


def _canonical_aggs(aggs, table: str, column: str) -> tuple[str, ...]:
    if not aggs:
        raise DesignError(f"measure {table}.{column} lists no aggregation")
    upper = []
    for agg in aggs:
        name = str(agg).upper()
        if name not in AGGREGATIONS:
            raise DesignError(f"unknown aggregation {agg!r} on {table}.{column}")
        if name not in upper:
            upper.append(name)
    return tuple(sorted(upper, key=AGGREGATIONS.index))


# ---------------------------------------------------------------------------
# Dimension derivation


def dimension_name_for(grain_table: str, grain_column: str) -> str:
    """Deterministic analyst-friendly default name for a dimension.

    Strips a ``_name`` suffix and a leading singular-table prefix, so
    ``products.product_name`` becomes ``product`` and ``sales.sale_date``
    becomes ``date``.
    """
    name = grain_column
    if name.endswith("_name") and len(name) > len("_name"):
        name = name[: -len("_name")]
    singular = grain_table[:-1] if grain_table.endswith("s") else grain_table
    prefix = singular + "_"
    if name.startswith(prefix) and len(name) > len(prefix):
        name = name[len(prefix):]
    return name or grain_table


def derive_dimension(
    graph: SchemaGraph,
    catalog: RelationalCatalog,
    grain_attr: GrainAttribute,
    path: FkPath,
) -> DimensionSpec:
    """Grow one denormalized dimension for a grain attribute.

    ``path`` is the chosen measure-to-grain path (possibly empty when the
    grain attribute lives on the fact-source table itself).
    """
    for edge in path.edges:
        if len(edge.columns) > 1:
            raise UnsupportedFeatureError(
                f"composite foreign key on {edge.render()} cannot carry a grain path"
            )
    grain_table = catalog.table(path.end)
    if grain_table is None:
        raise UnknownColumnError(f"unknown table {path.end}")
    grain_column = grain_table.column(grain_attr.column)
    if grain_column is None:
        raise UnknownColumnError(f"unknown column {path.end}.{grain_attr.column}")

    name = dimension_name_for(grain_table.name, grain_attr.column)

    if grain_column.data_type.base == "DATE":
        levels = tuple(
            HierarchyLevel(name=level, data_type=_CALENDAR_TYPES[level], derived=level)
            for level in CALENDAR_LEVELS
        )
        return DimensionSpec(
            name=name,
            surrogate_key_name=f"{name}_key",
            natural_key=(grain_table.name, grain_attr.column),
            natural_key_type=grain_column.data_type,
            hierarchy=HierarchySpec(levels=levels),
            descriptive_attributes=(),
            fact_path=path,
            extension_edges=(),
        )

    key_columns = _key_columns(grain_table)
    levels: list[HierarchyLevel] = [
        HierarchyLevel(
            name=grain_attr.column,
            data_type=grain_column.data_type,
            table=grain_table.name,
            column=grain_attr.column,
        )
    ]
    past_grain = False
    for col in grain_table.columns:
        if col.name == grain_attr.column:
            past_grain = True
            continue
        if past_grain and col.name not in key_columns and col.data_type.base == "VARCHAR":
            levels.append(
                HierarchyLevel(
                    name=col.name,
                    data_type=col.data_type,
                    table=grain_table.name,
                    column=col.name,
                )
            )

    extension = _extension_chain(graph, path)
    for edge in extension:
        parent = catalog.table(edge.parent)
        label = _level_column(parent)
        if label is None:
            continue
        levels.append(
            HierarchyLevel(
                name=_unique_name(label.name, [l.name for l in levels], parent.name),
                data_type=label.data_type,
                table=parent.name,
                column=label.name,
            )
        )

    level_sources = {(l.table, l.column) for l in levels}
    attributes: list[AttributeSpec] = []
    taken = [l.name for l in levels]
    for table_name in [grain_table.name] + [e.parent for e in extension]:
        table = catalog.table(table_name)
        keys = _key_columns(table)
        for col in table.columns:
            if col.name in keys or (table_name, col.name) in level_sources:
                continue
            output = _unique_name(col.name, taken + [a.output_name for a in attributes], table_name)
            attributes.append(
                AttributeSpec(
                    table=table_name,
                    column=col.name,
                    output_name=output,
                    data_type=col.data_type,
                )
            )

    return DimensionSpec(
        name=name,
        surrogate_key_name=f"{name}_key",
        natural_key=(grain_table.name, grain_attr.column),
        natural_key_type=grain_column.data_type,
        hierarchy=HierarchySpec(levels=tuple(levels)),
        descriptive_attributes=tuple(attributes),
        fact_path=path,
        extension_edges=extension,
    )


def _key_columns(table) -> set[str]:
    keys = set(table.primary_key)
    for fk in table.foreign_keys:
        keys.update(fk.columns)
    return keys


def _level_column(table):
    """The labeling attribute of a parent table: first non-key VARCHAR column."""
    keys = _key_columns(table)
    for col in table.columns:
        if col.name not in keys and col.data_type.base == "VARCHAR":
            return col
    return None


def _extension_chain(graph: SchemaGraph, path: FkPath) -> tuple[FkEdge, ...]:
    """Follow single-column foreign keys upward from the grain table.

    At each hop the first declared eligible foreign key wins; the walk stops
    before revisiting any table already on the path (the simple-path rule).
    """
    visited = set(path.tables)
    chain: list[FkEdge] = []
    current = path.end
    while True:
        step = None
        for edge in graph.outgoing(current):
            if len(edge.columns) == 1 and edge.parent not in visited:
                step = edge
                break
        if step is None:
            return tuple(chain)
        chain.append(step)
        visited.add(step.parent)
        current = step.parent


def _unique_name(base: str, taken: list[str], table_name: str) -> str:
    if base not in taken:
        return base
    prefixed = f"{table_name}_{base}"
    candidate = prefixed
    i = 2
    while candidate in taken:
        candidate = f"{prefixed}_{i}"
        i += 1
    return candidate


# ---------------------------------------------------------------------------
# Star assembly


def build_star_schema(
    measures: list[MeasureSpec],
    grain: GrainSpec,
    graph: SchemaGraph,
    catalog: RelationalCatalog,
    fact_name: str | None = None,
    hierarchy_overrides: dict[str, tuple[tuple[str, str], ...]] | None = None,
) -> StarSchema:
    if not grain.attributes:
        raise DesignError("grain must list at least one attribute")
    if not measures:
        raise DesignError("a star schema needs at least one measure")
    source_tables = {m.table for m in measures}
    if len(source_tables) > 1:
        raise MixedSourceTablesError(
            "measures must come from a single table; got " + ", ".join(sorted(source_tables))
        )
    fact_source = measures[0].table

    seen_triples: set[tuple[str, str, int]] = set()
    dimensions: list[DimensionSpec] = []
    for attr in grain.attributes:
        triple = (attr.table, attr.column, attr.path_index)
        if triple in seen_triples:
            raise DesignError(
                f"duplicate grain attribute {attr.table}.{attr.column} (path {attr.path_index})"
            )
        seen_triples.add(triple)
        paths = find_paths(graph, fact_source, (attr.table, attr.column))
        if not (0 <= attr.path_index < len(paths)):
            listing = "; ".join(f"[{i}] {p.render()}" for i, p in enumerate(paths))
            raise DesignError(
                f"path index {attr.path_index} out of range for "
                f"{attr.table}.{attr.column}; available paths: {listing}"
            )
        dimensions.append(derive_dimension(graph, catalog, attr, paths[attr.path_index]))

    dimensions = _disambiguate_names(dimensions)
    if hierarchy_overrides:
        dimensions = [_apply_override(d, hierarchy_overrides, catalog) for d in dimensions]

    resolved = _resolve_measures(measures)
    name = fact_name or f"{fact_source}_fact"
    dim_names = {d.name for d in dimensions}
    if name in dim_names:
        raise DesignError(f"fact table name {name} collides with a dimension name")

    fact = FactTableSpec(
        name=name,
        grain=grain,
        foreign_keys=tuple((d.name, d.surrogate_key_name) for d in dimensions),
        measures=tuple(resolved),
    )
    return StarSchema(fact=fact, dimensions=tuple(dimensions))


def _disambiguate_names(dimensions: list[DimensionSpec]) -> list[DimensionSpec]:
    counts: dict[str, int] = {}
    for dim in dimensions:
        counts[dim.name] = counts.get(dim.name, 0) + 1
    out = []
    for i, dim in enumerate(dimensions):
        if counts[dim.name] > 1:
            label = dim.source_path.role_label or str(i)
            new_name = f"{dim.name}_{label}"
            dim = replace(dim, name=new_name, surrogate_key_name=f"{new_name}_key")
        out.append(dim)
    names = [d.name for d in out]
    for name in names:
        if names.count(name) > 1:
            raise DesignError(f"dimension name {name} is ambiguous even after role labeling")
    return out


def _apply_override(
    dim: DimensionSpec,
    overrides: dict[str, tuple[tuple[str, str], ...]],
    catalog: RelationalCatalog,
) -> DimensionSpec:
    if dim.name not in overrides:
        return dim
    if dim.is_calendar:
        raise DesignError(f"hierarchy of calendar dimension {dim.name} cannot be overridden")
    allowed = set(dim.source_path.tables)
    allowed.add(dim.grain_table)
    levels = [dim.hierarchy.levels[0]]
    for table_name, column_name in overrides[dim.name]:
        if table_name not in allowed:
            raise DesignError(
                f"hierarchy override for {dim.name} names table {table_name}, "
                f"which is not on its source path"
            )
        column = catalog.table(table_name).column(column_name)
        if column is None:
            raise UnknownColumnError(f"unknown column {table_name}.{column_name}")
        levels.append(
            HierarchyLevel(
                name=_unique_name(column_name, [l.name for l in levels], table_name),
                data_type=column.data_type,
                table=table_name,
                column=column_name,
            )
        )
    return replace(dim, hierarchy=HierarchySpec(levels=tuple(levels)))


def _resolve_measures(measures: list[MeasureSpec]) -> list[ResolvedMeasure]:
    resolved: list[ResolvedMeasure] = []
    for spec in measures:
        scale = spec.column_type.scale or 0
        if spec.column_type.base == "DECIMAL":
            value_type = ColumnType("DECIMAL", precision=18, scale=scale)
        else:
            value_type = ColumnType("BIGINT")
        count_type = ColumnType("BIGINT")
        for agg in spec.aggregations:
            name = f"{spec.output_name}_{agg.lower()}"
            if agg == "COUNT":
                resolved.append(
                    ResolvedMeasure(
                        name=name,
                        agg=agg,
                        source_table=spec.table,
                        source_column=spec.column,
                        value_scale=0,
                        storage=(name,),
                        storage_types=(count_type,),
                    )
                )
            elif agg == "AVG":
                resolved.append(
                    ResolvedMeasure(
                        name=name,
                        agg=agg,
                        source_table=spec.table,
                        source_column=spec.column,
                        value_scale=scale,
                        storage=(f"{name}_sum", f"{name}_count"),
                        storage_types=(value_type, count_type),
                    )
                )
            else:
                resolved.append(
                    ResolvedMeasure(
                        name=name,
                        agg=agg,
                        source_table=spec.table,
                        source_column=spec.column,
                        value_scale=scale,
                        storage=(name,),
                        storage_types=(value_type,),
                    )
                )
    names = [m.name for m in resolved]
    for name in names:
        if names.count(name) > 1:
            raise DesignError(f"duplicate resolved measure name {name}")
    return resolved


# ---------------------------------------------------------------------------
# Star DDL emission


def emit_star_ddl(star: StarSchema) -> str:
    """Render the star as CREATE TABLE statements in the same DDL subset.

    Dimensions come first so the fact table's foreign keys resolve on a
    sequential read; every foreign key runs fact -> dimension, which is the
    star-shape property the tests re-parse and check.
    """
    statements = []
    for dim in star.dimensions:
        lines = [f"  {render_identifier(dim.surrogate_key_name)} {SURROGATE_KEY_TYPE.render()} NOT NULL"]
        for level in dim.hierarchy.levels:
            lines.append(f"  {render_identifier(level.name)} {level.data_type.render()}")
        for attr in dim.descriptive_attributes:
            lines.append(f"  {render_identifier(attr.output_name)} {attr.data_type.render()}")
        lines.append(f"  PRIMARY KEY ({render_identifier(dim.surrogate_key_name)})")
        statements.append(
            f"CREATE TABLE {render_identifier(dim.name)} (\n" + ",\n".join(lines) + "\n);"
        )

    lines = []
    for _, sk_name in star.fact.foreign_keys:
        lines.append(f"  {render_identifier(sk_name)} {SURROGATE_KEY_TYPE.render()} NOT NULL")
    for measure in star.fact.measures:
        for col_name, col_type in zip(measure.storage, measure.storage_types):
            lines.append(f"  {render_identifier(col_name)} {col_type.render()}")
    pk = ", ".join(render_identifier(sk) for _, sk in star.fact.foreign_keys)
    lines.append(f"  PRIMARY KEY ({pk})")
    for dim_name, sk_name in star.fact.foreign_keys:
        lines.append(
            f"  FOREIGN KEY ({render_identifier(sk_name)}) "
            f"REFERENCES {render_identifier(dim_name)} ({render_identifier(sk_name)})"
        )
    statements.append(
        f"CREATE TABLE {render_identifier(star.fact.name)} (\n" + ",\n".join(lines) + "\n);"
    )
    return "\n\n".join(statements) + "\n"


# ---------------------------------------------------------------------------
# Design documents and star serialization


def load_design(document: dict) -> DesignDocument:
    if not isinstance(document, dict):
        raise DesignError("design document must be a JSON object")
    unknown = sorted(set(document) - {"fact_name", "measures", "grain", "hierarchy_overrides"})
    if unknown:
        raise DesignError(f"design document has unknown field(s): {', '.join(unknown)}")
    measures_doc = document.get("measures")
    grain_doc = document.get("grain")
    if not isinstance(measures_doc, list) or not measures_doc:
        raise DesignError("design document needs a non-empty measures list")
    if not isinstance(grain_doc, list) or not grain_doc:
        raise DesignError("design document needs a non-empty grain list")

    measures = []
    for m in measures_doc:
        if not isinstance(m, dict) or not {"table", "column", "aggs"} <= set(m):
            raise DesignError("each measure needs table, column, and aggs")
        measures.append(
            MeasureRequest(
                table=m["table"],
                column=m["column"],
                aggregations=tuple(m["aggs"]),
                output_name=m.get("as"),
            )
        )
    grain = []
    for g in grain_doc:
        if not isinstance(g, dict) or not {"table", "column"} <= set(g):
            raise DesignError("each grain attribute needs table and column")
        index = g.get("path", 0)
        if not isinstance(index, int) or index < 0:
            raise DesignError(f"grain path index must be a non-negative integer, got {index!r}")
        grain.append(GrainAttribute(table=g["table"], column=g["column"], path_index=index))

    overrides = None
    if "hierarchy_overrides" in document:
        raw = document["hierarchy_overrides"]
        if not isinstance(raw, dict):
            raise DesignError("hierarchy_overrides must be an object")
        overrides = {}
        for dim_name, level_list in raw.items():
            if not isinstance(level_list, list):
                raise DesignError(f"hierarchy_overrides[{dim_name}] must be a list")
            entries = []
            for entry in level_list:
                if not isinstance(entry, dict) or not {"table", "column"} <= set(entry):
                    raise DesignError("each hierarchy override level needs table and column")
                entries.append((entry["table"], entry["column"]))
            overrides[dim_name] = tuple(entries)

    fact_name = document.get("fact_name")
    if fact_name is not None and not isinstance(fact_name, str):
        raise DesignError("fact_name must be a string")
    return DesignDocument(
        measures=tuple(measures),
        grain=tuple(grain),
        fact_name=fact_name,
        hierarchy_overrides=overrides,
    )


def plan_star(catalog: RelationalCatalog, design: DesignDocument, graph: SchemaGraph) -> StarSchema:
    measures = select_measures(catalog, list(design.measures))
    grain = GrainSpec(attributes=design.grain)
    return build_star_schema(
        measures,
        grain,
        graph,
        catalog,
        fact_name=design.fact_name,
        hierarchy_overrides=design.hierarchy_overrides,
    )


def star_to_dict(star: StarSchema) -> dict:
    def edge_dict(edge: FkEdge) -> dict:
        return {
            "child": edge.child,
            "parent": edge.parent,
            "columns": list(edge.columns),
            "ref_columns": list(edge.ref_columns),
        }

    return {
        "fact": {
            "name": star.fact.name,
            "grain": [
                {"table": a.table, "column": a.column, "path": a.path_index}
                for a in star.fact.grain.attributes
            ],
            "foreign_keys": [list(fk) for fk in star.fact.foreign_keys],
            "measures": [
                {
                    "name": m.name,
                    "agg": m.agg,
                    "source_table": m.source_table,
                    "source_column": m.source_column,
                    "value_scale": m.value_scale,
                    "storage": list(m.storage),
                    "storage_types": [t.render() for t in m.storage_types],
                }
                for m in star.fact.measures
            ],
        },
        "dimensions": [
            {
                "name": d.name,
                "surrogate_key_name": d.surrogate_key_name,
                "natural_key": list(d.natural_key),
                "natural_key_type": d.natural_key_type.render(),
                "levels": [
                    {
                        "name": l.name,
                        "type": l.data_type.render(),
                        "table": l.table,
                        "column": l.column,
                        "derived": l.derived,
                    }
                    for l in d.hierarchy.levels
                ],
                "attributes": [
                    {
                        "table": a.table,
                        "column": a.column,
                        "output_name": a.output_name,
                        "type": a.data_type.render(),
                    }
                    for a in d.descriptive_attributes
                ],
                "fact_path": {
                    "start": d.fact_path.start,
                    "edges": [edge_dict(e) for e in d.fact_path.edges],
                },
                "extension_edges": [edge_dict(e) for e in d.extension_edges],
            }
            for d in star.dimensions
        ],
    }


def star_from_dict(doc: dict) -> StarSchema:
    def edge_from(e: dict) -> FkEdge:
        return FkEdge(
            child=e["child"],
            parent=e["parent"],
            columns=tuple(e["columns"]),
            ref_columns=tuple(e["ref_columns"]),
        )

    dims = []
    for d in doc["dimensions"]:
        levels = tuple(
            HierarchyLevel(
                name=l["name"],
                data_type=ColumnType.parse(l["type"]),
                table=l["table"],
                column=l["column"],
                derived=l["derived"],
            )
            for l in d["levels"]
        )
        attrs = tuple(
            AttributeSpec(
                table=a["table"],
                column=a["column"],
                output_name=a["output_name"],
                data_type=ColumnType.parse(a["type"]),
            )
            for a in d["attributes"]
        )
        dims.append(
            DimensionSpec(
                name=d["name"],
                surrogate_key_name=d["surrogate_key_name"],
                natural_key=tuple(d["natural_key"]),
                natural_key_type=ColumnType.parse(d["natural_key_type"]),
                hierarchy=HierarchySpec(levels=levels),
                descriptive_attributes=attrs,
                fact_path=FkPath(
                    start=d["fact_path"]["start"],
                    edges=tuple(edge_from(e) for e in d["fact_path"]["edges"]),
                ),
                extension_edges=tuple(edge_from(e) for e in d["extension_edges"]),
            )
        )
    fdoc = doc["fact"]
    fact = FactTableSpec(
        name=fdoc["name"],
        grain=GrainSpec(
            attributes=tuple(
                GrainAttribute(table=g["table"], column=g["column"], path_index=g["path"])
                for g in fdoc["grain"]
            )
        ),
        foreign_keys=tuple((fk[0], fk[1]) for fk in fdoc["foreign_keys"]),
        measures=tuple(
            ResolvedMeasure(
                name=m["name"],
                agg=m["agg"],
                source_table=m["source_table"],
                source_column=m["source_column"],
                value_scale=m["value_scale"],
                storage=tuple(m["storage"]),
                storage_types=tuple(ColumnType.parse(t) for t in m["storage_types"]),
            )
            for m in fdoc["measures"]
        ),
    )
    return StarSchema(fact=fact, dimensions=tuple(dims))
