"""Extract -> transform -> load: source CSVs to dimension/fact rows to a cube.

Surrogate keys are dense integers assigned in first-seen file order, key 0
being the reserved Unknown member that absorbs NULL and unresolvable
references; dropping such rows would silently break the conservation checks
this pipeline is tested against. All measure arithmetic is exact (scaled
integers), and every output is a pure function of the inputs, so rebuilt
star directories are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

from .catalog import RelationalCatalog, TableDef
from .cube import Cube, DimensionIndex
from .design import DimensionSpec, StarSchema, emit_star_ddl, star_from_dict, star_to_dict
from .errors import MissingFileError, ReferentialError, RowValueError
from .values import Value, check_int64, parse_value, render_value

UNKNOWN_KEY = 0
UNKNOWN_LABEL = "Unknown"


@dataclass
class TableData:
    table: TableDef
    rows: list[tuple[Value, ...]]
    _by_pk: dict[tuple, tuple[Value, ...]] = field(default_factory=dict, repr=False)
    _col_index: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self._col_index = {c.name: i for i, c in enumerate(self.table.columns)}
        pk_idx = [self._col_index[c] for c in self.table.primary_key]
        for row in self.rows:
            self._by_pk[tuple(row[i] for i in pk_idx)] = row

    def value(self, row: tuple[Value, ...], column: str) -> Value:
        return row[self._col_index[column]]

    def row_by_pk(self, key: tuple) -> tuple[Value, ...] | None:
        return self._by_pk.get(key)


@dataclass
class SourceData:
    tables: dict[str, TableData]
    notes: list[str] = field(default_factory=list)

    def __getitem__(self, name: str) -> TableData:
        return self.tables[name]


def extract(catalog: RelationalCatalog, data_dir: str | Path) -> SourceData:
    """Load and type-check ``<table>.csv`` for every catalog table.

    Foreign-key values are verified against the referenced primary keys;
    NULLs in foreign-key columns are allowed and noted (they will land on
    the Unknown member downstream).
    """
    data_dir = Path(data_dir)
    tables: dict[str, TableData] = {}
    notes: list[str] = []
    for table in catalog.tables:
        path = data_dir / f"{table.name}.csv"
        if not path.exists():
            raise MissingFileError(f"missing data file {path}")
        tables[table.name] = _read_table(table, path)

    for table in catalog.tables:
        data = tables[table.name]
        for fk in table.foreign_keys:
            target = tables[fk.ref_table]
            null_count = 0
            for row_num, row in enumerate(data.rows, start=1):
                values = tuple(data.value(row, c) for c in fk.columns)
                if any(v is None for v in values):
                    null_count += 1
                    continue
                if target.row_by_pk(values) is None:
                    rendered = ", ".join(str(v) for v in values)
                    raise ReferentialError(
                        f"{table.name}.{'_'.join(fk.columns)} row {row_num}: "
                        f"value ({rendered}) has no matching row in {fk.ref_table}"
                    )
            if null_count:
                notes.append(
                    f"{table.name}.{'_'.join(fk.columns)}: {null_count} NULL "
                    f"reference(s) will map to the Unknown member"
                )
    return SourceData(tables=tables, notes=notes)


def _read_table(table: TableDef, path: Path) -> TableData:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise RowValueError("file has no header row", table.name, 0, "") from None
        expected = table.column_names()
        if header != expected:
            raise RowValueError(
                f"header {header} does not match catalog columns {expected}",
                table.name,
                0,
                "",
            )
        rows: list[tuple[Value, ...]] = []
        seen_pks: set[tuple] = set()
        pk_positions = [expected.index(c) for c in table.primary_key]
        for row_num, record in enumerate(reader, start=1):
            if len(record) != len(expected):
                raise RowValueError(
                    f"expected {len(expected)} field(s), got {len(record)}",
                    table.name,
                    row_num,
                    "",
                )
            values: list[Value] = []
            for col, text in zip(table.columns, record):
                if text == "":
                    if not col.nullable:
                        raise RowValueError(
                            "NULL in non-nullable column", table.name, row_num, col.name
                        )
                    values.append(None)
                    continue
                try:
                    values.append(parse_value(text, col.data_type))
                except ValueError as exc:
                    raise RowValueError(str(exc), table.name, row_num, col.name) from None
            pk = tuple(values[i] for i in pk_positions)
            if pk in seen_pks:
                raise RowValueError(
                    f"duplicate primary key value {pk}",
                    table.name,
                    row_num,
                    ",".join(table.primary_key),
                )
            seen_pks.add(pk)
            rows.append(tuple(values))
    return TableData(table=table, rows=rows)


# ---------------------------------------------------------------------------
# Dimension rows


@dataclass
class DimensionRows:
    """Members of one dimension; index i holds surrogate key i + 1.

    The Unknown member (key 0) is implicit: all-NULL attributes, labeled
    ``Unknown`` at every level when displayed.
    """

    spec: DimensionSpec
    natural_keys: list[Value]
    level_values: list[tuple[str | None, ...]]
    attribute_values: list[tuple[Value, ...]]
    key_by_natural: dict[Value, int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not self.key_by_natural:
            self.key_by_natural = {v: i + 1 for i, v in enumerate(self.natural_keys)}

    @property
    def member_count(self) -> int:
        return len(self.natural_keys)


def calendar_values(value: date) -> tuple[str, str, str, str]:
    quarter = (value.month - 1) // 3 + 1
    return (
        value.isoformat(),
        f"{value.year:04d}-{value.month:02d}",
        f"{value.year:04d}-Q{quarter}",
        f"{value.year:04d}",
    )


def build_dimension_rows(dim: DimensionSpec, data: SourceData) -> DimensionRows:
    """One member per distinct grain value, walking source rows in file order."""
    grain_data = data[dim.grain_table]
    natural_column = dim.natural_key[1]

    natural_keys: list[Value] = []
    level_values: list[tuple[str | None, ...]] = []
    attribute_values: list[tuple[Value, ...]] = []
    seen: set[Value] = set()

    for row in grain_data.rows:
        natural = grain_data.value(row, natural_column)
        if natural is None or natural in seen:
            continue
        seen.add(natural)
        natural_keys.append(natural)
        if dim.is_calendar:
            level_values.append(calendar_values(natural))
            attribute_values.append(())
            continue
        row_by_table = _resolve_extension(dim, data, row)
        levels = []
        for level in dim.hierarchy.levels:
            source_row = row_by_table.get(level.table)
            if source_row is None:
                levels.append(None)
                continue
            table_data = data[level.table]
            value = table_data.value(source_row, level.column)
            column_type = table_data.table.column(level.column).data_type
            levels.append(None if value is None else render_value(value, column_type))
        attrs = []
        for attr in dim.descriptive_attributes:
            source_row = row_by_table.get(attr.table)
            attrs.append(None if source_row is None else data[attr.table].value(source_row, attr.column))
        level_values.append(tuple(levels))
        attribute_values.append(tuple(attrs))

    return DimensionRows(
        spec=dim,
        natural_keys=natural_keys,
        level_values=level_values,
        attribute_values=attribute_values,
    )


def _resolve_extension(
    dim: DimensionSpec, data: SourceData, grain_row: tuple[Value, ...]
) -> dict[str, tuple[Value, ...] | None]:
    """Follow the extension chain upward, table name -> joined row (or None)."""
    rows: dict[str, tuple[Value, ...] | None] = {dim.grain_table: grain_row}
    current_table = dim.grain_table
    current_row: tuple[Value, ...] | None = grain_row
    for edge in dim.extension_edges:
        if current_row is None:
            rows[edge.parent] = None
            current_table = edge.parent
            continue
        fk_value = data[current_table].value(current_row, edge.columns[0])
        parent_row = None if fk_value is None else data[edge.parent].row_by_pk((fk_value,))
        rows[edge.parent] = parent_row
        current_table = edge.parent
        current_row = parent_row
    return rows


# ---------------------------------------------------------------------------
# Fact rows


@dataclass
class FactRows:
    """Aggregated cells, one row per occupied grain coordinate.

    ``rows`` holds (coordinates, storage values); storage values follow the
    flattened measure storage column order of the star's fact spec.
    """

    star: StarSchema
    rows: list[tuple[tuple[int, ...], tuple[int | None, ...]]]


def build_fact_rows(star: StarSchema, data: SourceData, dims: dict[str, DimensionRows]) -> FactRows:
    source = data[star.fact_source_table]
    measures = star.fact.measures

    cells: dict[tuple[int, ...], list] = {}
    for row in source.rows:
        coord = tuple(
            _resolve_surrogate(dims[dim.name], data, row) for dim in star.dimensions
        )
        acc = cells.get(coord)
        if acc is None:
            acc = [_fresh_accumulator(m.agg) for m in measures]
            cells[coord] = acc
        for slot, measure in zip(acc, measures):
            value = source.value(row, measure.source_column)
            _accumulate(slot, measure.agg, value, measure.name)

    rows = []
    for coord in sorted(cells):
        storage: list[int | None] = []
        for slot, measure in zip(cells[coord], measures):
            storage.extend(_storage_values(slot, measure.agg))
        rows.append((coord, tuple(storage)))
    return FactRows(star=star, rows=rows)


def _resolve_surrogate(dim_rows: DimensionRows, data: SourceData, source_row) -> int:
    """Walk the measure-to-grain path from one source row to a surrogate key."""
    dim = dim_rows.spec
    current_table = dim.fact_path.start
    current_row = source_row
    for edge in dim.fact_path.edges:
        fk_value = data[current_table].value(current_row, edge.columns[0])
        if fk_value is None:
            return UNKNOWN_KEY
        current_row = data[edge.parent].row_by_pk((fk_value,))
        if current_row is None:
            raise ReferentialError(
                f"unresolved reference {current_table} -> {edge.parent} ({fk_value})"
            )
        current_table = edge.parent
    natural = data[current_table].value(current_row, dim.natural_key[1])
    if natural is None:
        return UNKNOWN_KEY
    key = dim_rows.key_by_natural.get(natural)
    if key is None:
        raise ReferentialError(
            f"dimension {dim.name} has no member for {dim.natural_key[1]}={natural!r}"
        )
    return key


def _fresh_accumulator(agg: str) -> list:
    if agg == "AVG":
        return [None, 0]  # running sum, non-null contribution count
    if agg == "COUNT":
        return [0]
    return [None]


def _accumulate(slot: list, agg: str, value: int | None, name: str) -> None:
    if agg == "COUNT":
        # Counts contributing rows, so conservation against the source row
        # count holds even when the counted column is NULL.
        slot[0] = check_int64(slot[0] + 1, name)
        return
    if value is None:
        return
    if agg == "SUM":
        slot[0] = check_int64(value if slot[0] is None else slot[0] + value, name)
    elif agg == "MIN":
        slot[0] = value if slot[0] is None else min(slot[0], value)
    elif agg == "MAX":
        slot[0] = value if slot[0] is None else max(slot[0], value)
    elif agg == "AVG":
        slot[0] = check_int64(value if slot[0] is None else slot[0] + value, name)
        slot[1] = check_int64(slot[1] + 1, name)


def _storage_values(slot: list, agg: str) -> list[int | None]:
    if agg == "AVG":
        return [slot[0], slot[1]]
    return [slot[0]]


# ---------------------------------------------------------------------------
# Cube loading and star persistence


def load_cube(
    star: StarSchema,
    dims: dict[str, DimensionRows],
    facts: FactRows,
    out_dir: str | Path | None = None,
) -> Cube:
    """Assemble the immutable cube; optionally persist ``<out>/star/``."""
    indexes = [
        DimensionIndex.from_rows(dims[dim.name]) for dim in star.dimensions
    ]
    cells = {coord: values for coord, values in facts.rows}
    cube = Cube(star=star, dimensions=tuple(indexes), cells=cells)
    if out_dir is not None:
        write_star_output(star, dims, facts, out_dir)
    return cube


def write_star_output(
    star: StarSchema,
    dims: dict[str, DimensionRows],
    facts: FactRows,
    out_dir: str | Path,
) -> Path:
    star_dir = Path(out_dir) / "star"
    star_dir.mkdir(parents=True, exist_ok=True)

    for dim in star.dimensions:
        rows = dims[dim.name]
        header = [dim.surrogate_key_name]
        header += [level.name for level in dim.hierarchy.levels]
        header += [attr.output_name for attr in dim.descriptive_attributes]
        records = [[str(UNKNOWN_KEY)] + [""] * (len(header) - 1)]
        for i in range(rows.member_count):
            record = [str(i + 1)]
            record += [v if v is not None else "" for v in rows.level_values[i]]
            record += [
                render_value(v, attr.data_type)
                for v, attr in zip(rows.attribute_values[i], dim.descriptive_attributes)
            ]
            records.append(record)
        _write_csv(star_dir / f"dim_{dim.name}.csv", header, records)

    header = [sk for _, sk in star.fact.foreign_keys]
    types = []
    for measure in star.fact.measures:
        header.extend(measure.storage)
        types.extend(measure.storage_types)
    records = []
    for coord, storage in facts.rows:
        record = [str(k) for k in coord]
        record += [render_value(v, t) for v, t in zip(storage, types)]
        records.append(record)
    _write_csv(star_dir / f"fact_{star.fact.name}.csv", header, records)

    (star_dir / "schema.sql").write_text(emit_star_ddl(star), encoding="utf-8")
    manifest = json.dumps(star_to_dict(star), indent=2, sort_keys=True) + "\n"
    (star_dir / "star.json").write_text(manifest, encoding="utf-8")
    return star_dir


def _write_csv(path: Path, header: list[str], records: list[list[str]]) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(records)
    path.write_text(buffer.getvalue(), encoding="utf-8")


def load_star_output(out_dir: str | Path) -> tuple[StarSchema, dict[str, DimensionRows], FactRows]:
    """Read back a persisted star directory (inverse of write_star_output)."""
    star_dir = Path(out_dir) / "star"
    manifest = star_dir / "star.json"
    if not manifest.exists():
        raise MissingFileError(f"missing star manifest {manifest}")
    star = star_from_dict(json.loads(manifest.read_text(encoding="utf-8")))

    dims: dict[str, DimensionRows] = {}
    for dim in star.dimensions:
        path = star_dir / f"dim_{dim.name}.csv"
        if not path.exists():
            raise MissingFileError(f"missing dimension file {path}")
        natural_keys: list[Value] = []
        level_values: list[tuple[str | None, ...]] = []
        attribute_values: list[tuple[Value, ...]] = []
        n_levels = len(dim.hierarchy.levels)
        with open(path, "r", encoding="utf-8", newline="") as handle:
            reader = csv.reader(handle)
            next(reader)  # header
            for record in reader:
                key = int(record[0])
                if key == UNKNOWN_KEY:
                    continue
                levels = tuple(v if v != "" else None for v in record[1 : 1 + n_levels])
                attrs = tuple(
                    parse_value(text, attr.data_type) if text != "" else None
                    for text, attr in zip(record[1 + n_levels :], dim.descriptive_attributes)
                )
                level0 = levels[0]
                natural_keys.append(
                    parse_value(level0, dim.natural_key_type) if level0 is not None else None
                )
                level_values.append(levels)
                attribute_values.append(attrs)
        dims[dim.name] = DimensionRows(
            spec=dim,
            natural_keys=natural_keys,
            level_values=level_values,
            attribute_values=attribute_values,
        )

    fact_path = star_dir / f"fact_{star.fact.name}.csv"
    if not fact_path.exists():
        raise MissingFileError(f"missing fact file {fact_path}")
    n_dims = len(star.dimensions)
    types = [t for m in star.fact.measures for t in m.storage_types]
    rows = []
    with open(fact_path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        next(reader)
        for record in reader:
            coord = tuple(int(v) for v in record[:n_dims])
            storage = tuple(
                parse_value(text, t) if text != "" else None
                for text, t in zip(record[n_dims:], types)
            )
            rows.append((coord, storage))
    return star, dims, FactRows(star=star, rows=rows)
