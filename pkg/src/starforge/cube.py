"""In-memory multidimensional store and the query algebra over it.

Cells live in a sparse map keyed by surrogate-key coordinates; empty cells
are absent, never zero, so MIN/MAX and AVG stay honest. Queries aggregate
base cells through per-dimension ancestor lookups -- rolling up never
re-reads source data and never averages averages (AVG is carried as a
sum/count pair until rendering).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .design import DimensionSpec, ResolvedMeasure, StarSchema
from .errors import (
    AtBottomLevelError,
    AtTopLevelError,
    AxisMismatchError,
    QueryError,
    UnknownDimensionError,
    UnknownLevelError,
    UnknownMemberError,
    UnknownMeasureError,
)
from .values import render_decimal

UNKNOWN_LABEL = "Unknown"


@dataclass(frozen=True)
class DimensionIndex:
    """Dimension members plus total ancestor lookup across hierarchy levels.

    ``members[i]`` holds the display value per level for surrogate key
    ``i + 1``. Key 0 (the Unknown member) maps to ``Unknown`` at every
    level, as does a member whose parent chain was broken by a NULL.
    """

    spec: DimensionSpec
    members: tuple[tuple[str | None, ...], ...]

    @classmethod
    def from_rows(cls, rows) -> "DimensionIndex":
        return cls(spec=rows.spec, members=tuple(tuple(levels) for levels in rows.level_values))

    @property
    def name(self) -> str:
        return self.spec.name

    def level_names(self) -> list[str]:
        return self.spec.hierarchy.level_names()

    def level_index(self, level: str) -> int:
        names = self.level_names()
        if level not in names:
            raise UnknownLevelError(
                f"dimension {self.name} has no level {level}", detail=level
            )
        return names.index(level)

    def value_at(self, key: int, level_index: int) -> str:
        if key == 0:
            return UNKNOWN_LABEL
        value = self.members[key - 1][level_index]
        return UNKNOWN_LABEL if value is None else value

    def values_at_level(self, level_index: int) -> set[str]:
        values = {self.value_at(k, level_index) for k in range(len(self.members) + 1)}
        return values

    def member_counts(self) -> list[int]:
        return [
            len({m[i] for m in self.members if m[i] is not None})
            for i in range(len(self.level_names()))
        ]


@dataclass(frozen=True)
class Filter:
    dimension: str
    level: str
    members: frozenset[str]

    def __post_init__(self) -> None:
        if not self.members:
            raise QueryError(f"empty member set filtering {self.dimension}.{self.level}")


@dataclass(frozen=True)
class CubeQuery:
    group_by: tuple[tuple[str, str], ...] = ()
    filters: tuple[Filter, ...] = ()
    measures: tuple[str, ...] = ()  # empty selects every measure


@dataclass(frozen=True)
class ResultRow:
    members: tuple[str, ...]
    accumulators: tuple[tuple[int | None, ...], ...]  # one tuple per measure


@dataclass(frozen=True)
class QueryResult:
    group_by: tuple[tuple[str, str], ...]
    measures: tuple[ResolvedMeasure, ...]
    rows: tuple[ResultRow, ...]

    def rendered_rows(self) -> list[tuple[tuple[str, ...], list[str]]]:
        return [
            (row.members, [render_measure(m, acc) for m, acc in zip(self.measures, row.accumulators)])
            for row in self.rows
        ]

    def as_mapping(self, measure_index: int = 0) -> dict[tuple[str, ...], str]:
        """Member tuple -> rendered value of one measure (test convenience)."""
        out = {}
        for row in self.rows:
            out[row.members] = render_measure(
                self.measures[measure_index], row.accumulators[measure_index]
            )
        return out


def _merge(acc: tuple[int | None, ...] | None, values: tuple[int | None, ...], agg: str):
    if acc is None:
        return tuple(values)
    if agg == "SUM":
        (a,), (b,) = acc, values
        return (_add(a, b),)
    if agg == "COUNT":
        return (acc[0] + values[0],)
    if agg == "MIN":
        (a,), (b,) = acc, values
        if a is None:
            return (b,)
        return (a if b is None else min(a, b),)
    if agg == "MAX":
        (a,), (b,) = acc, values
        if a is None:
            return (b,)
        return (a if b is None else max(a, b),)
    if agg == "AVG":
        return (_add(acc[0], values[0]), acc[1] + values[1])
    raise QueryError(f"unknown aggregation {agg}")


def _add(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return a + b


def render_measure(measure: ResolvedMeasure, acc: tuple[int | None, ...]) -> str:
    """Deterministic text form of an aggregated value; NULL renders empty.

    AVG divides its sum/count pair here, at output time, displayed with two
    digits beyond the source scale (half-even rounding).
    """
    if measure.agg == "AVG":
        total, count = acc
        if total is None or count == 0:
            return ""
        scaled = _div_half_even(total * 100, count)
        return render_decimal(scaled, measure.value_scale + 2)
    value = acc[0]
    if value is None:
        return ""
    if measure.agg == "COUNT":
        return str(value)
    return render_decimal(value, measure.value_scale)


def _div_half_even(numerator: int, denominator: int) -> int:
    sign = -1 if (numerator < 0) != (denominator < 0) else 1
    n, d = abs(numerator), abs(denominator)
    q, r = divmod(n, d)
    if 2 * r > d or (2 * r == d and q % 2 == 1):
        q += 1
    return sign * q


@dataclass(frozen=True)
class Cube:
    star: StarSchema
    dimensions: tuple[DimensionIndex, ...]
    cells: dict[tuple[int, ...], tuple[int | None, ...]] = field(repr=False)

    # -- metadata ----------------------------------------------------------

    def dimension_position(self, name: str) -> int:
        for i, dim in enumerate(self.dimensions):
            if dim.name == name:
                return i
        raise UnknownDimensionError(f"cube has no dimension {name}", detail=name)

    def measure_named(self, name: str) -> ResolvedMeasure:
        for measure in self.star.fact.measures:
            if measure.name == name:
                return measure
        raise UnknownMeasureError(f"cube has no measure {name}", detail=name)

    def metadata(self) -> dict:
        # "members" lists every member's display tuple across levels, the
        # Unknown member first; it is what lets a client show a member that
        # has no facts at all (queries can never surface those).
        return {
            "dimensions": [
                {
                    "name": dim.name,
                    "levels": dim.level_names(),
                    "member_counts": dim.member_counts(),
                    "members": [
                        [dim.value_at(key, l) for l in range(len(dim.level_names()))]
                        for key in range(len(dim.members) + 1)
                    ],
                }
                for dim in self.dimensions
            ],
            "measures": [
                {"name": m.name, "agg": m.agg} for m in self.star.fact.measures
            ],
        }

    @property
    def base_cell_count(self) -> int:
        return len(self.cells)

    # -- query evaluation --------------------------------------------------

    def query(self, q: CubeQuery) -> QueryResult:
        """Filter base cells, group by ancestor values, aggregate.

        A base cell passes a filter iff its member's ancestor at the filter
        level is an accepted value; result rows come out in ascending member
        order so identical queries are byte-for-byte repeatable.
        """
        group_plan = self._plan_group_by(q.group_by)
        filter_plan = self._plan_filters(q.filters)
        measures = self._select_measures(q.measures)
        slices = [self._measure_slice(m) for m in measures]

        groups: dict[tuple[str, ...], list] = {}
        for coord, storage in self.cells.items():
            passed = True
            for dim_pos, level_idx, accepted in filter_plan:
                if self.dimensions[dim_pos].value_at(coord[dim_pos], level_idx) not in accepted:
                    passed = False
                    break
            if not passed:
                continue
            key = tuple(
                self.dimensions[dim_pos].value_at(coord[dim_pos], level_idx)
                for dim_pos, level_idx in group_plan
            )
            acc = groups.get(key)
            if acc is None:
                acc = [None] * len(measures)
                groups[key] = acc
            for i, (measure, (lo, hi)) in enumerate(zip(measures, slices)):
                acc[i] = _merge(acc[i], storage[lo:hi], measure.agg)

        rows = tuple(
            ResultRow(members=key, accumulators=tuple(groups[key]))
            for key in sorted(groups)
        )
        return QueryResult(group_by=q.group_by, measures=tuple(measures), rows=rows)

    def _plan_group_by(self, group_by) -> list[tuple[int, int]]:
        seen = set()
        plan = []
        for dim_name, level in group_by:
            if dim_name in seen:
                raise QueryError(f"dimension {dim_name} appears twice in group_by")
            seen.add(dim_name)
            pos = self.dimension_position(dim_name)
            plan.append((pos, self.dimensions[pos].level_index(level)))
        return plan

    def _plan_filters(self, filters) -> list[tuple[int, int, frozenset[str]]]:
        plan = []
        for f in filters:
            pos = self.dimension_position(f.dimension)
            level_idx = self.dimensions[pos].level_index(f.level)
            known = self.dimensions[pos].values_at_level(level_idx)
            for member in sorted(f.members):
                if member not in known:
                    raise UnknownMemberError(
                        f"dimension {f.dimension} has no member {member!r} at level {f.level}",
                        detail=member,
                    )
            plan.append((pos, level_idx, f.members))
        return plan

    def _select_measures(self, names) -> list[ResolvedMeasure]:
        if not names:
            return list(self.star.fact.measures)
        return [self.measure_named(name) for name in names]

    def _measure_slice(self, measure: ResolvedMeasure) -> tuple[int, int]:
        offset = 0
        for m in self.star.fact.measures:
            width = len(m.storage)
            if m.name == measure.name:
                return offset, offset + width
            offset += width
        raise UnknownMeasureError(f"cube has no measure {measure.name}", detail=measure.name)

    # -- query transforms ----------------------------------------------------

    def roll_up(self, q: CubeQuery, dimension: str) -> CubeQuery:
        """Raise one dimension a level; at the top it leaves the query."""
        pos = self.dimension_position(dimension)
        levels = self.dimensions[pos].level_names()
        for i, (dim_name, level) in enumerate(q.group_by):
            if dim_name != dimension:
                continue
            k = self.dimensions[pos].level_index(level)
            if k + 1 < len(levels):
                new_group = list(q.group_by)
                new_group[i] = (dimension, levels[k + 1])
                return replace(q, group_by=tuple(new_group))
            return replace(q, group_by=tuple(g for g in q.group_by if g[0] != dimension))
        raise AtTopLevelError(
            f"dimension {dimension} is not in the query; it is already fully rolled up",
            detail=dimension,
        )

    def drill_down(self, q: CubeQuery, dimension: str) -> CubeQuery:
        """Lower one dimension a level; an absent dimension enters at its top."""
        pos = self.dimension_position(dimension)
        levels = self.dimensions[pos].level_names()
        for i, (dim_name, level) in enumerate(q.group_by):
            if dim_name != dimension:
                continue
            k = self.dimensions[pos].level_index(level)
            if k == 0:
                raise AtBottomLevelError(
                    f"dimension {dimension} is already at its lowest level {level}",
                    detail=dimension,
                )
            new_group = list(q.group_by)
            new_group[i] = (dimension, levels[k - 1])
            return replace(q, group_by=tuple(new_group))
        return replace(q, group_by=q.group_by + ((dimension, levels[-1]),))

    def slice(self, q: CubeQuery, dimension: str, level: str, member: str) -> CubeQuery:
        pos = self.dimension_position(dimension)
        level_idx = self.dimensions[pos].level_index(level)
        if member not in self.dimensions[pos].values_at_level(level_idx):
            raise UnknownMemberError(
                f"dimension {dimension} has no member {member!r} at level {level}",
                detail=member,
            )
        new_filter = Filter(dimension=dimension, level=level, members=frozenset({member}))
        return replace(q, filters=q.filters + (new_filter,))

    def dice(self, q: CubeQuery, filters: list[Filter]) -> CubeQuery:
        """Conjunction across filters, disjunction within each member set."""
        for f in filters:
            pos = self.dimension_position(f.dimension)
            level_idx = self.dimensions[pos].level_index(f.level)
            known = self.dimensions[pos].values_at_level(level_idx)
            for member in sorted(f.members):
                if member not in known:
                    raise UnknownMemberError(
                        f"dimension {f.dimension} has no member {member!r} at level {f.level}",
                        detail=member,
                    )
        return replace(q, filters=q.filters + tuple(filters))


# ---------------------------------------------------------------------------
# Pivot


@dataclass(frozen=True)
class PivotGrid:
    row_levels: tuple[tuple[str, str], ...]
    col_levels: tuple[tuple[str, str], ...]
    measures: tuple[ResolvedMeasure, ...]
    row_headers: tuple[tuple[str, ...], ...]
    col_headers: tuple[tuple[str, ...], ...]
    cells: tuple[tuple[tuple[tuple[int | None, ...], ...] | None, ...], ...]
    row_totals: tuple[tuple[tuple[int | None, ...], ...], ...]
    col_totals: tuple[tuple[tuple[int | None, ...], ...], ...]
    grand_total: tuple[tuple[int | None, ...], ...]

    def rendered_cell(self, r: int, c: int) -> list[str] | None:
        cell = self.cells[r][c]
        if cell is None:
            return None
        return [render_measure(m, acc) for m, acc in zip(self.measures, cell)]

    def to_dict(self) -> dict:
        def render_vector(accs) -> list[str]:
            return [render_measure(m, acc) for m, acc in zip(self.measures, accs)]

        return {
            "row_levels": [list(g) for g in self.row_levels],
            "col_levels": [list(g) for g in self.col_levels],
            "measures": [m.name for m in self.measures],
            "row_headers": [list(h) for h in self.row_headers],
            "col_headers": [list(h) for h in self.col_headers],
            "cells": [
                [self.rendered_cell(r, c) for c in range(len(self.col_headers))]
                for r in range(len(self.row_headers))
            ],
            "row_totals": [render_vector(t) for t in self.row_totals],
            "col_totals": [render_vector(t) for t in self.col_totals],
            "grand_total": render_vector(self.grand_total),
        }


def pivot(result: QueryResult, row_dims: list[str], col_dims: list[str]) -> PivotGrid:
    """Arrange a grouped result into a 2-D grid with totals.

    ``row_dims`` and ``col_dims`` must partition the result's group-by
    dimensions; totals re-aggregate the underlying accumulators, so AVG
    totals are true sum/count quotients rather than means of means.
    """
    group_dims = [dim for dim, _ in result.group_by]
    if sorted(row_dims + col_dims) != sorted(group_dims) or len(row_dims + col_dims) != len(
        set(row_dims + col_dims)
    ):
        raise AxisMismatchError(
            f"axes {row_dims} x {col_dims} must partition the grouped dimensions {group_dims}"
        )
    level_of = dict(result.group_by)
    position = {dim: i for i, (dim, _) in enumerate(result.group_by)}
    row_positions = [position[d] for d in row_dims]
    col_positions = [position[d] for d in col_dims]

    row_headers = sorted({tuple(row.members[i] for i in row_positions) for row in result.rows})
    col_headers = sorted({tuple(row.members[i] for i in col_positions) for row in result.rows})
    row_index = {h: i for i, h in enumerate(row_headers)}
    col_index = {h: i for i, h in enumerate(col_headers)}

    n_measures = len(result.measures)
    grid: list[list[tuple | None]] = [
        [None] * len(col_headers) for _ in range(len(row_headers))
    ]
    for row in result.rows:
        r = row_index[tuple(row.members[i] for i in row_positions)]
        c = col_index[tuple(row.members[i] for i in col_positions)]
        grid[r][c] = row.accumulators

    def merge_cells(cells) -> tuple:
        merged: list = [None] * n_measures
        for cell in cells:
            if cell is None:
                continue
            for i, measure in enumerate(result.measures):
                merged[i] = _merge(merged[i], cell[i], measure.agg)
        return tuple(acc if acc is not None else _empty_acc(result.measures[i]) for i, acc in enumerate(merged))

    row_totals = tuple(merge_cells(grid[r]) for r in range(len(row_headers)))
    col_totals = tuple(
        merge_cells([grid[r][c] for r in range(len(row_headers))]) for c in range(len(col_headers))
    )
    grand_total = merge_cells([cell for row in grid for cell in row])

    return PivotGrid(
        row_levels=tuple((d, level_of[d]) for d in row_dims),
        col_levels=tuple((d, level_of[d]) for d in col_dims),
        measures=result.measures,
        row_headers=tuple(row_headers),
        col_headers=tuple(col_headers),
        cells=tuple(tuple(row) for row in grid),
        row_totals=row_totals,
        col_totals=col_totals,
        grand_total=grand_total,
    )


def _empty_acc(measure: ResolvedMeasure) -> tuple[int | None, ...]:
    if measure.agg == "AVG":
        return (None, 0)
    if measure.agg == "COUNT":
        return (0,)
    return (None,)
