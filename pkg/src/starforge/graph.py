"""Foreign-key graph over a catalog and measure-to-grain path enumeration.

Edges run child -> parent (the direction a join from a fact-source row walks
to reach descriptive data). Parallel foreign keys between the same pair of
tables stay distinct edges, which is what makes role-playing dimensions
(ship-to store vs. sold-at store) possible downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .catalog import RelationalCatalog
from .errors import NoPathFoundError

__all__ = ["FkEdge", "FkPath", "SchemaGraph", "build_graph", "find_paths", "detect_cycles"]


@dataclass(frozen=True)
class FkEdge:
    child: str
    parent: str
    columns: tuple[str, ...]  # local (child) columns
    ref_columns: tuple[str, ...]  # parent PK columns

    @property
    def label(self) -> str:
        return "_".join(self.columns)

    def render(self) -> str:
        return f"{self.child} -> {self.parent} [{', '.join(self.columns)}]"


@dataclass(frozen=True)
class FkPath:
    """A simple child->parent edge chain; empty when the target is the start table."""

    start: str
    edges: tuple[FkEdge, ...]

    def __post_init__(self) -> None:
        prev = self.start
        seen = {self.start}
        for edge in self.edges:
            if edge.child != prev:
                raise ValueError(f"edge {edge.render()} does not chain from {prev}")
            if edge.parent in seen:
                raise ValueError(f"path revisits table {edge.parent}")
            seen.add(edge.parent)
            prev = edge.parent

    @property
    def end(self) -> str:
        return self.edges[-1].parent if self.edges else self.start

    @property
    def role_label(self) -> str:
        return "_".join(col for edge in self.edges for col in edge.columns)

    @property
    def tables(self) -> tuple[str, ...]:
        return (self.start,) + tuple(edge.parent for edge in self.edges)

    def render(self) -> str:
        return " -> ".join(self.tables)


@dataclass(frozen=True)
class SchemaGraph:
    nodes: tuple[str, ...]
    edges: tuple[FkEdge, ...]
    catalog: RelationalCatalog = field(repr=False)

    def outgoing(self, table: str) -> list[FkEdge]:
        return [e for e in self.edges if e.child == table]


def build_graph(catalog: RelationalCatalog) -> SchemaGraph:
    """One node per table, one edge per foreign key, in source order."""
    edges = []
    for table in catalog.tables:
        for fk in table.foreign_keys:
            edges.append(
                FkEdge(
                    child=table.name,
                    parent=fk.ref_table,
                    columns=tuple(fk.columns),
                    ref_columns=tuple(fk.ref_columns),
                )
            )
    return SchemaGraph(nodes=tuple(catalog.table_names()), edges=tuple(edges), catalog=catalog)


def find_paths(graph: SchemaGraph, start_table: str, target: tuple[str, str]) -> list[FkPath]:
    """Enumerate every simple path from the start table to the target's table.

    Ordering is (length ascending, then the lexicographic sequence of edge
    labels), so the shortest path sits at index 0 and ties break the same way
    on every run; a design document can then select any path by index.
    """
    target_table, target_column = target
    if start_table not in graph.nodes:
        raise NoPathFoundError(f"unknown start table {start_table}")
    if target_table not in graph.nodes:
        raise NoPathFoundError(f"unknown target table {target_table}")
    owner = graph.catalog.table(target_table)
    if owner is not None and owner.column(target_column) is None:
        raise NoPathFoundError(f"{target_table} has no column {target_column}")

    found: list[FkPath] = []

    def walk(current: str, visited: set[str], trail: list[FkEdge]) -> None:
        if current == target_table:
            found.append(FkPath(start=start_table, edges=tuple(trail)))
            return
        for edge in graph.outgoing(current):
            if edge.parent in visited:
                continue
            visited.add(edge.parent)
            trail.append(edge)
            walk(edge.parent, visited, trail)
            trail.pop()
            visited.remove(edge.parent)

    walk(start_table, {start_table}, [])
    if not found:
        raise NoPathFoundError(
            f"no foreign-key path from {start_table} to {target_table}.{target_column}"
        )
    found.sort(key=lambda p: (len(p.edges), tuple(e.label for e in p.edges)))
    return found


def detect_cycles(graph: SchemaGraph) -> list[tuple[FkEdge, ...]]:
    """Enumerate elementary cycles as edge sequences (empty for acyclic graphs).

    Each cycle is reported once, rooted at its first node in graph order, so
    the output is deterministic. Self-referencing tables show up as cycles of
    length one.
    """
    order = {name: i for i, name in enumerate(graph.nodes)}
    cycles: list[tuple[FkEdge, ...]] = []

    def walk(root: str, current: str, visited: set[str], trail: list[FkEdge]) -> None:
        for edge in graph.outgoing(current):
            if edge.parent == root:
                cycles.append(tuple(trail) + (edge,))
                continue
            if edge.parent in visited or order[edge.parent] < order[root]:
                continue
            visited.add(edge.parent)
            trail.append(edge)
            walk(root, edge.parent, visited, trail)
            trail.pop()
            visited.remove(edge.parent)

    for node in graph.nodes:
        walk(node, node, {node}, [])
    return cycles
