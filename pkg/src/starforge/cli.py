"""Command-line workflow: inspect -> plan -> build -> serve.

Exit codes are part of the contract: 0 success (warnings allowed), 2 for
catalog/design failures, 3 for ETL failures.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .catalog import validate_catalog
from .design import plan_star
from .errors import StarforgeError
from .etl import build_dimension_rows, build_fact_rows, extract, load_cube
from .graph import build_graph, find_paths
from .project import ProjectConfig, ServeOptions, load_project
from .values import render_decimal

EXIT_OK = 0
EXIT_DESIGN = 2
EXIT_ETL = 3


def _load_project_or_die(config: str) -> ProjectConfig:
    try:
        return load_project(config)
    except StarforgeError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_DESIGN)


@click.group()
def main() -> None:
    """Derive a star schema from a relational source and explore it."""


@main.command()
@click.option("--config", default="starforge.json", show_default=True, help="Project config path.")
@click.option("--paths", "show_paths", is_flag=True, help="Enumerate foreign-key paths.")
@click.option("--from", "from_table", default=None, help="Path start table (with --paths).")
@click.option("--to", "to_target", default=None, help="Path target as table.column (with --paths).")
def inspect(config: str, show_paths: bool, from_table: str | None, to_target: str | None) -> None:
    """Print the source catalog, its validation findings, and the FK graph."""
    project = _load_project_or_die(config)
    try:
        catalog = project.load_catalog()
    except StarforgeError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_DESIGN)

    click.echo(f"schema: {catalog.schema_name} ({len(catalog.tables)} tables)")
    for table in catalog.tables:
        click.echo(f"\ntable {table.name}")
        for col in table.columns:
            flags = [col.data_type.render()]
            if not col.nullable:
                flags.append("NOT NULL")
            marker = table.constraint_class(col.name)
            if marker != "none":
                flags.append(marker.upper())
            click.echo(f"  {col.name} {' '.join(flags)}")
        if table.primary_key:
            click.echo(f"  primary key: ({', '.join(table.primary_key)})")
        for fk in table.foreign_keys:
            click.echo(
                f"  foreign key: ({', '.join(fk.columns)}) -> "
                f"{fk.ref_table} ({', '.join(fk.ref_columns)})"
            )

    graph = build_graph(catalog)
    click.echo(f"\nforeign-key graph: {len(graph.nodes)} nodes, {len(graph.edges)} edges")
    for edge in graph.edges:
        click.echo(f"  {edge.render()}")

    report = validate_catalog(catalog)
    if report.findings:
        click.echo("\nfindings:")
        for finding in report.findings:
            click.echo(f"  [{finding.severity}] {finding.table}: {finding.message}")
    else:
        click.echo("\nfindings: none")

    if show_paths:
        if not from_table or not to_target or "." not in to_target:
            click.echo("error: --paths needs --from TABLE and --to TABLE.COLUMN", err=True)
            sys.exit(EXIT_DESIGN)
        table_name, column_name = to_target.split(".", 1)
        try:
            paths = find_paths(graph, from_table, (table_name, column_name))
        except StarforgeError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_DESIGN)
        click.echo(f"\npaths {from_table} -> {table_name}.{column_name}:")
        for i, path in enumerate(paths):
            click.echo(f"  [{i}] {path.render()}")

    sys.exit(EXIT_DESIGN if report.errors else EXIT_OK)


@main.command()
@click.option("--config", default="starforge.json", show_default=True, help="Project config path.")
@click.option("--out", "out_dir", default=None, help="Override the output directory.")
def plan(config: str, out_dir: str | None) -> None:
    """Resolve the design document into a star schema and emit its DDL."""
    project = _load_project_or_die(config)
    try:
        star, graph = _plan(project)
    except StarforgeError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_DESIGN)

    click.echo(f"fact table: {star.fact.name} (source {star.fact_source_table})")
    click.echo("measures:")
    for measure in star.fact.measures:
        click.echo(f"  {measure.name} = {measure.agg}({measure.source_table}.{measure.source_column})")
    click.echo(f"dimensions ({len(star.dimensions)}):")
    for dim, attr in zip(star.dimensions, star.fact.grain.attributes):
        n_paths = len(find_paths(graph, star.fact_source_table, (attr.table, attr.column)))
        click.echo(f"  {dim.name} (grain {attr.table}.{attr.column})")
        click.echo(f"    hierarchy: {' -> '.join(dim.hierarchy.level_names())}")
        click.echo(f"    path [{attr.path_index} of {n_paths}]: {dim.fact_path.render() or attr.table}")
        if dim.descriptive_attributes:
            names = ", ".join(a.output_name for a in dim.descriptive_attributes)
            click.echo(f"    attributes: {names}")

    from .design import emit_star_ddl

    target = Path(out_dir) if out_dir else project.out_dir
    target.mkdir(parents=True, exist_ok=True)
    ddl_path = target / "schema.sql"
    ddl_path.write_text(emit_star_ddl(star), encoding="utf-8")
    click.echo(f"\nwrote {ddl_path}")
    sys.exit(EXIT_OK)


def _plan(project: ProjectConfig):
    catalog = project.load_catalog()
    graph = build_graph(catalog)
    star = plan_star(catalog, project.load_design(), graph)
    return star, graph


@main.command()
@click.option("--config", default="starforge.json", show_default=True, help="Project config path.")
@click.option("--out", "out_dir", default=None, help="Override the output directory.")
@click.option("--verify", is_flag=True, help="Run the conservation checks after loading.")
def build(config: str, out_dir: str | None, verify: bool) -> None:
    """Run ETL end to end and write the star output directory."""
    project = _load_project_or_die(config)
    try:
        star, _ = _plan(project)
    except StarforgeError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_DESIGN)

    try:
        catalog = project.load_catalog()
        data = extract(catalog, project.data_dir)
        dims = {dim.name: build_dimension_rows(dim, data) for dim in star.dimensions}
        facts = build_fact_rows(star, data, dims)
        target = Path(out_dir) if out_dir else project.out_dir
        load_cube(star, dims, facts, out_dir=target)
    except (StarforgeError, OverflowError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ETL)

    for note in data.notes:
        click.echo(f"note: {note}")
    summary = ", ".join(
        f"dim_{dim.name}: {dims[dim.name].member_count} (+unknown)" for dim in star.dimensions
    )
    click.echo(f"{summary}, fact_{star.fact.name}: {len(facts.rows)}")
    click.echo(f"wrote {target / 'star'}")

    if verify:
        failures = _verify_conservation(star, data, facts)
        if failures:
            for failure in failures:
                click.echo(f"verify FAILED: {failure}", err=True)
            sys.exit(EXIT_ETL)
        click.echo("verify: conservation checks passed")
    sys.exit(EXIT_OK)


def _verify_conservation(star, data, facts) -> list[str]:
    """SUM and COUNT grand totals must match the source table exactly."""
    source = data[star.fact_source_table]
    failures = []
    offset = 0
    for measure in star.fact.measures:
        width = len(measure.storage)
        if measure.agg in ("SUM", "COUNT"):
            total = sum(
                storage[offset] for _, storage in facts.rows if storage[offset] is not None
            )
            if measure.agg == "SUM":
                expected = sum(
                    value
                    for row in source.rows
                    if (value := source.value(row, measure.source_column)) is not None
                )
            else:
                expected = len(source.rows)
            if total != expected:
                failures.append(
                    f"{measure.name}: fact total {render_decimal(total, measure.value_scale)} "
                    f"!= source total {render_decimal(expected, measure.value_scale)}"
                )
        offset += width
    return failures


@main.command()
@click.option("--config", default="starforge.json", show_default=True, help="Project config path.")
@click.option("--port", default=None, type=int, help="Override the configured port.")
@click.option("--bind", default=None, help="Override the configured bind address.")
@click.option("--static-dir", default=None, help="Pivot explorer asset directory.")
def serve(config: str, port: int | None, bind: str | None, static_dir: str | None) -> None:
    """Serve the JSON API and the pivot explorer for a built star."""
    import uvicorn

    from .service import CubeStore, create_app

    project = _load_project_or_die(config)
    if port is not None or bind is not None:
        serve_options = ServeOptions(
            bind=bind or project.serve.bind, port=port or project.serve.port
        )
    else:
        serve_options = project.serve

    try:
        store = CubeStore.from_project(project)
    except StarforgeError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ETL)

    assets = Path(static_dir) if static_dir else _default_assets()
    app = create_app(store, static_dir=assets)
    click.echo(f"serving on http://{serve_options.bind}:{serve_options.port}/")
    uvicorn.run(app, host=serve_options.bind, port=serve_options.port, log_level="warning")


def _default_assets() -> Path | None:
    candidate = Path.cwd() / "frontend" / "dist"
    return candidate if candidate.exists() else None


if __name__ == "__main__":
    main()
