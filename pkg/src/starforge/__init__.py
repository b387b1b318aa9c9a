"""starforge: star-schema synthesis and in-memory OLAP over relational sources."""

from .catalog import (
    ColumnDef,
    ColumnType,
    FkDef,
    RelationalCatalog,
    SourceDescriptor,
    TableDef,
    ValidationReport,
    dump_catalog,
    emit_catalog_ddl,
    load_catalog,
    validate_catalog,
)
from .cube import Cube, CubeQuery, Filter, PivotGrid, QueryResult, pivot
from .ddl import parse_ddl
from .design import (
    DesignDocument,
    DimensionSpec,
    GrainAttribute,
    GrainSpec,
    HierarchySpec,
    MeasureRequest,
    MeasureSpec,
    StarSchema,
    build_star_schema,
    derive_dimension,
    emit_star_ddl,
    load_design,
    plan_star,
    select_measures,
)
from .etl import (
    DimensionRows,
    FactRows,
    TableData,
    build_dimension_rows,
    build_fact_rows,
    extract,
    load_cube,
    load_star_output,
)
from .graph import FkEdge, FkPath, SchemaGraph, build_graph, detect_cycles, find_paths
from .project import ProjectConfig, fixture_dir, load_project

__version__ = "0.1.0"
