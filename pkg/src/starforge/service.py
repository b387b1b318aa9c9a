"""HTTP query service: the cube behind a small, stable JSON API.

Reads are answered from an immutable cube snapshot grabbed per request, so
any number of queries can run while a rebuild prepares its replacement;
the swap is a single attribute assignment and rebuilds are single-writer
(a concurrent second rebuild gets 409). Measure values travel as strings
rendered by the engine, so clients display them verbatim and nothing is
ever re-rounded on the wire.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from .cube import Cube, CubeQuery, Filter, pivot
from .design import plan_star
from .errors import (
    QueryError,
    StarforgeError,
    UnknownMemberError,
)
from .etl import (
    DimensionRows,
    FactRows,
    build_dimension_rows,
    build_fact_rows,
    extract,
    load_cube,
    load_star_output,
)
from .graph import build_graph
from .project import ProjectConfig

_FALLBACK_PAGE = """<!doctype html>
<html><head><title>starforge</title></head>
<body><h1>starforge query service</h1>
<p>No pivot explorer assets found. The JSON API lives under <code>/api/</code>:
GET <code>/api/meta</code>, POST <code>/api/query</code>,
POST <code>/api/admin/rebuild</code>.</p></body></html>
"""


def run_pipeline(
    project: ProjectConfig, write_output: bool = True
) -> tuple[Cube, dict[str, DimensionRows], FactRows]:
    """Plan from the project's catalog/design and run ETL end to end."""
    catalog = project.load_catalog()
    graph = build_graph(catalog)
    star = plan_star(catalog, project.load_design(), graph)
    data = extract(catalog, project.data_dir)
    dims = {dim.name: build_dimension_rows(dim, data) for dim in star.dimensions}
    facts = build_fact_rows(star, data, dims)
    cube = load_cube(star, dims, facts, out_dir=project.out_dir if write_output else None)
    return cube, dims, facts


class CubeStore:
    """Holds the live cube; many readers, one writer, atomic replacement."""

    def __init__(self, cube: Cube, project: ProjectConfig | None = None):
        self.cube = cube
        self.project = project
        self._rebuild_lock = threading.Lock()

    @classmethod
    def from_project(cls, project: ProjectConfig) -> "CubeStore":
        star_dir = project.out_dir / "star"
        if (star_dir / "star.json").exists():
            star, dims, facts = load_star_output(project.out_dir)
            cube = load_cube(star, dims, facts, out_dir=None)
        else:
            cube, _, _ = run_pipeline(project)
        return cls(cube=cube, project=project)

    def rebuild(self) -> Cube:
        if self.project is None:
            raise StarforgeError("this cube was loaded without a project; cannot rebuild")
        if not self._rebuild_lock.acquire(blocking=False):
            raise RebuildInProgress()
        try:
            cube, _, _ = run_pipeline(self.project)
            self.cube = cube  # atomic swap; readers keep their old snapshot
            return cube
        finally:
            self._rebuild_lock.release()


class RebuildInProgress(StarforgeError):
    code = "rebuild_in_progress"


def _error_body(code: str, message: str, detail: str | None = None) -> dict:
    return {"error": {"code": code, "message": message, "detail": detail}}


def _status_for(exc: StarforgeError) -> int:
    if isinstance(exc, UnknownMemberError):
        return 404
    if isinstance(exc, RebuildInProgress):
        return 409
    if isinstance(exc, QueryError):
        return 400
    return 400


def parse_query_body(body: dict) -> tuple[CubeQuery, dict | None]:
    """Translate a JSON query body into a CubeQuery plus optional pivot axes."""
    if not isinstance(body, dict):
        raise QueryError("query body must be a JSON object")
    unknown = sorted(set(body) - {"group_by", "filters", "measures", "pivot"})
    if unknown:
        raise QueryError(f"unknown query field(s): {', '.join(unknown)}")

    group_by = []
    for entry in _expect_list(body, "group_by"):
        if not isinstance(entry, dict) or "dim" not in entry or "level" not in entry:
            raise QueryError("each group_by entry needs dim and level")
        group_by.append((str(entry["dim"]), str(entry["level"])))

    filters = []
    for entry in _expect_list(body, "filters"):
        if not isinstance(entry, dict) or not {"dim", "level", "members"} <= set(entry):
            raise QueryError("each filter needs dim, level, and members")
        members = entry["members"]
        if not isinstance(members, list) or not members:
            raise QueryError("filter members must be a non-empty list")
        filters.append(
            Filter(
                dimension=str(entry["dim"]),
                level=str(entry["level"]),
                members=frozenset(str(m) for m in members),
            )
        )

    measures = tuple(str(m) for m in _expect_list(body, "measures"))

    pivot_spec = body.get("pivot")
    if pivot_spec is not None:
        if not isinstance(pivot_spec, dict) or not {"rows", "cols"} <= set(pivot_spec):
            raise QueryError("pivot needs rows and cols lists")
        pivot_spec = {
            "rows": [str(d) for d in pivot_spec["rows"]],
            "cols": [str(d) for d in pivot_spec["cols"]],
        }
    query = CubeQuery(group_by=tuple(group_by), filters=tuple(filters), measures=measures)
    return query, pivot_spec


def _expect_list(body: dict, key: str) -> list:
    value = body.get(key, [])
    if not isinstance(value, list):
        raise QueryError(f"{key} must be a list")
    return value


def create_app(store: CubeStore, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="starforge", docs_url=None, redoc_url=None)
    static_root = Path(static_dir) if static_dir else None

    @app.exception_handler(RequestValidationError)
    async def bad_request(_request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content=_error_body("bad_query", str(exc)))

    @app.exception_handler(StarforgeError)
    async def starforge_error(_request: Request, exc: StarforgeError):
        detail = getattr(exc, "detail", None)
        return JSONResponse(
            status_code=_status_for(exc),
            content=_error_body(exc.code, str(exc), detail),
        )

    # Sync endpoints run in the server's worker threadpool, so reads proceed
    # concurrently while a rebuild runs; each request snapshots store.cube
    # once, so it answers from the old cube or the new one, never a blend.

    @app.get("/api/meta")
    def meta():
        return store.cube.metadata()

    @app.post("/api/query")
    def query(body: dict):
        cube = store.cube
        cube_query, pivot_spec = parse_query_body(body)
        result = cube.query(cube_query)
        if pivot_spec is not None:
            grid = pivot(result, pivot_spec["rows"], pivot_spec["cols"])
            return {"grid": grid.to_dict()}
        return {
            "rows": [
                {"members": list(members), "values": values}
                for members, values in result.rendered_rows()
            ],
            "measures": [m.name for m in result.measures],
        }

    @app.post("/api/admin/rebuild")
    def rebuild():
        cube = store.rebuild()
        return {"status": "rebuilt", "base_cells": cube.base_cell_count}

    if static_root is not None and (static_root / "index.html").exists():
        app.mount("/", StaticFiles(directory=static_root, html=True), name="explorer")
    else:

        @app.get("/")
        async def index():
            return HTMLResponse(_FALLBACK_PAGE)

    return app
