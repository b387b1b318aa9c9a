from __future__ import annotations

from pathlib import Path

import pytest

from starforge.design import plan_star
from starforge.etl import build_dimension_rows, build_fact_rows, extract, load_cube
from starforge.graph import build_graph
from starforge.project import fixture_dir, load_project

MINI_RETAIL = fixture_dir("mini_retail")
GORANNET = fixture_dir("gorannet")


@pytest.fixture(scope="session")
def retail_project():
    return load_project(MINI_RETAIL / "project.json")


@pytest.fixture(scope="session")
def retail_catalog(retail_project):
    return retail_project.load_catalog()


@pytest.fixture(scope="session")
def retail_graph(retail_catalog):
    return build_graph(retail_catalog)


@pytest.fixture(scope="session")
def retail_star(retail_catalog, retail_graph, retail_project):
    return plan_star(retail_catalog, retail_project.load_design(), retail_graph)


@pytest.fixture(scope="session")
def retail_data(retail_catalog, retail_project):
    return extract(retail_catalog, retail_project.data_dir)


@pytest.fixture(scope="session")
def retail_pipeline(retail_star, retail_data):
    dims = {d.name: build_dimension_rows(d, retail_data) for d in retail_star.dimensions}
    facts = build_fact_rows(retail_star, retail_data, dims)
    cube = load_cube(retail_star, dims, facts, out_dir=None)
    return cube, dims, facts


@pytest.fixture(scope="session")
def retail_cube(retail_pipeline):
    return retail_pipeline[0]


@pytest.fixture(scope="session")
def gorannet_project():
    return load_project(GORANNET / "project.json")


def build_project_tree(
    tmp_path: Path, ddl: str, csv_files: dict[str, list[str]], design: dict
) -> Path:
    """Materialize a generated source as an on-disk project; returns config path."""
    import json

    (tmp_path / "data").mkdir(parents=True, exist_ok=True)
    (tmp_path / "catalog.sql").write_text(ddl, encoding="utf-8")
    for table, lines in csv_files.items():
        (tmp_path / "data" / f"{table}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (tmp_path / "design.json").write_text(json.dumps(design, indent=2), encoding="utf-8")
    config = {
        "source": {"schema": "generated", "catalog": "catalog.sql", "data_dir": "data"},
        "design": "design.json",
        "out": "out",
    }
    (tmp_path / "project.json").write_text(json.dumps(config, indent=2), encoding="utf-8")
    return tmp_path / "project.json"


def copy_fixture_project(tmp_path: Path, name: str = "mini_retail") -> Path:
    """Copy a bundled fixture project into tmp so builds write outside the package."""
    import shutil

    src = fixture_dir(name)
    dest = tmp_path / name
    shutil.copytree(src, dest, ignore=shutil.ignore_patterns("out"))
    return dest / "project.json"
