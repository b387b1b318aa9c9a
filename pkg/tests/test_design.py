from __future__ import annotations

import json
import random

import pytest

from starforge.catalog import validate_catalog
from starforge.ddl import parse_ddl
from starforge.design import (
    GrainAttribute,
    GrainSpec,
    MeasureRequest,
    build_star_schema,
    derive_dimension,
    dimension_name_for,
    emit_star_ddl,
    load_design,
    plan_star,
    select_measures,
    star_from_dict,
    star_to_dict,
)
from starforge.errors import (
    DesignError,
    MixedSourceTablesError,
    NotNumericError,
    UnknownColumnError,
    UnsupportedFeatureError,
)
from starforge.graph import build_graph, find_paths

from .conftest import GORANNET
from .oracles import random_source


def test_select_measures_retail_pair(retail_catalog):
    specs = select_measures(
        retail_catalog,
        [
            MeasureRequest("sales", "quantity", ("SUM",)),
            MeasureRequest("sales", "total_price", ("SUM", "AVG")),
        ],
    )
    assert len(specs) == 2
    assert {s.table for s in specs} == {"sales"}
    assert specs[1].aggregations == ("SUM", "AVG")


def test_select_measures_not_numeric(retail_catalog):
    with pytest.raises(NotNumericError):
        select_measures(retail_catalog, [MeasureRequest("products", "product_name", ("SUM",))])


def test_select_measures_count_accepts_any_column(retail_catalog):
    specs = select_measures(retail_catalog, [MeasureRequest("sales", "sale_id", ("COUNT",))])
    assert specs[0].aggregations == ("COUNT",)


def test_select_measures_mixed_tables(retail_catalog):
    with pytest.raises(MixedSourceTablesError):
        select_measures(
            retail_catalog,
            [
                MeasureRequest("sales", "quantity", ("SUM",)),
                MeasureRequest("products", "category_id", ("MAX",)),
            ],
        )


def test_select_measures_unknown_column(retail_catalog):
    with pytest.raises(UnknownColumnError, match="sales.profit"):
        select_measures(retail_catalog, [MeasureRequest("sales", "profit", ("SUM",))])


def test_derive_product_dimension(retail_catalog, retail_graph):
    path = find_paths(retail_graph, "sales", ("products", "product_name"))[0]
    dim = derive_dimension(retail_graph, retail_catalog, GrainAttribute("products", "product_name"), path)
    assert dim.name == "product"
    assert dim.hierarchy.level_names() == ["product_name", "category_name"]
    assert dim.natural_key == ("products", "product_name")
    assert [e.parent for e in dim.extension_edges] == ["categories"]
    assert dim.source_path.tables == ("sales", "products", "categories")


def test_derive_date_dimension(retail_catalog, retail_graph):
    path = find_paths(retail_graph, "sales", ("sales", "sale_date"))[0]
    dim = derive_dimension(retail_graph, retail_catalog, GrainAttribute("sales", "sale_date"), path)
    assert dim.name == "date"
    assert dim.hierarchy.level_names() == ["day", "month", "quarter", "year"]
    assert dim.is_calendar
    assert dim.descriptive_attributes == ()


def test_derive_store_dimension(retail_catalog, retail_graph):
    path = find_paths(retail_graph, "sales", ("stores", "store_name"))[0]
    dim = derive_dimension(retail_graph, retail_catalog, GrainAttribute("stores", "store_name"), path)
    assert dim.name == "store"
    assert dim.hierarchy.level_names() == ["store_name", "city", "region"]


def test_composite_fk_path_rejected():
    catalog = parse_ddl(
        """
        CREATE TABLE parents (x INTEGER, y INTEGER, label VARCHAR(10), PRIMARY KEY (x, y));
        CREATE TABLE children (
          id INTEGER PRIMARY KEY, px INTEGER NOT NULL, py INTEGER NOT NULL, n INTEGER,
          FOREIGN KEY (px, py) REFERENCES parents (x, y)
        );
        """
    )
    graph = build_graph(catalog)
    path = find_paths(graph, "children", ("parents", "label"))[0]
    with pytest.raises(UnsupportedFeatureError, match="composite"):
        derive_dimension(graph, catalog, GrainAttribute("parents", "label"), path)


def test_build_retail_star_default_fact_name(retail_catalog, retail_graph):
    measures = select_measures(
        retail_catalog,
        [
            MeasureRequest("sales", "quantity", ("SUM",)),
            MeasureRequest("sales", "total_price", ("SUM",)),
        ],
    )
    grain = GrainSpec(
        (
            GrainAttribute("sales", "sale_date"),
            GrainAttribute("products", "product_name"),
            GrainAttribute("stores", "store_name"),
        )
    )
    star = build_star_schema(measures, grain, retail_graph, retail_catalog)
    assert star.fact.name == "sales_fact"
    assert len(star.dimensions) == 3
    assert [d.name for d in star.dimensions] == ["date", "product", "store"]
    assert len(star.fact.foreign_keys) == len(star.dimensions)


def test_build_gorannet_star(gorannet_project):
    catalog = gorannet_project.load_catalog()
    graph = build_graph(catalog)
    star = plan_star(catalog, gorannet_project.load_design(), graph)
    assert len(star.dimensions) == 3
    assert [m.agg for m in star.fact.measures] == ["COUNT"]
    assert star.fact.measures[0].name == "subscribers_count"
    assert [d.name for d in star.dimensions] == ["date", "location", "service"]


def test_empty_grain_is_design_error(retail_catalog, retail_graph):
    measures = select_measures(retail_catalog, [MeasureRequest("sales", "quantity", ("SUM",))])
    with pytest.raises(DesignError):
        build_star_schema(measures, GrainSpec(()), retail_graph, retail_catalog)


def test_path_index_out_of_range_lists_paths(retail_catalog, retail_graph):
    measures = select_measures(retail_catalog, [MeasureRequest("sales", "quantity", ("SUM",))])
    grain = GrainSpec((GrainAttribute("products", "product_name", path_index=3),))
    with pytest.raises(DesignError, match=r"available paths: \[0\] sales -> products"):
        build_star_schema(measures, grain, retail_graph, retail_catalog)


def test_avg_expands_to_sum_count_pair(retail_star):
    avg = [m for m in retail_star.fact.measures if m.agg == "AVG"]
    assert len(avg) == 1
    assert avg[0].storage == ("total_price_avg_sum", "total_price_avg_count")
    assert avg[0].name == "total_price_avg"


def test_role_playing_dimensions_get_distinct_names():
    catalog = parse_ddl(
        """
        CREATE TABLE stores (id INTEGER PRIMARY KEY, store_name VARCHAR(20) NOT NULL);
        CREATE TABLE transfers (
          id INTEGER PRIMARY KEY,
          from_store INTEGER NOT NULL,
          to_store INTEGER NOT NULL,
          units INTEGER NOT NULL,
          FOREIGN KEY (from_store) REFERENCES stores (id),
          FOREIGN KEY (to_store) REFERENCES stores (id)
        );
        """
    )
    graph = build_graph(catalog)
    measures = select_measures(catalog, [MeasureRequest("transfers", "units", ("SUM",))])
    grain = GrainSpec(
        (
            GrainAttribute("stores", "store_name", path_index=0),
            GrainAttribute("stores", "store_name", path_index=1),
        )
    )
    star = build_star_schema(measures, grain, graph, catalog)
    assert [d.name for d in star.dimensions] == ["store_from_store", "store_to_store"]


def test_duplicate_grain_triple_rejected(retail_catalog, retail_graph):
    measures = select_measures(retail_catalog, [MeasureRequest("sales", "quantity", ("SUM",))])
    grain = GrainSpec(
        (
            GrainAttribute("stores", "store_name"),
            GrainAttribute("stores", "store_name"),
        )
    )
    with pytest.raises(DesignError, match="duplicate grain attribute"):
        build_star_schema(measures, grain, retail_graph, retail_catalog)


def test_hierarchy_override(retail_catalog, retail_graph, retail_project):
    design = retail_project.load_design()
    doc = {
        "fact_name": "sales",
        "measures": [{"table": "sales", "column": "quantity", "aggs": ["SUM"]}],
        "grain": [{"table": "stores", "column": "store_name"}],
        "hierarchy_overrides": {"store": [{"table": "stores", "column": "region"}]},
    }
    star = plan_star(retail_catalog, load_design(doc), retail_graph)
    assert star.dimensions[0].hierarchy.level_names() == ["store_name", "region"]
    assert design.fact_name == "sales"


def test_hierarchy_override_rejects_off_path_table(retail_catalog, retail_graph):
    doc = {
        "measures": [{"table": "sales", "column": "quantity", "aggs": ["SUM"]}],
        "grain": [{"table": "stores", "column": "store_name"}],
        "hierarchy_overrides": {"store": [{"table": "customers", "column": "customer_name"}]},
    }
    with pytest.raises(DesignError, match="not on its source path"):
        plan_star(retail_catalog, load_design(doc), retail_graph)


def test_emit_star_ddl_retail_shape(retail_star):
    ddl = emit_star_ddl(retail_star)
    assert ddl.count("CREATE TABLE") == 4
    reparsed = parse_ddl(ddl)
    assert validate_catalog(reparsed).ok
    graph = build_graph(reparsed)
    assert len(graph.nodes) == 4
    assert len(graph.edges) == 3
    assert {e.child for e in graph.edges} == {retail_star.fact.name}
    fact = reparsed.table(retail_star.fact.name)
    assert len(fact.foreign_keys) == 3
    assert fact.primary_key == tuple(sk for _, sk in retail_star.fact.foreign_keys)


def test_emit_star_ddl_minimal_star(retail_catalog, retail_graph):
    measures = select_measures(retail_catalog, [MeasureRequest("sales", "quantity", ("SUM",))])
    grain = GrainSpec((GrainAttribute("stores", "store_name"),))
    star = build_star_schema(measures, grain, retail_graph, retail_catalog)
    ddl = emit_star_ddl(star)
    assert ddl.count("CREATE TABLE") == 2
    reparsed = parse_ddl(ddl)
    assert {e.child for e in build_graph(reparsed).edges} == {"sales_fact"}


def test_emitted_ddl_deterministic(retail_catalog, retail_graph, retail_project):
    design = retail_project.load_design()
    a = emit_star_ddl(plan_star(retail_catalog, design, retail_graph))
    b = emit_star_ddl(plan_star(retail_catalog, design, retail_graph))
    assert a == b


def test_star_serialization_round_trip(retail_star):
    doc = json.loads(json.dumps(star_to_dict(retail_star)))
    assert star_from_dict(doc) == retail_star


def test_default_path_is_first(retail_star, retail_graph):
    for dim, attr in zip(retail_star.dimensions, retail_star.fact.grain.attributes):
        paths = find_paths(retail_graph, "sales", (attr.table, attr.column))
        assert dim.fact_path == paths[attr.path_index]
        assert attr.path_index == 0


def test_dimension_naming_rule():
    assert dimension_name_for("products", "product_name") == "product"
    assert dimension_name_for("stores", "store_name") == "store"
    assert dimension_name_for("sales", "sale_date") == "date"
    assert dimension_name_for("locations", "location_name") == "location"
    assert dimension_name_for("subscriptions", "subscription_date") == "date"
    assert dimension_name_for("fact_source", "happened_on") == "happened_on"


def test_star_shape_property_on_random_designs(tmp_path):
    rng = random.Random(21)
    for i in range(40):
        ddl, _, design = random_source(rng)
        catalog = parse_ddl(ddl)
        graph = build_graph(catalog)
        star = plan_star(catalog, load_design(design), graph)
        assert len(star.dimensions) == len(star.fact.grain.attributes)
        for dim, attr in zip(star.dimensions, star.fact.grain.attributes):
            assert dim.hierarchy.levels[0].derived or (
                dim.hierarchy.levels[0].column == attr.column
            )
        reparsed = parse_ddl(emit_star_ddl(star))
        assert validate_catalog(reparsed).ok
        regraph = build_graph(reparsed)
        assert {e.child for e in regraph.edges} == {star.fact.name}
        for table in reparsed.tables:
            if table.name != star.fact.name:
                assert table.foreign_keys == ()
