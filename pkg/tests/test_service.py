from __future__ import annotations

import json
import random
import threading

import pytest
from fastapi.testclient import TestClient

from starforge.cube import pivot
from starforge.project import load_project
from starforge.service import CubeStore, create_app, parse_query_body

from .conftest import copy_fixture_project
from .oracles import random_query


@pytest.fixture()
def retail_service(tmp_path):
    config = copy_fixture_project(tmp_path)
    project = load_project(config)
    store = CubeStore.from_project(project)
    app = create_app(store)
    return TestClient(app), store, project


def test_meta_lists_dimensions_and_measures(retail_service):
    client, _, _ = retail_service
    body = client.get("/api/meta").json()
    assert [d["name"] for d in body["dimensions"]] == ["date", "product", "store"]
    date_dim = body["dimensions"][0]
    assert date_dim["levels"] == ["day", "month", "quarter", "year"]
    assert date_dim["member_counts"] == [2, 1, 1, 1]
    product_dim = body["dimensions"][1]
    assert product_dim["members"] == [
        ["Unknown", "Unknown"],
        ["Green Tea", "Tea"],
        ["Espresso", "Coffee"],
        ["Black Tea", "Tea"],
    ]
    assert {m["name"] for m in body["measures"]} == {
        "quantity_sum", "total_price_sum", "total_price_avg",
    }


def test_query_rows_by_product(retail_service):
    client, _, _ = retail_service
    response = client.post(
        "/api/query",
        json={
            "group_by": [{"dim": "product", "level": "product_name"}],
            "measures": ["total_price_sum"],
        },
    )
    assert response.status_code == 200
    assert response.json()["rows"] == [
        {"members": ["Espresso"], "values": ["5.00"]},
        {"members": ["Green Tea"], "values": ["30.00"]},
    ]


def test_query_unknown_level_is_400(retail_service):
    client, _, _ = retail_service
    response = client.post(
        "/api/query", json={"group_by": [{"dim": "product", "level": "brand"}]}
    )
    assert response.status_code == 400
    assert response.json()["error"]["code"] == "unknown_level"


def test_query_unknown_member_is_404(retail_service):
    client, _, _ = retail_service
    response = client.post(
        "/api/query",
        json={
            "group_by": [{"dim": "product", "level": "product_name"}],
            "filters": [{"dim": "product", "level": "product_name", "members": ["Chai"]}],
        },
    )
    assert response.status_code == 404
    assert response.json()["error"]["code"] == "unknown_member"


def test_query_malformed_body_is_400(retail_service):
    client, _, _ = retail_service
    response = client.post("/api/query", json={"group_by": [{"dim": "product"}]})
    assert response.status_code == 400
    assert response.json()["error"]["code"] == "bad_query"
    response = client.post("/api/query", json={"bogus": 1})
    assert response.status_code == 400


def test_query_pivot_grid(retail_service):
    client, _, _ = retail_service
    response = client.post(
        "/api/query",
        json={
            "group_by": [
                {"dim": "product", "level": "product_name"},
                {"dim": "date", "level": "day"},
            ],
            "measures": ["total_price_sum"],
            "pivot": {"rows": ["product"], "cols": ["date"]},
        },
    )
    assert response.status_code == 200
    grid = response.json()["grid"]
    assert grid["row_headers"] == [["Espresso"], ["Green Tea"]]
    assert grid["cells"][0][1] is None
    assert grid["grand_total"] == ["35.00"]


def test_api_equals_in_process_engine_on_scripted_suite(retail_service):
    client, store, _ = retail_service
    cube = store.cube
    rng = random.Random(4242)
    n_queries = 0
    while n_queries < 60:
        query = random_query(rng, cube)
        body = {
            "group_by": [{"dim": d, "level": l} for d, l in query.group_by],
            "filters": [
                {"dim": f.dimension, "level": f.level, "members": sorted(f.members)}
                for f in query.filters
            ],
            "measures": list(query.measures),
        }
        response = client.post("/api/query", json=body)
        assert response.status_code == 200
        expected = cube.query(query)
        assert response.json()["rows"] == [
            {"members": list(members), "values": values}
            for members, values in expected.rendered_rows()
        ]
        n_queries += 1
    assert n_queries >= 50


def test_rebuild_swaps_cube(retail_service, tmp_path):
    client, store, project = retail_service
    before = store.cube
    sales = project.data_dir / "sales.csv"
    original = sales.read_text()
    sales.write_text(original + "5,2021-01-03,S2,P3,C2,4,20.00\n")
    response = client.post("/api/admin/rebuild")
    assert response.status_code == 200
    assert response.json() == {"status": "rebuilt", "base_cells": 5}
    assert store.cube is not before
    rows = client.post(
        "/api/query",
        json={"group_by": [], "measures": ["total_price_sum"]},
    ).json()["rows"]
    assert rows == [{"members": [], "values": ["55.00"]}]


def test_concurrent_rebuild_gets_409(retail_service):
    client, store, _ = retail_service
    assert store._rebuild_lock.acquire(blocking=False)
    try:
        response = client.post("/api/admin/rebuild")
        assert response.status_code == 409
        assert response.json()["error"]["code"] == "rebuild_in_progress"
    finally:
        store._rebuild_lock.release()


def test_index_serves_fallback_page(retail_service):
    client, _, _ = retail_service
    response = client.get("/")
    assert response.status_code == 200
    assert "starforge" in response.text


def test_index_serves_static_assets(tmp_path):
    config = copy_fixture_project(tmp_path)
    store = CubeStore.from_project(load_project(config))
    static = tmp_path / "dist"
    static.mkdir()
    (static / "index.html").write_text("<html><body>explorer</body></html>")
    (static / "app.js").write_text("console.log('hi')")
    client = TestClient(create_app(store, static_dir=static))
    assert "explorer" in client.get("/").text
    assert client.get("/app.js").status_code == 200
    assert client.get("/api/meta").status_code == 200  # API wins over the mount
    assert client.get("/../project.json").status_code in (404, 400)
    assert client.get("/missing.js").status_code == 404


def test_parse_query_body_rejects_non_lists():
    from starforge.errors import QueryError

    with pytest.raises(QueryError):
        parse_query_body({"group_by": "product"})
    with pytest.raises(QueryError):
        parse_query_body({"filters": [{"dim": "d", "level": "l", "members": []}]})


def test_readers_never_observe_mixed_cube(tmp_path):
    """8 concurrent readers across 10 rebuilds alternating two datasets."""
    config = copy_fixture_project(tmp_path)
    project = load_project(config)
    sales = project.data_dir / "sales.csv"
    variant_a = sales.read_text()
    variant_b = variant_a.replace("2,10.00", "20,100.00").replace("3,15.00", "30,150.00")

    store = CubeStore.from_project(project)
    app = create_app(store)
    query_body = {
        "group_by": [
            {"dim": "date", "level": "day"},
            {"dim": "product", "level": "product_name"},
            {"dim": "store", "level": "store_name"},
        ],
        "measures": ["quantity_sum", "total_price_sum"],
    }

    with TestClient(app) as seed_client:
        result_a = seed_client.post("/api/query", json=query_body).json()
        sales.write_text(variant_b)
        seed_client.post("/api/admin/rebuild")
        result_b = seed_client.post("/api/query", json=query_body).json()
    assert result_a != result_b

    stop = threading.Event()
    failures: list[str] = []

    def reader():
        client = TestClient(app)
        while not stop.is_set():
            got = client.post("/api/query", json=query_body).json()
            if got != result_a and got != result_b:
                failures.append(json.dumps(got))
                return

    threads = [threading.Thread(target=reader) for _ in range(8)]
    for t in threads:
        t.start()
    writer = TestClient(app)
    for i in range(10):
        sales.write_text(variant_a if i % 2 == 0 else variant_b)
        response = writer.post("/api/admin/rebuild")
        assert response.status_code in (200, 409)
    stop.set()
    for t in threads:
        t.join(timeout=30)
    assert failures == []
