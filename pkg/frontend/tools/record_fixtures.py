#!/usr/bin/env python3
"""Record real API responses for the explorer's contract tests.

Builds the bundled retail cube in-process and captures the exact
request/response pairs the UI's scripted flows produce. Run from the
repository root after changing the engine or the fixtures:

    python frontend/tools/record_fixtures.py
"""

from __future__ import annotations

import json
import shutil
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from starforge.project import fixture_dir, load_project
from starforge.service import CubeStore, create_app

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

SCRIPTED = [
    (
        "default",
        {
            "group_by": [{"dim": "date", "level": "year"}],
            "filters": [],
            "measures": ["quantity_sum"],
            "pivot": {"rows": ["date"], "cols": []},
        },
    ),
    (
        "product_by_category",
        {
            "group_by": [{"dim": "product", "level": "category_name"}],
            "filters": [],
            "measures": ["total_price_sum"],
            "pivot": {"rows": ["product"], "cols": []},
        },
    ),
    (
        "tea_products",
        {
            "group_by": [{"dim": "product", "level": "product_name"}],
            "filters": [{"dim": "product", "level": "category_name", "members": ["Tea"]}],
            "measures": ["total_price_sum"],
            "pivot": {"rows": ["product"], "cols": []},
        },
    ),
    (
        "product_by_day",
        {
            "group_by": [
                {"dim": "product", "level": "product_name"},
                {"dim": "date", "level": "day"},
            ],
            "filters": [],
            "measures": ["total_price_sum"],
            "pivot": {"rows": ["product"], "cols": ["date"]},
        },
    ),
    (
        "day_by_product",
        {
            "group_by": [
                {"dim": "date", "level": "day"},
                {"dim": "product", "level": "product_name"},
            ],
            "filters": [],
            "measures": ["total_price_sum"],
            "pivot": {"rows": ["date"], "cols": ["product"]},
        },
    ),
    (
        "unknown_member_error",
        {
            "group_by": [{"dim": "product", "level": "product_name"}],
            "filters": [{"dim": "product", "level": "product_name", "members": ["Chai"]}],
            "measures": ["total_price_sum"],
            "pivot": {"rows": ["product"], "cols": []},
        },
    ),
]


def main() -> None:
    with tempfile.TemporaryDirectory() as scratch:
        root = Path(scratch) / "mini_retail"
        shutil.copytree(fixture_dir("mini_retail"), root)
        project = load_project(root / "project.json")
        store = CubeStore.from_project(project)
        client = TestClient(create_app(store))

        OUT.mkdir(parents=True, exist_ok=True)
        meta = client.get("/api/meta").json()
        (OUT / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")

        recorded = []
        for name, request in SCRIPTED:
            response = client.post("/api/query", json=request)
            recorded.append(
                {
                    "name": name,
                    "request": request,
                    "status": response.status_code,
                    "response": response.json(),
                }
            )
        (OUT / "recorded.json").write_text(json.dumps(recorded, indent=2, sort_keys=True) + "\n")
        print(f"wrote {OUT / 'meta.json'} and {OUT / 'recorded.json'} ({len(recorded)} queries)")


if __name__ == "__main__":
    main()
