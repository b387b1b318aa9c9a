from __future__ import annotations

import random

import pytest

from starforge.cube import CubeQuery, Filter, pivot, render_measure
from starforge.errors import (
    AtBottomLevelError,
    AtTopLevelError,
    AxisMismatchError,
    QueryError,
    UnknownDimensionError,
    UnknownLevelError,
    UnknownMemberError,
)

from .oracles import oracle_query, oracle_render, random_cube, random_query


def q(group_by=(), filters=(), measures=()):
    return CubeQuery(group_by=tuple(group_by), filters=tuple(filters), measures=tuple(measures))


def test_query_by_product(retail_cube):
    result = retail_cube.query(q([("product", "product_name")], measures=["total_price_sum"]))
    assert result.as_mapping() == {("Espresso",): "5.00", ("Green Tea",): "30.00"}


def test_query_grand_total(retail_cube):
    result = retail_cube.query(q(measures=["total_price_sum"]))
    assert result.as_mapping() == {(): "35.00"}


def test_query_month_with_city_slice(retail_cube):
    query = q(
        [("date", "month")],
        filters=[Filter("store", "city", frozenset({"Sulaimani"}))],
        measures=["quantity_sum"],
    )
    assert retail_cube.query(query).as_mapping() == {("2021-01",): "4"}


def test_query_validation_errors(retail_cube):
    with pytest.raises(UnknownDimensionError):
        retail_cube.query(q([("flavor", "x")]))
    with pytest.raises(UnknownLevelError):
        retail_cube.query(q([("product", "brand")]))
    with pytest.raises(UnknownMemberError):
        retail_cube.query(
            q([("product", "product_name")], filters=[Filter("product", "product_name", frozenset({"Chai"}))])
        )
    with pytest.raises(QueryError):
        retail_cube.query(q([("product", "product_name"), ("product", "category_name")]))


def test_roll_up_product_to_category(retail_cube):
    base = q([("product", "product_name")], measures=["total_price_sum"])
    rolled = retail_cube.roll_up(base, "product")
    assert rolled.group_by == (("product", "category_name"),)
    assert retail_cube.query(rolled).as_mapping() == {("Coffee",): "5.00", ("Tea",): "30.00"}


def test_roll_up_day_to_month(retail_cube):
    base = q([("date", "day")], measures=["total_price_sum"])
    by_day = retail_cube.query(base).as_mapping()
    assert by_day == {("2021-01-01",): "15.00", ("2021-01-02",): "20.00"}
    rolled = retail_cube.roll_up(base, "date")
    assert retail_cube.query(rolled).as_mapping() == {("2021-01",): "35.00"}


def test_roll_up_errors(retail_cube):
    with pytest.raises(AtTopLevelError):
        retail_cube.roll_up(q([("product", "product_name")]), "date")
    top = q([("date", "year")])
    removed = retail_cube.roll_up(top, "date")
    assert removed.group_by == ()


def test_drill_down_inverts_roll_up(retail_cube):
    base = q([("date", "month"), ("product", "product_name")])
    assert retail_cube.drill_down(retail_cube.roll_up(base, "date"), "date") == base


def test_drill_down_errors_and_entry(retail_cube):
    with pytest.raises(AtBottomLevelError):
        retail_cube.drill_down(q([("date", "day")]), "date")
    entered = retail_cube.drill_down(q([("product", "product_name")]), "date")
    assert entered.group_by == (("product", "product_name"), ("date", "year"))


def test_slice_store_then_by_product(retail_cube):
    base = q([("product", "product_name")], measures=["quantity_sum"])
    sliced = retail_cube.slice(base, "store", "store_name", "S1 Sulaimani store")
    assert retail_cube.query(sliced).as_mapping() == {("Espresso",): "1", ("Green Tea",): "3"}


def test_slice_unknown_member_of_customer_dimension(retail_catalog, retail_graph, retail_data):
    # the retail design has no customer dimension; build one for this check
    from starforge.design import load_design, plan_star
    from starforge.etl import build_dimension_rows, build_fact_rows, load_cube

    doc = {
        "measures": [{"table": "sales", "column": "quantity", "aggs": ["SUM"]}],
        "grain": [{"table": "customers", "column": "customer_name"}],
    }
    star = plan_star(retail_catalog, load_design(doc), retail_graph)
    dims = {d.name: build_dimension_rows(d, retail_data) for d in star.dimensions}
    cube = load_cube(star, dims, build_fact_rows(star, retail_data, dims))
    sliced = cube.slice(q([("customer", "customer_name")]), "customer", "customer_name", "Unknown")
    assert cube.query(sliced).rows == ()  # fixture has no NULL customers


def test_contradictory_slices_empty(retail_cube):
    base = q([("product", "product_name")])
    s1 = retail_cube.slice(base, "store", "store_name", "S1 Sulaimani store")
    s2 = retail_cube.slice(s1, "store", "store_name", "S2 Erbil store")
    assert retail_cube.query(s2).rows == ()


def test_slice_rejects_unknown_member(retail_cube):
    with pytest.raises(UnknownMemberError):
        retail_cube.slice(q(), "store", "city", "Atlantis")


def test_dice_products_and_region(retail_cube):
    diced = retail_cube.dice(
        q([("store", "region")], measures=["total_price_sum"]),
        [
            Filter("product", "product_name", frozenset({"Green Tea", "Black Tea"})),
            Filter("store", "region", frozenset({"North"})),
        ],
    )
    assert retail_cube.query(diced).as_mapping() == {("North",): "30.00"}


def test_dice_full_member_set_is_identity(retail_cube):
    base = q([("product", "product_name")], measures=["quantity_sum"])
    all_stores = frozenset({"S1 Sulaimani store", "S2 Erbil store", "Unknown"})
    diced = retail_cube.dice(base, [Filter("store", "store_name", all_stores)])
    assert retail_cube.query(diced).rows == retail_cube.query(base).rows


def test_dice_singleton_equals_slice(retail_cube):
    base = q([("date", "day")], measures=["total_price_sum"])
    diced = retail_cube.dice(base, [Filter("product", "product_name", frozenset({"Espresso"}))])
    sliced = retail_cube.slice(base, "product", "product_name", "Espresso")
    assert retail_cube.query(diced).rows == retail_cube.query(sliced).rows


def test_pivot_product_by_day(retail_cube):
    result = retail_cube.query(
        q([("product", "product_name"), ("date", "day")], measures=["total_price_sum"])
    )
    grid = pivot(result, row_dims=["product"], col_dims=["date"])
    assert grid.row_headers == (("Espresso",), ("Green Tea",))
    assert grid.col_headers == (("2021-01-01",), ("2021-01-02",))
    assert grid.rendered_cell(1, 0) == ["10.00"]
    assert grid.rendered_cell(1, 1) == ["20.00"]
    assert grid.rendered_cell(0, 0) == ["5.00"]
    assert grid.rendered_cell(0, 1) is None  # absent, not zero
    rendered = grid.to_dict()
    assert rendered["grand_total"] == ["35.00"]
    assert rendered["row_totals"] == [["5.00"], ["30.00"]]
    assert rendered["col_totals"] == [["15.00"], ["20.00"]]


def test_pivot_transpose_symmetry(retail_cube):
    result = retail_cube.query(
        q([("product", "product_name"), ("date", "day")], measures=["total_price_sum"])
    )
    grid = pivot(result, ["product"], ["date"])
    flipped = pivot(result, ["date"], ["product"])
    assert flipped.row_headers == grid.col_headers
    assert flipped.col_headers == grid.row_headers
    for r in range(len(grid.row_headers)):
        for c in range(len(grid.col_headers)):
            assert grid.cells[r][c] == flipped.cells[c][r]
    assert grid.grand_total == flipped.grand_total


def test_pivot_all_dims_on_rows(retail_cube):
    result = retail_cube.query(q([("product", "product_name")], measures=["quantity_sum"]))
    grid = pivot(result, ["product"], [])
    assert grid.col_headers == ((),)
    assert [h[0] for h in grid.row_headers] == ["Espresso", "Green Tea"]
    flat = retail_cube.query(q([("product", "product_name")], measures=["quantity_sum"]))
    assert [grid.rendered_cell(r, 0) for r in range(2)] == [
        [value for value in values] for _, values in flat.rendered_rows()
    ]


def test_pivot_axis_mismatch(retail_cube):
    result = retail_cube.query(q([("product", "product_name")]))
    with pytest.raises(AxisMismatchError):
        pivot(result, ["product"], ["date"])
    with pytest.raises(AxisMismatchError):
        pivot(result, [], [])


def test_avg_is_sum_over_count(retail_cube):
    result = retail_cube.query(q([("product", "product_name")], measures=["total_price_avg"]))
    # Green Tea: (10 + 15 + 5) / 3, not mean of per-day means
    assert result.as_mapping() == {("Espresso",): "5.0000", ("Green Tea",): "10.0000"}


def test_query_does_not_mutate_cube(retail_cube):
    before = dict(retail_cube.cells)
    query = q([("date", "month")], filters=[Filter("store", "region", frozenset({"North"}))])
    first = retail_cube.query(query)
    second = retail_cube.query(query)
    assert first == second
    assert retail_cube.cells == before


def test_random_queries_match_oracle():
    rng = random.Random(99)
    checked = 0
    for _ in range(150):
        cube, level_values = random_cube(rng)
        for _ in range(8):
            query = random_query(rng, cube)
            result = cube.query(query)
            expected = oracle_query(
                cube.star,
                level_values,
                cube.cells,
                list(query.group_by),
                [(f.dimension, f.level, set(f.members)) for f in query.filters],
                list(query.measures) if query.measures else None,
            )
            got = {row.members: row.accumulators for row in result.rows}
            assert got == {k: tuple(v) for k, v in expected.items()}
            keys = [row.members for row in result.rows]
            assert keys == sorted(keys)
            for row in result.rows:
                for measure, acc in zip(result.measures, row.accumulators):
                    assert render_measure(measure, acc) == oracle_render(measure, acc)
            checked += 1
    assert checked == 150 * 8
