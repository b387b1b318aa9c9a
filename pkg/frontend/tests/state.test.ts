import { describe, expect, it } from "vitest";

import type { CubeMeta } from "../src/api.js";
import {
  buildQueryBody,
  canDrill,
  canRoll,
  clickMember,
  decodeState,
  defaultState,
  drill,
  encodeState,
  pivotSwap,
  removeFilter,
  roll,
  setAxis,
  toggleMeasure,
} from "../src/state.js";

import metaFixture from "./fixtures/meta.json";

const meta = metaFixture as CubeMeta;

describe("default state", () => {
  it("starts with the first dimension at its top level and one measure", () => {
    const state = defaultState(meta);
    expect(state.rows).toEqual(["date"]);
    expect(state.cols).toEqual([]);
    expect(state.levels).toEqual({ date: "year" });
    expect(state.measures).toEqual(["quantity_sum"]);
    expect(state.filters).toEqual([]);
  });
});

describe("drill and roll", () => {
  it("drill lowers a level; roll raises it back (inverse)", () => {
    const base = defaultState(meta);
    const down = drill(base, meta, "date");
    expect(down.levels["date"]).toBe("quarter");
    expect(roll(down, meta, "date")).toEqual(base);
  });

  it("an absent dimension enters at its top level", () => {
    const state = drill(defaultState(meta), meta, "product");
    expect(state.rows).toEqual(["date", "product"]);
    expect(state.levels["product"]).toBe("category_name");
  });

  it("roll is disabled at the top level, drill at the bottom", () => {
    const base = defaultState(meta); // date at year (top)
    expect(canRoll(base, meta, "date")).toBe(false);
    let state = base;
    for (let i = 0; i < 3; i++) state = drill(state, meta, "date");
    expect(state.levels["date"]).toBe("day");
    expect(canDrill(state, meta, "date")).toBe(false);
    expect(drill(state, meta, "date")).toEqual(state); // no-op at bottom
  });

  it("inactive dimensions can always be drilled into, never rolled", () => {
    const base = defaultState(meta);
    expect(canDrill(base, meta, "store")).toBe(true);
    expect(canRoll(base, meta, "store")).toBe(false);
  });
});

describe("axis assignment", () => {
  it("moves dimensions between rows, cols, and off", () => {
    let state = defaultState(meta);
    state = setAxis(state, meta, "product", "cols");
    expect(state.cols).toEqual(["product"]);
    expect(state.levels["product"]).toBe("category_name");
    state = setAxis(state, meta, "product", "rows");
    expect(state.rows).toEqual(["date", "product"]);
    expect(state.cols).toEqual([]);
    state = setAxis(state, meta, "product", "off");
    expect(state.rows).toEqual(["date"]);
    expect(state.levels["product"]).toBeUndefined();
  });

  it("pivot swap exchanges the axes", () => {
    let state = setAxis(defaultState(meta), meta, "product", "cols");
    const swapped = pivotSwap(state);
    expect(swapped.rows).toEqual(["product"]);
    expect(swapped.cols).toEqual(["date"]);
    expect(pivotSwap(swapped)).toEqual(state);
  });
});

describe("click-to-drill", () => {
  it("slices at the clicked level and descends one level", () => {
    let state = setAxis(setAxis(defaultState(meta), meta, "date", "off"), meta, "product", "rows");
    expect(state.levels["product"]).toBe("category_name");
    state = clickMember(state, meta, "product", "category_name", "Tea");
    expect(state.filters).toEqual([
      { dim: "product", level: "category_name", members: ["Tea"] },
    ]);
    expect(state.levels["product"]).toBe("product_name");
  });

  it("at the bottom level it only slices", () => {
    let state = setAxis(setAxis(defaultState(meta), meta, "date", "off"), meta, "product", "rows");
    state = drill(state, meta, "product");
    expect(state.levels["product"]).toBe("product_name");
    const clicked = clickMember(state, meta, "product", "product_name", "Espresso");
    expect(clicked.levels["product"]).toBe("product_name");
    expect(clicked.filters).toHaveLength(1);
  });

  it("breadcrumb removal restores the unfiltered query", () => {
    let state = defaultState(meta);
    state = clickMember(state, meta, "date", "year", "2021");
    expect(state.filters).toHaveLength(1);
    expect(removeFilter(state, 0).filters).toEqual([]);
  });
});

describe("measure toggling", () => {
  it("adds and removes measures but never empties the selection", () => {
    let state = defaultState(meta);
    state = toggleMeasure(state, meta, "total_price_sum");
    expect(state.measures).toEqual(["quantity_sum", "total_price_sum"]);
    state = toggleMeasure(state, meta, "quantity_sum");
    expect(state.measures).toEqual(["total_price_sum"]);
    expect(toggleMeasure(state, meta, "total_price_sum").measures).toEqual(["total_price_sum"]);
  });
});

describe("URL fragment round-trip", () => {
  it("encode then decode reproduces the exact state", () => {
    let state = defaultState(meta);
    state = setAxis(state, meta, "product", "cols");
    state = drill(state, meta, "product");
    state = clickMember(state, meta, "date", "year", "2021");
    state = toggleMeasure(state, meta, "total_price_avg");
    const decoded = decodeState("#" + encodeState(state), meta);
    expect(decoded).toEqual(state);
    expect(buildQueryBody(decoded!)).toEqual(buildQueryBody(state));
  });

  it("rejects fragments that do not fit the cube", () => {
    expect(decodeState("", meta)).toBeNull();
    expect(decodeState("#s=%7Bnot-json", meta)).toBeNull();
    const alien = encodeState({
      rows: ["flavor"],
      cols: [],
      levels: { flavor: "x" },
      filters: [],
      measures: ["quantity_sum"],
    });
    expect(decodeState("#" + alien, meta)).toBeNull();
    const badMeasure = encodeState({
      rows: ["date"],
      cols: [],
      levels: { date: "year" },
      filters: [],
      measures: ["bogus"],
    });
    expect(decodeState("#" + badMeasure, meta)).toBeNull();
  });

  it("survives members with URL-hostile characters", () => {
    const state = {
      rows: ["store"],
      cols: [],
      levels: { store: "store_name" },
      filters: [{ dim: "store", level: "store_name", members: ["S1 Sulaimani store"] }],
      measures: ["quantity_sum"],
    };
    expect(decodeState("#" + encodeState(state), meta)).toEqual(state);
  });
});
