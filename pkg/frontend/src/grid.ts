/**
 * Grid view model: the API's pivot payload merged with the full member
 * lists from cube metadata.
 *
 * The API only returns occupied headers (absent cells are absent, not
 * zero), while the explorer shows every member that passes the active
 * same-dimension filters -- a product with no sales still gets its row,
 * rendered as em-dashes. Every non-empty cell string comes verbatim from
 * the API payload.
 */

import type { CubeMeta, FilterEntry, GridPayload } from "./api.js";
import type { ExplorerState } from "./state.js";
import { dimension, levelIndex } from "./state.js";

export const EMPTY_CELL = "—"; // em dash, never 0

export interface GridView {
  rowLevels: { dim: string; level: string }[];
  colLevels: { dim: string; level: string }[];
  measures: string[];
  rowHeaders: string[][];
  colHeaders: string[][];
  cells: string[][][]; // [row][col] -> one string per measure
  rowTotals: string[][];
  colTotals: string[][];
  grandTotal: string[];
}

function compareTuples(a: string[], b: string[]): number {
  for (let i = 0; i < Math.min(a.length, b.length); i++) {
    const x = a[i] ?? "";
    const y = b[i] ?? "";
    if (x < y) return -1;
    if (x > y) return 1;
  }
  return a.length - b.length;
}

/** Distinct member values of one dimension at one level, honoring that
 * dimension's own filters (ancestor semantics via the meta member tuples).
 *
 * The reserved Unknown member (always the first tuple) is skipped here; it
 * only appears in a grid when the API response actually carries data for it.
 */
export function memberValuesAt(
  meta: CubeMeta,
  dimName: string,
  level: string,
  filters: FilterEntry[],
): string[] {
  const dim = dimension(meta, dimName);
  const target = levelIndex(dim, level);
  const own = filters.filter((f) => f.dim === dimName);
  const seen = new Set<string>();
  for (const tuple of dim.members.slice(1)) {
    let passes = true;
    for (const filter of own) {
      const at = tuple[levelIndex(dim, filter.level)];
      if (at === undefined || !filter.members.includes(at)) {
        passes = false;
        break;
      }
    }
    const value = tuple[target];
    if (passes && value !== undefined) seen.add(value);
  }
  return [...seen].sort((a, b) => (a < b ? -1 : a > b ? 1 : 0));
}

function axisHeaders(
  meta: CubeMeta,
  state: ExplorerState,
  dims: string[],
  occupied: string[][],
): string[][] {
  let combos: string[][] = [[]];
  for (const dim of dims) {
    const level = state.levels[dim];
    if (level === undefined) throw new Error(`no level recorded for ${dim}`);
    const values = memberValuesAt(meta, dim, level, state.filters);
    const next: string[][] = [];
    for (const combo of combos) {
      for (const value of values) next.push([...combo, value]);
    }
    combos = next;
  }
  // Union in every header the API reported, so no occupied cell (for
  // example one on the Unknown member) can ever be dropped.
  const present = new Set(combos.map((c) => JSON.stringify(c)));
  for (const header of occupied) {
    if (!present.has(JSON.stringify(header))) {
      combos.push(header);
      present.add(JSON.stringify(header));
    }
  }
  combos.sort(compareTuples);
  return combos;
}

export function buildGridView(
  meta: CubeMeta,
  state: ExplorerState,
  payload: GridPayload,
): GridView {
  const rowHeaders = axisHeaders(meta, state, state.rows, payload.row_headers);
  const colHeaders = axisHeaders(meta, state, state.cols, payload.col_headers);
  const measureCount = payload.measures.length;
  const empty = new Array<string>(measureCount).fill(EMPTY_CELL);

  const rowIndex = new Map<string, number>();
  payload.row_headers.forEach((h, i) => rowIndex.set(JSON.stringify(h), i));
  const colIndex = new Map<string, number>();
  payload.col_headers.forEach((h, i) => colIndex.set(JSON.stringify(h), i));

  const cells: string[][][] = [];
  const rowTotals: string[][] = [];
  for (const rowHeader of rowHeaders) {
    const r = rowIndex.get(JSON.stringify(rowHeader));
    const rendered: string[][] = [];
    for (const colHeader of colHeaders) {
      const c = colIndex.get(JSON.stringify(colHeader));
      const cell = r !== undefined && c !== undefined ? payload.cells[r]?.[c] : null;
      rendered.push(cell ? cell.map((v) => (v === "" ? EMPTY_CELL : v)) : [...empty]);
    }
    cells.push(rendered);
    const totals = r !== undefined ? payload.row_totals[r] : undefined;
    rowTotals.push(totals ? totals.map((v) => (v === "" ? EMPTY_CELL : v)) : [...empty]);
  }
  const colTotals = colHeaders.map((header) => {
    const c = colIndex.get(JSON.stringify(header));
    const totals = c !== undefined ? payload.col_totals[c] : undefined;
    return totals ? totals.map((v) => (v === "" ? EMPTY_CELL : v)) : [...empty];
  });

  return {
    rowLevels: payload.row_levels.map(([dim, level]) => ({ dim: dim ?? "", level: level ?? "" })),
    colLevels: payload.col_levels.map(([dim, level]) => ({ dim: dim ?? "", level: level ?? "" })),
    measures: payload.measures,
    rowHeaders,
    colHeaders,
    cells,
    rowTotals,
    colTotals,
    grandTotal: payload.grand_total.map((v) => (v === "" ? EMPTY_CELL : v)),
  };
}
