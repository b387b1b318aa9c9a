/**
 * Explorer state and its pure transitions.
 *
 * The state is exactly one cube query plus an axis assignment; every user
 * action maps to one new state and therefore one API query. The whole state
 * also serializes into the URL fragment so any view is a shareable link.
 */

import type { CubeMeta, DimensionMeta, FilterEntry, QueryBody } from "./api.js";

export interface ExplorerState {
  rows: string[];
  cols: string[];
  levels: Record<string, string>;
  filters: FilterEntry[];
  measures: string[];
}

export function dimension(meta: CubeMeta, name: string): DimensionMeta {
  const dim = meta.dimensions.find((d) => d.name === name);
  if (!dim) throw new Error(`unknown dimension ${name}`);
  return dim;
}

export function levelIndex(dim: DimensionMeta, level: string): number {
  const index = dim.levels.indexOf(level);
  if (index < 0) throw new Error(`dimension ${dim.name} has no level ${level}`);
  return index;
}

function topLevel(dim: DimensionMeta): string {
  const top = dim.levels[dim.levels.length - 1];
  if (top === undefined) throw new Error(`dimension ${dim.name} has no levels`);
  return top;
}

export function defaultState(meta: CubeMeta): ExplorerState {
  const first = meta.dimensions[0];
  const firstMeasure = meta.measures[0];
  return {
    rows: first ? [first.name] : [],
    cols: [],
    levels: first ? { [first.name]: topLevel(first) } : {},
    filters: [],
    measures: firstMeasure ? [firstMeasure.name] : [],
  };
}

export function activeDims(state: ExplorerState): string[] {
  return [...state.rows, ...state.cols];
}

export function canDrill(state: ExplorerState, meta: CubeMeta, name: string): boolean {
  if (!activeDims(state).includes(name)) return true; // enters at its top level
  const dim = dimension(meta, name);
  const level = state.levels[name];
  return level !== undefined && levelIndex(dim, level) > 0;
}

export function canRoll(state: ExplorerState, meta: CubeMeta, name: string): boolean {
  if (!activeDims(state).includes(name)) return false;
  const dim = dimension(meta, name);
  const level = state.levels[name];
  return level !== undefined && levelIndex(dim, level) < dim.levels.length - 1;
}

export function drill(state: ExplorerState, meta: CubeMeta, name: string): ExplorerState {
  const dim = dimension(meta, name);
  if (!activeDims(state).includes(name)) {
    return {
      ...state,
      rows: [...state.rows, name],
      levels: { ...state.levels, [name]: topLevel(dim) },
    };
  }
  const level = state.levels[name];
  if (level === undefined) return state;
  const index = levelIndex(dim, level);
  if (index === 0) return state;
  const lower = dim.levels[index - 1];
  if (lower === undefined) return state;
  return { ...state, levels: { ...state.levels, [name]: lower } };
}

export function roll(state: ExplorerState, meta: CubeMeta, name: string): ExplorerState {
  if (!activeDims(state).includes(name)) return state;
  const dim = dimension(meta, name);
  const level = state.levels[name];
  if (level === undefined) return state;
  const index = levelIndex(dim, level);
  if (index >= dim.levels.length - 1) return state; // control is disabled at the top
  const higher = dim.levels[index + 1];
  if (higher === undefined) return state;
  return { ...state, levels: { ...state.levels, [name]: higher } };
}

export type Axis = "rows" | "cols" | "off";

export function setAxis(state: ExplorerState, meta: CubeMeta, name: string, axis: Axis): ExplorerState {
  const dim = dimension(meta, name);
  const rows = state.rows.filter((d) => d !== name);
  const cols = state.cols.filter((d) => d !== name);
  const levels = { ...state.levels };
  if (axis === "off") {
    delete levels[name];
    return { ...state, rows, cols, levels };
  }
  if (levels[name] === undefined) levels[name] = topLevel(dim);
  if (axis === "rows") rows.push(name);
  else cols.push(name);
  return { ...state, rows, cols, levels };
}

/**
 * Click on a rendered member: slice to it at the clicked level, then descend
 * one level within it (stay put when already at the lowest level).
 */
export function clickMember(
  state: ExplorerState,
  meta: CubeMeta,
  name: string,
  level: string,
  member: string,
): ExplorerState {
  const dim = dimension(meta, name);
  const filters = [...state.filters, { dim: name, level, members: [member] }];
  const index = levelIndex(dim, level);
  const levels = { ...state.levels };
  if (index > 0 && activeDims(state).includes(name)) {
    const lower = dim.levels[index - 1];
    if (lower !== undefined) levels[name] = lower;
  }
  return { ...state, filters, levels };
}

export function removeFilter(state: ExplorerState, index: number): ExplorerState {
  return { ...state, filters: state.filters.filter((_, i) => i !== index) };
}

export function pivotSwap(state: ExplorerState): ExplorerState {
  return { ...state, rows: state.cols, cols: state.rows };
}

export function toggleMeasure(state: ExplorerState, meta: CubeMeta, name: string): ExplorerState {
  if (!meta.measures.some((m) => m.name === name)) return state;
  if (state.measures.includes(name)) {
    if (state.measures.length === 1) return state; // keep at least one
    return { ...state, measures: state.measures.filter((m) => m !== name) };
  }
  const ordered = meta.measures.map((m) => m.name).filter(
    (m) => state.measures.includes(m) || m === name,
  );
  return { ...state, measures: ordered };
}

export function buildQueryBody(state: ExplorerState): QueryBody {
  const group_by = activeDims(state).map((dim) => {
    const level = state.levels[dim];
    if (level === undefined) throw new Error(`no level recorded for ${dim}`);
    return { dim, level };
  });
  return {
    group_by,
    filters: state.filters.map((f) => ({ dim: f.dim, level: f.level, members: [...f.members] })),
    measures: [...state.measures],
    pivot: { rows: [...state.rows], cols: [...state.cols] },
  };
}

// --- URL-fragment codec ----------------------------------------------------

interface CompactState {
  r: string[];
  c: string[];
  l: Record<string, string>;
  f: [string, string, string[]][];
  m: string[];
}

export function encodeState(state: ExplorerState): string {
  const compact: CompactState = {
    r: state.rows,
    c: state.cols,
    l: state.levels,
    f: state.filters.map((f) => [f.dim, f.level, f.members]),
    m: state.measures,
  };
  return "s=" + encodeURIComponent(JSON.stringify(compact));
}

/** Decode a fragment; returns null when absent or not valid for this cube. */
export function decodeState(fragment: string, meta: CubeMeta): ExplorerState | null {
  const raw = fragment.replace(/^#/, "");
  if (!raw.startsWith("s=")) return null;
  let compact: CompactState;
  try {
    compact = JSON.parse(decodeURIComponent(raw.slice(2))) as CompactState;
  } catch {
    return null;
  }
  if (!compact || !Array.isArray(compact.r) || !Array.isArray(compact.c)) return null;
  try {
    const state: ExplorerState = {
      rows: compact.r,
      cols: compact.c,
      levels: compact.l ?? {},
      filters: (compact.f ?? []).map(([dim, level, members]) => ({ dim, level, members })),
      measures: compact.m ?? [],
    };
    for (const name of activeDims(state)) {
      const dim = dimension(meta, name);
      const level = state.levels[name];
      if (level === undefined) return null;
      levelIndex(dim, level);
    }
    for (const filter of state.filters) {
      levelIndex(dimension(meta, filter.dim), filter.level);
      if (!Array.isArray(filter.members) || filter.members.length === 0) return null;
    }
    for (const measure of state.measures) {
      if (!meta.measures.some((m) => m.name === measure)) return null;
    }
    if (state.measures.length === 0) return null;
    return state;
  } catch {
    return null;
  }
}
