/**
 * DOM wiring: pickers, grid table, breadcrumbs, URL-fragment sync.
 *
 * All decision logic lives in state.ts/grid.ts (unit-tested); this file only
 * reflects state into the DOM and user events back into state transitions.
 */

import { ApiClient, ApiRequestError } from "./api.js";
import type { CubeMeta } from "./api.js";
import { EMPTY_CELL, buildGridView } from "./grid.js";
import type { GridView } from "./grid.js";
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
} from "./state.js";
import type { Axis, ExplorerState } from "./state.js";

const client = new ApiClient();

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

class Explorer {
  private state: ExplorerState;

  constructor(private meta: CubeMeta) {
    this.state = decodeState(window.location.hash, meta) ?? defaultState(meta);
    window.addEventListener("hashchange", () => {
      const decoded = decodeState(window.location.hash, this.meta);
      if (decoded) {
        this.state = decoded;
        void this.refresh(false);
      }
    });
  }

  start(): void {
    void this.refresh(true);
  }

  private apply(next: ExplorerState): void {
    this.state = next;
    void this.refresh(true);
  }

  private async refresh(pushUrl: boolean): Promise<void> {
    this.renderControls();
    if (pushUrl) {
      history.replaceState(null, "", "#" + encodeState(this.state));
    }
    try {
      const response = await client.query(buildQueryBody(this.state));
      if (response === null) return; // superseded by a newer action
      hideError();
      if (response.grid) {
        this.renderGrid(buildGridView(this.meta, this.state, response.grid));
      }
    } catch (error) {
      showError(error, () => void this.refresh(false));
    }
  }

  private renderControls(): void {
    const dims = byId("dimensions");
    dims.replaceChildren();
    for (const dim of this.meta.dimensions) {
      const active = [...this.state.rows, ...this.state.cols].includes(dim.name);
      const box = el("div", "dim-card" + (active ? " active" : ""));
      const title = el("div", "dim-name", dim.name);
      box.appendChild(title);

      const level = this.state.levels[dim.name];
      box.appendChild(el("div", "dim-level", active && level ? `level: ${level}` : "not shown"));

      const axisRow = el("div", "axis-row");
      for (const axis of ["rows", "cols", "off"] as Axis[]) {
        const button = el("button", undefined, axis);
        const current: Axis = this.state.rows.includes(dim.name)
          ? "rows"
          : this.state.cols.includes(dim.name)
            ? "cols"
            : "off";
        if (current === axis) button.classList.add("selected");
        button.addEventListener("click", () => this.apply(setAxis(this.state, this.meta, dim.name, axis)));
        axisRow.appendChild(button);
      }
      box.appendChild(axisRow);

      const opsRow = el("div", "ops-row");
      const drillButton = el("button", undefined, "drill");
      drillButton.disabled = !canDrill(this.state, this.meta, dim.name);
      drillButton.addEventListener("click", () => this.apply(drill(this.state, this.meta, dim.name)));
      const rollButton = el("button", undefined, "roll");
      rollButton.disabled = !canRoll(this.state, this.meta, dim.name);
      rollButton.addEventListener("click", () => this.apply(roll(this.state, this.meta, dim.name)));
      opsRow.append(drillButton, rollButton);
      box.appendChild(opsRow);
      dims.appendChild(box);
    }

    const measures = byId("measures");
    measures.replaceChildren();
    for (const measure of this.meta.measures) {
      const label = el("label", "measure");
      const input = el("input");
      input.type = "checkbox";
      input.checked = this.state.measures.includes(measure.name);
      input.disabled = input.checked && this.state.measures.length === 1;
      input.addEventListener("change", () => this.apply(toggleMeasure(this.state, this.meta, measure.name)));
      label.append(input, el("span", undefined, ` ${measure.name} (${measure.agg})`));
      measures.appendChild(label);
    }

    const swap = byId("swap") as HTMLButtonElement;
    swap.onclick = () => this.apply(pivotSwap(this.state));

    const crumbs = byId("breadcrumbs");
    crumbs.replaceChildren();
    this.state.filters.forEach((filter, index) => {
      const crumb = el("span", "crumb");
      crumb.appendChild(
        el("span", undefined, `${filter.dim}.${filter.level} = ${filter.members.join(" | ")}`),
      );
      const close = el("button", "crumb-close", "x");
      close.title = "remove this slice";
      close.addEventListener("click", () => this.apply(removeFilter(this.state, index)));
      crumb.appendChild(close);
      crumbs.appendChild(crumb);
    });
  }

  private renderGrid(view: GridView): void {
    const host = byId("grid");
    host.replaceChildren();
    const table = el("table", "grid");

    const head = el("thead");
    const headerRow = el("tr");
    for (const rl of view.rowLevels) headerRow.appendChild(el("th", "axis-label", `${rl.dim}: ${rl.level}`));
    if (view.colHeaders.length === 1 && view.colHeaders[0]?.length === 0) {
      headerRow.appendChild(el("th", undefined, view.measures.join(" / ")));
    } else {
      for (const header of view.colHeaders) {
        const th = el("th", "col-member", header.join(" / "));
        th.addEventListener("click", () => this.clickAxisMember("cols", header));
        headerRow.appendChild(th);
      }
    }
    headerRow.appendChild(el("th", "total-label", "total"));
    head.appendChild(headerRow);
    table.appendChild(head);

    const body = el("tbody");
    view.rowHeaders.forEach((header, r) => {
      const tr = el("tr");
      header.forEach((value) => {
        const th = el("th", "row-member", value);
        th.addEventListener("click", () => this.clickAxisMember("rows", header));
        tr.appendChild(th);
      });
      if (header.length === 0) tr.appendChild(el("th", "row-member", "all"));
      view.cells[r]?.forEach((cell) => tr.appendChild(el("td", "cell", cell.join(" / "))));
      tr.appendChild(el("td", "cell total", (view.rowTotals[r] ?? []).join(" / ")));
      body.appendChild(tr);
    });

    const totals = el("tr", "totals-row");
    for (let i = 0; i < Math.max(view.rowLevels.length, 1); i++) totals.appendChild(el("th", "total-label", i === 0 ? "total" : ""));
    view.colTotals.forEach((t) => totals.appendChild(el("td", "cell total", t.join(" / "))));
    totals.appendChild(el("td", "cell grand", view.grandTotal.join(" / ")));
    body.appendChild(totals);
    table.appendChild(body);
    host.appendChild(table);
  }

  private clickAxisMember(axis: "rows" | "cols", header: string[]): void {
    const dims = axis === "rows" ? this.state.rows : this.state.cols;
    // drill into the innermost (last) dimension of the clicked tuple
    const dim = dims[dims.length - 1];
    const member = header[header.length - 1];
    const level = dim !== undefined ? this.state.levels[dim] : undefined;
    if (dim === undefined || member === undefined || level === undefined) return;
    if (member === EMPTY_CELL) return;
    this.apply(clickMember(this.state, this.meta, dim, level, member));
  }
}

function showError(error: unknown, retry: () => void): void {
  const banner = byId("error");
  banner.replaceChildren();
  const message =
    error instanceof ApiRequestError
      ? `${error.code}: ${error.message}`
      : error instanceof Error
        ? error.message
        : String(error);
  banner.appendChild(el("span", undefined, message));
  const button = el("button", undefined, "retry");
  button.addEventListener("click", retry);
  banner.appendChild(button);
  banner.classList.remove("hidden");
}

function hideError(): void {
  byId("error").classList.add("hidden");
}

async function boot(): Promise<void> {
  try {
    const meta = await client.meta();
    const queryButton = byId("swap") as HTMLButtonElement;
    queryButton.disabled = meta.dimensions.length === 0;
    new Explorer(meta).start();
  } catch (error) {
    showError(error, () => void boot());
  }
}

void boot();
