/**
 * Types mirroring the query service's wire formats, plus a small client.
 *
 * Measure values arrive as strings rendered by the engine and are displayed
 * verbatim; the client never does arithmetic on them. Responses are applied
 * in request order: a response that arrives after a newer request has
 * already been answered is dropped (monotonic sequence numbers).
 */

export interface DimensionMeta {
  name: string;
  levels: string[];
  member_counts: number[];
  members: string[][];
}

export interface MeasureMeta {
  name: string;
  agg: string;
}

export interface CubeMeta {
  dimensions: DimensionMeta[];
  measures: MeasureMeta[];
}

export interface GroupByEntry {
  dim: string;
  level: string;
}

export interface FilterEntry {
  dim: string;
  level: string;
  members: string[];
}

export interface QueryBody {
  group_by: GroupByEntry[];
  filters: FilterEntry[];
  measures: string[];
  pivot?: { rows: string[]; cols: string[] };
}

export interface GridPayload {
  row_levels: string[][];
  col_levels: string[][];
  measures: string[];
  row_headers: string[][];
  col_headers: string[][];
  cells: (string[] | null)[][];
  row_totals: string[][];
  col_totals: string[][];
  grand_total: string[];
}

export interface FlatRow {
  members: string[];
  values: string[];
}

export interface QueryResponse {
  grid?: GridPayload;
  rows?: FlatRow[];
  measures?: string[];
}

export class ApiRequestError extends Error {
  constructor(
    public code: string,
    message: string,
    public detail: string | null = null,
  ) {
    super(message);
  }
}

async function errorFrom(response: Response): Promise<ApiRequestError> {
  try {
    const body = (await response.json()) as { error?: { code?: string; message?: string; detail?: string | null } };
    const err = body.error ?? {};
    return new ApiRequestError(err.code ?? "http_error", err.message ?? response.statusText, err.detail ?? null);
  } catch {
    return new ApiRequestError("http_error", `${response.status} ${response.statusText}`);
  }
}

export class ApiClient {
  private seq = 0;
  private applied = 0;

  constructor(private base: string = "") {}

  async meta(): Promise<CubeMeta> {
    const response = await fetch(`${this.base}/api/meta`);
    if (!response.ok) throw await errorFrom(response);
    return (await response.json()) as CubeMeta;
  }

  /** Returns null when a newer request was already answered (stale). */
  async query(body: QueryBody): Promise<QueryResponse | null> {
    const id = ++this.seq;
    const response = await fetch(`${this.base}/api/query`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (id <= this.applied) return null;
    this.applied = id;
    if (!response.ok) throw await errorFrom(response);
    return (await response.json()) as QueryResponse;
  }
}
