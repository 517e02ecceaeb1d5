/** Typed client for the workbench API. Catalog searches pass an
 * AbortSignal so superseded requests can be cancelled. */

import type {
  ApiError,
  AssistantOutcome,
  CatalogResponse,
  HistoryEntry,
  MetaResponse,
  QueryResponse,
  ResultRow,
} from "./types.js";

export class QueryFailed extends Error {
  constructor(public detail: ApiError, public status: number) {
    super(detail.error);
  }
}

export class ApiClient {
  constructor(private base: string = "") {}

  private async get<T>(path: string, signal?: AbortSignal): Promise<T> {
    const resp = await fetch(this.base + path, { signal });
    if (!resp.ok) throw new QueryFailed(await safeJson(resp), resp.status);
    return resp.json() as Promise<T>;
  }

  private async send<T>(method: string, path: string, body: unknown): Promise<T> {
    const resp = await fetch(this.base + path, {
      method,
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!resp.ok) throw new QueryFailed(await safeJson(resp), resp.status);
    return resp.json() as Promise<T>;
  }

  meta(): Promise<MetaResponse> {
    return this.get("/api/meta");
  }

  searchCatalog(query: string, scope: string, signal?: AbortSignal): Promise<CatalogResponse> {
    const params = new URLSearchParams({ query });
    if (scope) params.set("scope", scope);
    return this.get(`/api/catalog?${params}`, signal);
  }

  runQuery(query: string): Promise<QueryResponse> {
    return this.send("POST", "/api/query", { query });
  }

  moreRows(cursor: string): Promise<{ rows: ResultRow[]; cursor: string | null }> {
    return this.get(`/api/query/rows?cursor=${encodeURIComponent(cursor)}`);
  }

  history(): Promise<{ history: HistoryEntry[] }> {
    return this.get("/api/store/history");
  }

  saveQuery(name: string, query: string, description = ""): Promise<unknown> {
    return this.send("PUT", `/api/store/queries/${encodeURIComponent(name)}`,
      { query, description });
  }

  assistant(flow: "generate" | "explain" | "fix",
            payload: Record<string, string>): Promise<AssistantOutcome> {
    return this.send("POST", `/api/assistant/${flow}`, payload);
  }
}

async function safeJson(resp: Response): Promise<ApiError> {
  try {
    return (await resp.json()) as ApiError;
  } catch {
    return { error: `request failed with status ${resp.status}` };
  }
}
