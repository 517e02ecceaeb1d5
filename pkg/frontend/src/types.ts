/** Shapes of the /api contract. The workbench performs no query parsing or
 * evaluation of its own; everything semantic arrives in these payloads. */

export interface CatalogEntry {
  name: string;
  id: string | null;
  scope: string;
  kind: string;
  count: number;
}

export interface CatalogResponse {
  entries: CatalogEntry[];
  truncated: boolean;
}

export interface Span {
  start: number;
  end: number;
}

export interface ApiError {
  error: string;
  span?: Span;
  expected?: string[];
}

export interface NumericSummary {
  type: "numeric";
  min: number;
  q1: number;
  median: number;
  q3: number;
  max: number;
  mean: number;
  histogram: { counts: number[]; edges: number[] };
}

export interface CategoricalSummary {
  type: "categorical";
  top: { value: string; count: number }[];
  other_count: number;
  distinct_count: number;
}

export interface TimestampSummary {
  type: "timestamp";
  min: string;
  max: string;
}

export type ValueSummary = NumericSummary | CategoricalSummary | TimestampSummary;

export interface Profile {
  kind: string;
  row_count: number;
  trajectory_count: number;
  rows_per_trajectory: { min: number; median: number; max: number };
  missing_fraction: number;
  value_summary: ValueSummary | null;
}

export interface SubqueryProfile {
  span: [number, number];
  label: string;
  profile: Profile;
  plan: string | null;
}

export interface ProfileBundle {
  final: Profile;
  subqueries: SubqueryProfile[];
  diagnostics: string[];
}

export type ResultRow = Record<string, string>;

export interface QueryResponse {
  result: {
    kind: string;
    row_count: number;
    rows: ResultRow[];
    cursor: string | null;
  };
  profile: ProfileBundle;
  diagnostics: string[];
}

export interface CandidateQuery {
  text: string;
  valid: boolean;
  error: string | null;
}

export interface AssistantOutcome {
  queries: CandidateQuery[];
  prose: string;
  transcript: { role: string; content: string }[];
  tool_call_count: number;
  diagnostics: string[];
}

export interface HistoryEntry {
  query: string;
  ran_at: string;
  ok: boolean;
}

export interface MetaResponse {
  version: string;
  scopes: string[];
  trajectory_count: number;
  language: {
    keywords: string[];
    aggregation_functions: string[];
    builtin_functions: string[];
    units: string[];
    markers: string[];
  };
  assistant_available: boolean;
}
