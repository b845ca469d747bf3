/**
 * API payload types and runtime guards.
 *
 * Every number shown in the UI comes out of one of these parsers; nothing
 * is computed client-side beyond pixel placement. Unknown fields are
 * ignored, missing required fields throw SchemaError so the caller can
 * show an explicit error view instead of NaN-riddled charts.
 */

export class SchemaError extends Error {
  constructor(payload: string, field: string) {
    super(`${payload}: missing or invalid field "${field}"`);
    this.name = "SchemaError";
  }
}

export interface ProjectionPayload {
  country: string;
  scenario: string;
  start_date: string;
  horizon: number;
  params_digest: string;
  daily_affected: number[];
  daily_deaths: number[];
  cumulative_affected: number[];
  cumulative_deaths: number[];
}

export interface CorrelationCell {
  coefficient: number;
  p_value: number | null;
  n: number;
  significant: boolean | null;
}

export interface CountryCorrelations {
  country: string;
  pearson: CorrelationCell;
  spearman: CorrelationCell;
  kendall: CorrelationCell;
}

export interface CorrelationsPayload {
  pair: string;
  alpha: number;
  lag_days: number;
  per_country: CountryCorrelations[];
}

export interface CountryInfo {
  country_code: string;
  name: string;
  population: number | null;
  area: number | null;
}

export interface CountsPayload {
  affected: number;
  dead: number;
  recovered: number;
  active: number;
}

export interface LivePayload {
  scope: string;
  as_of: string | null;
  stale: boolean;
  source: string;
  counts: CountsPayload;
}

export interface ErrorPayload {
  reason: string;
  detail: string | null;
}

function isRecord(v: unknown): v is Record<string, unknown> {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}

function str(doc: Record<string, unknown>, payload: string, field: string): string {
  const v = doc[field];
  if (typeof v !== "string") throw new SchemaError(payload, field);
  return v;
}

function num(doc: Record<string, unknown>, payload: string, field: string): number {
  const v = doc[field];
  if (typeof v !== "number" || !Number.isFinite(v)) throw new SchemaError(payload, field);
  return v;
}

function numberArray(doc: Record<string, unknown>, payload: string, field: string): number[] {
  const v = doc[field];
  if (!Array.isArray(v) || v.some((x) => typeof x !== "number")) {
    throw new SchemaError(payload, field);
  }
  return v as number[];
}

function optNum(doc: Record<string, unknown>, field: string): number | null {
  const v = doc[field];
  return typeof v === "number" && Number.isFinite(v) ? v : null;
}

export function parseProjection(raw: unknown): ProjectionPayload {
  if (!isRecord(raw)) throw new SchemaError("projection", "(root)");
  return {
    country: str(raw, "projection", "country"),
    scenario: str(raw, "projection", "scenario"),
    start_date: str(raw, "projection", "start_date"),
    horizon: num(raw, "projection", "horizon"),
    params_digest: str(raw, "projection", "params_digest"),
    daily_affected: numberArray(raw, "projection", "daily_affected"),
    daily_deaths: numberArray(raw, "projection", "daily_deaths"),
    cumulative_affected: numberArray(raw, "projection", "cumulative_affected"),
    cumulative_deaths: numberArray(raw, "projection", "cumulative_deaths"),
  };
}

function parseCell(raw: unknown, which: string): CorrelationCell {
  if (!isRecord(raw)) throw new SchemaError("correlations", which);
  const sig = raw["significant"];
  return {
    coefficient: num(raw, "correlations", "coefficient"),
    p_value: optNum(raw, "p_value"),
    n: num(raw, "correlations", "n"),
    significant: typeof sig === "boolean" ? sig : null,
  };
}

export function parseCorrelations(raw: unknown): CorrelationsPayload {
  if (!isRecord(raw)) throw new SchemaError("correlations", "(root)");
  const rows = raw["per_country"];
  if (!Array.isArray(rows)) throw new SchemaError("correlations", "per_country");
  return {
    pair: str(raw, "correlations", "pair"),
    alpha: num(raw, "correlations", "alpha"),
    lag_days: num(raw, "correlations", "lag_days"),
    per_country: rows.map((row) => {
      if (!isRecord(row)) throw new SchemaError("correlations", "per_country[]");
      return {
        country: str(row, "correlations", "country"),
        pearson: parseCell(row["pearson"], "pearson"),
        spearman: parseCell(row["spearman"], "spearman"),
        kendall: parseCell(row["kendall"], "kendall"),
      };
    }),
  };
}

export function parseCountries(raw: unknown): CountryInfo[] {
  if (!isRecord(raw)) throw new SchemaError("countries", "(root)");
  const rows = raw["countries"];
  if (!Array.isArray(rows)) throw new SchemaError("countries", "countries");
  return rows.map((row) => {
    if (!isRecord(row)) throw new SchemaError("countries", "countries[]");
    return {
      country_code: str(row, "countries", "country_code"),
      name: str(row, "countries", "name"),
      population: optNum(row, "population"),
      area: optNum(row, "area"),
    };
  });
}

export function parseLive(raw: unknown): LivePayload {
  if (!isRecord(raw)) throw new SchemaError("live", "(root)");
  const counts = raw["counts"];
  if (!isRecord(counts)) throw new SchemaError("live", "counts");
  const asOf = raw["as_of"];
  return {
    scope: str(raw, "live", "scope"),
    as_of: typeof asOf === "string" ? asOf : null,
    stale: raw["stale"] === true,
    source: str(raw, "live", "source"),
    counts: {
      affected: num(counts, "live", "affected"),
      dead: num(counts, "live", "dead"),
      recovered: num(counts, "live", "recovered"),
      active: num(counts, "live", "active"),
    },
  };
}

export function parseError(raw: unknown): ErrorPayload {
  if (isRecord(raw) && typeof raw["reason"] === "string") {
    const detail = raw["detail"];
    return { reason: raw["reason"], detail: typeof detail === "string" ? detail : null };
  }
  return { reason: "unknown", detail: null };
}
