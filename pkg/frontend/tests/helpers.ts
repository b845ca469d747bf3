/** Shared test harness: a canned fetch router standing in for the JSON
 * API, plus small utilities. Every number the fake serves is recorded so
 * tests can check that charts plot payload values and nothing else. */

import { UrlHost } from "../src/app.js";

export interface Deferred<T> {
  promise: Promise<T>;
  resolve: (value: T) => void;
  reject: (err: unknown) => void;
}

export function deferred<T>(): Deferred<T> {
  let resolve!: (value: T) => void;
  let reject!: (err: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

export async function flush(rounds = 10): Promise<void> {
  for (let i = 0; i < rounds; i++) await Promise.resolve();
}

export const SCENARIO_SCALE: Record<string, number> = {
  lockdown_distancing: 1,
  released_distancing: 2,
  released_no_distancing: 3,
};

export function makeProjection(
  country: string,
  scenario: string,
  horizon: number,
): Record<string, unknown> {
  const scale = SCENARIO_SCALE[scenario] ?? 1;
  const daily_affected = Array.from({ length: horizon }, (_, i) => scale * (10 + i));
  const daily_deaths = daily_affected.map((v) => v / 10);
  const prefix = (xs: number[]) => {
    let acc = 0;
    return xs.map((v) => (acc += v));
  };
  return {
    country,
    scenario,
    start_date: "2020-05-01",
    horizon,
    params_digest: "abc123def456",
    daily_affected,
    daily_deaths,
    cumulative_affected: prefix(daily_affected),
    cumulative_deaths: prefix(daily_deaths),
  };
}

function corrCell(coefficient: number, p: number | null, n = 20): Record<string, unknown> {
  return { coefficient, p_value: p, n, significant: p === null ? null : p <= 0.05 };
}

export function makeCorrelations(pair: string): Record<string, unknown> {
  return {
    pair,
    alpha: 0.05,
    lag_days: 5,
    per_country: [
      {
        country: "AA",
        pearson: corrCell(0.9, 0.01),
        spearman: corrCell(0.85, 0.02),
        kendall: corrCell(0.7, 0.03),
      },
      {
        country: "BB",
        pearson: corrCell(0.2, 0.4),
        spearman: corrCell(0.15, 0.5),
        kendall: corrCell(0.1, 0.6),
      },
      {
        country: "CC",
        pearson: corrCell(0.2, null, 2),
        spearman: corrCell(0.2, null, 2),
        kendall: corrCell(0.2, null, 2),
      },
      {
        country: "DD",
        pearson: corrCell(-0.5, 0.2),
        spearman: corrCell(-0.45, 0.25),
        kendall: corrCell(-0.3, 0.3),
      },
    ],
    medians: { pearson: 0.2 },
    ranges: { pearson: [-0.5, 0.9] },
    skipped: [],
  };
}

export interface FakeService {
  fetchFn: (url: string) => Promise<Response>;
  calls: string[];
  predictionCalls(): string[];
  /** overlay key -> exact body served, for plotted-numbers checks */
  served: Map<string, Record<string, unknown>>;
  stale: boolean;
  failAll: boolean;
  uncalibrated: Set<string>;
  /** scenario -> gate; a pending request for it resolves only after the gate */
  pending: Map<string, Deferred<void>>;
}

function respond(status: number, body: unknown): Response {
  return {
    ok: status < 400,
    status,
    json: async () => body,
  } as unknown as Response;
}

export function fakeService(): FakeService {
  const svc: FakeService = {
    calls: [],
    served: new Map(),
    stale: false,
    failAll: false,
    uncalibrated: new Set(),
    pending: new Map(),
    predictionCalls: () => svc.calls.filter((u) => u.includes("/api/predictions/")),
    fetchFn: async (url: string) => {
      svc.calls.push(url);
      const u = new URL(url, "http://test");
      const path = u.pathname;
      if (svc.failAll) return respond(503, { reason: "unavailable", detail: "service down" });

      if (path === "/api/static/countries") {
        return respond(200, {
          countries: [
            { country_code: "AA", name: "Alonia", population: 5000000, area: 1000, flag: "x" },
            { country_code: "BB", name: "Borland", population: 2000000, area: 500 },
            { country_code: "EE", name: "Esteria", population: 1000000, area: 300 },
          ],
        });
      }
      if (path === "/api/live/global") {
        return respond(200, {
          scope: "global",
          as_of: "2020-05-01",
          stale: svc.stale,
          source: svc.stale ? "store" : "upstream",
          counts: { affected: 1000, dead: 50, recovered: 400, active: 550 },
          rates: { death: {}, active: {}, recovery: {} },
        });
      }
      if (path.startsWith("/api/predictions/")) {
        const code = decodeURIComponent(path.slice("/api/predictions/".length));
        const scenario = u.searchParams.get("scenario") ?? "";
        const horizon = Number(u.searchParams.get("horizon") ?? "60");
        if (svc.uncalibrated.has(code)) {
          return respond(409, {
            reason: "uncalibrated",
            detail: `no fitted parameters for ${code}; run calibrate`,
          });
        }
        const body = makeProjection(code, scenario, horizon);
        svc.served.set(`${code}:${scenario}:${horizon}`, body);
        const gate = svc.pending.get(scenario);
        if (gate) return gate.promise.then(() => respond(200, body));
        return respond(200, body);
      }
      if (path === "/api/correlations") {
        return respond(200, makeCorrelations(u.searchParams.get("pair") ?? ""));
      }
      return respond(404, { reason: "not_found", detail: path });
    },
  };
  return svc;
}

/** Minimal window stand-in recording what replaceState wrote. */
export function urlHost(search = ""): UrlHost & { current(): string } {
  const loc = { search };
  return {
    location: loc,
    history: {
      replaceState: (_data: unknown, _unused: string, url?: string | null) => {
        const q = String(url ?? "");
        const i = q.indexOf("?");
        loc.search = i >= 0 ? q.slice(i) : "";
      },
    },
    current: () => loc.search,
  };
}
