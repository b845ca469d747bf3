/**
 * Typed client for the epiforge JSON API.
 *
 * All responses pass through the schema guards in types.ts. Error bodies
 * become ApiError with the service's machine-readable reason, so the UI
 * can turn "uncalibrated" into an actionable message rather than a
 * generic failure.
 */

import {
  CorrelationsPayload,
  CountryInfo,
  LivePayload,
  ProjectionPayload,
  parseCorrelations,
  parseCountries,
  parseError,
  parseLive,
  parseProjection,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly reason: string,
    public readonly detail: string | null,
  ) {
    super(`${status} ${reason}${detail ? `: ${detail}` : ""}`);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (url) => fetch(url),
  ) {}

  private async getJson(path: string): Promise<unknown> {
    let resp: Response;
    try {
      resp = await this.fetchFn(this.base + path);
    } catch (err) {
      throw new ApiError(0, "network", String(err));
    }
    let body: unknown = null;
    try {
      body = await resp.json();
    } catch {
      body = null;
    }
    if (!resp.ok) {
      const parsed = parseError(body);
      throw new ApiError(resp.status, parsed.reason, parsed.detail);
    }
    return body;
  }

  async countries(): Promise<CountryInfo[]> {
    return parseCountries(await this.getJson("/api/static/countries"));
  }

  async liveGlobal(): Promise<LivePayload> {
    return parseLive(await this.getJson("/api/live/global"));
  }

  async liveCountry(code: string): Promise<LivePayload> {
    return parseLive(await this.getJson(`/api/live/country/${encodeURIComponent(code)}`));
  }

  async predictions(
    country: string,
    scenario: string,
    horizon: number,
  ): Promise<ProjectionPayload> {
    const qs = new URLSearchParams({ scenario, horizon: String(horizon) });
    return parseProjection(
      await this.getJson(`/api/predictions/${encodeURIComponent(country)}?${qs}`),
    );
  }

  async correlations(pair: string): Promise<CorrelationsPayload> {
    const qs = new URLSearchParams({ pair });
    return parseCorrelations(await this.getJson(`/api/correlations?${qs}`));
  }
}
