/**
 * Composition root for the scenario explorer.
 *
 * Owns the one ExplorerState instance, mirrors it into the URL query
 * string, and funnels every control change through a single debounced
 * dispatch guarded by request versioning: late responses from stale
 * requests never mutate the view.
 */

import { ApiClient, ApiError } from "./api.js";
import { buildChartModel, ChartSeries, renderChart } from "./chart.js";
import { renderControls } from "./controls.js";
import { debounce, LatestGate } from "./debounce.js";
import {
  ExplorerState,
  SCENARIOS,
  clampHorizon,
  decodeState,
  encodeState,
  overlayKey,
  pinOverlay,
} from "./state.js";
import { Row, renderTable } from "./table.js";
import { LivePayload, ProjectionPayload, SchemaError } from "./types.js";

export const DEBOUNCE_MS = 150;

const PAIRS = ["temperature-affected", "humidity-affected"] as const;

/** The slice of window the app actually touches; tests can stub it. */
export interface UrlHost {
  location: { search: string };
  history: { replaceState(data: unknown, unused: string, url?: string | null): void };
}

export interface AppHandles {
  root: HTMLElement;
  state(): ExplorerState;
  /** resolves once the most recent dispatch (or boot) has settled */
  whenIdle(): Promise<void>;
}

function fmtCount(v: number): string {
  return Math.round(v).toLocaleString("en-US");
}

function seriesLabel(key: string): string {
  const [country, scenario, horizon] = key.split(":");
  return `${country ?? "?"} ${scenario ?? "?"} (${horizon ?? "?"}d)`;
}

export function createApp(
  doc: Document,
  win: UrlHost,
  container: HTMLElement,
  api: ApiClient,
  debounceMs: number = DEBOUNCE_MS,
): AppHandles {
  let state = decodeState(win.location.search);
  const runCache = new Map<string, ProjectionPayload>();
  const gate = new LatestGate();
  let inflight: Promise<void> = Promise.resolve();
  let inflightEl: HTMLElement | null = null;

  container.replaceChildren();

  const header = doc.createElement("header");
  const title = doc.createElement("h1");
  title.textContent = "Scenario explorer";
  header.appendChild(title);
  const badge = doc.createElement("span");
  badge.className = "badge";
  badge.hidden = true;
  badge.textContent = "stale data";
  header.appendChild(badge);
  const liveCounts = doc.createElement("div");
  liveCounts.className = "live-counts";
  header.appendChild(liveCounts);
  container.appendChild(header);

  const bannerEl = doc.createElement("div");
  bannerEl.className = "banner";
  bannerEl.setAttribute("role", "alert");
  bannerEl.hidden = true;
  container.appendChild(bannerEl);

  const controlsHost = doc.createElement("div");
  controlsHost.className = "controls-host";
  container.appendChild(controlsHost);

  const chartsHost = doc.createElement("div");
  chartsHost.className = "charts-host";
  container.appendChild(chartsHost);

  const corrSection = doc.createElement("section");
  corrSection.className = "correlations";
  const corrHeading = doc.createElement("h3");
  corrHeading.textContent = "Covariate correlations";
  corrSection.appendChild(corrHeading);
  const pairSelect = doc.createElement("select");
  pairSelect.className = "pair";
  for (const pair of PAIRS) {
    const opt = doc.createElement("option");
    opt.value = pair;
    opt.textContent = pair.replace(/-/g, " vs ");
    pairSelect.appendChild(opt);
  }
  corrSection.appendChild(pairSelect);
  const tableHost = doc.createElement("div");
  tableHost.className = "table-host";
  corrSection.appendChild(tableHost);
  container.appendChild(corrSection);

  function syncUrl(): void {
    win.history.replaceState(null, "", `?${encodeState(state)}`);
  }

  function showBanner(kind: "error" | "notice", text: string, retry?: () => void): void {
    bannerEl.replaceChildren();
    bannerEl.dataset["kind"] = kind;
    bannerEl.hidden = false;
    const msg = doc.createElement("span");
    msg.textContent = text;
    bannerEl.appendChild(msg);
    if (retry) {
      const btn = doc.createElement("button");
      btn.type = "button";
      btn.className = "retry";
      btn.textContent = "Retry";
      btn.addEventListener("click", retry);
      bannerEl.appendChild(btn);
    }
  }

  function clearErrorBanner(): void {
    if (bannerEl.dataset["kind"] === "error") {
      bannerEl.hidden = true;
      bannerEl.replaceChildren();
      delete bannerEl.dataset["kind"];
    }
  }

  function currentKey(): string {
    return overlayKey(state.country, state.scenario, state.horizon);
  }

  function redrawCharts(): void {
    // pins first, the live run last so it overwrites its own pin slot
    const picked = new Map<string, ProjectionPayload>();
    for (const key of state.overlays) {
      const payload = runCache.get(key);
      if (payload) picked.set(key, payload);
    }
    const live = runCache.get(currentKey());
    if (live) picked.set(currentKey(), live);

    const affected: ChartSeries[] = [];
    const deaths: ChartSeries[] = [];
    for (const [key, payload] of picked) {
      affected.push({
        key,
        label: seriesLabel(key),
        scenario: payload.scenario,
        values: payload.daily_affected,
      });
      deaths.push({
        key,
        label: seriesLabel(key),
        scenario: payload.scenario,
        values: payload.daily_deaths,
      });
    }
    chartsHost.replaceChildren(
      renderChart(doc, buildChartModel(affected), {
        title: "Daily affected",
        onRetry: dispatchNow,
      }),
      renderChart(doc, buildChartModel(deaths), {
        title: "Daily deaths",
        onRetry: dispatchNow,
      }),
    );
  }

  function showFetchError(err: unknown): void {
    if (err instanceof SchemaError) {
      showBanner("error", `Malformed response: ${err.message}`);
      return;
    }
    if (err instanceof ApiError) {
      if (err.reason === "uncalibrated") {
        showBanner(
          "error",
          `${state.country} is not calibrated yet. Run: epiforge calibrate ${state.country}`,
        );
        return;
      }
      if (err.status >= 500 || err.status === 0) {
        showBanner("error", `Service unavailable (${err.reason}).`, dispatchNow);
        return;
      }
      showBanner("error", `${err.reason}${err.detail ? `: ${err.detail}` : ""}`);
      return;
    }
    showBanner("error", String(err));
  }

  function dispatchNow(): Promise<void> {
    if (!state.country) return Promise.resolve();
    const ticket = gate.take();
    if (inflightEl) inflightEl.hidden = false;
    inflight = api
      .predictions(state.country, state.scenario, state.horizon)
      .then((payload) => {
        if (!gate.isCurrent(ticket)) return;
        runCache.set(overlayKey(payload.country, payload.scenario, payload.horizon), payload);
        clearErrorBanner();
        redrawCharts();
      })
      .catch((err) => {
        if (!gate.isCurrent(ticket)) return;
        showFetchError(err);
      })
      .finally(() => {
        if (gate.isCurrent(ticket) && inflightEl) inflightEl.hidden = true;
      });
    return inflight;
  }

  const dispatch = debounce(dispatchNow, debounceMs);

  function onChange(patch: Partial<ExplorerState>): void {
    state = { ...state, ...patch };
    syncUrl();
    dispatch();
  }

  function onPin(): void {
    const key = currentKey();
    if (!runCache.has(key)) return; // nothing fetched yet, nothing to pin
    const { state: next, evicted } = pinOverlay(state, key);
    state = next;
    syncUrl();
    if (evicted) {
      if (evicted !== currentKey()) runCache.delete(evicted);
      showBanner("notice", `Pin limit reached; dropped oldest run ${seriesLabel(evicted)}.`);
    }
    redrawCharts();
  }

  function paintLive(live: LivePayload): void {
    badge.hidden = !live.stale;
    const c = live.counts;
    const asOf = live.as_of ? ` as of ${live.as_of}` : "";
    liveCounts.textContent =
      `affected ${fmtCount(c.affected)} / active ${fmtCount(c.active)} / ` +
      `recovered ${fmtCount(c.recovered)} / dead ${fmtCount(c.dead)}` +
      `${asOf} (${live.source})`;
  }

  async function fetchPin(key: string): Promise<void> {
    const [country, scenario, horizonRaw] = key.split(":");
    if (!country || !scenario || !(SCENARIOS as readonly string[]).includes(scenario)) return;
    const horizon = clampHorizon(Number(horizonRaw));
    const payload = await api.predictions(country, scenario, horizon);
    runCache.set(key, payload);
  }

  async function loadCorrelations(): Promise<void> {
    tableHost.replaceChildren();
    try {
      const payload = await api.correlations(pairSelect.value);
      const rows: Row[] = payload.per_country.map((row) => ({
        country: row.country,
        pearson: row.pearson.coefficient,
        p_pearson: row.pearson.p_value,
        spearman: row.spearman.coefficient,
        p_spearman: row.spearman.p_value,
        kendall: row.kendall.coefficient,
        p_kendall: row.kendall.p_value,
      }));
      tableHost.appendChild(
        renderTable(
          doc,
          [
            { key: "country", label: "country" },
            { key: "pearson", label: "pearson" },
            { key: "p_pearson", label: "p (pearson)" },
            { key: "spearman", label: "spearman" },
            { key: "p_spearman", label: "p (spearman)" },
            { key: "kendall", label: "kendall" },
            { key: "p_kendall", label: "p (kendall)" },
          ],
          rows,
        ),
      );
    } catch (err) {
      const note = doc.createElement("p");
      note.className = "table-note";
      note.textContent =
        err instanceof ApiError
          ? `Correlations unavailable (${err.reason}).`
          : `Correlations unavailable: ${String(err)}`;
      tableHost.appendChild(note);
    }
  }

  pairSelect.addEventListener("change", () => {
    void loadCorrelations();
  });

  async function boot(): Promise<void> {
    try {
      const countries = await api.countries();
      if (!state.country && countries.length > 0) {
        state = { ...state, country: countries[0]!.country_code };
      }
      syncUrl();
      controlsHost.appendChild(renderControls(doc, state, countries, { onChange, onPin }));
      inflightEl = controlsHost.querySelector(".inflight");
    } catch (err) {
      showFetchError(err);
      return;
    }

    try {
      paintLive(await api.liveGlobal());
    } catch {
      liveCounts.textContent = "live counts unavailable";
    }

    await Promise.all(
      state.overlays.map((key) => fetchPin(key).catch(() => undefined)),
    );
    await loadCorrelations();
    redrawCharts();
    await dispatchNow();
  }

  redrawCharts(); // empty-state panels until boot paints real data
  inflight = boot();

  return {
    root: container,
    state: () => state,
    whenIdle: () => inflight,
  };
}
