/**
 * Explorer state and its URL encoding.
 *
 * The full view state lives in the query string so a reload (or a shared
 * link) reproduces the same view. Decoding clamps everything back into
 * range, so hand-edited URLs cannot produce an illegal state.
 */

export const SCENARIOS = [
  "lockdown_distancing",
  "released_distancing",
  "released_no_distancing",
] as const;

export type ScenarioKind = (typeof SCENARIOS)[number];

export const HORIZON_MIN = 7;
export const HORIZON_MAX = 120;
export const MAX_OVERLAYS = 5;

export interface ExplorerState {
  country: string;
  scenario: ScenarioKind;
  /** home/school/work/other multipliers, each in [0,1]; null = preset values */
  deltas: [number, number, number, number] | null;
  /** reinfection override in [0,1]; null = off */
  zeta: number | null;
  horizon: number;
  /** pinned comparison runs, oldest first, capped at MAX_OVERLAYS */
  overlays: string[];
}

export function defaultState(): ExplorerState {
  return {
    country: "",
    scenario: "lockdown_distancing",
    deltas: null,
    zeta: null,
    horizon: 60,
    overlays: [],
  };
}

export function clamp01(v: number): number {
  if (!Number.isFinite(v)) return 0;
  return Math.min(1, Math.max(0, v));
}

export function clampHorizon(v: number): number {
  if (!Number.isFinite(v)) return 60;
  return Math.min(HORIZON_MAX, Math.max(HORIZON_MIN, Math.round(v)));
}

function isScenario(v: string): v is ScenarioKind {
  return (SCENARIOS as readonly string[]).includes(v);
}

/** Overlay key: one pinned run, identified by what produced it. */
export function overlayKey(country: string, scenario: string, horizon: number): string {
  return `${country}:${scenario}:${horizon}`;
}

export function pinOverlay(state: ExplorerState, key: string): {
  state: ExplorerState;
  evicted: string | null;
} {
  if (state.overlays.includes(key)) return { state, evicted: null };
  const overlays = [...state.overlays, key];
  let evicted: string | null = null;
  if (overlays.length > MAX_OVERLAYS) {
    evicted = overlays.shift() ?? null;
  }
  return { state: { ...state, overlays }, evicted };
}

export function encodeState(state: ExplorerState): string {
  const qs = new URLSearchParams();
  if (state.country) qs.set("country", state.country);
  qs.set("scenario", state.scenario);
  qs.set("horizon", String(state.horizon));
  if (state.deltas) qs.set("deltas", state.deltas.map((d) => d.toFixed(3)).join(","));
  if (state.zeta !== null) qs.set("zeta", state.zeta.toFixed(3));
  if (state.overlays.length) qs.set("pins", state.overlays.join("|"));
  return qs.toString();
}

export function decodeState(query: string): ExplorerState {
  const qs = new URLSearchParams(query);
  const state = defaultState();
  state.country = qs.get("country") ?? "";
  const scenario = qs.get("scenario") ?? "";
  if (isScenario(scenario)) state.scenario = scenario;
  const horizon = qs.get("horizon");
  if (horizon !== null) state.horizon = clampHorizon(Number(horizon));
  const deltas = qs.get("deltas");
  if (deltas !== null) {
    const parts = deltas.split(",").map(Number);
    if (parts.length === 4) {
      state.deltas = [
        clamp01(parts[0]!),
        clamp01(parts[1]!),
        clamp01(parts[2]!),
        clamp01(parts[3]!),
      ];
    }
  }
  const zeta = qs.get("zeta");
  if (zeta !== null) state.zeta = clamp01(Number(zeta));
  const pins = qs.get("pins");
  if (pins) state.overlays = pins.split("|").slice(0, MAX_OVERLAYS);
  return state;
}
