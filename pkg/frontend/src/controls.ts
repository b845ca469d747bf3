/**
 * Parameter panel: country picker, scenario toggle, mixing-weight and
 * reinfection sliders, horizon, pin button.
 *
 * The panel only reports state patches through its callback; debouncing
 * and dispatch belong to the composition root. Slider positions default
 * to the shipped preset weights for the selected scenario; the service
 * applies its own presets and overrides when projecting.
 */

import { ExplorerState, SCENARIOS, ScenarioKind, clamp01, clampHorizon } from "./state.js";
import { CountryInfo } from "./types.js";

export const PRESET_DELTAS: Record<ScenarioKind, [number, number, number, number]> = {
  lockdown_distancing: [1, 0, 0.1, 0.1],
  released_distancing: [1, 0.5, 0.5, 0.3],
  released_no_distancing: [1, 1, 1, 1],
};

const DELTA_LABELS = ["home", "school", "work", "other"] as const;

export interface ControlsCallbacks {
  onChange(patch: Partial<ExplorerState>): void;
  onPin(): void;
}

function labelled(doc: Document, text: string, child: HTMLElement): HTMLLabelElement {
  const label = doc.createElement("label");
  const span = doc.createElement("span");
  span.textContent = text;
  label.appendChild(span);
  label.appendChild(child);
  return label;
}

export function renderControls(
  doc: Document,
  state: ExplorerState,
  countries: CountryInfo[],
  cb: ControlsCallbacks,
): HTMLElement {
  // Working copy so successive slider events compose without a re-render.
  let local: ExplorerState = { ...state };
  const emit = (patch: Partial<ExplorerState>) => {
    local = { ...local, ...patch };
    cb.onChange(patch);
  };

  const root = doc.createElement("form");
  root.className = "controls";
  root.addEventListener("submit", (ev) => ev.preventDefault());

  const country = doc.createElement("select");
  country.className = "country";
  for (const info of countries) {
    const opt = doc.createElement("option");
    opt.value = info.country_code;
    opt.textContent = `${info.name} (${info.country_code})`;
    country.appendChild(opt);
  }
  country.value = state.country;
  country.addEventListener("change", () => emit({ country: country.value }));
  root.appendChild(labelled(doc, "Country", country));

  const toggle = doc.createElement("div");
  toggle.className = "scenario-toggle";
  toggle.setAttribute("role", "group");
  const buttons: HTMLButtonElement[] = [];
  for (const kind of SCENARIOS) {
    const btn = doc.createElement("button");
    btn.type = "button";
    btn.dataset["scenario"] = kind;
    btn.textContent = kind.replace(/_/g, " ");
    if (kind === state.scenario) btn.classList.add("active");
    btn.addEventListener("click", () => {
      for (const b of buttons) b.classList.toggle("active", b === btn);
      emit({ scenario: kind });
    });
    buttons.push(btn);
    toggle.appendChild(btn);
  }
  root.appendChild(labelled(doc, "Scenario", toggle));

  const deltaBox = doc.createElement("div");
  deltaBox.className = "deltas";
  const shown = state.deltas ?? PRESET_DELTAS[state.scenario];
  DELTA_LABELS.forEach((name, i) => {
    const slider = doc.createElement("input");
    slider.type = "range";
    slider.min = "0";
    slider.max = "1";
    slider.step = "0.01";
    slider.className = `delta delta-${name}`;
    slider.value = String(shown[i]);
    slider.addEventListener("input", () => {
      const current = local.deltas ?? PRESET_DELTAS[local.scenario];
      const next: [number, number, number, number] = [...current];
      next[i] = clamp01(Number(slider.value));
      emit({ deltas: next });
    });
    deltaBox.appendChild(labelled(doc, `delta ${name}`, slider));
  });
  root.appendChild(deltaBox);

  const zeta = doc.createElement("input");
  zeta.type = "range";
  zeta.min = "0";
  zeta.max = "1";
  zeta.step = "0.01";
  zeta.className = "zeta";
  zeta.value = String(state.zeta ?? 0);
  zeta.addEventListener("input", () => emit({ zeta: clamp01(Number(zeta.value)) }));
  root.appendChild(labelled(doc, "zeta (reinfection)", zeta));

  const horizon = doc.createElement("input");
  horizon.type = "number";
  horizon.min = "7";
  horizon.max = "120";
  horizon.className = "horizon";
  horizon.value = String(state.horizon);
  horizon.addEventListener("change", () =>
    emit({ horizon: clampHorizon(Number(horizon.value)) }),
  );
  root.appendChild(labelled(doc, "Horizon (days)", horizon));

  const pin = doc.createElement("button");
  pin.type = "button";
  pin.className = "pin";
  pin.textContent = "Pin for comparison";
  pin.addEventListener("click", () => cb.onPin());
  root.appendChild(pin);

  const inflight = doc.createElement("span");
  inflight.className = "inflight";
  inflight.hidden = true;
  inflight.textContent = "fetching";
  root.appendChild(inflight);

  return root;
}
