import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { createApp } from "../src/app.js";
import { FakeService, deferred, fakeService, flush, urlHost } from "./helpers.js";

const WAIT = 50;

function makeApp(search = "", mutate?: (svc: FakeService) => void) {
  const svc = fakeService();
  mutate?.(svc);
  const host = urlHost(search);
  const container = document.createElement("div");
  document.body.appendChild(container);
  const app = createApp(document, host, container, new ApiClient("", svc.fetchFn), WAIT);
  return { svc, host, container, app };
}

function clickScenario(container: HTMLElement, kind: string): void {
  container.querySelector<HTMLButtonElement>(`[data-scenario="${kind}"]`)!.click();
}

function polylineKeys(container: HTMLElement): string[] {
  const affected = container.querySelectorAll(".chart")[0]!;
  return Array.from(affected.querySelectorAll("polyline")).map(
    (p) => p.getAttribute("data-key") ?? "",
  );
}

beforeEach(() => {
  vi.useFakeTimers();
});

afterEach(() => {
  vi.useRealTimers();
  document.body.innerHTML = "";
});

describe("boot", () => {
  it("renders controls, both charts, and the correlations table", async () => {
    const { container, host, app } = makeApp();
    await app.whenIdle();
    expect(container.querySelector("select.country")).not.toBeNull();
    expect((container.querySelector("select.country") as HTMLSelectElement).value).toBe("AA");
    const charts = container.querySelectorAll(".chart");
    expect(charts).toHaveLength(2);
    const line = charts[0]!.querySelector("polyline")!;
    expect(line.getAttribute("data-key")).toBe("AA:lockdown_distancing:60");
    expect(line.getAttribute("points")!.split(" ")).toHaveLength(60);
    expect(container.querySelectorAll("table.sortable tbody tr")).toHaveLength(4);
    expect(host.current()).toContain("country=AA");
    expect(host.current()).toContain("scenario=lockdown_distancing");
    expect(host.current()).toContain("horizon=60");
  });

  it("hides the staleness badge on fresh live data", async () => {
    const { container, app } = makeApp();
    await app.whenIdle();
    expect(container.querySelector<HTMLElement>(".badge")!.hidden).toBe(true);
  });

  it("shows the staleness badge when live data is stale", async () => {
    const { container, app } = makeApp("", (svc) => {
      svc.stale = true;
    });
    await app.whenIdle();
    expect(container.querySelector<HTMLElement>(".badge")!.hidden).toBe(false);
    expect(container.querySelector(".live-counts")!.textContent).toContain("(store)");
  });
});

describe("controls dispatch", () => {
  it("switching regime re-fetches and redraws", async () => {
    const { svc, container, app } = makeApp();
    await app.whenIdle();
    const before = svc.predictionCalls().length;
    clickScenario(container, "released_no_distancing");
    expect(svc.predictionCalls()).toHaveLength(before); // debounced, nothing yet
    vi.advanceTimersByTime(WAIT);
    await app.whenIdle();
    expect(svc.predictionCalls()).toHaveLength(before + 1);
    expect(polylineKeys(container)).toEqual(["AA:released_no_distancing:60"]);
  });

  it("a slider drag emits one request, not one per step", async () => {
    const { svc, container, app } = makeApp();
    await app.whenIdle();
    const before = svc.predictionCalls().length;
    const slider = container.querySelector<HTMLInputElement>("input.delta-school")!;
    for (let i = 0; i <= 9; i++) {
      slider.value = String(i / 10);
      slider.dispatchEvent(new Event("input"));
    }
    expect(svc.predictionCalls()).toHaveLength(before);
    vi.advanceTimersByTime(WAIT);
    await app.whenIdle();
    expect(svc.predictionCalls()).toHaveLength(before + 1);
    expect(app.state().deltas).toEqual([1, 0.9, 0.1, 0.1]); // preset plus the dragged slider
  });

  it("horizon changes re-fetch with the new horizon", async () => {
    const { svc, container, app } = makeApp();
    await app.whenIdle();
    const input = container.querySelector<HTMLInputElement>("input.horizon")!;
    input.value = "90";
    input.dispatchEvent(new Event("change"));
    vi.advanceTimersByTime(WAIT);
    await app.whenIdle();
    expect(app.state().horizon).toBe(90);
    const last = svc.predictionCalls().pop()!;
    expect(last).toContain("horizon=90");
    const line = container.querySelector("polyline")!;
    expect(line.getAttribute("points")!.split(" ")).toHaveLength(90);
  });

  it("shows the in-flight indicator while a request is pending", async () => {
    const { svc, container, app } = makeApp();
    await app.whenIdle();
    const gate = deferred<void>();
    svc.pending.set("released_distancing", gate);
    const indicator = container.querySelector<HTMLElement>(".inflight")!;
    expect(indicator.hidden).toBe(true);
    clickScenario(container, "released_distancing");
    vi.advanceTimersByTime(WAIT);
    expect(indicator.hidden).toBe(false);
    gate.resolve();
    await flush();
    expect(indicator.hidden).toBe(true);
  });
});

describe("pinning", () => {
  it("caps pins at five and evicts the oldest with a notice", async () => {
    const { container, app } = makeApp();
    await app.whenIdle();
    const input = container.querySelector<HTMLInputElement>("input.horizon")!;
    const pin = container.querySelector<HTMLButtonElement>("button.pin")!;
    for (const horizon of [60, 61, 62, 63, 64, 65]) {
      input.value = String(horizon);
      input.dispatchEvent(new Event("change"));
      vi.advanceTimersByTime(WAIT);
      await app.whenIdle();
      pin.click();
    }
    expect(app.state().overlays).toEqual([
      "AA:lockdown_distancing:61",
      "AA:lockdown_distancing:62",
      "AA:lockdown_distancing:63",
      "AA:lockdown_distancing:64",
      "AA:lockdown_distancing:65",
    ]);
    const banner = container.querySelector<HTMLElement>(".banner")!;
    expect(banner.hidden).toBe(false);
    expect(banner.dataset["kind"]).toBe("notice");
    expect(banner.textContent).toContain("dropped oldest run");
    expect(banner.textContent).toContain("AA lockdown_distancing (60d)");
    expect(polylineKeys(container)).toHaveLength(5);
  });

  it("pinning the same run twice draws it once", async () => {
    const { container, app } = makeApp();
    await app.whenIdle();
    const pin = container.querySelector<HTMLButtonElement>("button.pin")!;
    pin.click();
    pin.click();
    expect(app.state().overlays).toEqual(["AA:lockdown_distancing:60"]);
    expect(polylineKeys(container)).toHaveLength(1);
  });
});

describe("error handling", () => {
  it("names the calibrate step for an uncalibrated country", async () => {
    const { container, app } = makeApp("?country=EE", (svc) => {
      svc.uncalibrated.add("EE");
    });
    await app.whenIdle();
    const banner = container.querySelector<HTMLElement>(".banner")!;
    expect(banner.hidden).toBe(false);
    expect(banner.dataset["kind"]).toBe("error");
    expect(banner.textContent).toContain("epiforge calibrate EE");
    expect(app.state().country).toBe("EE");
    expect(container.querySelectorAll(".chart-empty")).toHaveLength(2);
  });

  it("keeps the last good view when the service goes down, then retries", async () => {
    const { svc, container, app } = makeApp();
    await app.whenIdle();
    svc.failAll = true;
    clickScenario(container, "released_distancing");
    vi.advanceTimersByTime(WAIT);
    await app.whenIdle();
    const banner = container.querySelector<HTMLElement>(".banner")!;
    expect(banner.dataset["kind"]).toBe("error");
    expect(banner.textContent).toContain("unavailable");
    // state moved, view preserved
    expect(app.state().scenario).toBe("released_distancing");
    expect(polylineKeys(container)).toEqual(["AA:lockdown_distancing:60"]);

    svc.failAll = false;
    banner.querySelector<HTMLButtonElement>("button.retry")!.click();
    await app.whenIdle();
    expect(banner.hidden).toBe(true);
    expect(polylineKeys(container)).toEqual(["AA:released_distancing:60"]);
  });

  it("empty-state retry re-dispatches the projection fetch", async () => {
    const { svc, container, app } = makeApp("?country=EE", (s) => {
      s.uncalibrated.add("EE");
    });
    await app.whenIdle();
    svc.uncalibrated.delete("EE");
    container.querySelector<HTMLButtonElement>(".chart-empty button.retry")!.click();
    await app.whenIdle();
    expect(polylineKeys(container)).toEqual(["EE:lockdown_distancing:60"]);
  });
});

describe("request versioning", () => {
  it("a late response from a stale request never mutates the view", async () => {
    const { svc, container, app } = makeApp();
    await app.whenIdle();
    const slow = deferred<void>();
    const fast = deferred<void>();
    svc.pending.set("released_distancing", slow);
    svc.pending.set("released_no_distancing", fast);

    clickScenario(container, "released_distancing");
    vi.advanceTimersByTime(WAIT); // request A dispatched, held open
    clickScenario(container, "released_no_distancing");
    vi.advanceTimersByTime(WAIT); // request B dispatched, held open
    expect(svc.predictionCalls()).toHaveLength(3); // boot + A + B

    fast.resolve();
    await flush();
    expect(polylineKeys(container)).toEqual(["AA:released_no_distancing:60"]);

    slow.resolve(); // A finishes after B; its ticket is stale
    await flush();
    expect(polylineKeys(container)).toEqual(["AA:released_no_distancing:60"]);
    expect(container.querySelector<HTMLElement>(".inflight")!.hidden).toBe(true);
  });
});

describe("correlations panel", () => {
  it("re-fetches when the pair changes", async () => {
    const { svc, container, app } = makeApp();
    await app.whenIdle();
    const select = container.querySelector<HTMLSelectElement>("select.pair")!;
    select.value = "humidity-affected";
    select.dispatchEvent(new Event("change"));
    await flush();
    expect(svc.calls.some((u) => u.includes("pair=humidity-affected"))).toBe(true);
    expect(container.querySelectorAll("table.sortable tbody tr")).toHaveLength(4);
  });

  it("renders absent cells for null p-values", async () => {
    const { container, app } = makeApp();
    await app.whenIdle();
    const cells = Array.from(container.querySelectorAll("table.sortable td")).map(
      (td) => td.textContent,
    );
    expect(cells).toContain("absent");
  });
});
