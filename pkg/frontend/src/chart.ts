/**
 * Line-chart view model and SVG renderer.
 *
 * The model builder computes pixel placement and nothing else: each line
 * keeps its payload values verbatim, so a test can intercept the API and
 * check every plotted number against what the service returned.
 */

const SVG_NS = "http://www.w3.org/2000/svg";

export const SCENARIO_COLORS: Record<string, string> = {
  lockdown_distancing: "#2563eb",
  released_distancing: "#d97706",
  released_no_distancing: "#dc2626",
};

const FALLBACK_COLOR = "#6b7280";

export function scenarioColor(scenario: string): string {
  return SCENARIO_COLORS[scenario] ?? FALLBACK_COLOR;
}

export interface ChartSeries {
  key: string;
  label: string;
  scenario: string;
  values: number[];
}

export interface ChartLine {
  key: string;
  label: string;
  color: string;
  /** source values, untouched */
  values: number[];
  /** "x1,y1 x2,y2 ..." for the polyline points attribute */
  points: string;
}

export interface ChartModel {
  width: number;
  height: number;
  empty: boolean;
  yMax: number;
  lines: ChartLine[];
  yTicks: { y: number; value: number }[];
  xTicks: { x: number; day: number }[];
}

const PAD_LEFT = 52;
const PAD_RIGHT = 12;
const PAD_TOP = 10;
const PAD_BOTTOM = 26;

export function buildChartModel(
  series: ChartSeries[],
  width = 640,
  height = 240,
): ChartModel {
  const nonEmpty = series.filter((s) => s.values.length > 0);
  if (nonEmpty.length === 0) {
    return { width, height, empty: true, yMax: 0, lines: [], yTicks: [], xTicks: [] };
  }

  let yMax = 0;
  let maxLen = 1;
  for (const s of nonEmpty) {
    maxLen = Math.max(maxLen, s.values.length);
    for (const v of s.values) yMax = Math.max(yMax, v);
  }
  if (yMax <= 0) yMax = 1; // all-zero series still get a frame

  const plotW = width - PAD_LEFT - PAD_RIGHT;
  const plotH = height - PAD_TOP - PAD_BOTTOM;
  const xDen = Math.max(1, maxLen - 1);
  const xAt = (day: number) => PAD_LEFT + (day / xDen) * plotW;
  const yAt = (v: number) => PAD_TOP + plotH - (v / yMax) * plotH;

  const lines: ChartLine[] = nonEmpty.map((s) => ({
    key: s.key,
    label: s.label,
    color: scenarioColor(s.scenario),
    values: s.values,
    points: s.values
      .map((v, day) => `${xAt(day).toFixed(1)},${yAt(v).toFixed(1)}`)
      .join(" "),
  }));

  const yTicks = [0, 0.25, 0.5, 0.75, 1].map((f) => ({
    y: yAt(f * yMax),
    value: f * yMax,
  }));
  const xStep = Math.max(1, Math.ceil(maxLen / 6));
  const xTicks: { x: number; day: number }[] = [];
  for (let day = 0; day < maxLen; day += xStep) {
    xTicks.push({ x: xAt(day), day });
  }

  return { width, height, empty: false, yMax, lines, yTicks, xTicks };
}

function fmtTick(v: number): string {
  if (v >= 1e6) return `${(v / 1e6).toFixed(1)}M`;
  if (v >= 1e3) return `${(v / 1e3).toFixed(1)}k`;
  if (Number.isInteger(v)) return String(v);
  return v.toFixed(1);
}

export interface RenderOptions {
  title: string;
  onRetry?: () => void;
}

/** Render a model into a fresh container element. Empty models become an
 * empty-state panel with a retry button instead of a bare axis frame. */
export function renderChart(doc: Document, model: ChartModel, opts: RenderOptions): HTMLElement {
  const root = doc.createElement("section");
  root.className = "chart";

  const heading = doc.createElement("h3");
  heading.textContent = opts.title;
  root.appendChild(heading);

  if (model.empty) {
    const panel = doc.createElement("div");
    panel.className = "chart-empty";
    const msg = doc.createElement("p");
    msg.textContent = "No projection data to draw.";
    panel.appendChild(msg);
    const retry = doc.createElement("button");
    retry.className = "retry";
    retry.type = "button";
    retry.textContent = "Retry";
    if (opts.onRetry) retry.addEventListener("click", opts.onRetry);
    panel.appendChild(retry);
    root.appendChild(panel);
    return root;
  }

  const svg = doc.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${model.width} ${model.height}`);
  svg.setAttribute("width", String(model.width));
  svg.setAttribute("height", String(model.height));
  svg.setAttribute("role", "img");

  for (const tick of model.yTicks) {
    const grid = doc.createElementNS(SVG_NS, "line");
    grid.setAttribute("x1", String(PAD_LEFT));
    grid.setAttribute("x2", String(model.width - PAD_RIGHT));
    grid.setAttribute("y1", tick.y.toFixed(1));
    grid.setAttribute("y2", tick.y.toFixed(1));
    grid.setAttribute("class", "gridline");
    svg.appendChild(grid);
    const label = doc.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(PAD_LEFT - 6));
    label.setAttribute("y", (tick.y + 3).toFixed(1));
    label.setAttribute("text-anchor", "end");
    label.setAttribute("class", "tick");
    label.textContent = fmtTick(tick.value);
    svg.appendChild(label);
  }

  for (const tick of model.xTicks) {
    const label = doc.createElementNS(SVG_NS, "text");
    label.setAttribute("x", tick.x.toFixed(1));
    label.setAttribute("y", String(model.height - 8));
    label.setAttribute("text-anchor", "middle");
    label.setAttribute("class", "tick");
    label.textContent = `d${tick.day}`;
    svg.appendChild(label);
  }

  for (const line of model.lines) {
    const poly = doc.createElementNS(SVG_NS, "polyline");
    poly.setAttribute("points", line.points);
    poly.setAttribute("fill", "none");
    poly.setAttribute("stroke", line.color);
    poly.setAttribute("stroke-width", "1.5");
    poly.setAttribute("data-key", line.key);
    svg.appendChild(poly);
  }

  root.appendChild(svg);

  const legend = doc.createElement("ul");
  legend.className = "legend";
  for (const line of model.lines) {
    const item = doc.createElement("li");
    const swatch = doc.createElement("span");
    swatch.className = "swatch";
    swatch.style.backgroundColor = line.color;
    item.appendChild(swatch);
    item.appendChild(doc.createTextNode(line.label));
    legend.appendChild(item);
  }
  root.appendChild(legend);

  return root;
}
