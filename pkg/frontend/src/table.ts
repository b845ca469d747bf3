/**
 * Click-to-sort table. Clicking a header sorts ascending, clicking the
 * same header again flips to descending. Sorts are stable (ties keep
 * their current relative order) and absent values sink to the bottom in
 * both directions.
 */

export type Cell = string | number | null;
export type Row = Record<string, Cell>;

export interface Column {
  key: string;
  label: string;
}

export type Direction = "asc" | "desc";

export interface SortSpec {
  key: string;
  direction: Direction;
}

function compareCells(a: Cell, b: Cell, direction: Direction): number {
  // absent values lose regardless of direction
  if (a === null && b === null) return 0;
  if (a === null) return 1;
  if (b === null) return -1;
  let base: number;
  if (typeof a === "number" && typeof b === "number") {
    base = a < b ? -1 : a > b ? 1 : 0;
  } else {
    const sa = String(a);
    const sb = String(b);
    base = sa < sb ? -1 : sa > sb ? 1 : 0;
  }
  return direction === "desc" ? -base : base;
}

export function sortRows(rows: Row[], spec: SortSpec): Row[] {
  return [...rows].sort((ra, rb) =>
    compareCells(ra[spec.key] ?? null, rb[spec.key] ?? null, spec.direction),
  );
}

function formatCell(v: Cell): string {
  if (v === null) return "absent";
  if (typeof v === "number") {
    if (Number.isInteger(v)) return String(v);
    return v.toFixed(4);
  }
  return v;
}

export function renderTable(
  doc: Document,
  columns: Column[],
  rows: Row[],
  initialSort?: SortSpec,
): HTMLElement {
  const table = doc.createElement("table");
  table.className = "sortable";
  let current: SortSpec | null = initialSort ?? null;

  const thead = doc.createElement("thead");
  const headRow = doc.createElement("tr");
  const headers = new Map<string, HTMLTableCellElement>();
  for (const col of columns) {
    const th = doc.createElement("th");
    th.textContent = col.label;
    th.dataset["key"] = col.key;
    th.addEventListener("click", () => {
      const direction: Direction =
        current && current.key === col.key && current.direction === "asc" ? "desc" : "asc";
      current = { key: col.key, direction };
      paint();
    });
    headers.set(col.key, th);
    headRow.appendChild(th);
  }
  thead.appendChild(headRow);
  table.appendChild(thead);

  const tbody = doc.createElement("tbody");
  table.appendChild(tbody);

  function paint(): void {
    for (const [key, th] of headers) {
      if (current && current.key === key) {
        th.setAttribute("aria-sort", current.direction === "asc" ? "ascending" : "descending");
      } else {
        th.removeAttribute("aria-sort");
      }
    }
    const ordered = current ? sortRows(rows, current) : rows;
    while (tbody.firstChild) tbody.removeChild(tbody.firstChild);
    for (const row of ordered) {
      const tr = doc.createElement("tr");
      for (const col of columns) {
        const td = doc.createElement("td");
        td.textContent = formatCell(row[col.key] ?? null);
        tr.appendChild(td);
      }
      tbody.appendChild(tr);
    }
  }

  paint();
  return table;
}
