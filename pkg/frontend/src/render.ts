// DOM/canvas rendering. Pure output: these functions draw state, they never
// compute domain numbers.

import { cellBounds, cellOf, cellKey } from "./grid.js";
import { maxCellTotal, type MapViewState } from "./map-state.js";
import type { MapCellWire, PendingReportWire, StatsWire } from "./types.js";

export function renderMap(canvas: HTMLCanvasElement, state: MapViewState): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { bbox } = state;
  const latSpan = bbox.maxLat - bbox.minLat;
  const lonSpan = bbox.maxLon - bbox.minLon;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "#10212d";
  ctx.fillRect(0, 0, canvas.width, canvas.height);

  const toX = (lon: number) => ((lon - bbox.minLon) / lonSpan) * canvas.width;
  const toY = (lat: number) => ((bbox.maxLat - lat) / latSpan) * canvas.height;

  const hottest = maxCellTotal(state) || 1;
  for (const cell of state.cells.values()) {
    const bounds = cellBounds(cell.row, cell.col, cell.cell_size);
    const x = toX(bounds.minLon);
    const y = toY(bounds.maxLat);
    const w = toX(bounds.maxLon) - x;
    const h = toY(bounds.minLat) - y;
    const heat = Math.min(1, cell.total / hottest);
    ctx.fillStyle = `rgba(235, ${Math.round(140 - 110 * heat)}, 52, ${0.35 + 0.55 * heat})`;
    ctx.fillRect(x, y, w, h);
    ctx.strokeStyle = "rgba(255,255,255,0.25)";
    ctx.strokeRect(x, y, w, h);
    if (w > 26 && h > 14) {
      ctx.fillStyle = "#fff";
      ctx.font = "11px system-ui, sans-serif";
      ctx.textAlign = "center";
      ctx.fillText(String(cell.total), x + w / 2, y + h / 2 + 4);
    }
  }
}

/** Map a canvas click back to the occupied cell under it, if any. */
export function cellAt(
  canvas: HTMLCanvasElement,
  state: MapViewState,
  offsetX: number,
  offsetY: number,
): MapCellWire | null {
  const { bbox } = state;
  const lon = bbox.minLon + (offsetX / canvas.width) * (bbox.maxLon - bbox.minLon);
  const lat = bbox.maxLat - (offsetY / canvas.height) * (bbox.maxLat - bbox.minLat);
  const { row, col } = cellOf(lat, lon, state.cellSize);
  return state.cells.get(cellKey(row, col)) ?? null;
}

export function renderStats(container: HTMLElement, stats: StatsWire): void {
  const rows = stats.distribution
    .map(
      (share) => `
      <tr>
        <td>${share.category}</td>
        <td class="num">${share.count.toFixed(2)}</td>
        <td class="num">${(share.fraction * 100).toFixed(1)}%</td>
      </tr>`,
    )
    .join("");
  container.innerHTML = `
    <p>validated reports: <strong>${stats.total_validated}</strong></p>
    <table>
      <thead><tr><th>category</th><th class="num">count</th><th class="num">share</th></tr></thead>
      <tbody>${rows || '<tr><td colspan="3">no validated reports yet</td></tr>'}</tbody>
    </table>`;
}

export interface QueueActions {
  onVerdict(reportId: number, verdict: "confirm" | "reject"): void;
}

export function renderQueue(
  container: HTMLElement,
  rows: PendingReportWire[],
  actions: QueueActions,
): void {
  if (rows.length === 0) {
    container.innerHTML = '<p class="empty">moderation queue is empty</p>';
    return;
  }
  container.innerHTML = "";
  const table = document.createElement("table");
  table.innerHTML = `
    <thead><tr>
      <th>#</th><th>submitted</th><th>author</th><th>categories</th>
      <th>evidence</th><th class="num">score</th><th></th>
    </tr></thead>`;
  const body = document.createElement("tbody");
  for (const row of rows) {
    const tr = document.createElement("tr");
    tr.dataset.reportId = String(row.report_id);
    const attachment = row.attachment ? ` [${row.attachment.kind}]` : "";
    tr.innerHTML = `
      <td>${row.report_id}</td>
      <td>${row.server_time.slice(0, 19).replace("T", " ")}</td>
      <td>${escapeHtml(row.author)}</td>
      <td>${row.categories.join(", ")}</td>
      <td>${escapeHtml(row.text)}${attachment}
          <span class="coords">@ ${row.location.lat.toFixed(4)}, ${row.location.lon.toFixed(4)}</span></td>
      <td class="num">${row.score.toFixed(2)}</td>`;
    const actionCell = document.createElement("td");
    for (const verdict of ["confirm", "reject"] as const) {
      const button = document.createElement("button");
      button.textContent = verdict;
      button.className = verdict;
      button.addEventListener("click", () => actions.onVerdict(row.report_id, verdict));
      actionCell.appendChild(button);
    }
    tr.appendChild(actionCell);
    body.appendChild(tr);
  }
  table.appendChild(body);
  container.appendChild(table);
}

export function renderCellDetail(container: HTMLElement, cell: MapCellWire | null): void {
  if (!cell) {
    container.innerHTML = '<p class="empty">click an occupied cell for details</p>';
    return;
  }
  const bounds = cellBounds(cell.row, cell.col, cell.cell_size);
  const counts = Object.entries(cell.counts)
    .map(([category, count]) => `<li>${category}: ${count}</li>`)
    .join("");
  container.innerHTML = `
    <h3>cell (${cell.row}, ${cell.col})</h3>
    <p>${bounds.minLat.toFixed(3)}..${bounds.maxLat.toFixed(3)} lat,
       ${bounds.minLon.toFixed(3)}..${bounds.maxLon.toFixed(3)} lon</p>
    <p>total validated reports: <strong>${cell.total}</strong></p>
    <ul>${counts}</ul>
    <p>latest: ${cell.latest_time ?? "-"}</p>`;
}

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}
