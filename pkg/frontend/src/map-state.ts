// Map view state: a cell snapshot from /map plus deltas from the stream.
//
// Cell counts change only through `map-cell-updated` events (delta +1 on
// validation, -1 on admin rejection); `report-validated` is a notification
// for the queue, and `stats-updated` marks the stats panel stale. Applying
// the validation event to cells as well would double-count.
//
// `lastSeenSeq` is monotonically non-decreasing and is the cursor a
// reconnect resumes from, so no update is applied twice or skipped.

import { cellKey, cellOf, inBBox } from "./grid.js";
import type { BBox, CategoryLabel, MapCellWire, StreamEventWire } from "./types.js";

export interface MapViewState {
  bbox: BBox;
  cellSize: number;
  category: CategoryLabel | null;
  lastSeenSeq: number;
  cells: Map<string, MapCellWire>;
  statsDirty: boolean;
}

export interface ApplyResult {
  applied: boolean;
  changedCellKey: string | null;
  validatedReportId: number | null;
  statsChanged: boolean;
}

const IGNORED: ApplyResult = {
  applied: false,
  changedCellKey: null,
  validatedReportId: null,
  statsChanged: false,
};

export function createMapView(
  bbox: BBox,
  cellSize: number,
  category: CategoryLabel | null = null,
): MapViewState {
  return {
    bbox,
    cellSize,
    category,
    lastSeenSeq: 0,
    cells: new Map(),
    statsDirty: true,
  };
}

/** Replace the cells with a /map snapshot consistent up to `asOfSeq`. */
export function loadSnapshot(
  state: MapViewState,
  cells: MapCellWire[],
  asOfSeq: number,
): void {
  state.cells = new Map(cells.map((cell) => [cellKey(cell.row, cell.col), cell]));
  state.lastSeenSeq = Math.max(state.lastSeenSeq, asOfSeq);
}

export function applyStreamEvent(state: MapViewState, event: StreamEventWire): ApplyResult {
  if (event.seq <= state.lastSeenSeq) {
    return IGNORED; // already reflected (snapshot watermark or redelivery)
  }
  state.lastSeenSeq = event.seq;

  if (event.kind === "stats-updated") {
    state.statsDirty = true;
    return { applied: true, changedCellKey: null, validatedReportId: null, statsChanged: true };
  }

  if (event.kind === "report-validated") {
    return {
      applied: true,
      changedCellKey: null,
      validatedReportId: event.report_id ?? null,
      statsChanged: false,
    };
  }

  // map-cell-updated
  const { lat, lon, delta } = event;
  if (lat === undefined || lon === undefined || delta === undefined) {
    return { applied: true, changedCellKey: null, validatedReportId: null, statsChanged: false };
  }
  if (!inBBox(state.bbox, lat, lon)) {
    return { applied: true, changedCellKey: null, validatedReportId: null, statsChanged: false };
  }
  const categories = event.categories ?? [];
  if (state.category !== null && !categories.includes(state.category)) {
    return { applied: true, changedCellKey: null, validatedReportId: null, statsChanged: false };
  }
  const counted = state.category !== null ? [state.category] : categories;

  const { row, col } = cellOf(lat, lon, state.cellSize);
  const key = cellKey(row, col);
  let cell = state.cells.get(key);
  if (cell === undefined) {
    cell = { row, col, cell_size: state.cellSize, counts: {}, total: 0, latest_time: null };
    state.cells.set(key, cell);
  }
  cell.total += delta;
  for (const category of counted) {
    const next = (cell.counts[category] ?? 0) + delta;
    if (next > 0) {
      cell.counts[category] = next;
    } else {
      delete cell.counts[category];
    }
  }
  if (cell.total <= 0) {
    state.cells.delete(key); // empty cells are never shown
  }
  return { applied: true, changedCellKey: key, validatedReportId: null, statsChanged: false };
}

export function maxCellTotal(state: MapViewState): number {
  let max = 0;
  for (const cell of state.cells.values()) {
    if (cell.total > max) max = cell.total;
  }
  return max;
}
