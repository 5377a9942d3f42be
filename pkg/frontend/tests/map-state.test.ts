// The map reducer: snapshot + stream deltas, exactly once, filter-aware.

import { beforeEach, describe, expect, it } from "vitest";
import { applyStreamEvent, createMapView, loadSnapshot, maxCellTotal } from "../src/map-state.js";
import type { MapCellWire, StreamEventWire } from "../src/types.js";

const BBOX = { minLat: 23.6, minLon: 90.3, maxLat: 23.95, maxLon: 90.55 };

function snapshotCell(row: number, col: number, total = 1): MapCellWire {
  return { row, col, cell_size: 0.01, counts: { garbage: total }, total, latest_time: null };
}

function cellUpdate(seq: number, delta: 1 | -1, lat = 23.7465, lon = 90.376): StreamEventWire {
  return {
    seq,
    log_seq: seq,
    kind: "map-cell-updated",
    report_id: seq,
    categories: ["garbage"],
    lat,
    lon,
    delta,
  };
}

describe("applyStreamEvent", () => {
  let view: ReturnType<typeof createMapView>;

  beforeEach(() => {
    view = createMapView(BBOX, 0.01);
  });

  it("creates and increments cells from map-cell-updated", () => {
    const result = applyStreamEvent(view, cellUpdate(1, 1));
    expect(result.applied).toBe(true);
    expect(result.changedCellKey).toBe("2374:9037");
    const cell = view.cells.get("2374:9037")!;
    expect(cell.total).toBe(1);
    expect(cell.counts.garbage).toBe(1);

    applyStreamEvent(view, cellUpdate(2, 1));
    expect(view.cells.get("2374:9037")!.total).toBe(2);
  });

  it("never applies the same seq twice", () => {
    applyStreamEvent(view, cellUpdate(1, 1));
    const replay = applyStreamEvent(view, cellUpdate(1, 1));
    expect(replay.applied).toBe(false);
    expect(view.cells.get("2374:9037")!.total).toBe(1);
  });

  it("drops events at or below the snapshot watermark", () => {
    loadSnapshot(view, [snapshotCell(2374, 9037, 5)], 10);
    expect(applyStreamEvent(view, cellUpdate(10, 1)).applied).toBe(false);
    expect(view.cells.get("2374:9037")!.total).toBe(5);
    expect(applyStreamEvent(view, cellUpdate(11, 1)).applied).toBe(true);
    expect(view.cells.get("2374:9037")!.total).toBe(6);
  });

  it("removes a cell when its total reaches zero", () => {
    applyStreamEvent(view, cellUpdate(1, 1));
    applyStreamEvent(view, cellUpdate(2, -1));
    expect(view.cells.size).toBe(0);
  });

  it("ignores cell updates outside the bbox but still advances the cursor", () => {
    const faraway = cellUpdate(1, 1, 10.0, 10.0);
    const result = applyStreamEvent(view, faraway);
    expect(result.applied).toBe(true);
    expect(result.changedCellKey).toBeNull();
    expect(view.cells.size).toBe(0);
    expect(view.lastSeenSeq).toBe(1);
  });

  it("honors the category filter like the server does", () => {
    view.category = "air";
    const garbageOnly = cellUpdate(1, 1);
    expect(applyStreamEvent(view, garbageOnly).changedCellKey).toBeNull();

    const mixed: StreamEventWire = { ...cellUpdate(2, 1), categories: ["garbage", "air"] };
    const result = applyStreamEvent(view, mixed);
    expect(result.changedCellKey).toBe("2374:9037");
    const cell = view.cells.get("2374:9037")!;
    expect(cell.total).toBe(1);
    expect(cell.counts).toEqual({ air: 1 }); // only the filtered counter
  });

  it("routes report-validated to the queue, not the cells", () => {
    const validated: StreamEventWire = {
      seq: 1, log_seq: 1, kind: "report-validated", report_id: 7,
      categories: ["garbage"], lat: 23.7465, lon: 90.376, provenance: "admin",
    };
    const result = applyStreamEvent(view, validated);
    expect(result.validatedReportId).toBe(7);
    expect(view.cells.size).toBe(0);
  });

  it("marks stats dirty on stats-updated", () => {
    view.statsDirty = false;
    const result = applyStreamEvent(view, {
      seq: 1, log_seq: 1, kind: "stats-updated", reason: "report-validated", report_id: 1,
    });
    expect(result.statsChanged).toBe(true);
    expect(view.statsDirty).toBe(true);
  });

  it("keeps lastSeenSeq monotonically non-decreasing", () => {
    const seen: number[] = [];
    loadSnapshot(view, [], 4);
    seen.push(view.lastSeenSeq);
    applyStreamEvent(view, cellUpdate(9, 1));
    seen.push(view.lastSeenSeq);
    loadSnapshot(view, [], 6); // older snapshot must not move the cursor back
    seen.push(view.lastSeenSeq);
    applyStreamEvent(view, cellUpdate(12, 1));
    seen.push(view.lastSeenSeq);
    expect(seen).toEqual([4, 9, 9, 12]);
    const sorted = [...seen].sort((a, b) => a - b);
    expect(seen).toEqual(sorted);
  });
});

describe("maxCellTotal", () => {
  it("tracks the hottest cell for the color scale", () => {
    const view = createMapView(BBOX, 0.01);
    loadSnapshot(view, [snapshotCell(2374, 9037, 5), snapshotCell(2375, 9037, 2)], 1);
    expect(maxCellTotal(view)).toBe(5);
  });
});
