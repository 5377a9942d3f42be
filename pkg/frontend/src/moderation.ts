// Moderation queue state: pending reports, oldest first. Rows leave the
// queue only on server confirmation (a verdict response or a validation
// event on the stream) — no optimistic removal.

import type { PendingReportWire } from "./types.js";

export interface ModerationState {
  rows: PendingReportWire[];
}

export function createModerationState(): ModerationState {
  return { rows: [] };
}

export function setRows(state: ModerationState, rows: PendingReportWire[]): void {
  state.rows = [...rows].sort(
    (a, b) =>
      a.server_time.localeCompare(b.server_time) || a.report_id - b.report_id,
  );
}

export function removeRow(state: ModerationState, reportId: number): boolean {
  const before = state.rows.length;
  state.rows = state.rows.filter((row) => row.report_id !== reportId);
  return state.rows.length < before;
}
