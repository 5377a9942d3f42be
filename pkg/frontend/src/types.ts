// Wire types, mirroring the server's JSON field names exactly.

export type CategoryLabel =
  | "garbage"
  | "air"
  | "water"
  | "noise"
  | "light"
  | "visual"
  | "other";

export const ALL_CATEGORIES: CategoryLabel[] = [
  "garbage",
  "air",
  "water",
  "noise",
  "light",
  "visual",
  "other",
];

export interface StatusWire {
  state: "pending" | "validated" | "rejected";
  provenance?: "community" | "admin";
}

export interface PublicReportWire {
  report_id: number;
  author: string;
  categories: CategoryLabel[];
  location: { lat: number; lon: number; source: string };
  text: string;
  attachment: { kind: string } | null;
  status: StatusWire;
  server_time: string;
}

/** Moderation-queue rows carry the evidence plus the current trust score. */
export interface PendingReportWire extends PublicReportWire {
  score: number;
  rating_count: number;
}

export interface MapCellWire {
  row: number;
  col: number;
  cell_size: number;
  counts: Partial<Record<CategoryLabel, number>>;
  total: number;
  latest_time: string | null;
}

export interface MapResponseWire {
  cells: MapCellWire[];
  as_of_seq: number;
}

export interface StatsWire {
  total_validated: number;
  distribution: { category: CategoryLabel; count: number; fraction: number }[];
}

export type StreamKind = "report-validated" | "map-cell-updated" | "stats-updated";

export interface StreamEventWire {
  seq: number;
  log_seq: number;
  kind: StreamKind;
  report_id?: number;
  categories?: CategoryLabel[];
  lat?: number;
  lon?: number;
  delta?: number;
  provenance?: string;
  reason?: string;
}

export interface SummaryWire {
  period: { start: string; end: string };
  detail: "summarized" | "detailed";
  total_reports: number;
  category_totals: { category: CategoryLabel; count: number; fraction: number }[];
  top_cells: MapCellWire[];
  cell_size: number;
  reports?: PublicReportWire[];
}

export interface BBox {
  minLat: number;
  minLon: number;
  maxLat: number;
  maxLon: number;
}
