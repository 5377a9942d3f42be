// Thin fetch wrapper over the server's JSON API. The dashboard is a pure
// client: every number it renders comes out of one of these calls or the
// event stream.

import type {
  BBox,
  CategoryLabel,
  MapResponseWire,
  PendingReportWire,
  PublicReportWire,
  StatsWire,
  StatusWire,
  SummaryWire,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public code: string,
    message: string,
    public status: number,
  ) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class DashboardApi {
  token: string | null = null;

  constructor(
    public baseUrl: string,
    private fetchFn: FetchLike = (url, init) => globalThis.fetch(url, init),
  ) {}

  private async request(path: string, init: RequestInit = {}): Promise<Response> {
    const headers: Record<string, string> = {
      ...(init.headers as Record<string, string> | undefined),
    };
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    if (init.body) headers["Content-Type"] = "application/json";
    const response = await this.fetchFn(this.baseUrl + path, { ...init, headers });
    if (!response.ok) {
      let code = `HTTP${response.status}`;
      let message = response.statusText;
      try {
        const body = await response.json();
        code = body.error.code;
        message = body.error.message;
      } catch {
        // not an API error envelope; keep the HTTP status
      }
      throw new ApiError(code, message, response.status);
    }
    return response;
  }

  async login(name: string, credential: string): Promise<string> {
    const response = await this.request("/api/v1/auth/login", {
      method: "POST",
      body: JSON.stringify({ name, credential }),
    });
    const body = await response.json();
    this.token = body.token;
    return body.token;
  }

  async mapSnapshot(
    bbox: BBox,
    cellSize: number,
    category: CategoryLabel | null,
  ): Promise<MapResponseWire> {
    const params = new URLSearchParams({
      min_lat: String(bbox.minLat),
      min_lon: String(bbox.minLon),
      max_lat: String(bbox.maxLat),
      max_lon: String(bbox.maxLon),
      cell_size: String(cellSize),
    });
    if (category) params.set("category", category);
    const response = await this.request(`/api/v1/map?${params}`);
    return response.json();
  }

  async stats(): Promise<StatsWire> {
    return (await this.request("/api/v1/stats/categories")).json();
  }

  async pendingReports(): Promise<PendingReportWire[]> {
    const body = await (await this.request("/api/v1/admin/reports/pending")).json();
    return body.reports;
  }

  async verdict(reportId: number, verdict: "confirm" | "reject"): Promise<StatusWire> {
    const response = await this.request(`/api/v1/admin/reports/${reportId}/verdict`, {
      method: "POST",
      body: JSON.stringify({ verdict }),
    });
    return (await response.json()).status;
  }

  async feedPage(page: number, pageSize: number): Promise<PublicReportWire[]> {
    const params = new URLSearchParams({ page: String(page), page_size: String(pageSize) });
    return (await (await this.request(`/api/v1/feed?${params}`)).json()).reports;
  }

  async summaryJson(start: string, end: string, detail: string): Promise<SummaryWire> {
    const params = new URLSearchParams({ start, end, detail, format: "json" });
    return (await this.request(`/api/v1/admin/summary?${params}`)).json();
  }

  async summaryText(start: string, end: string, detail: string): Promise<string> {
    const params = new URLSearchParams({ start, end, detail, format: "text" });
    return (await this.request(`/api/v1/admin/summary?${params}`)).text();
  }

  streamUrl(sinceSeq: number): string {
    return `${this.baseUrl}/api/v1/stream?since_seq=${sinceSeq}`;
  }
}
