// Dashboard bootstrap: login, then wire the map, stats, moderation queue,
// and summary export to the API and the live event stream.

import { DashboardApi, ApiError } from "./api.js";
import { applyStreamEvent, createMapView, loadSnapshot } from "./map-state.js";
import { createModerationState, removeRow, setRows } from "./moderation.js";
import { ResumableStream } from "./stream.js";
import { downloadName, periodProblem, toRfc3339, type SummaryRequest } from "./summary.js";
import { cellAt, renderCellDetail, renderMap, renderQueue, renderStats } from "./render.js";
import { ALL_CATEGORIES, type CategoryLabel } from "./types.js";

// Dhaka's urban core; pan/zoom is out of scope for this dashboard.
const DEFAULT_BBOX = { minLat: 23.6, minLon: 90.3, maxLat: 23.95, maxLon: 90.55 };
const QUEUE_POLL_MS = 10_000;

function element<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

function main(): void {
  const loginSection = element<HTMLElement>("login");
  const dashboard = element<HTMLElement>("dashboard");
  const loginForm = element<HTMLFormElement>("login-form");
  const loginError = element<HTMLElement>("login-error");

  loginForm.addEventListener("submit", async (event) => {
    event.preventDefault();
    const server = element<HTMLInputElement>("server-url").value.replace(/\/$/, "");
    const name = element<HTMLInputElement>("login-name").value;
    const credential = element<HTMLInputElement>("login-credential").value;
    const api = new DashboardApi(server);
    try {
      await api.login(name, credential);
    } catch (error) {
      loginError.textContent =
        error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
      return;
    }
    loginSection.hidden = true;
    dashboard.hidden = false;
    mountDashboard(api);
  });
}

function mountDashboard(api: DashboardApi): void {
  const canvas = element<HTMLCanvasElement>("map-canvas");
  const statsPanel = element<HTMLElement>("stats-panel");
  const queuePanel = element<HTMLElement>("queue-panel");
  const detailPanel = element<HTMLElement>("cell-detail");
  const banner = element<HTMLElement>("banner");
  const cellSizeSelect = element<HTMLSelectElement>("cell-size");
  const categorySelect = element<HTMLSelectElement>("category-filter");

  for (const category of ALL_CATEGORIES) {
    const option = document.createElement("option");
    option.value = option.textContent = category;
    categorySelect.appendChild(option);
  }

  const view = createMapView(DEFAULT_BBOX, Number(cellSizeSelect.value));
  const queue = createModerationState();

  const showError = (error: unknown) => {
    banner.textContent = error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
    banner.hidden = false;
    setTimeout(() => (banner.hidden = true), 6000);
  };

  const refreshMap = async () => {
    const snapshot = await api.mapSnapshot(view.bbox, view.cellSize, view.category);
    loadSnapshot(view, snapshot.cells, snapshot.as_of_seq);
    renderMap(canvas, view);
  };

  const refreshStats = async () => {
    renderStats(statsPanel, await api.stats());
    view.statsDirty = false;
  };

  const handleVerdict = async (reportId: number, verdict: "confirm" | "reject") => {
    try {
      await api.verdict(reportId, verdict); // no optimistic UI: server first
    } catch (error) {
      showError(error);
      return;
    }
    removeRow(queue, reportId);
    paintQueue();
    void refreshQueue().catch(showError); // re-sync; also picks up new pending rows
  };

  const paintQueue = () => {
    renderQueue(queuePanel, queue.rows, { onVerdict: handleVerdict });
  };

  const refreshQueue = async () => {
    setRows(queue, await api.pendingReports());
    paintQueue();
  };

  const stream = new ResumableStream(
    (sinceSeq) => api.streamUrl(sinceSeq),
    (event) => {
      const result = applyStreamEvent(view, event);
      if (result.changedCellKey) {
        renderMap(canvas, view); // incremental cell change, no reload
      }
      if (result.validatedReportId !== null && removeRow(queue, result.validatedReportId)) {
        void refreshQueue();
      }
      if (result.statsChanged) {
        void refreshStats();
      }
    },
  );

  canvas.addEventListener("click", (event) => {
    const rect = canvas.getBoundingClientRect();
    const cell = cellAt(
      canvas,
      view,
      ((event.clientX - rect.left) / rect.width) * canvas.width,
      ((event.clientY - rect.top) / rect.height) * canvas.height,
    );
    renderCellDetail(detailPanel, cell);
  });

  const onViewControlChange = () => {
    view.cellSize = Number(cellSizeSelect.value);
    view.category = (categorySelect.value || null) as CategoryLabel | null;
    refreshMap().catch(showError);
  };
  cellSizeSelect.addEventListener("change", onViewControlChange);
  categorySelect.addEventListener("change", onViewControlChange);

  element<HTMLFormElement>("export-form").addEventListener("submit", async (event) => {
    event.preventDefault();
    const request: SummaryRequest = {
      start: toRfc3339(element<HTMLInputElement>("export-start").value),
      end: toRfc3339(element<HTMLInputElement>("export-end").value),
      detail: element<HTMLSelectElement>("export-detail").value as SummaryRequest["detail"],
      format: element<HTMLSelectElement>("export-format").value as SummaryRequest["format"],
    };
    const problem = periodProblem(request.start, request.end);
    const exportError = element<HTMLElement>("export-error");
    if (problem) {
      exportError.textContent = problem;
      return;
    }
    exportError.textContent = "";
    try {
      const content =
        request.format === "text"
          ? await api.summaryText(request.start, request.end, request.detail)
          : JSON.stringify(
              await api.summaryJson(request.start, request.end, request.detail),
              null,
              2,
            );
      const blob = new Blob([content], {
        type: request.format === "text" ? "text/plain" : "application/json",
      });
      const anchor = document.createElement("a");
      anchor.href = URL.createObjectURL(blob);
      anchor.download = downloadName(request);
      anchor.click();
      URL.revokeObjectURL(anchor.href);
    } catch (error) {
      showError(error);
    }
  });

  (async () => {
    try {
      await refreshMap();
      await refreshStats();
      await refreshQueue();
      stream.start(view.lastSeenSeq); // resume exactly after the snapshot
      setInterval(() => void refreshQueue().catch(showError), QUEUE_POLL_MS);
      renderCellDetail(detailPanel, null);
    } catch (error) {
      showError(error);
    }
  })();
}

main();
