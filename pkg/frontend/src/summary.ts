// Summary export helpers: period validation and download naming. The
// document itself comes verbatim from the server; the UI adds nothing.

export interface SummaryRequest {
  start: string;
  end: string;
  detail: "summarized" | "detailed";
  format: "json" | "text";
}

/** Returns an error message, or null when the period is usable. */
export function periodProblem(start: string, end: string): string | null {
  const startMs = Date.parse(start);
  const endMs = Date.parse(end);
  if (Number.isNaN(startMs)) return "start is not a valid timestamp";
  if (Number.isNaN(endMs)) return "end is not a valid timestamp";
  if (startMs >= endMs) return "start must precede end";
  return null;
}

/** Treat a date-only input as midnight UTC so periods are unambiguous. */
export function toRfc3339(input: string): string {
  if (/^\d{4}-\d{2}-\d{2}$/.test(input)) {
    return `${input}T00:00:00Z`;
  }
  return input;
}

export function downloadName(request: SummaryRequest): string {
  const stamp = (value: string) => value.slice(0, 10);
  const extension = request.format === "text" ? "txt" : "json";
  return `pollution-summary-${stamp(request.start)}-${stamp(request.end)}-${request.detail}.${extension}`;
}
