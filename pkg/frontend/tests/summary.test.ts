import { describe, expect, it } from "vitest";
import { downloadName, periodProblem, toRfc3339 } from "../src/summary.js";

describe("periodProblem", () => {
  it("accepts a well-ordered period", () => {
    expect(periodProblem("2026-08-01T00:00:00Z", "2026-09-01T00:00:00Z")).toBeNull();
  });

  it("rejects start >= end", () => {
    expect(periodProblem("2026-09-01T00:00:00Z", "2026-08-01T00:00:00Z")).toMatch(/precede/);
    expect(periodProblem("2026-08-01T00:00:00Z", "2026-08-01T00:00:00Z")).toMatch(/precede/);
  });

  it("rejects garbage timestamps", () => {
    expect(periodProblem("soon", "2026-08-01T00:00:00Z")).toMatch(/start/);
    expect(periodProblem("2026-08-01T00:00:00Z", "later")).toMatch(/end/);
  });
});

describe("toRfc3339", () => {
  it("expands date-only input to midnight UTC", () => {
    expect(toRfc3339("2026-08-01")).toBe("2026-08-01T00:00:00Z");
  });

  it("passes full timestamps through", () => {
    expect(toRfc3339("2026-08-01T12:30:00Z")).toBe("2026-08-01T12:30:00Z");
  });
});

describe("downloadName", () => {
  it("names the file after period, detail, and format", () => {
    expect(
      downloadName({
        start: "2026-08-01T00:00:00Z",
        end: "2026-09-01T00:00:00Z",
        detail: "summarized",
        format: "text",
      }),
    ).toBe("pollution-summary-2026-08-01-2026-09-01-summarized.txt");
  });
});
