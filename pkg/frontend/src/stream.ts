// Resumable consumer for the server-sent event stream.
//
// The cursor is the seq of the last delivered event; every (re)connect asks
// for since_seq=<cursor>, and a seq guard drops anything the server replays
// below it (e.g. after the browser's own EventSource auto-retry, which
// reuses the stale URL). Together that gives exactly-once delivery to the
// handler across any number of disconnects.

import type { StreamEventWire, StreamKind } from "./types.js";

export const STREAM_KINDS: StreamKind[] = [
  "report-validated",
  "map-cell-updated",
  "stats-updated",
];

export interface EventSourceLike {
  addEventListener(type: string, listener: (event: MessageEvent) => void): void;
  close(): void;
}

export interface StreamOptions {
  factory?: (url: string) => EventSourceLike;
  schedule?: (fn: () => void, ms: number) => void;
  retryMs?: number;
}

export class ResumableStream {
  private cursor = 0;
  private source: EventSourceLike | null = null;
  private stopped = false;
  private readonly factory: (url: string) => EventSourceLike;
  private readonly schedule: (fn: () => void, ms: number) => void;
  private readonly retryMs: number;

  constructor(
    private buildUrl: (sinceSeq: number) => string,
    private onEvent: (event: StreamEventWire) => void,
    options: StreamOptions = {},
  ) {
    this.factory =
      options.factory ?? ((url) => new EventSource(url) as unknown as EventSourceLike);
    this.schedule = options.schedule ?? ((fn, ms) => void setTimeout(fn, ms));
    this.retryMs = options.retryMs ?? 1000;
  }

  get lastSeenSeq(): number {
    return this.cursor;
  }

  start(sinceSeq: number): void {
    this.cursor = Math.max(this.cursor, sinceSeq);
    this.connect();
  }

  stop(): void {
    this.stopped = true;
    this.source?.close();
    this.source = null;
  }

  private connect(): void {
    if (this.stopped) return;
    const source = this.factory(this.buildUrl(this.cursor));
    this.source = source;
    for (const kind of STREAM_KINDS) {
      source.addEventListener(kind, (event) => this.handle(event));
    }
    source.addEventListener("error", () => {
      if (this.source !== source) return; // superseded connection
      source.close();
      this.source = null;
      this.schedule(() => this.connect(), this.retryMs);
    });
  }

  private handle(message: MessageEvent): void {
    const event = JSON.parse(message.data) as StreamEventWire;
    if (event.seq <= this.cursor) return;
    this.cursor = event.seq;
    this.onEvent(event);
  }
}
