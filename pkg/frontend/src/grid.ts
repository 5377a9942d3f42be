// Grid math matching the backend's floor-division binning exactly.
// Both sides compute in IEEE-754 doubles, so indices agree bit-for-bit.

import type { BBox } from "./types.js";

export function cellOf(lat: number, lon: number, cellSize: number): { row: number; col: number } {
  if (!(cellSize > 0) || !Number.isFinite(cellSize)) {
    throw new Error(`cell size must be a positive number, got ${cellSize}`);
  }
  return { row: Math.floor(lat / cellSize), col: Math.floor(lon / cellSize) };
}

export function cellKey(row: number, col: number): string {
  return `${row}:${col}`;
}

export function inBBox(bbox: BBox, lat: number, lon: number): boolean {
  return (
    bbox.minLat <= lat && lat <= bbox.maxLat && bbox.minLon <= lon && lon <= bbox.maxLon
  );
}

/** Lat/lon rectangle covered by a cell (south-west corner inclusive). */
export function cellBounds(row: number, col: number, cellSize: number) {
  return {
    minLat: row * cellSize,
    minLon: col * cellSize,
    maxLat: (row + 1) * cellSize,
    maxLon: (col + 1) * cellSize,
  };
}
