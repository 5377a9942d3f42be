"""Grid aggregation of validated reports: pollution map, statistics, summaries.

A cell is the floor-division bin of (lat, lon) by ``cell_size`` degrees, so
binning is deterministic and boundary points land on the higher cell's lower
edge. All functions are pure batch operations over immutable report
snapshots; callers are responsible for passing validated reports only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime
from typing import Callable, Iterable, Optional, Sequence

from . import errors
from .encoding import format_time
from .model import Category, GeoPoint, PublicReport, Report, redact

#: Default grid pitch in degrees (~550 m east-west at Dhaka's latitude).
DEFAULT_CELL_SIZE = 0.005
SUMMARY_TOP_K = 5


@dataclass(frozen=True)
class CellIndex:
    row: int
    col: int
    cell_size: float


@dataclass(frozen=True)
class BBox:
    """Inclusive lat/lon rectangle."""

    min_lat: float
    min_lon: float
    max_lat: float
    max_lon: float

    def __post_init__(self):
        if not (
            -90.0 <= self.min_lat <= self.max_lat <= 90.0
            and -180.0 <= self.min_lon <= self.max_lon <= 180.0
        ):
            raise errors.BadBBox(
                f"bad bbox ({self.min_lat}, {self.min_lon}, {self.max_lat}, {self.max_lon})"
            )

    def contains(self, point: GeoPoint) -> bool:
        return (
            self.min_lat <= point.lat <= self.max_lat
            and self.min_lon <= point.lon <= self.max_lon
        )


@dataclass
class MapCell:
    """One occupied grid cell; ``total`` counts reports, ``counts`` counts tags."""

    index: CellIndex
    counts: dict[Category, int] = field(default_factory=dict)
    total: int = 0
    latest_time: Optional[datetime] = None

    def to_wire(self) -> dict:
        return {
            "row": self.index.row,
            "col": self.index.col,
            "cell_size": self.index.cell_size,
            "counts": {c.value: n for c, n in sorted(self.counts.items())},
            "total": self.total,
            "latest_time": format_time(self.latest_time) if self.latest_time else None,
        }


@dataclass(frozen=True)
class CategoryShare:
    category: Category
    count: float
    fraction: float

    def to_wire(self) -> dict:
        return {
            "category": self.category.value,
            "count": self.count,
            "fraction": self.fraction,
        }


def check_cell_size(cell_size: float) -> float:
    if not (isinstance(cell_size, (int, float)) and math.isfinite(cell_size) and cell_size > 0):
        raise errors.BadCellSize(f"cell_size must be a positive number, got {cell_size!r}")
    return float(cell_size)


def cell_of(point: GeoPoint, cell_size: float) -> CellIndex:
    """Floor-division grid index of a point."""
    cell_size = check_cell_size(cell_size)
    return CellIndex(
        row=math.floor(point.lat / cell_size),
        col=math.floor(point.lon / cell_size),
        cell_size=cell_size,
    )


def aggregate_map(
    reports: Iterable[Report],
    bbox: BBox,
    cell_size: float = DEFAULT_CELL_SIZE,
    category_filter: Optional[frozenset[Category]] = None,
) -> list[MapCell]:
    """Bin reports into occupied grid cells inside ``bbox``.

    A report with k categories increments k per-category counters but adds 1
    to the cell total. With a category filter, only reports carrying at least
    one filtered category count, and only filtered counters are kept, so a
    single-category filter's totals equal the unfiltered per-category counts.
    Returns cells sorted by (row, col); empty cells are never emitted.
    """
    cell_size = check_cell_size(cell_size)
    cells: dict[tuple[int, int], MapCell] = {}
    for report in reports:
        if not bbox.contains(report.location):
            continue
        if category_filter is not None:
            counted = report.categories & category_filter
            if not counted:
                continue
        else:
            counted = report.categories
        index = cell_of(report.location, cell_size)
        cell = cells.get((index.row, index.col))
        if cell is None:
            cell = MapCell(index=index)
            cells[(index.row, index.col)] = cell
        cell.total += 1
        for category in counted:
            cell.counts[category] = cell.counts.get(category, 0) + 1
        if cell.latest_time is None or report.server_time > cell.latest_time:
            cell.latest_time = report.server_time
    return [cells[key] for key in sorted(cells)]


def category_distribution(reports: Sequence[Report]) -> list[CategoryShare]:
    """Share of each category across reports, with 1/k fractional attribution.

    A k-category report contributes 1/k to each of its categories, so the
    weighted counts still sum to the report count and fractions sum to 1.
    Sorted by descending count, then category name; empty input yields [].
    """
    if not reports:
        return []
    weights: dict[Category, float] = {}
    for report in reports:
        share = 1.0 / len(report.categories)
        for category in report.categories:
            weights[category] = weights.get(category, 0.0) + share
    n = len(reports)
    ordered = sorted(weights.items(), key=lambda item: (-item[1], item[0].value))
    return [
        CategoryShare(category=c, count=w, fraction=w / n) for c, w in ordered
    ]


@dataclass(frozen=True)
class Period:
    """Half-open UTC interval [start, end)."""

    start: datetime
    end: datetime

    def __post_init__(self):
        if self.start >= self.end:
            raise errors.BadPeriod("period start must precede end")

    def contains(self, ts: datetime) -> bool:
        return self.start <= ts < self.end


@dataclass(frozen=True)
class SummaryDocument:
    """Authority-facing rollup of validated reports over a period."""

    period: Period
    detail: str  # "summarized" | "detailed"
    total_reports: int
    category_totals: tuple[CategoryShare, ...]
    top_cells: tuple[MapCell, ...]
    cell_size: float
    reports: tuple[PublicReport, ...] = ()

    def to_wire(self) -> dict:
        wire = {
            "period": {
                "start": format_time(self.period.start),
                "end": format_time(self.period.end),
            },
            "detail": self.detail,
            "total_reports": self.total_reports,
            "category_totals": [share.to_wire() for share in self.category_totals],
            "top_cells": [cell.to_wire() for cell in self.top_cells],
            "cell_size": self.cell_size,
        }
        if self.detail == "detailed":
            wire["reports"] = [report.to_wire() for report in self.reports]
        return wire


def build_summary(
    reports: Iterable[Report],
    period: Period,
    detail: str = "summarized",
    cell_size: float = DEFAULT_CELL_SIZE,
    resolve_display_name: Callable[[str], str] = lambda user_id: user_id,
) -> SummaryDocument:
    """Build the detailed or summarized document over one period.

    Input must already be validated reports; the document filters them to the
    period by server time. Category totals always list all categories (zeros
    included), largest share first; the top-cell list holds the 5 busiest
    cells. Detailed mode appends every redacted report in chronological order.
    """
    if detail not in ("summarized", "detailed"):
        raise errors.BadDetail(f"detail must be 'summarized' or 'detailed', got {detail!r}")
    cell_size = check_cell_size(cell_size)
    in_period = [r for r in reports if period.contains(r.server_time)]

    present = {share.category: share for share in category_distribution(in_period)}
    totals = list(present.values())
    for category in Category:
        if category not in present:
            totals.append(CategoryShare(category=category, count=0.0, fraction=0.0))
    totals.sort(key=lambda share: (-share.count, share.category.value))

    world = BBox(-90.0, -180.0, 90.0, 180.0)
    cells = aggregate_map(in_period, world, cell_size)
    cells.sort(key=lambda cell: (-cell.total, cell.index.row, cell.index.col))
    top_cells = tuple(cells[:SUMMARY_TOP_K])

    public: tuple[PublicReport, ...] = ()
    if detail == "detailed":
        ordered = sorted(in_period, key=lambda r: (r.server_time, r.report_id))
        public = tuple(redact(r, resolve_display_name) for r in ordered)

    return SummaryDocument(
        period=period,
        detail=detail,
        total_reports=len(in_period),
        category_totals=tuple(totals),
        top_cells=top_cells,
        cell_size=cell_size,
        reports=public,
    )


def render_summary_text(doc: SummaryDocument) -> str:
    """Fixed-column printable rendering of a summary document."""
    lines = [
        f"POLLUTION SUMMARY  {format_time(doc.period.start)} .. {format_time(doc.period.end)}",
        f"mode: {doc.detail}    validated reports: {doc.total_reports}",
        "",
        "CATEGORY TOTALS",
        f"  {'category':<10} {'count':>8} {'share':>7}",
    ]
    for share in doc.category_totals:
        lines.append(
            f"  {share.category.value:<10} {share.count:>8.2f} {share.fraction * 100:>6.1f}%"
        )
    lines.append("")
    lines.append(f"TOP CELLS  (cell_size {doc.cell_size:g} deg)")
    lines.append(f"  {'row':>8} {'col':>8} {'total':>6}  latest")
    for cell in doc.top_cells:
        latest = format_time(cell.latest_time) if cell.latest_time else "-"
        lines.append(
            f"  {cell.index.row:>8} {cell.index.col:>8} {cell.total:>6}  {latest}"
        )
    if doc.detail == "detailed":
        lines.append("")
        lines.append("REPORTS")
        lines.append(f"  {'id':>6}  {'time':<27} {'status':<10} {'author':<16} categories / text")
        for report in doc.reports:
            cats = ",".join(c.value for c in report.categories)
            text = report.text.replace("\n", " ")
            lines.append(
                f"  {report.report_id:>6}  {format_time(report.server_time):<27} "
                f"{report.status.state.value:<10} {report.author:<16} [{cats}] {text}"
            )
    lines.append("")
    return "\n".join(lines)
