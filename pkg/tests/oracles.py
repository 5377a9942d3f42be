"""Independent reference implementations the main code is checked against.

Deliberately naive: plain per-report loops over plain dicts, written from the
operation definitions alone. Nothing here calls into civisense aggregation
code, so these stay valid oracles for it.
"""

import math


def brute_force_cells(reports, bbox, cell_size, category_filter=None):
    """Per-report loop binning; returns {(row, col): (total, counts, latest_iso)}."""
    out = {}
    for report in reports:
        lat, lon = report.location.lat, report.location.lon
        if not (bbox.min_lat <= lat <= bbox.max_lat and bbox.min_lon <= lon <= bbox.max_lon):
            continue
        tags = {c.value for c in report.categories}
        if category_filter is not None:
            tags &= {c.value for c in category_filter}
            if not tags:
                continue
        key = (math.floor(lat / cell_size), math.floor(lon / cell_size))
        total, counts, latest = out.get(key, (0, {}, None))
        total += 1
        for tag in tags:
            counts[tag] = counts.get(tag, 0) + 1
        if latest is None or report.server_time > latest:
            latest = report.server_time
        out[key] = (total, counts, latest)
    return out


def cells_to_comparable(map_cells):
    """Project MapCell objects onto the oracle's dict shape for set equality."""
    return {
        (cell.index.row, cell.index.col): (
            cell.total,
            {c.value: n for c, n in cell.counts.items()},
            cell.latest_time,
        )
        for cell in map_cells
    }
