"""Participatory pollution reporting platform.

Citizens submit geotagged, categorized pollution reports (optionally
anonymously, optionally queued offline); community ratings and admin verdicts
drive a trust-based validation pipeline; authorities read a grid pollution
map, category statistics, and printable summaries. Backed by an append-only
event log that makes every score and reputation replayable.
"""

from .model import (
    ANONYMOUS,
    AttachmentKind,
    AttachmentMeta,
    Category,
    GeoPoint,
    LocationSource,
    Provenance,
    PublicReport,
    Report,
    ReportDraft,
    ReporterProfile,
    Role,
    StatusState,
    ValidationStatus,
    parse_category,
    redact,
    validate_draft,
)
from .trust import (
    DEFAULT_THRESHOLD,
    INITIAL_REPUTATION,
    Rating,
    TrustState,
    Verdict,
    admin_verdict,
    apply_rating,
    evaluate,
    trust_score,
)
from .geo import (
    BBox,
    CellIndex,
    DEFAULT_CELL_SIZE,
    MapCell,
    Period,
    SummaryDocument,
    aggregate_map,
    build_summary,
    category_distribution,
    cell_of,
    render_summary_text,
)
from .store import BlobStore, Event, EventKind, EventLog, StateView, StreamEvent, replay

__version__ = "0.1.0"
