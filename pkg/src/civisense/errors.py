"""Error hierarchy shared by the domain model, the service core, and the API.

Every failure the platform can report carries a stable ``code`` string (the
value clients see in ``{"error": {"code": ...}}``) and an HTTP status used by
the server tier. Domain code raises these directly; nothing maps exceptions
by string matching.
"""

from __future__ import annotations


class CiviError(Exception):
    """Base class; ``code`` is the wire-visible identifier."""

    code = "InternalError"
    http_status = 500

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


# -- draft / input validation ------------------------------------------------

class ValidationError(CiviError):
    http_status = 400


class EmptyCategories(ValidationError):
    code = "EmptyCategories"


class UnknownCategory(ValidationError):
    code = "UnknownCategory"


class BadCoordinates(ValidationError):
    code = "BadCoordinates"


class BadSource(ValidationError):
    code = "BadSource"


class TextTooLong(ValidationError):
    code = "TextTooLong"


class BadClientKey(ValidationError):
    code = "BadClientKey"


class BadAttachment(ValidationError):
    code = "BadAttachment"


class BadVote(ValidationError):
    code = "BadVote"


class BadPage(ValidationError):
    code = "BadPage"


class BadBBox(ValidationError):
    code = "BadBBox"


class BadCellSize(ValidationError):
    code = "BadCellSize"


class BadPeriod(ValidationError):
    code = "BadPeriod"


class BadDetail(ValidationError):
    code = "BadDetail"


class BadFormat(ValidationError):
    code = "BadFormat"


class BatchTooLarge(ValidationError):
    code = "BatchTooLarge"


class WeakCredential(ValidationError):
    code = "WeakCredential"


class MalformedBody(ValidationError):
    code = "MalformedBody"


# -- auth / permissions --------------------------------------------------------

class Unauthorized(CiviError):
    code = "Unauthorized"
    http_status = 401


class NotAdmin(CiviError):
    code = "NotAdmin"
    http_status = 403


class SelfRating(CiviError):
    code = "SelfRating"
    http_status = 403


class RateLimited(CiviError):
    code = "RateLimited"
    http_status = 429


# -- state conflicts -----------------------------------------------------------

class NameTaken(CiviError):
    code = "NameTaken"
    http_status = 409


class NotPending(CiviError):
    code = "NotPending"
    http_status = 409


class ReportRejected(CiviError):
    code = "ReportRejected"
    http_status = 409


class UnknownReport(CiviError):
    code = "UnknownReport"
    http_status = 404


class UnknownUser(CiviError):
    code = "UnknownUser"
    http_status = 404


# -- storage -------------------------------------------------------------------

class StorageFailure(CiviError):
    code = "StorageFailure"
    http_status = 500


class CorruptLog(StorageFailure):
    """Raised by replay when a non-tail record fails its integrity check."""

    code = "CorruptLog"

    def __init__(self, seq: int, message: str = ""):
        super().__init__(message or f"log record {seq} failed integrity check")
        self.seq = seq


def _registry() -> dict:
    out = {}
    stack = [CiviError]
    while stack:
        cls = stack.pop()
        out[cls.code] = cls
        stack.extend(cls.__subclasses__())
    return out


def from_code(code: str, message: str = "") -> CiviError:
    """Rebuild a typed error from its wire code (clients re-raise these)."""
    cls = _registry().get(code)
    if cls is None:
        error = CiviError(message or code)
        error.code = code
        return error
    if cls is CorruptLog:
        return cls(0, message)
    return cls(message)
