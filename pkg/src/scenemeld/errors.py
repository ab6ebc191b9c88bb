"""Exception hierarchy shared across the engine.

Every error carries enough context to be serialized to an API error
response; none hold raster data.
"""

from __future__ import annotations


class SceneMeldError(Exception):
    """Base class for all engine errors."""


# ---- scene / compositor ----

class MissingFrame(SceneMeldError):
    def __init__(self, feed_id: str):
        self.feed_id = feed_id
        super().__init__(f"no frame available for feed {feed_id!r}")


class EmptyScene(SceneMeldError):
    """Nothing to feed the generator: no feeds (and no prior in canvas mode)."""


class DimensionMismatch(SceneMeldError):
    def __init__(self, expected, got):
        self.expected = tuple(expected)
        self.got = tuple(got)
        super().__init__(f"expected dims {self.expected}, got {self.got}")


# ---- generation ----

class NothingToGenerate(SceneMeldError):
    """Mask preserves every pixel; an inpaint job would be a no-op."""


class DegenerateOutline(SceneMeldError):
    """Region outline has fewer than 3 points or covers <1% of the canvas."""


class BackendUnreachable(SceneMeldError):
    def __init__(self, url: str, attempts: int, detail: str = ""):
        self.url = url
        self.attempts = attempts
        super().__init__(f"backend {url} unreachable after {attempts} attempts: {detail}")


class BackendRejected(SceneMeldError):
    def __init__(self, detail: str, status_code: int | None = None):
        self.detail = detail
        self.status_code = status_code
        super().__init__(f"backend rejected request: {detail}")


class Cancelled(SceneMeldError):
    def __init__(self, job_id: str):
        self.job_id = job_id
        super().__init__(f"job {job_id} was cancelled")


# ---- prompting ----

class EmptyPrompt(SceneMeldError):
    """Both activity and theme are empty."""


# ---- segmentation ----

class ServiceUnavailable(SceneMeldError):
    def __init__(self, url: str, detail: str = ""):
        self.url = url
        super().__init__(f"vision service {url} unavailable: {detail}")


class NoAlphaChannel(SceneMeldError):
    """Alpha-channel matting requested on a frame without an alpha channel."""


# ---- layout ----

class UnknownFeed(SceneMeldError):
    def __init__(self, feed_id: str):
        self.feed_id = feed_id
        super().__init__(f"unknown feed {feed_id!r}")


class NoObjects(SceneMeldError):
    """Auto-layout requires at least one foreground object."""


class StaleAssignment(SceneMeldError):
    """The scene's object or feed set changed since the assignment was computed."""


# ---- session service ----

class UnknownSession(SceneMeldError):
    def __init__(self, session_id: str):
        self.session_id = session_id
        super().__init__(f"unknown session {session_id!r}")


class DecodeError(SceneMeldError):
    """Frame or image bytes could not be decoded, or are below minimum size."""


class CommandRejected(SceneMeldError):
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(f"command rejected: {reason}")


class SchemaVersionMismatch(SceneMeldError):
    def __init__(self, found: str, supported: str):
        self.found = found
        self.supported = supported
        super().__init__(f"bundle schema {found!r} not supported (expected {supported!r})")


class DigestMismatch(SceneMeldError):
    def __init__(self, path: str):
        self.path = path
        super().__init__(f"stored raster {path} does not match its recorded digest")
