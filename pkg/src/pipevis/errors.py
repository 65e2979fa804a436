"""Typed errors raised across the engine.

Every failure mode named by a module contract has its own exception class so
callers (and the HTTP layer) can map them without string matching.
"""

from __future__ import annotations


class PipevisError(Exception):
    """Base class for all engine errors."""


# --- platform / representation layer ---------------------------------------

class DuplicatePlatform(PipevisError):
    pass


class UnknownPlatform(PipevisError):
    pass


class KindMismatch(PipevisError):
    pass


class NoConversionPath(PipevisError):
    pass


class NoValidSource(PipevisError):
    pass


class SharedHostViolation(PipevisError):
    pass


class UnsupportedFormat(PipevisError):
    pass


# --- data objects -----------------------------------------------------------

class InvalidDims(PipevisError):
    pass


class OutOfRange(PipevisError):
    pass


class DimsMismatch(PipevisError):
    pass


class MalformedDescriptor(PipevisError):
    """Raw-volume sidecar descriptor could not be parsed."""


# --- processor network ------------------------------------------------------

class DuplicateIdentifier(PipevisError):
    pass


class UnknownClass(PipevisError):
    pass


class UnknownProcessor(PipevisError):
    pass


class UnknownPort(PipevisError):
    pass


class TypeMismatch(PipevisError):
    """Port tag or property value type does not match."""


class PortOccupied(PipevisError):
    pass


class CycleDetected(PipevisError):
    pass


class UnknownProperty(PipevisError):
    pass


class NetworkLocked(PipevisError):
    pass


class InvalidSelection(PipevisError):
    pass


class ProcessorFailure(PipevisError):
    def __init__(self, identifier: str, message: str):
        super().__init__(f"{identifier}: {message}")
        self.identifier = identifier
        self.message = message


# --- stdlib processors ------------------------------------------------------

class SliceOutOfRange(PipevisError):
    pass


class NotEvaluated(PipevisError):
    pass


# --- module registry --------------------------------------------------------

class VersionMismatch(PipevisError):
    pass


class MissingDependency(PipevisError):
    pass


class DuplicateModule(PipevisError):
    pass


class ModuleNotLoaded(PipevisError):
    pass


class ReloadFailure(PipevisError):
    def __init__(self, missing_class_ids: list[str]):
        super().__init__("reload would orphan processor classes: " + ", ".join(missing_class_ids))
        self.missing_class_ids = list(missing_class_ids)


class UnreadablePath(PipevisError):
    pass


# --- workspace --------------------------------------------------------------

class UnsupportedVersion(PipevisError):
    pass


class MalformedDocument(PipevisError):
    pass


class UnknownProcessorClass(PipevisError):
    def __init__(self, missing: dict[str, str | None]):
        # missing maps classId -> providing module name when known, else None
        parts = []
        for class_id in sorted(missing):
            provider = missing[class_id]
            parts.append(f"{class_id} (module: {provider})" if provider else class_id)
        super().__init__("unknown processor classes: " + ", ".join(parts))
        self.missing = dict(missing)


# --- inspection -------------------------------------------------------------

class InvalidTemplate(PipevisError):
    pass


class NotEvaluable(PipevisError):
    pass


class SessionClosed(PipevisError):
    pass


# --- service ------------------------------------------------------------------

class BindFailure(PipevisError):
    pass


# --- regression harness -----------------------------------------------------

class NoCanvas(PipevisError):
    pass


class EvaluationFailure(PipevisError):
    pass


class WriteFailure(PipevisError):
    pass
