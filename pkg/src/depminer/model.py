"""Core data model: locations, signatures, elements, dependency records."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple


class Granularity(Enum):
    TOKEN = "token"
    FUNCTION = "function"
    CLASS = "class"
    FILE = "file"
    DIRECTORY = "directory"

    @property
    def fineness(self) -> int:
        return _FINENESS[self]

    def coarser_than(self, other: "Granularity") -> bool:
        return self.fineness > other.fineness

    @classmethod
    def from_name(cls, name: str) -> "Granularity":
        try:
            return cls(name)
        except ValueError:
            raise ValueError("unknown granularity: %r" % name) from None


_FINENESS = {
    Granularity.TOKEN: 0,
    Granularity.FUNCTION: 1,
    Granularity.CLASS: 2,
    Granularity.FILE: 3,
    Granularity.DIRECTORY: 4,
}

# Reasons attached to usages that could not be linked to a declaration.
REASON_NO_DECLARATION = "no-declaration"
REASON_EXTERNAL_TARGET = "external-target"
REASON_SCOPE_EXCLUDED = "scope-excluded-target"


@dataclass(frozen=True)
class LocationMarker:
    """File path plus 1-based inclusive line range.

    The empty range is represented by exactly (startLine=1, endLine=0) and is
    used only for the root element of a zero-length file (and synthetic
    directory containers, which have no line extent).
    """

    path: str
    start_line: int
    end_line: int

    def is_empty(self) -> bool:
        return self.start_line == 1 and self.end_line == 0


@dataclass(frozen=True)
class TypeSignature:
    language: str
    kind: str


@dataclass(frozen=True)
class CodeElement:
    location: LocationMarker
    signature: TypeSignature
    identifier: Optional[str] = None


@dataclass(frozen=True)
class DependencyRecord:
    """One usage -> declaration pair; the unit of output."""

    source: CodeElement
    target: CodeElement
    count: int = 1
    ambiguous: bool = False


@dataclass(frozen=True)
class UnresolvedUsage:
    element: CodeElement
    reason: str


def contains(outer: LocationMarker, inner: LocationMarker) -> bool:
    """True iff `inner` lies within `outer` (same path, nested line range).

    Empty ranges are contained in nothing and contain nothing.
    """
    if outer.is_empty() or inner.is_empty():
        return False
    return (
        outer.path == inner.path
        and outer.start_line <= inner.start_line
        and inner.end_line <= outer.end_line
    )


def _order_key(record: DependencyRecord) -> Tuple:
    return (
        record.source.location.path,
        record.source.location.start_line,
        record.source.location.end_line,
        record.target.location.path,
        record.target.location.start_line,
        record.target.location.end_line,
        record.source.identifier or "",
        record.target.signature.kind,
    )


def canonical_order(a: DependencyRecord, b: DependencyRecord) -> int:
    """Compare two records; returns -1, 0 or 1."""
    ka, kb = _order_key(a), _order_key(b)
    if ka < kb:
        return -1
    if ka > kb:
        return 1
    return 0


def element_sort_key(element: CodeElement) -> Tuple:
    return (
        element.location.path,
        element.location.start_line,
        element.location.end_line,
        element.signature.language,
        element.signature.kind,
        element.identifier or "",
    )


def record_sort_key(record: DependencyRecord) -> Tuple:
    # The canonical tuple first, then the remaining fields so sorting is a
    # true total order even for records that tie on the canonical tuple.
    return (
        _order_key(record),
        element_sort_key(record.source),
        element_sort_key(record.target),
        record.count,
        record.ambiguous,
    )


def unresolved_sort_key(entry: UnresolvedUsage) -> Tuple:
    return element_sort_key(entry.element) + (entry.reason,)
