"""Deterministic serialization of results to JSON and DOT."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

from .aggregate import AggregatedEdge
from .model import CodeElement, DependencyRecord, Granularity, UnresolvedUsage

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class OutputDocument:
    project_root: str
    granularity: Granularity
    tool_name: str
    tool_version: str
    dependencies: Sequence[Union[DependencyRecord, AggregatedEdge]]
    unresolved: Sequence[UnresolvedUsage]
    diagnostics: Sequence[Tuple[str, int, str]]


def _element_dict(element: CodeElement) -> dict:
    return {
        "location": {
            "path": element.location.path,
            "startLine": element.location.start_line,
            "endLine": element.location.end_line,
        },
        "signature": {
            "language": element.signature.language,
            "kind": element.signature.kind,
        },
        "identifier": element.identifier,
    }


def _dependency_dict(dep: Union[DependencyRecord, AggregatedEdge]) -> dict:
    if isinstance(dep, AggregatedEdge):
        ambiguous = dep.ambiguous_count >= 1
    else:
        ambiguous = dep.ambiguous
    return {
        "from": _element_dict(dep.source),
        "to": _element_dict(dep.target),
        "count": dep.count,
        "ambiguous": ambiguous,
    }


def document_dict(doc: OutputDocument) -> dict:
    return {
        "schemaVersion": SCHEMA_VERSION,
        "projectRoot": doc.project_root,
        "granularity": doc.granularity.value,
        "tool": {"name": doc.tool_name, "version": doc.tool_version},
        "dependencies": [_dependency_dict(d) for d in doc.dependencies],
        "unresolved": [
            {"element": _element_dict(u.element), "reason": u.reason}
            for u in doc.unresolved
        ],
        "diagnostics": [
            {"path": path, "line": line, "message": message}
            for path, line, message in doc.diagnostics
        ],
    }


def emit_json(doc: Union[OutputDocument, dict]) -> bytes:
    """UTF-8 JSON with fixed key order, two-space indent, LF endings."""
    payload = doc if isinstance(doc, dict) else document_dict(doc)
    text = json.dumps(payload, indent=2, ensure_ascii=False)
    return (text + "\n").encode("utf-8")


def _quote(label: str) -> str:
    return '"%s"' % label.replace("\\", "\\\\").replace('"', '\\"')


def element_label(element: CodeElement, granularity: Granularity) -> str:
    if granularity in (Granularity.FILE, Granularity.DIRECTORY):
        return element.location.path
    name = element.identifier if element.identifier is not None else "<toplevel>"
    return "%s::%s:%d" % (
        element.location.path,
        name,
        element.location.start_line,
    )


def emit_dot(edges: Sequence[AggregatedEdge], granularity: Granularity) -> bytes:
    """Directed graph: one node per element, count-labeled edges."""
    if granularity is Granularity.TOKEN:
        raise ValueError("DOT export is not available at token granularity")
    labels = set()
    for edge in edges:
        labels.add(element_label(edge.source, granularity))
        labels.add(element_label(edge.target, granularity))
    lines: List[str] = ["digraph dependencies {"]
    for label in sorted(labels):
        lines.append("  %s;" % _quote(label))
    for edge in edges:
        lines.append(
            "  %s -> %s [label=\"%d\"];"
            % (
                _quote(element_label(edge.source, granularity)),
                _quote(element_label(edge.target, granularity)),
                edge.count,
            )
        )
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")
