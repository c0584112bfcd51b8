"""Analysis scope: path globs and per-file line-range exclusions."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from .model import LocationMarker


class ScopeError(Exception):
    """Malformed scope document."""


@lru_cache(maxsize=512)
def _glob_regex(pattern: str) -> "re.Pattern[str]":
    """Translate a path glob: '*' matches within a segment, '**' across."""
    segments = pattern.split("/")
    out: List[str] = []
    for i, segment in enumerate(segments):
        last = i == len(segments) - 1
        if segment == "**":
            out.append(".*" if last else "(?:[^/]+/)*")
            continue
        piece: List[str] = []
        for ch in segment:
            if ch == "*":
                piece.append("[^/]*")
            elif ch == "?":
                piece.append("[^/]")
            else:
                piece.append(re.escape(ch))
        out.append("".join(piece) + ("" if last else "/"))
    return re.compile("^" + "".join(out) + "$")


@dataclass(frozen=True)
class AnalysisScope:
    include: Tuple[str, ...] = ("**",)
    exclude: Tuple[str, ...] = ()
    exclude_lines: Tuple[Tuple[str, int, int], ...] = ()

    def includes_path(self, path: str) -> bool:
        if not any(_glob_regex(p).match(path) for p in self.include):
            return False
        return not any(_glob_regex(p).match(path) for p in self.exclude)

    def lines_excluded(self, path: str, start_line: int, end_line: int) -> bool:
        """True when the range intersects any excluded range of the path."""
        for ex_path, ex_start, ex_end in self.exclude_lines:
            if ex_path != path:
                continue
            if start_line <= ex_end and ex_start <= end_line:
                return True
        return False

    def includes(self, path: str, range_: Optional[LocationMarker] = None) -> bool:
        if not self.includes_path(path):
            return False
        if range_ is None or range_.is_empty():
            return True
        return not self.lines_excluded(path, range_.start_line, range_.end_line)


DEFAULT_SCOPE = AnalysisScope()


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ScopeError(message)


def parse_scope(document: dict) -> AnalysisScope:
    _require(isinstance(document, dict), "scope document must be a JSON object")
    include = document.get("include", ["**"])
    exclude = document.get("exclude", [])
    exclude_lines = document.get("excludeLines", [])
    _require(
        isinstance(include, list) and all(isinstance(p, str) for p in include),
        "field 'include' must be a list of strings",
    )
    _require(
        isinstance(exclude, list) and all(isinstance(p, str) for p in exclude),
        "field 'exclude' must be a list of strings",
    )
    _require(isinstance(exclude_lines, list), "field 'excludeLines' must be a list")
    triples: List[Tuple[str, int, int]] = []
    for entry in exclude_lines:
        _require(isinstance(entry, dict), "field 'excludeLines' entries must be objects")
        path = entry.get("path")
        start = entry.get("startLine")
        end = entry.get("endLine")
        _require(isinstance(path, str), "field 'excludeLines[].path' must be a string")
        _require(
            isinstance(start, int) and not isinstance(start, bool) and start >= 1,
            "field 'excludeLines[].startLine' must be an integer >= 1",
        )
        _require(
            isinstance(end, int) and not isinstance(end, bool) and end >= start,
            "field 'excludeLines[].endLine' must be an integer >= startLine",
        )
        triples.append((path, start, end))
    return AnalysisScope(tuple(include), tuple(exclude), tuple(triples))


def load_scope(path: Optional[str]) -> AnalysisScope:
    if path is None:
        return DEFAULT_SCOPE
    try:
        with open(path, "r", encoding="utf-8") as handle:
            document = json.load(handle)
    except OSError as exc:
        raise ScopeError("cannot read scope file %s: %s" % (path, exc)) from exc
    except json.JSONDecodeError as exc:
        raise ScopeError("scope file %s is not valid JSON: %s" % (path, exc)) from exc
    return parse_scope(document)
