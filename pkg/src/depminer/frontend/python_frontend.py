"""Line-oriented parser for a bounded Python-like subset.

Covered constructs: module-level and nested ``def``, ``class`` definitions,
simple assignment targets, project-internal ``import X`` / ``from X import Y``,
call expressions, bare name usages, and ``name.member`` attribute access where
the member is recorded as an always-unresolved attribute usage. Blocks use a
fixed 4-space (or tab) indentation unit. Anything outside the subset degrades
to expression scanning or a diagnostic; a file never fails to parse.
"""
from __future__ import annotations

import keyword
import posixpath
import re
from typing import Dict, List, Optional, Set, Tuple

from ..model import Granularity, LocationMarker
from .base import (
    FILE_KIND,
    FrontEnd,
    FrontEndDescriptor,
    ImportBinding,
    ParseResult,
    SyntaxNode,
)

LANGUAGE = "python-subset"

FUNCTION_DECL = "function-declaration"
CLASS_DECL = "class-declaration"
VARIABLE_DECL = "variable-declaration"
IMPORT_USAGE = "import-usage"
CALL_USAGE = "call-usage"
NAME_USAGE = "name-usage"
ATTRIBUTE_USAGE = "attribute-usage"

DESCRIPTOR = FrontEndDescriptor(
    language=LANGUAGE,
    extensions=frozenset({".py"}),
    declaration_kinds=frozenset({FUNCTION_DECL, CLASS_DECL, VARIABLE_DECL}),
    usage_kinds=frozenset({IMPORT_USAGE, CALL_USAGE, NAME_USAGE, ATTRIBUTE_USAGE}),
    unit_kinds={
        Granularity.FUNCTION: frozenset({FUNCTION_DECL}),
        Granularity.CLASS: frozenset({CLASS_DECL}),
    },
    scope_kinds=frozenset({FUNCTION_DECL, CLASS_DECL}),
    function_scope_kinds=frozenset({FUNCTION_DECL}),
    class_scope_opaque=True,
)

_KEYWORDS = frozenset(keyword.kwlist) | {"match", "case"}
_IDENT = re.compile(r"[A-Za-z_]\w*")
_DEF_RE = re.compile(r"^(?:async\s+)?def\s+([A-Za-z_]\w*)\s*\(")
_CLASS_RE = re.compile(r"^class\s+([A-Za-z_]\w*)\s*([(:])")
_FROM_RE = re.compile(r"^from\s+([.\w]+)\s+import\s+(.+)$")
_IMPORT_RE = re.compile(r"^import\s+(.+)$")
_ASSIGN_RE = re.compile(r"^([A-Za-z_]\w*)\s*(?::[^=]+)?=(?!=)")
_FOR_RE = re.compile(r"^(?:async\s+)?for\s+([A-Za-z_]\w*)\s+in\b")
_AS_NAME_RE = re.compile(r"\bas\s+([A-Za-z_]\w*)")
_STRING_PREFIX = frozenset("rbfuRBFU")


class _Node:
    __slots__ = ("kind", "start", "end", "identifier", "children")

    def __init__(self, kind: str, start: int, end: int, identifier: Optional[str]):
        self.kind = kind
        self.start = start
        self.end = end
        self.identifier = identifier
        self.children: List["_Node"] = []

    def freeze(self, path: str) -> SyntaxNode:
        return SyntaxNode(
            kind=self.kind,
            span=LocationMarker(path, self.start, self.end),
            identifier=self.identifier,
            children=tuple(c.freeze(path) for c in self.children),
        )


def _clean_lines(raw_lines: List[str], diagnostics: List[Tuple[int, str]]):
    """Strip comments and string-literal contents line by line.

    Returns (cleaned, open_at_end) where open_at_end[i] is True when line i
    ends inside a triple-quoted string.
    """
    cleaned: List[str] = []
    open_at_end: List[bool] = []
    state: Optional[str] = None  # the triple-quote delimiter currently open
    for lineno, raw in enumerate(raw_lines, start=1):
        out: List[str] = []
        i = 0
        n = len(raw)
        while i < n:
            if state is not None:
                end = raw.find(state, i)
                if end < 0:
                    i = n
                else:
                    state = None
                    i = end + 3
                continue
            ch = raw[i]
            if ch == "#":
                break
            if ch in "'\"":
                # drop any string prefix letters already emitted (r"", f"" ...)
                k = len(out)
                while k > 0 and out[k - 1] in _STRING_PREFIX and len(out) - k < 2:
                    k -= 1
                if k < len(out) and (
                    k == 0 or not (out[k - 1].isalnum() or out[k - 1] == "_")
                ):
                    del out[k:]
                if raw[i : i + 3] in ("'''", '"""'):
                    state = raw[i : i + 3]
                    i += 3
                    continue
                # single-quoted literal: scan to the closing quote
                j = i + 1
                while j < n:
                    if raw[j] == "\\":
                        j += 2
                        continue
                    if raw[j] == ch:
                        break
                    j += 1
                if j >= n:
                    diagnostics.append((lineno, "unterminated string literal"))
                    i = n
                else:
                    i = j + 1
                out.append(" ")
                continue
            out.append(ch)
            i += 1
        cleaned.append("".join(out))
        open_at_end.append(state is not None)
    return cleaned, open_at_end


def _indent_width(line: str, lineno: int, diagnostics: List[Tuple[int, str]]) -> int:
    width = 0
    for ch in line:
        if ch == " ":
            width += 1
        elif ch == "\t":
            width += 4 - width % 4
        else:
            break
    if width % 4:
        diagnostics.append((lineno, "indentation is not a multiple of 4"))
    return width


def _bracket_delta(text: str) -> int:
    return sum(text.count(c) for c in "([{") - sum(text.count(c) for c in ")]}")


class _Statement:
    __slots__ = ("first", "last", "lines", "level")

    def __init__(self, first: int, level: int):
        self.first = first
        self.last = first
        self.lines: List[Tuple[int, str]] = []
        self.level = level

    @property
    def joined(self) -> str:
        return " ".join(text for _, text in self.lines)


def _logical_statements(cleaned, open_at_end, raw_lines, diagnostics):
    statements: List[_Statement] = []
    current: Optional[_Statement] = None
    depth = 0
    continued = False
    for idx, text in enumerate(cleaned):
        lineno = idx + 1
        in_string = open_at_end[idx] or (idx > 0 and open_at_end[idx - 1])
        if current is None:
            if not text.strip() and not in_string:
                continue
            level = _indent_width(raw_lines[idx], lineno, diagnostics)
            current = _Statement(lineno, level)
        current.lines.append((lineno, text.strip()))
        current.last = lineno
        depth += _bracket_delta(text)
        if depth < 0:
            diagnostics.append((lineno, "unbalanced brackets"))
            depth = 0
        continued = text.rstrip().endswith("\\")
        if continued:
            current.lines[-1] = (lineno, current.lines[-1][1].rstrip("\\").strip())
        if depth == 0 and not open_at_end[idx] and not continued:
            statements.append(current)
            current = None
    if current is not None:
        statements.append(current)
    return statements


class PythonFrontEnd(FrontEnd):
    descriptor = DESCRIPTOR

    def parse_file(self, path: str, content: str) -> ParseResult:
        diagnostics: List[Tuple[int, str]] = []
        bindings: List[ImportBinding] = []
        raw_lines = content.splitlines()
        n = len(raw_lines)
        root = _Node(FILE_KIND, 1, n if n else 0, None)
        if n == 0:
            return ParseResult(root.freeze(path), (), ())

        cleaned, open_at_end = _clean_lines(raw_lines, diagnostics)
        statements = _logical_statements(cleaned, open_at_end, raw_lines, diagnostics)

        # stack entries: (node, body indent width); root hosts width-0
        # statements. A block's body width is fixed by its first statement.
        stack: List[Tuple[_Node, int]] = [(root, 0)]
        pending: Optional[_Node] = None
        for stmt in statements:
            width = stmt.level
            if pending is not None:
                if width > stack[-1][1]:
                    stack.append((pending, width))
                else:
                    diagnostics.append((pending.start, "expected an indented block"))
                pending = None
            while len(stack) > 1 and width < stack[-1][1]:
                stack.pop()
            if width > stack[-1][1]:
                diagnostics.append((stmt.first, "unexpected indent"))
            parent = stack[-1][0]
            for node, _ in stack[1:]:
                node.end = max(node.end, stmt.last)
            opened = self._handle_statement(stmt, parent, bindings, diagnostics)
            if opened is not None:
                for node, _ in stack[1:]:
                    node.end = max(node.end, opened.end)
                pending = opened

        return ParseResult(root.freeze(path), tuple(diagnostics), tuple(bindings))

    def resolve_module(
        self, module: str, importer_path: str, project_files: Set[str]
    ) -> Optional[str]:
        importer_dir = posixpath.dirname(importer_path)
        if module.startswith("."):
            dots = len(module) - len(module.lstrip("."))
            rest = module.lstrip(".")
            base = importer_dir
            for _ in range(dots - 1):
                base = posixpath.dirname(base)
            if not rest:
                return None
            rel = posixpath.join(base, *rest.split(".")) + ".py" if base else (
                "/".join(rest.split(".")) + ".py"
            )
            rel = posixpath.normpath(rel)
            return rel if rel in project_files else None
        tail = "/".join(module.split(".")) + ".py"
        for candidate in (
            posixpath.normpath(posixpath.join(importer_dir, tail)) if importer_dir else tail,
            tail,
        ):
            if candidate in project_files:
                return candidate
        return None

    # -- statement handling -------------------------------------------------

    def _handle_statement(self, stmt, parent, bindings, diagnostics):
        text = stmt.lines[0][1]
        joined = stmt.joined

        m = _DEF_RE.match(joined)
        if m:
            return self._handle_def(stmt, joined, m, parent)
        m = _CLASS_RE.match(joined)
        if m:
            return self._handle_class(stmt, joined, m, parent)
        m = _FROM_RE.match(joined)
        if m:
            self._handle_from_import(stmt, m, parent, bindings, diagnostics)
            return None
        m = _IMPORT_RE.match(joined)
        if m and not text.startswith("import("):
            self._handle_plain_import(stmt, m, bindings)
            return None
        m = _ASSIGN_RE.match(joined)
        if m:
            node = _Node(VARIABLE_DECL, stmt.first, stmt.last, m.group(1))
            parent.children.append(node)
            eq = stmt.lines[0][1].find("=", len(m.group(1)))
            first_text = stmt.lines[0][1]
            self._scan_statement(stmt, node, first_start=(eq + 1 if eq >= 0 else len(first_text)))
            return None
        m = _FOR_RE.match(joined)
        if m:
            node = _Node(VARIABLE_DECL, stmt.first, stmt.first, m.group(1))
            parent.children.append(node)
            pos = stmt.lines[0][1].find(" in ")
            self._scan_statement(stmt, parent, first_start=(pos + 4 if pos >= 0 else 0))
            return None
        if re.match(r"^(with|except)\b", joined):
            for am in _AS_NAME_RE.finditer(joined):
                parent.children.append(
                    _Node(VARIABLE_DECL, stmt.first, stmt.first, am.group(1))
                )
            self._scan_statement(stmt, parent)
            return None
        self._scan_statement(stmt, parent)
        return None

    def _handle_def(self, stmt, joined, m, parent):
        node = _Node(FUNCTION_DECL, stmt.first, stmt.last, m.group(1))
        parent.children.append(node)
        open_paren = joined.find("(", m.end() - 1)
        params, close = _balanced(joined, open_paren)
        for param in _split_top_level(params):
            param = param.strip().lstrip("*")
            pm = _IDENT.match(param)
            if pm and pm.group() not in _KEYWORDS:
                node.children.append(
                    _Node(VARIABLE_DECL, stmt.first, stmt.first, pm.group())
                )
        colon = joined.find(":", close)
        remainder = joined[colon + 1 :].strip() if colon >= 0 else ""
        if remainder:
            _scan_text(remainder, stmt.last, node)
            return None
        node.end = stmt.last
        return node

    def _handle_class(self, stmt, joined, m, parent):
        node = _Node(CLASS_DECL, stmt.first, stmt.last, m.group(1))
        parent.children.append(node)
        close = m.end() - 1
        if m.group(2) == "(":
            bases, close = _balanced(joined, m.end() - 1)
            _scan_text(bases, stmt.first, node)
        colon = joined.find(":", close)
        remainder = joined[colon + 1 :].strip() if colon >= 0 else ""
        if remainder:
            _scan_text(remainder, stmt.last, node)
            return None
        return node

    def _handle_from_import(self, stmt, m, parent, bindings, diagnostics):
        module, names = m.group(1), m.group(2)
        names = names.strip().strip("()")
        if names.strip() == "*":
            diagnostics.append((stmt.first, "wildcard import is outside the subset"))
            return
        for item in names.split(","):
            item = item.strip()
            if not item:
                continue
            parts = item.split()
            original = parts[0]
            alias = parts[2] if len(parts) == 3 and parts[1] == "as" else original
            if not _IDENT.fullmatch(original):
                diagnostics.append((stmt.first, "unsupported import clause: %r" % item))
                continue
            parent.children.append(
                _Node(IMPORT_USAGE, stmt.first, stmt.first, original)
            )
            bindings.append(ImportBinding(alias, module, original, stmt.first))

    def _handle_plain_import(self, stmt, m, bindings):
        for item in m.group(1).split(","):
            item = item.strip()
            if not item:
                continue
            parts = item.split()
            module = parts[0]
            if len(parts) == 3 and parts[1] == "as":
                local = parts[2]
            else:
                local = module.split(".")[0]
            bindings.append(ImportBinding(local, module, None, stmt.first))

    # -- expression scanning -------------------------------------------------

    def _scan_statement(self, stmt, target, first_start: int = 0):
        depth = 0
        for i, (lineno, text) in enumerate(stmt.lines):
            start = first_start if i == 0 else 0
            depth = _scan_text(text, lineno, target, start=start, depth=depth)


def _balanced(text: str, open_pos: int) -> Tuple[str, int]:
    """Content of the bracketed region starting at open_pos and its end index."""
    if open_pos < 0 or open_pos >= len(text):
        return "", max(open_pos, 0)
    depth = 0
    for i in range(open_pos, len(text)):
        if text[i] in "([{":
            depth += 1
        elif text[i] in ")]}":
            depth -= 1
            if depth == 0:
                return text[open_pos + 1 : i], i
    return text[open_pos + 1 :], len(text) - 1


def _split_top_level(text: str) -> List[str]:
    parts: List[str] = []
    depth = 0
    cur: List[str] = []
    for ch in text:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if cur:
        parts.append("".join(cur))
    return parts


def _scan_text(text: str, lineno: int, target, start: int = 0, depth: int = 0) -> int:
    """Emit usage nodes for identifier tokens in text[start:]; returns depth.

    Bracket depth is tracked across calls so keyword-argument names inside a
    call spanning several lines are still skipped.
    """
    pos = 0
    prev_token: Optional[str] = None
    for m in _IDENT.finditer(text):
        s, e = m.start(), m.end()
        for ch in text[pos:s]:
            if ch in "([{":
                depth += 1
            elif ch in ")]}":
                depth -= 1
        pos = s
        name = m.group()
        if name in _KEYWORDS:
            prev_token = name
            continue
        if s < start:
            prev_token = name
            continue
        before = text[s - 1] if s > 0 else ""
        if before.isalnum() or before == "_":
            continue  # tail of a numeric literal such as 0x1F
        if prev_token == "as":
            prev_token = name
            continue
        prev_token = name
        after = text[e:].lstrip()
        if before == "." or (s >= 2 and text[:s].rstrip().endswith(".")):
            kind = ATTRIBUTE_USAGE
        elif after.startswith("=") and not after.startswith("==") and depth > 0:
            continue  # keyword-argument name at a call site
        elif after.startswith("("):
            kind = CALL_USAGE
        else:
            kind = NAME_USAGE
        target.children.append(_Node(kind, lineno, lineno, name))
    for ch in text[pos:]:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
    return depth
