"""Token-stream parser for a bounded Java-like subset.

Covered constructs: package declarations, imports, top-level (and nested)
class/interface/enum declarations, fields, methods, constructors, local
variable declarations, method calls by simple name, ``new`` expressions, and
simple-name usages. Generics are skipped structurally (no resolution) and
overloads are not disambiguated: calls match by name only.
"""
from __future__ import annotations

import bisect
import re
from typing import List, Optional, Set, Tuple

from ..model import Granularity, LocationMarker
from .base import (
    FILE_KIND,
    FrontEnd,
    FrontEndDescriptor,
    ImportBinding,
    ParseResult,
    SyntaxNode,
)

LANGUAGE = "java-subset"

CLASS_DECL = "class-declaration"
METHOD_DECL = "method-declaration"
FIELD_DECL = "field-declaration"
VARIABLE_DECL = "variable-declaration"
IMPORT_USAGE = "import-usage"
CALL_USAGE = "call-usage"
NEW_USAGE = "new-usage"
NAME_USAGE = "name-usage"
ATTRIBUTE_USAGE = "attribute-usage"

DESCRIPTOR = FrontEndDescriptor(
    language=LANGUAGE,
    extensions=frozenset({".java"}),
    declaration_kinds=frozenset(
        {CLASS_DECL, METHOD_DECL, FIELD_DECL, VARIABLE_DECL}
    ),
    usage_kinds=frozenset(
        {IMPORT_USAGE, CALL_USAGE, NEW_USAGE, NAME_USAGE, ATTRIBUTE_USAGE}
    ),
    unit_kinds={
        Granularity.FUNCTION: frozenset({METHOD_DECL}),
        Granularity.CLASS: frozenset({CLASS_DECL}),
    },
    scope_kinds=frozenset({CLASS_DECL, METHOD_DECL}),
    function_scope_kinds=frozenset({METHOD_DECL}),
    class_scope_opaque=False,
)

_KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while true false null var
    record yield""".split()
)
_PRIMITIVES = frozenset(
    "boolean byte char double float int long short void var".split()
)
_MODIFIERS = frozenset(
    """public private protected static final abstract synchronized native
    transient volatile strictfp default""".split()
)
_CLASS_KEYWORDS = frozenset({"class", "interface", "enum", "record"})
_IDENT_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")
_TOKEN_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*|\S")
# Token values allowed inside <...> for it to count as a generic argument list.
_GENERIC_OK = frozenset({",", ".", "?", "extends", "super", "<", ">", "[", "]", "&"})
# Tokens that may precede the start of a local variable declaration.
_STMT_START = frozenset({";", "{", "}", "(", ",", ":", None, "instanceof"})


class _Node:
    __slots__ = ("kind", "start", "end", "identifier", "children")

    def __init__(self, kind, start, end, identifier):
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


def _strip_comments_and_literals(text: str) -> str:
    out = []
    i, n = 0, len(text)
    state = "code"
    while i < n:
        ch = text[i]
        if state == "code":
            if ch == "/" and text[i : i + 2] == "//":
                state = "line"
                out.append(" ")
                i += 1
            elif ch == "/" and text[i : i + 2] == "/*":
                state = "block"
                out.append(" ")
                i += 1
            elif ch == '"':
                state = "string"
            elif ch == "'":
                state = "char"
            else:
                out.append(ch)
                i += 1
                continue
            out.append(" ")
            i += 1
        elif state == "line":
            if ch == "\n":
                state = "code"
                out.append("\n")
            else:
                out.append(" ")
            i += 1
        elif state == "block":
            if ch == "*" and text[i : i + 2] == "*/":
                state = "code"
                out.append("  ")
                i += 2
            else:
                out.append("\n" if ch == "\n" else " ")
                i += 1
        else:  # string or char literal
            quote = '"' if state == "string" else "'"
            if ch == "\\":
                out.append("  ")
                i += 2
            elif ch == quote:
                state = "code"
                out.append(" ")
                i += 1
            else:
                out.append("\n" if ch == "\n" else " ")
                i += 1
    return "".join(out)


class _Token:
    __slots__ = ("value", "line", "is_ident")

    def __init__(self, value, line, is_ident):
        self.value = value
        self.line = line
        self.is_ident = is_ident


def _tokenize(text: str) -> List[_Token]:
    newlines = [m.start() for m in re.finditer("\n", text)]
    tokens = []
    for m in _TOKEN_RE.finditer(text):
        value = m.group()
        line = bisect.bisect_right(newlines, m.start()) + 1
        tokens.append(_Token(value, line, bool(_IDENT_RE.fullmatch(value))))
    return tokens


class _Parser:
    def __init__(self, path: str, tokens: List[_Token], line_count: int):
        self.path = path
        self.tokens = tokens
        self.i = 0
        self.diagnostics: List[Tuple[int, str]] = []
        self.bindings: List[ImportBinding] = []
        self.root = _Node(FILE_KIND, 1, line_count if line_count else 0, None)

    # -- token helpers ------------------------------------------------------

    def peek(self, k: int = 0) -> Optional[_Token]:
        j = self.i + k
        return self.tokens[j] if j < len(self.tokens) else None

    def value(self, k: int = 0) -> Optional[str]:
        t = self.peek(k)
        return t.value if t else None

    def advance(self) -> _Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def at_end(self) -> bool:
        return self.i >= len(self.tokens)

    def skip_to(self, value: str) -> None:
        while not self.at_end() and self.value() != value:
            self.advance()
        if not self.at_end():
            self.advance()

    def skip_annotations(self) -> None:
        while self.value() == "@":
            self.advance()
            while self.peek() and self.peek().is_ident:
                self.advance()
                if self.value() != ".":
                    break
                self.advance()
            if self.value() == "(":
                self.skip_balanced("(", ")")

    def skip_balanced(self, open_ch: str, close_ch: str) -> None:
        depth = 0
        while not self.at_end():
            v = self.advance().value
            if v == open_ch:
                depth += 1
            elif v == close_ch:
                depth -= 1
                if depth == 0:
                    return

    # -- file level ----------------------------------------------------------

    def parse(self) -> None:
        while not self.at_end():
            self.skip_annotations()
            if self.at_end():
                break
            v = self.value()
            if v == "package":
                self.skip_to(";")
            elif v == "import":
                self.parse_import()
            elif v in _CLASS_KEYWORDS:
                self.parse_class(self.root)
            elif v in _MODIFIERS or v == ";":
                self.advance()
            else:
                self.diagnostics.append(
                    (self.peek().line, "unexpected token at file level: %r" % v)
                )
                self.advance()

    def parse_import(self) -> None:
        line = self.advance().line  # 'import'
        static = False
        if self.value() == "static":
            static = True
            self.advance()
        parts: List[str] = []
        wildcard = False
        while not self.at_end() and self.value() != ";":
            t = self.advance()
            if t.value == "*":
                wildcard = True
            elif t.is_ident:
                parts.append(t.value)
        if not self.at_end():
            self.advance()  # ';'
        if static:
            self.diagnostics.append((line, "static import is outside the subset"))
            return
        if wildcard or not parts:
            self.diagnostics.append((line, "wildcard import is outside the subset"))
            return
        simple = parts[-1]
        self.root.children.append(_Node(IMPORT_USAGE, line, line, simple))
        self.bindings.append(ImportBinding(simple, ".".join(parts), simple, line))

    # -- declarations ----------------------------------------------------------

    def parse_class(self, parent: _Node) -> None:
        kw = self.advance()  # class/interface/enum/record
        if not (self.peek() and self.peek().is_ident):
            self.diagnostics.append((kw.line, "missing class name"))
            return
        name_tok = self.advance()
        node = _Node(CLASS_DECL, kw.line, name_tok.line, name_tok.value)
        parent.children.append(node)
        if self.value() == "<":
            self.skip_balanced("<", ">")
        if self.value() == "(":  # record components: treat like parameters
            self.parse_params(node)
        while self.value() in ("extends", "implements"):
            self.advance()
            while True:
                simple, _ = self.parse_type(node.children)
                if simple is None or self.value() != ",":
                    break
                self.advance()
        if self.value() != "{":
            self.diagnostics.append((name_tok.line, "missing class body"))
            self.skip_to(";")
            return
        self.advance()
        self.parse_class_body(node)

    def parse_class_body(self, class_node: _Node) -> None:
        while not self.at_end():
            self.skip_annotations()
            v = self.value()
            if v is None:
                break
            if v == "}":
                class_node.end = max(class_node.end, self.advance().line)
                return
            if v == ";":
                self.advance()
            elif v in _MODIFIERS:
                self.advance()
            elif v == "{":  # initializer block
                self.advance()
                self.parse_body(class_node)
            elif v in _CLASS_KEYWORDS:
                self.parse_class(class_node)
            elif self.peek().is_ident or v in _PRIMITIVES:
                self.parse_member(class_node)
            else:
                self.diagnostics.append(
                    (self.peek().line, "unexpected token in class body: %r" % v)
                )
                self.advance()
        class_node.end = max(class_node.end, self.tokens[-1].line if self.tokens else 1)

    def parse_member(self, class_node: _Node) -> None:
        start_line = self.peek().line
        head: List[_Node] = []
        simple, matched = self.parse_type(head)
        if not matched:
            self.diagnostics.append((start_line, "unrecognized class member"))
            self.advance()
            return
        if self.value() == "(" and simple is not None:
            # constructor: the head type name is the declared name, not a usage
            head = [h for h in head if h.identifier != simple]
            self.parse_method(class_node, simple, start_line, head)
            return
        if not (self.peek() and self.peek().is_ident):
            self.diagnostics.append((start_line, "unrecognized class member"))
            self.recover_member()
            return
        name_tok = self.advance()
        if self.value() == "(":
            self.parse_method(class_node, name_tok.value, start_line, head)
        else:
            self.parse_fields(class_node, name_tok, start_line, head)

    def parse_method(self, class_node, name, start_line, head) -> None:
        node = _Node(METHOD_DECL, start_line, start_line, name)
        class_node.children.append(node)
        node.children.extend(head)
        self.parse_params(node)
        if self.value() == "throws":
            self.advance()
            while True:
                simple, _ = self.parse_type(node.children)
                if simple is None or self.value() != ",":
                    break
                self.advance()
        if self.value() == "{":
            self.advance()
            end = self.parse_body(node)
            node.end = max(node.end, end)
        else:
            node.end = max(node.end, self.peek().line if self.peek() else start_line)
            self.skip_to(";")

    def parse_params(self, owner: _Node) -> None:
        if self.value() != "(":
            return
        self.advance()
        while not self.at_end() and self.value() != ")":
            self.skip_annotations()
            if self.value() == "final":
                self.advance()
                continue
            if self.value() in (",",):
                self.advance()
                continue
            if self.value() == ")":
                break
            simple, matched = self.parse_type(owner.children)
            if not matched and simple is None:
                self.advance()
                continue
            while self.value() == ".":  # varargs '...'
                self.advance()
            if self.peek() and self.peek().is_ident:
                t = self.advance()
                owner.children.append(_Node(VARIABLE_DECL, t.line, t.line, t.value))
        if self.value() == ")":
            self.advance()

    def parse_fields(self, class_node, name_tok, start_line, head) -> None:
        first = True
        while True:
            node = _Node(FIELD_DECL, start_line if first else name_tok.line,
                         name_tok.line, name_tok.value)
            class_node.children.append(node)
            if first:
                node.children.extend(head)
            first = False
            if self.value() == "=":
                self.advance()
                self.scan_expression(node, stop_at_comma=True)
            node.end = max(node.end, self.peek().line if self.peek() else node.end)
            if self.value() == ",":
                self.advance()
                if not (self.peek() and self.peek().is_ident):
                    break
                name_tok = self.advance()
                continue
            break
        self.skip_to(";") if self.value() != ";" else self.advance()

    # -- types ----------------------------------------------------------------

    def parse_type(self, sink: List[_Node]) -> Tuple[Optional[str], bool]:
        """Consume a type reference; returns (simple name or None, matched).

        Emits a name-usage for the final simple name of a non-primitive type
        and for plausible type identifiers inside its generic argument list.
        """
        t = self.peek()
        if t is None:
            return None, False
        if t.value in _PRIMITIVES:
            self.advance()
            while self.value() == "[" and self.value(1) == "]":
                self.advance()
                self.advance()
            return None, True
        if not t.is_ident or t.value in _KEYWORDS:
            return None, False
        last = self.advance()
        while self.value() == "." and self.peek(1) and self.peek(1).is_ident:
            self.advance()
            last = self.advance()
        sink.append(_Node(NAME_USAGE, last.line, last.line, last.value))
        if self.value() == "<":
            self.consume_generics(sink)
        while self.value() == "[" and self.value(1) == "]":
            self.advance()
            self.advance()
        return last.value, True

    def consume_generics(self, sink: List[_Node]) -> None:
        depth = 0
        while not self.at_end():
            t = self.advance()
            if t.value == "<":
                depth += 1
            elif t.value == ">":
                depth -= 1
                if depth == 0:
                    return
            elif t.is_ident and t.value not in _KEYWORDS:
                sink.append(_Node(NAME_USAGE, t.line, t.line, t.value))

    def looks_like_generics(self, start: int) -> Optional[int]:
        """Index just past a balanced <...> of type-ish tokens, else None."""
        depth = 0
        j = start
        while j < len(self.tokens):
            t = self.tokens[j]
            if t.value == "<":
                depth += 1
            elif t.value == ">":
                depth -= 1
                if depth == 0:
                    return j + 1
            elif not (t.is_ident and t.value not in _KEYWORDS) and (
                t.value not in _GENERIC_OK
            ):
                return None
            j += 1
        return None

    # -- statement bodies -------------------------------------------------------

    def parse_body(self, owner: _Node) -> int:
        """Scan a method/initializer body; returns the closing brace line."""
        depth = 1
        prev: Optional[str] = None
        end_line = owner.end
        while not self.at_end():
            t = self.peek()
            v = t.value
            if v == "{":
                depth += 1
                self.advance()
                prev = v
                continue
            if v == "}":
                depth -= 1
                end_line = self.advance().line
                if depth == 0:
                    owner.end = max(owner.end, end_line)
                    return end_line
                prev = v
                continue
            if v == "new":
                self.advance()
                last = None
                while self.peek() and self.peek().is_ident:
                    last = self.advance()
                    if self.value() == "." and self.peek(1) and self.peek(1).is_ident:
                        self.advance()
                        continue
                    break
                if last is not None and last.value not in _PRIMITIVES:
                    owner.children.append(
                        _Node(NEW_USAGE, last.line, last.line, last.value)
                    )
                if self.value() == "<":
                    self.skip_balanced("<", ">")
                prev = "new"
                continue
            if (t.is_ident or v in _PRIMITIVES) and prev in _STMT_START:
                consumed = self.try_local_declaration(owner)
                if consumed:
                    prev = None
                    continue
            if t.is_ident and v not in _KEYWORDS:
                self.advance()
                nxt = self.value()
                if prev == ".":
                    kind = CALL_USAGE if nxt == "(" else ATTRIBUTE_USAGE
                elif nxt == "(":
                    kind = CALL_USAGE
                else:
                    kind = NAME_USAGE
                owner.children.append(_Node(kind, t.line, t.line, t.value))
                prev = v
                continue
            self.advance()
            prev = v
        owner.end = max(owner.end, end_line)
        return end_line

    def try_local_declaration(self, owner: _Node) -> bool:
        """Match TYPE NAME at the cursor (followed by = ; , : or ))."""
        save = self.i
        t = self.peek()
        nodes: List[_Node] = []
        if t.value in _PRIMITIVES:
            j = self.i + 1
            while self.value_at(j) == "[" and self.value_at(j + 1) == "]":
                j += 2
        elif t.is_ident and t.value not in _KEYWORDS:
            j = self.i + 1
            while self.value_at(j) == "." and self.tok_at(j + 1) and self.tok_at(j + 1).is_ident:
                t = self.tok_at(j + 1)
                j += 2
            if self.value_at(j) == "<":
                past = self.looks_like_generics(j)
                if past is None:
                    return False
                j = past
            while self.value_at(j) == "[" and self.value_at(j + 1) == "]":
                j += 2
        else:
            return False
        name = self.tok_at(j)
        if not (name and name.is_ident and name.value not in _KEYWORDS):
            return False
        after = self.value_at(j + 1)
        if after not in ("=", ";", ",", ":", ")"):
            return False
        # commit: emit type usages by re-walking the consumed range
        self.i = save
        simple, _ = self.parse_type(owner.children)
        name_tok = self.advance()
        owner.children.append(
            _Node(VARIABLE_DECL, name_tok.line, name_tok.line, name_tok.value)
        )
        return True

    def tok_at(self, j: int) -> Optional[_Token]:
        return self.tokens[j] if j < len(self.tokens) else None

    def value_at(self, j: int) -> Optional[str]:
        t = self.tok_at(j)
        return t.value if t else None

    def scan_expression(self, owner: _Node, stop_at_comma: bool = False) -> None:
        """Scan tokens up to the terminating ';' (or top-level ',')."""
        depth = 0
        prev: Optional[str] = None
        while not self.at_end():
            t = self.peek()
            v = t.value
            if depth == 0 and (v == ";" or (stop_at_comma and v == ",")):
                return
            if v in "([":
                depth += 1
            elif v in ")]":
                if depth == 0:
                    return
                depth -= 1
            elif v == "new":
                self.advance()
                last = None
                while self.peek() and self.peek().is_ident:
                    last = self.advance()
                    if self.value() == "." and self.peek(1) and self.peek(1).is_ident:
                        self.advance()
                        continue
                    break
                if last is not None and last.value not in _PRIMITIVES:
                    owner.children.append(
                        _Node(NEW_USAGE, last.line, last.line, last.value)
                    )
                prev = "new"
                continue
            elif t.is_ident and v not in _KEYWORDS:
                self.advance()
                nxt = self.value()
                if prev == ".":
                    kind = CALL_USAGE if nxt == "(" else ATTRIBUTE_USAGE
                elif nxt == "(":
                    kind = CALL_USAGE
                else:
                    kind = NAME_USAGE
                owner.children.append(_Node(kind, t.line, t.line, t.value))
                prev = v
                continue
            prev = v
            self.advance()

    def recover_member(self) -> None:
        while not self.at_end() and self.value() not in (";", "{", "}"):
            self.advance()
        if self.value() == ";":
            self.advance()
        elif self.value() == "{":
            self.skip_balanced("{", "}")


class JavaFrontEnd(FrontEnd):
    descriptor = DESCRIPTOR

    def parse_file(self, path: str, content: str) -> ParseResult:
        raw_lines = content.splitlines()
        stripped = _strip_comments_and_literals(content)
        parser = _Parser(path, _tokenize(stripped), len(raw_lines))
        if raw_lines:
            parser.parse()
        _sort_children(parser.root)
        return ParseResult(
            parser.root.freeze(path),
            tuple(parser.diagnostics),
            tuple(parser.bindings),
        )

    def resolve_module(
        self, module: str, importer_path: str, project_files: Set[str]
    ) -> Optional[str]:
        rel = "/".join(module.split(".")) + ".java"
        return rel if rel in project_files else None


def _sort_children(node: _Node) -> None:
    node.children.sort(key=lambda c: c.start)
    for child in node.children:
        _sort_children(child)
