"""Front-end contract: parse source into kind-labeled syntax trees."""
from __future__ import annotations

import posixpath
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from ..model import CodeElement, Granularity, LocationMarker, TypeSignature, contains

CLASSIFY_DECLARATION = "declaration"
CLASSIFY_USAGE = "usage"
CLASSIFY_OTHER = "other"

# Synthetic container used when a location has no enclosing function/class.
TOPLEVEL_KIND = "module-toplevel"
FILE_KIND = "file"
DIRECTORY_KIND = "directory"


@dataclass(frozen=True)
class SyntaxNode:
    kind: str
    span: LocationMarker
    identifier: Optional[str] = None
    children: Tuple["SyntaxNode", ...] = ()

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass(frozen=True)
class ImportBinding:
    """A local name introduced by an import statement.

    `member` is the original name inside the imported module, or None when the
    binding refers to the module as a whole (``import x``).
    """

    local_name: str
    module: str
    member: Optional[str]
    line: int


@dataclass(frozen=True)
class ParseResult:
    root: SyntaxNode
    diagnostics: Tuple[Tuple[int, str], ...] = ()
    bindings: Tuple[ImportBinding, ...] = ()


@dataclass(frozen=True)
class FrontEndDescriptor:
    language: str
    extensions: FrozenSet[str]
    declaration_kinds: FrozenSet[str]
    usage_kinds: FrozenSet[str]
    unit_kinds: Dict[Granularity, FrozenSet[str]]
    scope_kinds: FrozenSet[str]
    # Kinds whose scope hides its declarations from other files (locals).
    function_scope_kinds: FrozenSet[str]
    # Python-style visibility: class bodies are not in the lexical chain of
    # code nested inside functions defined within them.
    class_scope_opaque: bool = False

    @property
    def vocabulary(self) -> FrozenSet[str]:
        extra = frozenset({FILE_KIND, TOPLEVEL_KIND})
        return self.declaration_kinds | self.usage_kinds | self.scope_kinds | extra


class FrontEnd:
    """Base class for language front-ends."""

    descriptor: FrontEndDescriptor

    def parse_file(self, path: str, content: str) -> ParseResult:
        raise NotImplementedError

    def resolve_module(
        self, module: str, importer_path: str, project_files: Set[str]
    ) -> Optional[str]:
        """Map an import's module string to a project-relative file path."""
        raise NotImplementedError


def classify(node: SyntaxNode, descriptor: FrontEndDescriptor) -> str:
    if node.kind in descriptor.declaration_kinds:
        return CLASSIFY_DECLARATION
    if node.kind in descriptor.usage_kinds:
        return CLASSIFY_USAGE
    return CLASSIFY_OTHER


def extract_identifier(node: SyntaxNode) -> Optional[str]:
    return node.identifier


def file_element(language: str, root: SyntaxNode) -> CodeElement:
    return CodeElement(root.span, TypeSignature(language, FILE_KIND), None)


def toplevel_element(language: str, root: SyntaxNode) -> CodeElement:
    return CodeElement(root.span, TypeSignature(language, TOPLEVEL_KIND), None)


def directory_element(language: str, file_path: str) -> CodeElement:
    parent = posixpath.dirname(file_path) or "."
    return CodeElement(
        LocationMarker(parent, 1, 0), TypeSignature(language, DIRECTORY_KIND), None
    )


def enclosing_unit(
    tree: ParseResult,
    location: LocationMarker,
    granularity: Granularity,
    descriptor: FrontEndDescriptor,
) -> CodeElement:
    """Smallest unit of the requested granularity containing `location`.

    Falls back to the synthetic top-level container (function/class
    granularity) or the file root element (file granularity).
    """
    root = tree.root
    if granularity is Granularity.FILE:
        return file_element(descriptor.language, root)
    if granularity not in (Granularity.FUNCTION, Granularity.CLASS):
        raise ValueError("enclosing_unit does not handle %s" % granularity.value)
    if not (root.span == location or contains(root.span, location)):
        raise ValueError(
            "location %r lies outside file span %r" % (location, root.span)
        )
    unit_kinds = descriptor.unit_kinds[granularity]
    best: Optional[SyntaxNode] = None
    for node in root.walk():
        if node.kind not in unit_kinds:
            continue
        if node.span == location or contains(node.span, location):
            if best is None or contains(best.span, node.span):
                best = node
    if best is None:
        return toplevel_element(descriptor.language, root)
    return CodeElement(
        best.span, TypeSignature(descriptor.language, best.kind), best.identifier
    )


class RegistryError(Exception):
    """Configuration problem in the front-end registry."""


class FrontEndRegistry:
    def __init__(self, frontends: Sequence[FrontEnd] = ()):
        self._by_language: Dict[str, FrontEnd] = {}
        self._by_extension: Dict[str, FrontEnd] = {}
        for fe in frontends:
            self.register(fe)

    def register(self, frontend: FrontEnd) -> None:
        lang = frontend.descriptor.language
        if lang in self._by_language:
            raise RegistryError("duplicate front-end language: %r" % lang)
        for ext in frontend.descriptor.extensions:
            if ext in self._by_extension:
                raise RegistryError(
                    "extension %r claimed by both %r and %r"
                    % (ext, self._by_extension[ext].descriptor.language, lang)
                )
        self._by_language[lang] = frontend
        for ext in frontend.descriptor.extensions:
            self._by_extension[ext] = frontend

    def detect_language(self, path: str) -> Optional[str]:
        dot = path.rfind(".")
        if dot < 0:
            return None
        frontend = self._by_extension.get(path[dot:])
        return frontend.descriptor.language if frontend else None

    def get(self, language: str) -> FrontEnd:
        try:
            return self._by_language[language]
        except KeyError:
            raise RegistryError("no front-end registered for %r" % language) from None

    def frontend_for_path(self, path: str) -> Optional[FrontEnd]:
        lang = self.detect_language(path)
        return self._by_language[lang] if lang else None

    def languages(self) -> List[str]:
        return sorted(self._by_language)
