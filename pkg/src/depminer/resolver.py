"""Usage-to-declaration resolution and the project pipeline.

Resolution runs in three stages per usage: lexical scope in the usage's own
file (nearest declaration wins), import chasing for names introduced by
project-internal imports, then a global index query whose candidate files are
re-parsed to confirm file-scope declarations. A stage hit suppresses the
later stages.
"""
from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Set, Tuple

from . import index as index_mod
from .frontend.base import (
    CLASSIFY_DECLARATION,
    CLASSIFY_USAGE,
    FrontEnd,
    FrontEndDescriptor,
    FrontEndRegistry,
    ParseResult,
    classify,
)
from .index import TokenIndex
from .model import (
    REASON_EXTERNAL_TARGET,
    REASON_NO_DECLARATION,
    REASON_SCOPE_EXCLUDED,
    CodeElement,
    DependencyRecord,
    TypeSignature,
    UnresolvedUsage,
    element_sort_key,
    record_sort_key,
    unresolved_sort_key,
)
from .scope import AnalysisScope

STATUS_RESOLVED = "resolved"
STATUS_AMBIGUOUS = "ambiguous"
STATUS_UNRESOLVED = "unresolved"

_IMPORT_CHASE_LIMIT = 8


@dataclass(frozen=True)
class ResolutionResult:
    usage: CodeElement
    candidates: Tuple[CodeElement, ...]
    status: str
    reason: Optional[str] = None


@dataclass
class _Scope:
    parent: Optional[int]
    kind: str
    declarations: Dict[str, List[Tuple[int, CodeElement]]] = field(default_factory=dict)


@dataclass
class FileSemantics:
    path: str
    language: str
    tree: ParseResult
    scopes: List[_Scope]
    usages: List[Tuple[CodeElement, int]]  # document order, with scope index
    exportable: Dict[str, List[CodeElement]]  # declarations visible cross-file


def analyze_file(path: str, tree: ParseResult, frontend: FrontEnd) -> FileSemantics:
    descriptor = frontend.descriptor
    language = descriptor.language
    scopes: List[_Scope] = [_Scope(None, "file")]
    usages: List[Tuple[CodeElement, int]] = []
    exportable: Dict[str, List[CodeElement]] = {}

    def visit(node, scope_idx: int, in_function: bool) -> None:
        role = classify(node, descriptor)
        if node.identifier is not None:
            element = CodeElement(
                node.span, TypeSignature(language, node.kind), node.identifier
            )
            if role == CLASSIFY_DECLARATION:
                scopes[scope_idx].declarations.setdefault(
                    node.identifier, []
                ).append((node.span.start_line, element))
                if not in_function:
                    exportable.setdefault(node.identifier, []).append(element)
            elif role == CLASSIFY_USAGE:
                usages.append((element, scope_idx))
        child_scope = scope_idx
        child_in_function = in_function
        if node.kind in descriptor.scope_kinds:
            scopes.append(_Scope(scope_idx, node.kind))
            child_scope = len(scopes) - 1
            if node.kind in descriptor.function_scope_kinds:
                child_in_function = True
        for child in node.children:
            visit(child, child_scope, child_in_function)

    for child in tree.root.children:
        visit(child, 0, False)
    for entries in (s.declarations for s in scopes):
        for decls in entries.values():
            decls.sort(key=lambda pair: (pair[0], element_sort_key(pair[1])))
    for name in exportable:
        exportable[name].sort(key=element_sort_key)
    return FileSemantics(path, language, tree, scopes, usages, exportable)


def collect_usages(tree: ParseResult, descriptor: FrontEndDescriptor):
    """Depth-first document-order usage elements of one parsed tree."""
    out = []
    for node in tree.root.walk():
        if node.identifier is not None and classify(node, descriptor) == CLASSIFY_USAGE:
            out.append(
                CodeElement(
                    node.span,
                    TypeSignature(descriptor.language, node.kind),
                    node.identifier,
                )
            )
    return out


class ProjectState:
    """Shared read-mostly state: file lists, contents, parsed trees, index."""

    def __init__(self, root: Path, registry: FrontEndRegistry, language: str = "auto"):
        self.root = root
        self.registry = registry
        self.language = language
        self.diagnostics: List[Tuple[str, int, str]] = []
        self._semantics: Dict[str, FileSemantics] = {}
        self._contents: Dict[str, bytes] = {}
        self._lock = threading.Lock()
        self.all_claimed: Set[str] = set()
        self.files: List[str] = []  # scope-included, sorted
        self.files_set: Set[str] = set()
        self.index: Optional[TokenIndex] = None

    def frontend_of(self, rel_path: str) -> Optional[FrontEnd]:
        fe = self.registry.frontend_for_path(rel_path)
        if fe is None:
            return None
        if self.language != "auto" and fe.descriptor.language != self.language:
            return None
        return fe

    def enumerate(self, scope: AnalysisScope) -> None:
        claimed: Set[str] = set()
        for path in self.root.rglob("*"):
            if not path.is_file():
                continue
            rel = path.relative_to(self.root).as_posix()
            if any(part.startswith(".") for part in rel.split("/")):
                continue
            if self.frontend_of(rel) is not None:
                claimed.add(rel)
        self.all_claimed = claimed
        self.files = sorted(f for f in claimed if scope.includes_path(f))
        self.files_set = set(self.files)

    def content(self, rel_path: str) -> Optional[bytes]:
        with self._lock:
            if rel_path in self._contents:
                return self._contents[rel_path]
        try:
            data = (self.root / rel_path).read_bytes()
        except OSError as exc:
            with self._lock:
                self.diagnostics.append((rel_path, 0, "unreadable file: %s" % exc))
                self._contents[rel_path] = b""
            return None
        with self._lock:
            self._contents[rel_path] = data
        return data

    def semantics(self, rel_path: str) -> Optional[FileSemantics]:
        with self._lock:
            cached = self._semantics.get(rel_path)
        if cached is not None:
            return cached
        frontend = self.frontend_of(rel_path)
        if frontend is None:
            return None
        data = self.content(rel_path)
        if data is None:
            return None
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError:
            text = data.decode("utf-8", errors="replace")
            with self._lock:
                self.diagnostics.append(
                    (rel_path, 0, "invalid UTF-8; decoded with replacement")
                )
        tree = frontend.parse_file(rel_path, text)
        sem = analyze_file(rel_path, tree, frontend)
        with self._lock:
            # duplicate fills are benign: parsing is pure
            if rel_path not in self._semantics:
                self._semantics[rel_path] = sem
                for line, message in tree.diagnostics:
                    self.diagnostics.append((rel_path, line, message))
            sem = self._semantics[rel_path]
        return sem


class _Resolver:
    def __init__(self, project: ProjectState, scope: AnalysisScope):
        self.project = project
        self.scope = scope

    def resolve_usage(self, usage: CodeElement, scope_idx: int, sem: FileSemantics):
        descriptor = self.project.registry.get(sem.language).descriptor
        kind = usage.signature.kind
        if kind == "attribute-usage":
            return self._finish(usage, [], REASON_NO_DECLARATION)
        if kind == "import-usage":
            candidates, reason = self._import_stage(usage, sem, import_node=True)
            return self._finish(usage, candidates, reason)
        lexical = self._lexical_stage(usage, scope_idx, sem, descriptor)
        if lexical:
            return self._finish(usage, lexical, None)
        if self._is_import_bound(usage.identifier, sem):
            candidates, reason = self._import_stage(usage, sem, import_node=False)
            return self._finish(usage, candidates, reason)
        candidates = self._global_stage(usage, sem)
        return self._finish(usage, candidates, REASON_NO_DECLARATION)

    # Stage 1: nearest declaration in the lexical scope chain.
    def _lexical_stage(self, usage, scope_idx, sem, descriptor):
        name = usage.identifier
        line = usage.location.start_line
        chain: List[int] = []
        idx: Optional[int] = scope_idx
        while idx is not None:
            chain.append(idx)
            idx = sem.scopes[idx].parent
        class_kinds = descriptor.scope_kinds - descriptor.function_scope_kinds
        for pos, s_idx in enumerate(chain):
            scope = sem.scopes[s_idx]
            if descriptor.class_scope_opaque and pos > 0 and scope.kind in class_kinds:
                continue
            entries = scope.declarations.get(name)
            if not entries:
                continue
            preceding = [e for decl_line, e in entries if decl_line <= line]
            winner = preceding[-1] if preceding else entries[0][1]
            return [winner]
        return []

    # Stage 2: chase names introduced by project-internal imports.
    def _import_stage(self, usage, sem, import_node: bool):
        name = usage.identifier
        line = usage.location.start_line
        binding = None
        if import_node:
            for b in sem.tree.bindings:
                if b.line == line and (b.member or b.local_name) == name:
                    binding = b
                    break
        else:
            preceding = [b for b in sem.tree.bindings if b.local_name == name]
            if preceding:
                before = [b for b in preceding if b.line <= line]
                binding = before[-1] if before else preceding[0]
        if binding is None:
            return [], REASON_NO_DECLARATION
        frontend = self.project.registry.get(sem.language)
        module, member = binding.module, binding.member
        current = sem.path
        for _ in range(_IMPORT_CHASE_LIMIT):
            target = frontend.resolve_module(module, current, self.project.all_claimed)
            if target is None:
                return [], REASON_EXTERNAL_TARGET
            if target not in self.project.files_set:
                return [], REASON_SCOPE_EXCLUDED
            target_sem = self.project.semantics(target)
            if target_sem is None:
                return [], REASON_NO_DECLARATION
            wanted = member if member is not None else module.split(".")[-1]
            found = target_sem.exportable.get(wanted)
            if found:
                return list(found), None
            onward = [b for b in target_sem.tree.bindings if b.local_name == wanted]
            if not onward:
                return [], REASON_NO_DECLARATION
            module, member = onward[0].module, onward[0].member
            current = target
        return [], REASON_NO_DECLARATION

    # Stage 3: index query plus per-candidate file-scope confirmation.
    def _global_stage(self, usage, sem):
        if self.project.index is None:
            return []
        postings = index_mod.query(self.project.index, usage.identifier)
        file_table = self.project.index.file_table
        paths = sorted(
            {
                file_table[p.file_ordinal][0]
                for p in postings
                if p.occurrence == "declaration"
            }
        )
        candidates: List[CodeElement] = []
        for rel in paths:
            frontend = self.project.frontend_of(rel)
            if frontend is None or frontend.descriptor.language != sem.language:
                continue
            target_sem = self.project.semantics(rel)
            if target_sem is None:
                continue
            candidates.extend(target_sem.exportable.get(usage.identifier, ()))
        return candidates

    def _is_import_bound(self, name: str, sem: FileSemantics) -> bool:
        return any(b.local_name == name for b in sem.tree.bindings)

    def _finish(self, usage, candidates, reason):
        candidates = sorted(set(candidates), key=element_sort_key)
        kept = [
            c
            for c in candidates
            if not self.scope.lines_excluded(
                c.location.path, c.location.start_line, c.location.end_line
            )
        ]
        if kept:
            status = STATUS_RESOLVED if len(kept) == 1 else STATUS_AMBIGUOUS
            return ResolutionResult(usage, tuple(kept), status, None)
        if candidates:
            return ResolutionResult(usage, (), STATUS_UNRESOLVED, REASON_SCOPE_EXCLUDED)
        return ResolutionResult(
            usage, (), STATUS_UNRESOLVED, reason or REASON_NO_DECLARATION
        )


@dataclass
class ResolveOutcome:
    records: List[DependencyRecord]
    unresolved: List[UnresolvedUsage]
    diagnostics: List[Tuple[str, int, str]]
    files: List[str]
    project: ProjectState
    index_status: str


def _resolve_file(resolver: _Resolver, scope: AnalysisScope, rel: str):
    records: List[DependencyRecord] = []
    unresolved: List[UnresolvedUsage] = []
    sem = resolver.project.semantics(rel)
    if sem is None:
        return records, unresolved
    for usage, scope_idx in sem.usages:
        loc = usage.location
        if scope.lines_excluded(loc.path, loc.start_line, loc.end_line):
            continue
        result = resolver.resolve_usage(usage, scope_idx, sem)
        if result.status == STATUS_UNRESOLVED:
            unresolved.append(UnresolvedUsage(usage, result.reason))
        else:
            ambiguous = result.status == STATUS_AMBIGUOUS
            for candidate in result.candidates:
                records.append(DependencyRecord(usage, candidate, 1, ambiguous))
    return records, unresolved


def _prepare_index(project: ProjectState, cache_path: Optional[Path]) -> str:
    fingerprints: Dict[str, index_mod.FileFingerprint] = {}
    for rel in project.files:
        data = project.content(rel)
        fingerprints[rel] = index_mod.fingerprint(data if data is not None else b"")

    cached: Optional[TokenIndex] = None
    if cache_path is not None and cache_path.exists():
        try:
            cached = index_mod.deserialize_index(cache_path.read_bytes())
        except index_mod.IndexFormatError:
            cached = None
    reused: Dict[str, Set[Tuple[str, int, str]]] = {}
    if cached is not None:
        by_path = {path: (ordinal, fp) for ordinal, (path, fp) in enumerate(cached.file_table)}
        matching = {
            rel
            for rel in project.files
            if rel in by_path and by_path[rel][1] == fingerprints[rel]
        }
        occurrences_by_ordinal: Dict[int, Set[Tuple[str, int, str]]] = {}
        for token, postings in cached.postings.items():
            for posting in postings:
                occurrences_by_ordinal.setdefault(posting.file_ordinal, set()).add(
                    (token, posting.line, posting.occurrence)
                )
        for rel in matching:
            reused[rel] = occurrences_by_ordinal.get(by_path[rel][0], set())

    entries = []
    for rel in project.files:
        if rel in reused:
            occurrences = reused[rel]
        else:
            sem = project.semantics(rel)
            if sem is None:
                occurrences = set()
            else:
                frontend = project.frontend_of(rel)
                occurrences = index_mod.extract_occurrences(
                    sem.tree, frontend.descriptor
                )
        entries.append((rel, fingerprints[rel], occurrences))
    project.index = index_mod.build_index(entries)

    if cache_path is not None:
        cache_path.parent.mkdir(parents=True, exist_ok=True)
        cache_path.write_bytes(index_mod.serialize_index(project.index))
    if cached is None:
        return "built"
    if len(reused) == len(project.files) and len(cached.file_table) == len(project.files):
        return "cached"
    return "updated"


def resolve_project(
    root: Path,
    scope: AnalysisScope,
    registry: FrontEndRegistry,
    workers: int = 1,
    language: str = "auto",
    index_cache_path: Optional[Path] = None,
) -> ResolveOutcome:
    if not root.is_dir():
        raise FileNotFoundError("project root does not exist: %s" % root)
    project = ProjectState(root, registry, language)
    project.enumerate(scope)

    if workers > 1 and project.files:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(project.semantics, project.files))

    index_status = _prepare_index(project, index_cache_path)

    resolver = _Resolver(project, scope)
    records: List[DependencyRecord] = []
    unresolved: List[UnresolvedUsage] = []
    if workers > 1 and project.files:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(lambda rel: _resolve_file(resolver, scope, rel), project.files)
            )
    else:
        results = [_resolve_file(resolver, scope, rel) for rel in project.files]
    for recs, unres in results:
        records.extend(recs)
        unresolved.extend(unres)

    records.sort(key=record_sort_key)
    unresolved.sort(key=unresolved_sort_key)
    diagnostics = sorted(set(project.diagnostics))
    return ResolveOutcome(records, unresolved, diagnostics, list(project.files), project, index_status)
