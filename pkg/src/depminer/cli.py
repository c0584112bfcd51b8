"""Command-line entry point: single-project mining and batch mode.

Exit codes: 0 success (including per-file diagnostics), 1 usage/configuration
error, 2 project-level failure, 3 internal invariant violation.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
import traceback
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

from . import __version__
from .aggregate import lift, merge_token_records
from .frontend import default_registry
from .model import (
    CodeElement,
    DependencyRecord,
    Granularity,
    LocationMarker,
    UnresolvedUsage,
)
from .output import OutputDocument, emit_dot, emit_json
from .resolver import resolve_project
from .scope import ScopeError, load_scope

TOOL_NAME = "depminer"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PROJECT = 2
EXIT_INTERNAL = 3


class UsageError(Exception):
    pass


class ProjectError(Exception):
    pass


@dataclass
class RunConfig:
    root: str
    out_path: str
    granularity: Granularity = Granularity.TOKEN
    scope_path: Optional[str] = None
    index_cache_dir: Optional[str] = None
    dot_path: Optional[str] = None
    workers: int = 0  # 0 means available parallelism
    absolute_paths: bool = False
    language: str = "auto"

    def effective_workers(self) -> int:
        if self.workers >= 1:
            return self.workers
        return os.cpu_count() or 1


def _rebase_element(element: CodeElement, root: Path) -> CodeElement:
    loc = element.location
    if loc.path == ".":
        new_path = root.resolve().as_posix()
    else:
        new_path = (root.resolve() / loc.path).as_posix()
    return CodeElement(
        LocationMarker(new_path, loc.start_line, loc.end_line),
        element.signature,
        element.identifier,
    )


def run_mine(config: RunConfig) -> int:
    started = time.monotonic()
    root = Path(config.root)
    if not root.is_dir():
        raise ProjectError("project root does not exist: %s" % config.root)
    if config.dot_path and config.granularity is Granularity.TOKEN:
        raise UsageError("--emit-dot requires a granularity coarser than token")
    try:
        scope = load_scope(config.scope_path)
    except ScopeError as exc:
        raise UsageError(str(exc)) from exc

    registry = default_registry()
    if config.language != "auto" and config.language not in registry.languages():
        raise UsageError("unknown language: %r" % config.language)

    cache_path: Optional[Path] = None
    if config.index_cache_dir:
        digest = hashlib.sha1(root.resolve().as_posix().encode("utf-8")).hexdigest()
        cache_path = Path(config.index_cache_dir) / ("%s.idx" % digest)

    outcome = resolve_project(
        root,
        scope,
        registry,
        workers=config.effective_workers(),
        language=config.language,
        index_cache_path=cache_path,
    )

    def trees(rel_path: str):
        sem = outcome.project.semantics(rel_path)
        return sem.tree if sem else None

    if config.granularity is Granularity.TOKEN:
        dependencies = merge_token_records(outcome.records)
        edges = None
    else:
        edges = lift(outcome.records, config.granularity, trees, registry)
        dependencies = edges

    unresolved = outcome.unresolved
    diagnostics = outcome.diagnostics
    project_root = config.root
    if config.absolute_paths:
        project_root = root.resolve().as_posix()
        rebased = []
        for dep in dependencies:
            rebased.append(
                dep.__class__(
                    _rebase_element(dep.source, root),
                    _rebase_element(dep.target, root),
                    *(
                        (dep.count, dep.ambiguous)
                        if isinstance(dep, DependencyRecord)
                        else (dep.count, dep.ambiguous_count)
                    ),
                )
            )
        dependencies = rebased
        unresolved = [
            UnresolvedUsage(_rebase_element(u.element, root), u.reason)
            for u in unresolved
        ]
        diagnostics = [
            ((root.resolve() / p).as_posix(), line, msg)
            for p, line, msg in diagnostics
        ]
        if edges is not None:
            edges = dependencies

    doc = OutputDocument(
        project_root=project_root,
        granularity=config.granularity,
        tool_name=TOOL_NAME,
        tool_version=__version__,
        dependencies=dependencies,
        unresolved=unresolved,
        diagnostics=diagnostics,
    )
    try:
        out_path = Path(config.out_path)
        if out_path.parent != Path(""):
            out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_bytes(emit_json(doc))
        if config.dot_path:
            Path(config.dot_path).write_bytes(
                emit_dot(edges, config.granularity)
            )
    except OSError as exc:
        raise ProjectError("cannot write output: %s" % exc) from exc

    elapsed = time.monotonic() - started
    print(
        "%s: files=%d records=%d unresolved=%d index=%s elapsed=%.2fs"
        % (
            TOOL_NAME,
            len(outcome.files),
            sum(d.count for d in dependencies),
            len(unresolved),
            outcome.index_status,
            elapsed,
        ),
        file=sys.stderr,
    )
    return EXIT_OK


def _load_manifest(path: str) -> List[RunConfig]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            document = json.load(handle)
    except OSError as exc:
        raise UsageError("cannot read manifest %s: %s" % (path, exc)) from exc
    except json.JSONDecodeError as exc:
        raise UsageError("manifest %s is not valid JSON: %s" % (path, exc)) from exc
    if not isinstance(document, dict) or not isinstance(document.get("entries"), list):
        raise UsageError("manifest must be an object with an 'entries' list")
    configs: List[RunConfig] = []
    for i, entry in enumerate(document["entries"]):
        if not isinstance(entry, dict):
            raise UsageError("manifest entry %d must be an object" % i)
        root = entry.get("root")
        out = entry.get("out")
        if not isinstance(root, str) or not isinstance(out, str):
            raise UsageError("manifest entry %d needs string 'root' and 'out'" % i)
        granularity = Granularity.TOKEN
        if "granularity" in entry:
            try:
                granularity = Granularity.from_name(entry["granularity"])
            except ValueError as exc:
                raise UsageError("manifest entry %d: %s" % (i, exc)) from exc
        scope_path = entry.get("scope")
        if scope_path is not None and not isinstance(scope_path, str):
            raise UsageError("manifest entry %d: 'scope' must be a string" % i)
        configs.append(
            RunConfig(root=root, out_path=out, granularity=granularity, scope_path=scope_path)
        )
    roots = [c.root for c in configs]
    outs = [c.out_path for c in configs]
    if len(set(roots)) != len(roots):
        raise UsageError("manifest entry roots must be distinct")
    if len(set(outs)) != len(outs):
        raise UsageError("manifest entry outputs must be distinct")
    return configs


def run_batch(manifest_path: str) -> int:
    configs = _load_manifest(manifest_path)
    worst = EXIT_OK
    for config in configs:
        code = _run_entry(config)
        worst = max(worst, code)
    return worst


def _run_entry(config: RunConfig) -> int:
    try:
        return run_mine(config)
    except UsageError as exc:
        print("%s: error: %s" % (TOOL_NAME, exc), file=sys.stderr)
        return EXIT_USAGE
    except ProjectError as exc:
        print("%s: error: %s" % (TOOL_NAME, exc), file=sys.stderr)
        return EXIT_PROJECT
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog=TOOL_NAME, description="Mine intra-project dependencies.")
    parser.add_argument("--version", action="version", version="%s %s" % (TOOL_NAME, __version__))
    sub = parser.add_subparsers(dest="command", required=True)

    mine = sub.add_parser("mine", help="mine one project")
    mine.add_argument("root", help="project root directory")
    mine.add_argument("--out", required=True, help="output JSON file")
    mine.add_argument(
        "--granularity",
        choices=[g.value for g in Granularity],
        default="token",
    )
    mine.add_argument("--scope", default=None, help="scope document (JSON)")
    mine.add_argument("--index-cache", default=None, help="index cache directory")
    mine.add_argument("--emit-dot", default=None, help="also write a DOT graph")
    mine.add_argument("--jobs", type=int, default=0, help="worker count")
    mine.add_argument("--absolute-paths", action="store_true")
    mine.add_argument("--lang", default="auto", help="front-end id or 'auto'")

    batch = sub.add_parser("batch", help="mine several projects from a manifest")
    batch.add_argument("manifest", help="batch manifest (JSON)")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print("%s: error: %s" % (TOOL_NAME, exc), file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "mine":
            if args.jobs < 0:
                raise UsageError("--jobs must be >= 1")
            config = RunConfig(
                root=args.root,
                out_path=args.out,
                granularity=Granularity.from_name(args.granularity),
                scope_path=args.scope,
                index_cache_dir=args.index_cache,
                dot_path=args.emit_dot,
                workers=args.jobs,
                absolute_paths=args.absolute_paths,
                language=args.lang,
            )
            return run_mine(config)
        return run_batch(args.manifest)
    except UsageError as exc:
        print("%s: error: %s" % (TOOL_NAME, exc), file=sys.stderr)
        return EXIT_USAGE
    except ProjectError as exc:
        print("%s: error: %s" % (TOOL_NAME, exc), file=sys.stderr)
        return EXIT_PROJECT
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
