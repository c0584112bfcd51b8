"""Granularity lifting: token records to function/class/file/directory edges."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

from .frontend.base import (
    FrontEndRegistry,
    ParseResult,
    directory_element,
    enclosing_unit,
    file_element,
)
from .model import (
    CodeElement,
    DependencyRecord,
    Granularity,
    element_sort_key,
    record_sort_key,
)

TreeProvider = Callable[[str], ParseResult]


@dataclass(frozen=True)
class AggregatedEdge:
    source: CodeElement
    target: CodeElement
    count: int
    ambiguous_count: int


def lift_element(
    element: CodeElement,
    granularity: Granularity,
    trees: TreeProvider,
    registry: FrontEndRegistry,
) -> CodeElement:
    """Map a token-level element to its container at the given granularity."""
    language = element.signature.language
    path = element.location.path
    if granularity is Granularity.DIRECTORY:
        return directory_element(language, path)
    tree = trees(path)
    if tree is None:
        raise RuntimeError("no parsed tree available for %s" % path)
    descriptor = registry.get(language).descriptor
    if granularity is Granularity.FILE:
        return file_element(language, tree.root)
    return enclosing_unit(tree, element.location, granularity, descriptor)


def merge_token_records(records: List[DependencyRecord]) -> List[DependencyRecord]:
    merged: Dict[Tuple[CodeElement, CodeElement], DependencyRecord] = {}
    for record in records:
        key = (record.source, record.target)
        prior = merged.get(key)
        if prior is None:
            merged[key] = record
        else:
            merged[key] = DependencyRecord(
                record.source,
                record.target,
                prior.count + record.count,
                prior.ambiguous or record.ambiguous,
            )
    return sorted(merged.values(), key=record_sort_key)


def lift(
    records: List[DependencyRecord],
    granularity: Granularity,
    trees: TreeProvider,
    registry: FrontEndRegistry,
) -> List[AggregatedEdge]:
    """Lift token-granularity records, merging duplicates and dropping
    self-edges whose endpoints coincide after lifting."""
    if granularity is Granularity.TOKEN:
        raise ValueError("token granularity is handled by merge_token_records")
    merged: Dict[Tuple[CodeElement, CodeElement], Tuple[int, int]] = {}
    for record in records:
        source = lift_element(record.source, granularity, trees, registry)
        target = lift_element(record.target, granularity, trees, registry)
        if source == target:
            continue
        count, ambiguous = merged.get((source, target), (0, 0))
        merged[(source, target)] = (
            count + record.count,
            ambiguous + (record.count if record.ambiguous else 0),
        )
    edges = [
        AggregatedEdge(source, target, count, ambiguous)
        for (source, target), (count, ambiguous) in merged.items()
    ]
    edges.sort(key=lambda e: (element_sort_key(e.source), element_sort_key(e.target)))
    return edges
