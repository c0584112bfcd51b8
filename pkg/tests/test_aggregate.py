"""Granularity lifting: merging, self-edge suppression, conservation laws."""
import pytest

from depminer.aggregate import lift, lift_element, merge_token_records
from depminer.frontend import default_registry
from depminer.model import (
    CodeElement,
    DependencyRecord,
    Granularity,
    LocationMarker,
    TypeSignature,
)

REGISTRY = default_registry()
PY = REGISTRY.get("python-subset")

SOURCES = {
    "src/a.py": (
        "def alpha():\n"
        "    value = beta()\n"
        "    return value\n"
        "\n"
        "\n"
        "def beta():\n"
        "    return 1\n"
    ),
    "src/b.py": "from src.a import alpha\n\nresult = alpha()\n",
    "lib/c.py": "class Tool:\n    def run(self):\n        return alpha()\n",
}

TREES = {path: PY.parse_file(path, text) for path, text in SOURCES.items()}


def trees(path):
    return TREES[path]


def usage(path, line, name, kind="call-usage"):
    return CodeElement(
        LocationMarker(path, line, line), TypeSignature("python-subset", kind), name
    )


def decl(path, start, end, name, kind="function-declaration"):
    return CodeElement(
        LocationMarker(path, start, end), TypeSignature("python-subset", kind), name
    )


ALPHA = decl("src/a.py", 1, 3, "alpha")
BETA = decl("src/a.py", 6, 7, "beta")


class TestLiftElement:
    def test_function_container(self):
        lifted = lift_element(usage("src/a.py", 2, "beta"), Granularity.FUNCTION, trees, REGISTRY)
        assert (lifted.signature.kind, lifted.identifier) == ("function-declaration", "alpha")

    def test_file_container(self):
        lifted = lift_element(usage("src/a.py", 2, "beta"), Granularity.FILE, trees, REGISTRY)
        assert lifted.signature.kind == "file"
        assert lifted.location.path == "src/a.py"

    def test_directory_container(self):
        lifted = lift_element(usage("src/a.py", 2, "beta"), Granularity.DIRECTORY, trees, REGISTRY)
        assert lifted.signature.kind == "directory"
        assert lifted.location == LocationMarker("src", 1, 0)

    def test_root_directory_is_dot(self):
        element = usage("top.py", 1, "x")
        lifted = lift_element(element, Granularity.DIRECTORY, trees_none_ok, REGISTRY)
        assert lifted.location.path == "."

    def test_missing_tree_is_fatal(self):
        with pytest.raises(RuntimeError):
            lift_element(usage("ghost.py", 1, "x"), Granularity.FILE, trees_none_ok, REGISTRY)


def trees_none_ok(path):
    return TREES.get(path)


class TestMergeTokenRecords:
    def test_duplicates_merge_into_count(self):
        record = DependencyRecord(usage("src/b.py", 3, "alpha"), ALPHA)
        merged = merge_token_records([record, record])
        assert len(merged) == 1
        assert merged[0].count == 2

    def test_ambiguous_flag_survives_merge(self):
        plain = DependencyRecord(usage("src/b.py", 3, "alpha"), ALPHA)
        flagged = DependencyRecord(usage("src/b.py", 3, "alpha"), ALPHA, ambiguous=True)
        merged = merge_token_records([plain, flagged])
        assert merged[0].ambiguous is True
        assert merged[0].count == 2


class TestLift:
    def test_file_edge(self):
        record = DependencyRecord(usage("src/b.py", 3, "alpha"), ALPHA)
        edges = lift([record], Granularity.FILE, trees, REGISTRY)
        assert len(edges) == 1
        edge = edges[0]
        assert edge.source.location.path == "src/b.py"
        assert edge.target.location.path == "src/a.py"
        assert edge.count == 1

    def test_intra_function_self_edge_dropped(self):
        local = decl("src/a.py", 2, 2, "value", "variable-declaration")
        record = DependencyRecord(usage("src/a.py", 3, "value", "name-usage"), local)
        assert lift([record], Granularity.FUNCTION, trees, REGISTRY) == []

    def test_two_records_one_edge_count_two(self):
        records = [
            DependencyRecord(usage("src/a.py", 2, "beta"), BETA),
            DependencyRecord(usage("src/a.py", 2, "beta"), BETA),
        ]
        edges = lift(records, Granularity.FUNCTION, trees, REGISTRY)
        assert len(edges) == 1
        assert edges[0].count == 2
        assert (edges[0].source.identifier, edges[0].target.identifier) == ("alpha", "beta")

    def test_ambiguous_count(self):
        records = [
            DependencyRecord(usage("src/b.py", 3, "alpha"), ALPHA, ambiguous=True),
            DependencyRecord(usage("src/b.py", 3, "alpha"), ALPHA),
        ]
        edges = lift(records, Granularity.FILE, trees, REGISTRY)
        assert edges[0].count == 2
        assert edges[0].ambiguous_count == 1

    def test_token_granularity_rejected(self):
        with pytest.raises(ValueError):
            lift([], Granularity.TOKEN, trees, REGISTRY)

    def test_directory_granularity(self):
        records = [
            DependencyRecord(usage("src/b.py", 3, "alpha"), ALPHA),  # same dir: drop
            DependencyRecord(usage("lib/c.py", 3, "alpha"), ALPHA),
        ]
        edges = lift(records, Granularity.DIRECTORY, trees, REGISTRY)
        assert [(e.source.location.path, e.target.location.path) for e in edges] == [
            ("lib", "src")
        ]

    def test_witness_and_conservation_on_small_input(self):
        records = [
            DependencyRecord(usage("src/a.py", 2, "beta"), BETA),
            DependencyRecord(usage("src/b.py", 3, "alpha"), ALPHA),
            DependencyRecord(usage("lib/c.py", 3, "alpha"), ALPHA),
            DependencyRecord(
                usage("src/a.py", 3, "value", "name-usage"),
                decl("src/a.py", 2, 2, "value", "variable-declaration"),
            ),
        ]
        for granularity in (Granularity.FUNCTION, Granularity.CLASS, Granularity.FILE, Granularity.DIRECTORY):
            edges = lift(records, granularity, trees, REGISTRY)
            lifted_pairs = [
                (
                    lift_element(r.source, granularity, trees, REGISTRY),
                    lift_element(r.target, granularity, trees, REGISTRY),
                )
                for r in records
            ]
            suppressed = sum(1 for s, t in lifted_pairs if s == t)
            assert sum(e.count for e in edges) + suppressed == len(records)
            for edge in edges:
                assert (edge.source, edge.target) in lifted_pairs  # witness

    def test_idempotence_at_file_granularity(self):
        record = DependencyRecord(usage("src/b.py", 3, "alpha"), ALPHA)
        once = lift([record], Granularity.FILE, trees, REGISTRY)
        again_input = [
            DependencyRecord(e.source, e.target, e.count, e.ambiguous_count > 0)
            for e in once
        ]
        twice = lift(again_input, Granularity.FILE, trees, REGISTRY)
        assert [(e.source, e.target, e.count) for e in twice] == [
            (e.source, e.target, e.count) for e in once
        ]
