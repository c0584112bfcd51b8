"""Acceptance gate: one test per release criterion, each printing PASS/FAIL.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
status lines.
"""
import json
import random
import shutil
import time

import pytest

from conftest import FIXTURES, FIXTURE_NAMES, GRANULARITIES, run_cli
from oracle import (
    index_as_triples,
    oracle_occurrences,
    oracle_resolve,
    record_tuples,
    unresolved_tuples,
)

from depminer.aggregate import lift, lift_element
from depminer.frontend import default_registry
from depminer.index import build_index, deserialize_index, extract_occurrences, fingerprint, serialize_index
from depminer.model import (
    CodeElement,
    DependencyRecord,
    Granularity,
    LocationMarker,
    TypeSignature,
)
from depminer.resolver import resolve_project
from depminer.scope import AnalysisScope, DEFAULT_SCOPE


def fixture_root(name):
    return FIXTURES / name / "project"


def report(criterion, ok):
    print("\n%s: %s" % ("PASS" if ok else "FAIL", criterion))
    assert ok, criterion


def pipeline_run(name, scope=DEFAULT_SCOPE, workers=2):
    return resolve_project(fixture_root(name), scope, default_registry(), workers)


def test_criterion_1_oracle_equivalence():
    """resolve_project equals the brute-force no-index resolver on all fixtures."""
    started = time.monotonic()
    ok = True
    for name in FIXTURE_NAMES:
        outcome = pipeline_run(name)
        exp_records, exp_unresolved = oracle_resolve(
            fixture_root(name), default_registry(), DEFAULT_SCOPE
        )
        if record_tuples(outcome.records) != exp_records:
            ok = False
        if unresolved_tuples(outcome.unresolved) != exp_unresolved:
            ok = False
    elapsed = time.monotonic() - started
    report(
        "criterion 1: oracle equivalence on %d fixtures (%.2fs < 10s)"
        % (len(FIXTURE_NAMES), elapsed),
        ok and elapsed < 10.0,
    )


def test_criterion_2_index_completeness():
    """Index content equals a linear-scan oracle; build order is irrelevant."""
    registry = default_registry()
    ok = True
    for name in FIXTURE_NAMES:
        outcome = pipeline_run(name)
        entries = []
        expected = set()
        for rel in outcome.files:
            sem = outcome.project.semantics(rel)
            descriptor = registry.get(sem.language).descriptor
            occurrences = extract_occurrences(sem.tree, descriptor)
            entries.append((rel, fingerprint((fixture_root(name) / rel).read_bytes()), occurrences))
            for token, line, occ in oracle_occurrences(sem.tree, descriptor):
                expected.add((token, rel, line, occ))
        if index_as_triples(outcome.project.index) != expected:
            ok = False
        baseline = build_index(list(entries))
        for seed in range(3):
            shuffled = list(entries)
            random.Random(seed).shuffle(shuffled)
            if build_index(shuffled) != baseline:
                ok = False
        if serialize_index(baseline) != serialize_index(outcome.project.index):
            ok = False
    report("criterion 2: index completeness + shuffle invariance", ok)


def test_criterion_3_determinism(tmp_path):
    """--jobs 1 vs --jobs 8 produce byte-identical JSON and DOT, 5 runs each."""
    ok = True
    for name in FIXTURE_NAMES:
        outputs = set()
        for run in range(5):
            for jobs in ("1", "8"):
                out = tmp_path / ("%s_%s_%d.json" % (name, jobs, run))
                dot = tmp_path / ("%s_%s_%d.dot" % (name, jobs, run))
                code = run_cli(
                    [
                        "mine",
                        "project",
                        "--out",
                        str(out),
                        "--granularity",
                        "file",
                        "--emit-dot",
                        str(dot),
                        "--jobs",
                        jobs,
                    ],
                    cwd=FIXTURES / name,
                )
                if code != 0:
                    ok = False
                outputs.add(out.read_bytes() + b"|" + dot.read_bytes())
        if len(outputs) != 1:
            ok = False
    report("criterion 3: jobs=1 vs jobs=8 byte-identical across 5 runs", ok)


def _random_records(count, rng, registry):
    """Synthetic token records over a small generated source corpus."""
    frontend = registry.get("python-subset")
    sources = {}
    for i in range(6):
        directory = rng.choice(["", "alpha/", "beta/"])
        path = "%smod%d.py" % (directory, i)
        lines = []
        for j in range(rng.randint(4, 12)):
            roll = rng.random()
            if roll < 0.3:
                lines.append("def fn%d_%d():" % (i, j))
                lines.append("    v%d = %d" % (j, j))
            elif roll < 0.5:
                lines.append("class K%d_%d:" % (i, j))
                lines.append("    field = %d" % j)
            else:
                lines.append("g%d_%d = %d" % (i, j, j))
        sources[path] = "\n".join(lines) + "\n"
    trees = {p: frontend.parse_file(p, text) for p, text in sources.items()}
    paths = sorted(trees)

    def random_element(kind, name):
        path = rng.choice(paths)
        line = rng.randint(1, trees[path].root.span.end_line)
        return CodeElement(
            LocationMarker(path, line, line),
            TypeSignature("python-subset", kind),
            name,
        )

    records = []
    for _ in range(count):
        name = "sym%d" % rng.randint(0, 20)
        records.append(
            DependencyRecord(
                random_element("name-usage", name),
                random_element("variable-declaration", name),
                count=1,
                ambiguous=rng.random() < 0.2,
            )
        )
    return records, trees


def test_criterion_4_aggregation_laws():
    """Witness and count-conservation laws on >= 500 random token records."""
    registry = default_registry()
    rng = random.Random(20240817)
    records, tree_map = _random_records(500, rng, registry)
    provider = tree_map.__getitem__
    ok = True
    for granularity in (
        Granularity.FUNCTION,
        Granularity.CLASS,
        Granularity.FILE,
        Granularity.DIRECTORY,
    ):
        edges = lift(records, granularity, provider, registry)
        lifted = [
            (
                lift_element(r.source, granularity, provider, registry),
                lift_element(r.target, granularity, provider, registry),
            )
            for r in records
        ]
        suppressed = sum(1 for s, t in lifted if s == t)
        if sum(e.count for e in edges) + suppressed != len(records):
            ok = False
        pair_set = {(s, t) for s, t in lifted}
        for edge in edges:
            if (edge.source, edge.target) not in pair_set:
                ok = False
        if len(edges) > len(records):
            ok = False
    report("criterion 4: aggregation laws on 500 random records", ok)


def test_criterion_5_binary_round_trip():
    """serialize -> deserialize -> serialize is byte-stable; errors distinct."""
    from depminer.index import CorruptIndexError, NotAnIndexError

    ok = True
    for name in FIXTURE_NAMES:
        outcome = pipeline_run(name)
        data = serialize_index(outcome.project.index)
        restored = deserialize_index(data)
        if serialize_index(restored) != data or restored != outcome.project.index:
            ok = False
        try:
            deserialize_index(b"XXXX" + data[4:])
            ok = False
        except NotAnIndexError:
            pass
        except Exception:
            ok = False
        try:
            deserialize_index(data[: len(data) - 2])
            ok = False
        except CorruptIndexError:
            pass
        except Exception:
            ok = False
    report("criterion 5: binary index round-trip + distinct errors", ok)


def _pair_set(records):
    return {
        (
            r.source.location.path,
            r.source.location.start_line,
            r.source.identifier,
            r.target.location.path,
            r.target.location.start_line,
            r.target.identifier,
        )
        for r in records
    }


def test_criterion_6_scope_enforcement():
    """Adversarial scopes never leak excluded paths/lines; monotonicity holds."""
    ok = True
    adversarial = {
        "py_imports": AnalysisScope(exclude=("pkg/**",)),
        "java_basic": AnalysisScope(exclude=("**/*.java",)),
        "py_shadow": AnalysisScope(exclude_lines=(("main.py", 1, 3),)),
        "mixed_src": AnalysisScope(exclude=("deep/**",), exclude_lines=(("use_log.py", 1, 1),)),
    }
    for name, scope in adversarial.items():
        outcome = pipeline_run(name, scope)
        for record in outcome.records:
            for end in (record.source, record.target):
                loc = end.location
                if not scope.includes_path(loc.path):
                    ok = False
                if scope.lines_excluded(loc.path, loc.start_line, loc.end_line):
                    ok = False
        for entry in outcome.unresolved:
            loc = entry.element.location
            if not scope.includes_path(loc.path) or scope.lines_excluded(
                loc.path, loc.start_line, loc.end_line
            ):
                ok = False

    # monotonicity: adding excludes never adds (from, to) usage pairs
    rng = random.Random(7)
    exclude_pool = [
        "pkg/**",
        "deep/**",
        "**/*.java",
        "**/*.py",
        "a/**",
        "jobs/**",
        "v/**",
        "*.py",
    ]
    line_pool = [
        ("main.py", 1, 2),
        ("core.py", 1, 3),
        ("user.py", 2, 2),
        ("v/Flags.java", 6, 8),
    ]
    checked = 0
    for _ in range(20):
        name = rng.choice(FIXTURE_NAMES)
        base_excludes = tuple(
            rng.sample(exclude_pool, rng.randint(0, 2))
        )
        extra_excludes = tuple(rng.sample(exclude_pool, rng.randint(1, 2)))
        base_lines = tuple(rng.sample(line_pool, rng.randint(0, 1)))
        extra_lines = tuple(rng.sample(line_pool, rng.randint(0, 1)))
        wide = AnalysisScope(exclude=base_excludes, exclude_lines=base_lines)
        narrow = AnalysisScope(
            exclude=base_excludes + extra_excludes,
            exclude_lines=base_lines + extra_lines,
        )
        wide_pairs = _pair_set(pipeline_run(name, wide).records)
        narrow_pairs = _pair_set(pipeline_run(name, narrow).records)
        if not narrow_pairs <= wide_pairs:
            ok = False
        checked += 1
    report(
        "criterion 6: scope enforcement + monotonicity over %d scope pairs" % checked,
        ok,
    )


def test_criterion_7_batch_equals_singles(tmp_path):
    """Batch over all fixtures == single runs; bad entry keeps others alive."""
    ok = True
    entries = []
    for name in FIXTURE_NAMES:
        entries.append(
            {
                "root": str(fixture_root(name)),
                "out": str(tmp_path / ("batch_%s.json" % name)),
                "granularity": "function",
            }
        )
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps({"entries": entries}))
    if run_cli(["batch", str(manifest)]) != 0:
        ok = False
    for name in FIXTURE_NAMES:
        single = tmp_path / ("single_%s.json" % name)
        run_cli(
            [
                "mine",
                str(fixture_root(name)),
                "--out",
                str(single),
                "--granularity",
                "function",
            ]
        )
        if single.read_bytes() != (tmp_path / ("batch_%s.json" % name)).read_bytes():
            ok = False

    bad_entries = [
        {"root": str(tmp_path / "ghost"), "out": str(tmp_path / "bad.json")}
    ] + [
        {
            "root": str(fixture_root(name)),
            "out": str(tmp_path / ("second_%s.json" % name)),
        }
        for name in FIXTURE_NAMES[:2]
    ]
    bad_manifest = tmp_path / "bad_manifest.json"
    bad_manifest.write_text(json.dumps({"entries": bad_entries}))
    if run_cli(["batch", str(bad_manifest)]) != 2:
        ok = False
    if (tmp_path / "bad.json").exists():
        ok = False
    for name in FIXTURE_NAMES[:2]:
        if not (tmp_path / ("second_%s.json" % name)).exists():
            ok = False
    report("criterion 7: batch == singles + continue-on-failure", ok)


def test_criterion_8_golden_outputs(tmp_path):
    """Checked-in golden JSON/DOT per fixture and granularity match exactly."""
    started = time.monotonic()
    ok = True
    for name in FIXTURE_NAMES:
        for granularity in GRANULARITIES:
            out = tmp_path / ("%s_%s.json" % (name, granularity))
            code = run_cli(
                ["mine", "project", "--out", str(out), "--granularity", granularity],
                cwd=FIXTURES / name,
            )
            if code != 0:
                ok = False
                continue
            golden = FIXTURES / name / "golden" / ("%s.json" % granularity)
            if out.read_bytes() != golden.read_bytes():
                ok = False
        dot = tmp_path / ("%s.dot" % name)
        run_cli(
            [
                "mine",
                "project",
                "--out",
                str(tmp_path / ("%s_dot.json" % name)),
                "--granularity",
                "file",
                "--emit-dot",
                str(dot),
            ],
            cwd=FIXTURES / name,
        )
        if dot.read_bytes() != (FIXTURES / name / "golden" / "file.dot").read_bytes():
            ok = False
    elapsed = time.monotonic() - started
    report(
        "criterion 8: golden outputs byte-exact (%.2fs < 30s)" % elapsed,
        ok and elapsed < 30.0,
    )


def test_criterion_9_cache_correctness(tmp_path, capsys):
    """Cache reuse leaves output identical; touching one file reindexes it."""
    import hashlib

    ok = True
    root = tmp_path / "proj"
    shutil.copytree(fixture_root("py_imports"), root)
    # a usage that only the global index stage can satisfy, unresolved for now
    (root / "extra.py").write_text("probe = mystery()\n")
    cache = tmp_path / "cache"
    out1, out2, out3 = (tmp_path / ("o%d.json" % i) for i in (1, 2, 3))

    def mine(out):
        code = run_cli(
            ["mine", str(root), "--out", str(out), "--index-cache", str(cache)]
        )
        return code, capsys.readouterr().err

    code, err = mine(out1)
    if code != 0 or "index=built" not in err:
        ok = False
    code, err = mine(out2)
    if code != 0 or "index=cached" not in err:
        ok = False
    if out1.read_bytes() != out2.read_bytes():
        ok = False
    data = json.loads(out2.read_text())
    if not any(
        u["element"]["identifier"] == "mystery" for u in data["unresolved"]
    ):
        ok = False

    # touch one file: add a declaration the probe usage must now resolve to
    (root / "core.py").write_text(
        "def compute(value):\n"
        "    return value\n"
        "\n"
        "\n"
        "def helper():\n"
        "    return compute(1)\n"
        "\n"
        "\n"
        "def mystery():\n"
        "    return 0\n"
    )
    code, err = mine(out3)
    if code != 0 or "index=updated" not in err:
        ok = False
    data = json.loads(out3.read_text())
    resolved = {
        (d["from"]["identifier"], d["to"]["location"]["path"], d["to"]["location"]["startLine"])
        for d in data["dependencies"]
    }
    if ("mystery", "core.py", 9) not in resolved:
        ok = False  # stale postings would leave the probe unresolved

    # the updated on-disk cache must reproduce oracle-correct results
    digest = hashlib.sha1(root.resolve().as_posix().encode("utf-8")).hexdigest()
    outcome = resolve_project(
        root,
        DEFAULT_SCOPE,
        default_registry(),
        1,
        index_cache_path=cache / ("%s.idx" % digest),
    )
    if outcome.index_status != "cached":
        ok = False
    exp_records, exp_unresolved = oracle_resolve(root, default_registry(), DEFAULT_SCOPE)
    if record_tuples(outcome.records) != exp_records:
        ok = False
    if unresolved_tuples(outcome.unresolved) != exp_unresolved:
        ok = False
    report("criterion 9: cache reuse + single-file reindex correctness", ok)
