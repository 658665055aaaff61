"""Acceptance suite: ten checks, one printed pass/fail line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as
they print; without -s the verdict per criterion is still visible in
the verbose test listing.
"""

import itertools
import json
import math
import random
import time

from filesafe import (
    Bounds,
    Mode,
    ReadMode,
    Safe,
    Unsafe,
    embed_trace,
    enumerate_interleavings,
    explore,
    initial_config,
    load_fs_spec,
    normal_form_traces,
    oracle_explore,
    parse_program,
    reachable_normal_forms,
    run_single,
    step,
    validate_trace,
)
from filesafe.cli import main
from filesafe.machine import FileStore, env_get, is_final
from filesafe.syntax import IntLit

from conftest import CORPUS, corpus_case, corpus_cases, fired_rules
from generators import random_program, random_safe_config

ALL_RULES = {
    "lookup", "op-freeze-left", "op-freeze-right", "op-apply",
    "and-desugar", "or-desugar", "assign-freeze", "assign-apply",
    "if-freeze", "if-true", "if-false", "while-unroll",
    "open", "close", "read-nd", "read-at",
    "seq", "fork", "forkfor", "forkif", "skip",
}

PROTOCOL_ERRORS = ("open_twice", "close_twice", "close_unopened", "read_closed")


def _report(num: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {num:02d}: {detail}"
    print(line, flush=True)
    assert ok, line


def test_criterion_01_every_rule_fires_on_the_corpus():
    started = time.perf_counter()
    fired: set[str] = set()
    for case in CORPUS:
        fired |= fired_rules(case.config(), case.bounds(), read_mode=case.read_mode)
    elapsed = time.perf_counter() - started
    missing = ALL_RULES - fired
    ok = not missing and elapsed < 10.0
    _report(1, ok, f"all {len(ALL_RULES)} rules fired in {elapsed:.2f}s"
            + (f" (missing: {sorted(missing)})" if missing else ""))


def test_criterion_02_protocol_errors_unsafe_with_minimal_witnesses():
    problems = []
    for name in PROTOCOL_ERRORS:
        case = corpus_case(name)
        graph = explore(case.config(), case.bounds())
        tree = oracle_explore(case.config(), case.bounds())
        if not (isinstance(graph, Unsafe) and isinstance(tree, Unsafe)):
            problems.append(f"{name} not unsafe")
            continue
        validate_trace(graph.witness, case.bounds())
        if is_final(graph.witness.last) or step(graph.witness.last, case.bounds()):
            problems.append(f"{name} witness does not end stuck")
        if len(graph.witness.steps) != len(tree.witness.steps):
            problems.append(f"{name} witness not minimal")
    case = corpus_case("forkfor_pointer")
    for k in (1, 2, 3):
        if not isinstance(explore(case.config(), Bounds(forkfor_max=k)), Safe):
            problems.append(f"replicated reader not safe at bound {k}")
    ok = not problems
    _report(2, ok, "4 protocol errors give minimal replayable witnesses; "
            "replicated reader safe at bounds 1..3"
            + (f" ({'; '.join(problems)})" if problems else ""))


def test_criterion_03_interleavings_reach_distinct_published_positions():
    case = corpus_case("forkfor_pointer")
    finals = reachable_normal_forms(case.config(), Bounds(forkfor_max=3))
    ys = {env_get(c, "y") for c in finals} - {None}
    ok = len(ys) >= 2
    _report(3, ok, f"published positions across interleavings: {sorted(ys)}")


def test_criterion_04_positioned_fork_free_configs_are_deterministic():
    rng = random.Random(41)
    bounds = Bounds(forkfor_max=2)
    worst = 0
    for _ in range(1000):
        worst = max(worst, len(step(random_safe_config(rng), bounds)))
    ok = worst <= 1
    _report(4, ok, f"1000 random configurations, at most {worst} successor each")


def test_criterion_05_safe_positioned_traces_embed_into_the_relaxed_program():
    from filesafe import relax_program

    total = embedded_fine = 0
    for case in corpus_cases(mode=Mode.SAFE, verdict="safe"):
        relaxed = relax_program(case.program())
        for trace in normal_form_traces(case.config(), case.bounds()):
            total += 1
            embedded = embed_trace(trace, relaxed)
            validate_trace(embedded, Bounds(forkfor_max=2), read_mode=ReadMode.ORACLE)
            if embedded.outcome == "final" and is_final(embedded.last):
                embedded_fine += 1
    ok = total > 0 and embedded_fine == total
    _report(5, ok, f"{embedded_fine}/{total} final traces embed as valid position-free runs")


def test_criterion_06_positioned_corpus_is_always_decided():
    started = time.perf_counter()
    bounds_kw = dict(max_steps_per_path=10_000, max_states=1_000_000)
    undecided = []
    for case in corpus_cases(mode=Mode.SAFE):
        verdict = explore(case.config(), case.bounds(**bounds_kw))
        if not isinstance(verdict, (Safe, Unsafe)):
            undecided.append(case.name)
    elapsed = time.perf_counter() - started
    ok = not undecided and elapsed < 60.0
    _report(6, ok, f"{len(corpus_cases(mode=Mode.SAFE))} positioned programs "
            f"all decided in {elapsed:.2f}s"
            + (f" (undecided: {undecided})" if undecided else ""))


def test_criterion_07_graph_and_tree_searches_agree():
    rng = random.Random(20260823)
    bounds = Bounds(forkfor_max=2)
    disagreements = 0
    checked = 0
    for case in CORPUS:
        graph = explore(case.config(), case.bounds(), read_mode=case.read_mode)
        tree = oracle_explore(case.config(), case.bounds(), read_mode=case.read_mode)
        checked += 1
        disagreements += type(graph) is not type(tree)
    for _ in range(500):
        mode = rng.choice((Mode.WHILEF, Mode.SAFE))
        read_mode = (
            ReadMode.ORACLE
            if mode is Mode.WHILEF and rng.random() < 0.4
            else ReadMode.CURSOR
        )
        program = random_program(rng, mode)
        store = FileStore.of(
            {f: tuple(rng.randrange(0, 9) for _ in range(rng.randrange(0, 4)))
             for f in program.files}
        )
        status = {f: rng.choice("oc") for f in program.files}
        c0 = initial_config(program, store, status)
        checked += 1
        disagreements += type(explore(c0, bounds, read_mode=read_mode)) is not type(
            oracle_explore(c0, bounds, read_mode=read_mode)
        )
    ok = disagreements == 0
    _report(7, ok, f"{checked} programs, {disagreements} verdict disagreements")


def test_criterion_08_interleaving_counts_match_the_multinomial():
    mismatches = []
    shapes = 0
    for total in range(1, 9):
        for cuts in range(2 ** (total - 1)):
            sizes, run = [], 1
            for bit in range(total - 1):
                if cuts >> bit & 1:
                    sizes.append(run)
                    run = 1
                else:
                    run += 1
            sizes.append(run)
            shapes += 1
            branches = [
                [IntLit(100 * i + j) for j in range(n)] for i, n in enumerate(sizes)
            ]
            got = len(enumerate_interleavings(branches))
            want = math.factorial(sum(sizes)) // math.prod(
                math.factorial(n) for n in sizes
            )
            if got != want:
                mismatches.append((tuple(sizes), got, want))
    ok = not mismatches
    _report(8, ok, f"{shapes} branch shapes up to 8 atoms"
            + (f" (first mismatch: {mismatches[0]})" if mismatches else ""))


def test_criterion_09_oracle_reads_find_the_failing_position_exactly_when_it_exists():
    source = corpus_case("oracle_predicate").path.read_text()
    program = parse_program(source, Mode.WHILEF)
    wrong = []
    for length in range(5):
        store = FileStore.of({"f": tuple(range(100, 100 + length))})
        c0 = initial_config(program, store, {"f": "c"})
        verdict = explore(c0, Bounds(forkfor_max=2), read_mode=ReadMode.ORACLE)
        tree = oracle_explore(c0, Bounds(forkfor_max=2), read_mode=ReadMode.ORACLE)
        # a read may observe any position 0..length; the guard demands <= 2
        expected_unsafe = any(n > 2 for n in range(length + 1))
        if isinstance(verdict, Unsafe) != expected_unsafe or type(verdict) is not type(tree):
            wrong.append(length)
    ok = not wrong
    _report(9, ok, "file lengths 0..4 match the by-hand enumeration"
            + (f" (wrong at: {wrong})" if wrong else ""))


def test_criterion_10_check_reports_are_reproducible(tmp_path):
    case = corpus_case("forkfor_pointer")
    docs = []
    for tag in ("a", "b"):
        out = tmp_path / f"{tag}.json"
        code = main([
            "check", str(case.path), "--mode", "whilef",
            "--fs", str(case.fs_path), "--json", str(out),
        ])
        assert code == 0
        doc = json.loads(out.read_text())
        doc["wall_time_ms"] = 0.0
        docs.append(json.dumps(doc, sort_keys=False))
    ok = docs[0] == docs[1]
    _report(10, ok, "same program, same flags: byte-identical reports "
            "(wall time aside)")
