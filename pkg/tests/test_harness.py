"""Tests for the test-execution harness.

Parser behavior is pinned against hand-written outputs and reports.
Live-run tests use a tiny scripted project whose runner echoes
verdicts from a data file, so mutants can flip outcomes by patching
that file.
"""
from __future__ import annotations

import json
import sys
import textwrap
from pathlib import Path

import pytest

from mimicry import harness, mutation
from mimicry.errors import CloneDirty, ConfigInvalid, FileMissing, ParserFailure
from mimicry.harness import (
    PER_TEST_TIMEOUT_ENV,
    WHOLE_RUN,
    ProjectConfig,
    RunRecord,
    apply_mutant,
    clone_tree,
    failing_set,
    file_sha256,
    parse_junit_dir,
    parse_junit_file,
    parse_regex_output,
    read_results,
    run_baseline,
    run_many,
    run_one,
    run_tests,
    write_results,
)

# ---------------------------------------------------------------- regex parser


def test_regex_parser_basic_statuses():
    text = "\n".join(
        [
            "TEST t_a PASS",
            "TEST t_b FAIL",
            "TEST t_c ERROR",
            "TEST t_d TIMEOUT",
            "TEST t_e OK",
        ]
    )
    out = parse_regex_output(text, r"TEST (t_\w+)")
    assert out == {
        "t_a": "pass",
        "t_b": "fail",
        "t_c": "error",
        "t_d": "timeout",
        "t_e": "pass",
    }


def test_regex_parser_keyword_priority():
    # TIMEOUT beats ERROR beats FAIL beats PASS when several appear.
    cases = [
        ("TEST t_x TIMEOUT ERROR FAIL PASS", "timeout"),
        ("TEST t_x ERROR FAIL PASS", "error"),
        ("TEST t_x FAIL PASS", "fail"),
        ("TEST t_x PASS", "pass"),
    ]
    for line, expected in cases:
        assert parse_regex_output(line, r"TEST (t_\w+)")["t_x"] == expected


def test_regex_parser_ignores_keywords_inside_test_id():
    # The id itself is cut out before keywords are searched, so an id
    # that happens to contain PASS does not count as passing.
    out = parse_regex_output("TEST PASS_check", r"TEST (\S+)")
    assert out == {"PASS_check": "fail"}


def test_regex_parser_matched_line_without_keyword_is_fail():
    out = parse_regex_output("TEST t_odd exploded?", r"TEST (t_\w+)")
    assert out == {"t_odd": "fail"}


def test_regex_parser_later_lines_override():
    text = "TEST t_a FAIL\nTEST t_a PASS\nTEST t_b PASS\nTEST t_b TIMEOUT"
    out = parse_regex_output(text, r"TEST (t_\w+)")
    assert out == {"t_a": "pass", "t_b": "timeout"}


def test_regex_parser_skips_non_matching_lines():
    text = "building...\nTEST t_a PASS\ndone in 3s"
    assert parse_regex_output(text, r"TEST (t_\w+)") == {"t_a": "pass"}


@pytest.mark.parametrize(
    "pattern",
    [
        "TEST [",  # does not compile
        "TEST t_1",  # zero groups
        r"(TEST) (t_\w+)",  # two groups
    ],
)
def test_regex_parser_rejects_bad_patterns(pattern):
    with pytest.raises(ParserFailure):
        parse_regex_output("TEST t_1 PASS", pattern)


# ---------------------------------------------------------------- junit parser


def _write_junit(path: Path, body: str) -> Path:
    path.write_text(
        f'<?xml version="1.0"?>\n<testsuite name="s">\n{body}\n</testsuite>\n',
        encoding="utf-8",
    )
    return path


def test_junit_ids_and_statuses(tmp_path):
    report = _write_junit(
        tmp_path / "TEST-app.xml",
        textwrap.dedent(
            """\
            <testcase classname="pkg.AppTest" name="roundTrip"/>
            <testcase classname="pkg.AppTest" name="rejects">
              <failure message="boom"/>
            </testcase>
            <testcase name="bareName">
              <error type="NPE"/>
            </testcase>
            """
        ),
    )
    out = parse_junit_file(report)
    assert out == {
        "pkg.AppTest#roundTrip": "pass",
        "pkg.AppTest#rejects": "fail",
        "bareName": "error",
    }


def test_junit_skipped_cases_are_excluded(tmp_path):
    report = _write_junit(
        tmp_path / "TEST-a.xml",
        '<testcase name="t_run"/>\n<testcase name="t_skip"><skipped/></testcase>',
    )
    assert parse_junit_file(report) == {"t_run": "pass"}


def test_junit_slow_case_becomes_timeout(tmp_path):
    report = _write_junit(
        tmp_path / "TEST-a.xml",
        '<testcase name="t_slow" time="2.5"/>\n<testcase name="t_fast" time="0.4"/>',
    )
    assert parse_junit_file(report, per_test_timeout_s=1.0) == {
        "t_slow": "timeout",
        "t_fast": "pass",
    }
    # Without a budget the time attribute is ignored.
    assert parse_junit_file(report) == {"t_slow": "pass", "t_fast": "pass"}


def test_junit_parse_failures(tmp_path):
    broken = tmp_path / "TEST-broken.xml"
    broken.write_text("<testsuite><testcase", encoding="utf-8")
    with pytest.raises(ParserFailure):
        parse_junit_file(broken)

    nameless = _write_junit(tmp_path / "TEST-nameless.xml", "<testcase/>")
    with pytest.raises(ParserFailure):
        parse_junit_file(nameless)

    bad_time = _write_junit(
        tmp_path / "TEST-badtime.xml", '<testcase name="t" time="fast"/>'
    )
    with pytest.raises(ParserFailure):
        parse_junit_file(bad_time, per_test_timeout_s=1.0)


def test_junit_dir_merges_all_reports(tmp_path):
    _write_junit(tmp_path / "TEST-a.xml", '<testcase name="t_a"/>')
    _write_junit(tmp_path / "TEST-b.xml", '<testcase name="t_b"><failure/></testcase>')
    out = parse_junit_dir(tmp_path, "TEST-*.xml")
    assert out == {"t_a": "pass", "t_b": "fail"}


def test_junit_dir_requires_at_least_one_report(tmp_path):
    with pytest.raises(ParserFailure):
        parse_junit_dir(tmp_path, "TEST-*.xml")


# --------------------------------------------------------------- ProjectConfig


def _cfg(**kw) -> ProjectConfig:
    base = dict(
        name="demo",
        root="/tmp/demo",
        test_command=("true",),
        parser="regex",
        regex=r"TEST (t_\w+)",
    )
    base.update(kw)
    return ProjectConfig(**base)


@pytest.mark.parametrize(
    "kw",
    [
        {"name": ""},
        {"test_command": ()},
        {"parser": "tap"},
        {"regex": None},
        {"run_timeout_s": 0.0},
        {"per_test_timeout_s": -1.0},
    ],
)
def test_project_config_validation(kw):
    with pytest.raises(ConfigInvalid):
        _cfg(**kw)


def test_project_config_from_json_defaults():
    cfg = ProjectConfig.from_json(
        {
            "name": "demo",
            "root": "/tmp/demo",
            "test_command": ["pytest", "-q"],
            "parser": "junit-xml",
        }
    )
    assert cfg.test_command == ("pytest", "-q")
    assert cfg.junit_glob == "**/TEST-*.xml"
    assert cfg.pov_tests == ()
    assert cfg.run_timeout_s == 300.0
    assert cfg.per_test_timeout_s is None
    assert dict(cfg.env) == {}


def test_project_config_from_json_missing_field():
    with pytest.raises(ConfigInvalid):
        ProjectConfig.from_json({"name": "demo", "parser": "junit-xml"})


# --------------------------------------------------------------- clone + patch


def test_clone_tree_excludes_vcs_dirs(tmp_path):
    src = tmp_path / "src_tree"
    for vcs in (".git", ".hg", ".svn"):
        (src / vcs).mkdir(parents=True)
        (src / vcs / "junk").write_text("x", encoding="utf-8")
    (src / "code").mkdir()
    (src / "code" / "a.txt").write_text("hello", encoding="utf-8")

    clone = clone_tree(src, tmp_path / "clone")
    assert (clone / "code" / "a.txt").read_text(encoding="utf-8") == "hello"
    for vcs in (".git", ".hg", ".svn"):
        assert not (clone / vcs).exists()


def test_clone_tree_missing_source(tmp_path):
    with pytest.raises(FileMissing):
        clone_tree(tmp_path / "nope", tmp_path / "clone")


def test_clone_tree_refuses_existing_destination(tmp_path):
    src = tmp_path / "src_tree"
    src.mkdir()
    dst = tmp_path / "clone"
    dst.mkdir()
    with pytest.raises(FileExistsError):
        clone_tree(src, dst)


def _dummy_mutant(relpath: str, original: bytes, patched: str, mid="m_1") -> mutation.Mutant:
    import hashlib

    site = mutation.MaskSite(
        token_index=0,
        site_kind=mutation.LITERAL_SITE,
        original="x",
        statement_span=(0, 1),
    )
    return mutation.Mutant(
        id=mid,
        file=relpath,
        site=site,
        replacement="y",
        operator_tag="LiteralMutator",
        patched_source=patched,
        annotated_sequence=(),
        valid=True,
        original_sha256=hashlib.sha256(original).hexdigest(),
    )


def test_apply_mutant_patches_matching_file(tmp_path):
    clone = tmp_path / "clone"
    (clone / "src").mkdir(parents=True)
    (clone / "src" / "a.txt").write_bytes(b"before")
    m = _dummy_mutant("src/a.txt", b"before", "after")
    target = apply_mutant(clone, m)
    assert target.read_text(encoding="utf-8") == "after"


def test_apply_mutant_rejects_dirty_clone(tmp_path):
    clone = tmp_path / "clone"
    (clone / "src").mkdir(parents=True)
    (clone / "src" / "a.txt").write_bytes(b"tampered")
    m = _dummy_mutant("src/a.txt", b"before", "after")
    with pytest.raises(CloneDirty):
        apply_mutant(clone, m)


def test_apply_mutant_missing_file(tmp_path):
    clone = tmp_path / "clone"
    clone.mkdir()
    m = _dummy_mutant("src/a.txt", b"before", "after")
    with pytest.raises(FileMissing):
        apply_mutant(clone, m)


# ------------------------------------------------------------------- live runs
#
# The scripted project keeps its verdicts in checks.txt; the runner
# echoes one "TEST <id> <status>" line per entry. Patching checks.txt
# is how a mutant changes the outcome.

RUNNER = textwrap.dedent(
    """\
    import sys
    for line in open("checks.txt", encoding="utf-8"):
        line = line.strip()
        if line:
            name, status = line.split()
            print(f"TEST {name} {status}", flush=True)
    print("runner done", flush=True)
    """
)

CHECKS = "t_alpha PASS\nt_beta FAIL\nt_gamma PASS\n"


def make_checks_project(root: Path, **cfg_kw) -> ProjectConfig:
    root.mkdir(parents=True)
    (root / "runner.py").write_text(RUNNER, encoding="utf-8")
    (root / "checks.txt").write_text(CHECKS, encoding="utf-8")
    base = dict(
        name="checks",
        root=str(root),
        test_command=(sys.executable, "runner.py"),
        parser="regex",
        regex=r"TEST (t_\w+)",
        run_timeout_s=30.0,
    )
    base.update(cfg_kw)
    return ProjectConfig(**base)


def checks_mutant(root: Path, patched: str, mid="m_1") -> mutation.Mutant:
    return _dummy_mutant(
        "checks.txt", (root / "checks.txt").read_bytes(), patched, mid=mid
    )


def test_run_tests_parses_runner_output(tmp_path):
    cfg = make_checks_project(tmp_path / "proj")
    clone = clone_tree(cfg.root, tmp_path / "clone")
    run = run_tests(clone, cfg)
    assert run.outcomes == {"t_alpha": "pass", "t_beta": "fail", "t_gamma": "pass"}
    assert not run.timed_out
    assert run.duration_s >= 0.0
    assert "runner done" in run.stdout


def test_run_tests_exports_env_and_per_test_budget(tmp_path):
    runner = textwrap.dedent(
        """\
        import os
        ok = (
            os.environ.get("CHECKS_FLAVOR") == "spicy"
            and os.environ.get("MIMICRY_PER_TEST_TIMEOUT_S") == "2.5"
        )
        print("TEST t_env", "PASS" if ok else "FAIL")
        """
    )
    root = tmp_path / "proj"
    root.mkdir()
    (root / "runner.py").write_text(runner, encoding="utf-8")
    cfg = ProjectConfig(
        name="envcheck",
        root=str(root),
        test_command=(sys.executable, "runner.py"),
        parser="regex",
        regex=r"TEST (t_\w+)",
        per_test_timeout_s=2.5,
        env={"CHECKS_FLAVOR": "spicy"},
    )
    run = run_tests(clone_tree(cfg.root, tmp_path / "clone"), cfg)
    assert run.outcomes == {"t_env": "pass"}
    assert PER_TEST_TIMEOUT_ENV == "MIMICRY_PER_TEST_TIMEOUT_S"


def test_run_tests_whole_run_timeout_keeps_partial_results(tmp_path):
    runner = textwrap.dedent(
        """\
        import time
        print("TEST t_quick PASS", flush=True)
        time.sleep(60)
        print("TEST t_late PASS", flush=True)
        """
    )
    root = tmp_path / "proj"
    root.mkdir()
    (root / "runner.py").write_text(runner, encoding="utf-8")
    cfg = ProjectConfig(
        name="sleeper",
        root=str(root),
        test_command=(sys.executable, "runner.py"),
        parser="regex",
        regex=r"TEST (t_\w+)",
        run_timeout_s=1.5,
    )
    run = run_tests(clone_tree(cfg.root, tmp_path / "clone"), cfg)
    assert run.timed_out
    assert run.outcomes[WHOLE_RUN] == "timeout"
    assert run.outcomes.get("t_quick") == "pass"
    assert "t_late" not in run.outcomes
    assert WHOLE_RUN in failing_set(run.outcomes)


def test_failing_set_is_everything_but_pass():
    outcomes = {"a": "pass", "b": "fail", "c": "error", "d": "timeout"}
    assert failing_set(outcomes) == frozenset({"b", "c", "d"})
    assert failing_set({}) == frozenset()


def test_run_baseline_uses_reserved_clone_name(tmp_path):
    cfg = make_checks_project(tmp_path / "proj")
    work = tmp_path / "work"
    work.mkdir()
    run = run_baseline(cfg, work)
    assert (work / "__baseline__" / "checks.txt").is_file()
    assert failing_set(run.outcomes) == frozenset({"t_beta"})


def test_run_one_applies_mutant_before_running(tmp_path):
    root = tmp_path / "proj"
    cfg = make_checks_project(root)
    m = checks_mutant(root, "t_alpha FAIL\nt_beta PASS\nt_gamma PASS\n")
    rec = run_one(cfg, m, tmp_path / "work")
    assert rec.mutant_id == "m_1"
    assert rec.project == "checks"
    assert rec.outcomes == {"t_alpha": "fail", "t_beta": "pass", "t_gamma": "pass"}
    assert not rec.timed_out
    # The clone, not the original tree, was patched.
    assert (root / "checks.txt").read_text(encoding="utf-8") == CHECKS


def test_run_many_sorts_by_mutant_id(tmp_path):
    root = tmp_path / "proj"
    cfg = make_checks_project(root)
    mutants = [
        checks_mutant(root, "t_alpha FAIL\n", mid="m_c"),
        checks_mutant(root, "t_alpha ERROR\n", mid="m_a"),
        checks_mutant(root, "t_alpha TIMEOUT\n", mid="m_b"),
    ]
    records = run_many(cfg, mutants, tmp_path / "work")
    assert [r.mutant_id for r in records] == ["m_a", "m_b", "m_c"]
    assert [r.outcomes["t_alpha"] for r in records] == ["error", "timeout", "fail"]


def test_run_many_parallel_matches_serial(tmp_path):
    root = tmp_path / "proj"
    cfg = make_checks_project(root)

    def batch():
        return [
            checks_mutant(root, "t_alpha FAIL\n", mid="m_2"),
            checks_mutant(root, "t_alpha PASS\n", mid="m_1"),
        ]

    serial = run_many(cfg, batch(), tmp_path / "work1", jobs=1)
    parallel = run_many(cfg, batch(), tmp_path / "work2", jobs=2)
    assert [r.to_json() for r in serial] == [r.to_json() for r in parallel]


# ------------------------------------------------------------------ record I/O


def test_run_record_json_round_trip():
    rec = RunRecord(
        mutant_id="m_1",
        project="demo",
        outcomes={"t_b": "fail", "t_a": "pass"},
        timed_out=False,
    )
    obj = rec.to_json()
    # Only the stable identity of the run is serialized; wall-clock
    # duration would break byte-identical reruns.
    assert set(obj) == {"mutant_id", "project", "outcomes", "timed_out"}
    assert list(obj["outcomes"]) == ["t_a", "t_b"]
    assert RunRecord.from_json(obj) == rec
    assert RunRecord.from_json(json.loads(json.dumps(obj))) == rec


def test_write_read_results_round_trip(tmp_path):
    records = [
        RunRecord("m_2", "demo", {"t_a": "fail"}, False),
        RunRecord("m_1", "demo", {"t_a": "pass"}, True),
    ]
    path = tmp_path / "results.jsonl"
    write_results(path, records)
    back = read_results(path)
    assert back == sorted(records, key=lambda r: r.mutant_id)

    first = path.read_bytes()
    write_results(path, reversed(records))
    assert path.read_bytes() == first


def test_file_sha256_matches_hashlib(tmp_path):
    import hashlib

    p = tmp_path / "blob.bin"
    p.write_bytes(b"\x00\x01binary\n")
    assert file_sha256(p) == hashlib.sha256(b"\x00\x01binary\n").hexdigest()
