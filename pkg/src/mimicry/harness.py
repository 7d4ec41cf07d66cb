"""Runs a project's test suite against patched working copies.

Each mutant executes in its own clone of the project tree. Test
outcomes come from either JUnit XML reports or a line-oriented regex
over the runner's output. A test that times out counts as failing, and
a run that exceeds its whole-run budget is recorded as one synthetic
timeout outcome.
"""
from __future__ import annotations

import hashlib
import json
import os
import re
import shutil
import signal
import subprocess
import time
import xml.etree.ElementTree as ET
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import CloneDirty, ConfigInvalid, FileMissing, ParserFailure
from .mutation import Mutant

PASS = "pass"
FAIL = "fail"
ERROR = "error"
TIMEOUT = "timeout"

STATUSES = (PASS, FAIL, ERROR, TIMEOUT)

WHOLE_RUN = "__whole_run__"

_VCS_DIRS = {".git", ".hg", ".svn"}

JUNIT_PARSER = "junit-xml"
REGEX_PARSER = "regex"

PER_TEST_TIMEOUT_ENV = "MIMICRY_PER_TEST_TIMEOUT_S"


@dataclass(frozen=True)
class ProjectConfig:
    """How to execute and interpret one project's test suite."""

    name: str
    root: str
    test_command: tuple[str, ...]
    parser: str
    pov_tests: tuple[str, ...] = ()
    junit_glob: str = "**/TEST-*.xml"
    regex: str | None = None
    run_timeout_s: float = 300.0
    per_test_timeout_s: float | None = None
    env: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.name:
            raise ConfigInvalid("project name must be non-empty")
        if not self.test_command:
            raise ConfigInvalid(f"{self.name}: test_command must be non-empty")
        if self.parser not in (JUNIT_PARSER, REGEX_PARSER):
            raise ConfigInvalid(
                f"{self.name}: parser must be {JUNIT_PARSER!r} or {REGEX_PARSER!r},"
                f" got {self.parser!r}"
            )
        if self.parser == REGEX_PARSER and not self.regex:
            raise ConfigInvalid(f"{self.name}: regex parser requires a pattern")
        if self.run_timeout_s <= 0:
            raise ConfigInvalid(f"{self.name}: run_timeout_s must be positive")
        if self.per_test_timeout_s is not None and self.per_test_timeout_s <= 0:
            raise ConfigInvalid(f"{self.name}: per_test_timeout_s must be positive")

    @classmethod
    def from_json(cls, obj: dict) -> "ProjectConfig":
        try:
            return cls(
                name=obj["name"],
                root=obj["root"],
                test_command=tuple(obj["test_command"]),
                parser=obj["parser"],
                pov_tests=tuple(obj.get("pov_tests", ())),
                junit_glob=obj.get("junit_glob", "**/TEST-*.xml"),
                regex=obj.get("regex"),
                run_timeout_s=float(obj.get("run_timeout_s", 300.0)),
                per_test_timeout_s=(
                    float(obj["per_test_timeout_s"])
                    if obj.get("per_test_timeout_s") is not None
                    else None
                ),
                env=dict(obj.get("env", {})),
            )
        except KeyError as exc:
            raise ConfigInvalid(f"project config missing field {exc}") from exc


@dataclass(frozen=True)
class TestRun:
    outcomes: dict[str, str]
    duration_s: float
    timed_out: bool
    stdout: str = ""
    stderr: str = ""


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def clone_tree(src, dst) -> Path:
    """Copy the project tree, excluding VCS metadata. dst must not exist."""
    src = Path(src)
    dst = Path(dst)
    if not src.is_dir():
        raise FileMissing(f"project root not found: {src}")
    shutil.copytree(src, dst, ignore=shutil.ignore_patterns(*_VCS_DIRS))
    return dst


def apply_mutant(clone_dir, mutant: Mutant) -> Path:
    """Overwrite the mutant's file in the clone, refusing stale clones."""
    target = Path(clone_dir) / mutant.file
    if not target.is_file():
        raise FileMissing(f"{mutant.file} not present in clone {clone_dir}")
    current = hashlib.sha256(target.read_bytes()).hexdigest()
    if current != mutant.original_sha256:
        raise CloneDirty(
            f"{target} hash {current[:10]} != expected {mutant.original_sha256[:10]}"
        )
    target.write_text(mutant.patched_source, encoding="utf-8")
    return target


def parse_regex_output(text: str, pattern: str) -> dict[str, str]:
    """Line-oriented outcome extraction.

    The pattern must contain exactly one capture group: the test id.
    Status keywords are searched in the rest of the line, outside the
    captured id, in priority order TIMEOUT, ERROR, FAIL, then PASS/OK.
    A matched line with no keyword counts as a failure. Later lines
    override earlier ones for the same id.
    """
    try:
        rx = re.compile(pattern)
    except re.error as exc:
        raise ParserFailure(f"bad regex: {exc}") from exc
    if rx.groups != 1:
        raise ParserFailure(f"regex must have exactly 1 capture group, has {rx.groups}")
    outcomes: dict[str, str] = {}
    for line in text.splitlines():
        m = rx.search(line)
        if not m or m.group(1) is None:
            continue
        test_id = m.group(1)
        rest = line[: m.start(1)] + line[m.end(1):]
        if "TIMEOUT" in rest:
            status = TIMEOUT
        elif "ERROR" in rest:
            status = ERROR
        elif "FAIL" in rest:
            status = FAIL
        elif "PASS" in rest or "OK" in rest:
            status = PASS
        else:
            status = FAIL
        outcomes[test_id] = status
    return outcomes


def parse_junit_file(path, per_test_timeout_s: float | None = None) -> dict[str, str]:
    try:
        tree = ET.parse(path)
    except ET.ParseError as exc:
        raise ParserFailure(f"{path}: {exc}") from exc
    outcomes: dict[str, str] = {}
    for case in tree.getroot().iter("testcase"):
        name = case.get("name")
        if not name:
            raise ParserFailure(f"{path}: testcase without a name attribute")
        classname = case.get("classname")
        test_id = f"{classname}#{name}" if classname else name
        status = PASS
        for child in case:
            if child.tag == "failure":
                status = FAIL
            elif child.tag == "error":
                status = ERROR
            elif child.tag == "skipped":
                status = None
        if status is None:
            continue
        time_attr = case.get("time")
        if per_test_timeout_s is not None and time_attr is not None:
            try:
                if float(time_attr) > per_test_timeout_s:
                    status = TIMEOUT
            except ValueError as exc:
                raise ParserFailure(f"{path}: bad time attribute {time_attr!r}") from exc
        outcomes[test_id] = status
    return outcomes


def parse_junit_dir(
    clone_dir, glob: str, per_test_timeout_s: float | None = None
) -> dict[str, str]:
    paths = sorted(Path(clone_dir).glob(glob))
    if not paths:
        raise ParserFailure(f"no JUnit reports matching {glob!r} under {clone_dir}")
    outcomes: dict[str, str] = {}
    for p in paths:
        outcomes.update(parse_junit_file(p, per_test_timeout_s))
    return outcomes


def _run_command(cfg: ProjectConfig, cwd: Path) -> tuple[str, str, float, bool]:
    env = dict(os.environ)
    env.update(cfg.env)
    if cfg.per_test_timeout_s is not None:
        env[PER_TEST_TIMEOUT_ENV] = str(cfg.per_test_timeout_s)
    start = time.monotonic()
    proc = subprocess.Popen(
        list(cfg.test_command),
        cwd=str(cwd),
        env=env,
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        text=True,
        start_new_session=True,
    )
    timed_out = False
    try:
        stdout, stderr = proc.communicate(timeout=cfg.run_timeout_s)
    except subprocess.TimeoutExpired:
        timed_out = True
        try:
            os.killpg(proc.pid, signal.SIGKILL)
        except ProcessLookupError:
            pass
        stdout, stderr = proc.communicate()
    return stdout or "", stderr or "", time.monotonic() - start, timed_out


def run_tests(clone_dir, cfg: ProjectConfig) -> TestRun:
    clone = Path(clone_dir)
    stdout, stderr, duration, timed_out = _run_command(cfg, clone)
    outcomes: dict[str, str] = {}
    if timed_out:
        # Partial reports may exist; whatever parsed is kept, and the
        # run itself is recorded as a single timeout outcome.
        try:
            outcomes = _parse(clone, cfg, stdout, stderr)
        except ParserFailure:
            outcomes = {}
        outcomes[WHOLE_RUN] = TIMEOUT
    else:
        outcomes = _parse(clone, cfg, stdout, stderr)
    return TestRun(
        outcomes=outcomes,
        duration_s=duration,
        timed_out=timed_out,
        stdout=stdout,
        stderr=stderr,
    )


def _parse(clone: Path, cfg: ProjectConfig, stdout: str, stderr: str) -> dict[str, str]:
    if cfg.parser == JUNIT_PARSER:
        return parse_junit_dir(clone, cfg.junit_glob, cfg.per_test_timeout_s)
    assert cfg.regex is not None
    return parse_regex_output(stdout + "\n" + stderr, cfg.regex)


def failing_set(outcomes: Mapping[str, str]) -> frozenset[str]:
    """Everything that did not pass: failures, errors, and timeouts."""
    return frozenset(t for t, s in outcomes.items() if s != PASS)


@dataclass(frozen=True)
class RunRecord:
    mutant_id: str
    project: str
    outcomes: dict[str, str]
    timed_out: bool

    def to_json(self) -> dict:
        return {
            "mutant_id": self.mutant_id,
            "project": self.project,
            "outcomes": dict(sorted(self.outcomes.items())),
            "timed_out": self.timed_out,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RunRecord":
        return cls(
            mutant_id=obj["mutant_id"],
            project=obj["project"],
            outcomes=dict(obj["outcomes"]),
            timed_out=obj["timed_out"],
        )


def run_baseline(cfg: ProjectConfig, workdir) -> TestRun:
    """Run the unmutated tree once; its failing set is the PoV behavior."""
    clone = clone_tree(cfg.root, Path(workdir) / "__baseline__")
    return run_tests(clone, cfg)


def run_one(cfg: ProjectConfig, mutant: Mutant, workdir) -> RunRecord:
    clone = clone_tree(cfg.root, Path(workdir) / mutant.id)
    apply_mutant(clone, mutant)
    run = run_tests(clone, cfg)
    return RunRecord(
        mutant_id=mutant.id,
        project=cfg.name,
        outcomes=run.outcomes,
        timed_out=run.timed_out,
    )


def run_many(
    cfg: ProjectConfig,
    mutants: Sequence[Mutant],
    workdir,
    jobs: int = 1,
) -> list[RunRecord]:
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    if jobs <= 1:
        records = [run_one(cfg, m, workdir) for m in mutants]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(lambda m: run_one(cfg, m, workdir), mutants))
    return sorted(records, key=lambda r: r.mutant_id)


def write_results(path, records: Iterable[RunRecord]) -> None:
    rows = sorted(records, key=lambda r: r.mutant_id)
    with open(path, "w", encoding="utf-8") as fh:
        for rec in rows:
            fh.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")


def read_results(path) -> list[RunRecord]:
    out: list[RunRecord] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(RunRecord.from_json(json.loads(line)))
    return out
