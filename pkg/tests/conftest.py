"""Shared fixtures: a tiny runnable project whose guard can be mutated.

The runner re-parses the guard operator and constant out of the source
on every invocation, so single-token mutants change observable behavior
without needing a real compiler.
"""
from __future__ import annotations

import json
import textwrap
from pathlib import Path

import pytest

GUARD_SOURCE = textwrap.dedent(
    """\
    class Guard {
        static boolean admit(int n) {
            if (n < 0) {
                return false;
            }
            return true;
        }
    }
    """
)

# Evaluates: admit(n) raises its guard (returns false) when `n OP rhs`
# holds. Three tests probe -5, 0, and 3. Any unreadable mutation makes
# every test ERROR rather than crashing the runner.
RUNNER_SOURCE = textwrap.dedent(
    """\
    import re
    import sys
    from pathlib import Path

    OPS = {
        "<": lambda a, b: a < b, "<=": lambda a, b: a <= b,
        ">": lambda a, b: a > b, ">=": lambda a, b: a >= b,
        "==": lambda a, b: a == b, "!=": lambda a, b: a != b,
    }

    def load():
        text = (Path(__file__).resolve().parent / "src" / "Guard.java").read_text()
        m = re.search(r"if \\(\\w+ (\\S+) (-?\\d+)\\)", text)
        if not m or m.group(1) not in OPS:
            raise ValueError("unreadable guard")
        op, rhs = m.group(1), int(m.group(2))
        return lambda n: not OPS[op](n, rhs)

    def main():
        try:
            admit = load()
        except Exception:
            for name in ("t_neg", "t_zero", "t_pos"):
                print(f"TEST {name} ERROR")
            return 1
        expected = {"t_neg": (-5, False), "t_zero": (0, True), "t_pos": (3, True)}
        results = {}
        for name, (arg, want) in expected.items():
            try:
                results[name] = "PASS" if admit(arg) == want else "FAIL"
            except Exception:
                results[name] = "ERROR"
        for name in ("t_neg", "t_zero", "t_pos"):
            print(f"TEST {name} {results[name]}")
        return 0 if all(v == "PASS" for v in results.values()) else 1

    if __name__ == "__main__":
        sys.exit(main())
    """
)


def make_guard_project(root: Path, pov_tests=("t_zero",)) -> tuple[Path, Path, Path]:
    """Build project tree + run config under root; returns (proj, config, out)."""
    proj = root / "proj"
    (proj / "src").mkdir(parents=True)
    (proj / "src" / "Guard.java").write_text(GUARD_SOURCE, encoding="utf-8")
    (proj / "run_tests.py").write_text(RUNNER_SOURCE, encoding="utf-8")
    out = root / "out"
    config = root / "config.json"
    config.write_text(
        json.dumps(
            {
                "project": {
                    "name": "guard-demo",
                    "root": str(proj),
                    "test_command": ["python3", "run_tests.py"],
                    "parser": "regex",
                    "regex": r"TEST (t_\w+)",
                    "run_timeout_s": 30,
                },
                "vulnerability": {"pov_tests": list(pov_tests)},
                "files": ["src/Guard.java"],
                "predictor": "builtin",
                "generator": {"k": 5},
                "embedder": {"embed_dim": 8, "hidden_dim": 16, "epochs": 2},
                "forest": {"n_trees": 15},
                "eval": {"folds": 5, "seed": 0},
                "out_dir": str(out),
            },
            indent=2,
        ),
        encoding="utf-8",
    )
    return proj, config, out


@pytest.fixture
def guard_project(tmp_path):
    return make_guard_project(tmp_path)
