import json
import math

import pytest
from hypothesis import given, strategies as st

from mimicry.errors import EmptyPoV
from mimicry.semantics import (
    COUPLED,
    KILLED_UNRELATED,
    LABELS,
    MIMICKING,
    SURVIVED,
    LabelRecord,
    VulnerabilityRecord,
    label,
    label_counts,
    make_label_record,
    ochiai,
    read_labels,
    write_labels,
)


def brute_force_ochiai(a, b):
    """Membership-counting oracle, no set algebra."""
    if not a or not b:
        return 0.0
    shared = 0
    for t in a:
        if t in b:
            shared += 1
    return shared / math.sqrt(len(a) * len(b))


def test_pinned_values():
    assert ochiai({"t1"}, {"t1"}) == 1.0
    assert ochiai({"t1"}, {"t1", "t2"}) == 0.7071067811865475
    assert ochiai({"t1", "t3"}, {"t1", "t2"}) == 0.5
    assert ochiai({"t3"}, {"t1"}) == 0.0
    assert ochiai(set(), {"t1"}) == 0.0
    assert ochiai(set(), set()) == 0.0


def test_matches_brute_force_on_1000_random_pairs():
    import random

    rng = random.Random(20260819)
    universe = [f"t{i}" for i in range(10)]
    for _ in range(1000):
        a = frozenset(t for t in universe if rng.random() < 0.4)
        b = frozenset(t for t in universe if rng.random() < 0.4)
        assert ochiai(a, b) == pytest.approx(brute_force_ochiai(a, b), abs=1e-12)


sets_st = st.frozensets(st.sampled_from([f"t{i}" for i in range(8)]), max_size=8)


@given(sets_st, sets_st)
def test_symmetry_and_range(a, b):
    s = ochiai(a, b)
    assert s == ochiai(b, a)
    assert 0.0 <= s <= 1.0


@given(sets_st, sets_st)
def test_score_one_iff_equal_nonempty(a, b):
    s = ochiai(a, b)
    if a and b:
        assert (s == 1.0) == (a == b)
    else:
        assert s == 0.0


def test_label_boundaries():
    pov = frozenset({"t1", "t2"})
    assert label(frozenset(), pov) == SURVIVED
    assert label(frozenset({"t1", "t2"}), pov) == MIMICKING
    assert label(frozenset({"t1"}), pov) == COUPLED
    assert label(frozenset({"t9"}), pov) == KILLED_UNRELATED


def test_label_requires_pov():
    with pytest.raises(EmptyPoV):
        label(frozenset({"t1"}), frozenset())
    with pytest.raises(EmptyPoV):
        VulnerabilityRecord(project="p", pov_tests=())


@given(sets_st, sets_st.filter(bool))
def test_label_consistent_with_score(mutant_failing, pov):
    name = label(mutant_failing, pov)
    s = ochiai(mutant_failing, pov)
    if name == SURVIVED:
        assert not mutant_failing
    elif name == MIMICKING:
        assert s == 1.0 and mutant_failing == pov
    elif name == COUPLED:
        assert 0.0 < s < 1.0
    else:
        assert name == KILLED_UNRELATED and s == 0.0
    assert name in LABELS


def test_make_label_record_sorts_sets():
    rec = make_label_record(
        mutant_id="m1",
        project="p",
        mutant_failing=frozenset({"t2", "t1"}),
        pov_failing=frozenset({"t1", "t2"}),
    )
    assert rec.mutant_failing == ("t1", "t2")
    assert rec.pov_failing == ("t1", "t2")
    assert rec.label == MIMICKING
    assert rec.ochiai == 1.0


def test_labels_jsonl_roundtrip_sorted(tmp_path):
    records = [
        make_label_record("m2", "p", frozenset({"t1"}), frozenset({"t1", "t2"})),
        make_label_record("m1", "p", frozenset(), frozenset({"t1"})),
    ]
    path = tmp_path / "labels.jsonl"
    write_labels(path, records)
    lines = path.read_text().splitlines()
    assert [json.loads(l)["mutant_id"] for l in lines] == ["m1", "m2"]
    again = read_labels(path)
    assert again == sorted(records, key=lambda r: r.mutant_id)


def test_write_is_deterministic(tmp_path):
    records = [
        make_label_record("a", "p", frozenset({"t1"}), frozenset({"t1"})),
        make_label_record("b", "p", frozenset({"t2"}), frozenset({"t1"})),
    ]
    p1, p2 = tmp_path / "one.jsonl", tmp_path / "two.jsonl"
    write_labels(p1, records)
    write_labels(p2, list(reversed(records)))
    assert p1.read_bytes() == p2.read_bytes()


def test_label_counts():
    records = [
        make_label_record("a", "p", frozenset({"t1"}), frozenset({"t1"})),
        make_label_record("b", "p", frozenset(), frozenset({"t1"})),
        make_label_record("c", "p", frozenset(), frozenset({"t1"})),
    ]
    counts = label_counts(records)
    assert counts[MIMICKING] == 1
    assert counts[SURVIVED] == 2
    assert counts[COUPLED] == 0
    assert counts[KILLED_UNRELATED] == 0


def test_label_record_json_roundtrip():
    rec = make_label_record("m", "proj", frozenset({"t1", "t3"}), frozenset({"t1"}))
    assert LabelRecord.from_json(rec.to_json()) == rec
