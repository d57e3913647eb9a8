import json

import pytest

from cachechase.errors import InvalidParameter
from cachechase.experiments import (
    COLUMNS,
    ExperimentRecord,
    emit_records,
    format_records,
    load_records,
    min_L_by_s,
    random_cache_record,
    run_random_cache_sweep,
    run_serial_sweep,
    run_windowed_sweep,
    serial_record,
    stages_for_k,
)


def test_record_invariants():
    r = ExperimentRecord("serial", 16, 8, 1, 8, 0, 1, 8, 4, 10, 7, 0)
    assert r.accuracy == 0.7
    with pytest.raises(InvalidParameter):
        ExperimentRecord("serial", 16, 8, 1, 8, 0, 1, 8, 4, 10, 11, 0)


def test_single_record_csv():
    r = ExperimentRecord("serial", 16, 1, 1, 1, 0, 1, 8, 4, 5, 5, 0)
    text = emit_records([r])
    lines = text.splitlines()
    assert len(lines) == 2
    assert lines[0] == ",".join(COLUMNS)
    with pytest.raises(InvalidParameter):
        emit_records([])


def test_json_and_csv_round_trip(tmp_path):
    recs = run_random_cache_sweep(16, 8, (1, 8), trials=200, seed=3)
    for fmt in ("json", "csv"):
        path = tmp_path / f"out.{fmt}"
        emit_records(recs, fmt, path)
        back = load_records(path.read_text(), fmt)
        assert format_records(back, fmt) == path.read_text()
        assert [r.successes for r in back] == [r.successes for r in recs]


def test_emit_to_bad_path(tmp_path):
    r = ExperimentRecord("serial", 16, 1, 1, 1, 0, 1, 8, 4, 5, 5, 0)
    with pytest.raises(OSError):
        emit_records([r], "csv", tmp_path / "missing" / "x.csv")


def test_serial_examples():
    assert serial_record(16, 8, 8, 300, 0).accuracy == 1.0
    assert serial_record(16, 1, 1, 300, 0).accuracy == 1.0
    low = serial_record(16, 8, 7, 2000, 0).accuracy
    assert abs(low - 1 / 16) < 5 * (1 / 16 * 15 / 16 / 2000) ** 0.5


def test_serial_sweep_is_order_independent():
    a = run_serial_sweep(16, (2, 4), (1, 3), trials=50, seed=9)
    b = run_serial_sweep(16, (4, 2), (3, 1), trials=50, seed=9)
    assert emit_records(a) == emit_records(b)
    assert all(r.trials == 50 and 0 <= r.accuracy <= 1 for r in a)


def test_windowed_min_L():
    recs = run_windowed_sweep(16, 8, (1, 2, 8), range(1, 10), trials=100, seed=0)
    assert min_L_by_s(recs) == {1: 8, 2: 4, 8: 3}


def test_random_cache_record_fields():
    r = random_cache_record(16, 8, 8, 500, 0)
    assert r.T == 3 == stages_for_k(8)
    assert r.reference == pytest.approx((8 / 13) ** 3, abs=1e-6)
    assert r.extra["good_trials"] <= r.trials
    assert stages_for_k(1) == 1 and stages_for_k(16) == 4
    single = random_cache_record(16, 8, 1, 4000, 2)
    assert abs(single.accuracy - 0.5) < 4 * (0.25 / 4000) ** 0.5


def test_reruns_are_byte_identical():
    a = emit_records(run_random_cache_sweep(16, 8, (2, 4), trials=300, seed=11), "json")
    b = emit_records(run_random_cache_sweep(16, 8, (2, 4), trials=300, seed=11), "json")
    assert a == b
    assert "wall_time" not in json.loads(a)[0]
