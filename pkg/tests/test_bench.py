import numpy as np
import pandas as pd
import pytest

from gsm_field import bench
from gsm_field.errors import InvalidRange, NumericalError, SingularSystem


def test_generate_pairs_is_deterministic():
    a, b = bench.generate_pairs(5, seed=3), bench.generate_pairs(5, seed=3)
    assert len(a) == 5
    for first, second in zip(a, b):
        for x, y in zip(first, second):
            np.testing.assert_array_equal(x, y)
    assert not np.array_equal(a[0][0], bench.generate_pairs(1, seed=4)[0][0])


def test_time_pair():
    c1, s1, c2, s2 = bench.generate_pairs(1, seed=0)[0]
    timings = bench.time_pair(c1, s1, c2, s2)
    assert len(timings) == 3
    assert all(timing >= 0 for timing in timings)


def test_time_colliding_pair():
    # The gradient of a colliding pair is undefined but the pair is still timed
    timings = bench.time_pair(np.zeros(3), np.eye(3), np.zeros(3), np.eye(3))
    assert len(timings) == 3


pair_distance = bench.pair_distance


def _failing_distance(fail):
    # Raise on the given 1-based calls
    calls = []

    def failing(e1, e2):
        calls.append(None)
        if len(calls) in fail:
            raise SingularSystem("degenerate pair")
        return pair_distance(e1, e2)
    return failing


def test_time_pair_failure(monkeypatch):
    monkeypatch.setattr(bench, 'pair_distance', _failing_distance({1}))
    c1, s1, c2, s2 = bench.generate_pairs(1, seed=0)[0]
    with pytest.raises(SingularSystem):
        bench.time_pair(c1, s1, c2, s2)


def test_run_benchmark():
    timings = bench.run_benchmark(10, seed=0, warmup=2)
    assert list(timings.columns) == bench.COLUMNS
    assert len(timings) == 10
    np.testing.assert_allclose(timings['Total'], timings[bench.COLUMNS[:3]].sum(axis=1))
    with pytest.raises(InvalidRange):
        bench.run_benchmark(0)


def test_run_benchmark_drops_failed_pairs(monkeypatch, caplog):
    monkeypatch.setattr(bench, 'pair_distance', _failing_distance({2}))
    timings = bench.run_benchmark(4, seed=0, warmup=0)
    assert list(timings.index) == [0, 2, 3]
    assert (timings['Total'] > 0).all()
    assert "pair 1 failed" in caplog.text
    assert "dropped 1 of 4 pairs" in caplog.text

    monkeypatch.setattr(bench, 'pair_distance', _failing_distance(set(range(1, 10))))
    with pytest.raises(NumericalError):
        bench.run_benchmark(3, seed=0, warmup=0)


def test_summarize():
    timings = pd.DataFrame({'Init': [1.0, 3.0], 'Dist+Grad': [2.0, 2.0], 'Coll. Prob.': [0.5, 1.5],
                            'Total': [3.5, 6.5]})
    summary = bench.summarize(timings, 'desk')
    assert list(summary.columns) == ['Device'] + bench.COLUMNS
    assert summary.iloc[0].tolist() == ['desk', '2.0 ± 1.0', '2.0 ± 0.0', '1.0 ± 0.5', '5.0 ± 1.5']
    assert bench.summarize(timings)['Device'][0]
