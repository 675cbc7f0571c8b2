import math

import pytest
from hypothesis import given, strategies as st

from nucleus_wde.model import (
    CostModel, DataFormat, EdgeSpec, FormatKind, KernelSpec, PathLatency, Rounding,
    SizeSet, Throughput, WaveformGraph, cycles_of, topological_order, validate_graph,
)

F32 = DataFormat(FormatKind.FLOAT32, 64)


def nn(kid, load=100):
    return KernelSpec(kid, load_ops=load)


def codes(g):
    return [v.code for v in validate_graph(g)]


def test_single_kernel_is_valid():
    g = WaveformGraph("w", (KernelSpec("k", nucleus="FFT", params=(("size", 64),)),))
    assert validate_graph(g) == []


def test_two_cycle_reported_once():
    g = WaveformGraph("w", (nn("a"), nn("b")), (EdgeSpec("a", "b", 1, F32), EdgeSpec("b", "a", 1, F32)))
    assert codes(g) == ["cycle"]


def test_disconnected_constraint_path():
    g = WaveformGraph("w", (nn("a"), nn("b"), nn("c")),
                      (EdgeSpec("a", "b", 1, F32), EdgeSpec("b", "c", 1, F32)),
                      (PathLatency(("a", "c"), 1e-6),))
    assert codes(g) == ["path-not-connected"]


def test_every_violation_reported():
    g = WaveformGraph(
        "w",
        (KernelSpec("a", nucleus="FFT"), nn("a"), nn("b", load=0)),
        (EdgeSpec("a", "zz", 1, F32), EdgeSpec("b", "b", 1, F32)),
        (PathLatency(("a", "q"), 1e-6), Throughput(0.0)),
    )
    found = set(codes(g))
    assert {"missing-size", "duplicate-kernel", "bad-load", "dangling-edge", "self-loop",
            "unknown-kernel", "bad-bound"} <= found


@pytest.mark.parametrize("cost,n,expected", [
    (CostModel(0, 0, 5), 1024, 51200.0),
    (CostModel(7, 0, 0), 1, 7.0),
    (CostModel(7, 0, 0), 4096, 7.0),
    (CostModel(1, 2, 3), 8, 89.0),
])
def test_cycles_of(cost, n, expected):
    assert cycles_of(cost, n) == expected


def test_cycles_of_rejects_zero():
    with pytest.raises(ValueError):
        cycles_of(CostModel(1, 1, 1), 0)


def test_cycles_floor_is_one_cycle():
    assert cycles_of(CostModel(0, 0, 5), 1) == 1.0


coef = st.floats(min_value=0, max_value=1e6, allow_nan=False)


@given(coef, coef, coef, st.integers(1, 1 << 20), st.integers(1, 1 << 20))
def test_cycles_monotone(a, b, c, n1, n2):
    cost = CostModel(a, b, c)
    lo, hi = sorted((n1, n2))
    assert cycles_of(cost, lo) <= cycles_of(cost, hi)
    assert cycles_of(cost, lo) >= 1


def test_cost_rejects_negative():
    with pytest.raises(ValueError):
        CostModel(-1, 0, 0)


def test_q_formats_need_rounding():
    with pytest.raises(ValueError):
        DataFormat(FormatKind.Q15, 64)
    assert DataFormat(FormatKind.Q15, 64, rounding=Rounding.TRUNCATE).sample_bytes == 2


def test_size_sets():
    r2 = SizeSet.pow_range(64, 4096, 2)
    assert 1024 in r2 and 1000 not in r2 and 32 not in r2 and 8192 not in r2
    r4 = SizeSet.pow_range(16, 4096, 4)
    assert list(r4) == [16, 64, 256, 1024, 4096]
    assert 128 not in r4
    assert 100 in SizeSet((100, 7))
    with pytest.raises(ValueError):
        SizeSet.pow_range(65, 127, 2)


def test_topological_order_is_lexicographic():
    assert topological_order(["c", "b", "a"], [("c", "a")]) == ["b", "c", "a"]
    assert topological_order(["a", "b"], [("a", "b"), ("b", "a")]) is None
