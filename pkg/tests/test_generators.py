import random

import pytest
from hypothesis import given, strategies as st

from osrace.detector import detect_trace
from osrace.generators import (
    OvInstance, RandomTraceConfig, add_fork_join, gen_ov_trace, gen_random_trace, parse_ov,
)
from osrace.index import build_indices
from osrace.oracle import Outcome, oracle_osr_race
from osrace.trace import format_trace, validate


def test_ov_orthogonal_pair_races():
    tr = gen_ov_trace(OvInstance([(0, 1)], [(1, 0)], 2))
    assert len(tr) == 6
    assert [e.thread for e in tr] == ["tA"] * 3 + ["tB"] * 3
    assert detect_trace(tr).pairs


def test_ov_shared_locks_no_race():
    tr = gen_ov_trace(OvInstance([(1, 1)], [(1, 1)], 2))
    assert len(tr) == 10
    ix = build_indices(tr)
    writes = [e.idx for e in tr if e.op == "w"]
    assert oracle_osr_race(ix, *writes) == Outcome.NO
    assert not detect_trace(tr).pairs


def test_ov_empty_side():
    tr = gen_ov_trace(OvInstance([], [(1,)], 1))
    assert {e.thread for e in tr} == {"tB"}
    assert not detect_trace(tr).pairs


def test_ov_zero_vector_is_bare_write():
    tr = gen_ov_trace(OvInstance([(0, 0)], [], 2))
    assert [(e.op, e.target) for e in tr] == [("w", "x")]


def test_ov_clause_shape():
    tr = gen_ov_trace(OvInstance([(1, 0, 1)], [], 3))
    assert [(e.op, e.target) for e in tr] == [
        ("acq", "l1"), ("acq", "l3"), ("w", "x"), ("rel", "l3"), ("rel", "l1")]


def test_parse_ov():
    inst = parse_ov("# A\n01\n10\n--\n11\n")
    assert inst.A == [(0, 1), (1, 0)] and inst.B == [(1, 1)] and inst.d == 2
    for bad in ["01\n", "01\n--\n1\n", "0a\n--\n", "1\n--\n--\n"]:
        with pytest.raises(ValueError):
            parse_ov(bad)


def test_ov_instance_checks():
    with pytest.raises(ValueError):
        OvInstance([(1, 0)], [(1,)], 2)
    with pytest.raises(ValueError):
        OvInstance([], [], 0)
    assert OvInstance([(1, 0)], [(0, 1)], 2).has_orthogonal_pair()
    assert not OvInstance([(1, 1)], [(0, 1)], 2).has_orthogonal_pair()


@given(st.integers(0, 10_000))
def test_ov_faithful_small(seed):
    rng = random.Random(seed)
    d = rng.randint(1, 4)
    vec = lambda: tuple(rng.randint(0, 1) for _ in range(d))
    inst = OvInstance([vec() for _ in range(rng.randint(0, 5))],
                      [vec() for _ in range(rng.randint(0, 5))], d)
    assert bool(detect_trace(gen_ov_trace(inst)).pairs) == inst.has_orthogonal_pair()


def test_random_empty():
    assert len(gen_random_trace(RandomTraceConfig(events=0), 1)) == 0


def test_random_deterministic():
    cfg = RandomTraceConfig(threads=5, locks=3, vars=4, events=300, lock_density=0.4)
    assert format_trace(gen_random_trace(cfg, 42)) == format_trace(gen_random_trace(cfg, 42))
    assert format_trace(gen_random_trace(cfg, 42)) != format_trace(gen_random_trace(cfg, 43))


def test_random_config_checks():
    with pytest.raises(ValueError):
        RandomTraceConfig(threads=0)
    with pytest.raises(ValueError):
        RandomTraceConfig(lock_density=1.5)


@given(
    st.integers(1, 6), st.integers(0, 4), st.integers(1, 5), st.integers(0, 200),
    st.floats(0, 1), st.floats(0, 1), st.booleans(), st.integers(0, 10_000),
)
def test_random_well_formed(T, L, V, N, dens, rr, close, seed):
    cfg = RandomTraceConfig(T, L, V, N, dens, rr, close_all=close)
    tr = gen_random_trace(cfg, seed)
    assert len(tr) == N
    rep = validate(tr)
    assert rep.ok
    if close:
        assert not rep.info
    assert validate(add_fork_join(tr, seed)).ok
