import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from tabudyn.instance import generate
from tabudyn.schedule import (Orientation, ShapeMismatch, distance, evaluate, is_feasible,
                              makespan, random_semi_active)

from conftest import S_A, S_B, S_C, S_D, T1


@st.composite
def case(draw, max_n=4, max_m=3):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(1, max_m))
    inst = generate(n, m, seed=draw(st.integers(0, 2**31)))
    order = [draw(st.permutations(range(n))) for _ in range(m)]
    return inst, order


def test_t1_makespans():
    assert makespan(T1, S_A) == 7
    assert makespan(T1, S_B) == 11
    assert makespan(T1, S_C) == 11
    assert evaluate(T1, S_D) is None
    assert not is_feasible(T1, S_D)


def test_t1_critical_ops():
    info = evaluate(T1, S_A)
    # job 0 on M0 (op 0) and job 1 on M0 (op 3)
    assert np.flatnonzero(info.critical).tolist() == [0, 3]
    assert info.start_of(T1, 1, 0) == 3
    assert evaluate(T1, S_B).critical.all()


def test_t1_oracle_agrees():
    for s in (S_A, S_B, S_C, S_D):
        assert makespan(T1, s) == oracles.makespan(T1, s.to_list())


@given(case())
def test_evaluate_matches_relaxation_oracle(c):
    inst, order = c
    s = Orientation(order)
    info = evaluate(inst, s)
    ref = oracles.starts(inst, order)
    if ref is None:
        assert info is None
        return
    assert info.cmax == oracles.makespan(inst, order)
    for j in range(inst.n):
        for k in range(inst.m):
            assert info.start_of(inst, j, k) == ref[(j, k)]
    # tails: every op's head + dur + tail is at most cmax, with equality on critical ops
    total = info.head + inst.dur + info.tail
    assert total.max() == info.cmax
    assert np.array_equal(info.critical, total == info.cmax)


def test_t1_distances():
    assert distance(S_A, S_A) == 0
    assert distance(S_A, S_B) == 1
    assert distance(S_B, S_C) == 2


@given(case(), st.data())
def test_distance_matches_pair_count(c, data):
    inst, o1 = c
    o2 = [data.draw(st.permutations(range(inst.n))) for _ in range(inst.m)]
    s1, s2 = Orientation(o1), Orientation(o2)
    assert distance(s1, s2) == oracles.distance(o1, o2) == distance(s2, s1)
    assert 0 <= distance(s1, s2) <= inst.num_pairs


@given(case())
def test_bits_roundtrip(c):
    inst, order = c
    s = Orientation(order)
    assert Orientation.from_bits(s.bits, inst.n, inst.m) == s
    assert len(s.bit_list()) == inst.num_pairs


def test_bitvector_layout():
    # bit (k, a<b) is set iff a precedes b
    assert S_A.bit_list() == [1, 0]
    assert S_B.bit_list() == [1, 1]
    assert S_C.bit_list() == [0, 0]


def test_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        distance(S_A, Orientation([[0, 1, 2]]))
    with pytest.raises(ShapeMismatch):
        evaluate(T1, Orientation([[0, 1, 2], [0, 1, 2]]))


def test_orientation_validation():
    with pytest.raises(ValueError):
        Orientation([[0, 0], [1, 0]])
    s = Orientation([[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        s.order[0, 0] = 1


def test_random_semi_active_t1_never_cyclic():
    seen = {random_semi_active(T1, r) for r in range(60)}
    assert S_D not in seen
    assert seen <= {S_A, S_B, S_C}


@given(st.integers(1, 5), st.integers(1, 4), st.integers(0, 2**31))
def test_random_semi_active_feasible(n, m, seed):
    inst = generate(n, m, seed=seed)
    s = random_semi_active(inst, seed)
    assert oracles.makespan(inst, s.to_list()) is not None
    assert s == random_semi_active(inst, seed)
