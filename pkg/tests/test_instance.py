import json

import pytest
from hypothesis import given, strategies as st

from tabudyn import instance as im
from tabudyn.instance import Instance, InstanceError, ParseError

from conftest import T1


@st.composite
def instances(draw, max_n=5, max_m=4):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(1, max_m))
    routing = tuple(tuple(draw(st.permutations(range(m)))) for _ in range(n))
    duration = tuple(tuple(draw(st.lists(st.integers(0, 99), min_size=m, max_size=m)))
                     for _ in range(n))
    return Instance(n, m, routing, duration)


def test_t1_orlib_text():
    assert im.parse("2 2\n0 3 1 2\n1 2 0 4") == T1
    assert im.serialize(T1) == "2 2\n0 3 1 2\n1 2 0 4\n"


@given(instances())
def test_orlib_roundtrip(inst):
    assert im.parse(im.serialize(inst, "orlib")) == inst


@given(instances())
def test_json_roundtrip(inst):
    text = im.serialize(inst, "native-json")
    assert im.parse(text, "native-json") == inst
    assert text.endswith("\n")
    json.loads(text)


def test_comments_and_blank_lines_skipped():
    text = "# a comment\n\n2 2\n# job 0\n0 3 1 2\n\n1 2 0 4\n"
    assert im.parse(text) == T1


@pytest.mark.parametrize("text,line", [
    ("2 2\n0 3 1 2\n", 2),          # missing job line
    ("2 2\n0 3 1\n1 2 0 4\n", 2),   # odd token count
    ("2 x\n0 3 1 2\n1 2 0 4\n", 1),
    ("2 2\n0 3 1 z\n1 2 0 4\n", 2),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as e:
        im.parse(text)
    assert e.value.line == line


def test_non_permutation_routing_rejected():
    with pytest.raises(InstanceError):
        im.parse("2 2\n0 3 0 2\n1 2 0 4\n")
    with pytest.raises(InstanceError):
        Instance(1, 2, ((1, 1),), ((1, 1),))


def test_empty_input():
    with pytest.raises(ParseError):
        im.parse("# nothing\n")


def test_generate_deterministic():
    a = im.generate(6, 4, seed=3)
    b = im.generate(6, 4, seed=3)
    assert a == b and a.digest() == b.digest()
    assert im.generate(6, 4, seed=4) != a


@given(st.integers(1, 6), st.sampled_from([(4, 1), (4, 2), (4, 4), (6, 3), (6, 2)]),
       st.integers(0, 2**32))
def test_generate_workflow_blocks(n, mwf, seed):
    m, wf = mwf
    inst = im.generate(n, m, wf=wf, seed=seed)
    b = m // wf
    for r in inst.routing:
        assert sorted(r) == list(range(m))
        for p, k in enumerate(r):
            assert k // b == p // b
    for d in inst.duration:
        assert all(1 <= x <= 99 for x in d)


def test_flowshop_routings_identical():
    inst = im.generate(5, 4, wf=4, seed=1)
    assert all(r == (0, 1, 2, 3) for r in inst.routing)


@pytest.mark.parametrize("m,wf", [(4, 3), (4, 0), (4, 5)])
def test_generate_bad_workflow(m, wf):
    with pytest.raises(InstanceError):
        im.generate(6, m, wf=wf)


def test_generate_bad_range():
    with pytest.raises(InstanceError):
        im.generate(3, 3, duration_range=(5, 4))


def test_generate_set_names_and_seeds():
    s = im.generate_set(3, 2, 1, 4, seed=9)
    assert [i.name for i in s] == [f"3x2_wf1_{k:04d}" for k in range(4)]
    assert len({i.digest() for i in s}) == 4
    assert im.generate_set(3, 2, 1, 4, seed=9) == s


@pytest.mark.parametrize("name,shape", [("ft06", (6, 6)), ("la16", (10, 10)),
                                        ("abz5", (10, 10))])
def test_benchmarks(name, shape):
    inst = im.benchmark(name)
    assert (inst.n, inst.m) == shape
    assert name in im.BENCHMARK_OPTIMA


def test_ft06_first_job():
    # first line of the classic ft06 file: 2 1 0 3 1 6 3 7 5 3 4 6
    inst = im.benchmark("ft06")
    assert inst.routing[0] == (2, 0, 1, 3, 5, 4)
    assert inst.duration[0] == (1, 3, 6, 7, 3, 6)


def test_load_by_suffix(tmp_path):
    p = tmp_path / "t1.txt"
    p.write_text(im.serialize(T1))
    q = tmp_path / "t1.json"
    q.write_text(im.serialize(T1, "native-json"))
    assert im.load(p) == T1 == im.load(q)
    assert im.load(q).name == "t1"


def test_op_indexing():
    assert T1.opof.tolist() == [[0, 1], [3, 2]]
    assert T1.mach.tolist() == [0, 1, 1, 0]
    assert T1.dur.tolist() == [3, 2, 2, 4]
    assert T1.num_pairs == 2
