import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chromacc.instances import (
    GAMMA,
    CccInstance,
    Clustering,
    InstanceError,
    check_clustering,
    cost,
    dumps_instance,
    gen_max_interfering,
    gen_random_multirelational,
    ingest_edge_list,
    ingest_tabular,
    loads_instance,
    pair_index,
    read_tabular,
    resolve_color_token,
)

from oracles import naive_cost


def test_pair_index_row_major():
    n = 5
    k = 0
    for u in range(n):
        for v in range(u + 1, n):
            assert pair_index(u, v, n) == k
            assert pair_index(v, u, n) == k
            k += 1


def test_max_interfering_single_group():
    inst = gen_max_interfering(4, 1, 0.0, 0)
    assert inst.n_labeled == 6
    assert inst.n_gamma == 0
    assert set(inst.pair_colors.tolist()) == {0}


def test_max_interfering_two_groups():
    inst = gen_max_interfering(4, 2, 0.0, 0)
    assert inst.color(0, 1) == 0
    assert inst.color(2, 3) == 1
    for u in (0, 1):
        for v in (2, 3):
            assert inst.color(u, v) == 0


def test_max_interfering_all_negative():
    inst = gen_max_interfering(6, 3, 1.0, 7)
    assert inst.n_gamma == 12
    assert [inst.color(0, 1), inst.color(2, 3), inst.color(4, 5)] == [0, 1, 2]


def test_max_interfering_rejects():
    with pytest.raises(InstanceError):
        gen_max_interfering(5, 2)
    with pytest.raises(InstanceError):
        gen_max_interfering(4, 2, 1.5)


def test_max_interfering_deterministic():
    a = gen_max_interfering(12, 3, 0.4, 5)
    b = gen_max_interfering(12, 3, 0.4, 5)
    assert a == b
    assert a != gen_max_interfering(12, 3, 0.4, 6)


def test_multirelational_ranges():
    inst = gen_random_multirelational(30, 3, 0.2, 0.5, 1)
    codes = inst.pair_colors
    assert set(codes.tolist()) <= {GAMMA, 0, 1, 2}
    frac = (codes == GAMMA).mean()
    assert 0.4 < frac < 0.6
    with pytest.raises(InstanceError):
        gen_random_multirelational(5, 2, p_gamma=-0.1)


def test_from_pairs_conflict_and_duplicates():
    inst = CccInstance.from_pairs(3, 2, [(0, 1, 1), (1, 0, 1)])
    assert inst.color(0, 1) == 1
    assert inst.color(0, 2) == GAMMA
    with pytest.raises(InstanceError):
        CccInstance.from_pairs(3, 2, [(0, 1, 1), (0, 1, 0)])
    with pytest.raises(InstanceError):
        CccInstance.from_pairs(3, 2, [(0, 0, 1)])
    with pytest.raises(InstanceError):
        CccInstance.from_pairs(3, 2, [(0, 1, 2)])


def test_color_tokens():
    assert resolve_color_token("gamma", 3) == GAMMA
    assert resolve_color_token("c2", 3) == 2
    assert resolve_color_token("1", 3) == 1
    assert resolve_color_token("books", 3, {"books": 0}) == 0
    with pytest.raises(InstanceError):
        resolve_color_token("c3", 3)
    with pytest.raises(InstanceError):
        resolve_color_token("red", 3)


def test_edge_list_unlisted_gamma():
    inst = ingest_edge_list([(0, 1, "c0"), (1, 2, "gamma")], 4, 1)
    assert inst.n_labeled == 1
    assert inst.n_gamma == 5


def test_tabular_median_rule():
    feats = [[1.0, 0.0], [0.9, 0.1], [0.0, 1.0]]
    inst = ingest_tabular(feats, [0, 1, 1])
    # similarities: (0,1) ~0.99, (0,2) 0, (1,2) ~0.11; median ~0.11
    assert inst.n == 3 and inst.L == 2
    assert inst.color(0, 1) == 0
    assert inst.color(0, 2) == GAMMA
    assert inst.color(1, 2) == GAMMA


def test_read_tabular(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("a,b,grp\n1,0,x\n0,1,y\n1,1,x\n")
    feats, groups = read_tabular(p, "grp")
    assert feats.shape == (3, 2)
    assert groups.tolist() == [0, 1, 0]
    with pytest.raises(InstanceError):
        read_tabular(p, "missing")


def test_instance_roundtrip_and_gamma_token():
    inst = gen_max_interfering(8, 2, 0.5, 3)
    assert loads_instance(dumps_instance(inst)) == inst
    doc = {"version": 1, "n": 3, "L": 1, "edges": [[0, 1, 0], [1, 2, "gamma"]]}
    got = loads_instance(json.dumps(doc))
    assert got.color(1, 2) == GAMMA and got.color(0, 1) == 0
    with pytest.raises(InstanceError):
        loads_instance(json.dumps({**doc, "version": 2}))


def test_cost_small_cases():
    inst = CccInstance.from_pair_colors(3, 2, [0, 1, GAMMA])
    together = Clustering(np.zeros(3, int), {0: 0})
    # (0,1) agrees, (0,2) wrong color, (1,2) gamma co-clustered
    assert cost(inst, together) == 2
    assert cost(inst, Clustering.singletons(3)) == 2


def test_check_clustering_rejects_bad_color():
    inst = CccInstance.from_pair_colors(2, 1, [0])
    with pytest.raises(InstanceError):
        check_clustering(inst, Clustering(np.zeros(2, int), {0: 3}))


@st.composite
def instance_and_clustering(draw):
    n = draw(st.integers(1, 7))
    L = draw(st.integers(1, 3))
    codes = draw(st.lists(st.integers(-1, L - 1), min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2))
    a = draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    cols = {k: draw(st.integers(0, L - 1)) for k in set(a)}
    return CccInstance.from_pair_colors(n, L, codes), np.array(a), cols


@settings(max_examples=200, deadline=None)
@given(instance_and_clustering())
def test_cost_matches_naive(data):
    inst, a, cols = data
    cl = Clustering(a, cols)
    assert cost(inst, cl) == naive_cost(inst.matrix().tolist(), a.tolist(), cols)


@settings(max_examples=100, deadline=None)
@given(instance_and_clustering())
def test_instance_serialization_roundtrip(data):
    inst, a, cols = data
    assert loads_instance(dumps_instance(inst)) == inst
    cl = Clustering(a, cols)
    assert Clustering.from_dict(inst.n, cl.to_dict()) == cl
