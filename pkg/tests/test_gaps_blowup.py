import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chromacc.analysis.gaps import (
    CSV_COLUMNS,
    dumps_gap_csv,
    empirical_gap,
    gap_ratio,
    loads_gap_csv,
    spearman_trend,
    welch_less,
)
from chromacc.blowup import gen_chromatic_blowup
from chromacc.instances import GAMMA, CccInstance, InstanceError, gen_max_interfering
from chromacc.lp import augment_c4, build_ccc_lp, solve, validate_solution
from chromacc.lp.model import METRIC
from chromacc.rounding import RoundingError


def test_gap_ratio_conventions():
    assert gap_ratio(3, 2.0) == (1.5, "")
    assert gap_ratio(0, 0.0) == (1.0, "zero")
    r, flag = gap_ratio(4, 0.0)
    assert math.isinf(r) and flag == "inf"


def test_trial_rows_and_seeds():
    inst = gen_max_interfering(8, 2, 0.3, 0)
    sol = solve(build_ccc_lp(inst))
    rep = empirical_gap(inst, "pivot", sol, trials=10, seed_base=100)
    assert len(rep.records) == 10
    assert [r.seed for r in rep.records] == list(range(100, 110))
    assert rep.max >= rep.mean >= rep.min


def test_perfect_instance_flagged():
    inst = CccInstance.from_pair_colors(5, 1, [0] * 10)
    sol = solve(augment_c4(build_ccc_lp(inst)))
    assert sol.objective == pytest.approx(0.0)
    for alg in ("pivot", "lp_ccc", "c4"):
        rep = empirical_gap(inst, alg, sol, trials=5)
        assert all(r.flag == "zero" and r.ratio == 1.0 for r in rep.records)
        assert rep.flagged == 5


def test_zero_lp_positive_cost_is_infinite():
    # LP value forced to zero: any positive cost must be flagged infinite
    inst = gen_max_interfering(6, 2, 0.5, 1)
    rep = empirical_gap(inst, "std_cc", None, trials=5, lp_obj=0.0)
    assert any(r.flag == "inf" and math.isinf(r.ratio) for r in rep.records if r.alg_cost > 0)


def test_algorithm_solution_mismatch():
    inst = gen_max_interfering(6, 2, 0.3, 0)
    sol = solve(build_ccc_lp(inst))
    with pytest.raises(RoundingError):
        empirical_gap(inst, "c4", sol, trials=2)
    with pytest.raises(RoundingError):
        empirical_gap(inst, "lp_ccc", None, trials=2)
    with pytest.raises(RoundingError):
        empirical_gap(inst, "magic", sol, trials=2)


def test_csv_roundtrip():
    inst = gen_max_interfering(8, 2, 0.3, 0)
    sol = solve(augment_c4(build_ccc_lp(inst)))
    reps = [empirical_gap(inst, a, sol, trials=4, family="max_interfering", instance_id="x") for a in ("pivot", "c4")]
    rows, summary = loads_gap_csv(dumps_gap_csv(reps))
    assert len(rows) == 8
    assert tuple(rows[0]) == CSV_COLUMNS
    assert rows[0]["family"] == "max_interfering" and rows[0]["L"] == "2"
    assert [s["algorithm"] for s in summary] == ["pivot", "c4"]
    assert float(summary[0]["mean"]) == pytest.approx(reps[0].mean)


def test_workers_do_not_change_results():
    inst = gen_max_interfering(8, 2, 0.3, 0)
    sol = solve(build_ccc_lp(inst))
    a = empirical_gap(inst, "lp_ccc", sol, trials=12, seed_base=5)
    b = empirical_gap(inst, "lp_ccc", sol, trials=12, seed_base=5, workers=2)
    assert [r.alg_cost for r in a.records] == [r.alg_cost for r in b.records]


def test_c4_not_worse_than_lp_ccc_n20():
    inst = gen_max_interfering(20, 2, 0.3, 0)
    base = solve(build_ccc_lp(inst))
    aug = solve(augment_c4(build_ccc_lp(inst)))
    c4 = empirical_gap(inst, "c4", aug, trials=500, seed_base=0)
    ind = empirical_gap(inst, "lp_ccc", base, trials=500, seed_base=0)
    assert c4.mean <= ind.mean


def test_stat_helpers():
    assert welch_less([1, 2, 3, 2, 1], [5, 6, 7, 6, 5]) < 0.01
    assert welch_less([1, 1], [2, 2]) == 0.0
    assert spearman_trend([1, 2, 3, 4], [0.1, 0.2, 0.25, 0.3]) == pytest.approx(1.0)


# -- blowup -----------------------------------------------------------------------


def test_blowup_one_edge_two_colors():
    inst, sol = gen_chromatic_blowup(["+"], [0.0], 2)
    assert inst.n == 4
    # vertices (0,0), (0,1), (1,0), (1,1) -> 0, 1, 2, 3; parallel pairs (0,2), (1,3)
    assert inst.color(0, 2) == 0 and inst.color(1, 3) == 1
    assert sol.pair(0, 2)[0] == 0.0 and sol.pair(1, 3)[1] == 0.0
    for u, v in [(0, 1), (0, 3), (1, 2), (2, 3)]:
        assert sol.pair(u, v).tolist() == [0.5, 0.5]
    assert sol.x_node.sum(axis=1).tolist() == [1.0] * 4


def test_blowup_orthogonal_colors_follow_lower_endpoint():
    inst, _ = gen_chromatic_blowup(["+", "-", "+"], [0.0, 0.5, 0.5], 3)
    L = 3
    for a, b in itertools.combinations(range(inst.n), 2):
        pa, pb = a % L, b % L
        if pa != pb:
            assert inst.color(a, b) == pa


def test_blowup_identity_at_one_color():
    signs = ["+", "-", "+"]
    x = [0.25, 0.5, 0.25]
    inst, sol = gen_chromatic_blowup(signs, x, 1)
    assert inst.pair_colors.tolist() == [0, GAMMA, 0]
    assert sol.x_pair[:, 0].tolist() == x
    assert not validate_solution(inst, sol, eps_feas=0.0)


def test_blowup_matrix_input_and_rejects():
    S = np.array([[0, 1, -1], [1, 0, 1], [-1, 1, 0]])
    X = np.array([[0, 0.2, 0.3], [0.2, 0, 0.1], [0.3, 0.1, 0]])
    inst, _ = gen_chromatic_blowup(S, X, 2)
    assert inst.n == 6
    with pytest.raises(InstanceError):
        gen_chromatic_blowup(["+", "+", "+"], [0.0, 0.0, 0.5], 2)
    with pytest.raises(InstanceError):
        gen_chromatic_blowup(["+"], [1.5], 2)
    with pytest.raises(InstanceError):
        gen_chromatic_blowup(["*"], [0.5], 2)
    with pytest.raises(InstanceError):
        gen_chromatic_blowup(["+"], [0.5], 0)


@st.composite
def base_cc(draw):
    n = draw(st.integers(2, 6))
    P = n * (n - 1) // 2
    signs = draw(st.lists(st.sampled_from(["+", "-"]), min_size=P, max_size=P))
    # shortest-path metric on random dyadic weights, capped at 1
    w = np.array(draw(st.lists(st.integers(0, 8), min_size=P, max_size=P))) / 8
    D = np.zeros((n, n))
    D[np.triu_indices(n, 1)] = w
    D = D + D.T
    for k in range(n):
        D = np.minimum(D, D[:, [k]] + D[[k], :])
    return signs, np.minimum(D, 1.0)[np.triu_indices(n, 1)]


@settings(max_examples=30, deadline=None)
@given(base_cc(), st.integers(2, 4))
def test_blowup_vertex_sums_and_violation_pattern(base, L):
    signs, x = base
    inst, sol = gen_chromatic_blowup(signs, x, L)
    assert np.array_equal(sol.x_node.sum(axis=1), np.full(inst.n, L - 1.0))
    fams = validate_solution(inst, sol, eps_feas=0.0).by_family()
    # bounds, triangles and vertex sums hold; a cross-plane 1/2 sits next to a node value of 1
    assert set(fams) == {METRIC}
