import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from chromacc.instances import GAMMA, CccInstance, Clustering, gen_max_interfering, gen_random_multirelational
from chromacc.lp import (
    LpSolution,
    ModelError,
    augment_c4,
    build_ccc_lp,
    dumps_solution,
    export_lp_text,
    import_lp_text,
    integral_encoding,
    loads_solution,
    solve,
    validate_solution,
)
from chromacc.lp.lpio import LpFormatError, parse_values
from chromacc.lp.model import C4, METRIC, TRIANGLE, VERTEX, var_names
from chromacc.lp.simplex import solve_dense
from chromacc.lp.solve import SolverError

from oracles import brute_force_labelings, ccc_lp_dense


def test_row_counts():
    n, L = 5, 3
    P = n * (n - 1) // 2
    m = build_ccc_lp(CccInstance.from_pair_colors(n, L, [0] * P))
    counts = m.row_counts()
    assert counts[METRIC] == 2 * P * L
    assert counts[TRIANGLE] == 3 * 10 * L
    assert counts[VERTEX] == n
    assert counts.get(C4, 0) == 0
    m4 = augment_c4(m)
    assert m4.row_counts()[C4] == P
    assert m4.has_c4
    with pytest.raises(ModelError):
        augment_c4(m4)


def test_n2_model_terms():
    inst = CccInstance.from_pair_colors(2, 1, [0])
    m = build_ccc_lp(inst)
    assert m.names == ["x_u0_c0", "x_u1_c0", "x_p0_1_c0"]
    assert m.objective.tolist() == [0, 0, 1]
    assert m.constant == 0
    text = export_lp_text(m)
    assert " obj: + x_p0_1_c0" in text
    assert "vsum_0: + x_u0_c0 = 0" in text


def test_gamma_constant():
    inst = CccInstance.from_pair_colors(3, 2, [GAMMA, 0, GAMMA])
    m = build_ccc_lp(inst)
    assert m.constant == 4.0


@pytest.mark.parametrize("args", [(6, 2, 0.5, 3), (6, 3, 0.3, 1)])
def test_highs_matches_dense_oracle(args):
    inst = gen_max_interfering(*args)
    exp = ccc_lp_dense(inst.matrix(), inst.L)
    assert solve(build_ccc_lp(inst)).objective == pytest.approx(exp, abs=1e-7)


def test_fractional_instance_frozen():
    # oracle values: LP 5.5 (with and without C4), optimum 6
    inst = gen_random_multirelational(6, 2, 0.3, 0.4, 0)
    m = build_ccc_lp(inst)
    assert solve(m).objective == pytest.approx(5.5, abs=1e-7)
    assert solve(augment_c4(m)).objective == pytest.approx(5.5, abs=1e-7)
    assert brute_force_labelings(inst.matrix().tolist(), 2) == 6


def test_lazy_equals_full():
    inst = gen_random_multirelational(10, 3, 0.3, 0.4, 2)
    m = build_ccc_lp(inst)
    a = solve(m, lazy=True)
    b = solve(m, lazy=False)
    assert a.objective == pytest.approx(b.objective, abs=1e-7)
    assert a.info["rounds"] >= 1
    assert not validate_solution(inst, a)


def test_simplex_matches_highs_small():
    inst = gen_random_multirelational(5, 2, 0.2, 0.4, 4)
    m = build_ccc_lp(inst)
    a = solve(m, solver="simplex")
    b = solve(m)
    assert a.objective == pytest.approx(b.objective, abs=1e-7)
    assert not validate_solution(inst, a)


def test_simplex_rejects_large():
    m = build_ccc_lp(gen_max_interfering(20, 2))
    with pytest.raises(SolverError):
        solve(m, solver="simplex")


def test_simplex_basic():
    # min -x - y s.t. x + y <= 1.5 (as -x - y >= -1.5), 0 <= x, y <= 1
    r = solve_dense(np.array([-1.0, -1.0]), np.array([[-1.0, -1.0]]), np.array([-1.5]), upper=1.0)
    assert r.status == "optimal"
    assert r.fun == pytest.approx(-1.5)
    r = solve_dense(np.array([1.0]), np.array([[1.0]]), np.array([2.0]), upper=1.0)
    assert r.status == "infeasible"


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 4),
    st.integers(1, 4),
    st.integers(0, 10_000),
)
def test_simplex_vs_linprog(m, k, seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=k)
    A = rng.normal(size=(m, k))
    x0 = rng.random(k)
    b = A @ x0 - rng.random(m)  # x0 is feasible
    r = solve_dense(c, A, b, upper=1.0)
    ref = linprog(c, A_ub=-A, b_ub=-b, bounds=(0, 1), method="highs")
    assert r.status == "optimal"
    assert r.fun == pytest.approx(ref.fun, abs=1e-7)


def test_lp_text_roundtrip():
    inst = gen_random_multirelational(5, 2, 0.3, 0.3, 9)
    for m in (build_ccc_lp(inst), augment_c4(build_ccc_lp(inst))):
        back = import_lp_text(export_lp_text(m))
        assert back.structurally_equal(m)
        assert export_lp_text(back) == export_lp_text(m)


def test_lp_text_rejects_garbage():
    with pytest.raises(LpFormatError):
        import_lp_text("Minimize\n obj: x\nEnd\n")


def test_solution_file_roundtrip():
    inst = gen_random_multirelational(6, 2, 0.3, 0.4, 0)
    sol = solve(augment_c4(build_ccc_lp(inst)))
    back = loads_solution(dumps_solution(sol), inst)
    assert back.c4
    assert np.array_equal(back.vector(), sol.vector())
    assert back.objective == pytest.approx(sol.objective)


def test_parse_values_missing_and_unknown():
    names = var_names(2, 1)
    with pytest.raises(LpFormatError):
        parse_values(f"{names[0]} 0\n", 2, 1)
    with pytest.raises(LpFormatError):
        parse_values("x_bogus 1\n", 2, 1)


def test_external_round_trip(tmp_path):
    inst = gen_random_multirelational(5, 2, 0.3, 0.4, 1)
    m = build_ccc_lp(inst)
    ref = solve(m)
    sol_file = tmp_path / "in.sol"
    sol_file.write_text(dumps_solution(ref))
    got = solve(m, solver="external", lp_out=tmp_path / "m.lp", sol_in=sol_file)
    assert (tmp_path / "m.lp").read_text().startswith("\\ chromacc ccc-lp n=5 L=2 c4=0")
    assert got.objective == pytest.approx(ref.objective)
    with pytest.raises(SolverError):
        solve(m, solver="external", lp_out=tmp_path / "m.lp", command="false")


def test_external_command(tmp_path):
    inst = gen_max_interfering(4, 2)
    m = build_ccc_lp(inst)
    ref = solve(m)
    src = tmp_path / "ready.sol"
    src.write_text(dumps_solution(ref))
    got = solve(m, solver="external", lp_out=tmp_path / "m.lp", command=f"cp {src} {{sol}}")
    assert got.objective == pytest.approx(ref.objective)


def test_validate_detects_each_family():
    inst = CccInstance.from_pair_colors(3, 2, [0, 0, 1])
    sol = solve(augment_c4(build_ccc_lp(inst)))
    assert not validate_solution(inst, sol, with_c4=True)
    bad = LpSolution(3, 2, sol.x_node.copy(), sol.x_pair.copy(), 0.0)
    bad.x_node[0] = [0.0, 0.0]
    rep = validate_solution(inst, bad)
    assert VERTEX in rep.by_family()
    bad = LpSolution(3, 2, np.tile([0.0, 1.0], (3, 1)), np.array([[0.0, 1], [1.0, 1], [0.0, 0]]), 0.0)
    fams = validate_solution(inst, bad, with_c4=True).by_family()
    assert TRIANGLE in fams and METRIC in fams and C4 in fams


def test_tolerance_warning_status():
    inst = gen_max_interfering(4, 2)
    sol = solve(build_ccc_lp(inst), eps_feas=-1.0)
    assert sol.status.value == "tolerance_warning"


@st.composite
def inst_cl(draw):
    n = draw(st.integers(2, 12))
    L = draw(st.integers(1, 4))
    P = n * (n - 1) // 2
    codes = draw(st.lists(st.integers(-1, L - 1), min_size=P, max_size=P))
    a = draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    cols = {k: draw(st.integers(0, L - 1)) for k in set(a)}
    return CccInstance.from_pair_colors(n, L, codes), Clustering(np.array(a), cols)


@settings(max_examples=150, deadline=None)
@given(inst_cl())
def test_integral_encoding_feasible_and_priced(data):
    from chromacc.instances import cost

    inst, cl = data
    sol = integral_encoding(inst, cl)
    assert not validate_solution(inst, sol, with_c4=True, eps_feas=0.0)
    assert sol.objective == pytest.approx(cost(inst, cl))
