from fractions import Fraction as Q

from amalgam.lp import LinearProgram, solve_standard


def test_standard_form_basic():
    # min x + y  s.t.  x + 2y = 4, x,y >= 0  -> (0,2), value 2
    res = solve_standard([Q(1), Q(1)], [[Q(1), Q(2)]], [Q(4)])
    assert res.status == "optimal"
    assert res.value == 2
    assert res.solution == [Q(0), Q(2)]


def test_standard_form_infeasible():
    # x = -1 with x >= 0
    res = solve_standard([Q(1)], [[Q(1)]], [Q(-1)])
    assert res.status == "infeasible"


def test_standard_form_unbounded():
    # min -x s.t. 0*x = 0
    res = solve_standard([Q(-1)], [[Q(0)]], [Q(0)])
    assert res.status == "unbounded"


def test_redundant_rows():
    # Duplicate constraint rows must not break phase 1.
    res = solve_standard([Q(1), Q(1)],
                         [[Q(1), Q(1)], [Q(1), Q(1)], [Q(2), Q(2)]],
                         [Q(2), Q(2), Q(4)])
    assert res.status == "optimal"
    assert res.value == 2


def test_exactness_with_awkward_rationals():
    # min 3x + 5y s.t. 7x + 11y = 1; optimum at the cheaper ratio 5/11.
    res = solve_standard([Q(3), Q(5)], [[Q(7), Q(11)]], [Q(1)])
    assert res.status == "optimal"
    assert res.value == min(Q(3, 7), Q(5, 11))


def test_builder_free_vars_and_inequalities():
    # max x + y s.t. x <= 3, y <= 4, x + y >= 1, y free otherwise
    lp = LinearProgram()
    lp.constrain({"x": Q(1)}, "<=", Q(3))
    lp.constrain({"y": Q(1)}, "<=", Q(4))
    lp.constrain({"x": Q(1), "y": Q(1)}, ">=", Q(1))
    lp.maximize({"x": Q(1), "y": Q(1)})
    status, value, point = lp.solve()
    assert status == "optimal"
    assert value == 7
    assert point["x"] == 3 and point["y"] == 4


def test_builder_negative_optimum():
    # min x with x >= -5 (free variable crossing zero)
    lp = LinearProgram()
    lp.constrain({"x": Q(1)}, ">=", Q(-5))
    lp.minimize({"x": Q(1)})
    status, value, point = lp.solve()
    assert status == "optimal" and value == -5 and point["x"] == -5


def test_builder_nonneg_declaration():
    lp = LinearProgram()
    lp.var("x", nonneg=True)
    lp.constrain({"x": Q(1)}, "<=", Q(10))
    lp.minimize({"x": Q(1)})
    status, value, _ = lp.solve()
    assert status == "optimal" and value == 0


def test_degenerate_cycling_guard():
    # Classic Beale-style degenerate instance; Bland's rule must terminate.
    c = [Q(-3, 4), Q(150), Q(-1, 50), Q(6)]
    A = [
        [Q(1, 4), Q(-60), Q(-1, 25), Q(9)],
        [Q(1, 2), Q(-90), Q(-1, 50), Q(3)],
        [Q(0), Q(0), Q(1), Q(0)],
    ]
    # Convert <= rows to equalities with slacks.
    A = [row + [Q(1) if i == j else Q(0) for j in range(3)] for i, row in enumerate(A)]
    c = c + [Q(0)] * 3
    res = solve_standard(c, A, [Q(0), Q(0), Q(1)])
    assert res.status == "optimal"
    assert res.value == Q(-1, 20)
