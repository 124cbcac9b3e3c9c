from fractions import Fraction as Q

import pytest

from amalgam.errors import PreconditionError, StructuralError
from amalgam.metric import (
    FiniteMetricSpace,
    TupleMetric,
    admissible_interval,
    amalgamate_greatest,
    enumerate_embeddings,
    one_point_extend,
    validate_metric,
)


def space(points, dist):
    return FiniteMetricSpace.from_dict(points, {k: Q(v) for k, v in dist.items()})


def test_validate_two_points():
    s = space(["a", "b"], {("a", "b"): 1})
    assert validate_metric(s).ok


def test_validate_triangle_violation():
    s = space(["a", "b", "c"], {("a", "b"): 1, ("b", "c"): 1, ("a", "c"): 3})
    rep = validate_metric(s)
    assert not rep.ok
    kinds = {v.kind for v in rep.violations}
    assert "triangle" in kinds
    witnesses = {v.witness for v in rep.violations if v.kind == "triangle"}
    assert ("a", "b", "c") in witnesses


def test_validate_equilateral():
    s = space(["a", "b", "c"], {("a", "b"): 1, ("b", "c"): 1, ("a", "c"): 1})
    assert validate_metric(s).ok


def test_validate_reports_all_violations():
    s = FiniteMetricSpace(("a", "b"), ((Q(0), Q(1)), (Q(2), Q(0))))
    rep = validate_metric(s)
    assert not rep.ok and len(rep.violations) >= 1


def test_malformed_matrix_is_structural():
    with pytest.raises(StructuralError):
        FiniteMetricSpace(("a", "b"), ((Q(0),),))


def test_admissible_interval_single_base():
    base = space(["a"], {})
    left = space(["a", "x"], {("a", "x"): 1})
    right = space(["a", "y"], {("a", "y"): 2})
    assert admissible_interval(left, right, base, "x", "y") == (Q(1), Q(3))


def test_admissible_interval_two_base_points():
    # Both formulas evaluated directly over z in {a, b}.
    base = space(["a", "b"], {("a", "b"): 2})
    left = space(["a", "b", "x"], {("a", "b"): 2, ("a", "x"): 1, ("b", "x"): 3})
    right = space(["a", "b", "y"], {("a", "b"): 2, ("a", "y"): 3, ("b", "y"): 1})
    lo = max(abs(Q(1) - Q(3)), abs(Q(3) - Q(1)))
    hi = min(Q(1) + Q(3), Q(3) + Q(1))
    assert (lo, hi) == (Q(2), Q(4))
    assert admissible_interval(left, right, base, "x", "y") == (lo, hi)


def test_admissible_interval_symmetric_profiles():
    base = space(["a", "b"], {("a", "b"): 2})
    left = space(["a", "b", "x"], {("a", "b"): 2, ("a", "x"): 1, ("b", "x"): 2})
    right = space(["a", "b", "y"], {("a", "b"): 2, ("a", "y"): 1, ("b", "y"): 2})
    lo, hi = admissible_interval(left, right, base, "x", "y")
    assert lo == 0 and hi == 2


def test_admissible_interval_empty_base_rejected():
    base = FiniteMetricSpace((), ())
    left = space(["x"], {})
    right = space(["y"], {})
    with pytest.raises(PreconditionError):
        admissible_interval(left, right, base, "x", "y")


def test_amalgamate_single_base_point():
    base = space(["a"], {})
    left = space(["a", "b"], {("a", "b"): 1})
    right = space(["a", "c"], {("a", "c"): 2})
    out = amalgamate_greatest(left, right, base)
    assert out.dist("b", "c") == 3
    assert validate_metric(out).ok


def test_amalgamate_idempotent():
    s = space(["a", "b"], {("a", "b"): 1})
    out = amalgamate_greatest(s, s, s)
    assert out == s


def test_amalgamate_two_point_base():
    base = space(["a", "b"], {("a", "b"): 2})
    left = space(["a", "b", "x"], {("a", "b"): 2, ("a", "x"): 1, ("b", "x"): 3})
    right = space(["a", "b", "y"], {("a", "b"): 2, ("a", "y"): 3, ("b", "y"): 1})
    out = amalgamate_greatest(left, right, base)
    assert out.dist("x", "y") == 4
    assert validate_metric(out).ok


def test_amalgamate_nonisometric_base_rejected():
    base = space(["a", "b"], {("a", "b"): 2})
    left = space(["a", "b", "x"], {("a", "b"): 1, ("a", "x"): 1, ("b", "x"): 1})
    right = space(["a", "b", "y"], {("a", "b"): 2, ("a", "y"): 1, ("b", "y"): 1})
    with pytest.raises(PreconditionError) as exc:
        amalgamate_greatest(left, right, base)
    assert "'a'" in str(exc.value) and "'b'" in str(exc.value)


def test_amalgamate_renames_collisions():
    base = space(["a"], {})
    left = space(["a", "x"], {("a", "x"): 1})
    right = space(["a", "x"], {("a", "x"): 2})
    out = amalgamate_greatest(left, right, base)
    assert set(out.points) == {"a", "x.L", "x.R"}
    assert out.dist("x.L", "x.R") == 3


def test_one_point_extend_free():
    s = space(["a"], {})
    out = one_point_extend(s, {"a": Q(5)}, "b")
    assert out.dist("a", "b") == 5 and validate_metric(out).ok


def test_one_point_extend_midpoint():
    s = space(["a", "b"], {("a", "b"): 2})
    out = one_point_extend(s, {"a": Q(1), "b": Q(1)}, "m")
    assert validate_metric(out).ok


def test_one_point_extend_katetov_violation():
    s = space(["a", "b"], {("a", "b"): 2})
    with pytest.raises(PreconditionError) as exc:
        one_point_extend(s, {"a": Q(1), "b": Q(4)}, "m")
    assert "katetov" in str(exc.value)


def test_one_point_extend_duplicate_label():
    s = space(["a"], {})
    with pytest.raises(StructuralError):
        one_point_extend(s, {"a": Q(1)}, "a")


def test_one_point_extend_restriction_is_identity():
    s = space(["a", "b", "c"], {("a", "b"): 1, ("b", "c"): 1, ("a", "c"): 2})
    out = one_point_extend(s, {"a": Q(2), "b": Q(1), "c": Q(1)}, "z")
    assert out.restrict(list(s.points)) == s


def test_enumerate_embeddings_singleton():
    one = space(["p"], {})
    tri = space(["a", "b", "c"], {("a", "b"): 1, ("b", "c"): 1, ("a", "c"): 1})
    assert len(enumerate_embeddings(one, tri)) == 3


def test_enumerate_embeddings_symmetry_group():
    tri = space(["a", "b", "c"], {("a", "b"): 1, ("b", "c"): 1, ("a", "c"): 1})
    embs = enumerate_embeddings(tri, tri)
    assert len(embs) == 6
    assert {"a": "a", "b": "b", "c": "c"} in embs


def test_enumerate_embeddings_none():
    pair = space(["p", "q"], {("p", "q"): 5})
    tri = space(["a", "b", "c"], {("a", "b"): 1, ("b", "c"): 1, ("a", "c"): 1})
    assert enumerate_embeddings(pair, tri) == []


def test_tuple_metric_sum():
    s = space(["a", "b"], {("a", "b"): 3})
    tm = TupleMetric(2, s)
    assert tm.dist(("a", "a"), ("b", "b")) == 6
    assert tm.dist(("a", "b"), ("a", "b")) == 0
    assert len(tm.tuples()) == 4
