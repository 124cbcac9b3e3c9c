"""Finite rational metric spaces and greatest metric amalgamation.

A space is a list of distinct point labels plus a full symmetric matrix of
exact rationals.  All operations are pure; spaces are immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .errors import PreconditionError, StructuralError

ZERO = Fraction(0)


@dataclass(frozen=True)
class Violation:
    """One broken axiom with its witnessing points and offending values."""

    kind: str
    witness: tuple[str, ...]
    detail: str

    def __str__(self) -> str:
        return f"{self.kind} at {self.witness}: {self.detail}"


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Labelled points with a full matrix of exact rational distances."""

    points: tuple[str, ...]
    dist_matrix: tuple[tuple[Fraction, ...], ...]
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if len(set(self.points)) != len(self.points):
            raise StructuralError("duplicate point labels")
        n = len(self.points)
        if len(self.dist_matrix) != n or any(len(row) != n for row in self.dist_matrix):
            raise StructuralError("distance matrix shape does not match point count")
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(self.points)})

    @staticmethod
    def from_dict(points: list[str], dist: dict[tuple[str, str], Fraction]) -> "FiniteMetricSpace":
        """Build from the upper-triangle distances; diagonal and symmetry are filled in."""
        pts = tuple(points)
        n = len(pts)
        rows = [[ZERO] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                key = (pts[i], pts[j])
                alt = (pts[j], pts[i])
                if key in dist:
                    d = Fraction(dist[key])
                elif alt in dist:
                    d = Fraction(dist[alt])
                else:
                    raise StructuralError(f"missing distance for pair {key}")
                rows[i][j] = rows[j][i] = d
        return FiniteMetricSpace(pts, tuple(tuple(r) for r in rows))

    def __len__(self) -> int:
        return len(self.points)

    def has_point(self, p: str) -> bool:
        return p in self._index

    def dist(self, x: str, y: str) -> Fraction:
        try:
            return self.dist_matrix[self._index[x]][self._index[y]]
        except KeyError as exc:
            raise StructuralError(f"unknown point label {exc.args[0]!r}") from None

    def diameter(self) -> Fraction:
        if len(self.points) < 2:
            return ZERO
        return max(self.dist(x, y) for x in self.points for y in self.points)

    def restrict(self, subset: list[str] | tuple[str, ...]) -> "FiniteMetricSpace":
        """Induced subspace on `subset`, keeping the given label order."""
        for p in subset:
            if not self.has_point(p):
                raise StructuralError(f"unknown point label {p!r}")
        pts = tuple(subset)
        rows = tuple(tuple(self.dist(x, y) for y in pts) for x in pts)
        return FiniteMetricSpace(pts, rows)

    def rename(self, mapping: dict[str, str]) -> "FiniteMetricSpace":
        pts = tuple(mapping.get(p, p) for p in self.points)
        return FiniteMetricSpace(pts, self.dist_matrix)


@dataclass(frozen=True)
class TupleMetric:
    """Tuples of fixed arity over a base space, carrying the coordinatewise sum metric."""

    arity: int
    base: FiniteMetricSpace

    def __post_init__(self):
        if self.arity < 1:
            raise StructuralError("arity must be positive")

    def tuples(self) -> list[tuple[str, ...]]:
        return list(product(self.base.points, repeat=self.arity))

    def dist(self, s: tuple[str, ...], t: tuple[str, ...]) -> Fraction:
        if len(s) != self.arity or len(t) != self.arity:
            raise StructuralError("tuple arity mismatch")
        return sum((self.base.dist(a, b) for a, b in zip(s, t)), ZERO)


def validate_metric(space: FiniteMetricSpace) -> ValidationReport:
    """Check all metric axioms, reporting every violated one with a witness."""
    bad: list[Violation] = []
    pts = space.points
    n = len(pts)
    for i in range(n):
        if space.dist_matrix[i][i] != 0:
            bad.append(Violation("nonzero-self-distance", (pts[i],),
                                 f"d={space.dist_matrix[i][i]}"))
    for i in range(n):
        for j in range(i + 1, n):
            dij, dji = space.dist_matrix[i][j], space.dist_matrix[j][i]
            if dij != dji:
                bad.append(Violation("asymmetry", (pts[i], pts[j]), f"{dij} != {dji}"))
            if dij <= 0:
                bad.append(Violation("non-positivity", (pts[i], pts[j]), f"d={dij}"))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if i == j or j == k or i == k:
                    continue
                lhs = space.dist_matrix[i][k]
                rhs = space.dist_matrix[i][j] + space.dist_matrix[j][k]
                if lhs > rhs:
                    bad.append(Violation("triangle", (pts[i], pts[j], pts[k]),
                                         f"{lhs} > {space.dist_matrix[i][j]} + {space.dist_matrix[j][k]}"))
    return ValidationReport(not bad, tuple(bad))


def _check_base(base: FiniteMetricSpace, side: FiniteMetricSpace, name: str) -> None:
    for p in base.points:
        if not side.has_point(p):
            raise PreconditionError(f"base point {p!r} missing from {name}")
    for i, x in enumerate(base.points):
        for y in base.points[i + 1:]:
            if base.dist(x, y) != side.dist(x, y):
                raise PreconditionError(
                    f"base is not isometric in {name}: pair ({x!r}, {y!r}) "
                    f"has {side.dist(x, y)} there but {base.dist(x, y)} in base")


def admissible_interval(left: FiniteMetricSpace, right: FiniteMetricSpace,
                        base: FiniteMetricSpace, x: str, y: str) -> tuple[Fraction, Fraction]:
    """Closed interval of distances between x (left side) and y (right side)
    compatible with every triangle through the common base.

    lo = max_z |d(x,z) - d(z,y)|, hi = min_z d(x,z) + d(z,y) over base points z.
    """
    if len(base) == 0:
        raise PreconditionError("empty base: interval is unbounded above; "
                                "use far-apart joint embedding instead")
    _check_base(base, left, "left")
    _check_base(base, right, "right")
    if not left.has_point(x) or base.has_point(x):
        raise PreconditionError(f"{x!r} must lie in left minus base")
    if not right.has_point(y) or base.has_point(y):
        raise PreconditionError(f"{y!r} must lie in right minus base")
    lo = max(abs(left.dist(x, z) - right.dist(z, y)) for z in base.points)
    hi = min(left.dist(x, z) + right.dist(z, y) for z in base.points)
    return lo, hi


def amalgamate_greatest(left: FiniteMetricSpace, right: FiniteMetricSpace,
                        base: FiniteMetricSpace) -> FiniteMetricSpace:
    """Glue left and right over base, assigning every cross pair the largest
    distance the triangle inequality allows (the hi interval endpoint).

    Labels outside the base that collide between the two sides are renamed
    with ".L"/".R" suffixes so results are reproducible.
    """
    _check_base(base, left, "left")
    _check_base(base, right, "right")
    base_set = set(base.points)
    left_extra = [p for p in left.points if p not in base_set]
    right_extra = [p for p in right.points if p not in base_set]
    collide = set(left_extra) & set(right_extra)
    if collide:
        left = left.rename({p: p + ".L" for p in collide})
        right = right.rename({p: p + ".R" for p in collide})
        left_extra = [p + ".L" if p in collide else p for p in left_extra]
        right_extra = [p + ".R" if p in collide else p for p in right_extra]

    points = tuple(base.points) + tuple(left_extra) + tuple(right_extra)
    dist: dict[tuple[str, str], Fraction] = {}
    for i, p in enumerate(points):
        for q in points[i + 1:]:
            in_left = left.has_point(p) and left.has_point(q)
            in_right = right.has_point(p) and right.has_point(q)
            if in_left:
                d = left.dist(p, q)
            elif in_right:
                d = right.dist(p, q)
            else:
                lx, ry = (p, q) if left.has_point(p) else (q, p)
                _, d = admissible_interval(left, right, base, lx, ry)
            dist[(p, q)] = d
    return FiniteMetricSpace.from_dict(list(points), dist)


def katetov_check(space: FiniteMetricSpace, profile: dict[str, Fraction]) -> Violation | None:
    """Return the first pair breaking |f(x)-f(y)| <= d(x,y) <= f(x)+f(y), or None."""
    for p in space.points:
        if p not in profile:
            return Violation("missing-profile", (p,), "no distance prescribed")
        if profile[p] <= 0:
            return Violation("non-positive-profile", (p,), f"f={profile[p]}")
    pts = space.points
    for i, x in enumerate(pts):
        for y in pts[i + 1:]:
            d = space.dist(x, y)
            fx, fy = profile[x], profile[y]
            if abs(fx - fy) > d:
                return Violation("katetov-lower", (x, y), f"|{fx} - {fy}| > {d}")
            if fx + fy < d:
                return Violation("katetov-upper", (x, y), f"{fx} + {fy} < {d}")
    return None


def one_point_extend(space: FiniteMetricSpace, profile: dict[str, Fraction],
                     label: str) -> FiniteMetricSpace:
    """Adjoin one point at the prescribed distance profile.

    The profile must satisfy the compatibility conditions
    |f(x)-f(y)| <= d(x,y) <= f(x)+f(y); otherwise the extension cannot be a metric.
    """
    if space.has_point(label):
        raise StructuralError(f"duplicate label {label!r}")
    extra = set(profile) - set(space.points)
    if extra:
        raise StructuralError(f"profile mentions unknown points {sorted(extra)}")
    bad = katetov_check(space, profile)
    if bad is not None:
        raise PreconditionError(f"inadmissible profile: {bad}")
    pts = space.points + (label,)
    dist = {}
    for i, x in enumerate(space.points):
        for y in space.points[i + 1:]:
            dist[(x, y)] = space.dist(x, y)
        dist[(x, label)] = profile[x]
    return FiniteMetricSpace.from_dict(list(pts), dist)


def enumerate_embeddings(small: FiniteMetricSpace, big: FiniteMetricSpace) -> list[dict[str, str]]:
    """All distance-preserving injections of `small` into `big`, by backtracking."""
    if len(small) > len(big):
        return []
    out: list[dict[str, str]] = []
    src = small.points

    def extend(k: int, image: dict[str, str], used: set[str]) -> None:
        if k == len(src):
            out.append(dict(image))
            return
        x = src[k]
        for cand in big.points:
            if cand in used:
                continue
            if all(big.dist(cand, image[y]) == small.dist(x, y) for y in src[:k]):
                image[x] = cand
                used.add(cand)
                extend(k + 1, image, used)
                used.discard(cand)
                del image[x]

    extend(0, {}, set())
    return out
