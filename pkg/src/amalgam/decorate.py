"""Decorated finite rational metric spaces.

Four decoration kinds ride on top of a finite metric space:

* ``age1`` -- finitely many non-negative 1-Lipschitz functions on tuples,
  one per declared arity (distance functions from closed relations);
* ``age2`` -- a 1-Lipschitz retraction ``r`` whose fixed-point set is the
  zero set of a 1-Lipschitz function ``p``;
* ``age3`` -- a finitely-controlled joint-Lipschitz function to a finite
  proxy of a compact space;
* ``age4`` -- an L-Lipschitz point assignment into a finite proxy of a
  Polish target space.

Plain undecorated spaces use the class tag ``"metric"`` so that the chain
machinery can run on bare metric spaces too.

All operations are pure; every constructor output is re-validated.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .errors import InternalInvariantError, PreconditionError, StructuralError
from .metric import (
    FiniteMetricSpace,
    TupleMetric,
    ValidationReport,
    Violation,
    amalgamate_greatest,
    katetov_check,
    one_point_extend,
    validate_metric,
)

ZERO = Fraction(0)
ONE = Fraction(1)

CLASSES = ("metric", "age1", "age2", "age3", "age4")


# ---------------------------------------------------------------------------
# decoration types


@dataclass(frozen=True)
class RelationDecoration:
    """One non-negative tuple function per arity; arities may repeat."""

    arities: tuple[int, ...]
    maps: tuple[dict, ...]          # parallel to arities: tuple -> Fraction

    def __post_init__(self):
        if list(self.arities) != sorted(self.arities) or any(a < 1 for a in self.arities):
            raise StructuralError("arities must be a non-decreasing list of positive integers")
        if len(self.maps) != len(self.arities):
            raise StructuralError("one value map per declared arity is required")


@dataclass(frozen=True)
class RetractDecoration:
    p: dict                          # point -> Fraction
    r: dict                          # point -> point


@dataclass(frozen=True)
class CompactProxy:
    """Finite stand-in for a compact target; its labels form a declared net."""

    space: FiniteMetricSpace
    net_radius: Fraction

    def __post_init__(self):
        if self.net_radius <= 0:
            raise StructuralError("net radius must be positive")
        if not validate_metric(self.space).ok:
            raise StructuralError("proxy space is not a metric")


@dataclass(frozen=True)
class ControlledFunction:
    control_set: tuple[str, ...]
    control_values: dict             # (point, control label) -> Fraction

    def induced(self, proxy: CompactProxy, point: str, label: str) -> Fraction:
        """Total function determined by the control values."""
        best = max(self.control_values[(point, m)] - proxy.space.dist(m, label)
                   for m in self.control_set)
        return max(ZERO, best)


@dataclass(frozen=True)
class TargetProxy:
    """Finite sample of a Polish target with the Lipschitz constant in force."""

    space: FiniteMetricSpace
    lipschitz: Fraction

    def __post_init__(self):
        if self.lipschitz <= 0:
            raise StructuralError("Lipschitz constant must be positive")
        if not validate_metric(self.space).ok:
            raise StructuralError("target proxy space is not a metric")


@dataclass(frozen=True)
class LipschitzAssignment:
    assign: dict                     # point -> target proxy label


@dataclass(frozen=True)
class DecoratedSpace:
    """A finite rational metric space plus at most one decoration."""

    space: FiniteMetricSpace
    klass: str = "metric"
    decoration: object | None = None
    target: object | None = None     # CompactProxy (age3) or TargetProxy (age4)

    def __post_init__(self):
        if self.klass not in CLASSES:
            raise StructuralError(f"unknown class tag {self.klass!r}")
        wants = {"metric": type(None), "age1": RelationDecoration,
                 "age2": RetractDecoration, "age3": ControlledFunction,
                 "age4": LipschitzAssignment}
        if not isinstance(self.decoration, wants[self.klass]):
            raise StructuralError(f"class {self.klass!r} carries the wrong decoration type")
        if self.klass == "age3" and not isinstance(self.target, CompactProxy):
            raise StructuralError("age3 requires a compact proxy target")
        if self.klass == "age4" and not isinstance(self.target, TargetProxy):
            raise StructuralError("age4 requires a target proxy")
        if self.klass in ("metric", "age1", "age2") and self.target is not None:
            raise StructuralError(f"class {self.klass!r} carries no target")

    @property
    def points(self) -> tuple[str, ...]:
        return self.space.points

    def restrict(self, subset: list[str] | tuple[str, ...]) -> "DecoratedSpace":
        sub = self.space.restrict(subset)
        keep = set(subset)
        if self.klass == "metric":
            return DecoratedSpace(sub)
        if self.klass == "age1":
            dec: RelationDecoration = self.decoration
            maps = tuple({t: v for t, v in m.items() if set(t) <= keep} for m in dec.maps)
            return DecoratedSpace(sub, "age1", RelationDecoration(dec.arities, maps))
        if self.klass == "age2":
            dec: RetractDecoration = self.decoration
            for x in subset:
                if dec.r[x] not in keep:
                    raise StructuralError(f"subset not closed under the retraction at {x!r}")
            return DecoratedSpace(sub, "age2", RetractDecoration(
                {x: dec.p[x] for x in subset}, {x: dec.r[x] for x in subset}))
        if self.klass == "age3":
            dec: ControlledFunction = self.decoration
            vals = {(x, m): dec.control_values[(x, m)]
                    for x in subset for m in dec.control_set}
            return DecoratedSpace(sub, "age3",
                                  ControlledFunction(dec.control_set, vals), self.target)
        dec: LipschitzAssignment = self.decoration
        return DecoratedSpace(sub, "age4",
                              LipschitzAssignment({x: dec.assign[x] for x in subset}),
                              self.target)

    def rename(self, mapping: dict[str, str]) -> "DecoratedSpace":
        sp = self.space.rename(mapping)
        f = lambda x: mapping.get(x, x)
        if self.klass == "metric":
            return DecoratedSpace(sp)
        if self.klass == "age1":
            dec: RelationDecoration = self.decoration
            maps = tuple({tuple(f(x) for x in t): v for t, v in m.items()} for m in dec.maps)
            return DecoratedSpace(sp, "age1", RelationDecoration(dec.arities, maps))
        if self.klass == "age2":
            dec: RetractDecoration = self.decoration
            return DecoratedSpace(sp, "age2", RetractDecoration(
                {f(x): v for x, v in dec.p.items()},
                {f(x): f(y) for x, y in dec.r.items()}))
        if self.klass == "age3":
            dec: ControlledFunction = self.decoration
            vals = {(f(x), m): v for (x, m), v in dec.control_values.items()}
            return DecoratedSpace(sp, "age3",
                                  ControlledFunction(dec.control_set, vals), self.target)
        dec: LipschitzAssignment = self.decoration
        return DecoratedSpace(sp, "age4",
                              LipschitzAssignment({f(x): z for x, z in dec.assign.items()}),
                              self.target)


@dataclass(frozen=True)
class LipschitzAssignment:
    assign: dict                     # point -> target proxy label


# ---------------------------------------------------------------------------
# validation


def _validate_age1(space: FiniteMetricSpace, dec: RelationDecoration) -> list[Violation]:
    bad: list[Violation] = []
    for idx, arity in enumerate(dec.arities):
        tm = TupleMetric(arity, space)
        values = dec.maps[idx]
        tuples = tm.tuples()
        for t in tuples:
            if t not in values:
                raise StructuralError(f"relation {idx} misses tuple {t}")
            if values[t] < 0:
                bad.append(Violation("negative-value", t, f"p={values[t]}"))
        for t in values:
            if any(not space.has_point(x) for x in t) or len(t) != arity:
                raise StructuralError(f"relation {idx} mentions bad tuple {t}")
        for i, s in enumerate(tuples):
            for t in tuples[i + 1:]:
                gap = abs(values[s] - values[t])
                d = tm.dist(s, t)
                if gap > d:
                    bad.append(Violation("lipschitz", s + t, f"|dp|={gap} > {d}"))
    return bad


def _validate_age2(space: FiniteMetricSpace, dec: RetractDecoration) -> list[Violation]:
    bad: list[Violation] = []
    for x in space.points:
        if x not in dec.p or x not in dec.r:
            raise StructuralError(f"retraction data missing point {x!r}")
        if not space.has_point(dec.r[x]):
            raise StructuralError(f"retraction sends {x!r} outside the space")
        if dec.p[x] < 0:
            bad.append(Violation("negative-value", (x,), f"p={dec.p[x]}"))
    for x in space.points:
        rx = dec.r[x]
        if dec.r[rx] != rx:
            bad.append(Violation("not-idempotent", (x,), f"r(r({x}))={dec.r[rx]} != r({x})={rx}"))
        if (rx == x) != (dec.p[x] == 0):
            bad.append(Violation("fixed-set-mismatch", (x,),
                                 f"r fixes iff p vanishes fails: r({x})={rx}, p({x})={dec.p[x]}"))
    pts = space.points
    for i, x in enumerate(pts):
        for y in pts[i + 1:]:
            d = space.dist(x, y)
            if abs(dec.p[x] - dec.p[y]) > d:
                bad.append(Violation("lipschitz-p", (x, y), f"|dp| > {d}"))
            if space.dist(dec.r[x], dec.r[y]) > d:
                bad.append(Violation("lipschitz-r", (x, y),
                                     f"d(r{x},r{y})={space.dist(dec.r[x], dec.r[y])} > {d}"))
    return bad


def _validate_age3(space: FiniteMetricSpace, dec: ControlledFunction,
                   proxy: CompactProxy) -> list[Violation]:
    bad: list[Violation] = []
    if not dec.control_set:
        raise StructuralError("empty control set")
    for m in dec.control_set:
        if not proxy.space.has_point(m):
            raise StructuralError(f"control label {m!r} is not in the proxy")
    for x in space.points:
        for m in dec.control_set:
            if (x, m) not in dec.control_values:
                raise StructuralError(f"missing control value at ({x!r}, {m!r})")
            if dec.control_values[(x, m)] < 0:
                bad.append(Violation("negative-value", (x, m), "f < 0"))
    labels = proxy.space.points
    total = {(x, q): dec.control_values[(x, q)] if q in dec.control_set
             else dec.induced(proxy, x, q)
             for x in space.points for q in labels}
    for x in space.points:
        for m in dec.control_set:
            if dec.induced(proxy, x, m) != dec.control_values[(x, m)]:
                bad.append(Violation("control-inconsistency", (x, m),
                                     f"induced {dec.induced(proxy, x, m)} != stored "
                                     f"{dec.control_values[(x, m)]}"))
    items = [(x, q) for x in space.points for q in labels]
    for i, (x, q) in enumerate(items):
        for (y, s) in items[i + 1:]:
            bound = space.dist(x, y) + proxy.space.dist(q, s)
            if abs(total[(x, q)] - total[(y, s)]) > bound:
                bad.append(Violation("joint-lipschitz", (x, q, y, s),
                                     f"|df| > {bound}"))
    return bad


def _validate_age4(space: FiniteMetricSpace, dec: LipschitzAssignment,
                   proxy: TargetProxy) -> list[Violation]:
    bad: list[Violation] = []
    for x in space.points:
        if x not in dec.assign:
            raise StructuralError(f"assignment missing point {x!r}")
        if not proxy.space.has_point(dec.assign[x]):
            raise StructuralError(f"assignment of {x!r} is not a proxy label")
    pts = space.points
    for i, x in enumerate(pts):
        for y in pts[i + 1:]:
            dz = proxy.space.dist(dec.assign[x], dec.assign[y])
            if dz > proxy.lipschitz * space.dist(x, y):
                bad.append(Violation("lipschitz-assignment", (x, y),
                                     f"{dz} > L*{space.dist(x, y)}"))
    return bad


def validate_decorated(ds: DecoratedSpace) -> ValidationReport:
    """Metric axioms plus the class-specific decoration laws, all witnesses reported."""
    rep = validate_metric(ds.space)
    bad = list(rep.violations)
    if ds.klass == "age1":
        bad += _validate_age1(ds.space, ds.decoration)
    elif ds.klass == "age2":
        bad += _validate_age2(ds.space, ds.decoration)
    elif ds.klass == "age3":
        bad += _validate_age3(ds.space, ds.decoration, ds.target)
    elif ds.klass == "age4":
        bad += _validate_age4(ds.space, ds.decoration, ds.target)
    return ValidationReport(not bad, tuple(bad))


def _require_valid(ds: DecoratedSpace, name: str) -> None:
    rep = validate_decorated(ds)
    if not rep.ok:
        raise PreconditionError(f"{name} is not a valid {ds.klass} structure: "
                                + "; ".join(str(v) for v in rep.violations[:3]))


# ---------------------------------------------------------------------------
# greatest 1-Lipschitz extension


def greatest_lipschitz_extension(values: dict, items, dist) -> dict:
    """Extend `values` (on a subset) to the largest 1-Lipschitz function on `items`.

    The extension at t is min over sources s of values[s] + dist(t, s); it
    reproduces the inputs and dominates every other 1-Lipschitz extension.
    """
    sources = list(values)
    if not sources:
        raise PreconditionError("cannot extend from an empty source set")
    for i, s in enumerate(sources):
        for t in sources[i + 1:]:
            if abs(values[s] - values[t]) > dist(s, t):
                raise PreconditionError(
                    f"input values are not 1-Lipschitz: |{values[s]} - {values[t]}| "
                    f"> {dist(s, t)} at ({s}, {t})")
    return {t: min(values[s] + dist(t, s) for s in sources) for t in items}


def lipschitz_extend_greatest(values: dict, ambient) -> dict:
    """Spec surface: ambient is a FiniteMetricSpace (points) or TupleMetric (tuples)."""
    if isinstance(ambient, FiniteMetricSpace):
        return greatest_lipschitz_extension(values, ambient.points, ambient.dist)
    if isinstance(ambient, TupleMetric):
        return greatest_lipschitz_extension(values, ambient.tuples(), ambient.dist)
    raise StructuralError("ambient must be a metric space or a tuple metric")


# ---------------------------------------------------------------------------
# decorated amalgamation


def _check_same_class(*spaces: DecoratedSpace) -> None:
    klass = spaces[0].klass
    if any(s.klass != klass for s in spaces):
        raise PreconditionError("class mismatch between decorated spaces")
    targets = {id(None)}
    for s in spaces:
        if s.target is not None:
            targets.add(None)
    tgt = spaces[0].target
    if any(s.target != tgt for s in spaces):
        raise PreconditionError("decorated spaces disagree on the shared target proxy")


def _decoration_agrees_on_base(side: DecoratedSpace, base: DecoratedSpace, name: str) -> None:
    restricted = side.restrict(list(base.points))
    if restricted.decoration != base.decoration:
        raise PreconditionError(f"decoration of {name} restricted to the base "
                                f"differs from the base decoration")


def amalgamate_decorated(left: DecoratedSpace, right: DecoratedSpace,
                         base: DecoratedSpace) -> DecoratedSpace:
    """Greatest metric amalgam with the canonical decoration extension.

    Tuple functions (age1) extend by the greatest 1-Lipschitz extension from
    the union of both sides; retractions and assignments take union maps.
    """
    _check_same_class(left, right, base)
    _require_valid(base, "base")
    _require_valid(left, "left")
    _require_valid(right, "right")

    base_set = set(base.points)
    collide = (set(left.points) - base_set) & (set(right.points) - base_set)
    if collide:
        left = left.rename({p: p + ".L" for p in collide})
        right = right.rename({p: p + ".R" for p in collide})

    _decoration_agrees_on_base(left, base, "left")
    _decoration_agrees_on_base(right, base, "right")

    space = amalgamate_greatest(left.space, right.space, base.space)

    if base.klass == "metric":
        out = DecoratedSpace(space)
    elif base.klass == "age1":
        dl: RelationDecoration = left.decoration
        dr: RelationDecoration = right.decoration
        if dl.arities != dr.arities:
            raise PreconditionError("relation arities differ between the sides")
        maps = []
        for idx, arity in enumerate(dl.arities):
            seed = dict(dl.maps[idx])
            seed.update(dr.maps[idx])
            tm = TupleMetric(arity, space)
            maps.append(greatest_lipschitz_extension(seed, tm.tuples(), tm.dist))
        out = DecoratedSpace(space, "age1", RelationDecoration(dl.arities, tuple(maps)))
    elif base.klass == "age2":
        dl, dr = left.decoration, right.decoration
        p = dict(dl.p)
        p.update(dr.p)
        r = dict(dl.r)
        r.update(dr.r)
        out = DecoratedSpace(space, "age2", RetractDecoration(p, r))
    elif base.klass == "age3":
        dl, dr = left.decoration, right.decoration
        if dl.control_set != dr.control_set:
            raise PreconditionError("control sets differ between the sides")
        vals = dict(dl.control_values)
        vals.update(dr.control_values)
        out = DecoratedSpace(space, "age3", ControlledFunction(dl.control_set, vals),
                             base.target)
    else:
        dl, dr = left.decoration, right.decoration
        assign = dict(dl.assign)
        assign.update(dr.assign)
        out = DecoratedSpace(space, "age4", LipschitzAssignment(assign), base.target)

    rep = validate_decorated(out)
    if not rep.ok:
        raise InternalInvariantError("amalgam of valid structures failed validation: "
                                     + str(rep.violations[0]))
    return out


def joint_embed_far_apart(a: DecoratedSpace, b: DecoratedSpace) -> DecoratedSpace:
    """Disjoint union with all cross distances equal to 2M, M = 1 + max of the
    diameters and whatever the decoration needs across the gap."""
    if len(a.points) == 0:
        return b
    if len(b.points) == 0:
        return a
    _check_same_class(a, b)
    _require_valid(a, "first structure")
    _require_valid(b, "second structure")
    collide = set(a.points) & set(b.points)
    if collide:
        a = a.rename({p: p + ".L" for p in collide})
        b = b.rename({p: p + ".R" for p in collide})

    need = ZERO
    if a.klass == "age1":
        da, db = a.decoration, b.decoration
        if da.arities != db.arities:
            raise PreconditionError("relation arities differ")
        for idx in range(len(da.arities)):
            for s, vs in da.maps[idx].items():
                for t, vt in db.maps[idx].items():
                    need = max(need, abs(vs - vt))
    elif a.klass == "age2":
        for x in a.points:
            for y in b.points:
                need = max(need, abs(a.decoration.p[x] - b.decoration.p[y]))
    elif a.klass == "age3":
        if a.decoration.control_set != b.decoration.control_set:
            raise PreconditionError("control sets differ")
        for x in a.points:
            for y in b.points:
                for m in a.decoration.control_set:
                    need = max(need, abs(a.decoration.control_values[(x, m)]
                                         - b.decoration.control_values[(y, m)]))
    elif a.klass == "age4":
        proxy: TargetProxy = a.target
        for x in a.points:
            for y in b.points:
                dz = proxy.space.dist(a.decoration.assign[x], b.decoration.assign[y])
                need = max(need, dz / proxy.lipschitz)

    m_const = ONE + max(a.space.diameter(), b.space.diameter(), need)
    cross = 2 * m_const
    points = list(a.points) + list(b.points)
    dist = {}
    for i, x in enumerate(points):
        for y in points[i + 1:]:
            if a.space.has_point(x) and a.space.has_point(y):
                dist[(x, y)] = a.space.dist(x, y)
            elif b.space.has_point(x) and b.space.has_point(y):
                dist[(x, y)] = b.space.dist(x, y)
            else:
                dist[(x, y)] = cross
    space = FiniteMetricSpace.from_dict(points, dist)

    if a.klass == "metric":
        out = DecoratedSpace(space)
    elif a.klass == "age1":
        da, db = a.decoration, b.decoration
        maps = []
        for idx, arity in enumerate(da.arities):
            seed = dict(da.maps[idx])
            seed.update(db.maps[idx])
            tm = TupleMetric(arity, space)
            maps.append(greatest_lipschitz_extension(seed, tm.tuples(), tm.dist))
        out = DecoratedSpace(space, "age1", RelationDecoration(da.arities, tuple(maps)))
    elif a.klass == "age2":
        p = dict(a.decoration.p)
        p.update(b.decoration.p)
        r = dict(a.decoration.r)
        r.update(b.decoration.r)
        out = DecoratedSpace(space, "age2", RetractDecoration(p, r))
    elif a.klass == "age3":
        vals = dict(a.decoration.control_values)
        vals.update(b.decoration.control_values)
        out = DecoratedSpace(space, "age3",
                             ControlledFunction(a.decoration.control_set, vals), a.target)
    else:
        assign = dict(a.decoration.assign)
        assign.update(b.decoration.assign)
        out = DecoratedSpace(space, "age4", LipschitzAssignment(assign), a.target)

    rep = validate_decorated(out)
    if not rep.ok:
        raise InternalInvariantError("far-apart join failed validation: "
                                     + str(rep.violations[0]))
    return out


# ---------------------------------------------------------------------------
# almost-one-point extension


@dataclass(frozen=True)
class ExtensionDescriptor:
    """Abstract one-point extension of a decorated space.

    `profile` prescribes the distances from the new point to every existing
    point.  The decoration payload depends on the class:

    * age1: `rel_values[i]` gives the tuple-function values for every tuple
      over (existing points + new point) that mentions the new point;
    * age2: `retract_to` is an existing label or `new_label` itself, and
      `p_value` the function value at the new point;
    * age3: `control` maps each control label to the new point's value;
    * age4: `assign_label` is a proxy point; `assign_in_sample=False` marks
      it as a stand-in for an abstract target outside the sampled dense set.
    """

    new_label: str
    profile: dict
    klass: str = "metric"
    rel_values: tuple = ()
    retract_to: str | None = None
    p_value: Fraction | None = None
    control: dict | None = None
    assign_label: str | None = None
    assign_in_sample: bool = True

    def canonical(self) -> tuple:
        prof = tuple(sorted((k, v) for k, v in self.profile.items()))
        extra: tuple = ()
        if self.klass == "age1":
            extra = tuple(tuple(sorted(m.items())) for m in self.rel_values)
        elif self.klass == "age2":
            extra = (self.retract_to, self.p_value)
        elif self.klass == "age3":
            extra = tuple(sorted(self.control.items()))
        elif self.klass == "age4":
            extra = (self.assign_label, self.assign_in_sample)
        return (self.klass, prof, extra)


def realize_descriptor(ds: DecoratedSpace, desc: ExtensionDescriptor) -> DecoratedSpace:
    """Concrete one-point extension of `ds` exactly matching the descriptor."""
    if desc.klass != ds.klass:
        raise PreconditionError("descriptor class does not match the space")
    space = one_point_extend(ds.space, desc.profile, desc.new_label)
    nl = desc.new_label
    if ds.klass == "metric":
        out = DecoratedSpace(space)
    elif ds.klass == "age1":
        dec: RelationDecoration = ds.decoration
        maps = []
        for idx, arity in enumerate(dec.arities):
            m = dict(dec.maps[idx])
            for t in product(space.points, repeat=arity):
                if nl in t:
                    if t not in desc.rel_values[idx]:
                        raise StructuralError(f"descriptor misses tuple {t}")
                    m[t] = desc.rel_values[idx][t]
            maps.append(m)
        out = DecoratedSpace(space, "age1", RelationDecoration(dec.arities, tuple(maps)))
    elif ds.klass == "age2":
        dec = ds.decoration
        p = dict(dec.p)
        r = dict(dec.r)
        p[nl] = desc.p_value
        r[nl] = desc.retract_to if desc.retract_to != nl else nl
        out = DecoratedSpace(space, "age2", RetractDecoration(p, r))
    elif ds.klass == "age3":
        dec = ds.decoration
        vals = dict(dec.control_values)
        for m in dec.control_set:
            if m not in desc.control:
                raise StructuralError(f"descriptor misses control label {m!r}")
            vals[(nl, m)] = desc.control[m]
        out = DecoratedSpace(space, "age3", ControlledFunction(dec.control_set, vals),
                             ds.target)
    else:
        dec = ds.decoration
        assign = dict(dec.assign)
        assign[nl] = desc.assign_label
        out = DecoratedSpace(space, "age4", LipschitzAssignment(assign), ds.target)
    return out


def _perturbed_profile(ds: DecoratedSpace, desc: ExtensionDescriptor,
                       eps: Fraction) -> tuple[dict, Fraction]:
    """Replace the abstract profile f by strictly larger rationals q.

    Points are sorted by decreasing f and receive staggered midpoint offsets
    (2j-1)*e/(2n).  The stagger scale e = min(eps, slack) is capped by the
    pairwise slack min d(x,y) + |f(x)-f(y)| so the triangle inequalities
    survive even when eps dwarfs the distances, and (age2, new fixed point)
    by min f(a) - f(r(a)) so the retraction stays 1-Lipschitz.  Returns the
    new profile and the minimal gap min(q - f).
    """
    space = ds.space
    f = desc.profile
    fixed_first = (ds.klass == "age2" and desc.retract_to == desc.new_label)

    def sort_key(x: str):
        if fixed_first:
            return (-f[x], 0 if ds.decoration.r[x] == x else 1, x)
        return (-f[x], x)

    order = sorted(space.points, key=sort_key)
    n = len(order)
    slack = eps
    for i, x in enumerate(order):
        for y in order[i + 1:]:
            slack = min(slack, space.dist(x, y) + abs(f[x] - f[y]))
    if fixed_first:
        for x in order:
            rx = ds.decoration.r[x]
            if f[rx] < f[x]:
                slack = min(slack, f[x] - f[rx])
    scale = min(eps, slack)
    if scale <= 0:
        raise InternalInvariantError("non-positive stagger scale")
    q = {}
    for j, x in enumerate(order, start=1):
        q[x] = f[x] + Fraction(2 * j - 1, 2 * n) * scale
    gap = min(q[x] - f[x] for x in order)
    return q, gap


def almost_one_point_extend(ds: DecoratedSpace, desc: ExtensionDescriptor,
                            eps: Fraction) -> DecoratedSpace:
    """Realize an abstract one-point extension up to eps, entirely in rationals.

    Every new distance strictly exceeds the abstract one and differs from it
    by less than eps; decoration values at the new point are copied (left
    interval endpoints), except that an age4 assignment marked as outside
    the sampled set is replaced by a proxy label within L * (minimal gap).
    """
    if eps <= 0:
        raise PreconditionError("eps must be positive")
    if len(ds.points) == 0:
        raise PreconditionError("cannot almost-extend the empty structure")
    _require_valid(ds, "structure")
    abstract = realize_descriptor(ds, desc)
    rep = validate_decorated(abstract)
    if not rep.ok:
        raise PreconditionError("descriptor violates the class axioms: "
                                + str(rep.violations[0]))

    q, gap = _perturbed_profile(ds, desc, eps)

    new_desc = desc
    if ds.klass == "age4":
        proxy: TargetProxy = ds.target
        if not desc.assign_in_sample:
            threshold = proxy.lipschitz * gap
            candidates = sorted(
                (proxy.space.dist(z, desc.assign_label), z)
                for z in proxy.space.points if z != desc.assign_label)
            choice = next((z for d, z in candidates if d < threshold), None)
            if choice is None:
                raise PreconditionError(
                    "proxy resolution insufficient: no sampled target point within "
                    f"L*delta = {threshold} of the abstract value")
            new_desc = ExtensionDescriptor(desc.new_label, desc.profile, "age4",
                                           assign_label=choice)

    concrete = ExtensionDescriptor(
        new_desc.new_label, q, new_desc.klass,
        rel_values=_retuple_rel_values(desc, ds) if ds.klass == "age1" else (),
        retract_to=new_desc.retract_to, p_value=new_desc.p_value,
        control=new_desc.control, assign_label=new_desc.assign_label,
        assign_in_sample=True)
    out = realize_descriptor(ds, concrete)
    rep = validate_decorated(out)
    if not rep.ok:
        raise InternalInvariantError("almost-extension failed validation: "
                                     + str(rep.violations[0]))
    return out


def _retuple_rel_values(desc: ExtensionDescriptor, ds: DecoratedSpace) -> tuple:
    # Values are copied verbatim; tuples keep the same labels since the new
    # point keeps its label, only its distances moved.
    return desc.rel_values
