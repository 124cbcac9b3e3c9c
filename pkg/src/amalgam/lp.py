"""Exact rational linear programming.

A small dense two-phase simplex over `fractions.Fraction` with Bland's
anti-cycling pivot rule.  Everything is exact: no tolerances, no floats.
Problem sizes in this package are tiny (tens of variables), so a dense
tableau is the simplest correct choice.

`solve_standard` handles min c.x, A x = b, x >= 0.  `LinearProgram` is a
builder that converts free variables, inequalities, and maximization into
that standard form and maps the solution back.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import InternalInvariantError

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass
class LPResult:
    status: str                      # "optimal" | "infeasible" | "unbounded"
    value: Fraction | None
    solution: list[Fraction] | None


def _pivot(T: list[list[Fraction]], basis: list[int], row: int, col: int) -> None:
    piv = T[row][col]
    inv = ONE / piv
    T[row] = [v * inv for v in T[row]]
    prow = T[row]
    for r, line in enumerate(T):
        if r != row and line[col] != 0:
            f = line[col]
            T[r] = [a - f * b for a, b in zip(line, prow)]
    basis[row] = col


def _bland(T: list[list[Fraction]], basis: list[int], ncols: int) -> str:
    # Last row holds reduced costs; last column holds rhs / -objective.
    m = len(T) - 1
    while True:
        enter = -1
        for j in range(ncols):
            if T[m][j] < 0:
                enter = j
                break
        if enter < 0:
            return "optimal"
        leave = -1
        best: Fraction | None = None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            return "unbounded"
        _pivot(T, basis, leave, enter)


def solve_standard(c: list[Fraction], A: list[list[Fraction]],
                   b: list[Fraction]) -> LPResult:
    """Minimize c.x subject to A x = b, x >= 0 (all data exact rationals)."""
    m = len(A)
    n = len(c)
    if len(b) != m or any(len(row) != n for row in A):
        raise InternalInvariantError("inconsistent LP dimensions")
    A = [[Fraction(v) for v in row] for row in A]
    b = [Fraction(v) for v in b]
    c = [Fraction(v) for v in c]
    for i in range(m):
        if b[i] < 0:
            A[i] = [-v for v in A[i]]
            b[i] = -b[i]

    # Phase 1: artificial variable per row, minimize their sum.
    T = [A[i] + [ONE if j == i else ZERO for j in range(m)] + [b[i]] for i in range(m)]
    basis = [n + i for i in range(m)]
    cost = [ZERO] * (n + m) + [ZERO]
    for i in range(m):
        cost = [cv - av for cv, av in zip(cost, T[i])]
    for j in range(n, n + m):
        cost[j] = ZERO
    T.append(cost)
    status = _bland(T, basis, n + m)
    if status != "optimal" or T[m][-1] != 0:
        return LPResult("infeasible", None, None)

    # Drive artificials out of the basis; rows that cannot pivot are redundant.
    drop: list[int] = []
    for i in range(m):
        if basis[i] >= n:
            enter = next((j for j in range(n) if T[i][j] != 0), -1)
            if enter < 0:
                drop.append(i)
            else:
                _pivot(T, basis, i, enter)
    if drop:
        T = [row for i, row in enumerate(T[:-1]) if i not in drop] + [T[-1]]
        basis = [bv for i, bv in enumerate(basis) if i not in drop]
        m = len(basis)

    # Phase 2: restore the true objective, priced out against the basis.
    rows = [line[:n] + [line[-1]] for line in T[:m]]
    obj = c + [ZERO]
    for i in range(m):
        f = obj[basis[i]]
        if f != 0:
            obj = [a - f * bv for a, bv in zip(obj, rows[i])]
    rows.append(obj)
    status = _bland(rows, basis, n)
    if status == "unbounded":
        return LPResult("unbounded", None, None)
    x = [ZERO] * n
    for i in range(m):
        x[basis[i]] = rows[i][-1]
    value = sum((cv * xv for cv, xv in zip(c, x)), ZERO)
    return LPResult("optimal", value, x)


class LinearProgram:
    """Incremental builder over named variables; converts to standard form.

    Variables default to free and are split into positive/negative parts.
    Constraints are rows of (coeffs, relation, rhs) with relation in
    {"<=", ">=", "=="}.
    """

    def __init__(self) -> None:
        self._vars: dict[str, bool] = {}      # name -> nonnegative?
        self._rows: list[tuple[dict[str, Fraction], str, Fraction]] = []
        self._objective: dict[str, Fraction] = {}
        self._maximize = False

    def var(self, name: str, nonneg: bool = False) -> str:
        if name in self._vars:
            if self._vars[name] != nonneg:
                raise InternalInvariantError(f"variable {name!r} redeclared differently")
        else:
            self._vars[name] = nonneg
        return name

    def constrain(self, coeffs: dict[str, Fraction], rel: str, rhs: Fraction) -> None:
        if rel not in ("<=", ">=", "=="):
            raise InternalInvariantError(f"bad relation {rel!r}")
        for name in coeffs:
            self.var(name, self._vars.get(name, False))
        self._rows.append(({k: Fraction(v) for k, v in coeffs.items()}, rel, Fraction(rhs)))

    def minimize(self, coeffs: dict[str, Fraction]) -> None:
        self._objective = {k: Fraction(v) for k, v in coeffs.items()}
        self._maximize = False
        for name in coeffs:
            self.var(name, self._vars.get(name, False))

    def maximize(self, coeffs: dict[str, Fraction]) -> None:
        self.minimize(coeffs)
        self._maximize = True

    def solve(self) -> tuple[str, Fraction | None, dict[str, Fraction]]:
        names = sorted(self._vars)
        cols: dict[str, list[int]] = {}
        ncol = 0
        for name in names:
            if self._vars[name]:
                cols[name] = [ncol]
                ncol += 1
            else:
                cols[name] = [ncol, ncol + 1]   # x = pos - neg
                ncol += 2
        A: list[list[Fraction]] = []
        b: list[Fraction] = []
        nslack = sum(1 for _, rel, _ in self._rows if rel != "==")
        total = ncol + nslack
        slack_at = ncol
        for coeffs, rel, rhs in self._rows:
            row = [ZERO] * total
            for name, cv in coeffs.items():
                cs = cols[name]
                row[cs[0]] += cv
                if len(cs) == 2:
                    row[cs[1]] -= cv
            if rel == "<=":
                row[slack_at] = ONE
                slack_at += 1
            elif rel == ">=":
                row[slack_at] = -ONE
                slack_at += 1
            A.append(row)
            b.append(rhs)
        c = [ZERO] * total
        sign = -ONE if self._maximize else ONE
        for name, cv in self._objective.items():
            cs = cols[name]
            c[cs[0]] += sign * cv
            if len(cs) == 2:
                c[cs[1]] -= sign * cv
        res = solve_standard(c, A, b)
        if res.status != "optimal":
            return res.status, None, {}
        assert res.solution is not None and res.value is not None
        point: dict[str, Fraction] = {}
        for name in names:
            cs = cols[name]
            point[name] = res.solution[cs[0]] - (res.solution[cs[1]] if len(cs) == 2 else ZERO)
        value = -res.value if self._maximize else res.value
        return "optimal", value, point
