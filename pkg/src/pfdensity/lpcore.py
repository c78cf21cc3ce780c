"""The divisor-lattice linear programs and an exact rational simplex.

Variable names are strings so models round-trip through the text format:
``a12`` is alpha_12 in the primal, ``b12`` is beta_12 and ``b2_6`` is
beta_{2,6} in the dual. Constraint names mirror the dual variable they pair
with: ``cb12`` / ``cb2_6`` in the primal, ``ca12`` in the dual.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .arith import Factorization, arithmetic_functions, auxiliary_modulus, factorize, phi_ratio

LP_VARIABLE_CAP = 5000


class LpSizeError(ValueError):
    pass


class InfeasibleAssignmentError(ValueError):
    def __init__(self, constraint: str, detail: str = ""):
        self.constraint = constraint
        super().__init__(f"constraint {constraint} violated{': ' + detail if detail else ''}")


class TightnessError(ValueError):
    def __init__(self, constraint: str, slack: Fraction):
        self.constraint = constraint
        self.slack = slack
        super().__init__(f"constraint {constraint} not tight (slack {slack})")


def alpha(u: int) -> str:
    return f"a{u}"


def beta(u: int) -> str:
    return f"b{u}"


def beta_pair(u: int, v: int) -> str:
    u, v = min(u, v), max(u, v)
    return f"b{u}_{v}"


@dataclass(frozen=True)
class Constraint:
    name: str
    coeffs: Mapping[str, Fraction]
    sense: str  # "<=", ">=" or "="
    rhs: Fraction

    def lhs(self, x: Mapping[str, Fraction]) -> Fraction:
        return sum((c * x.get(v, 0) for v, c in self.coeffs.items()), Fraction(0))

    def satisfied(self, x: Mapping[str, Fraction]) -> bool:
        val = self.lhs(x)
        if self.sense == "<=":
            return val <= self.rhs
        if self.sense == ">=":
            return val >= self.rhs
        return val == self.rhs


@dataclass(frozen=True)
class LpModel:
    """Maximize or minimize a linear objective over nonnegative variables."""

    kind: str
    n: int
    sense: str  # "max" or "min"
    variables: tuple[str, ...]
    objective: Mapping[str, Fraction]
    constraints: tuple[Constraint, ...]

    def evaluate(self, x: Mapping[str, Fraction]) -> Fraction:
        return sum((c * x.get(v, 0) for v, c in self.objective.items()), Fraction(0))

    def violations(self, x: Mapping[str, Fraction]) -> list[str]:
        """Names of violated constraints; negative variables are reported as ``v>=0``."""
        bad = [f"{v}>=0" for v in self.variables if x.get(v, 0) < 0]
        bad += [c.name for c in self.constraints if not c.satisfied(x)]
        unknown = set(x) - set(self.variables)
        if unknown:
            bad.append(f"unknown variables {sorted(unknown)}")
        return bad

    def is_feasible(self, x: Mapping[str, Fraction]) -> bool:
        return not self.violations(x)


def divisors_above_one(n: int) -> list[int]:
    return factorize(n).divisors()[1:]


def admissible_pairs(n: int) -> list[tuple[int, int]]:
    """Unordered pairs {u, v}, 1 < u <= v, uv | n, ordered by (min, max)."""
    divs = divisors_above_one(n)
    return [(u, v) for i, u in enumerate(divs) for v in divs[i:] if n % (u * v) == 0]


def delta_counts(n: int) -> tuple[int, int]:
    """(delta_1(n), delta_2(n))."""
    return len(divisors_above_one(n)), len(admissible_pairs(n))


def build_primal(n: int) -> LpModel:
    """max sum alpha_u/u s.t. alpha_u <= 1 and alpha_u + alpha_v + alpha_uv <= 2."""
    if n < 2:
        raise ValueError("build_primal needs n >= 2")
    divs = divisors_above_one(n)
    cons = [Constraint(f"c{beta(u)}", {alpha(u): Fraction(1)}, "<=", Fraction(1)) for u in divs]
    for u, v in admissible_pairs(n):
        coeffs: dict[str, Fraction] = {}
        for w in (u, v, u * v):
            coeffs[alpha(w)] = coeffs.get(alpha(w), Fraction(0)) + 1
        cons.append(Constraint(f"c{beta_pair(u, v)}", coeffs, "<=", Fraction(2)))
    return LpModel(
        "primal",
        n,
        "max",
        tuple(alpha(u) for u in divs),
        {alpha(u): Fraction(1, u) for u in divs},
        tuple(cons),
    )


def build_dual(n: int) -> LpModel:
    """min sum beta_u + 2 sum beta_{u,v} s.t. one covering row C(alpha_u) per u.

    The row for u collects beta_u, every beta_{v,w} with vw = u, and every
    beta_{u,v} with uv | n, the last counted twice when v = u.
    """
    if n < 2:
        raise ValueError("build_dual needs n >= 2")
    divs = divisors_above_one(n)
    pairs = admissible_pairs(n)
    variables = [beta(u) for u in divs] + [beta_pair(u, v) for u, v in pairs]
    objective = {beta(u): Fraction(1) for u in divs}
    objective.update({beta_pair(u, v): Fraction(2) for u, v in pairs})
    cons = []
    for u in divs:
        coeffs = {beta(u): Fraction(1)}
        for v, w in pairs:
            if v * w == u:
                coeffs[beta_pair(v, w)] = Fraction(1)
        for v in divs:
            if n % (u * v) == 0:
                name = beta_pair(u, v)
                coeffs[name] = coeffs.get(name, Fraction(0)) + (2 if v == u else 1)
        cons.append(Constraint(f"c{alpha(u)}", coeffs, ">=", Fraction(1, u)))
    return LpModel("dual", n, "min", tuple(variables), objective, tuple(cons))


# --- exact simplex -----------------------------------------------------------


@dataclass
class LpSolution:
    status: str  # "optimal", "infeasible" or "unbounded"
    assignment: dict[str, Fraction]
    objective_value: Fraction | None
    basis: tuple[str, ...]
    pivot_count: int

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "objective": None if self.objective_value is None else str(self.objective_value),
            "assignment": {v: str(x) for v, x in self.assignment.items()},
            "basis": list(self.basis),
            "pivots": self.pivot_count,
        }


class _Row:
    """A tableau row stored as integers over one positive denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: list[int], den: int):
        g = math.gcd(den, *num)
        if g > 1:
            num = [x // g for x in num]
            den //= g
        self.num = num
        self.den = den


def _int_row(values: list[Fraction]) -> _Row:
    den = math.lcm(*(v.denominator for v in values)) if values else 1
    return _Row([int(v * den) for v in values], den)


def _eliminate(row: _Row, piv: _Row, s: int) -> _Row:
    """row - row[s] * piv, where piv[s] == 1 (as a value)."""
    a = row.num[s]
    if a == 0:
        return row
    p = piv.num[s]  # piv value at s is p / piv.den == 1
    # row/rd - (a/rd) * piv/pd  ->  (row*pd - a*piv) / (rd*pd), with pd == p
    num = [x * p - a * y for x, y in zip(row.num, piv.num)]
    return _Row(num, row.den * p)


def _pivot(rows: list[_Row], r: int, s: int) -> None:
    piv = rows[r]
    p = piv.num[s]
    if p < 0:
        piv = _Row([-x for x in piv.num], -p)
    else:
        piv = _Row(piv.num, p)
    # now piv.num[s] == piv.den, i.e. value 1
    rows[r] = piv
    for i, row in enumerate(rows):
        if i != r and row.num[s]:
            rows[i] = _eliminate(row, piv, s)


def solve(model: LpModel, max_vars: int = LP_VARIABLE_CAP) -> LpSolution:
    """Two-phase primal simplex over exact rationals with Bland's rule.

    Columns are structural variables in model order, then one slack or
    surplus per inequality, then artificials; Bland's rule picks the lowest
    eligible column and breaks ratio ties by lowest basic column, so the
    pivot sequence is a deterministic function of the model.
    """
    nvar = len(model.variables)
    if nvar > max_vars:
        raise LpSizeError(f"{nvar} variables exceeds cap {max_vars}")
    index = {v: j for j, v in enumerate(model.variables)}
    m = len(model.constraints)

    names = list(model.variables)
    slack_col: dict[int, int] = {}
    art_col: dict[int, int] = {}
    rows_data: list[tuple[dict[int, Fraction], str, Fraction]] = []
    for i, c in enumerate(model.constraints):
        coeffs = {index[v]: Fraction(a) for v, a in c.coeffs.items() if a}
        sense, rhs = c.sense, Fraction(c.rhs)
        if rhs < 0:
            coeffs = {j: -a for j, a in coeffs.items()}
            rhs = -rhs
            sense = {"<=": ">=", ">=": "<=", "=": "="}[sense]
        rows_data.append((coeffs, sense, rhs))
        if sense != "=":
            slack_col[i] = len(names)
            names.append(f"s_{c.name}")
    for i, (_, sense, _) in enumerate(rows_data):
        if sense != "<=":
            art_col[i] = len(names)
            names.append(f"r_{model.constraints[i].name}")
    ncol = len(names)
    rhs_col = ncol

    rows: list[_Row] = []
    basis: list[int] = []
    for i, (coeffs, sense, rhs) in enumerate(rows_data):
        vals = [Fraction(0)] * (ncol + 1)
        for j, a in coeffs.items():
            vals[j] = a
        if sense == "<=":
            vals[slack_col[i]] = Fraction(1)
            basis.append(slack_col[i])
        else:
            if sense == ">=":
                vals[slack_col[i]] = Fraction(-1)
            vals[art_col[i]] = Fraction(1)
            basis.append(art_col[i])
        vals[rhs_col] = rhs
        rows.append(_int_row(vals))

    sign = 1 if model.sense == "max" else -1
    obj = [Fraction(0)] * (ncol + 1)
    for v, c in model.objective.items():
        obj[index[v]] = -sign * Fraction(c)
    phase1 = [Fraction(0)] * (ncol + 1)
    for i in art_col:
        row = rows[i]
        for j in range(ncol + 1):
            if j not in art_col.values():
                phase1[j] -= Fraction(row.num[j], row.den)
    rows.append(_int_row(obj))
    rows.append(_int_row(phase1))
    OBJ, PH1 = m, m + 1
    pivots = 0

    def run(zrow: int, allowed: list[bool]) -> str:
        nonlocal pivots
        while True:
            z = rows[zrow].num
            s = next((j for j in range(ncol) if allowed[j] and z[j] < 0), None)
            if s is None:
                return "optimal"
            best = None
            for i in range(len(basis)):
                a = rows[i].num[s]
                if a > 0:
                    ratio = Fraction(rows[i].num[rhs_col], a)
                    key = (ratio, basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return "unbounded"
            r = best[1]
            _pivot(rows, r, s)
            basis[r] = s
            pivots += 1

    allowed = [True] * ncol
    if art_col:
        run(PH1, allowed)
        if rows[PH1].num[rhs_col] != 0:
            return LpSolution("infeasible", {}, None, (), pivots)
        arts = set(art_col.values())
        # drive zero-level artificials out of the basis, dropping redundant rows
        i = 0
        while i < len(basis):
            if basis[i] in arts:
                s = next((j for j in range(ncol) if j not in arts and rows[i].num[j]), None)
                if s is None:
                    del rows[i]
                    del basis[i]
                    OBJ -= 1
                    PH1 -= 1
                    continue
                _pivot(rows, i, s)
                basis[i] = s
                pivots += 1
            i += 1
        for j in arts:
            allowed[j] = False
    status = run(OBJ, allowed)
    if status == "unbounded":
        return LpSolution("unbounded", {}, None, tuple(names[b] for b in basis), pivots)
    x = {v: Fraction(0) for v in model.variables}
    for i, b in enumerate(basis):
        if b < nvar:
            x[model.variables[b]] = Fraction(rows[i].num[rhs_col], rows[i].den)
    value = model.evaluate(x)
    zval = Fraction(rows[OBJ].num[rhs_col], rows[OBJ].den)
    if zval != sign * value:  # pragma: no cover - internal consistency
        raise ArithmeticError("objective row disagrees with assignment")
    return LpSolution("optimal", x, value, tuple(names[b] for b in basis), pivots)


_OPT_CACHE: dict[int, Fraction] = {}


def primal_optimum(n: int) -> Fraction:
    """L_P^opt(n), with L_P^opt(1) = 0 for the empty program."""
    if n == 1:
        return Fraction(0)
    if n not in _OPT_CACHE:
        sol = solve(build_primal(n))
        _OPT_CACHE[n] = sol.objective_value
    return _OPT_CACHE[n]


# --- duality checks ----------------------------------------------------------


@dataclass(frozen=True)
class WeakDuality:
    holds: bool
    gap: Fraction
    primal_value: Fraction
    dual_value: Fraction


def _require_feasible(model: LpModel, x: Mapping[str, Fraction]) -> None:
    bad = model.violations(x)
    if bad:
        raise InfeasibleAssignmentError(bad[0], f"{model.kind} assignment for n={model.n}")


def check_weak_duality(
    primal_feasible: Mapping[str, Fraction], dual_feasible: Mapping[str, Fraction], n: int
) -> WeakDuality:
    P, D = build_primal(n), build_dual(n)
    _require_feasible(P, primal_feasible)
    _require_feasible(D, dual_feasible)
    lp, ld = P.evaluate(primal_feasible), D.evaluate(dual_feasible)
    return WeakDuality(lp <= ld, ld - lp, lp, ld)


def primal_lower_bound(n: int) -> Fraction:
    """(2/3)(sigma(n)/n - 1): the all-2/3 primal point."""
    if n < 2:
        raise ValueError("primal_lower_bound needs n >= 2")
    return Fraction(2, 3) * (Fraction(arithmetic_functions(n).sigma, n) - 1)


def trivial_dual(n: int) -> dict[str, Fraction]:
    D = build_dual(n)
    x = {v: Fraction(0) for v in D.variables}
    x.update({beta(u): Fraction(1, u) for u in divisors_above_one(n)})
    return x


def restated_dual_objective(beta_assignment: Mapping[str, Fraction], n: int) -> Fraction:
    """sum_{u>1} 1/u - sum of pair variables, valid when every C(alpha_u) is tight."""
    D = build_dual(n)
    for c in D.constraints:
        slack = c.lhs(beta_assignment) - c.rhs
        if slack != 0:
            raise TightnessError(c.name, slack)
    pair_mass = sum((beta_assignment.get(beta_pair(u, v), 0) for u, v in admissible_pairs(n)), Fraction(0))
    return Fraction(arithmetic_functions(n).sigma, n) - 1 - pair_mass


def upper_bound_via_lp(
    n: int, modulus: Factorization | int | None = None, max_vars: int = LP_VARIABLE_CAP
) -> Fraction:
    """(phi(N)/N)(1 + L_P^opt(N)) for N = N(n), or for an explicit ``modulus``."""
    if modulus is None:
        N = auxiliary_modulus(n).N
    elif isinstance(modulus, int):
        N = factorize(modulus)
    else:
        N = modulus
    if N.value > 1:
        d1 = N.num_divisors() - 1
        if d1 > max_vars:
            raise LpSizeError(f"N={N} has {d1} nontrivial divisors, above cap {max_vars}")
        model = build_primal(N.value)
        sol = solve(model, max_vars=max_vars)
        opt = sol.objective_value
    else:
        opt = Fraction(0)
    return phi_ratio(N) * (1 + opt)


# --- text interchange format -------------------------------------------------

FORMAT_HEADER = "\\ pfdensity-lp 1"


def _frac(x: Fraction) -> str:
    return str(Fraction(x))


def write_lp(model: LpModel) -> str:
    """Plain-text model: objective, named rows and rational coefficients "p/q".

    All variables are implicitly nonnegative.
    """

    def expr(coeffs: Mapping[str, Fraction]) -> str:
        terms = []
        for v in sorted(coeffs, key=model.variables.index):
            terms.append(f"{'+' if coeffs[v] >= 0 else '-'} {_frac(abs(coeffs[v]))} {v}")
        return " ".join(terms) if terms else "+ 0"

    lines = [
        FORMAT_HEADER,
        f"\\ kind {model.kind} n {model.n}",
        "maximize" if model.sense == "max" else "minimize",
        f" obj: {expr(model.objective)}",
        "subject to",
    ]
    for c in model.constraints:
        lines.append(f" {c.name}: {expr(c.coeffs)} {c.sense} {_frac(c.rhs)}")
    lines.append("bounds")
    lines.append(" " + " ".join(model.variables) + " >= 0")
    lines.append("end")
    return "\n".join(lines) + "\n"


_TERM = re.compile(r"([+-])\s+(\d+(?:/\d+)?)\s+(\w+)")


def _parse_expr(text: str) -> dict[str, Fraction]:
    coeffs = {}
    for sgn, num, var in _TERM.findall(text):
        val = Fraction(num)
        coeffs[var] = -val if sgn == "-" else val
    return coeffs


def read_lp(text: str) -> LpModel:
    lines = [ln.rstrip() for ln in text.splitlines()]
    if not lines or lines[0] != FORMAT_HEADER:
        raise ValueError("not a pfdensity-lp version 1 file")
    meta = lines[1].split()
    kind, n = meta[2], int(meta[4])
    sense = {"maximize": "max", "minimize": "min"}[lines[2].strip()]
    objective = _parse_expr(lines[3].split(":", 1)[1])
    if lines[4].strip() != "subject to":
        raise ValueError("expected 'subject to'")
    cons = []
    i = 5
    while lines[i].strip() != "bounds":
        name, body = lines[i].strip().split(":", 1)
        m = re.match(r"(.*)\s(<=|>=|=)\s+(-?\d+(?:/\d+)?)$", body.strip())
        if not m:
            raise ValueError(f"bad row: {lines[i]!r}")
        cons.append(Constraint(name, _parse_expr(m.group(1)), m.group(2), Fraction(m.group(3))))
        i += 1
    variables = tuple(lines[i + 1].replace(">= 0", "").split())
    return LpModel(kind, n, sense, variables, objective, tuple(cons))
