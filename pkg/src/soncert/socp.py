"""Conic formulation of sparse lower bounds via circuit covers.

Pipeline: partition the support of a polynomial into candidate square
points and interior points, cover each interior point with a simplex
circuit, replace every circuit by a rational mediated set of triples
(u, v, w) with u = (v + w)/2, and match coefficients pointwise.  Each
triple carries slot variables (a, b, c) constrained to the rotated cone
2ab >= c^2, encoding the binomial square a x^{2v'} ... via the identity
2a x^v + b x^w - 2c x^u with (x^{v/2})^2-style groupings.  Equality rows
force the slot combination at every mediated point to reproduce the
coefficient there, and the row at the origin is either dropped and
minimized (bound mode) or pinned to f0 - xi (feasibility mode).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .cover import CoverResult, simplex_cover
from .ipm import ConeSolve, solve_socp
from .mediated import Point, PointTriple, as_point, med_set, med_set_odd
from .polyring import (
    Exponent,
    SparsePoly,
    format_rational,
    parse_rational,
    support_partition,
    to_pn,
)


class UncoveredSupport(ValueError):
    """A support point is neither matched by a row nor a passthrough term."""


class SolverFailure(RuntimeError):
    """The conic solver stopped without reaching the requested accuracy."""


@dataclass(frozen=True)
class ConeTriplePlan:
    """Mediated triples for a circuit cover, with row bookkeeping.

    points holds every distinct u/v/w as a tuple of Fractions in lex
    order; index maps each point to its row.  passthrough lists square
    points outside every trellis: they never enter the conic system and
    their coefficients must stay nonnegative on their own.
    """

    circuits: Tuple
    circuit_triples: Tuple[Tuple[PointTriple, ...], ...]
    triples: Tuple[PointTriple, ...]
    points: Tuple[Point, ...]
    index: Dict[Point, int]
    passthrough: Tuple[Exponent, ...]
    odd_mode: bool

    @property
    def num_triples(self) -> int:
        return len(self.triples)

    @property
    def max_denominator(self) -> int:
        best = 1
        for u, v, w in self.triples:
            for pt in (u, v, w):
                for x in pt:
                    best = max(best, x.denominator)
        return best


def build_plan(cover: CoverResult, odd_mode: bool = False) -> ConeTriplePlan:
    """Expand every circuit of a cover into mediated triples."""

    lift = med_set_odd if odd_mode else med_set
    circuit_triples: List[Tuple[PointTriple, ...]] = []
    flat: List[PointTriple] = []
    for circuit in cover.circuits:
        triples = tuple(lift(circuit.trellis, circuit.beta, circuit.weights))
        circuit_triples.append(triples)
        flat.extend(triples)
    seen = set()
    for u, v, w in flat:
        seen.update((u, v, w))
    points = tuple(sorted(seen))
    index = {pt: i for i, pt in enumerate(points)}
    for circuit in cover.circuits:
        assert as_point(circuit.beta) in index
        assert all(as_point(a) in index for a in circuit.trellis)
    passthrough = tuple(pt for pt in cover.uncovered if as_point(pt) not in index)
    return ConeTriplePlan(
        circuits=tuple(cover.circuits),
        circuit_triples=tuple(circuit_triples),
        triples=tuple(flat),
        points=points,
        index=index,
        passthrough=passthrough,
        odd_mode=odd_mode,
    )


@dataclass
class SocpProblem:
    """Standard-form data: min objective'slots s.t. rows, slots in cones.

    Slot layout is three per triple, (a, b, c) consecutive.  entries is a
    triplet list (row, col, coef) with integer coefficients +2 (a at its
    outer point v), +1 (b at w), -2 (c at the midpoint u).
    """

    plan: ConeTriplePlan
    mode: str  # "bound" or "feasibility"
    n: int
    constant: Fraction
    xi: Optional[Fraction]
    row_points: Tuple[Point, ...]
    rhs_exact: Tuple[Fraction, ...]
    entries: Tuple[Tuple[int, int, int], ...]
    objective: Tuple[int, ...]
    passthrough_terms: Dict[Exponent, Fraction] = field(default_factory=dict)

    @property
    def num_rows(self) -> int:
        return len(self.row_points)

    @property
    def num_slots(self) -> int:
        return 3 * self.plan.num_triples

    def to_json(self) -> str:
        data = {
            "mode": self.mode,
            "num_cones": self.plan.num_triples,
            "cone_block": 3,
            "constant": format_rational(self.constant),
            "xi": None if self.xi is None else format_rational(self.xi),
            "objective": list(self.objective),
            "rows": [
                {
                    "point": [format_rational(x) for x in pt],
                    "rhs": format_rational(rhs),
                }
                for pt, rhs in zip(self.row_points, self.rhs_exact)
            ],
            "entries": [list(e) for e in self.entries],
            "passthrough": [
                {"exp": list(exp), "coef": format_rational(coef)}
                for exp, coef in sorted(self.passthrough_terms.items())
            ],
        }
        return json.dumps(data, indent=2, sort_keys=True)


def assemble(
    plan: ConeTriplePlan,
    poly: SparsePoly,
    mode: str = "bound",
    xi: object = None,
) -> SocpProblem:
    """Build the conic system matching a sign-normalized polynomial.

    poly must carry nonpositive coefficients off its square points (the
    pointwise-negative companion), constant included.  In bound mode the
    row at the origin is removed and its slot expression becomes the
    objective; in feasibility mode xi is required and the origin row is
    pinned to constant - xi.
    """

    if mode not in ("bound", "feasibility"):
        raise ValueError(f"unknown mode {mode!r}")
    n = poly.n
    zero = (0,) * n
    f0 = poly.constant()
    xi_frac = None
    if mode == "feasibility":
        if xi is None:
            raise ValueError("feasibility mode needs a target bound")
        xi_frac = parse_rational(xi)

    passthrough_set = set(plan.passthrough)
    passthrough_terms: Dict[Exponent, Fraction] = {}
    rhs_full: List[Fraction] = [Fraction(0)] * len(plan.points)
    for exp, coef in poly.sorted_terms():
        if exp == zero:
            continue
        row = plan.index.get(as_point(exp))
        if row is not None:
            rhs_full[row] = coef
        elif exp in passthrough_set:
            if coef < 0:
                raise UncoveredSupport(
                    f"passthrough point {exp} carries negative coefficient {coef}"
                )
            passthrough_terms[exp] = coef
        else:
            raise UncoveredSupport(
                f"support point {exp} is outside every mediated triple and "
                "not a free square point; the cover misses it"
            )

    zero_row = plan.index.get(as_point(zero))
    drop = zero_row if mode == "bound" else None
    if mode == "feasibility":
        if zero_row is not None:
            rhs_full[zero_row] = f0 - xi_frac
        else:
            if f0 - xi_frac < 0:
                raise UncoveredSupport(
                    f"constant margin {f0 - xi_frac} is negative and the "
                    "origin is outside every mediated triple"
                )
            if f0 != xi_frac:
                passthrough_terms[zero] = f0 - xi_frac

    renumber: Dict[int, int] = {}
    row_points: List[Point] = []
    rhs_exact: List[Fraction] = []
    for i, pt in enumerate(plan.points):
        if i == drop:
            continue
        renumber[i] = len(row_points)
        row_points.append(pt)
        rhs_exact.append(rhs_full[i])

    entries: List[Tuple[int, int, int]] = []
    objective = [0] * (3 * plan.num_triples)
    for t, (u, v, w) in enumerate(plan.triples):
        for offset, pt, coef in ((0, v, 2), (1, w, 1), (2, u, -2)):
            i = plan.index[pt]
            col = 3 * t + offset
            if i == drop:
                objective[col] = coef
            else:
                entries.append((renumber[i], col, coef))

    return SocpProblem(
        plan=plan,
        mode=mode,
        n=n,
        constant=f0,
        xi=xi_frac,
        row_points=tuple(row_points),
        rhs_exact=tuple(rhs_exact),
        entries=tuple(entries),
        objective=tuple(objective),
        passthrough_terms=passthrough_terms,
    )


@dataclass
class SocpSolution:
    """Numeric solve outcome in slot coordinates."""

    status: str
    slots: Tuple[float, ...]
    xi: Optional[float]
    objective: float
    iterations: int
    residuals: Dict[str, float]

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    def slot_triples(self) -> List[Tuple[float, float, float]]:
        return [tuple(self.slots[3 * t : 3 * t + 3]) for t in range(len(self.slots) // 3)]


def solve_problem(
    problem: SocpProblem, delta: float = 1e-8, max_iter: int = 200
) -> SocpSolution:
    """Run the interior-point solver on an assembled system."""

    rows = [e[0] for e in problem.entries]
    cols = [e[1] for e in problem.entries]
    vals = [float(e[2]) for e in problem.entries]
    result: ConeSolve = solve_socp(
        rows,
        cols,
        vals,
        [float(r) for r in problem.rhs_exact],
        [float(c) for c in problem.objective],
        problem.plan.num_triples,
        tol=delta,
        max_iter=max_iter,
    )
    xi: Optional[float] = None
    if result.status == "optimal":
        if problem.mode == "bound":
            xi = float(problem.constant) - result.objective
        else:
            xi = float(problem.xi)
    return SocpSolution(
        status=result.status,
        slots=tuple(result.x),
        xi=xi,
        objective=result.objective,
        iterations=result.iterations,
        residuals=result.residuals,
    )


@dataclass
class LowerBoundResult:
    """Lower bound for a sparse polynomial, with the structures behind it.

    xi is -inf when no coefficient match exists at any bound (the conic
    system is infeasible even with a free constant).  When the support has
    no interior points the bound is the constant term itself and the conic
    stages are skipped (cover, plan, problem, solution stay None).
    """

    xi: float
    constant: Fraction
    pn: SparsePoly
    lambda_set: Tuple[Exponent, ...]
    gamma_set: Tuple[Exponent, ...]
    cover: Optional[CoverResult] = None
    plan: Optional[ConeTriplePlan] = None
    problem: Optional[SocpProblem] = None
    solution: Optional[SocpSolution] = None


def pn_companion(f: SparsePoly) -> SparsePoly:
    """Sign-normalized companion: negative magnitudes off the square points
    of the nonconstant part, constant carried through unchanged."""

    zero = (0,) * f.n
    rest = {exp: c for exp, c in f.terms.items() if exp != zero}
    tilde = to_pn(SparsePoly(f.n, rest))
    terms = dict(tilde.terms)
    if f.constant():
        terms[zero] = f.constant()
    return SparsePoly(f.n, terms)


def lower_bound(
    f: SparsePoly, delta: float = 1e-8, odd_mode: bool = False, max_iter: int = 200
) -> LowerBoundResult:
    """Best bound xi with the companion of f - xi matched by cone triples.

    Raises SolverFailure when the numeric solver stalls, and propagates
    CoverInfeasible when some interior point cannot be covered at all.
    """

    zero = (0,) * f.n
    f0 = f.constant()
    rest = SparsePoly(f.n, {exp: c for exp, c in f.terms.items() if exp != zero})
    part = support_partition(rest)
    tilde = pn_companion(f)
    lam = tuple(sorted(set(part.lambda_set) | {zero}))
    if not part.gamma_set:
        return LowerBoundResult(
            xi=float(f0),
            constant=f0,
            pn=tilde,
            lambda_set=lam,
            gamma_set=(),
        )
    cover = simplex_cover(lam, part.gamma_set)
    plan = build_plan(cover, odd_mode=odd_mode)
    problem = assemble(plan, tilde, mode="bound")
    solution = solve_problem(problem, delta=delta, max_iter=max_iter)
    if solution.status == "infeasible":
        xi = float("-inf")
    elif solution.status != "optimal":
        raise SolverFailure(
            f"conic solver stopped with status {solution.status} "
            f"(residuals {solution.residuals})"
        )
    else:
        xi = solution.xi
    return LowerBoundResult(
        xi=xi,
        constant=f0,
        pn=tilde,
        lambda_set=lam,
        gamma_set=tuple(part.gamma_set),
        cover=cover,
        plan=plan,
        problem=problem,
        solution=solution,
    )
