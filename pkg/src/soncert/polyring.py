"""Sparse polynomials with exact rational coefficients.

A polynomial in n variables is stored as a map from exponent vectors
(tuples of nonnegative ints) to nonzero ``fractions.Fraction`` coefficients.
The JSON interchange format, the only input format of the toolkit, is

    {"n": 2, "terms": [{"exp": [4, 2], "coef": "1"}, ...]}

where ``coef`` is an integer, a decimal string (converted exactly), or a
"p/q" string. Exponent vectors are ordered lexicographically everywhere a
deterministic order is needed.

The support splits into Lambda (even exponents carrying a positive
coefficient: candidate monomial-square points) and Gamma (all remaining
exponents). A polynomial is PN when every Gamma coefficient is negative;
``to_pn`` flips signs to produce the PN companion, which is nonnegative iff
the original is.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Dict, Iterable, Mapping, Sequence, Tuple

Exponent = Tuple[int, ...]

# Hard cap for the common weight denominator in the exact circuit test; the
# comparison raises both sides to the power p, so huge p means huge integers.
MAX_CIRCUIT_DENOMINATOR = 2**32


def is_even(exp: Exponent) -> bool:
    """True when every entry of the exponent vector is even."""
    return all(e % 2 == 0 for e in exp)


def _check_exponent(exp: Sequence[int], n: int) -> Exponent:
    tup = tuple(exp)
    if len(tup) != n:
        raise ValueError(f"exponent {tup} has length {len(tup)}, expected {n}")
    for e in tup:
        if not isinstance(e, int) or isinstance(e, bool) or e < 0:
            raise ValueError(f"exponent {tup} must consist of nonnegative ints")
    return tup


def parse_rational(value: object) -> Fraction:
    """Parse an int, a decimal string, or a 'p/q' string into a Fraction."""
    if isinstance(value, bool):
        raise ValueError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # JSON number written with a decimal point; repr round-trips the
        # intended decimal, which Fraction parses exactly.
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {value!r}") from exc
    raise ValueError(f"not a rational: {value!r}")


def format_rational(value: Fraction) -> str:
    """Canonical string form: 'p' for integers, 'p/q' otherwise."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass
class SparsePoly:
    """n-variate polynomial; terms maps exponent -> nonzero coefficient."""

    n: int
    terms: Dict[Exponent, Fraction]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("need at least one variable")
        clean: Dict[Exponent, Fraction] = {}
        for exp, coef in self.terms.items():
            tup = _check_exponent(exp, self.n)
            frac = coef if isinstance(coef, Fraction) else parse_rational(coef)
            if frac != 0:
                clean[tup] = frac
        self.terms = clean

    def sorted_terms(self) -> list[tuple[Exponent, Fraction]]:
        return sorted(self.terms.items())

    def coefficient(self, exp: Exponent) -> Fraction:
        return self.terms.get(tuple(exp), Fraction(0))

    def constant(self) -> Fraction:
        return self.terms.get((0,) * self.n, Fraction(0))

    def degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(exp) for exp in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms


@dataclass(frozen=True)
class SupportPartition:
    """Support split: lambda_set = even exponents with positive coefficient,
    gamma_set = everything else. Both are lex-sorted tuples."""

    lambda_set: Tuple[Exponent, ...]
    gamma_set: Tuple[Exponent, ...]


def support_partition(f: SparsePoly) -> SupportPartition:
    if f.is_zero():
        raise ValueError("support partition of the zero polynomial")
    lam = []
    gam = []
    for exp, coef in f.sorted_terms():
        if is_even(exp) and coef > 0:
            lam.append(exp)
        else:
            gam.append(exp)
    return SupportPartition(tuple(lam), tuple(gam))


def to_pn(f: SparsePoly) -> SparsePoly:
    """PN companion: keep Lambda coefficients, negate |.| of the rest.

    Idempotent; the companion is nonnegative iff f is.
    """
    part = support_partition(f)
    gamma = set(part.gamma_set)
    terms = {
        exp: (-abs(coef) if exp in gamma else coef) for exp, coef in f.terms.items()
    }
    return SparsePoly(f.n, terms)


def substitute_power(f: SparsePoly, r: int) -> SparsePoly:
    """Substitute x_i -> x_i^r, i.e. multiply every exponent by r."""
    if not isinstance(r, int) or r < 1:
        raise ValueError("power must be a positive integer")
    return SparsePoly(f.n, {tuple(e * r for e in exp): c for exp, c in f.terms.items()})


# ---------------------------------------------------------------------------
# circuits


def _gauss_solve(
    rows: list[list[Fraction]], rhs: list[Fraction]
) -> list[Fraction] | None:
    """Solve rows * x = rhs exactly; None when inconsistent or underdetermined."""
    m = len(rows)
    cols = len(rows[0]) if rows else 0
    aug = [list(rows[i]) + [rhs[i]] for i in range(m)]
    pivot_cols: list[int] = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, m) if aug[i][c] != 0), None)
        if pivot is None:
            continue
        aug[r], aug[pivot] = aug[pivot], aug[r]
        inv = aug[r][c]
        aug[r] = [v / inv for v in aug[r]]
        for i in range(m):
            if i != r and aug[i][c] != 0:
                factor = aug[i][c]
                aug[i] = [a - factor * b for a, b in zip(aug[i], aug[r])]
        pivot_cols.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if aug[i][cols] != 0:
            return None  # inconsistent
    if len(pivot_cols) < cols:
        return None  # underdetermined
    x = [Fraction(0)] * cols
    for i, c in enumerate(pivot_cols):
        x[c] = aug[i][cols]
    return x


def affinely_independent(points: Sequence[Sequence[Fraction | int]]) -> bool:
    """Exact rank test on the lifted vectors (1, point)."""
    vecs = [[Fraction(1)] + [Fraction(v) for v in p] for p in points]
    m = len(vecs)
    cols = len(vecs[0])
    rank = 0
    for c in range(cols):
        pivot = next((i for i in range(rank, m) if vecs[i][c] != 0), None)
        if pivot is None:
            continue
        vecs[rank], vecs[pivot] = vecs[pivot], vecs[rank]
        inv = vecs[rank][c]
        vecs[rank] = [v / inv for v in vecs[rank]]
        for i in range(m):
            if i != rank and vecs[i][c] != 0:
                f = vecs[i][c]
                vecs[i] = [a - f * b for a, b in zip(vecs[i], vecs[rank])]
        rank += 1
    return rank == m


@dataclass(frozen=True)
class Circuit:
    """A trellis (affinely independent even points), an interior point beta,
    and the exact convex weights writing beta over the trellis."""

    trellis: Tuple[Exponent, ...]
    beta: Exponent
    weights: Tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.trellis) != len(self.weights):
            raise ValueError("one weight per trellis point")
        if len(self.trellis) < 2:
            raise ValueError("a trellis needs at least two points")
        n = len(self.beta)
        for alpha in self.trellis:
            if len(alpha) != n:
                raise ValueError("dimension mismatch in trellis")
            if not is_even(alpha):
                raise ValueError(f"trellis point {alpha} is not even")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive")
        if sum(self.weights) != 1:
            raise ValueError("weights must sum to one")
        for i in range(n):
            acc = sum(w * alpha[i] for w, alpha in zip(self.weights, self.trellis))
            if acc != self.beta[i]:
                raise ValueError("weights do not reproduce beta")
        if not affinely_independent(self.trellis):
            raise ValueError("trellis points are affinely dependent")


def circuit_weights(
    trellis: Sequence[Exponent], beta: Sequence[Fraction | int]
) -> Tuple[Fraction, ...]:
    """Exact barycentric weights of beta over an affinely independent trellis.

    Raises ValueError when beta is not in the relative interior.
    """
    pts = list(trellis)
    n = len(beta)
    rows = [[Fraction(1)] * len(pts)]
    rhs = [Fraction(1)]
    for i in range(n):
        rows.append([Fraction(p[i]) for p in pts])
        rhs.append(Fraction(beta[i]))
    sol = _gauss_solve(rows, rhs)
    if sol is None:
        raise ValueError(f"{tuple(beta)} has no barycentric representation over {pts}")
    if any(w <= 0 for w in sol):
        raise ValueError(f"{tuple(beta)} is not interior to the trellis {pts}")
    return tuple(sol)


def is_nonneg_circuit(
    circuit: Circuit, coeffs: Mapping[Exponent, Fraction], d: Fraction
) -> bool:
    """Exact nonnegativity test for sum_a c_a x^a - d x^beta.

    Compares the circuit number Theta = prod (c_a / w_a)^{w_a} against d via
    integer powers: with w_a = q_a / p the test is
        prod (c_a p / q_a)^{q_a} >= |d|^p.
    Even beta only constrains d from above (negative d is trivially fine);
    odd beta constrains |d|.
    """
    weights = circuit.weights
    p = 1
    for w in weights:
        p = p * w.denominator // gcd(p, w.denominator)
    if p > MAX_CIRCUIT_DENOMINATOR:
        raise ValueError(f"weight denominator {p} exceeds the 2^32 cap")
    d = parse_rational(d)
    cs = []
    for alpha in circuit.trellis:
        c = parse_rational(coeffs[alpha])
        if c <= 0:
            raise ValueError(f"coefficient at {alpha} must be positive")
        cs.append(c)
    if is_even(circuit.beta) and d <= 0:
        return True
    lhs = Fraction(1)
    for c, w in zip(cs, weights):
        q = int(w * p)
        lhs *= (c / w) ** q
    return lhs >= abs(d) ** p


# ---------------------------------------------------------------------------
# JSON interchange


def poly_from_json(data: object) -> SparsePoly:
    """Parse the polynomial JSON object (already json.load-ed)."""
    if not isinstance(data, dict):
        raise ValueError("polynomial JSON must be an object")
    if "n" not in data or "terms" not in data:
        raise ValueError("polynomial JSON needs 'n' and 'terms'")
    n = data["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError(f"'n' must be a positive integer, got {n!r}")
    raw_terms = data["terms"]
    if not isinstance(raw_terms, list):
        raise ValueError("'terms' must be a list")
    terms: Dict[Exponent, Fraction] = {}
    for entry in raw_terms:
        if not isinstance(entry, dict) or "exp" not in entry or "coef" not in entry:
            raise ValueError(f"term {entry!r} needs 'exp' and 'coef'")
        exp = _check_exponent(entry["exp"], n)
        if exp in terms:
            raise ValueError(f"duplicate exponent {exp}")
        coef = parse_rational(entry["coef"])
        if coef != 0:
            terms[exp] = coef
    return SparsePoly(n, terms)


def poly_loads(text: str) -> SparsePoly:
    return poly_from_json(json.loads(text))


def poly_to_json(f: SparsePoly) -> dict:
    """Canonical JSON object: terms lex-sorted, coefficients as strings."""
    return {
        "n": f.n,
        "terms": [
            {"exp": list(exp), "coef": format_rational(coef)}
            for exp, coef in f.sorted_terms()
        ],
    }


def poly_dumps(f: SparsePoly) -> str:
    return json.dumps(poly_to_json(f), separators=(",", ":"), sort_keys=True)


def poly_sha256(f: SparsePoly) -> str:
    """sha256 of the canonical JSON serialization."""
    return hashlib.sha256(poly_dumps(f).encode("ascii")).hexdigest()
