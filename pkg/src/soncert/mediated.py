"""Mediated sequences and rational mediated sets.

A (0,p)-mediated sequence containing q is a set A with {0, q, p} subset of
A subset of [0, p] such that every element of A except 0 and p is the
average of two distinct elements of A. ``med_seq`` builds a near-minimal
sequence in O(log p) justification triples; ``brute_min_med_seq`` is an
exact minimal-size search used as an oracle in tests.

The lattice lift ``l_med_set`` transports a scalar sequence onto a segment
between two points, yielding triples (u, v, w) with u = (v + w)/2; these
are the midpoint links a binomial-squares decomposition rides on.
``med_set`` chains segment lifts over a full trellis. ``med_set_odd``
produces mediated sets whose endpoint coordinates are even rationals with
odd denominators, so that after substituting an odd root every square
point becomes an even lattice point and each binomial square is globally
nonnegative, not only on the positive orthant.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Dict, Iterable, List, Sequence, Tuple

from .polyring import circuit_weights

Triple = Tuple[int, int, int]  # (mid, lo, hi) with mid = (lo + hi) // 2
Point = Tuple[Fraction, ...]
PointTriple = Tuple[Point, Point, Point]  # (u, v, w) with u = (v + w)/2


def _shift(triples: Iterable[Triple], t: int) -> List[Triple]:
    return [(s + t, l + t, r + t) for (s, l, r) in triples]


def _med_seq(u: int, v: int) -> List[Triple]:
    # invariant: 0 < v < u; returns justification triples for a
    # (0,u)-mediated sequence containing v
    g = gcd(u, v)
    if g > 1:
        return [(g * s, g * l, g * r) for (s, l, r) in _med_seq(u // g, v // g)]
    if u == 2:
        return [(1, 0, 2)]
    if u % 2 == 0:
        h = u // 2
        if v < h:
            return _med_seq(h, v) + [(h, 0, u)]
        return [(h, 0, u)] + _shift(_med_seq(h, v - h), h)
    if v % 2 == 0:
        # v = 2^k * r with r odd; halving chain from 0 up to v - r
        k = (v & -v).bit_length() - 1
        r = v >> k
        out: List[Triple] = []
        for i in range(1, k + 1):
            out.append((v - (v >> i), v - (v >> (i - 1)), v))
        if v == u - r:
            out.append((v, v - r, u))
        elif v < u - r:
            out.append(((v - r + u) // 2, v - r, u))
            out += _shift(_med_seq((u + r - v) // 2, r), v - r)
        else:
            out.append(((v - r + u) // 2, v - r, u))
            out += _shift(
                _med_seq((u + r - v) // 2, (v + r - u) // 2), (v + u - r) // 2
            )
        return out
    # both odd: u - v is even, solve the reflected instance and flip back
    return [(u - s, u - r, u - l) for (s, l, r) in _med_seq(u, u - v)]


def med_seq(p: int, q: int) -> List[Triple]:
    """Justification triples of a (0,p)-mediated sequence containing q.

    Triples are (mid, lo, hi) with mid = (lo + hi)/2 and lo < hi; the
    sequence elements are {0, p} plus all mids, q always among the mids.
    """
    if not isinstance(p, int) or not isinstance(q, int) or isinstance(p, bool):
        raise ValueError("p and q must be ints")
    if not 0 < q < p:
        raise ValueError(f"need 0 < q < p, got q={q}, p={p}")
    seen = set()
    out: List[Triple] = []
    for trip in _med_seq(p, q):
        if trip[0] not in seen:
            seen.add(trip[0])
            out.append(trip)
    return out


def med_seq_elements(p: int, q: int) -> Tuple[int, ...]:
    """Sorted elements of the sequence produced by med_seq."""
    return tuple(sorted({0, p} | {s for (s, _, _) in med_seq(p, q)}))


def is_mediated_sequence(elements: Sequence[int], p: int, q: int) -> bool:
    """Exact membership check against the definition."""
    a = set(elements)
    if not {0, q, p} <= a or not all(0 <= x <= p for x in a):
        return False
    for x in a - {0, p}:
        if not any(2 * x - y in a and y != x for y in a if y < x):
            return False
    return True


def brute_min_med_seq(p: int, q: int) -> Tuple[int, ...]:
    """Minimum-size (0,p)-mediated sequence containing q, by exhaustive
    iterative-deepening search over justification pairs. Exponential in the
    worst case; intended for small p as a test oracle."""
    if not 0 < q < p:
        raise ValueError(f"need 0 < q < p, got q={q}, p={p}")
    upper = len(med_seq(p, q)) + 2
    for budget in range(3, upper + 1):
        found = _brute_search(p, q, budget)
        if found is not None:
            return tuple(sorted(found))
    raise AssertionError("search exceeded the constructive upper bound")


def _brute_search(p: int, q: int, budget: int) -> frozenset | None:
    seen: set[tuple[frozenset, frozenset]] = set()

    def dfs(a: frozenset, unjust: frozenset) -> frozenset | None:
        if not unjust:
            return a
        key = (a, unjust)
        if key in seen:
            return None
        seen.add(key)
        # most-constrained element first
        best_x = None
        best_pairs: List[Tuple[int, int, int]] | None = None
        for x in unjust:
            pairs = []
            for v in range(max(0, 2 * x - p), x):
                w = 2 * x - v
                new = (v not in a) + (w not in a)
                if len(a) + new <= budget:
                    pairs.append((new, v, w))
            if not pairs:
                return None
            if best_pairs is None or len(pairs) < len(best_pairs):
                best_x, best_pairs = x, pairs
        best_pairs.sort()
        for _, v, w in best_pairs:
            a2 = a | {v, w}
            if len(a2) > budget:
                continue
            u2 = (unjust - {best_x}) | (frozenset({v, w}) - a - {0, p})
            res = dfs(a2, u2)
            if res is not None:
                return res
        return None

    return dfs(frozenset({0, q, p}), frozenset({q}))


# ---------------------------------------------------------------------------
# lattice and rational lifts


def as_point(pt: Sequence) -> Point:
    return tuple(Fraction(x) for x in pt)


def _segment_parameter(a1: Point, a2: Point, b: Point) -> Fraction:
    # b = a1 + t (a2 - a1); raises unless b is strictly inside the segment
    if len({len(a1), len(a2), len(b)}) != 1:
        raise ValueError("dimension mismatch")
    if a1 == a2:
        raise ValueError("segment endpoints coincide")
    t = None
    for x1, x2, xb in zip(a1, a2, b):
        if x1 != x2:
            t = (xb - x1) / (x2 - x1)
            break
    for x1, x2, xb in zip(a1, a2, b):
        if xb != x1 + t * (x2 - x1):
            raise ValueError(f"{b} is not on the line through {a1} and {a2}")
    if not 0 < t < 1:
        raise ValueError(f"{b} is not strictly between {a1} and {a2}")
    return t


def l_med_set(a1: Sequence, a2: Sequence, b: Sequence) -> List[PointTriple]:
    """Mediated set on the segment [a1, a2] containing b.

    Writes b = a1 + (q/p)(a2 - a1) in lowest terms and maps the scalar
    sequence for (p, q) through s -> a1 + (s/p)(a2 - a1). Endpoint order
    inside each returned triple follows the scalar order (lo -> v, hi -> w).
    """
    e1, e2, pt = as_point(a1), as_point(a2), as_point(b)
    t = _segment_parameter(e1, e2, pt)
    p, q = t.denominator, t.numerator

    # phi(s) = e1 + (s/p)(e2 - e1), coordinatewise (base + s*diff) / den with
    # integer base/diff/den so each coordinate costs a single normalization;
    # scalars recur across triples, so points are cached per s.
    coords = []
    for x1, x2 in zip(e1, e2):
        den = lcm(x1.denominator, x2.denominator)
        n1 = x1.numerator * (den // x1.denominator)
        n2 = x2.numerator * (den // x2.denominator)
        coords.append((p * n1, n2 - n1, p * den))
    cache: Dict[int, Point] = {}

    def phi(s: int) -> Point:
        got = cache.get(s)
        if got is None:
            got = cache[s] = tuple(
                Fraction(base + s * diff, den) for base, diff, den in coords
            )
        return got

    return [(phi(s), phi(lo), phi(hi)) for (s, lo, hi) in med_seq(p, q)]


def _dedupe(triples: Iterable[PointTriple]) -> List[PointTriple]:
    seen = set()
    out: List[PointTriple] = []
    for trip in triples:
        if trip[0] not in seen:
            seen.add(trip[0])
            out.append(trip)
    return out


def _prepare(
    trellis: Sequence[Sequence], beta: Sequence, weights
) -> Tuple[List[Point], Point, Tuple[Fraction, ...]]:
    pts = [as_point(a) for a in trellis]
    target = as_point(beta)
    if len(pts) < 2:
        raise ValueError("need at least two trellis points")
    if weights is None:
        weights = circuit_weights(trellis, beta)
    ws = tuple(Fraction(w) for w in weights)
    if len(ws) != len(pts):
        raise ValueError("one weight per trellis point")
    if any(w <= 0 for w in ws) or sum(ws) != 1:
        raise ValueError("weights must be positive and sum to one")
    for i in range(len(target)):
        if sum(w * pt[i] for w, pt in zip(ws, pts)) != target[i]:
            raise ValueError("weights do not reproduce the target point")
    return pts, target, ws


def med_set(
    trellis: Sequence[Sequence], beta: Sequence, weights=None
) -> List[PointTriple]:
    """Rational mediated set for beta over a trellis, by chaining segment
    lifts: peel trellis points off one at a time, each step connecting the
    current point to the weighted combination of the remaining ones."""
    pts, target, ws = _prepare(trellis, beta, weights)
    m = len(pts)
    if m == 2:
        return _dedupe(l_med_set(pts[0], pts[1], target))
    p = lcm(*(w.denominator for w in ws))
    qs = [int(w * p) for w in ws]
    out: List[PointTriple] = []
    prev = target
    rem = p
    for k in range(m - 2):
        rem -= qs[k]
        beta_k = tuple(
            sum(Fraction(qs[j], rem) * pts[j][i] for j in range(k + 1, m))
            for i in range(len(target))
        )
        out += l_med_set(pts[k], beta_k, prev)
        prev = beta_k
    out += l_med_set(pts[m - 2], pts[m - 1], prev)
    return _dedupe(out)


# ---------------------------------------------------------------------------
# odd-denominator mediated sets


def _is_even_rational(x: Fraction) -> bool:
    return x.numerator % 2 == 0 and x.denominator % 2 == 1


def _point_denominator_lcm(pts: Iterable[Point]) -> int:
    r = 1
    for pt in pts:
        for x in pt:
            r = lcm(r, x.denominator)
    return r


def l_med_set_odd(a1: Sequence, a2: Sequence, b: Sequence) -> List[PointTriple]:
    """Segment mediated set whose endpoint coordinates are even rationals
    with odd denominators. Requires a1, a2 already of that form and b with
    odd coordinate denominators."""
    e1, e2, pt = as_point(a1), as_point(a2), as_point(b)
    for e in (e1, e2):
        if not all(_is_even_rational(x) for x in e):
            raise ValueError(f"{e} is not an even point with odd denominators")
    if any(x.denominator % 2 == 0 for x in pt):
        raise ValueError(f"{pt} has an even coordinate denominator")
    _segment_parameter(e1, e2, pt)
    mid = tuple((x1 + x2) / 2 for x1, x2 in zip(e1, e2))
    if pt == mid:
        return [(pt, e1, e2)]
    r = _point_denominator_lcm([e1, e2, pt])

    def half_scale(point: Point) -> Point:
        return tuple(Fraction(r, 2) * x for x in point)

    def scale_back(trip: PointTriple) -> PointTriple:
        return tuple(
            tuple(Fraction(2, r) * x for x in point) for point in trip
        )  # type: ignore[return-value]

    if all((r * x).numerator % 2 == 0 for x in pt):
        inner = l_med_set(half_scale(e1), half_scale(e2), half_scale(pt))
        return [scale_back(trip) for trip in inner]
    # odd numerator somewhere: reflect the nearer endpoint through b, build
    # the even instance for the reflection, then justify b by one extra triple
    t = _segment_parameter(e1, e2, pt)
    near = e1 if t <= Fraction(1, 2) else e2
    reflected = tuple(2 * xb - xn for xb, xn in zip(pt, near))
    inner = l_med_set(half_scale(e1), half_scale(e2), half_scale(reflected))
    out = [scale_back(trip) for trip in inner]
    out.append((pt, near, reflected))
    return out


def med_set_odd(
    trellis: Sequence[Sequence], beta: Sequence, weights=None
) -> List[PointTriple]:
    """Rational mediated set with odd-denominator points throughout.

    Splitting keeps every intermediate combination point at odd denominator:
    with an even total weight pick an odd part, with an odd total pick an
    even part, and when every part is odd merge the first two, which makes
    their sum even for the next level.
    """
    pts, target, ws = _prepare(trellis, beta, weights)
    for pt in pts:
        if not all(_is_even_rational(x) for x in pt):
            raise ValueError(f"{pt} is not an even point with odd denominators")
    if any(x.denominator % 2 == 0 for x in target):
        raise ValueError(f"{target} has an even coordinate denominator")
    p = lcm(*(w.denominator for w in ws))
    qs = [int(w * p) for w in ws]
    return _dedupe(_med_set_odd(pts, qs, p, target))


def _combine(pts: Sequence[Point], qs: Sequence[int], total: int) -> Point:
    return tuple(
        sum(Fraction(q, total) * pt[i] for q, pt in zip(qs, pts))
        for i in range(len(pts[0]))
    )


def _med_set_odd(
    pts: List[Point], qs: List[int], p: int, b: Point
) -> List[PointTriple]:
    g = gcd(p, *qs)
    p //= g
    qs = [q // g for q in qs]
    if len(pts) == 2:
        return l_med_set_odd(pts[0], pts[1], b)
    if p % 2 == 0:
        sel = next(i for i, q in enumerate(qs) if q % 2 == 1)
    elif any(q % 2 == 0 for q in qs):
        sel = next(i for i, q in enumerate(qs) if q % 2 == 0)
    else:
        # all parts odd: merge the first two so their combined weight is even
        rest_pts, rest_qs = pts[2:], qs[2:]
        q12 = qs[0] + qs[1]
        b1 = _combine([pts[0]] + rest_pts, [q12] + rest_qs, p)
        b2 = _combine([pts[1]] + rest_pts, [q12] + rest_qs, p)
        out = l_med_set_odd(b1, b2, b)
        out += _med_set_odd([pts[0]] + rest_pts, [q12] + rest_qs, p, b1)
        out += _med_set_odd([pts[1]] + rest_pts, [q12] + rest_qs, p, b2)
        return out
    rest_pts = pts[:sel] + pts[sel + 1 :]
    rest_qs = qs[:sel] + qs[sel + 1 :]
    p_rest = p - qs[sel]
    b1 = _combine(rest_pts, rest_qs, p_rest)
    out = l_med_set_odd(pts[sel], b1, b)
    out += _med_set_odd(rest_pts, rest_qs, p_rest, b1)
    return out


# ---------------------------------------------------------------------------
# validation


def is_valid_mediated_set(
    triples: Sequence[PointTriple], anchors: Sequence[Sequence], beta: Sequence
) -> bool:
    """Check the structural contract: each triple has u = (v + w)/2 with
    v != w, every endpoint is an anchor or the mid of some triple, beta is
    a mid, and mids are distinct."""
    anchor_set = {as_point(a) for a in anchors}
    target = as_point(beta)
    mids = [trip[0] for trip in triples]
    if len(set(mids)) != len(mids):
        return False
    mid_set = set(mids)
    if target not in mid_set:
        return False
    for u, v, w in triples:
        if v == w:
            return False
        if u != tuple((x + y) / 2 for x, y in zip(v, w)):
            return False
        for e in (v, w):
            if e not in anchor_set and e not in mid_set:
                return False
    return True
