"""Shared helpers for the test suite."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import List, Tuple

from soncert.polyring import Exponent, circuit_weights


def random_simplex_trellis(
    rng: random.Random, n: int, half_degree: int
) -> Tuple[Exponent, ...]:
    """Scaled standard simplex: 0 and 2*half_degree*e_i, always affinely
    independent and even."""
    d2 = 2 * half_degree
    pts = [(0,) * n] + [
        tuple(d2 if j == i else 0 for j in range(n)) for i in range(n)
    ]
    return tuple(pts)


def random_interior_lattice_point(
    rng: random.Random, n: int, half_degree: int
) -> Exponent:
    """Lattice point strictly inside conv(0, 2d e_1, ..., 2d e_n)."""
    d2 = 2 * half_degree
    while True:
        pt = tuple(rng.randint(1, d2 - n) for _ in range(n))
        if 0 < sum(pt) < d2:
            return pt


def random_simplex_circuit(
    rng: random.Random, n_max: int = 3, d_max: int = 5
) -> Tuple[Tuple[Exponent, ...], Exponent, Tuple[Fraction, ...]]:
    """Full-dimensional simplex trellis with a random interior lattice point."""
    n = rng.randint(1, n_max)
    d = rng.randint(n // 2 + 1, max(n // 2 + 1, d_max))
    trellis = random_simplex_trellis(rng, n, d)
    beta = random_interior_lattice_point(rng, n, d)
    return trellis, beta, circuit_weights(trellis, beta)


def random_segment_circuit(
    rng: random.Random,
) -> Tuple[Tuple[Exponent, ...], Exponent, Tuple[Fraction, ...]]:
    """Two even collinear points with a lattice point strictly between."""
    n = rng.randint(1, 3)
    while True:
        a = tuple(2 * rng.randint(0, 5) for _ in range(n))
        b = tuple(2 * rng.randint(0, 5) for _ in range(n))
        if a == b:
            continue
        from math import gcd

        g = 0
        for x, y in zip(a, b):
            g = gcd(g, abs(x - y))
        if g < 2:
            continue
        k = rng.randint(1, g - 1)
        beta = tuple(x + (y - x) * k // g for x, y in zip(a, b))
        trellis = (a, b)
        return trellis, beta, circuit_weights(trellis, beta)
