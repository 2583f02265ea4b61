"""Small exact-arithmetic helpers shared by the geometric modules.

Rationals are :class:`fractions.Fraction`; complex rationals are elements of
sympy's Gaussian rational field ``QQ_I``.  Matrices handled here are tiny
(rank at most a handful), so plain Gauss-Jordan elimination over ``Fraction``
is both exact and fast enough.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from sympy.polys.domains import QQ, QQ_I

Number = int | Fraction | float


class SingularMatrix(ArithmeticError):
    """Raised when an exact inverse or solve meets a singular matrix."""


def parse_rational(text: str | int | float | Fraction) -> Fraction:
    """Parse ``"p/q"``, ``"p"``, ints or Fractions into a Fraction.

    Floats are accepted only when they are exactly representable; they are
    converted with ``Fraction(float)`` so that no rounding is introduced.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(text, (int, float)):
        return Fraction(text)
    return Fraction(str(text).strip())


def format_rational(x: Fraction | int) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def gaussian(re: Number | str, im: Number | str = 0):
    """Exact complex rational ``re + i*im`` as a ``QQ_I`` element."""
    a, b = parse_rational(re), parse_rational(im)
    return QQ_I(QQ(a.numerator, a.denominator), QQ(b.numerator, b.denominator))


def is_gaussian(x) -> bool:
    return isinstance(x, QQ_I.dtype)


def gaussian_parts(z) -> tuple[Fraction, Fraction]:
    """Real and imaginary parts of a Gaussian rational as Fractions."""
    return (Fraction(int(z.x.numerator), int(z.x.denominator)),
            Fraction(int(z.y.numerator), int(z.y.denominator)))


def to_complex(z) -> complex:
    if is_gaussian(z):
        re, im = gaussian_parts(z)
        return complex(float(re), float(im))
    return complex(z)


def parse_exact(item):
    """Parse a JSON scalar into a Fraction, or a ``[re, im]`` pair into QQ_I."""
    if isinstance(item, (list, tuple)):
        if len(item) != 2:
            raise ValueError(f"complex entries must be [re, im] pairs, got {item!r}")
        return gaussian(item[0], item[1])
    return parse_rational(item)


def unify_exact(values: Iterable) -> list:
    """Coerce a vector to a single exact type: all Fractions or all QQ_I."""
    vals = list(values)
    if any(is_gaussian(v) for v in vals):
        return [v if is_gaussian(v) else gaussian(v) for v in vals]
    return [parse_rational(v) for v in vals]


def format_exact(x):
    if is_gaussian(x):
        re, im = gaussian_parts(x)
        return [format_rational(re), format_rational(im)]
    return format_rational(x)


# --------------------------------------------------------------------------
# matrices over Fraction

def to_fraction_matrix(M) -> list[list[Fraction]]:
    return [[Fraction(x) for x in row] for row in np.asarray(M, dtype=object)]


def mat_mul(A: Sequence[Sequence], B: Sequence[Sequence]) -> list[list]:
    return [[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in zip(*B)] for row in A]


def mat_vec(A: Sequence[Sequence], v: Sequence) -> list:
    return [sum((a * x for a, x in zip(row, v)), Fraction(0)) for row in A]


def inverse(M) -> list[list[Fraction]]:
    """Exact inverse by Gauss-Jordan elimination."""
    A = to_fraction_matrix(M)
    n = len(A)
    aug = [row + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(A)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise SingularMatrix("matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def determinant(M) -> Fraction:
    A = to_fraction_matrix(M)
    n = len(A)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if A[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            A[col], A[pivot] = A[pivot], A[col]
            det = -det
        p = A[col][col]
        det *= p
        for r in range(col + 1, n):
            f = A[r][col] / p
            if f:
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return det


def rank(M) -> int:
    A = to_fraction_matrix(M)
    if not A:
        return 0
    rows, cols = len(A), len(A[0])
    r = 0
    for col in range(cols):
        pivot = next((i for i in range(r, rows) if A[i][col] != 0), None)
        if pivot is None:
            continue
        A[r], A[pivot] = A[pivot], A[r]
        for i in range(r + 1, rows):
            f = A[i][col] / A[r][col]
            if f:
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        r += 1
        if r == rows:
            break
    return r


def integer_inverse(M) -> np.ndarray:
    """Inverse of a unimodular integer matrix, as an int64 array."""
    inv = inverse(M)
    if any(x.denominator != 1 for row in inv for x in row):
        raise ValueError("matrix is not unimodular")
    return np.array([[int(x) for x in row] for row in inv], dtype=np.int64)


def primitive(v: Sequence) -> tuple[int, ...]:
    """Primitive integer vector on the ray through a nonzero rational vector."""
    fr = [Fraction(x) for x in v]
    lcm = 1
    for x in fr:
        lcm = lcm * x.denominator // np.gcd(lcm, x.denominator)
    ints = [int(x * lcm) for x in fr]
    g = 0
    for x in ints:
        g = int(np.gcd(g, abs(x)))
    if g == 0:
        raise ValueError("zero vector has no ray")
    return tuple(x // g for x in ints)
