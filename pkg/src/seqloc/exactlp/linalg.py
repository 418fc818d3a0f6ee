"""Small exact linear-algebra helpers over the rationals."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce

import numpy as np

_PRIME = 2_147_483_647


def as_rational(value) -> Fraction:
    """Coerce ``value`` (int, Fraction or ``"p/q"`` string) to a Fraction.

    Floats are refused: converting a float to a rational must go through
    an explicit rationalization step.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (bool, np.bool_)):
        return Fraction(int(value))
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ZeroDivisionError:
            raise ValueError(f"zero denominator in {value!r}") from None
    raise TypeError(f"expected an exact rational, got {type(value).__name__}: {value!r}")


def lcm_of_denominators(values) -> int:
    return reduce(math.lcm, (Fraction(v).denominator for v in values), 1)


def gcd_of(values) -> int:
    return reduce(math.gcd, (int(v) for v in values), 0)


def integer_scaling(values) -> tuple[list[int], Fraction]:
    """Scale a rational vector by a positive factor to coprime integers.

    Returns ``(ints, factor)`` with ``ints == factor * values``. The zero
    vector is returned unchanged with factor 1.
    """
    values = [Fraction(v) for v in values]
    lcm = lcm_of_denominators(values)
    ints = [int(v * lcm) for v in values]
    g = gcd_of(ints)
    if g == 0:
        return ints, Fraction(1)
    return [v // g for v in ints], Fraction(lcm, g)


def sign_normalized(ints: list[int]) -> list[int]:
    """Flip the sign so the first nonzero entry is positive."""
    for v in ints:
        if v:
            return ints if v > 0 else [-w for w in ints]
    return ints


def rref(rows) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form. Returns the nonzero rows and pivot columns."""
    mat = [[Fraction(v) for v in row] for row in rows]
    if not mat:
        return [], []
    ncols = len(mat[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = 1 / mat[r][c]
        mat[r] = [v * inv for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return mat[:r], pivots


def nullspace(rows, ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of {h : rows @ h = 0}, one vector per free column."""
    reduced, pivots = rref(rows)
    if ncols is None:
        ncols = len(rows[0])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        h = [Fraction(0)] * ncols
        h[f] = Fraction(1)
        for row, p in zip(reduced, pivots):
            h[p] = -row[f]
        basis.append(h)
    return basis


def rank(rows) -> int:
    return len(rref(rows)[1])


def rank_mod_p(matrix, p: int = _PRIME) -> int:
    """Rank of an integer matrix over GF(p).

    This never exceeds the rational rank, so a full result certifies full
    rational rank.
    """
    a = np.array(matrix, dtype=object)
    a = np.array([[int(v) % p for v in row] for row in a], dtype=np.int64)
    nrows, ncols = a.shape
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + nz[0]
        a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), p - 2, p)
        a[r] = (a[r] * inv) % p
        col = a[:, c].copy()
        col[r] = 0
        nzr = np.nonzero(col)[0]
        if nzr.size:
            # split the product to stay inside int64
            hi, lo = divmod(a[r], 1 << 16)
            f = col[nzr][:, None]
            prod = ((f * hi) % p * (1 << 16) + f * lo) % p
            a[nzr] = (a[nzr] - prod) % p
        r += 1
    return r


def solve_square(matrix, rhs) -> list[Fraction]:
    """Solve a nonsingular square system exactly."""
    n = len(matrix)
    aug = [list(map(Fraction, row)) + [Fraction(b)] for row, b in zip(matrix, rhs)]
    reduced, pivots = rref(aug)
    if pivots != list(range(n)):
        raise ValueError("singular system")
    return [row[n] for row in reduced]


def inverse(matrix) -> list[list[Fraction]]:
    n = len(matrix)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(matrix)]
    reduced, pivots = rref(aug)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise ValueError("singular matrix")
    return [row[n:] for row in reduced]
