"""Exact rational coefficient engines.

Everything here is computed over the rationals (stdlib ``fractions.Fraction``,
which keeps values in lowest terms with positive denominator) — no floating
point.  The module provides truncated power series arithmetic, the triangular
localizer-coefficient table a[j][j'] with its two independent construction
routes (recurrence back-substitution vs. generating function), the convolution
inverse of the factorial band matrix, Stirling numbers of the second kind in
closed form, and the two candidate closed forms for the bracket coefficients
delta_l.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial

__all__ = [
    "Series",
    "CoeffTable",
    "PROVENANCE_RECURRENCE",
    "PROVENANCE_GENERATING",
    "bernoulli_generator",
    "a_table_recurrence",
    "a_table_generating",
    "a_entry_generating",
    "matrix_inverse_coeffs",
    "stirling_B",
    "delta_closed_form",
    "coeff_table_to_json",
    "coeff_table_from_json",
]

PROVENANCE_RECURRENCE = "recurrence"
PROVENANCE_GENERATING = "generating-function"


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


@dataclass(frozen=True)
class Series:
    """Truncated power series with exact rational coefficients.

    Arithmetic is exact and closed at a fixed truncation order: binary
    operations require both operands to carry the same order.
    """

    coefficients: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "coefficients", tuple(_frac(c) for c in self.coefficients)
        )
        if not self.coefficients:
            raise ValueError("a series needs at least the constant coefficient")

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def __getitem__(self, m: int) -> Fraction:
        return self.coefficients[m]

    def _check_order(self, other: "Series") -> None:
        if self.order != other.order:
            raise ValueError(
                f"series orders differ: {self.order} != {other.order}"
            )

    def __add__(self, other: "Series") -> "Series":
        self._check_order(other)
        return Series(tuple(a + b for a, b in zip(self.coefficients, other.coefficients)))

    def __sub__(self, other: "Series") -> "Series":
        self._check_order(other)
        return Series(tuple(a - b for a, b in zip(self.coefficients, other.coefficients)))

    def __mul__(self, other: "Series") -> "Series":
        self._check_order(other)
        n = self.order
        out = [Fraction(0)] * (n + 1)
        for i, a in enumerate(self.coefficients):
            if a == 0:
                continue
            for j in range(n + 1 - i):
                b = other.coefficients[j]
                if b:
                    out[i + j] += a * b
        return Series(tuple(out))

    def __pow__(self, exponent: int) -> "Series":
        if exponent < 0:
            raise ValueError("negative powers are not defined at fixed truncation")
        result = Series.one(self.order)
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def reciprocal(self) -> "Series":
        """Multiplicative inverse; requires a unit (nonzero constant term)."""
        c0 = self.coefficients[0]
        if c0 == 0:
            raise ZeroDivisionError("series has no reciprocal: constant term is 0")
        n = self.order
        inv = [Fraction(1) / c0]
        for m in range(1, n + 1):
            acc = Fraction(0)
            for i in range(1, m + 1):
                ci = self.coefficients[i]
                if ci:
                    acc += ci * inv[m - i]
            inv.append(-acc / c0)
        return Series(tuple(inv))

    def __truediv__(self, other: "Series") -> "Series":
        return self * other.reciprocal()

    @staticmethod
    def one(order: int) -> "Series":
        return Series((Fraction(1),) + (Fraction(0),) * order)

    @staticmethod
    def zero(order: int) -> "Series":
        return Series((Fraction(0),) * (order + 1))


def bernoulli_generator(order: int) -> Series:
    """Truncated series of t/(e^t - 1); coefficient m equals B_m/m!.

    Built as the reciprocal of sum_m t^m/(m+1)!, which is (e^t - 1)/t with
    exact factorial coefficients.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    ramp = Series(tuple(Fraction(1, factorial(m + 1)) for m in range(order + 1)))
    return ramp.reciprocal()


@dataclass(frozen=True)
class CoeffTable:
    """Triangular table of the localizer coefficients a[j][j'], 0 <= j' <= j.

    Boundary values are a[j][j] = 1 and a[j][0] = (-1)^j; successive rows are
    linked by the factorial convolution sum_{s=1}^{j-l} a[j][l+s]/s! = a[j-1][l].
    """

    jmax: int
    entries: dict = field(repr=False)
    provenance: str

    def __post_init__(self):
        if self.provenance not in (PROVENANCE_RECURRENCE, PROVENANCE_GENERATING):
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def entry(self, j: int, jprime: int) -> Fraction:
        if not 0 <= jprime <= j <= self.jmax:
            raise KeyError(f"entry ({j}, {jprime}) outside triangle jmax={self.jmax}")
        return self.entries[(j, jprime)]

    def row(self, j: int) -> tuple[Fraction, ...]:
        return tuple(self.entry(j, jp) for jp in range(j + 1))

    def check_recurrence(self) -> None:
        """Re-check the defining relation for every row pair; raises on failure."""
        for j in range(1, self.jmax + 1):
            for ell in range(j):
                acc = sum(
                    (self.entry(j, ell + s) / factorial(s) for s in range(1, j - ell + 1)),
                    Fraction(0),
                )
                if acc != self.entry(j - 1, ell):
                    raise ArithmeticError(
                        f"recurrence fails at j={j}, l={ell}: {acc} != {self.entry(j - 1, ell)}"
                    )


def a_table_recurrence(jmax: int) -> CoeffTable:
    """Build the a[j][j'] table row by row from the factorial recurrence.

    Each row solves a unit upper-triangular system by exact back-substitution:
    the unknowns (a[j][1], ..., a[j][j]) map onto the previous row through the
    band matrix whose m-th superdiagonal holds 1/(m+1)!.  The a[j][0] column is
    free there and pinned to (-1)^j.
    """
    if jmax < 0:
        raise ValueError("jmax must be >= 0")
    entries: dict = {(0, 0): Fraction(1)}
    for j in range(1, jmax + 1):
        row = [Fraction(0)] * (j + 1)
        row[0] = Fraction(-1) ** j
        for ell in range(j - 1, -1, -1):
            # unknown a[j][ell+1] from the ell-th equation of the system
            acc = entries[(j - 1, ell)]
            for s in range(2, j - ell + 1):
                acc -= row[ell + s] / factorial(s)
            row[ell + 1] = acc
        for jp in range(j + 1):
            entries[(j, jp)] = row[jp]
    return CoeffTable(jmax=jmax, entries=entries, provenance=PROVENANCE_RECURRENCE)


def a_table_generating(jmax: int) -> CoeffTable:
    """Build the same table from powers of the Bernoulli generating series.

    a[j][j'] is the coefficient of t^(j-j') in [t/(e^t-1)]^(j+1); the Taylor
    1/(j-j')! normalization is already part of the series coefficient.
    """
    if jmax < 0:
        raise ValueError("jmax must be >= 0")
    g = bernoulli_generator(jmax)
    entries: dict = {}
    gpow = g  # g^(j+1) for current j
    for j in range(jmax + 1):
        for jp in range(j + 1):
            entries[(j, jp)] = gpow[j - jp]
        if j < jmax:
            gpow = gpow * g
    return CoeffTable(jmax=jmax, entries=entries, provenance=PROVENANCE_GENERATING)


def a_entry_generating(j: int, jprime: int) -> Fraction:
    """Single coefficient a[j][j'] via the generating-function route."""
    if not 0 <= jprime <= j:
        raise ValueError("need 0 <= j' <= j")
    order = j - jprime
    g = bernoulli_generator(order)
    return (g ** (j + 1))[order]


def matrix_inverse_coeffs(m_max: int) -> list[Fraction]:
    """First row (c_0..c_m_max) of the inverse factorial band matrix.

    The unit upper-triangular Toeplitz matrix with 1/(m+1)! on band m has a
    Toeplitz inverse determined by its first row, solved here from the
    convolution identity sum_{i+h=m} c_i/(h+1)! = [m == 0].
    """
    if m_max < 0:
        raise ValueError("m_max must be >= 0")
    coeffs = [Fraction(1)]
    for m in range(1, m_max + 1):
        acc = Fraction(0)
        for h in range(1, m + 1):
            acc += coeffs[m - h] / factorial(h + 1)
        coeffs.append(-acc)
    return coeffs


def stirling_B(j: int, ell: int) -> Fraction:
    """Stirling number of the second kind B[j][l] in closed form.

    B[j][l] = sum_{m=0}^{l-1} (-1)^m (l-m)^(j-1) / (m! (l-m-1)!); the values
    are positive integers (returned as Fractions with denominator 1).
    """
    if j < 1 or not 1 <= ell <= j:
        raise ValueError("need j >= 1 and 1 <= ell <= j")
    acc = Fraction(0)
    for m in range(ell):
        term = Fraction((ell - m) ** (j - 1), factorial(m) * factorial(ell - m - 1))
        acc += -term if m % 2 else term
    return acc


def delta_closed_form(ell: int, k: int, sign_convention: str) -> Fraction:
    """Partial sum candidates for the bracket coefficients delta_l.

    Two printed conventions circulate for the same constants and they are not
    mutually consistent, so both are exposed:

    * ``"positive"``:    sum_{h=1}^{l} 1/(k^h h!)
    * ``"alternating"``: sum_{h=1}^{l} (-1/k)^h / h!

    Ground truth is whatever the symbolic extraction in
    :mod:`stratakit.localize` produces; callers compare against both.
    """
    if ell < 0:
        raise ValueError("ell must be >= 0")
    if k < 2:
        raise ValueError("k must be >= 2")
    if sign_convention == "positive":
        base = Fraction(1, k)
    elif sign_convention == "alternating":
        base = Fraction(-1, k)
    else:
        raise ValueError(f"unknown sign convention {sign_convention!r}")
    return sum(
        (base ** h / factorial(h) for h in range(1, ell + 1)), Fraction(0)
    )


@lru_cache(maxsize=None)
def default_table(jmax: int = 40) -> CoeffTable:
    """Shared recurrence-built table (immutable, safe to share across threads)."""
    return a_table_recurrence(jmax)


def _format_fraction(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def coeff_table_to_json(table: CoeffTable) -> str:
    """Serialize to the documented JSON schema; round-trips bit-exactly."""
    items = [
        [f"{j}/{jp}", _format_fraction(table.entries[(j, jp)])]
        for j in range(table.jmax + 1)
        for jp in range(j + 1)
    ]
    doc = {"jmax": table.jmax, "provenance": table.provenance, "entries": items}
    return json.dumps(doc, indent=2)


def coeff_table_from_json(text: str) -> CoeffTable:
    doc = json.loads(text)
    entries = {}
    for key, value in doc["entries"]:
        j_str, jp_str = key.split("/")
        entries[(int(j_str), int(jp_str))] = Fraction(value)
    return CoeffTable(jmax=doc["jmax"], entries=entries, provenance=doc["provenance"])
