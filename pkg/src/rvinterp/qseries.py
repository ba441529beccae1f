"""Exact Laurent series in ``w = q^{1/2} = exp(i pi z)`` over the rationals.

Everything here is exact: coefficients are :class:`fractions.Fraction` and a
series carries the power of ``w`` below which it is known (``order``).
Arithmetic never pretends to know more than its operands do.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

DEFAULT_ORDER = 64


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class HalfQSeries:
    """``sum_i coeffs[i] * w**(valuation + i)  + O(w**order)``."""

    valuation: int
    coeffs: tuple
    order: int

    def __post_init__(self):
        if len(self.coeffs) != self.order - self.valuation:
            raise ValueError(
                f"expected {self.order - self.valuation} coefficients, got {len(self.coeffs)}"
            )

    # -- construction -------------------------------------------------------
    @classmethod
    def from_coeffs(cls, coeffs: Iterable, valuation: int = 0, order: int | None = None) -> "HalfQSeries":
        cs = [_frac(c) for c in coeffs]
        if order is None:
            order = valuation + len(cs)
        n = order - valuation
        if n < 0:
            raise ValueError("order below valuation")
        cs = (cs + [Fraction(0)] * n)[:n]
        return cls(valuation, tuple(cs), order).normalized()

    @classmethod
    def monomial(cls, k: int, order: int, c=1) -> "HalfQSeries":
        return cls.from_coeffs([c], valuation=k, order=order)

    @classmethod
    def zero(cls, order: int) -> "HalfQSeries":
        return cls(order, (), order)

    @classmethod
    def one(cls, order: int) -> "HalfQSeries":
        return cls.monomial(0, order)

    def normalized(self) -> "HalfQSeries":
        """Strip leading zeros so that the first stored coefficient is nonzero."""
        i = 0
        while i < len(self.coeffs) and self.coeffs[i] == 0:
            i += 1
        if i == 0:
            return self
        return HalfQSeries(self.valuation + i, self.coeffs[i:], self.order)

    # -- access ---------------------------------------------------------------
    def __getitem__(self, k: int) -> Fraction:
        """Coefficient of ``w**k``."""
        if k >= self.order:
            raise IndexError(f"coefficient w^{k} unknown (series known below w^{self.order})")
        i = k - self.valuation
        if i < 0:
            return Fraction(0)
        return self.coeffs[i]

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def truncate(self, order: int) -> "HalfQSeries":
        if order > self.order:
            raise ValueError("cannot extend the known order of a series")
        if order <= self.valuation:
            return HalfQSeries.zero(order)
        return HalfQSeries(self.valuation, self.coeffs[: order - self.valuation], order)

    def principal_part(self) -> dict:
        """Coefficients of ``w**k`` for ``k <= 0`` as ``{k: c}`` (nonzero only)."""
        return {k: self[k] for k in range(self.valuation, min(1, self.order)) if self[k] != 0}

    # -- arithmetic -----------------------------------------------------------
    def __neg__(self):
        return HalfQSeries(self.valuation, tuple(-c for c in self.coeffs), self.order)

    def __add__(self, other):
        if not isinstance(other, HalfQSeries):
            other = HalfQSeries.monomial(0, self.order, other)
        return series_add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, HalfQSeries):
            other = HalfQSeries.monomial(0, self.order, other)
        return series_add(self, -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, HalfQSeries):
            return series_mul(self, other)
        c = _frac(other)
        return HalfQSeries(self.valuation, tuple(c * x for x in self.coeffs), self.order).normalized()

    __rmul__ = __mul__

    def __pow__(self, k: int):
        return series_pow(self, k)

    # -- serialization --------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "valuation": self.valuation,
            "order": self.order,
            "coeffs": [[c.numerator, c.denominator] for c in self.coeffs],
        }

    @classmethod
    def from_json(cls, d: dict) -> "HalfQSeries":
        coeffs = tuple(Fraction(int(a), int(b)) for a, b in d["coeffs"])
        return cls(int(d["valuation"]), coeffs, int(d["order"]))


def series_add(a: HalfQSeries, b: HalfQSeries) -> HalfQSeries:
    order = min(a.order, b.order)
    lo = min(a.valuation, b.valuation, order)
    coeffs = [a[k] + b[k] if k < order else 0 for k in range(lo, order)]
    return HalfQSeries(lo, tuple(coeffs), order).normalized()


def series_mul(a: HalfQSeries, b: HalfQSeries) -> HalfQSeries:
    a, b = a.normalized(), b.normalized()
    order = min(a.order + b.valuation, b.order + a.valuation)
    val = a.valuation + b.valuation
    if order <= val:
        return HalfQSeries.zero(order)
    n = order - val
    ac, bc = a.coeffs[:n], b.coeffs[:n]
    if all(c.denominator == 1 for c in ac) and all(c.denominator == 1 for c in bc):
        # integral series (the common case) are multiplied as plain ints
        ai = [c.numerator for c in ac]
        bi = [c.numerator for c in bc]
        acc = [0] * n
        for i, x in enumerate(ai):
            if x:
                for j, y in enumerate(bi[: n - i]):
                    acc[i + j] += x * y
        return HalfQSeries(val, tuple(Fraction(c) for c in acc), order).normalized()
    out = [Fraction(0)] * n
    for i, x in enumerate(ac):
        if x == 0:
            continue
        for j, y in enumerate(bc[: n - i]):
            if y:
                out[i + j] += x * y
    return HalfQSeries(val, tuple(out), order).normalized()


def series_invert(a: HalfQSeries) -> HalfQSeries:
    """Multiplicative inverse; the leading stored coefficient must be nonzero."""
    a = a.normalized()
    if not a.coeffs or a.coeffs[0] == 0:
        raise ZeroDivisionError("cannot invert a series that vanishes to known order")
    v = a.valuation
    n = a.order - v  # relative precision
    c0 = a.coeffs[0]
    inv = [Fraction(0)] * n
    inv[0] = 1 / c0
    for k in range(1, n):
        s = sum((a.coeffs[j] * inv[k - j] for j in range(1, k + 1) if a.coeffs[j]), Fraction(0))
        inv[k] = -s / c0
    return HalfQSeries(-v, tuple(inv), -v + n)


def series_pow(a: HalfQSeries, k: int) -> HalfQSeries:
    if k < 0:
        return series_pow(series_invert(a), -k)
    result = None
    base = a
    while k:
        if k & 1:
            result = base if result is None else series_mul(result, base)
        k >>= 1
        if k:
            base = series_mul(base, base)
    if result is None:
        # a**0 is known as far as a's relative precision reaches
        return HalfQSeries.one(a.order - a.normalized().valuation)
    return result


@dataclass(frozen=True)
class RationalPolynomial:
    """Polynomial with exact rational coefficients, ``coeffs[k]`` multiplying ``X**k``."""

    coeffs: tuple

    @classmethod
    def from_coeffs(cls, coeffs: Sequence) -> "RationalPolynomial":
        cs = [_frac(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        return cls(tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def __call__(self, x):
        """Horner evaluation; works for Fractions, floats, complex and numpy arrays."""
        acc = 0 * x
        for c in reversed(self.coeffs):
            acc = acc * x + (c if isinstance(x, Fraction) else float(c))
        return acc

    def to_json(self) -> list:
        return [[c.numerator, c.denominator] for c in self.coeffs]


@dataclass(frozen=True)
class QuarterShifted:
    """``w**shift * series``; used for Theta_2, which carries a ``w**(1/4)`` factor."""

    shift: Fraction
    series: HalfQSeries

    def fourth_power(self) -> HalfQSeries:
        s = 4 * self.shift
        assert s.denominator == 1
        p = series_pow(self.series, 4)
        return HalfQSeries(p.valuation + int(s), p.coeffs, p.order + int(s))


def theta_series(which: int, order: int = DEFAULT_ORDER):
    """Jacobi theta series in ``w``.

    ``which`` is 3 or 4 for a :class:`HalfQSeries`; ``which == 2`` returns a
    :class:`QuarterShifted` ``w**(1/4) * sum_m w**(m**2 + m)``.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    coeffs = [0] * order
    if which in (3, 4):
        n = 0
        while n * n < order:
            c = 1 if n == 0 else 2
            coeffs[n * n] += c * ((-1) ** n if which == 4 else 1)
            n += 1
        return HalfQSeries.from_coeffs(coeffs, 0, order)
    if which == 2:
        m = 0
        while m * (m + 1) < order:
            coeffs[m * (m + 1)] += 2  # m and -m-1 give the same exponent
            m += 1
        return QuarterShifted(Fraction(1, 4), HalfQSeries.from_coeffs(coeffs, 0, order))
    raise ValueError(f"unknown theta index {which!r}")


@lru_cache(maxsize=None)
def theta2_fourth(order: int = DEFAULT_ORDER) -> HalfQSeries:
    return theta_series(2, order).fourth_power().truncate(order)


@lru_cache(maxsize=None)
def lambda_series(order: int = DEFAULT_ORDER) -> HalfQSeries:
    """Modular lambda ``Theta_2^4 / Theta_3^4`` to ``O(w**order)``."""
    if order < 2:
        raise ValueError("order must be >= 2")
    t3 = theta_series(3, order)
    return series_mul(theta2_fourth(order), series_invert(series_pow(t3, 4))).truncate(order)


@lru_cache(maxsize=None)
def j_series(order: int = DEFAULT_ORDER) -> HalfQSeries:
    """Hauptmodul ``J = lambda (1 - lambda) / 16`` for the theta group."""
    lam = lambda_series(order)
    return (Fraction(1, 16) * series_mul(lam, 1 - lam)).truncate(order)


@lru_cache(maxsize=None)
def j_inverse_series(order: int = DEFAULT_ORDER) -> HalfQSeries:
    return series_invert(j_series(order + 2))


def j_inverse_at_cusp_one(order: int = DEFAULT_ORDER) -> HalfQSeries:
    """Expansion of ``1/J(1 - 1/z)`` in ``w = exp(i pi z)``.

    Uses ``lambda(1 - 1/z) = 1 - 1/lambda(z)`` so that
    ``1/J(1 - 1/z) = 16 lambda^2 / (lambda - 1)``.
    """
    lam = lambda_series(order)
    return (16 * series_mul(series_pow(lam, 2), series_invert(lam - 1))).truncate(order)


def jacobi_defect(order: int = DEFAULT_ORDER) -> HalfQSeries:
    """``Theta_3^4 - Theta_2^4 - Theta_4^4``; identically zero."""
    t3 = series_pow(theta_series(3, order), 4)
    t4 = series_pow(theta_series(4, order), 4)
    return t3 - theta2_fourth(order) - t4
