"""Dual scalar arithmetic: exact Gaussian-integer polynomials and complex floats.

Exact amplitudes live in ``Z[i][eps, z]``: polynomials in the real coupling
``eps`` and the fugacity ``z = exp(mu / 2)`` whose coefficients are Gaussian
integers.  The complex-rotated coupling ``eta = i * eps`` is never a variable
of its own; it is the monomial ``i * eps``.  Because ``eps`` and ``z`` are
real, complex conjugation acts on the coefficients only.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

__all__ = [
    "ArithmeticOverflowError",
    "GaussInt",
    "ExactScalar",
    "Coefficient",
    "poly_mul",
    "poly_conj",
    "poly_eval",
    "checked_int64",
    "is_exact",
    "to_complex",
]

INT64_MAX = 2**63 - 1


class ArithmeticOverflowError(OverflowError):
    """Raised when a fixed-width or floating-point path would lose exactness."""


def checked_int64(value: int) -> int:
    """Return ``value`` unchanged if it fits a signed 64-bit word, else raise."""
    if -INT64_MAX - 1 <= value <= INT64_MAX:
        return value
    raise ArithmeticOverflowError(f"integer {value} does not fit in int64")


class GaussInt:
    """Gaussian integer ``re + i*im`` with arbitrary-precision parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: int = 0, im: int = 0):
        if not isinstance(re, int) or not isinstance(im, int):
            raise TypeError("GaussInt parts must be Python integers")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    def __setattr__(self, name, value):
        raise AttributeError("GaussInt is immutable")

    @classmethod
    def coerce(cls, value) -> "GaussInt":
        if isinstance(value, GaussInt):
            return value
        if isinstance(value, bool):
            return cls(int(value), 0)
        if isinstance(value, int):
            return cls(value, 0)
        if isinstance(value, complex) and value.real.is_integer() and value.imag.is_integer():
            return cls(int(value.real), int(value.imag))
        raise TypeError(f"cannot interpret {value!r} as a Gaussian integer")

    def __add__(self, other):
        o = GaussInt.coerce(other)
        return GaussInt(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = GaussInt.coerce(other)
        return GaussInt(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return GaussInt.coerce(other) - self

    def __mul__(self, other):
        o = GaussInt.coerce(other)
        return GaussInt(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __neg__(self):
        return GaussInt(-self.re, -self.im)

    def conj(self) -> "GaussInt":
        return GaussInt(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        try:
            o = GaussInt.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(self.re, self.im)

    def __repr__(self):
        return f"GaussInt({self.re}, {self.im})"

    def __str__(self):
        return f"({self.re}{self.im:+d}i)"


Exponent = tuple  # (power of eps, power of z)


class ExactScalar:
    """Canonical sparse polynomial ``sum c_ab * eps**a * z**b`` with Gaussian-integer ``c_ab``.

    Internally each coefficient is kept as a ``(re, im)`` pair of Python ints;
    :meth:`items` exposes them as :class:`GaussInt`.  Zero coefficients are
    never stored, so equality is dictionary equality.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping | Iterable | None = None):
        clean = {}
        if terms:
            pairs = terms.items() if isinstance(terms, Mapping) else terms
            for (a, b), c in pairs:
                if a < 0 or b < 0:
                    raise ValueError("exponents must be non-negative")
                g = GaussInt.coerce(c)
                key = (int(a), int(b))
                if key in clean:
                    re, im = clean[key]
                    g = GaussInt(re + g.re, im + g.im)
                if g:
                    clean[key] = (g.re, g.im)
                else:
                    clean.pop(key, None)
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> "ExactScalar":
        # trusted constructor: ``terms`` already canonical {(a, b): (re, im)}
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    # -- constructors -------------------------------------------------
    @classmethod
    def const(cls, c=1) -> "ExactScalar":
        return cls({(0, 0): c})

    @classmethod
    def eps(cls, power: int = 1) -> "ExactScalar":
        return cls({(power, 0): 1})

    @classmethod
    def eta(cls, power: int = 1) -> "ExactScalar":
        """``(i * eps) ** power``."""
        phase = [GaussInt(1, 0), GaussInt(0, 1), GaussInt(-1, 0), GaussInt(0, -1)][power % 4]
        return cls({(power, 0): phase})

    @classmethod
    def z(cls, power: int = 1) -> "ExactScalar":
        return cls({(0, power): 1})

    @classmethod
    def coerce(cls, value) -> "ExactScalar":
        if isinstance(value, ExactScalar):
            return value
        return cls.const(value)

    # -- inspection ---------------------------------------------------
    def items(self) -> Iterator:
        for key, (re, im) in sorted(self._terms.items()):
            yield key, GaussInt(re, im)

    @property
    def terms(self) -> dict:
        return {k: GaussInt(*v) for k, v in self._terms.items()}

    def coefficient(self, a: int, b: int = 0) -> GaussInt:
        return GaussInt(*self._terms.get((a, b), (0, 0)))

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def degree_eps(self) -> int:
        """Highest power of eps (``-1`` for the zero polynomial)."""
        return max((a for a, _ in self._terms), default=-1)

    def degree_z(self) -> int:
        return max((b for _, b in self._terms), default=-1)

    def normalize(self) -> "ExactScalar":
        return ExactScalar(self.terms)

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, ExactScalar):
            if other == 0:
                return self
            other = ExactScalar.coerce(other)
        out = dict(self._terms)
        for key, (re, im) in other._terms.items():
            if key in out:
                r0, i0 = out[key]
                r, i = r0 + re, i0 + im
                if r or i:
                    out[key] = (r, i)
                else:
                    del out[key]
            else:
                out[key] = (re, im)
        return ExactScalar._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return ExactScalar._raw({k: (-r, -i) for k, (r, i) in self._terms.items()})

    def __sub__(self, other):
        return self + (-ExactScalar.coerce(other))

    def __rsub__(self, other):
        return ExactScalar.coerce(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, ExactScalar):
            if isinstance(other, (int, GaussInt)) or (
                isinstance(other, complex) and other.real.is_integer() and other.imag.is_integer()
            ):
                g = GaussInt.coerce(other)
                if not g:
                    return ZERO
                gr, gi = g.re, g.im
                return ExactScalar._raw(
                    {k: (r * gr - i * gi, r * gi + i * gr) for k, (r, i) in self._terms.items()}
                )
            return NotImplemented
        return poly_mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        result, base = ONE, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conj(self) -> "ExactScalar":
        return poly_conj(self)

    def __eq__(self, other):
        if isinstance(other, ExactScalar):
            return self._terms == other._terms
        try:
            return self._terms == ExactScalar.coerce(other)._terms
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # -- evaluation ---------------------------------------------------
    def evaluate(self, eps: float, mu: float = 0.0) -> complex:
        return poly_eval(self, eps, mu)

    def eval_scaled(self, num: int, den: int, degree: int, z: int = 1) -> GaussInt:
        """Exact value of ``den**degree * p(num/den, z)`` for integer ``z``.

        ``degree`` must bound the eps-degree so the result stays integral.
        """
        re = im = 0
        for (a, b), (r, i) in self._terms.items():
            if a > degree:
                raise ValueError(f"eps-degree {a} exceeds declared bound {degree}")
            w = num**a * den ** (degree - a) * z**b
            re += r * w
            im += i * w
        return GaussInt(re, im)

    def eval_fraction(self, eps: Fraction, z: Fraction = Fraction(1)) -> tuple:
        re = im = Fraction(0)
        for (a, b), (r, i) in self._terms.items():
            w = Fraction(eps) ** a * Fraction(z) ** b
            re += r * w
            im += i * w
        return re, im

    # -- serialization ------------------------------------------------
    def to_json(self) -> list:
        return [[a, b, r, i] for (a, b), (r, i) in sorted(self._terms.items())]

    @classmethod
    def from_json(cls, data) -> "ExactScalar":
        return cls({(a, b): GaussInt(r, i) for a, b, r, i in data})

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for (a, b), (r, i) in sorted(self._terms.items()):
            parts.append(f"({r}{i:+d}i)·ε^{a}·z^{b}")
        return " + ".join(parts)

    @classmethod
    def parse(cls, text: str) -> "ExactScalar":
        """Inverse of :meth:`__str__`."""
        text = text.strip()
        if text == "0":
            return ZERO
        terms = {}
        for part in text.split(" + "):
            coeff, e, z = part.split("·")
            body = coeff.strip()[1:-2]  # drop "(" and "i)"
            cut = max(body.rfind("+"), body.rfind("-"))
            re, im = int(body[:cut]), int(body[cut:])
            terms[(int(e[2:]), int(z[2:]))] = GaussInt(re, im)
        return cls(terms)

    def __repr__(self):
        return f"ExactScalar({self.to_json()!r})"


ZERO = ExactScalar()
ONE = ExactScalar.const(1)

Coefficient = Union[ExactScalar, complex]


def poly_mul(a: ExactScalar, b: ExactScalar) -> ExactScalar:
    """Exact product in canonical form."""
    at, bt = a._terms, b._terms
    if not at or not bt:
        return ZERO
    if len(at) > len(bt):
        at, bt = bt, at
    out: dict = {}
    for (a1, b1), (r1, i1) in at.items():
        for (a2, b2), (r2, i2) in bt.items():
            key = (a1 + a2, b1 + b2)
            r = r1 * r2 - i1 * i2
            i = r1 * i2 + i1 * r2
            if key in out:
                r0, i0 = out[key]
                out[key] = (r0 + r, i0 + i)
            else:
                out[key] = (r, i)
    return ExactScalar._raw({k: v for k, v in out.items() if v[0] or v[1]})


def poly_conj(a: ExactScalar) -> ExactScalar:
    """Coefficient-wise Gaussian conjugation (eps and z are real)."""
    return ExactScalar._raw({k: (r, -i) for k, (r, i) in a._terms.items()})


def poly_eval(a: ExactScalar, eps: float, mu: float = 0.0) -> complex:
    """Evaluate at real ``eps`` and chemical potential ``mu`` (``z = exp(mu/2)``)."""
    if not (math.isfinite(eps) and math.isfinite(mu)):
        raise ValueError("eps and mu must be finite")
    z = math.exp(mu / 2.0)
    re = im = 0.0
    try:
        for (p, q), (r, i) in a._terms.items():
            w = eps**p * z**q
            re += r * w
            im += i * w
    except OverflowError as exc:
        raise ArithmeticOverflowError(str(exc)) from exc
    if not (math.isfinite(re) and math.isfinite(im)):
        raise ArithmeticOverflowError("evaluation overflowed to a non-finite value")
    return complex(re, im)


def is_exact(value) -> bool:
    return isinstance(value, ExactScalar)


def to_complex(value, eps: float | None = None, mu: float = 0.0) -> complex:
    if isinstance(value, ExactScalar):
        if eps is None:
            raise ValueError("an exact coefficient needs eps to be evaluated")
        return poly_eval(value, eps, mu)
    return complex(value)
