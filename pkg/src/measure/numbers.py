"""Exact arithmetic in multi-quadratic number fields

Values are ``Fraction`` when rational and ``QuadIrrational`` otherwise. A
``QuadIrrational`` is a rational combination of square roots of distinct
square-free integers; such radicals are linearly independent over Q, so the
representation is canonical and equality is structural.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Tuple, Union

import mpmath
from sympy import factorint

from src.core.errors import ExactArithmeticError

# Terms are keyed by square-free radicand; key 1 holds the rational part.
Terms = Dict[int, Fraction]
TermKey = Tuple[Tuple[int, Fraction], ...]

_MAX_CONJUGATION_PRIMES = 3


@lru_cache(maxsize=4096)
def squarefree_decomposition(n: int) -> Tuple[int, int]:
    """Split n > 0 as s**2 * d with d square-free; return (s, d)"""
    if n <= 0:
        raise ExactArithmeticError(f"radicand must be positive, got {n}")
    s, d = 1, 1
    for p, e in factorint(n).items():
        s *= p ** (e // 2)
        if e % 2:
            d *= p
    return s, d


@lru_cache(maxsize=4096)
def prime_factors(d: int) -> FrozenSet[int]:
    return frozenset(factorint(d)) if d > 1 else frozenset()


@lru_cache(maxsize=8192)
def _radical_product(d: int, e: int) -> Tuple[int, int]:
    """sqrt(d) * sqrt(e) = coef * sqrt(radicand) for square-free d, e"""
    g = math.gcd(d, e)
    return g, (d // g) * (e // g)


def _clean(terms: Mapping[int, Fraction]) -> Terms:
    return {d: c for d, c in terms.items() if c}


def _add_terms(x: Terms, y: Terms, sign: int = 1) -> Terms:
    out = dict(x)
    for d, c in y.items():
        out[d] = out.get(d, Fraction(0)) + sign * c
    return _clean(out)


def _mul_terms(x: Terms, y: Terms) -> Terms:
    out: Terms = {}
    for d, c in x.items():
        for e, k in y.items():
            coef, rad = _radical_product(d, e)
            out[rad] = out.get(rad, Fraction(0)) + c * k * coef
    return _clean(out)


def _scale_terms(x: Terms, k: Fraction) -> Terms:
    return _clean({d: c * k for d, c in x.items()})


def _key(terms: Terms) -> TermKey:
    return tuple(sorted(terms.items()))


def _sign_single(a: Fraction, b: Fraction, d: int) -> int:
    sa = (a > 0) - (a < 0)
    sb = (b > 0) - (b < 0)
    if sb == 0:
        return sa
    if sa == 0 or sa == sb:
        return sb if sa == 0 else sa
    return sa if a * a > b * b * d else sb


def _sign_by_precision(terms: Terms) -> int:
    """Sign from a high-precision evaluation with a rigorous error bound"""
    magnitude = sum(abs(float(c)) * math.sqrt(d) for d, c in terms.items()) + 1.0
    prec = 64
    while prec <= 1 << 16:
        with mpmath.workprec(prec):
            total = mpmath.mpf(0)
            for d, c in terms.items():
                total += mpmath.mpf(c.numerator) / c.denominator * mpmath.sqrt(d)
            bound = mpmath.mpf(magnitude) * len(terms) * mpmath.ldexp(1, 8 - prec)
            if total > bound:
                return 1
            if total < -bound:
                return -1
        prec *= 2
    raise ExactArithmeticError("sign could not be decided")


@lru_cache(maxsize=65536)
def _sign_key(key: TermKey) -> int:
    terms = dict(key)
    if not terms:
        return 0
    radicals = [d for d in terms if d != 1]
    if not radicals:
        c = terms[1]
        return (c > 0) - (c < 0)
    if len(radicals) == 1:
        d = radicals[0]
        return _sign_single(terms.get(1, Fraction(0)), terms[d], d)
    primes = frozenset().union(*(prime_factors(d) for d in radicals))
    if len(primes) > _MAX_CONJUGATION_PRIMES:
        return _sign_by_precision(terms)
    # x = u + v*sqrt(p) with u, v free of the largest prime p
    p = max(primes)
    u = {d: c for d, c in terms.items() if d % p}
    v = {d // p: c for d, c in terms.items() if d % p == 0}
    su, sv = _sign_key(_key(u)), _sign_key(_key(v))
    if sv == 0:
        return su
    if su == 0 or su == sv:
        return sv if su == 0 else su
    diff = _add_terms(_mul_terms(u, u), _scale_terms(_mul_terms(v, v), Fraction(p)), -1)
    return su * _sign_key(_key(diff))


def _inverse_terms(terms: Terms) -> Terms:
    if not terms:
        raise ExactArithmeticError("division by zero")
    radicals = [d for d in terms if d != 1]
    if not radicals:
        return {1: 1 / terms[1]}
    p = max(frozenset().union(*(prime_factors(d) for d in radicals)))
    u = {d: c for d, c in terms.items() if d % p}
    v = {d // p: c for d, c in terms.items() if d % p == 0}
    conjugate = _add_terms(u, {d * p: c for d, c in v.items()}, -1)
    norm = _add_terms(_mul_terms(u, u), _scale_terms(_mul_terms(v, v), Fraction(p)), -1)
    return _mul_terms(conjugate, _inverse_terms(norm))


class QuadIrrational:
    """Element of a multi-quadratic field with at least one radical term

    ``QuadIrrational(a, b, d)`` builds ``a + b*sqrt(d)``; arithmetic that
    cancels every radical returns a ``Fraction`` instead.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, a: Any = 0, b: Any = 0, d: int = 1):
        a, b = Fraction(a), Fraction(b)
        s, free = squarefree_decomposition(int(d))
        terms: Terms = {1: a}
        terms[free] = terms.get(free, Fraction(0)) + b * s
        self._terms: Terms = _clean(terms)
        self._hash: Any = None

    @classmethod
    def _from_terms(cls, terms: Terms) -> "QuadIrrational":
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def from_terms(cls, terms: Mapping[int, Any]) -> "ExactNumber":
        """Build from a radicand -> coefficient mapping (radicands need not be square-free)"""
        out: Terms = {}
        for d, c in terms.items():
            s, free = squarefree_decomposition(int(d))
            out[free] = out.get(free, Fraction(0)) + Fraction(c) * s
        return _wrap(_clean(out))

    # Accessors

    @property
    def terms(self) -> Terms:
        return dict(self._terms)

    @property
    def a(self) -> Fraction:
        return self._terms.get(1, Fraction(0))

    @property
    def radicals(self) -> List[Tuple[int, Fraction]]:
        return sorted((d, c) for d, c in self._terms.items() if d != 1)

    @property
    def is_simple(self) -> bool:
        """True for a + b*sqrt(d) with a single radical"""
        return len(self.radicals) <= 1

    @property
    def b(self) -> Fraction:
        rads = self.radicals
        if len(rads) > 1:
            raise ExactArithmeticError("value has more than one radical")
        return rads[0][1] if rads else Fraction(0)

    @property
    def d(self) -> int:
        rads = self.radicals
        if len(rads) > 1:
            raise ExactArithmeticError("value has more than one radical")
        return rads[0][0] if rads else 1

    # Arithmetic

    def __add__(self, other: Any) -> "ExactNumber":
        y = _terms_of(other)
        if y is None:
            return NotImplemented
        return _wrap(_add_terms(self._terms, y))

    __radd__ = __add__

    def __sub__(self, other: Any) -> "ExactNumber":
        y = _terms_of(other)
        if y is None:
            return NotImplemented
        return _wrap(_add_terms(self._terms, y, -1))

    def __rsub__(self, other: Any) -> "ExactNumber":
        y = _terms_of(other)
        if y is None:
            return NotImplemented
        return _wrap(_add_terms(y, self._terms, -1))

    def __mul__(self, other: Any) -> "ExactNumber":
        y = _terms_of(other)
        if y is None:
            return NotImplemented
        return _wrap(_mul_terms(self._terms, y))

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "ExactNumber":
        y = _terms_of(other)
        if y is None:
            return NotImplemented
        return _wrap(_mul_terms(self._terms, _inverse_terms(y)))

    def __rtruediv__(self, other: Any) -> "ExactNumber":
        y = _terms_of(other)
        if y is None:
            return NotImplemented
        return _wrap(_mul_terms(y, _inverse_terms(self._terms)))

    def __neg__(self) -> "QuadIrrational":
        return QuadIrrational._from_terms({d: -c for d, c in self._terms.items()})

    def __pos__(self) -> "QuadIrrational":
        return self

    def __abs__(self) -> "QuadIrrational":
        return -self if self.sign() < 0 else self

    def __pow__(self, exponent: int) -> "ExactNumber":
        if not isinstance(exponent, int):
            return NotImplemented
        base: Terms = self._terms if exponent >= 0 else _inverse_terms(self._terms)
        n = abs(exponent)
        result: Terms = {1: Fraction(1)}
        while n:
            if n & 1:
                result = _mul_terms(result, base)
            base = _mul_terms(base, base)
            n >>= 1
        return _wrap(result)

    def conjugate(self, prime: int) -> "ExactNumber":
        """Flip the sign of every radical divisible by ``prime``"""
        return _wrap({d: (-c if d % prime == 0 and d != 1 else c) for d, c in self._terms.items()})

    # Ordering

    def sign(self) -> int:
        return _sign_key(_key(self._terms))

    def _cmp(self, other: Any) -> Any:
        y = _terms_of(other)
        if y is None:
            return NotImplemented
        return _sign_key(_key(_add_terms(self._terms, y, -1)))

    def __eq__(self, other: Any) -> bool:
        y = _terms_of(other)
        if y is None:
            return NotImplemented
        return self._terms == y

    def __lt__(self, other: Any) -> bool:
        c = self._cmp(other)
        return c if c is NotImplemented else c < 0

    def __le__(self, other: Any) -> bool:
        c = self._cmp(other)
        return c if c is NotImplemented else c <= 0

    def __gt__(self, other: Any) -> bool:
        c = self._cmp(other)
        return c if c is NotImplemented else c > 0

    def __ge__(self, other: Any) -> bool:
        c = self._cmp(other)
        return c if c is NotImplemented else c >= 0

    def __hash__(self) -> int:
        if self._hash is None:
            if set(self._terms) <= {1}:
                self._hash = hash(self.a)
            else:
                self._hash = hash(("quad", _key(self._terms)))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self._terms)

    # Conversions

    def __floor__(self) -> int:
        return exact_floor(self)

    def __float__(self) -> float:
        return float(to_mpf(self))

    def __repr__(self) -> str:
        return f"QuadIrrational({format_exact(self)!r})"

    def __str__(self) -> str:
        return format_exact(self)


ExactNumber = Union[Fraction, QuadIrrational]


def _terms_of(value: Any) -> Any:
    if isinstance(value, QuadIrrational):
        return value._terms
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        v = Fraction(value)
        return {1: v} if v else {}
    return None


def _wrap(terms: Terms) -> ExactNumber:
    if any(d != 1 for d in terms):
        return QuadIrrational._from_terms(terms)
    return terms.get(1, Fraction(0))


def as_exact(value: Any) -> ExactNumber:
    """Coerce ints, Fractions, strings and JSON objects to an exact number"""
    if isinstance(value, QuadIrrational):
        return value
    if isinstance(value, bool):
        raise ExactArithmeticError("booleans are not numbers")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return parse_exact(value)
    if isinstance(value, Mapping):
        return exact_from_json(value)
    raise ExactArithmeticError(f"cannot interpret {value!r} as an exact number")


def exact_sign(x: Any) -> int:
    if isinstance(x, QuadIrrational):
        return x.sign()
    return (x > 0) - (x < 0)


def exact_abs(x: ExactNumber) -> ExactNumber:
    return abs(x)


def is_rational(x: Any) -> bool:
    return not isinstance(x, QuadIrrational)


def sqrt_exact(value: Any) -> ExactNumber:
    """Square root of a nonnegative rational, exact in the quadratic field"""
    q = Fraction(value)
    if q < 0:
        raise ExactArithmeticError(f"square root of negative number {q}")
    if q == 0:
        return Fraction(0)
    # sqrt(n/m) = sqrt(n*m)/m
    s, d = squarefree_decomposition(q.numerator * q.denominator)
    coef = Fraction(s, q.denominator)
    return coef if d == 1 else QuadIrrational(0, coef, d)


def to_mpf(x: Any) -> mpmath.mpf:
    """High-precision value at the current mpmath working precision"""
    if isinstance(x, QuadIrrational):
        total = mpmath.mpf(0)
        for d, c in x._terms.items():
            term = mpmath.mpf(c.numerator) / c.denominator
            total += term if d == 1 else term * mpmath.sqrt(d)
        return total
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def exact_floor(x: Any) -> int:
    if not isinstance(x, QuadIrrational):
        return math.floor(Fraction(x))
    with mpmath.workdps(30):
        k = int(mpmath.floor(to_mpf(x)))
    while x < k:
        k -= 1
    while x >= k + 1:
        k += 1
    return k


def frac_part(x: Any) -> ExactNumber:
    """x - floor(x), in [0, 1)"""
    return as_exact(x) - exact_floor(x)


def rational_coordinates(x: Any) -> Dict[int, Fraction]:
    """Coordinates of x over the basis {sqrt(d)}; key 1 is the rational part"""
    terms = _terms_of(x)
    if terms is None:
        raise ExactArithmeticError(f"not an exact number: {x!r}")
    return dict(terms)


def radicands(values: Iterable[Any]) -> List[int]:
    """Sorted basis radicands (including 1) spanned by ``values``"""
    seen = {1}
    for v in values:
        seen.update(rational_coordinates(v))
    return sorted(seen)


# Formatting and serialization


def _fmt_fraction(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_exact(x: Any) -> str:
    """Readable string such as ``-1+√2`` or ``5/2-3/2√2``; parse_exact reads it back"""
    terms = _terms_of(x)
    if terms is None:
        return str(x)
    if not terms:
        return "0"
    parts: List[str] = []
    for d, c in sorted(terms.items()):
        if d == 1:
            body = _fmt_fraction(abs(c))
        elif abs(c) == 1:
            body = f"√{d}"
        else:
            body = f"{_fmt_fraction(abs(c))}√{d}"
        sign = "-" if c < 0 else ("+" if parts else "")
        parts.append(f"{sign}{body}")
    return "".join(parts)


def exact_to_json(x: Any) -> Dict[str, Any]:
    """JSON object {"a","b","d"}; values with several radicals add a "radicals" list"""
    terms = _terms_of(x)
    if terms is None:
        raise ExactArithmeticError(f"not an exact number: {x!r}")
    rads = sorted((d, c) for d, c in terms.items() if d != 1)
    a = terms.get(1, Fraction(0))
    if len(rads) <= 1:
        d, b = rads[0] if rads else (1, Fraction(0))
        return {"a": _fmt_fraction(a), "b": _fmt_fraction(b), "d": d}
    return {
        "a": _fmt_fraction(a),
        "radicals": [{"d": d, "c": _fmt_fraction(c)} for d, c in rads],
    }


def exact_from_json(obj: Any) -> ExactNumber:
    if isinstance(obj, (int, str)) and not isinstance(obj, bool):
        return as_exact(obj)
    if not isinstance(obj, Mapping) or "a" not in obj:
        raise ExactArithmeticError(f"not an exact-number object: {obj!r}")
    try:
        terms: Dict[int, Any] = {1: Fraction(obj["a"])}
        if "radicals" in obj:
            for item in obj["radicals"]:
                terms[int(item["d"])] = terms.get(int(item["d"]), 0) + Fraction(item["c"])
        else:
            d = int(obj.get("d", 1))
            terms[d] = terms.get(d, 0) + Fraction(obj.get("b", 0))
    except (ValueError, TypeError, KeyError, ZeroDivisionError) as exc:
        raise ExactArithmeticError(f"malformed exact number {obj!r}: {exc}") from exc
    return QuadIrrational.from_terms(terms)


# Parsing


class _Parser:
    """Recursive-descent reader for + - * / ( ) √n sqrt(...) and implicit products"""

    def __init__(self, text: str):
        self.text = text.replace("−", "-").replace(" ", "").replace("·", "*")
        self.pos = 0

    def parse(self) -> ExactNumber:
        if not self.text:
            raise ExactArithmeticError("empty number")
        value = self._expr()
        if self.pos != len(self.text):
            raise ExactArithmeticError(f"unexpected {self.text[self.pos:]!r} in {self.text!r}")
        return value

    def _peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _expr(self) -> ExactNumber:
        value = self._term()
        while self._peek() in ("+", "-") and self._peek():
            op = self.text[self.pos]
            self.pos += 1
            rhs = self._term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def _term(self) -> ExactNumber:
        value = self._unary()
        while True:
            ch = self._peek()
            if ch in ("*", "/") and ch:
                self.pos += 1
                rhs = self._unary()
                if ch == "*":
                    value = value * rhs
                else:
                    if not rhs:
                        raise ExactArithmeticError("division by zero")
                    value = value / rhs
            elif ch and (ch in "(√" or ch.isdigit() or self.text.startswith("sqrt", self.pos)):
                value = value * self._unary()
            else:
                return value

    def _unary(self) -> ExactNumber:
        if self._peek() == "-":
            self.pos += 1
            return -self._unary()
        if self._peek() == "+":
            self.pos += 1
            return self._unary()
        return self._atom()

    def _atom(self) -> ExactNumber:
        ch = self._peek()
        if ch == "(":
            self.pos += 1
            value = self._expr()
            if self._peek() != ")":
                raise ExactArithmeticError(f"unbalanced parenthesis in {self.text!r}")
            self.pos += 1
            return value
        if ch == "√" or self.text.startswith("sqrt", self.pos):
            self.pos += 1 if ch == "√" else 4
            arg = self._atom()
            if isinstance(arg, QuadIrrational):
                raise ExactArithmeticError("nested radicals are not supported")
            return sqrt_exact(arg)
        start = self.pos
        while self._peek() and (self._peek().isdigit() or self._peek() == "."):
            self.pos += 1
        if start == self.pos:
            raise ExactArithmeticError(f"expected a number at {self.text[start:]!r}")
        return Fraction(self.text[start : self.pos])


def parse_exact(text: str) -> ExactNumber:
    """Parse strings such as ``√2-1``, ``(5-3√2)/2`` or ``1/3``"""
    return _Parser(str(text)).parse()
