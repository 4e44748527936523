"""Piecewise polynomial functions on [0,1) with exact coefficients

Balanced partitions and towers work with the true function rather than a
binned stand-in, and sums of translates of an affine or quadratic function
stay piecewise polynomial of the same degree. Coefficient tuples are stored
constant term first with trailing zeros removed; the empty tuple is zero.
"""

from __future__ import annotations

from bisect import bisect_right
from fractions import Fraction
from itertools import zip_longest
from math import comb
from typing import TYPE_CHECKING, Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from src.core.errors import IntervalError, PreconditionError
from src.measure.intervals import ONE, ZERO, IntervalSet
from src.measure.numbers import ExactNumber, as_exact, exact_from_json, exact_to_json, sqrt_exact
from src.measure.sources import FunctionSource
from src.measure.step_functions import StepFunction

if TYPE_CHECKING:
    from src.transforms.interval_map import PiecewiseTranslation

Coeffs = Tuple[ExactNumber, ...]
PolyAtom = Tuple[ExactNumber, ExactNumber, Coeffs]


def _trim(coeffs: Iterable[Any]) -> Coeffs:
    out = [as_exact(c) for c in coeffs]
    while out and not out[-1]:
        out.pop()
    return tuple(out)


def poly_eval(c: Coeffs, x: Any) -> ExactNumber:
    acc: ExactNumber = ZERO
    for coef in reversed(c):
        acc = acc * x + coef
    return acc


def poly_add(a: Coeffs, b: Coeffs) -> Coeffs:
    return _trim(x + y for x, y in zip_longest(a, b, fillvalue=ZERO))


def poly_scale(a: Coeffs, k: Any) -> Coeffs:
    return _trim(c * k for c in a)


def poly_shift(c: Coeffs, s: Any) -> Coeffs:
    """Coefficients of x -> p(x + s)"""
    out: List[ExactNumber] = [ZERO] * len(c)
    for j, cj in enumerate(c):
        power: ExactNumber = ONE
        for k in range(j, -1, -1):
            out[k] = out[k] + cj * comb(j, k) * power
            power = power * s
    return _trim(out)


def antiderivative(c: Coeffs) -> Coeffs:
    return _trim([ZERO] + [cj * Fraction(1, j + 1) for j, cj in enumerate(c)])


def poly_extrema(c: Coeffs, lo: ExactNumber, hi: ExactNumber) -> Tuple[ExactNumber, ExactNumber]:
    """(min, max) of p over the closed interval [lo, hi]"""
    candidates = [poly_eval(c, lo), poly_eval(c, hi)]
    if len(c) == 3:
        vertex = -c[1] / (2 * c[2])
        if lo < vertex < hi:
            candidates.append(poly_eval(c, vertex))
    elif len(c) > 3:
        raise PreconditionError(f"extrema of degree {len(c) - 1} polynomials are not supported")
    return min(candidates), max(candidates)


def poly_roots(c: Coeffs) -> Optional[List[ExactNumber]]:
    """Exact real roots of a polynomial of degree <= 2; None for the zero polynomial

    Quadratics whose discriminant is not rational have no representable root here.
    """
    if not c:
        return None
    if len(c) == 1:
        return []
    if len(c) == 2:
        return [-c[0] / c[1]]
    if len(c) == 3:
        disc = c[1] * c[1] - 4 * c[2] * c[0]
        if not isinstance(disc, Fraction) or disc < 0:
            return []
        r = sqrt_exact(disc)
        return sorted({(-c[1] - r) / (2 * c[2]), (-c[1] + r) / (2 * c[2])})
    return []


def _merge_atoms(atoms: Iterable[PolyAtom]) -> List[PolyAtom]:
    out: List[PolyAtom] = []
    for lo, hi, c in atoms:
        if not c or not lo < hi:
            continue
        if out and out[-1][1] == lo and out[-1][2] == c:
            out[-1] = (out[-1][0], hi, c)
        else:
            out.append((lo, hi, c))
    return out


def _cover(atoms: Sequence[PolyAtom]) -> List[PolyAtom]:
    out: List[PolyAtom] = []
    cursor: ExactNumber = ZERO
    for lo, hi, c in atoms:
        if cursor < lo:
            out.append((cursor, lo, ()))
        out.append((lo, hi, c))
        cursor = hi
    if cursor < ONE:
        out.append((cursor, ONE, ()))
    return out


class PiecewisePolynomial:
    """Function equal to a polynomial on each of finitely many intervals, zero elsewhere"""

    __slots__ = ("_atoms", "_los")

    def __init__(self, atoms: Iterable[Tuple[Any, Any, Iterable[Any]]] = ()):
        ordered = sorted(
            ((as_exact(lo), as_exact(hi), _trim(c)) for lo, hi, c in atoms),
            key=lambda atom: atom[0],
        )
        for (_, hi, _), (lo, _, _) in zip(ordered, ordered[1:]):
            if lo < hi:
                raise IntervalError("polynomial atoms overlap")
        self._atoms: Tuple[PolyAtom, ...] = tuple(_merge_atoms(ordered))
        self._los = [lo for lo, _, _ in self._atoms]

    @classmethod
    def _trusted(cls, atoms: Iterable[PolyAtom]) -> "PiecewisePolynomial":
        obj = cls.__new__(cls)
        obj._atoms = tuple(_merge_atoms(atoms))
        obj._los = [lo for lo, _, _ in obj._atoms]
        return obj

    @classmethod
    def zero(cls) -> "PiecewisePolynomial":
        return cls._trusted([])

    @classmethod
    def polynomial(cls, coeffs: Sequence[Any], support: Optional[IntervalSet] = None) -> "PiecewisePolynomial":
        c = _trim(coeffs)
        return cls._trusted([(lo, hi, c) for lo, hi in (support or IntervalSet.unit())])

    @classmethod
    def from_step(cls, f: StepFunction) -> "PiecewisePolynomial":
        return cls._trusted([(lo, hi, (v,)) for lo, hi, v in f.atoms])

    @classmethod
    def from_source(cls, src: FunctionSource) -> "PiecewisePolynomial":
        if src.kind == "affine":
            return cls.polynomial((src.intercept, src.slope))
        if src.kind == "square":
            return cls.polynomial((0, 0, 1))
        return cls.from_step(src.base)

    # Views

    @property
    def atoms(self) -> Tuple[PolyAtom, ...]:
        return self._atoms

    @property
    def support(self) -> IntervalSet:
        return IntervalSet._trusted([(lo, hi) for lo, hi, _ in self._atoms])

    @property
    def degree(self) -> int:
        return max((len(c) - 1 for _, _, c in self._atoms), default=-1)

    def __len__(self) -> int:
        return len(self._atoms)

    def __bool__(self) -> bool:
        return bool(self._atoms)

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, PiecewisePolynomial):
            return NotImplemented
        return self._atoms == other._atoms

    def __hash__(self) -> int:
        return hash(self._atoms)

    def __repr__(self) -> str:
        return f"PiecewisePolynomial({len(self._atoms)} atoms, degree {self.degree})"

    def evaluate(self, x: Any) -> ExactNumber:
        idx = bisect_right(self._los, x) - 1
        if idx >= 0 and x < self._atoms[idx][1]:
            return poly_eval(self._atoms[idx][2], x)
        return ZERO

    __call__ = evaluate

    def restrict(self, s: IntervalSet) -> "PiecewisePolynomial":
        out: List[PolyAtom] = []
        for cut_lo, cut_hi in s:
            for lo, hi, c in self._meeting(cut_lo, cut_hi):
                out.append((max(lo, cut_lo), min(hi, cut_hi), c))
        return PiecewisePolynomial._trusted(out)

    def _meeting(self, lo: ExactNumber, hi: ExactNumber) -> Iterable[PolyAtom]:
        """Atoms meeting [lo, hi)"""
        k = max(bisect_right(self._los, lo) - 1, 0)
        atoms = self._atoms
        while k < len(atoms) and atoms[k][0] < hi:
            if atoms[k][1] > lo:
                yield atoms[k]
            k += 1

    def segments(self, lo: ExactNumber, hi: ExactNumber) -> List[PolyAtom]:
        """Atoms covering [lo, hi), zero-polynomial gaps included"""
        out: List[PolyAtom] = []
        cursor = lo
        for a, b, c in self.restrict(IntervalSet._trusted([(lo, hi)])).atoms:
            if cursor < a:
                out.append((cursor, a, ()))
            out.append((a, b, c))
            cursor = b
        if cursor < hi:
            out.append((cursor, hi, ()))
        return out

    # Algebra

    def combine(
        self, other: "PiecewisePolynomial", op: Callable[[Coeffs, Coeffs], Coeffs]
    ) -> "PiecewisePolynomial":
        a, b = _cover(self._atoms), _cover(other._atoms)
        out: List[PolyAtom] = []
        i = j = 0
        cursor: ExactNumber = ZERO
        while i < len(a) and j < len(b):
            end = min(a[i][1], b[j][1])
            out.append((cursor, end, op(a[i][2], b[j][2])))
            cursor = end
            if a[i][1] == end:
                i += 1
            if b[j][1] == end:
                j += 1
        return PiecewisePolynomial._trusted(out)

    def __add__(self, other: "PiecewisePolynomial") -> "PiecewisePolynomial":
        if not other:
            return self
        if not self:
            return other
        return self.combine(other, poly_add)

    def __sub__(self, other: "PiecewisePolynomial") -> "PiecewisePolynomial":
        return self + (-other)

    def __neg__(self) -> "PiecewisePolynomial":
        return PiecewisePolynomial._trusted([(lo, hi, poly_scale(c, -1)) for lo, hi, c in self._atoms])

    def scale(self, k: Any) -> "PiecewisePolynomial":
        factor = as_exact(k)
        return PiecewisePolynomial._trusted([(lo, hi, poly_scale(c, factor)) for lo, hi, c in self._atoms])

    def translate(self, shift: Any) -> "PiecewisePolynomial":
        """x -> f(x - shift), carried along with its support"""
        s = as_exact(shift)
        return PiecewisePolynomial._trusted(
            [(lo + s, hi + s, poly_shift(c, -s)) for lo, hi, c in self._atoms]
        )

    def compose(self, t: "PiecewiseTranslation") -> "PiecewisePolynomial":
        """f∘t on the domain of ``t``; zero off that domain"""
        out: List[PolyAtom] = []
        for lo, hi, shift in t.branches:
            a_lo, a_hi = lo + shift, hi + shift
            for a, b, c in self._meeting(a_lo, a_hi):
                out.append((max(a, a_lo) - shift, min(b, a_hi) - shift, poly_shift(c, shift)))
        return PiecewisePolynomial._trusted(out)

    # Position coordinates along a set

    def profile(self, cell: IntervalSet) -> "PiecewisePolynomial":
        """t -> f(point of ``cell`` at measure t), on [0, p(cell))"""
        out: List[PolyAtom] = []
        offset: ExactNumber = ZERO
        for lo, hi in cell:
            part = self.restrict(IntervalSet._trusted([(lo, hi)])).translate(offset - lo)
            out.extend(part.atoms)
            offset = offset + (hi - lo)
        return PiecewisePolynomial._trusted(out)

    def place(self, cell: IntervalSet) -> "PiecewisePolynomial":
        """Inverse of ``profile``: a function of position laid onto ``cell``"""
        out: List[PolyAtom] = []
        offset: ExactNumber = ZERO
        for lo, hi in cell:
            width = hi - lo
            part = self.restrict(IntervalSet._trusted([(offset, offset + width)])).translate(lo - offset)
            out.extend(part.atoms)
            offset = offset + width
        return PiecewisePolynomial._trusted(sorted(out, key=lambda atom: atom[0]))

    # Integrals and ranges

    def integral(self) -> ExactNumber:
        total: ExactNumber = ZERO
        for lo, hi, c in self._atoms:
            F = antiderivative(c)
            total = total + (poly_eval(F, hi) - poly_eval(F, lo))
        return total

    def integral_over(self, s: IntervalSet) -> ExactNumber:
        return self.restrict(s).integral()

    def range_over(self, s: Optional[IntervalSet] = None) -> Optional[Tuple[ExactNumber, ExactNumber]]:
        """(inf, sup) over the closure of each atom met by ``s``; None for an empty set"""
        region = s if s is not None else IntervalSet.unit()
        if not region:
            return None
        part = self.restrict(region)
        lows: List[ExactNumber] = []
        highs: List[ExactNumber] = []
        for lo, hi, c in part.atoms:
            mn, mx = poly_extrema(c, lo, hi)
            lows.append(mn)
            highs.append(mx)
        if part.support.measure < region.measure:
            lows.append(ZERO)
            highs.append(ZERO)
        return min(lows), max(highs)

    def sup_norm(self, s: Optional[IntervalSet] = None) -> ExactNumber:
        bounds = self.range_over(s)
        if bounds is None:
            return ZERO
        return max(abs(bounds[0]), abs(bounds[1]))

    def oscillation(self, s: IntervalSet) -> ExactNumber:
        bounds = self.range_over(s)
        return ZERO if bounds is None else bounds[1] - bounds[0]

    def is_constant_on(self, s: IntervalSet) -> bool:
        return self.oscillation(s) == 0

    def window_position(
        self, lo: ExactNumber, hi: ExactNumber, width: ExactNumber, target: ExactNumber
    ) -> Optional[ExactNumber]:
        """u in [lo, hi - width] with the integral over [u, u + width) equal to ``target``

        Windows are searched inside single atoms (or zero gaps) of the function.
        """
        if width <= 0 or hi - lo < width:
            return None
        for a, b, c in self.segments(lo, hi):
            if b - a < width:
                continue
            F = antiderivative(c)
            window = poly_add(poly_shift(F, width), poly_scale(F, -1))
            roots = poly_roots(poly_add(window, (-target,)))
            if roots is None:
                return a
            for u in roots:
                if a <= u <= b - width:
                    return u
        return None

    def to_step(self) -> StepFunction:
        if self.degree > 0:
            raise PreconditionError("function is not piecewise constant")
        return StepFunction._trusted([(lo, hi, c[0]) for lo, hi, c in self._atoms])

    def to_json(self) -> List[Dict[str, Any]]:
        return [
            {"lo": exact_to_json(lo), "hi": exact_to_json(hi), "coefficients": [exact_to_json(x) for x in c]}
            for lo, hi, c in self._atoms
        ]

    @classmethod
    def from_json(cls, data: Sequence[Dict[str, Any]]) -> "PiecewisePolynomial":
        return cls(
            (
                exact_from_json(item["lo"]),
                exact_from_json(item["hi"]),
                [exact_from_json(x) for x in item["coefficients"]],
            )
            for item in data
        )


Observable = Union[PiecewisePolynomial, FunctionSource, StepFunction]


def as_polynomial(f: Observable) -> PiecewisePolynomial:
    if isinstance(f, PiecewisePolynomial):
        return f
    if isinstance(f, FunctionSource):
        return PiecewisePolynomial.from_source(f)
    if isinstance(f, StepFunction):
        return PiecewisePolynomial.from_step(f)
    raise PreconditionError(f"cannot read {type(f).__name__} as a piecewise polynomial")
