"""Fourier-side transfer functions and small-divisor obstructions for rotations"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Tuple

import mpmath

from src.config.settings import Settings, get_settings
from src.core.errors import ConfigError, PreconditionError
from src.diophantine.continued_fraction import continued_fraction_expand, distance_to_integer
from src.measure.numbers import ExactNumber, as_exact, frac_part, is_rational, to_mpf
from src.measure.step_functions import StepFunction
from src.utils.logging import get_logger

logger = get_logger(__name__)


def _unit(theta: Any) -> mpmath.mpc:
    """exp(2 pi i theta)"""
    return mpmath.expjpi(2 * to_mpf(theta))


def _as_mpc(c: Any) -> mpmath.mpc:
    if isinstance(c, (mpmath.mpc, mpmath.mpf, complex, float)):
        return mpmath.mpc(c)
    return mpmath.mpc(to_mpf(as_exact(c)))


@dataclass
class FourierProfile:
    """Fourier coefficients c_n of a function on the circle

    ``exhaustive`` marks that every nonzero coefficient is listed (a
    trigonometric polynomial); otherwise the list is a truncation.
    """

    coefficients: Dict[int, mpmath.mpc]
    band: int
    exhaustive: bool = True

    @classmethod
    def from_mapping(cls, data: Mapping[int, Any], exhaustive: bool = True) -> "FourierProfile":
        coefs = {int(n): _as_mpc(c) for n, c in data.items() if c != 0}
        band = max((abs(n) for n in coefs), default=0)
        return cls(coefs, band, exhaustive)

    @classmethod
    def eigenfunction(cls, k: int, amplitude: Any = 1) -> "FourierProfile":
        """amplitude * exp(2 pi i k x)"""
        return cls.from_mapping({k: amplitude})

    @classmethod
    def from_step_function(cls, f: StepFunction, band: int) -> "FourierProfile":
        """Coefficients |n| <= band of a step function; the result is a truncation"""
        coefs: Dict[int, mpmath.mpc] = {}
        coefs[0] = mpmath.mpc(to_mpf(f.integral()))
        for n in range(1, band + 1):
            for m in (n, -n):
                total = mpmath.mpc(0)
                for lo, hi, value in f.atoms:
                    total += to_mpf(value) * (_unit(-m * hi) - _unit(-m * lo))
                coefs[m] = total / (-2j * mpmath.pi * m)
        return cls({n: c for n, c in coefs.items() if c != 0}, band, exhaustive=False)

    def coefficient(self, n: int) -> mpmath.mpc:
        return self.coefficients.get(n, mpmath.mpc(0))

    @property
    def mean(self) -> mpmath.mpc:
        return self.coefficient(0)

    def is_real(self, tolerance: float = 1e-30) -> bool:
        """Conjugate symmetry c(-n) = conj(c(n))"""
        return all(
            abs(self.coefficient(-n) - mpmath.conj(c)) <= tolerance
            for n, c in self.coefficients.items()
        )

    def evaluate(self, x: Any) -> mpmath.mpc:
        total = mpmath.mpc(0)
        for n, c in self.coefficients.items():
            total += c * _unit(n * as_exact(x))
        return total

    def real_part(self) -> Callable[[Any], mpmath.mpf]:
        return lambda x: mpmath.re(self.evaluate(x))

    def tail_sum(self, band: int) -> mpmath.mpf:
        """sum of |c_n| over |n| > band"""
        return mpmath.fsum(abs(c) for n, c in self.coefficients.items() if abs(n) > band)

    def to_json(self) -> List[Dict[str, Any]]:
        return [
            {"n": n, "re": mpmath.nstr(mpmath.re(c), 30), "im": mpmath.nstr(mpmath.im(c), 30)}
            for n, c in sorted(self.coefficients.items())
        ]

    @classmethod
    def from_json(cls, data: Iterable[Mapping[str, Any]], exhaustive: bool = True) -> "FourierProfile":
        return cls.from_mapping(
            {int(e["n"]): mpmath.mpc(mpmath.mpf(e["re"]), mpmath.mpf(e.get("im", "0"))) for e in data},
            exhaustive,
        )


@dataclass
class FourierTransfer:
    """Truncated transfer h with its tail estimates"""

    h: FourierProfile
    alpha: ExactNumber
    band: int
    tail_bound: mpmath.mpf
    residual_bound: mpmath.mpf

    def to_json(self) -> Dict[str, Any]:
        return {
            "h": self.h.to_json(),
            "band": self.band,
            "tail_bound": mpmath.nstr(self.tail_bound, 20),
            "residual_bound": mpmath.nstr(self.residual_bound, 20),
        }


def rotation_transfer_fourier(
    f: FourierProfile,
    alpha: Any,
    band: int,
    power: int = 1,
    settings: Optional[Settings] = None,
) -> FourierTransfer:
    """h(n) = f(n) / (1 - exp(2 pi i n alpha)) for 0 < |n| <= band

    ``power`` m solves for the rotation tau^m, i.e. alpha replaced by m alpha.
    The tail bound sums |f(n)| / (4‖n alpha‖) over the coefficients beyond
    the band; it is infinite when the profile is only a truncation.
    """
    settings = settings or get_settings()
    angle = as_exact(alpha) * power
    if is_rational(angle):
        raise PreconditionError("Fourier transfer needs an irrational rotation angle")
    if band < 0:
        raise ConfigError("band must be nonnegative")
    with mpmath.workdps(settings.cocycle_precision):
        if abs(f.mean) > settings.pointwise_tolerance:
            raise PreconditionError(
                "Fourier transfer needs a mean-zero function",
                details={"mean": mpmath.nstr(f.mean, 15)},
            )
        coefs: Dict[int, mpmath.mpc] = {}
        tail = mpmath.mpf(0)
        for n, c in f.coefficients.items():
            if n == 0:
                continue
            if abs(n) <= band:
                coefs[n] = c / (1 - _unit(n * angle))
            else:
                # |1 - e^{2 pi i y}| >= 4‖y‖
                tail += abs(c) / (4 * to_mpf(distance_to_integer(n * angle)))
        if not f.exhaustive:
            tail = mpmath.inf
        residual = f.tail_sum(band)
    h = FourierProfile(coefs, band, exhaustive=True)
    logger.info(
        "fourier_transfer_built",
        band=band,
        power=power,
        coefficients=len(coefs),
        tail_bound=mpmath.nstr(tail, 10),
    )
    return FourierTransfer(h, angle, band, tail, residual)


@dataclass
class ObstructionReport:
    """Lower bounds on |h(q_k)| along convergent denominators"""

    entries: List[Tuple[int, mpmath.mpf]] = field(default_factory=list)
    increasing: bool = False
    decreasing: bool = False

    @property
    def verdict(self) -> str:
        if self.increasing:
            return "obstruction"
        if self.decreasing:
            return "no obstruction"
        return "inconclusive"

    def rows(self) -> List[Dict[str, Any]]:
        return [{"q_k": q, "bound": mpmath.nstr(b, 20)} for q, b in self.entries]

    def to_json(self) -> Dict[str, Any]:
        return {"entries": self.rows(), "verdict": self.verdict}


def diophantine_obstruction(
    rho: Callable[[int], Any], alpha: Any, depth: int, skip: int = 2
) -> ObstructionReport:
    """bound_k = rho(q_k) / (2 pi ‖q_k alpha‖) for convergent denominators q_k <= depth

    Since |1 - exp(2 pi i y)| <= 2 pi ‖y‖, any f with |f(n)| >= rho(n) has
    |h(q_k)| >= bound_k. Monotonicity is judged from the ``skip``-th
    convergent on.
    """
    x = frac_part(as_exact(alpha))
    if is_rational(x):
        raise PreconditionError("obstruction needs an irrational angle")
    # denominators grow at least like Fibonacci numbers
    cf = continued_fraction_expand(x, 2 * max(depth, 1).bit_length() + 4)
    denominators = sorted({q for q in cf.denominators if q <= depth})
    if len(denominators) < 3:
        raise PreconditionError(
            f"fewer than 3 convergent denominators up to {depth}",
            details={"denominators": denominators},
        )
    report = ObstructionReport()
    with mpmath.workdps(50):
        for q in denominators:
            gap = to_mpf(distance_to_integer(q * x))
            report.entries.append((q, mpmath.mpf(rho(q)) / (2 * mpmath.pi * gap)))
    tail = [b for _, b in report.entries[skip:]] or [b for _, b in report.entries]
    report.increasing = len(tail) > 1 and all(a < b for a, b in zip(tail, tail[1:]))
    report.decreasing = len(tail) > 1 and all(a > b for a, b in zip(tail, tail[1:]))
    logger.info("obstruction_scanned", convergents=len(report.entries), verdict=report.verdict)
    return report


def rho_profile(name: str) -> Callable[[int], mpmath.mpf]:
    """Named decay profiles for obstruction scans"""
    profiles: Dict[str, Callable[[int], mpmath.mpf]] = {
        "log_over_n": lambda n: mpmath.log(n) / n,
        "inverse": lambda n: mpmath.mpf(1) / n,
        "geometric": lambda n: mpmath.mpf(2) ** (-n),
    }
    if name not in profiles:
        raise ConfigError(f"unknown decay profile {name!r}; expected one of {sorted(profiles)}")
    return profiles[name]
