"""Tolerance and height schedules for iterated tower constructions"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Sequence, Tuple

from src.core.errors import ConfigError, ConstructionError
from src.measure.numbers import exact_to_json


@dataclass(frozen=True)
class ScheduleParams:
    """Finite truncation of (eps_i, N_i) with sum(eps_i + 1/N_i) finite

    Past the truncation the sequences are continued by the decay law
    eps_{i+1} = ratio * eps_i and N_{i+1} = growth * N_i, taken from the
    worst consecutive ratios of the given terms.
    """

    eps: Tuple[Fraction, ...]
    N: Tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.eps or len(self.eps) != len(self.N):
            raise ConfigError("schedule needs equally many eps and N terms")
        if any(e <= 0 or e >= 1 for e in self.eps):
            raise ConfigError("schedule tolerances must lie in (0,1)")
        if any(n < 1 for n in self.N):
            raise ConfigError("schedule heights must be positive")
        if any(b >= a for a, b in zip(self.eps, self.eps[1:])):
            raise ConfigError("schedule tolerances must strictly decrease", {"eps": list(self.eps)})
        if any(b <= a for a, b in zip(self.N, self.N[1:])):
            raise ConfigError("schedule heights must strictly increase", {"N": list(self.N)})

    @classmethod
    def create(cls, eps: Sequence[Any], N: Sequence[Any]) -> "ScheduleParams":
        return cls(tuple(Fraction(e) for e in eps), tuple(int(n) for n in N))

    @classmethod
    def geometric(cls, eps0: Any, ratio: Any, N0: int, growth: int, length: int) -> "ScheduleParams":
        r = Fraction(ratio)
        return cls(
            tuple(Fraction(eps0) * r**i for i in range(length)),
            tuple(N0 * growth**i for i in range(length)),
        )

    def __len__(self) -> int:
        return len(self.eps)

    def stage(self, k: int) -> Tuple[Fraction, int]:
        if not 0 <= k < len(self.eps):
            raise ConstructionError(f"schedule exhausted at stage {k}", {"length": len(self.eps)})
        return self.eps[k], self.N[k]

    @property
    def ratio(self) -> Fraction:
        if len(self.eps) < 2:
            return Fraction(1, 2)
        return max(b / a for a, b in zip(self.eps, self.eps[1:]))

    @property
    def growth(self) -> Fraction:
        if len(self.N) < 2:
            return Fraction(2)
        return min(Fraction(b, a) for a, b in zip(self.N, self.N[1:]))

    @property
    def partial_sum(self) -> Fraction:
        return sum((e + Fraction(1, n) for e, n in zip(self.eps, self.N)), Fraction(0))

    @property
    def tail_bound(self) -> Fraction:
        """Geometric bound on the terms after the truncation under the decay law"""
        r, g = self.ratio, 1 / self.growth
        return self.eps[-1] * r / (1 - r) + Fraction(1, self.N[-1]) * g / (1 - g)

    def certificate(self) -> Dict[str, Any]:
        return {
            "eps": [exact_to_json(e) for e in self.eps],
            "N": list(self.N),
            "partial_sum": exact_to_json(self.partial_sum),
            "ratio": exact_to_json(self.ratio),
            "growth": exact_to_json(self.growth),
            "tail_bound": exact_to_json(self.tail_bound),
            "total_bound": exact_to_json(self.partial_sum + self.tail_bound),
        }
