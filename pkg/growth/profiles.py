from dataclasses import dataclass
from enum import Enum
import math

import torch

from errors import InvalidParameter
from utils import FLOAT, as_complex, as_float


class ProfileKind(Enum):
    CONSTANT = "const"
    POWER_FLOOR = "power"


@dataclass(frozen=True)
class RadiusProfile:
    """Radial covering-radius function r(z) with values in (0, 1].

    POWER_FLOOR is c on |z| <= R and (1 + |z|)^-P outside, the smallest profile
    allowed by a logarithmic lower bound on ln r(z) / ln(2 + |z|).
    """

    kind: ProfileKind
    c: float
    R: float = 0.0
    P: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.c <= 1.0:
            raise InvalidParameter(f"profile value must lie in (0, 1], got {self.c}")
        if self.kind is ProfileKind.POWER_FLOOR and (self.R < 0 or self.P < 0):
            raise InvalidParameter(f"power profile needs R >= 0 and P >= 0, got ({self.R}, {self.P})")

    @classmethod
    def constant(cls, r: float):
        return cls(ProfileKind.CONSTANT, r)

    @classmethod
    def power_floor(cls, c: float, R: float, P: float):
        return cls(ProfileKind.POWER_FLOOR, c, R, P)

    def radius_at(self, modulus: torch.Tensor) -> torch.Tensor:
        modulus = as_float(modulus)
        match self.kind:
            case ProfileKind.CONSTANT:
                return torch.full_like(modulus, self.c)
            case ProfileKind.POWER_FLOOR:
                outer = (1.0 + modulus).pow(-self.P)
                return torch.where(modulus <= self.R, torch.full_like(modulus, self.c), outer)
            case _:
                raise NotImplementedError()

    def __call__(self, z) -> torch.Tensor:
        return self.radius_at(as_complex(z).abs())

    def log_ratio_floor(self) -> float:
        """inf over the plane of ln r(z) / ln(2 + |z|)."""
        inner = math.log(self.c) / math.log(2.0)
        match self.kind:
            case ProfileKind.CONSTANT:
                return inner
            case ProfileKind.POWER_FLOOR:
                return min(inner, -self.P)
            case _:
                raise NotImplementedError()

    def sup(self) -> float:
        return self.sup_outside(-1.0)

    def sup_outside(self, t: float) -> float:
        """sup of r(z) over |z| > t."""
        match self.kind:
            case ProfileKind.CONSTANT:
                return self.c
            case ProfileKind.POWER_FLOOR:
                if t < self.R:
                    return max(self.c, (1.0 + self.R) ** -self.P)
                return (1.0 + t) ** -self.P
            case _:
                raise NotImplementedError()

    def is_below(self, other: "RadiusProfile") -> bool:
        """Pointwise self <= other, checked on both breakpoints and a geometric radius grid."""
        radii = torch.cat(
            [
                as_float([0.0, self.R, other.R]),
                torch.nextafter(as_float([self.R, other.R]), torch.tensor(math.inf, dtype=FLOAT)),
                torch.logspace(-3, 8, 512, dtype=FLOAT),
            ]
        )
        return bool((self.radius_at(radii) <= other.radius_at(radii)).all())
