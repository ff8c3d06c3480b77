from enum import Enum
import math
from typing import Union

import torch
from torch import nn

from errors import InvalidParameter
from measures.charge import ChargeDistribution, LineMass
from utils import COMPLEX, FLOAT, LN2, as_complex

# beyond this height log|sin(pi z)| is evaluated from its exponential asymptotics
SINH_SWITCH = 10.0


class GrowthFunction(nn.Module):
    """A subharmonic-type function of the plane, evaluated on complex tensors.

    Values are float64 and may be -inf at logarithmic singularities.
    """

    variant: str = "abstract"

    def forward(self, z: torch.Tensor) -> torch.Tensor:
        raise NotImplementedError()

    def value(self, z: complex) -> float:
        return float(self(as_complex(z))[0])

    def singular_points(self, center: complex, radius: float) -> torch.Tensor:
        """Points within `radius` of `center` where the function is -inf."""
        return torch.zeros(0, dtype=COMPLEX)

    def zero_distribution(self, radius: float) -> ChargeDistribution:
        """Riesz mass of the function inside |z| <= radius, as atoms and line densities."""
        raise InvalidParameter(f"{self.variant} has no atomic or line Riesz mass model")


def evaluate(u: GrowthFunction, z: Union[complex, torch.Tensor]) -> Union[float, torch.Tensor]:
    if isinstance(z, torch.Tensor):
        return u(z.to(COMPLEX))
    return u.value(z)


class Builtin(Enum):
    LOG_ABS_SIN_PI = "log_abs_sin_pi"
    ABS_RE = "abs_re"
    LINEAR_ABS = "linear_abs"
    ZERO = "zero"
    LOG_ABS = "log_abs"
    HARMONIC_LINEAR = "harmonic_linear"


class LogAbsSinPi(GrowthFunction):
    """ln|sin(pi z)|, the log-modulus of an entire function with zeros at the integers."""

    variant = Builtin.LOG_ABS_SIN_PI.value

    def forward(self, z):
        x = z.real - torch.round(z.real)
        y = z.imag.abs()
        near_y = torch.clamp(y, max=SINH_SWITCH)
        near = 0.5 * torch.log(torch.sin(math.pi * x).square() + torch.sinh(math.pi * near_y).square())
        decay = torch.exp(-2.0 * math.pi * y)
        far = math.pi * y - LN2 + 0.5 * torch.log1p(-2.0 * torch.cos(2.0 * math.pi * x) * decay + decay.square())
        return torch.where(y < SINH_SWITCH, near, far)

    def singular_points(self, center, radius):
        center = complex(center)
        n = torch.arange(math.ceil(center.real - radius), math.floor(center.real + radius) + 1, dtype=FLOAT)
        points = torch.complex(n, torch.zeros_like(n))
        return points[(points - center).abs() <= radius]

    def zero_distribution(self, radius):
        n = torch.arange(-math.floor(radius), math.floor(radius) + 1, dtype=FLOAT)
        return ChargeDistribution(torch.complex(n, torch.zeros_like(n)), torch.ones_like(n))


class AbsRe(GrowthFunction):
    variant = Builtin.ABS_RE.value

    def forward(self, z):
        return z.real.abs()

    def zero_distribution(self, radius):
        # Laplacian of |x| is 2 on the imaginary axis
        return ChargeDistribution(lines=(LineMass(0.0, 1.0 / math.pi),))


class LinearAbs(GrowthFunction):
    variant = Builtin.LINEAR_ABS.value

    def __init__(self, a: float = 1.0):
        super().__init__()
        if a < 0:
            raise InvalidParameter(f"linear_abs needs a >= 0, got {a}")
        self.a = a

    def forward(self, z):
        return self.a * z.abs()


class Zero(GrowthFunction):
    variant = Builtin.ZERO.value

    def forward(self, z):
        return torch.zeros(z.shape, dtype=FLOAT)

    def zero_distribution(self, radius):
        return ChargeDistribution.empty()


class LogAbs(GrowthFunction):
    """ln|z - center|."""

    variant = Builtin.LOG_ABS.value

    def __init__(self, center: complex = 0j):
        super().__init__()
        self.center = complex(center)

    def forward(self, z):
        return torch.log((z - self.center).abs())

    def singular_points(self, center, radius):
        if abs(self.center - complex(center)) <= radius:
            return as_complex([self.center])
        return torch.zeros(0, dtype=COMPLEX)

    def zero_distribution(self, radius):
        if abs(self.center) > radius:
            return ChargeDistribution.empty()
        return ChargeDistribution.from_atoms([(self.center, 1.0)])


class HarmonicLinear(GrowthFunction):
    """Re(a z) + c."""

    variant = Builtin.HARMONIC_LINEAR.value

    def __init__(self, a: complex = 1.0, c: float = 0.0):
        super().__init__()
        self.a = complex(a)
        self.c = float(c)

    def forward(self, z):
        return (self.a * z).real + self.c

    def zero_distribution(self, radius):
        return ChargeDistribution.empty()


def build_builtin(name: Builtin, a: complex = 1.0, c: float = 0.0) -> GrowthFunction:
    match name:
        case Builtin.LOG_ABS_SIN_PI:
            return LogAbsSinPi()
        case Builtin.ABS_RE:
            return AbsRe()
        case Builtin.LINEAR_ABS:
            return LinearAbs(a.real if isinstance(a, complex) else a)
        case Builtin.ZERO:
            return Zero()
        case Builtin.LOG_ABS:
            return LogAbs(a)
        case Builtin.HARMONIC_LINEAR:
            return HarmonicLinear(a, c)
        case _:
            raise NotImplementedError()
