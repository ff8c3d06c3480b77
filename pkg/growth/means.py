from dataclasses import dataclass
import cmath
import logging
import math
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
import torch
from tqdm.auto import tqdm

from errors import InvalidParameter, QuadratureFailure
from growth.functions import GrowthFunction
from utils import COMPLEX, FLOAT, as_complex, dyadic_radii

logger = logging.getLogger(__name__)

# singularities closer than this share of the radius to a circle get a breakpoint
NEAR_CIRCLE = 0.25


def integrate(fn: Callable[[float], float], a: float, b: float, tol: float = 1e-9, points: Sequence[float] = ()) -> float:
    """scipy quad with breakpoints; raises QuadratureFailure when `tol` is out of reach."""
    points = sorted({p for p in points if a < p < b})
    limit = max(200, 4 * len(points) + 50)
    value, error, info, *message = quad(
        fn, a, b, epsabs=tol, epsrel=tol, points=points or None, limit=limit, full_output=1
    )
    ier = 0 if not message else 1
    if not math.isfinite(value) or (ier and error > 10.0 * tol * max(1.0, abs(value))):
        raise QuadratureFailure(f"quadrature on [{a}, {b}] stopped at {error=:.3g}: {message[0] if message else ''}")
    if ier:
        logger.debug(f"quadrature on [{a}, {b}] accepted with {error=:.3g}")
    return value


def _pointwise(u: GrowthFunction) -> Callable[[complex], float]:
    def value(z: complex) -> float:
        return float(u(torch.tensor([z], dtype=COMPLEX))[0])

    return value


def circle_mean(u: GrowthFunction, z: complex, r: float, tol: float = 1e-9) -> float:
    """(1/2pi) times the integral of u(z + r e^{i theta}) over a full turn."""
    if r <= 0:
        raise InvalidParameter(f"radius must be positive, got {r}")
    z = complex(z)
    singular = u.singular_points(z, (1.0 + NEAR_CIRCLE) * r)
    near = singular[((singular - z).abs() - r).abs() <= NEAR_CIRCLE * r]
    angles = torch.angle(near - z).tolist() if near.numel() else []
    start = angles[0] if angles else 0.0
    points = [start + (angle - start) % (2.0 * math.pi) for angle in angles[1:]]
    at = _pointwise(u)
    total = integrate(lambda t: at(z + r * cmath.exp(1j * t)), start, start + 2.0 * math.pi, tol, points)
    return total / (2.0 * math.pi)


def disk_mean(u: GrowthFunction, z: complex, r: float, tol: float = 1e-9) -> float:
    """Area mean over the closed disk, as the radial integral of circle means."""
    if r <= 0:
        raise InvalidParameter(f"radius must be positive, got {r}")
    z = complex(z)
    points = [d for d in (u.singular_points(z, r) - z).abs().tolist() if d > 0]
    total = integrate(lambda t: t * circle_mean(u, z, t, tol), 0.0, r, 10.0 * tol, points)
    return 2.0 * total / (r * r)


@dataclass
class RadialMax:
    value: float
    theta: float
    spacing: float


def radial_max(u: GrowthFunction, r: float, samples: int = 4096, refine: int = 64) -> RadialMax:
    """Sampled max of u over |z| = r with one local refinement around the best sample."""
    if r < 0:
        raise InvalidParameter(f"radius must be >= 0, got {r}")
    if r == 0:
        return RadialMax(float(u(torch.zeros(1, dtype=COMPLEX))[0]), 0.0, 0.0)
    step = 2.0 * math.pi / samples
    theta = torch.arange(samples, dtype=FLOAT) * step
    values = u(torch.polar(torch.full_like(theta, r), theta))
    best = int(torch.argmax(values))
    fine = float(theta[best]) + torch.linspace(-step, step, refine, dtype=FLOAT)
    fine_values = u(torch.polar(torch.full_like(fine, r), fine))
    if float(fine_values.max()) > float(values[best]):
        index = int(torch.argmax(fine_values))
        return RadialMax(float(fine_values[index]), float(fine[index]), 2.0 * step / (refine - 1))
    return RadialMax(float(values[best]), float(theta[best]), step)


def type_estimate(u: GrowthFunction, r_max: float, samples: int = 4096) -> float:
    """max over dyadic r <= r_max of radial_max(u, r)^+ / r."""
    if r_max < 16:
        raise InvalidParameter(f"r_max must be >= 16, got {r_max}")
    estimate = 0.0
    for r in dyadic_radii(math.floor(math.log2(r_max))).tolist():
        estimate = max(estimate, max(radial_max(u, r, samples).value, 0.0) / r)
    return estimate


def j_axis(u: GrowthFunction, r: float, R: float, tol: float = 1e-9) -> float:
    """(1/2pi) times the integral over r < y < R of (u(iy) + u(-iy)) / y^2."""
    if not 0 < r < R < math.inf:
        raise InvalidParameter(f"need 0 < r < R < inf, got ({r}, {R})")
    singular = u.singular_points(0j, R)
    on_axis = singular[(singular.real == 0) & (singular.abs() > 0)]
    points = torch.log(on_axis.abs()).tolist()
    at = _pointwise(u)

    def integrand(t: float) -> float:
        y = math.exp(t)
        return (at(1j * y) + at(-1j * y)) / y

    return integrate(integrand, math.log(r), math.log(R), tol, points) / (2.0 * math.pi)


def j_axis_shells(u: GrowthFunction, n_max: int, tol: float = 1e-9) -> torch.Tensor:
    """J(2^n, 2^(n+1)) for n = 0 .. n_max - 1."""
    shells = [
        j_axis(u, 2.0**n, 2.0 ** (n + 1), tol)
        for n in tqdm(range(n_max), desc="axis integral", disable=not logger.isEnabledFor(logging.INFO))
    ]
    return torch.tensor(shells, dtype=FLOAT)


class CircleMeanAtPowerRadius(GrowthFunction):
    """z = x + iy maps to the circle mean of `fn` at z with radius |y|^p, plus |y|^p."""

    variant = "circle_mean_power"

    def __init__(self, fn: GrowthFunction, p: float, tol: float = 1e-9):
        super().__init__()
        if not 0 <= p < 1:
            raise InvalidParameter(f"p must lie in [0, 1), got {p}")
        self.fn = fn
        self.p = p
        self.tol = tol

    def forward(self, z):
        shape = z.shape
        values = []
        for point in as_complex(z).tolist():
            radius = abs(point.imag) ** self.p
            if radius == 0:
                values.append(float(self.fn(torch.tensor([point], dtype=COMPLEX))[0]))
            else:
                values.append(circle_mean(self.fn, point, radius, self.tol) + radius)
        return torch.tensor(np.asarray(values, dtype=np.float64)).reshape(shape)
