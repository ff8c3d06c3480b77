import math

from einops import rearrange
import torch

from errors import InvalidParameter, LeftHalfPlanePoint, OriginPoint
from utils import as_complex, as_float


def harmonic_measure_rh(z: complex, y1: float, y2: float) -> float:
    """Harmonic measure of the segment (y1, y2] of the imaginary axis seen from z."""
    z = complex(z)
    if y2 <= y1:
        raise InvalidParameter(f"need y1 < y2, got ({y1}, {y2})")
    if z.real < 0:
        raise LeftHalfPlanePoint(f"{z} lies in the left half-plane")
    if z.real == 0:
        return 1.0 if y1 < z.imag <= y2 else 0.0
    return (math.atan((y2 - z.imag) / z.real) - math.atan((y1 - z.imag) / z.real)) / math.pi


def genus1_kernel(z: complex, y1: float, y2: float) -> float:
    z = complex(z)
    if z == 0:
        raise OriginPoint("the genus 1 kernel is undefined at the origin")
    return harmonic_measure_rh(z, y1, y2) - (y2 - y1) / math.pi * (1.0 / z).real


def poisson_cdf(sources: torch.Tensor, masses: torch.Tensor, x: float, y) -> torch.Tensor:
    """Distribution function, normalized to vanish at 0, of the Poisson images on Re z = x.

    `y` may hold +-inf.
    """
    sources, masses = as_complex(sources), as_float(masses)
    y = rearrange(as_float(y).reshape(-1), "n -> n 1")
    distance = rearrange((sources.real - x).abs(), "k -> 1 k")
    height = rearrange(sources.imag, "k -> 1 k")
    angle = torch.atan((y - height) / distance) + torch.atan(height / distance)
    return (angle * masses).sum(-1) / math.pi


def poisson_density(sources: torch.Tensor, masses: torch.Tensor, x: float, y) -> torch.Tensor:
    sources, masses = as_complex(sources), as_float(masses)
    y = rearrange(as_float(y).reshape(-1), "n -> n 1")
    distance = rearrange((sources.real - x).abs(), "k -> 1 k")
    height = rearrange(sources.imag, "k -> 1 k")
    kernel = distance / (distance.square() + (y - height).square())
    return (kernel * masses).sum(-1) / math.pi
