from dataclasses import dataclass
import logging
import math

from einops import rearrange
import torch

from errors import InvalidParameter, OriginPoint
from growth.functions import GrowthFunction
from measures.charge import ChargeDistribution
from utils import COMPLEX, FLOAT, as_complex, as_float, num_to_groups

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TruncatedValue:
    """ln|f(z)| from the kept zeros, within `tail_bound` of the untruncated product."""

    value: float
    tail_bound: float


class CanonicalProduct(GrowthFunction):
    """ln|f| for the Weierstrass canonical product of genus 0 or 1 over a zero list.

    Zeros beyond `truncation_radius` are dropped from the product. `forward` evaluates the
    kept zeros only; `evaluate_truncated` pairs that value with the bound for the dropped ones.
    """

    variant = "canprod"

    def __init__(self, zeros, genus: int = 1, truncation_radius: float = 1e4, chunk_size: int = 4096):
        super().__init__()
        zeros = as_complex(zeros)
        if genus not in (0, 1):
            raise InvalidParameter(f"genus must be 0 or 1, got {genus}")
        if (zeros == 0).any():
            raise OriginPoint("canonical product zeros must be nonzero")
        if truncation_radius <= 0:
            raise InvalidParameter(f"truncation radius must be positive, got {truncation_radius}")
        self.genus = genus
        self.truncation_radius = float(truncation_radius)
        self.chunk_size = chunk_size
        kept = zeros.abs() <= truncation_radius
        self.register_buffer("zeros", zeros[kept])
        self.register_buffer("dropped", zeros[~kept])
        logger.debug(f"canonical product: {int(kept.sum())} zeros kept, {int((~kept).sum())} dropped")

    def forward(self, z):
        shape = z.shape
        z = rearrange(z.to(COMPLEX).reshape(-1), "n -> n 1")
        value = torch.zeros(z.shape[0], dtype=FLOAT)
        start = 0
        for size in num_to_groups(self.zeros.numel(), self.chunk_size):
            zeros = rearrange(self.zeros[start : start + size], "k -> 1 k")
            start += size
            ratio = z / zeros
            term = torch.log((1.0 - ratio).abs())
            if self.genus == 1:
                term = term + ratio.real
            term = torch.where(z == zeros, torch.full_like(term, -math.inf), term)
            value = value + term.sum(-1)
        return value.reshape(shape)

    def tail_bound(self, z):
        """Bound on |ln|f| - forward| at z from the dropped zeros.

        For |u| <= 1/2, |ln|1 - u|| <= 2|u| and |ln|(1 - u) e^u|| <= |u|^2, so the bound is
        (2 - g) |z|^(g+1) times the sum of |z_n|^-(g+1). It is infinite once |z| exceeds half
        the truncation radius.
        """
        scalar = not isinstance(z, torch.Tensor)
        modulus = as_float(abs(complex(z))) if scalar else z.to(COMPLEX).abs()
        power = self.genus + 1
        weight = (2 - self.genus) * float(self.dropped.abs().pow(-power).sum())
        bound = weight * modulus.pow(power)
        if self.dropped.numel():
            bound = torch.where(modulus <= self.truncation_radius / 2, bound, torch.full_like(bound, math.inf))
        return float(bound) if scalar else bound

    def evaluate_truncated(self, z: complex) -> TruncatedValue:
        return TruncatedValue(self.value(z), self.tail_bound(z))

    def jensen_circle_mean(self, center: complex, r: float) -> float:
        """Exact mean over |z - center| = r, from the mean of ln|z - w| being max(ln r, ln|w - center|)."""
        center = complex(center)
        distance = (self.zeros - center).abs()
        terms = torch.clamp(torch.log(distance), min=math.log(r)) - torch.log(self.zeros.abs())
        if self.genus == 1:
            terms = terms + (center / self.zeros).real
        return float(terms.sum())

    def jensen_disk_mean(self, center: complex, r: float) -> float:
        """Exact area mean over |z - center| < r.

        ln|z - w| averages to ln d for d = |w - center| >= r and to ln r - 1/2 + d^2 / (2 r^2) inside.
        """
        center = complex(center)
        distance = (self.zeros - center).abs()
        inside = math.log(r) - 0.5 + distance.square() / (2.0 * r * r)
        terms = torch.where(distance >= r, torch.log(distance), inside) - torch.log(self.zeros.abs())
        if self.genus == 1:
            terms = terms + (center / self.zeros).real
        return float(terms.sum())

    def singular_points(self, center, radius):
        return self.zeros[(self.zeros - complex(center)).abs() <= radius]

    def zero_distribution(self, radius):
        zeros = self.zeros[self.zeros.abs() <= radius]
        return ChargeDistribution(zeros, torch.ones(zeros.numel(), dtype=FLOAT))
