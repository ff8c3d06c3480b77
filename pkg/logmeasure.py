from dataclasses import dataclass
from enum import Enum
import logging
import math

import torch

from errors import InvalidParameter, SignedInput
from measures.charge import ChargeDistribution, LineMass, radial_counting
from utils import FLOAT, Verdict, as_float, dyadic_radii, slope_verdict

logger = logging.getLogger(__name__)


class LindelofKind(Enum):
    R = "R"
    IR = "iR"
    FULL = "full"
    BLASCHKE = "blaschke"


@dataclass
class LindelofReport:
    kind: LindelofKind
    sup_abs: float
    samples: list[tuple[float, float]]
    verdict: Verdict
    r_max: float
    slope: float
    slope_tol: float


def _check_interval(r: float, R: float):
    if not 0 < r < R < math.inf:
        raise InvalidParameter(f"need 0 < r < R < inf, got ({r}, {R})")


def _inverse(nu: ChargeDistribution) -> torch.Tensor:
    at_origin = nu.positions == 0
    inverse = 1.0 / torch.where(at_origin, torch.ones_like(nu.positions), nu.positions)
    return torch.where(at_origin, torch.zeros_like(inverse), inverse)


def side_weights(nu: ChargeDistribution) -> tuple[torch.Tensor, torch.Tensor]:
    """Per-atom Re+(1/z)*m and Re-(1/z)*m."""
    real = _inverse(nu).real
    return torch.clamp(real, min=0.0) * nu.masses, torch.clamp(-real, min=0.0) * nu.masses


def line_ell(line: LineMass, r: torch.Tensor, R: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    """Right and left parts of the integral of Re(1/z) over the line inside r < |z| <= R."""
    r, R = as_float(r), as_float(R)
    zero = torch.zeros(torch.broadcast_shapes(r.shape, R.shape), dtype=FLOAT)
    x = abs(line.x)
    if x == 0.0 or line.coef == 0.0:
        return zero, zero
    lower = torch.sqrt(torch.clamp(r * r - x * x, min=0.0))
    upper = torch.sqrt(torch.clamp(R * R - x * x, min=0.0))
    value = 2.0 * line.coef * (torch.atan(upper / x) - torch.atan(lower / x)) + zero
    return (value, zero) if line.x > 0 else (zero, value)


def _ell_side(nu: ChargeDistribution, r: float, R: float, right: bool) -> float:
    _check_interval(r, R)
    radii = nu.radii
    inside = (radii > r) & (radii <= R)
    weights = side_weights(nu)[0 if right else 1]
    value = float(weights[inside].sum())
    for line in nu.lines:
        value += float(line_ell(line, as_float(r), as_float(R))[0 if right else 1])
    return value


def ell_right(nu: ChargeDistribution, r: float, R: float) -> float:
    return _ell_side(nu, r, R, right=True)


def ell_left(nu: ChargeDistribution, r: float, R: float) -> float:
    return _ell_side(nu, r, R, right=False)


def require_mass(nu: ChargeDistribution, what: str = "distribution"):
    if not nu.is_mass() and not nu.is_empty():
        raise SignedInput(f"{what} must be a mass distribution (no negative masses)")


def ell_sub(nu: ChargeDistribution, r: float, R: float) -> float:
    require_mass(nu)
    return max(ell_left(nu, r, R), ell_right(nu, r, R))


class LogProfile:
    """Prefix sums of the kernel weights of a distribution ordered by |z|.

    Evaluates the logarithmic interval functions on whole tensors of intervals.
    """

    def __init__(self, nu: ChargeDistribution):
        self.lines = nu.lines
        order = torch.argsort(nu.radii, stable=True)
        self.radii = nu.radii[order]
        right, left = side_weights(nu)
        weighted = _inverse(nu) * nu.masses
        zero = torch.zeros(1, dtype=FLOAT)
        self._right = torch.cat([zero, torch.cumsum(right[order], 0)])
        self._left = torch.cat([zero, torch.cumsum(left[order], 0)])
        self._imag = torch.cat([zero, torch.cumsum(weighted.imag[order], 0)])

    def _between(self, prefix: torch.Tensor, r: torch.Tensor, R: torch.Tensor) -> torch.Tensor:
        upper = prefix[torch.searchsorted(self.radii, R, right=True)]
        lower = prefix[torch.searchsorted(self.radii, r, right=True)]
        return upper - lower

    def right(self, r, R) -> torch.Tensor:
        r, R = torch.broadcast_tensors(as_float(r), as_float(R))
        value = self._between(self._right, r.contiguous(), R.contiguous())
        for line in self.lines:
            value = value + line_ell(line, r, R)[0]
        return value

    def left(self, r, R) -> torch.Tensor:
        r, R = torch.broadcast_tensors(as_float(r), as_float(R))
        value = self._between(self._left, r.contiguous(), R.contiguous())
        for line in self.lines:
            value = value + line_ell(line, r, R)[1]
        return value

    def sub(self, r, R) -> torch.Tensor:
        return torch.maximum(self.right(r, R), self.left(r, R))

    def imag(self, r, R) -> torch.Tensor:
        # vertical lines are symmetric about the real axis and contribute nothing
        r, R = torch.broadcast_tensors(as_float(r), as_float(R))
        return self._between(self._imag, r.contiguous(), R.contiguous())


def char_log_right(
    nu: ChargeDistribution, R: float, r_floor: float = 1.0, tol: float = 1e-9, steps: int = 20
) -> tuple[float, bool]:
    """ell_right from (almost) zero: partial values along r_floor / 2^k, k <= steps."""
    if R <= 0:
        raise InvalidParameter(f"R must be positive, got {R}")
    floors = [r_floor / 2**k for k in range(steps + 1)]
    values = [ell_right(nu, f, R) for f in floors if f < R]
    if not values:
        return 0.0, True
    if len(values) == 1:
        return values[0], True
    convergent = abs(values[-1] - values[-2]) <= tol * max(1.0, abs(values[-1]))
    return values[-1], convergent


def lindelof_report(
    nu: ChargeDistribution,
    kind: LindelofKind = LindelofKind.FULL,
    r_max: float = 2.0**14,
    slope_tol: float = 0.05,
) -> LindelofReport:
    if r_max < 2:
        raise InvalidParameter(f"r_max must be >= 2, got {r_max}")
    radii = dyadic_radii(math.floor(math.log2(r_max)), start=1)
    if radii[-1] < r_max:
        radii = torch.cat([radii, torch.tensor([r_max], dtype=FLOAT)])
    ones = torch.ones_like(radii)

    match kind:
        case LindelofKind.R:
            profile = LogProfile(nu)
            values = profile.right(ones, radii) - profile.left(ones, radii)
        case LindelofKind.IR:
            values = LogProfile(nu).imag(ones, radii)
        case LindelofKind.FULL:
            profile = LogProfile(nu)
            real = profile.right(ones, radii) - profile.left(ones, radii)
            values = torch.complex(real, profile.imag(ones, radii)).abs()
        case LindelofKind.BLASCHKE:
            values = LogProfile(abs(nu)).right(ones, radii)
        case _:
            raise NotImplementedError()

    magnitudes = values.abs()
    slope, verdict = slope_verdict(torch.log(radii).tolist(), magnitudes.tolist(), slope_tol)
    sup_abs = float(magnitudes.max())
    logger.info(f"lindelof {kind.value}: {sup_abs=}, {slope=}, {verdict=}")
    return LindelofReport(
        kind=kind,
        sup_abs=sup_abs,
        samples=list(zip(radii.tolist(), values.tolist())),
        verdict=verdict,
        r_max=float(r_max),
        slope=slope,
        slope_tol=slope_tol,
    )


def blaschke_report(nu: ChargeDistribution, r_max: float = 2.0**14, slope_tol: float = 0.05) -> LindelofReport:
    """Samples of ell_right(|nu|, 1, r); a flat tail is the half-plane Blaschke condition."""
    return lindelof_report(nu, LindelofKind.BLASCHKE, r_max, slope_tol)


def cone_lower_bound(nu: ChargeDistribution, a: float, r: float) -> tuple[float, float]:
    """(ell_right(nu, r, 2r), (a/2r)(nu^rad(2r) - nu^rad(r))) for a mass nu inside Re z > a|z|."""
    require_mass(nu)
    lower = a / (2.0 * r) * (radial_counting(nu, 0j, 2.0 * r) - radial_counting(nu, 0j, r))
    return ell_right(nu, r, 2.0 * r), lower
