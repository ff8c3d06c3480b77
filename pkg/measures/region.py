from dataclasses import dataclass, replace
from enum import Enum

import torch

from errors import InvalidParameter


class RegionKind(Enum):
    PLANE = "plane"
    RIGHT_HALF = "rh"
    RIGHT_HALF_CLOSED = "rh_closed"
    LEFT_HALF = "lh"
    LEFT_HALF_CLOSED = "lh_closed"
    CONE = "cone"
    CONE_CLOSED = "cone_closed"
    STRIP = "strip"
    STRIP_CLOSED = "strip_closed"
    ANNULUS = "annulus"
    DISK = "disk"
    DISK_CLOSED = "disk_closed"


class LineOverlap(Enum):
    NONE = "none"
    ALL = "all"
    PARTIAL = "partial"


@dataclass(frozen=True)
class Region:
    """A planar set used to restrict charges.

    Cones are X_a = {|Re z| < a|z|}, strips are S_b = {|Re z| < b}, annuli are
    r < |z - center| <= R, disks are centered at `center` with radius `r`.
    """

    kind: RegionKind
    a: float = 0.0
    b: float = 0.0
    r: float = 0.0
    R: float = 0.0
    center: complex = 0j
    complement: bool = False

    def __post_init__(self):
        match self.kind:
            case RegionKind.CONE | RegionKind.CONE_CLOSED:
                if not 0.0 <= self.a <= 1.0:
                    raise InvalidParameter(f"cone parameter must lie in [0, 1], got {self.a}")
            case RegionKind.STRIP | RegionKind.STRIP_CLOSED:
                if self.b < 0.0:
                    raise InvalidParameter(f"strip half-width must be >= 0, got {self.b}")
            case RegionKind.ANNULUS:
                if not 0.0 <= self.r < self.R:
                    raise InvalidParameter(f"annulus needs 0 <= r < R, got ({self.r}, {self.R})")
            case RegionKind.DISK | RegionKind.DISK_CLOSED:
                if self.r < 0.0:
                    raise InvalidParameter(f"disk radius must be >= 0, got {self.r}")

    @classmethod
    def right_half(cls, closed: bool = False):
        return cls(RegionKind.RIGHT_HALF_CLOSED if closed else RegionKind.RIGHT_HALF)

    @classmethod
    def left_half(cls, closed: bool = False):
        return cls(RegionKind.LEFT_HALF_CLOSED if closed else RegionKind.LEFT_HALF)

    @classmethod
    def cone(cls, a: float, closed: bool = False):
        return cls(RegionKind.CONE_CLOSED if closed else RegionKind.CONE, a=a)

    @classmethod
    def strip(cls, b: float, closed: bool = False):
        return cls(RegionKind.STRIP_CLOSED if closed else RegionKind.STRIP, b=b)

    @classmethod
    def annulus(cls, r: float, R: float, center: complex = 0j):
        return cls(RegionKind.ANNULUS, r=r, R=R, center=center)

    @classmethod
    def disk(cls, r: float, center: complex = 0j, closed: bool = False):
        return cls(RegionKind.DISK_CLOSED if closed else RegionKind.DISK, r=r, center=center)

    def negate(self) -> "Region":
        return replace(self, complement=not self.complement)

    def contains(self, z: torch.Tensor) -> torch.Tensor:
        x = z.real
        modulus = z.abs()
        distance = (z - self.center).abs()
        match self.kind:
            case RegionKind.PLANE:
                inside = torch.ones_like(x, dtype=torch.bool)
            case RegionKind.RIGHT_HALF:
                inside = x > 0
            case RegionKind.RIGHT_HALF_CLOSED:
                inside = x >= 0
            case RegionKind.LEFT_HALF:
                inside = x < 0
            case RegionKind.LEFT_HALF_CLOSED:
                inside = x <= 0
            case RegionKind.CONE:
                inside = x.abs() < self.a * modulus
            case RegionKind.CONE_CLOSED:
                inside = x.abs() <= self.a * modulus
            case RegionKind.STRIP:
                inside = x.abs() < self.b
            case RegionKind.STRIP_CLOSED:
                inside = x.abs() <= self.b
            case RegionKind.ANNULUS:
                inside = (distance > self.r) & (distance <= self.R)
            case RegionKind.DISK:
                inside = distance < self.r
            case RegionKind.DISK_CLOSED:
                inside = distance <= self.r
            case _:
                raise NotImplementedError()
        return ~inside if self.complement else inside

    def line_overlap(self, x0: float) -> LineOverlap:
        """How the vertical line Re z = x0 meets the region, up to sets of zero length."""
        match self.kind:
            case RegionKind.PLANE:
                overlap = LineOverlap.ALL
            case RegionKind.RIGHT_HALF:
                overlap = LineOverlap.ALL if x0 > 0 else LineOverlap.NONE
            case RegionKind.RIGHT_HALF_CLOSED:
                overlap = LineOverlap.ALL if x0 >= 0 else LineOverlap.NONE
            case RegionKind.LEFT_HALF:
                overlap = LineOverlap.ALL if x0 < 0 else LineOverlap.NONE
            case RegionKind.LEFT_HALF_CLOSED:
                overlap = LineOverlap.ALL if x0 <= 0 else LineOverlap.NONE
            case RegionKind.CONE | RegionKind.CONE_CLOSED:
                overlap = self._cone_overlap(x0)
            case RegionKind.STRIP:
                overlap = LineOverlap.ALL if abs(x0) < self.b else LineOverlap.NONE
            case RegionKind.STRIP_CLOSED:
                overlap = LineOverlap.ALL if abs(x0) <= self.b else LineOverlap.NONE
            case RegionKind.ANNULUS:
                hit = abs(x0 - self.center.real) < self.R
                overlap = LineOverlap.PARTIAL if hit else LineOverlap.NONE
            case RegionKind.DISK | RegionKind.DISK_CLOSED:
                hit = abs(x0 - self.center.real) < self.r
                overlap = LineOverlap.PARTIAL if hit else LineOverlap.NONE
            case _:
                raise NotImplementedError()
        if not self.complement or overlap is LineOverlap.PARTIAL:
            return overlap
        return LineOverlap.NONE if overlap is LineOverlap.ALL else LineOverlap.ALL

    def _cone_overlap(self, x0: float) -> LineOverlap:
        closed = self.kind is RegionKind.CONE_CLOSED
        if x0 == 0.0:
            return LineOverlap.ALL if closed or self.a > 0 else LineOverlap.NONE
        if self.a == 0.0:
            return LineOverlap.NONE
        if self.a == 1.0:
            return LineOverlap.ALL
        # |x0| < a sqrt(x0^2 + t^2) fails for small |t| and holds for large |t|
        return LineOverlap.PARTIAL
