from dataclasses import dataclass
import logging
import math
from typing import Iterable, Union

from scipy.special import gamma
import torch

from errors import IncomparableProfiles, InvalidParameter
from growth.profiles import RadiusProfile
from utils import as_complex, as_float

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IntervalSet:
    """Finite union of closed real intervals, kept sorted and merged."""

    intervals: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        pairs = sorted((float(a), float(b)) for a, b in self.intervals)
        merged: list[tuple[float, float]] = []
        for a, b in pairs:
            if not (math.isfinite(a) and math.isfinite(b)) or a > b:
                raise InvalidParameter(f"invalid interval [{a}, {b}]")
            if merged and a <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], b))
            else:
                merged.append((a, b))
        object.__setattr__(self, "intervals", tuple(merged))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]]):
        return cls(tuple(pairs))

    def is_empty(self) -> bool:
        return not self.intervals

    def measure(self) -> float:
        return sum(b - a for a, b in self.intervals)

    def measure_within(self, r: float) -> float:
        """Length of E intersected with [0, r]."""
        return sum(max(0.0, min(b, r) - max(a, 0.0)) for a, b in self.intervals)

    def contains(self, x) -> torch.Tensor:
        x = as_float(x)
        inside = torch.zeros_like(x, dtype=torch.bool)
        for a, b in self.intervals:
            inside |= (x >= a) & (x <= b)
        return inside

    def sup(self) -> float:
        return self.intervals[-1][1] if self.intervals else -math.inf

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.intervals + other.intervals)

    def intersect(self, a: float, b: float) -> "IntervalSet":
        pieces = [(max(lo, a), min(hi, b)) for lo, hi in self.intervals if max(lo, a) <= min(hi, b)]
        return IntervalSet(tuple(pieces))

    def outside(self, t: float) -> "IntervalSet":
        """Part of the set with |x| >= t."""
        return IntervalSet(self.intersect(-math.inf, -t).intervals + self.intersect(t, math.inf).intervals)


def q_of_E(E: IntervalSet, r: float) -> float:
    """m (1 + ln r - ln m) with m the length of E in [0, r]; zero when m = 0."""
    if r <= 0:
        raise InvalidParameter(f"r must be positive, got {r}")
    m = E.measure_within(r)
    if m == 0.0:
        return 0.0
    return m * (1.0 + math.log(r) - math.log(m))


@dataclass(frozen=True)
class PointSet:
    points: torch.Tensor

    def __post_init__(self):
        object.__setattr__(self, "points", as_complex(self.points))


@dataclass(frozen=True)
class LineSegments:
    """The parameter set `intervals` placed on the line origin + t * direction, |direction| = 1."""

    intervals: IntervalSet
    origin: complex = 0j
    direction: complex = 1 + 0j

    def __post_init__(self):
        if not math.isclose(abs(self.direction), 1.0):
            raise InvalidParameter(f"direction must be a unit vector, got {self.direction}")

    def point(self, t: float) -> complex:
        return self.origin + t * self.direction


CoverInput = Union[PointSet, LineSegments]


@dataclass
class ContentEstimate:
    upper: float
    lower: float
    exact: bool


def content_weight(d: float) -> float:
    """Volume of the unit ball in dimension d, pi^(d/2) / Gamma(1 + d/2)."""
    return math.pi ** (d / 2.0) / float(gamma(1.0 + d / 2.0))


def greedy_disk_cover(points: torch.Tensor, radius: RadiusProfile) -> list[tuple[complex, float]]:
    """Disks centered at still uncovered points, radius r(center), in lexicographic order."""
    points = as_complex(points)
    order = sorted(range(points.numel()), key=lambda k: (float(points[k].real), float(points[k].imag)))
    covered = torch.zeros(points.numel(), dtype=torch.bool)
    cover = []
    for k in order:
        if covered[k]:
            continue
        center = complex(points[k])
        rho = float(radius(center)[0])
        covered |= (points - center).abs() <= rho
        cover.append((center, rho))
    return cover


def cover_cost(cover: Iterable[tuple[complex, float]], d: float) -> float:
    return sum(content_weight(d) * rho**d for _, rho in cover)


def _separated_count(points: torch.Tensor, gap: float) -> int:
    chosen: list[complex] = []
    for z in points.tolist():
        if all(abs(z - w) > gap for w in chosen):
            chosen.append(z)
    return len(chosen)


def _segment_cover(segments: LineSegments, radius: RadiusProfile, d: float, max_disks: int) -> float:
    cost, count = 0.0, 0
    weight = content_weight(d)
    for a, b in segments.intervals.intervals:
        s = a
        while True:
            rho = float(radius(segments.point(s))[0])
            for _ in range(3):
                rho = min(rho, float(radius(segments.point(s + rho))[0]))
            cost += weight * rho**d
            count += 1
            if count > max_disks:
                raise InvalidParameter(f"covering needs more than {max_disks} disks")
            s += 2.0 * rho
            if s >= b:
                break
    return cost


def hausdorff_content(
    S: CoverInput, d: float, radius: RadiusProfile, max_disks: int = 1_000_000
) -> ContentEstimate:
    """Bounds for the d-dimensional Hausdorff content with covering radii limited by `radius`."""
    if d < 0:
        raise InvalidParameter(f"dimension must be >= 0, got {d}")
    if d > 2:
        return ContentEstimate(0.0, 0.0, True)
    match S:
        case PointSet(points=points):
            if points.numel() == 0 or d > 0:
                return ContentEstimate(0.0, 0.0, True)
            upper = float(len(greedy_disk_cover(points, radius)))
            lower = float(_separated_count(points, 2.0 * radius.sup()))
            return ContentEstimate(upper, lower, upper == lower)
        case LineSegments(intervals=intervals):
            length = intervals.measure()
            if intervals.is_empty() or d > 1:
                return ContentEstimate(0.0, 0.0, True)
            if d == 1:
                return ContentEstimate(length, length, True)
            upper = _segment_cover(S, radius, d, max_disks)
            if d == 0:
                lower = max(1.0, math.ceil(length / (2.0 * radius.sup())))
            else:
                lower = 0.5 * content_weight(d) * radius.sup() ** (d - 1.0) * length
            logger.debug(f"segment content {d=}: {upper=}, {lower=}")
            return ContentEstimate(upper, min(lower, upper), math.isclose(upper, lower))
        case _:
            raise NotImplementedError()


@dataclass
class ChainCheck:
    holds: bool
    upper_r: float
    upper_t: float


def content_chain_check(S: CoverInput, d: float, r_profile: RadiusProfile, t_profile: RadiusProfile) -> ChainCheck:
    """The content with the smaller radius profile dominates the one with the larger."""
    if not r_profile.is_below(t_profile):
        raise IncomparableProfiles("r_profile must lie below t_profile everywhere")
    upper_r = hausdorff_content(S, d, r_profile).upper
    upper_t = hausdorff_content(S, d, t_profile).upper
    return ChainCheck(upper_r >= upper_t - 1e-12 * max(1.0, upper_t), upper_r, upper_t)


@dataclass
class ExceptionalBoundRow:
    t: float
    content: float
    bound: float
    holds: bool


def exceptional_bound_check(
    E: IntervalSet, radius: RadiusProfile, d: float = 1.0, k_max: int = 10
) -> list[ExceptionalBoundRow]:
    """Content of E (placed on the imaginary axis) outside |z| <= t against sup of r over |z| > t, t = 2^k."""
    rows = []
    for k in range(k_max + 1):
        t = 2.0**k
        part = LineSegments(E.outside(t), 0j, 1j)
        content = hausdorff_content(part, d, radius).upper
        bound = radius.sup_outside(t)
        rows.append(ExceptionalBoundRow(t, content, bound, content <= bound + 1e-12))
    return rows
