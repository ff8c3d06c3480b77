from dataclasses import dataclass, field, replace
from enum import Enum
import logging
import math
from typing import Iterable, Optional

from scipy.optimize import brentq
import torch

from balayage.kernels import poisson_cdf, poisson_density
from errors import (
    BlaschkeViolated,
    InvalidCharge,
    InvalidParameter,
    NoSuchLine,
    OriginInSupport,
    PartialLineOverlap,
)
from logmeasure import char_log_right, side_weights
from measures.charge import ChargeDistribution, CPoint, LineMass, merge_lines, mirror_iR, restrict, shift
from measures.region import Region
from utils import COMPLEX, FLOAT, as_complex, as_float, default

logger = logging.getLogger(__name__)

LINE_ATOL = 1e-9
TV_GRID = 4096


class Genus(Enum):
    ZERO = "0"
    ONE = "1"
    ZERO_ONE = "01"


@dataclass(frozen=True)
class PoissonTerm:
    source: CPoint
    mass: float
    line: float


def _same_line(a: float, b: float) -> bool:
    return abs(a - b) <= LINE_ATOL * max(1.0, abs(a), abs(b))


def _merge_targets(lines: Iterable[float]) -> tuple[float, ...]:
    merged: list[float] = []
    for x in sorted(lines):
        if not merged or not _same_line(merged[-1], x):
            merged.append(x + 0.0)
    return tuple(merged)


@dataclass(frozen=True, eq=False)
class BoundaryCharge:
    """Result of sweeping a charge onto vertical lines.

    Swept atoms stay symbolic: the Poisson image of the atom at `sources[k]` with mass
    `masses[k]` lives on the line Re z = `term_lines[k]`. `uniform_terms` are signed
    multiples of arc length on target lines and `axis` holds atoms sitting on them.
    """

    retained: ChargeDistribution = field(default_factory=ChargeDistribution.empty)
    sources: torch.Tensor = field(default_factory=lambda: torch.zeros(0, dtype=COMPLEX))
    masses: torch.Tensor = field(default_factory=lambda: torch.zeros(0, dtype=FLOAT))
    term_lines: torch.Tensor = field(default_factory=lambda: torch.zeros(0, dtype=FLOAT))
    uniform_terms: tuple[LineMass, ...] = ()
    axis: ChargeDistribution = field(default_factory=ChargeDistribution.empty)
    target_lines: tuple[float, ...] = ()
    genus1_only: bool = False

    def __post_init__(self):
        sources = as_complex(self.sources)
        masses = as_float(self.masses).reshape(-1)
        term_lines = as_float(self.term_lines).reshape(-1)
        if not sources.shape == masses.shape == term_lines.shape:
            raise InvalidCharge(f"{sources.shape=}, {masses.shape=} and {term_lines.shape=} differ")
        if ((sources.real - term_lines) == 0).any():
            raise InvalidCharge("a Poisson source lies on its own target line")
        targets = list(self.target_lines) + term_lines.tolist() + [l.x for l in self.uniform_terms]
        object.__setattr__(self, "sources", sources)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "term_lines", term_lines)
        object.__setattr__(self, "uniform_terms", merge_lines(self.uniform_terms))
        object.__setattr__(self, "target_lines", _merge_targets(targets))

    @classmethod
    def from_terms(
        cls,
        retained: ChargeDistribution,
        terms: Iterable[PoissonTerm],
        uniform_terms: Iterable[LineMass] = (),
        axis: Optional[ChargeDistribution] = None,
        target_lines: Iterable[float] = (),
        genus1_only: bool = False,
    ):
        terms = list(terms)
        return cls(
            retained=retained,
            sources=as_complex([t.source for t in terms]),
            masses=as_float([t.mass for t in terms]),
            term_lines=as_float([t.line for t in terms]),
            uniform_terms=tuple(uniform_terms),
            axis=default(axis, ChargeDistribution.empty()),
            target_lines=tuple(target_lines),
            genus1_only=genus1_only,
        )

    @property
    def poisson_terms(self) -> tuple[PoissonTerm, ...]:
        return tuple(
            PoissonTerm(complex(s), float(m), float(x))
            for s, m, x in zip(self.sources.tolist(), self.masses.tolist(), self.term_lines.tolist())
        )

    def line(self, x: float) -> float:
        for target in self.target_lines:
            if _same_line(target, x):
                return target
        raise NoSuchLine(f"no target line at Re z = {x}; lines are {self.target_lines}")

    def _on_line(self, x: float) -> torch.Tensor:
        return (self.term_lines - x).abs() <= LINE_ATOL * max(1.0, abs(x))

    def uniform_coef(self, x: float) -> float:
        return sum(l.coef for l in self.uniform_terms if _same_line(l.x, x))

    def axis_atoms(self, x: float) -> ChargeDistribution:
        keep = (self.axis.positions.real - x).abs() <= LINE_ATOL * max(1.0, abs(x))
        return ChargeDistribution(self.axis.positions[keep], self.axis.masses[keep])

    def cdf(self, x: float, y):
        """Distribution function on the line Re z = x with F(0) = 0."""
        x = self.line(x)
        scalar = not isinstance(y, torch.Tensor)
        y = as_float(y).reshape(-1)
        on_line = self._on_line(x)
        value = poisson_cdf(self.sources[on_line], self.masses[on_line], x, y)
        coef = self.uniform_coef(x)
        if coef != 0.0:
            value = value + coef * y
        atoms = self.axis_atoms(x)
        if len(atoms):
            heights = atoms.positions.imag.reshape(1, -1)
            column = y.reshape(-1, 1)
            above = ((heights > 0) & (heights <= column)).to(FLOAT)
            below = ((heights <= 0) & (heights > column)).to(FLOAT)
            value = value + ((above - below) * atoms.masses).sum(-1)
        return float(value[0]) if scalar else value

    def density(self, x: float, y):
        """Density of the absolutely continuous part on Re z = x."""
        x = self.line(x)
        scalar = not isinstance(y, torch.Tensor)
        on_line = self._on_line(x)
        value = poisson_density(self.sources[on_line], self.masses[on_line], x, y) + self.uniform_coef(x)
        return float(value[0]) if scalar else value

    def mass(self, x: float, y1: float, y2: float) -> float:
        return self.cdf(x, y2) - self.cdf(x, y1)

    def total_variation(self, x: Optional[float] = None) -> float:
        if x is None:
            return self.retained.total_variation() + sum(self.total_variation(t) for t in self.target_lines)
        x = self.line(x)
        if self.uniform_coef(x) != 0.0:
            return math.inf
        on_line = self._on_line(x)
        sources, masses = self.sources[on_line], self.masses[on_line]
        atoms = float(self.axis_atoms(x).masses.abs().sum())
        if masses.numel() == 0:
            return atoms
        theta = torch.linspace(-math.pi / 2, math.pi / 2, TV_GRID + 2, dtype=FLOAT)[1:-1]
        grid = torch.unique(torch.cat([torch.tan(theta), sources.imag]))
        values = poisson_density(sources, masses, x, grid)
        roots = []
        for k in torch.nonzero(values[:-1] * values[1:] < 0).flatten().tolist():
            roots.append(
                brentq(
                    lambda t: float(poisson_density(sources, masses, x, t)[0]),
                    float(grid[k]),
                    float(grid[k + 1]),
                )
            )
        breaks = torch.tensor([-math.inf, *roots, math.inf], dtype=FLOAT)
        increments = poisson_cdf(sources, masses, x, breaks).diff()
        logger.debug(f"total variation on {x=}: {len(roots)} sign changes")
        return float(increments.abs().sum()) + atoms

    def shift(self, w: CPoint) -> "BoundaryCharge":
        w = complex(w)
        return BoundaryCharge(
            retained=shift(self.retained, w),
            sources=self.sources + w,
            masses=self.masses,
            term_lines=self.term_lines + w.real,
            uniform_terms=tuple(LineMass(l.x + w.real, l.coef) for l in self.uniform_terms),
            axis=shift(self.axis, w),
            target_lines=tuple(t + w.real for t in self.target_lines),
            genus1_only=self.genus1_only,
        )

    def mirror(self) -> "BoundaryCharge":
        return BoundaryCharge(
            retained=mirror_iR(self.retained),
            sources=torch.complex(-self.sources.real + 0.0, self.sources.imag),
            masses=self.masses,
            term_lines=-self.term_lines + 0.0,
            uniform_terms=tuple(LineMass(-l.x + 0.0, l.coef) for l in self.uniform_terms),
            axis=mirror_iR(self.axis),
            target_lines=tuple(-t + 0.0 for t in self.target_lines),
            genus1_only=self.genus1_only,
        )

    def __add__(self, other: "BoundaryCharge") -> "BoundaryCharge":
        return BoundaryCharge(
            retained=self.retained + other.retained,
            sources=torch.cat([self.sources, other.sources]),
            masses=torch.cat([self.masses, other.masses]),
            term_lines=torch.cat([self.term_lines, other.term_lines]),
            uniform_terms=self.uniform_terms + other.uniform_terms,
            axis=self.axis + other.axis,
            target_lines=self.target_lines + other.target_lines,
            genus1_only=self.genus1_only and other.genus1_only,
        )


def boundary_cdf(bc: BoundaryCharge, line_abscissa: float, y):
    return bc.cdf(line_abscissa, y)


def sweep0(nu: ChargeDistribution) -> BoundaryCharge:
    """Genus 0 balayage of the right half-plane part onto the imaginary axis."""
    right = nu.positions.real > 0
    on_axis = nu.positions.real == 0
    sources, masses = nu.positions[right], nu.masses[right]
    if masses.numel():
        swept = ChargeDistribution(sources, masses.abs())
        floor = min(1.0, 0.5 * float(swept.radii.min()))
        _, convergent = char_log_right(swept, 2.0 * float(swept.radii.max()), r_floor=floor)
        if not convergent:
            raise BlaschkeViolated("right half-plane part does not satisfy the Blaschke condition")
    return BoundaryCharge(
        retained=restrict(nu, Region.left_half()),
        sources=sources,
        masses=masses,
        term_lines=torch.zeros_like(masses),
        uniform_terms=tuple(LineMass(0.0, l.coef) for l in nu.lines if l.x >= 0),
        axis=ChargeDistribution(nu.positions[on_axis], nu.masses[on_axis]),
        target_lines=(0.0,),
    )


def sweep1(nu: ChargeDistribution) -> BoundaryCharge:
    """Genus 1 balayage: genus 0 plus the linear correction on the imaginary axis."""
    if nu.has_origin_atom() or any(l.x == 0 for l in nu.lines):
        raise OriginInSupport("genus 1 balayage needs the origin outside the support")
    base = sweep0(nu)
    right_weights, _ = side_weights(nu)
    # a line Re z = x0 > 0 carries Re(1/z) mass coef * pi, cancelling its uniform image
    coef = -float(right_weights.sum()) / math.pi - sum(l.coef for l in nu.lines if l.x > 0)
    return replace(base, uniform_terms=base.uniform_terms + (LineMass(0.0, coef),))


def sweep01(nu: ChargeDistribution, r0: float = 1.0) -> BoundaryCharge:
    """Genus 0 inside the disk |z| < r0, genus 1 outside.

    Lines on the imaginary axis already sit on the target and go with the genus 0 part.
    A line with 0 < Re z < r0 would have to be split at the disk and is rejected.
    """
    if r0 <= 0:
        raise InvalidParameter(f"r0 must be positive, got {r0}")
    crossing = [l.x for l in nu.lines if 0 < l.x < r0]
    if crossing:
        raise PartialLineOverlap(f"lines at x={crossing} cross the disk of radius {r0=}")
    inner = nu.radii < r0
    near = ChargeDistribution(
        nu.positions[inner], nu.masses[inner], tuple(l for l in nu.lines if l.x == 0)
    )
    far = ChargeDistribution(
        nu.positions[~inner], nu.masses[~inner], tuple(l for l in nu.lines if l.x != 0)
    )
    return sweep0(near) + sweep1(far)


def sweep(nu: ChargeDistribution, genus: Genus, r0: float = 1.0) -> BoundaryCharge:
    match genus:
        case Genus.ZERO:
            return sweep0(nu)
        case Genus.ONE:
            return sweep1(nu)
        case Genus.ZERO_ONE:
            return sweep01(nu, r0)
        case _:
            raise NotImplementedError()


def sweep_left(nu: ChargeDistribution, genus: Genus, r0: float = 1.0) -> BoundaryCharge:
    """Balayage of the left half-plane part onto the imaginary axis."""
    return sweep(mirror_iR(nu), genus, r0).mirror()


def sweep_left0(nu: ChargeDistribution) -> BoundaryCharge:
    return sweep_left(nu, Genus.ZERO)


def sweep_left1(nu: ChargeDistribution) -> BoundaryCharge:
    return sweep_left(nu, Genus.ONE)


def sweep_left01(nu: ChargeDistribution, r0: float = 1.0) -> BoundaryCharge:
    return sweep_left(nu, Genus.ZERO_ONE, r0)


@dataclass
class StripStages:
    genus: Genus
    shifted: ChargeDistribution
    right: BoundaryCharge
    moved: BoundaryCharge
    left: BoundaryCharge
    result: BoundaryCharge


def strip_genus(nu: ChargeDistribution, b: float, r0: float = 1.0) -> Genus:
    """Genus 1 alone suffices when no mass to be swept sits within r0 of b or -b."""
    z = nu.positions
    near_right = bool(((z.real > b) & ((z - b).abs() < r0)).any())
    near_left = bool(((z.real < -b) & ((z + b).abs() < r0)).any())
    corners = bool(((z - b) == 0).any() or ((z + b) == 0).any()) or any(abs(l.x) == b for l in nu.lines)
    return Genus.ZERO_ONE if near_right or near_left or corners else Genus.ONE


def strip_stages(
    nu: ChargeDistribution, b: float, r0: float = 1.0, genus: Optional[Genus] = None
) -> StripStages:
    if b < 0:
        raise InvalidParameter(f"strip half-width must be >= 0, got {b}")
    if r0 <= 0:
        raise InvalidParameter(f"r0 must be positive, got {r0}")
    # the genus 0 disks about the corners must not cut a line outside the strip
    r0 = min([r0, *((abs(l.x) - b) / 2 for l in nu.lines if b < abs(l.x) < b + r0)])
    chosen = default(genus, strip_genus(nu, b, r0))
    shifted = shift(nu, -b)
    right = sweep(shifted, chosen, r0)
    moved = right.shift(2.0 * b)
    left = sweep_left(moved.retained, chosen, r0)
    merged = replace(moved, retained=ChargeDistribution.empty()) + left
    result = replace(merged.shift(-b), genus1_only=chosen is Genus.ONE)
    logger.debug(f"strip balayage {b=}, genus={chosen.value}, terms={result.masses.numel()}")
    return StripStages(chosen, shifted, right, moved, left, result)


def sweep_strip(
    nu: ChargeDistribution, b: float, r0: float = 1.0, genus: Optional[Genus] = None
) -> BoundaryCharge:
    """Sweep the charge outside the closed strip |Re z| <= b onto its two boundary lines."""
    return strip_stages(nu, b, r0, genus).result
