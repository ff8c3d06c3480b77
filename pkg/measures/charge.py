from dataclasses import dataclass, field
import logging
import math
from typing import Iterable, Union

import torch
from scipy.integrate import quad

from errors import InvalidCharge, InvalidParameter, LinePresent, PartialLineOverlap
from measures.region import LineOverlap, Region
from utils import (
    COMPLEX,
    FLOAT,
    Verdict,
    as_complex,
    as_float,
    dyadic_radii,
    slope_verdict,
)

logger = logging.getLogger(__name__)

CPoint = complex


@dataclass(frozen=True)
class Atom:
    position: CPoint
    mass: float


@dataclass(frozen=True)
class LineMass:
    """coef times arc length on the vertical line Re z = x."""

    x: float
    coef: float


def merge_lines(lines: Iterable[LineMass]) -> tuple[LineMass, ...]:
    merged: dict[float, float] = {}
    for line in lines:
        merged[line.x + 0.0] = merged.get(line.x + 0.0, 0.0) + line.coef
    return tuple(LineMass(x, c) for x, c in sorted(merged.items()) if c != 0.0)


@dataclass(frozen=True, eq=False)
class ChargeDistribution:
    """Finite signed atomic charge plus full vertical line densities.

    Atoms are kept as two aligned tensors; summation always follows their order.
    """

    positions: torch.Tensor = field(default_factory=lambda: torch.zeros(0, dtype=COMPLEX))
    masses: torch.Tensor = field(default_factory=lambda: torch.zeros(0, dtype=FLOAT))
    lines: tuple[LineMass, ...] = ()

    def __post_init__(self):
        positions = as_complex(self.positions)
        masses = as_float(self.masses).reshape(-1)
        if positions.shape != masses.shape:
            raise InvalidCharge(f"{positions.shape=} does not match {masses.shape=}")
        if not (torch.isfinite(positions.real).all() and torch.isfinite(positions.imag).all()):
            raise InvalidCharge("atom positions must be finite")
        if not torch.isfinite(masses).all():
            raise InvalidCharge("atom masses must be finite")
        if (masses == 0).any():
            raise InvalidCharge("atom masses must be nonzero")
        lines = tuple(self.lines)
        if not all(math.isfinite(line.x) and math.isfinite(line.coef) for line in lines):
            raise InvalidCharge("line masses must be finite")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "lines", lines)

    @classmethod
    def empty(cls):
        return cls()

    @classmethod
    def from_atoms(
        cls,
        atoms: Iterable[Union[Atom, tuple[complex, float]]],
        lines: Iterable[LineMass] = (),
    ):
        pairs = [(a.position, a.mass) if isinstance(a, Atom) else a for a in atoms]
        positions = as_complex([complex(p) for p, _ in pairs])
        masses = as_float([float(m) for _, m in pairs])
        return cls(positions, masses, tuple(lines))

    @classmethod
    def from_tensors(cls, positions, masses, lines: Iterable[LineMass] = ()):
        """Build from computed tensors, dropping atoms whose mass is exactly zero."""
        positions, masses = as_complex(positions), as_float(masses).reshape(-1)
        keep = masses != 0
        return cls(positions[keep], masses[keep], merge_lines(lines))

    @property
    def atoms(self) -> tuple[Atom, ...]:
        return tuple(
            Atom(complex(p), float(m)) for p, m in zip(self.positions.tolist(), self.masses.tolist())
        )

    @property
    def radii(self) -> torch.Tensor:
        return self.positions.abs()

    def __len__(self) -> int:
        return self.masses.numel()

    def is_empty(self) -> bool:
        return len(self) == 0 and not self.lines

    def __add__(self, other: "ChargeDistribution") -> "ChargeDistribution":
        return ChargeDistribution(
            torch.cat([self.positions, other.positions]),
            torch.cat([self.masses, other.masses]),
            merge_lines(self.lines + other.lines),
        )

    def __neg__(self) -> "ChargeDistribution":
        return self.scale(-1.0)

    def __sub__(self, other: "ChargeDistribution") -> "ChargeDistribution":
        return self + (-other)

    def __abs__(self) -> "ChargeDistribution":
        return ChargeDistribution(
            self.positions, self.masses.abs(), tuple(LineMass(l.x, abs(l.coef)) for l in self.lines)
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChargeDistribution):
            return NotImplemented
        return (
            torch.equal(self.positions, other.positions)
            and torch.equal(self.masses, other.masses)
            and self.lines == other.lines
        )

    __hash__ = None

    def scale(self, factor: float) -> "ChargeDistribution":
        if factor == 0.0:
            return ChargeDistribution.empty()
        return ChargeDistribution(
            self.positions,
            self.masses * factor,
            tuple(LineMass(l.x, l.coef * factor) for l in self.lines),
        )

    def simplify(self, rtol: float = 1e-12) -> "ChargeDistribution":
        """Merge coincident atoms and drop those whose merged mass cancels."""
        if len(self) == 0:
            return ChargeDistribution((), (), merge_lines(self.lines))
        keys = torch.stack([self.positions.real, self.positions.imag], dim=1) + 0.0
        unique, inverse = torch.unique(keys, dim=0, return_inverse=True)
        merged = torch.zeros(unique.shape[0], dtype=FLOAT).index_add_(0, inverse, self.masses)
        scale = float(self.masses.abs().max())
        keep = merged.abs() > rtol * scale
        positions = torch.complex(unique[:, 0], unique[:, 1])
        return ChargeDistribution(positions[keep], merged[keep], merge_lines(self.lines))

    def equivalent(self, other: "ChargeDistribution", atol: float = 1e-12) -> bool:
        a, b = self.simplify(), other.simplify()
        if len(a) != len(b) or len(a.lines) != len(b.lines):
            return False
        same_atoms = torch.allclose(a.positions, b.positions, rtol=0.0, atol=atol) and torch.allclose(
            a.masses, b.masses, rtol=0.0, atol=atol
        )
        same_lines = all(
            abs(p.x - q.x) <= atol and abs(p.coef - q.coef) <= atol for p, q in zip(a.lines, b.lines)
        )
        return same_atoms and same_lines

    def total_variation(self) -> float:
        if any(l.coef != 0.0 for l in self.lines):
            return math.inf
        return float(self.masses.abs().sum())

    def total_mass(self) -> float:
        line_mass = sum(math.copysign(math.inf, l.coef) for l in self.lines if l.coef != 0.0)
        return float(self.masses.sum()) + line_mass

    def is_mass(self) -> bool:
        return bool((self.masses > 0).all()) and all(l.coef >= 0 for l in self.lines)

    def has_origin_atom(self) -> bool:
        return bool((self.positions == 0).any())


def restrict(nu: ChargeDistribution, region: Region) -> ChargeDistribution:
    keep = region.contains(nu.positions)
    lines = []
    for line in nu.lines:
        match region.line_overlap(line.x):
            case LineOverlap.ALL:
                lines.append(line)
            case LineOverlap.NONE:
                pass
            case LineOverlap.PARTIAL:
                raise PartialLineOverlap(f"line x={line.x} crosses the boundary of {region.kind.value}")
    return ChargeDistribution(nu.positions[keep], nu.masses[keep], tuple(lines))


def shift(nu: ChargeDistribution, w: CPoint) -> ChargeDistribution:
    w = complex(w)
    return ChargeDistribution(
        nu.positions + w, nu.masses, tuple(LineMass(l.x + w.real, l.coef) for l in nu.lines)
    )


def mirror_iR(nu: ChargeDistribution) -> ChargeDistribution:
    positions = torch.complex(-nu.positions.real + 0.0, nu.positions.imag)
    return ChargeDistribution(
        positions, nu.masses, tuple(LineMass(-l.x + 0.0, l.coef) for l in nu.lines)
    )


def rotate_cw(nu: ChargeDistribution) -> ChargeDistribution:
    """nu(-iS): the atom at z moves to iz."""
    if nu.lines:
        raise LinePresent("vertical line masses cannot be rotated")
    positions = torch.complex(-nu.positions.imag + 0.0, nu.positions.real)
    return ChargeDistribution(positions, nu.masses)


def rotate_ccw(nu: ChargeDistribution) -> ChargeDistribution:
    if nu.lines:
        raise LinePresent("vertical line masses cannot be rotated")
    positions = torch.complex(nu.positions.imag, -nu.positions.real + 0.0)
    return ChargeDistribution(positions, nu.masses)


def _chord(x0: float, center: complex, r: torch.Tensor) -> torch.Tensor:
    offset = abs(x0 - center.real)
    return 2.0 * torch.sqrt(torch.clamp(r * r - offset * offset, min=0.0))


def radial_counting(nu: ChargeDistribution, center: CPoint = 0j, r: float = 1.0) -> float:
    if r < 0:
        raise InvalidParameter(f"radius must be >= 0, got {r}")
    inside = (nu.positions - complex(center)).abs() <= r
    value = float(nu.masses[inside].sum())
    radius = torch.tensor(float(r), dtype=FLOAT)
    for line in nu.lines:
        value += line.coef * float(_chord(line.x, complex(center), radius))
    return value


def abs_radial_profile(nu: ChargeDistribution, radii: torch.Tensor) -> torch.Tensor:
    """|nu|^rad at every radius of `radii`, closed disks about the origin."""
    radii = as_float(radii)
    order = torch.argsort(nu.radii, stable=True)
    sorted_radii = nu.radii[order]
    prefix = torch.cat([torch.zeros(1, dtype=FLOAT), torch.cumsum(nu.masses.abs()[order], 0)])
    counts = prefix[torch.searchsorted(sorted_radii, radii, right=True)]
    for line in nu.lines:
        counts = counts + abs(line.coef) * _chord(line.x, 0j, radii)
    return counts


def _tail_radii(r_max: float, tail: float) -> torch.Tensor:
    if r_max <= 1:
        raise InvalidParameter(f"r_max must exceed 1, got {r_max}")
    k_max = math.floor(math.log2(r_max))
    k_min = math.floor(k_max * (1.0 - tail))
    return dyadic_radii(k_max, start=k_min)


def upper_density(nu: ChargeDistribution, p: float = 1.0, r_max: float = 2.0**14, tail: float = 0.5) -> float:
    """Largest |nu|^rad(r)/r^p over the upper `tail` share of dyadic radii up to r_max."""
    if p < 0:
        raise InvalidParameter(f"p must be >= 0, got {p}")
    radii = _tail_radii(r_max, tail)
    return float((abs_radial_profile(nu, radii) / radii.pow(p)).max())


def order_estimate(nu: ChargeDistribution, r_max: float = 2.0**14, tail: float = 0.5) -> float:
    radii = _tail_radii(r_max, tail)
    radii = radii[radii > 1]
    if radii.numel() == 0:
        return 0.0
    return float((torch.log1p(abs_radial_profile(nu, radii)) / torch.log(radii)).max())


@dataclass
class ConvergenceClassReport:
    p: float
    value: float
    samples: list[tuple[float, float]]
    slope: float
    verdict: Verdict


def _atom_class_integral(radii: torch.Tensor, weights: torch.Tensor, p: float, T: float) -> float:
    lower = torch.clamp(radii, min=1.0)
    active = lower < T
    lower, weights = lower[active], weights[active]
    if p == 0:
        return float((weights * torch.log(T / lower)).sum())
    return float((weights * (lower.pow(-p) - T ** (-p)) / p).sum())


def convergence_class(
    nu: ChargeDistribution, p: float, r_max: float = 2.0**14, slope_tol: float = 0.05
) -> ConvergenceClassReport:
    """Integral of |nu|^rad(t)/t^(p+1) over [1, T] at dyadic T, with a growth verdict."""
    if p < 0:
        raise InvalidParameter(f"p must be >= 0, got {p}")
    radii = _tail_radii(r_max, 1.0)
    weights = nu.masses.abs()
    samples = []
    for T in radii.tolist():
        if T <= 1.0:
            continue
        value = _atom_class_integral(nu.radii, weights, p, T)
        for line in nu.lines:
            value += quad(
                lambda t, x0=abs(line.x): 2.0 * math.sqrt(max(t * t - x0 * x0, 0.0)) * t ** (-p - 1.0),
                1.0,
                T,
                limit=200,
            )[0] * abs(line.coef)
        samples.append((T, value))
    if not samples:
        return ConvergenceClassReport(p, 0.0, [], math.nan, Verdict.INCONCLUSIVE)
    slope, verdict = slope_verdict(
        [math.log(T) for T, _ in samples], [v for _, v in samples], slope_tol
    )
    logger.debug(f"convergence class {p=}: {slope=}, {verdict=}")
    return ConvergenceClassReport(p, samples[-1][1], samples, slope, verdict)
