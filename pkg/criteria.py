from dataclasses import dataclass, field
from enum import Enum
import logging
import math
from typing import Callable, Optional

from einops import rearrange
import torch
from tqdm.auto import tqdm

from errors import InvalidParameter, OriginPoint, SignedInput, SupportViolation
from growth.functions import GrowthFunction
from growth.means import integrate, j_axis_shells
from logmeasure import LogProfile, require_mass
from measures.charge import ChargeDistribution, shift
from smallsets import IntervalSet, q_of_E
from utils import FLOAT, LN2, Verdict, dyadic_radii, running_max, slope_verdict

logger = logging.getLogger(__name__)

AXIS_INTEGRAND = "M(iy)+M(-iy)"


@dataclass
class CriterionReport:
    """Gap matrix D(n, N) over the dyadic grid 0 <= n < N <= n_max.

    Matrices are indexed [n, N] and hold NaN off the grid.
    """

    grid: list[tuple[int, int]]
    gaps: torch.Tensor
    ell: torch.Tensor
    comparison: torch.Tensor
    sup_by_N: torch.Tensor
    running_sup: float
    running: torch.Tensor
    slope: float
    verdict: Verdict
    params: dict
    provenance: dict = field(default_factory=dict)

    @classmethod
    def from_matrices(
        cls,
        ell: torch.Tensor,
        comparison: torch.Tensor,
        n_max: int,
        slope_tol: float = 0.05,
        provenance: Optional[dict] = None,
    ):
        index = torch.arange(n_max + 1)
        on_grid = rearrange(index, "n -> n 1") < rearrange(index, "N -> 1 N")
        nan = torch.tensor(math.nan, dtype=FLOAT)
        ell = torch.where(on_grid, ell, nan)
        comparison = torch.where(on_grid, comparison, nan)
        gaps = ell - comparison
        sup_by_N = torch.where(on_grid, gaps, -math.inf).max(dim=0).values[1:]
        running = running_max(sup_by_N)
        slope, verdict = slope_verdict((index[1:] * LN2).tolist(), running.tolist(), slope_tol)
        running_sup = float(running[-1]) if running.numel() else 0.0
        grid = [(n, N) for N in range(1, n_max + 1) for n in range(N)]
        logger.info(f"criterion over n_max={n_max}: {running_sup=}, {slope=}, {verdict=}")
        return cls(
            grid=grid,
            gaps=gaps,
            ell=ell,
            comparison=comparison,
            sup_by_N=sup_by_N,
            running_sup=running_sup,
            running=running,
            slope=slope,
            verdict=verdict,
            params={"n_max": n_max, "slope_tol": slope_tol},
            provenance=provenance or {},
        )

    def rows(self) -> list[dict]:
        return [
            {
                "n": n,
                "N": N,
                "ell_nu": float(self.ell[n, N]),
                "comparison": float(self.comparison[n, N]),
                "gap": float(self.gaps[n, N]),
            }
            for n, N in self.grid
        ]


def _check_grid(n_max: int):
    if n_max < 1:
        raise InvalidParameter(f"n_max must be >= 1, got {n_max}")


def _pairs(n_max: int) -> tuple[torch.Tensor, torch.Tensor]:
    radii = dyadic_radii(n_max)
    return rearrange(radii, "n -> n 1"), rearrange(radii, "N -> 1 N")


def _differences(prefix: torch.Tensor) -> torch.Tensor:
    """P[N] - P[n] as an [n, N] matrix."""
    return rearrange(prefix, "N -> 1 N") - rearrange(prefix, "n -> n 1")


def sub_matrix(nu: ChargeDistribution, n_max: int) -> torch.Tensor:
    require_mass(nu)
    r, R = _pairs(n_max)
    return LogProfile(nu).sub(r, R)


def axis_matrix(M: GrowthFunction, n_max: int, tol: float = 1e-9) -> torch.Tensor:
    shells = j_axis_shells(M, n_max, tol)
    return _differences(torch.cat([torch.zeros(1, dtype=FLOAT), torch.cumsum(shells, 0)]))


def dyadic_gap_report(
    nu: ChargeDistribution, M: GrowthFunction, n_max: int = 14, slope_tol: float = 0.05, tol: float = 1e-9
) -> CriterionReport:
    _check_grid(n_max)
    return CriterionReport.from_matrices(
        sub_matrix(nu, n_max),
        axis_matrix(M, n_max, tol),
        n_max,
        slope_tol,
        {"criterion": "dyadic", "axis_integrand": AXIS_INTEGRAND, "function": M.variant},
    )


def pair_gap_report(
    nu: ChargeDistribution, mu: ChargeDistribution, n_max: int = 14, slope_tol: float = 0.05
) -> CriterionReport:
    _check_grid(n_max)
    return CriterionReport.from_matrices(
        sub_matrix(nu, n_max), sub_matrix(mu, n_max), n_max, slope_tol, {"criterion": "pair"}
    )


def shift_gap_report(
    nu: ChargeDistribution, mu: ChargeDistribution, w: complex, n_max: int = 14, slope_tol: float = 0.05
) -> CriterionReport:
    """Pair gaps of the w-shift of nu against mu."""
    report = pair_gap_report(shift(nu, w), mu, n_max, slope_tol)
    report.provenance = {"criterion": "shift", "shift": [complex(w).real, complex(w).imag]}
    return report


def _positive_axis(nu: ChargeDistribution, name: str):
    if nu.lines or not bool(((nu.positions.imag == 0) & (nu.positions.real > 0)).all()):
        raise SupportViolation(f"{name} must be supported on the positive real axis")


def mr_positive(Z: ChargeDistribution, W: ChargeDistribution, n_max: int = 14, slope_tol: float = 0.05) -> CriterionReport:
    """Sums of 1/z over r < z <= R for Z minus the same for W."""
    _check_grid(n_max)
    _positive_axis(Z, "Z")
    _positive_axis(W, "W")
    r, R = _pairs(n_max)
    return CriterionReport.from_matrices(
        LogProfile(Z).right(r, R), LogProfile(W).right(r, R), n_max, slope_tol, {"criterion": "mr"}
    )


def _eps_matrix(eps: float, n_max: int) -> torch.Tensor:
    if eps <= 0:
        raise InvalidParameter(f"eps must be positive, got {eps}")
    r, R = _pairs(n_max)
    return eps * torch.log(R / r)


def eps_condition(
    Z: ChargeDistribution, eps: float, n_max: int = 14, slope_tol: float = 0.05
) -> tuple[float, CriterionReport]:
    """Smallest C with sum of |Re(1/z)| over r < |z| <= R at most eps ln(R/r) + C on the grid."""
    _check_grid(n_max)
    r, R = _pairs(n_max)
    profile = LogProfile(abs(Z))
    report = CriterionReport.from_matrices(
        profile.right(r, R) + profile.left(r, R), _eps_matrix(eps, n_max), n_max, slope_tol, {"criterion": "eps", "eps": eps}
    )
    return max(0.0, report.running_sup), report


def eps_pair_condition(
    Z: ChargeDistribution, W: ChargeDistribution, eps: float, n_max: int = 14, slope_tol: float = 0.05
) -> tuple[float, CriterionReport]:
    """Smallest C with ell_Z(r, R) <= ell_W(r, R) + eps ln(R/r) + C on the grid."""
    _check_grid(n_max)
    comparison = sub_matrix(W, n_max) + _eps_matrix(eps, n_max)
    report = CriterionReport.from_matrices(
        sub_matrix(Z, n_max), comparison, n_max, slope_tol, {"criterion": "eps-pair", "eps": eps}
    )
    return max(0.0, report.running_sup), report


class Side(Enum):
    RH = "rh"
    LH = "lh"
    SUB = "sub"


def axis_gap(u: GrowthFunction, nu: ChargeDistribution, n_max: int = 14, side: Side = Side.SUB, tol: float = 1e-9) -> float:
    """sup over the dyadic grid of |J(u; r, R) - ell_side(nu; r, R)|."""
    _check_grid(n_max)
    r, R = _pairs(n_max)
    profile = LogProfile(nu)
    match side:
        case Side.RH:
            ell = profile.right(r, R)
        case Side.LH:
            ell = profile.left(r, R)
        case Side.SUB:
            require_mass(nu)
            ell = profile.sub(r, R)
        case _:
            raise NotImplementedError()
    index = torch.arange(n_max + 1)
    on_grid = rearrange(index, "n -> n 1") < rearrange(index, "N -> 1 N")
    return float((axis_matrix(u, n_max, tol) - ell).abs()[on_grid].max())


def mu_rh_check(
    mu: ChargeDistribution, n_max: int = 14, mirrored: bool = False, slope_tol: float = 0.05
) -> CriterionReport:
    """Gaps ell_left - ell_right (ell_right - ell_left when mirrored) on the dyadic grid."""
    _check_grid(n_max)
    require_mass(mu)
    r, R = _pairs(n_max)
    profile = LogProfile(mu)
    left, right = profile.left(r, R), profile.right(r, R)
    if mirrored:
        left, right = right, left
    return CriterionReport.from_matrices(
        left, right, n_max, slope_tol, {"criterion": "mu-lh" if mirrored else "mu-rh"}
    )


@dataclass
class RedhefferCertificate:
    total: float
    partial_sums: list[tuple[float, float]]
    pairs: list[tuple[complex, int]]
    slope: float
    verdict: Verdict


def _pairing_candidates(z: complex, c: float, used: set[int]) -> list[int]:
    """Free integers nearest to the real minimizer c|z|^2 / Im z of |1/z - c/(i m)|, one per side.

    As a function of 1/m the distance is convex, so the nearest free m on each side contains the best one.
    On the real axis the distance decreases in |m| without a minimizer; the smallest free |m| is used.
    """
    if z.imag == 0:
        k = 1
        while k in used and -k in used:
            k += 1
        return [m for m in (k, -k) if m not in used]
    target = c * abs(z) ** 2 / z.imag
    sign = 1 if target > 0 else -1
    up = max(1, math.ceil(abs(target)))
    while sign * up in used:
        up += 1
    candidates = [sign * up]
    down = math.floor(abs(target))
    while down >= 1 and sign * down in used:
        down -= 1
    if down >= 1:
        candidates.append(sign * down)
    return candidates


def redheffer_bound(Z: ChargeDistribution, c: float, n_max: int = 14, slope_tol: float = 0.05) -> RedhefferCertificate:
    """Greedy pairing z -> distinct nonzero integers m with small |1/z - c/(i m)|.

    A bounded sum certifies an outer Redheffer density along the imaginary axis of at most c.
    """
    if c <= 0:
        raise InvalidParameter(f"c must be positive, got {c}")
    if Z.has_origin_atom():
        raise OriginPoint("point distributions paired with integers must avoid the origin")
    if Z.lines or not bool((Z.masses == torch.round(Z.masses)).all() and (Z.masses > 0).all()):
        raise SignedInput("Z must be a point distribution with positive integer multiplicities")
    points = [
        z for z, k in sorted(zip(Z.positions.tolist(), Z.masses.tolist()), key=lambda a: (abs(a[0]), a[0].imag, a[0].real))
        for _ in range(int(k))
    ]
    used: set[int] = set()
    pairs, terms = [], []
    for z in points:
        candidates = _pairing_candidates(z, c, used)
        best = min(candidates, key=lambda m: (abs(1.0 / z - c / (1j * m)), abs(m)))
        used.add(best)
        pairs.append((z, best))
        terms.append(abs(1.0 / z - c / (1j * best)))
    partial_sums = []
    term_tensor = torch.tensor(terms, dtype=FLOAT)
    moduli = torch.tensor([abs(z) for z in points], dtype=FLOAT)
    for radius in dyadic_radii(n_max).tolist():
        partial_sums.append((radius, float(term_tensor[moduli <= radius].sum())))
    slope, verdict = slope_verdict([math.log(r) for r, _ in partial_sums], [s for _, s in partial_sums], slope_tol)
    total = float(term_tensor.sum())
    logger.info(f"redheffer pairing {c=}: {total=}, {verdict=}")
    return RedhefferCertificate(total, partial_sums, pairs, slope, verdict)


class GaugeKind(Enum):
    ZERO = "zero"
    POWER = "power"
    CALLABLE = "callable"


@dataclass(frozen=True)
class GrowthGauge:
    """Even gauge q(t) = q(|t|): zero, c |t|^p with p in [0, 1), or an arbitrary callable."""

    kind: GaugeKind
    p: float = 0.0
    scale: float = 1.0
    fn: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        if self.kind is GaugeKind.POWER and not (0.0 <= self.p < 1.0 and self.scale >= 0):
            raise InvalidParameter(f"power gauge needs p in [0, 1) and scale >= 0, got ({self.p}, {self.scale})")
        if self.kind is GaugeKind.CALLABLE and self.fn is None:
            raise InvalidParameter("callable gauge needs fn")

    @classmethod
    def zero(cls):
        return cls(GaugeKind.ZERO)

    @classmethod
    def power(cls, p: float, scale: float = 1.0):
        return cls(GaugeKind.POWER, p, scale)

    @classmethod
    def from_callable(cls, fn: Callable[[float], float]):
        return cls(GaugeKind.CALLABLE, fn=fn)

    def __call__(self, t: float) -> float:
        match self.kind:
            case GaugeKind.ZERO:
                return 0.0
            case GaugeKind.POWER:
                return self.scale * abs(t) ** self.p
            case GaugeKind.CALLABLE:
                return float(self.fn(abs(t)))
            case _:
                raise NotImplementedError()

    def tail(self, T: float) -> float:
        """Integral of 2 q(t) / t^2 over t > T."""
        match self.kind:
            case GaugeKind.ZERO:
                return 0.0
            case GaugeKind.POWER:
                return 2.0 * self.scale * T ** (self.p - 1.0) / (1.0 - self.p)
            case GaugeKind.CALLABLE:
                return math.nan
            case _:
                raise NotImplementedError()


@dataclass
class GaugeBudget:
    truncated: float
    tail: float
    total: float
    verdict: Verdict


def _q_E_tail(E: IntervalSet, T: float, tol: float) -> float:
    """Integral of q_E(t) / t^2 over t > T; q_E is m (1 + ln t - ln m) beyond sup E."""
    top = max(T, E.sup())
    head = 0.0
    if top > T:
        head = integrate(lambda s: q_of_E(E, math.exp(s)) * math.exp(-s), math.log(T), math.log(top), tol)
    m = E.measure_within(top)
    if m == 0.0:
        return head
    return head + m * (2.0 - math.log(m) + math.log(top)) / top


def gauge_budget(
    q0: GrowthGauge, q: GrowthGauge, E: IntervalSet, t_max: float, tol: float = 1e-9
) -> GaugeBudget:
    """Integral over t >= 1 of (q0(t) + q0(-t) + q(t) + q(-t) + q_E(t)) / t^2, split at t_max."""
    if t_max < 2:
        raise InvalidParameter(f"t_max must be >= 2, got {t_max}")

    def integrand(s: float) -> float:
        t = math.exp(s)
        return (2.0 * q0(t) + 2.0 * q(t) + q_of_E(E, t)) * math.exp(-s)

    kinks = [math.log(x) for a, b in E.intervals for x in (a, b) if 1.0 < x < t_max]
    truncated = integrate(integrand, 0.0, math.log(t_max), tol, kinks)
    tail = q0.tail(t_max) + q.tail(t_max) + _q_E_tail(E, t_max, tol)
    if math.isnan(tail):
        logger.warning("gauge without a known tail; budget covers [1, t_max] only")
        return GaugeBudget(truncated, math.nan, truncated, Verdict.INCONCLUSIVE)
    return GaugeBudget(truncated, tail, truncated + tail, Verdict.BOUNDED)


class ScanKind(Enum):
    AXIS = "axis"
    STRIP_LINES = "strip-lines"
    STRIP_GRID = "strip-grid"


@dataclass(frozen=True)
class ScanDomain:
    kind: ScanKind
    y_max: float
    samples: int = 401
    b: float = 0.0
    x_samples: int = 9

    @classmethod
    def axis(cls, y_max: float, samples: int = 401):
        return cls(ScanKind.AXIS, y_max, samples)

    @classmethod
    def strip_lines(cls, b: float, y_max: float, samples: int = 401):
        return cls(ScanKind.STRIP_LINES, y_max, samples, b)

    @classmethod
    def strip_grid(cls, b: float, y_max: float, samples: int = 401, x_samples: int = 9):
        return cls(ScanKind.STRIP_GRID, y_max, samples, b, x_samples)

    def points(self) -> torch.Tensor:
        if self.y_max <= 0 or self.samples < 2 or self.b < 0:
            raise InvalidParameter(f"invalid scan domain {self}")
        y = torch.linspace(-self.y_max, self.y_max, self.samples, dtype=FLOAT)
        match self.kind:
            case ScanKind.AXIS:
                x = torch.zeros(1, dtype=FLOAT)
            case ScanKind.STRIP_LINES:
                x = torch.tensor([-self.b, self.b], dtype=FLOAT)
            case ScanKind.STRIP_GRID:
                x = torch.linspace(-self.b, self.b, self.x_samples, dtype=FLOAT)
            case _:
                raise NotImplementedError()
        grid_x, grid_y = torch.meshgrid(x, y, indexing="ij")
        return torch.complex(grid_x, grid_y).reshape(-1)


@dataclass
class ViolationReport:
    sampled: int
    excluded: int
    violations: list[tuple[complex, float]]
    max_violation: float
    exceptional_measure: float


def inequality_scan(
    lhs: GrowthFunction,
    rhs: GrowthFunction,
    domain: ScanDomain,
    E: Optional[IntervalSet] = None,
    atol: float = 1e-12,
) -> ViolationReport:
    """Check lhs <= rhs on the domain samples with |Im z| outside E."""
    E = E or IntervalSet()
    points = domain.points()
    kept = points[~E.contains(points.imag.abs())]
    margins = []
    for chunk in tqdm(torch.split(kept, 256), desc="scan", disable=not logger.isEnabledFor(logging.INFO)):
        left, right = lhs(chunk), rhs(chunk)
        margin = torch.where(left == -math.inf, torch.full_like(left, -math.inf), left - right)
        margins.append(margin)
    margins = torch.cat(margins) if margins else torch.zeros(0, dtype=FLOAT)
    bad = margins > atol
    violations = list(zip(kept[bad].tolist(), margins[bad].tolist()))
    max_violation = float(margins[bad].max()) if violations else 0.0
    if violations:
        logger.warning(f"{len(violations)} violations, {max_violation=}")
    return ViolationReport(
        sampled=points.numel(),
        excluded=points.numel() - kept.numel(),
        violations=violations,
        max_violation=max_violation,
        exceptional_measure=E.measure_within(domain.y_max),
    )


@dataclass
class IntervalReport:
    intervals: torch.Tensor
    gaps: torch.Tensor
    bins: torch.Tensor
    sup_by_bin: torch.Tensor
    running_sup: float
    slope: float
    verdict: Verdict
    params: dict


def interval_gap_report(
    nu: ChargeDistribution,
    mu: ChargeDistribution,
    n_max: int = 14,
    samples: int = 1000,
    seed: int = 0,
    slope_tol: float = 0.05,
) -> IntervalReport:
    """Pair gaps on random intervals 1 <= r < R <= 2^n_max, binned by ceil(log2 R)."""
    _check_grid(n_max)
    require_mass(nu)
    require_mass(mu)
    generator = torch.Generator().manual_seed(seed)
    logs = torch.rand(samples, 2, generator=generator, dtype=FLOAT) * n_max * LN2
    intervals = torch.sort(torch.exp(logs), dim=1).values
    r, R = intervals[:, 0], intervals[:, 1]
    gaps = LogProfile(nu).sub(r, R) - LogProfile(mu).sub(r, R)
    bins = torch.clamp(torch.ceil(torch.log2(R)), 1, n_max).to(torch.long)
    sup_by_bin = torch.full((n_max,), -math.inf, dtype=FLOAT).scatter_reduce(
        0, bins - 1, gaps, reduce="amax", include_self=True
    )
    filled = torch.isfinite(sup_by_bin)
    running = running_max(sup_by_bin[filled])
    levels = torch.arange(1, n_max + 1, dtype=FLOAT)[filled]
    slope, verdict = slope_verdict((levels * LN2).tolist(), running.tolist(), slope_tol)
    running_sup = float(running[-1]) if running.numel() else 0.0
    logger.info(f"random intervals: {running_sup=}, {slope=}, {verdict=}")
    return IntervalReport(
        intervals=intervals,
        gaps=gaps,
        bins=bins,
        sup_by_bin=sup_by_bin,
        running_sup=running_sup,
        slope=slope,
        verdict=verdict,
        params={"n_max": n_max, "samples": samples, "seed": seed, "slope_tol": slope_tol},
    )
