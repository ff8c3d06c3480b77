from dataclasses import dataclass
import logging
import math
from typing import Optional

import torch
from tqdm.auto import tqdm

from balayage.sweep import BoundaryCharge, Genus, sweep1, sweep_strip
from criteria import mu_rh_check, pair_gap_report
from errors import (
    ConditionMuRhFailed,
    InvalidParameter,
    LindelofFailed,
    LinePresent,
    OriginInSupport,
    SupportViolation,
    UnboundedSup,
)
from logmeasure import LindelofKind, ell_left, lindelof_report, require_mass, side_weights
from measures.charge import (
    ChargeDistribution,
    LineMass,
    mirror_iR,
    restrict,
    rotate_ccw,
    rotate_cw,
    shift,
)
from measures.region import Region
from utils import FLOAT, LN2, Verdict, as_float, dyadic_radii, running_max, slope_verdict

logger = logging.getLogger(__name__)

RESIDUAL_Y_MAX = 1e4
DENSITY_SAMPLES = 20001


def _radius_prefix(nu: ChargeDistribution) -> tuple[torch.Tensor, torch.Tensor]:
    """Distinct radii and the right logarithmic function from 0 up to each, with 0 prepended."""
    weights, _ = side_weights(nu)
    radii, inverse = torch.unique(nu.radii, sorted=True, return_inverse=True)
    grouped = torch.zeros(radii.numel(), dtype=FLOAT).index_add_(0, inverse, weights)
    return radii, torch.cat([torch.zeros(1, dtype=FLOAT), torch.cumsum(grouped, 0)])


def _largest_rise(prefix: torch.Tensor) -> torch.Tensor:
    """max over j <= k of prefix[k] - prefix[j], for every k."""
    return prefix - torch.cummin(prefix, dim=0).values


def alpha_balance(
    eta: ChargeDistribution, n_max: Optional[int] = None, slope_tol: float = 0.05
) -> ChargeDistribution:
    """Mass on the positive ray that keeps every right logarithmic interval value of eta + alpha bounded.

    With L(t) the right logarithmic function of eta from 0 to t, a(t) = -sup over s >= t of L(s)
    is a step function; each upward jump at radius t contributes an atom at t of mass t times the jump.
    """
    if eta.lines:
        raise LinePresent("balancing needs an atomic charge")
    if eta.has_origin_atom():
        raise OriginInSupport("balancing needs the origin outside the support")
    if len(eta) == 0:
        return ChargeDistribution.empty()
    radii, prefix = _radius_prefix(eta)
    rise = _largest_rise(prefix)
    S = max(0.0, float(rise.max()))
    if not math.isfinite(S):
        raise UnboundedSup("right logarithmic interval values are unbounded above")
    if n_max is not None:
        levels = dyadic_radii(n_max)
        at_level = torch.searchsorted(radii, levels, right=True)
        _, verdict = slope_verdict((torch.arange(n_max + 1) * LN2).tolist(), running_max(rise[at_level]).tolist(), slope_tol)
        if verdict is Verdict.UNBOUNDED:
            raise UnboundedSup(f"sup of right logarithmic interval values grows on the dyadic grid up to 2^{n_max}")
    suffix_max = torch.flip(torch.cummax(torch.flip(prefix, [0]), dim=0).values, [0])
    jumps = suffix_max[:-1] - suffix_max[1:]
    jumps = torch.where(jumps > 1e-13 * max(1.0, float(prefix.abs().max())), jumps, torch.zeros_like(jumps))
    alpha = ChargeDistribution.from_tensors(torch.complex(radii, torch.zeros_like(radii)), radii * jumps)
    logger.debug(f"alpha_balance: {S=}, {len(alpha)} atoms")
    return alpha


def balance_bound(eta: ChargeDistribution, alpha: ChargeDistribution) -> tuple[float, float]:
    """(sup |ell_rh of eta + alpha| over all radius pairs, 2 sup ell_rh of eta)."""
    _, prefix = _radius_prefix(eta)
    _, balanced = _radius_prefix((eta + alpha).simplify())
    S = max(0.0, float(_largest_rise(prefix).max()))
    return float(balanced.max() - balanced.min()), 2.0 * S


@dataclass
class HalfPlaneStep:
    eta: ChargeDistribution
    alpha: ChargeDistribution
    theta: BoundaryCharge
    density_sup: float


@dataclass
class UniformizationResult:
    alpha: ChargeDistribution
    beta_plus: BoundaryCharge
    beta_minus: Optional[BoundaryCharge]
    c: float
    residual_sup: float
    beta_min_density: float
    tail_certified: bool
    theta: BoundaryCharge


def _grid(theta: BoundaryCharge) -> torch.Tensor:
    ys = torch.linspace(-RESIDUAL_Y_MAX, RESIDUAL_Y_MAX, DENSITY_SAMPLES, dtype=FLOAT)
    heights = theta.sources.imag
    return torch.sort(torch.cat([ys, heights[heights.abs() <= RESIDUAL_Y_MAX]])).values


def _half_plane_step(eta: ChargeDistribution, n_max: Optional[int]) -> HalfPlaneStep:
    eta = eta.simplify()
    alpha = alpha_balance(eta, n_max)
    theta = sweep1(eta + alpha)
    grid = _grid(theta)
    density = theta.density(0.0, grid)
    density_sup = max(float(density.max()), theta.uniform_coef(0.0))
    return HalfPlaneStep(eta, alpha, theta, density_sup)


def _complement(theta: BoundaryCharge, c: float) -> BoundaryCharge:
    """c times arc length on the imaginary axis minus theta."""
    return BoundaryCharge(
        sources=theta.sources,
        masses=-theta.masses,
        term_lines=theta.term_lines,
        uniform_terms=(LineMass(0.0, c - theta.uniform_coef(0.0)),),
        target_lines=(0.0,),
    )


def _tail_certificate(theta: BoundaryCharge, c: float) -> bool:
    """Poisson tail beyond the grid stays below c - u0, so beta stays nonnegative there."""
    heights = theta.sources.imag.abs()
    if heights.numel() == 0:
        return c - theta.uniform_coef(0.0) >= 0
    if float(heights.max()) >= RESIDUAL_Y_MAX:
        return False
    distance = theta.sources.real.abs()
    tail = (theta.masses.abs() * distance / (math.pi * (RESIDUAL_Y_MAX - heights).square())).sum()
    return float(tail) <= c - theta.uniform_coef(0.0)


def _residual(total: BoundaryCharge, line: float, c: float, grid: torch.Tensor) -> float:
    return float((total.cdf(line, grid) - c * grid).abs().max())


def _check_cone(nu: ChargeDistribution, a: float, b: float = 0.0):
    if nu.lines:
        raise SupportViolation("line masses are not allowed here")
    x = nu.positions.real.abs()
    if not bool(((x > a * nu.radii) & (x > b)).all()):
        raise SupportViolation(f"support must avoid the closed cone with a={a} and the closed strip with b={b}")


def uniformize_rh(
    nu: ChargeDistribution, mu: ChargeDistribution, a: float, factor: float = 2.0, n_max: Optional[int] = 14
) -> UniformizationResult:
    """Balancing mass alpha and boundary density beta with sweep1(nu + alpha - mu) + beta = c dy on the imaginary axis."""
    if not 0 < a < 1:
        raise InvalidParameter(f"a must lie in (0, 1), got {a}")
    for charge in (nu, mu):
        require_mass(charge)
        _check_cone(charge, a)
        if bool((charge.positions.real <= 0).any()):
            raise SupportViolation("support must lie in the right half-plane cone Re z > a|z|")
    step = _half_plane_step(nu - mu, n_max)
    c = factor * max(step.density_sup, 0.0)
    beta = _complement(step.theta, c)
    grid = _grid(step.theta)
    residual = _residual(step.theta + beta, 0.0, c, grid)
    beta_min = float(beta.density(0.0, grid).min())
    tail_ok = _tail_certificate(step.theta, c)
    logger.info(f"uniformize_rh: {c=}, {residual=}, {beta_min=}, {tail_ok=}")
    return UniformizationResult(step.alpha, beta, None, c, residual, beta_min, tail_ok, step.theta)


def uniformize_strip(
    nu: ChargeDistribution,
    mu: ChargeDistribution,
    a: float,
    b: float,
    factor: float = 2.0,
    n_max: int = 14,
    slope_tol: float = 0.05,
) -> UniformizationResult:
    """Uniformization onto the pair of lines Re z = b and Re z = -b with one common c."""
    if not 0 < a < 1:
        raise InvalidParameter(f"a must lie in (0, 1), got {a}")
    if b <= 0:
        raise InvalidParameter(f"b must be positive, got {b}")
    for charge in (nu, mu):
        require_mass(charge)
        _check_cone(charge, a, b)
    if pair_gap_report(nu, mu, n_max, slope_tol).verdict is not Verdict.BOUNDED:
        raise UnboundedSup("pair gaps of nu against mu are not bounded on the dyadic grid")
    if lindelof_report(mu, LindelofKind.FULL, 2.0**n_max, slope_tol).verdict is not Verdict.BOUNDED:
        raise LindelofFailed("mu fails the Lindelof condition")

    eta = nu - mu
    right = _half_plane_step(restrict(shift(eta, -b), Region.right_half()), n_max)
    left = _half_plane_step(mirror_iR(restrict(shift(eta, b), Region.left_half())), n_max)
    c = factor * max(right.density_sup, left.density_sup, 0.0)
    beta_right, beta_left = _complement(right.theta, c), _complement(left.theta, c)

    alpha = shift(right.alpha, b) + shift(mirror_iR(left.alpha), -b)
    beta_plus = beta_right.shift(b)
    beta_minus = beta_left.mirror().shift(-b)
    total = sweep_strip(nu + alpha - mu, b, genus=Genus.ONE) + beta_plus + beta_minus
    residual = max(
        _residual(total, b, c, _grid(right.theta)),
        _residual(total, -b, c, _grid(left.theta)),
    )
    beta_min = min(
        float(beta_right.density(0.0, _grid(right.theta)).min()),
        float(beta_left.density(0.0, _grid(left.theta)).min()),
    )
    tail_ok = _tail_certificate(right.theta, c) and _tail_certificate(left.theta, c)
    theta = right.theta.shift(b) + left.theta.mirror().shift(-b)
    logger.info(f"uniformize_strip: {c=}, {residual=}, {beta_min=}, {tail_ok=}")
    return UniformizationResult(alpha, beta_plus, beta_minus, c, residual, beta_min, tail_ok, theta)


def _without_origin(nu: ChargeDistribution) -> ChargeDistribution:
    keep = nu.positions != 0
    return ChargeDistribution(nu.positions[keep], nu.masses[keep], nu.lines)


def complete_R(mu: ChargeDistribution, n_max: int = 14, slope_tol: float = 0.05) -> ChargeDistribution:
    """Mass gamma on the negative ray making the real-axis Lindelof sums of mu + gamma bounded."""
    require_mass(mu)
    if mu.lines:
        raise LinePresent("completion needs an atomic mass distribution")
    if mu_rh_check(mu, n_max, slope_tol=slope_tol).verdict is not Verdict.BOUNDED:
        raise ConditionMuRhFailed("left logarithmic values of mu are not dominated by the right ones")
    mu = _without_origin(mu)
    eta = mirror_iR(restrict(mu, Region.left_half())) - restrict(mu, Region.right_half(closed=True))
    gamma = mirror_iR(alpha_balance(eta.simplify()))

    completed = mu + gamma
    r_report = lindelof_report(completed, LindelofKind.R, 2.0**n_max, slope_tol)
    if r_report.verdict is not Verdict.BOUNDED:
        logger.warning(f"completion on the real axis: Lindelof verdict {r_report.verdict}")
    pair = pair_gap_report(completed, mu, n_max, slope_tol)
    if pair.verdict is not Verdict.BOUNDED or float(pair.gaps.nan_to_num(0.0).min()) < -1e-12:
        logger.warning(f"completion on the real axis: pair gaps {pair.verdict}")
    return gamma


def complete_iR(nu: ChargeDistribution, n_max: int = 14, slope_tol: float = 0.05) -> ChargeDistribution:
    """Mass beta on the imaginary axis making the imaginary-axis Lindelof sums of nu + beta bounded."""
    require_mass(nu)
    if nu.has_origin_atom():
        raise OriginInSupport("imaginary-axis completion needs the origin outside the support")
    if len(nu) == 0:
        return ChargeDistribution.empty()
    rotated = rotate_cw(nu)
    left = restrict(rotated, Region.left_half())
    low = math.floor(math.log2(float(nu.radii.min()))) - 1
    high = math.ceil(math.log2(float(nu.radii.max())))
    points, masses = [], []
    for n in tqdm(range(low, high + 1), desc="shells", disable=not logger.isEnabledFor(logging.INFO)):
        g = 2.0 ** (n + 1) * ell_left(left, 2.0**n, 2.0 ** (n + 1))
        if g > 0:
            points.append(2.0 ** (n + 1))
            masses.append(g)
    gamma_rh = ChargeDistribution.from_tensors(
        torch.complex(as_float(points), torch.zeros(len(points), dtype=FLOAT)), as_float(masses)
    )
    gamma_lh = complete_R(rotated + gamma_rh, n_max, slope_tol)
    beta = rotate_ccw(gamma_lh + gamma_rh)

    report = lindelof_report(nu + beta, LindelofKind.IR, 2.0**n_max, slope_tol)
    if report.verdict is not Verdict.BOUNDED:
        logger.warning(f"completion on the imaginary axis: Lindelof verdict {report.verdict}")
    return beta


def complete_full(mu: ChargeDistribution, n_max: int = 14, slope_tol: float = 0.05) -> ChargeDistribution:
    """Delta >= mu agreeing with mu on the open right half-plane and satisfying the full Lindelof condition."""
    gamma = complete_R(mu, n_max, slope_tol)
    logger.info(f"complete_full: {len(gamma)} atoms on the negative ray")
    beta = complete_iR(_without_origin(mu + gamma), n_max, slope_tol)
    logger.info(f"complete_full: {len(beta)} atoms on the imaginary axis")
    delta = mu + gamma + beta

    full = lindelof_report(delta, LindelofKind.FULL, 2.0**n_max, slope_tol)
    if full.verdict is not Verdict.BOUNDED:
        logger.warning(f"complete_full: Lindelof verdict {full.verdict}")
    pair = pair_gap_report(delta, mu, n_max, slope_tol)
    if pair.verdict is not Verdict.BOUNDED or float(pair.gaps.nan_to_num(0.0).min()) < -1e-12:
        logger.warning(f"complete_full: pair gaps {pair.verdict}")
    return delta
