import math

import pytest
import torch

from criteria import (
    GrowthGauge,
    ScanDomain,
    Side,
    axis_gap,
    dyadic_gap_report,
    eps_condition,
    eps_pair_condition,
    gauge_budget,
    inequality_scan,
    interval_gap_report,
    mr_positive,
    mu_rh_check,
    pair_gap_report,
    redheffer_bound,
    shift_gap_report,
)
from errors import InvalidParameter, OriginPoint, SignedInput, SupportViolation
from growth.functions import AbsRe, HarmonicLinear, LogAbsSinPi, Zero
from growth.util import Scaled, Sum
from measures.charge import ChargeDistribution
from measures.generators import integers, lattice_i, ray
from smallsets import IntervalSet
from utils import Verdict


@pytest.fixture(scope="module")
def sine_report():
    return dyadic_gap_report(integers(2**14), LogAbsSinPi(), n_max=14)


def test_dyadic_integers_against_sine(sine_report):
    assert sine_report.verdict is Verdict.BOUNDED
    assert sine_report.running_sup <= 1.5
    assert sine_report.provenance["axis_integrand"] == "M(iy)+M(-iy)"


def test_dyadic_rows(sine_report):
    rows = sine_report.rows()
    assert len(rows) == 14 * 15 // 2
    assert list(rows[0]) == ["n", "N", "ell_nu", "comparison", "gap"]
    assert rows[0]["n"] == 0 and rows[0]["N"] == 1
    assert rows[0]["ell_nu"] == pytest.approx(0.5)
    assert all(row["gap"] == pytest.approx(row["ell_nu"] - row["comparison"]) for row in rows)


def test_dyadic_half_density_and_double_density():
    half = ChargeDistribution(
        torch.cat([ray(2.0, 2**13).positions, ray(-2.0, 2**13).positions]),
        torch.ones(2**14, dtype=torch.float64),
    )
    report = dyadic_gap_report(half, LogAbsSinPi(), n_max=14)
    assert report.verdict is Verdict.BOUNDED
    assert report.running_sup < 0.5
    double = dyadic_gap_report(integers(2**14, mass=2.0), LogAbsSinPi(), n_max=14)
    assert double.verdict is Verdict.UNBOUNDED
    assert float(double.gaps[0, 14]) == pytest.approx(14 * math.log(2.0), abs=1.0)


def test_pair_gaps():
    n, evens = ray(1.0, 2**12), ray(2.0, 2**11)
    same = pair_gap_report(n, n, n_max=12)
    assert same.running_sup == 0.0
    assert same.verdict is Verdict.BOUNDED
    assert pair_gap_report(evens, n, n_max=12).verdict is Verdict.BOUNDED
    assert pair_gap_report(n, evens, n_max=12).verdict is Verdict.UNBOUNDED
    with pytest.raises(InvalidParameter):
        pair_gap_report(n, n, n_max=0)


def test_shift_gaps():
    n = ray(1.0, 2**12)
    assert shift_gap_report(n, n, 0j, n_max=12).running_sup == 0.0
    report = shift_gap_report(n, n, 1.0, n_max=12)
    assert report.verdict is Verdict.BOUNDED
    assert report.provenance == {"criterion": "shift", "shift": [1.0, 0.0]}


def test_mr_positive():
    n, evens = ray(1.0, 2**12), ray(2.0, 2**11)
    assert mr_positive(n, n, n_max=12).running_sup == 0.0
    assert mr_positive(evens, n, n_max=12).verdict is Verdict.BOUNDED
    report = mr_positive(n, evens, n_max=12)
    assert report.verdict is Verdict.UNBOUNDED
    assert report.slope == pytest.approx(0.5, abs=0.1)
    with pytest.raises(SupportViolation):
        mr_positive(integers(4), n, n_max=4)


def test_eps_condition():
    C, report = eps_condition(lattice_i(2**10), 0.3, n_max=10)
    assert C == 0.0
    assert report.verdict is Verdict.BOUNDED
    _, report = eps_condition(ray(1.0, 2**12), 0.5, n_max=12)
    assert report.verdict is Verdict.UNBOUNDED
    squares = ChargeDistribution(torch.arange(1, 65, dtype=torch.float64) ** 2, torch.ones(64, dtype=torch.float64))
    C, report = eps_condition(squares, 0.1, n_max=12)
    assert report.verdict is Verdict.BOUNDED
    assert 0.0 < C < 0.7
    with pytest.raises(InvalidParameter):
        eps_condition(squares, 0.0)


def test_eps_pair_condition():
    n = ray(1.0, 2**12)
    C, report = eps_pair_condition(n, n, 0.1, n_max=12)
    assert C == 0.0
    assert report.verdict is Verdict.BOUNDED


def test_axis_gap():
    assert axis_gap(LogAbsSinPi(), integers(2**14), n_max=14) <= 1.0
    assert axis_gap(Zero(), ChargeDistribution.empty(), n_max=6) == 0.0
    assert axis_gap(Zero(), ray(1.0, 64), n_max=6, side=Side.LH) == 0.0


def test_mu_rh_check():
    right = mu_rh_check(ray(1.0, 2**12), n_max=12)
    assert right.running_sup <= 0.0
    assert right.verdict is Verdict.BOUNDED
    assert mu_rh_check(ray(-1.0, 2**12), n_max=12).verdict is Verdict.UNBOUNDED
    assert mu_rh_check(ray(1.0, 2**12), n_max=12, mirrored=True).verdict is Verdict.UNBOUNDED
    symmetric = mu_rh_check(integers(2**12), n_max=12)
    assert symmetric.running_sup == pytest.approx(0.0, abs=1e-12)


def test_redheffer_bound():
    certificate = redheffer_bound(lattice_i(2**10), 1.0, n_max=10)
    assert certificate.total == 0.0
    assert certificate.verdict is Verdict.BOUNDED
    assert sorted(m for _, m in certificate.pairs) == sorted(list(range(-1024, 0)) + list(range(1, 1025)))
    assert redheffer_bound(ChargeDistribution.empty(), 1.0).total == 0.0
    spaced = lattice_i(2**9)
    doubled = ChargeDistribution(spaced.positions * 2, spaced.masses)
    assert redheffer_bound(doubled, 0.5, n_max=10).total == pytest.approx(0.0, abs=1e-15)


def test_redheffer_pairs_off_axis_points_with_their_minimizer():
    certificate = redheffer_bound(ChargeDistribution.from_atoms([(10 + 10j, 1.0)]), 1.0, n_max=6)
    assert certificate.pairs == [(10 + 10j, 20)]
    assert certificate.total == pytest.approx(0.05)
    below = redheffer_bound(ChargeDistribution.from_atoms([(10 - 10j, 1.0)]), 1.0, n_max=6)
    assert below.pairs == [(10 - 10j, -20)]
    assert below.total == pytest.approx(0.05)


def test_redheffer_takes_the_nearer_free_neighbour():
    certificate = redheffer_bound(ChargeDistribution.from_atoms([(10 + 10j, 1.0), (20j, 1.0)]), 1.0, n_max=6)
    assert [m for _, m in certificate.pairs] == [20, 21]
    assert certificate.total == pytest.approx(0.05 + 1.0 / 20 - 1.0 / 21)


def test_redheffer_real_points_take_the_smallest_free_integers():
    certificate = redheffer_bound(ChargeDistribution.from_atoms([(3.0, 2.0)]), 1.0, n_max=4)
    assert sorted(m for _, m in certificate.pairs) == [-1, 1]
    assert certificate.total == pytest.approx(2.0 * math.sqrt(1.0 + 1.0 / 9.0))


def test_redheffer_rejects_bad_input():
    with pytest.raises(InvalidParameter):
        redheffer_bound(lattice_i(4), 0.0)
    with pytest.raises(OriginPoint):
        redheffer_bound(ChargeDistribution.from_atoms([(0j, 1.0)]), 1.0)
    with pytest.raises(SignedInput):
        redheffer_bound(ChargeDistribution.from_atoms([(1j, 0.5)]), 1.0)


def test_gauge_budget():
    empty = IntervalSet()
    zero = GrowthGauge.zero()
    assert gauge_budget(zero, zero, empty, 100.0).total == 0.0
    budget = gauge_budget(zero, GrowthGauge.power(0.5), empty, 100.0)
    assert budget.truncated == pytest.approx(4.0 * (1.0 - 0.1), rel=1e-7)
    assert budget.tail == pytest.approx(0.4)
    assert budget.total == pytest.approx(4.0, rel=1e-7)
    assert budget.verdict is Verdict.BOUNDED
    unit = gauge_budget(zero, zero, IntervalSet.from_pairs([(0.0, 1.0)]), 50.0)
    assert unit.total == pytest.approx(2.0, rel=1e-7)


def test_gauge_budget_with_callable_gauge():
    budget = gauge_budget(GrowthGauge.from_callable(lambda t: math.log1p(t)), GrowthGauge.zero(), IntervalSet(), 10.0)
    assert budget.verdict is Verdict.INCONCLUSIVE
    assert math.isnan(budget.tail)
    with pytest.raises(InvalidParameter):
        GrowthGauge.power(1.0)
    with pytest.raises(InvalidParameter):
        gauge_budget(GrowthGauge.zero(), GrowthGauge.zero(), IntervalSet(), 1.0)


def test_scan_without_violations():
    report = inequality_scan(AbsRe(), AbsRe(), ScanDomain.strip_grid(1.0, 10.0, samples=21))
    assert report.violations == []
    assert report.sampled == 21 * 9
    sine = LogAbsSinPi()
    slack = Sum([sine, HarmonicLinear(0.0, 0.1)])
    assert inequality_scan(sine, slack, ScanDomain.axis(10.0, samples=41)).violations == []


def test_scan_reports_violations():
    report = inequality_scan(Scaled(AbsRe(), 2.0), AbsRe(), ScanDomain.strip_lines(1.0, 5.0, samples=11))
    assert len(report.violations) == 22
    assert report.max_violation == pytest.approx(1.0)


def test_scan_exceptional_set():
    report = inequality_scan(Zero(), Zero(), ScanDomain.axis(2.0, samples=5), IntervalSet.from_pairs([(0.0, 1.0)]))
    assert report.excluded == 3
    assert report.exceptional_measure == 1.0
    with pytest.raises(InvalidParameter):
        inequality_scan(Zero(), Zero(), ScanDomain.axis(-1.0))


def test_interval_report_agrees_with_grid():
    n, evens = ray(1.0, 2**12), ray(2.0, 2**11)
    assert interval_gap_report(evens, n, n_max=12, samples=2000).verdict is Verdict.BOUNDED
    report = interval_gap_report(n, evens, n_max=12, samples=2000)
    assert report.verdict is Verdict.UNBOUNDED
    again = interval_gap_report(n, evens, n_max=12, samples=2000)
    assert torch.equal(report.gaps, again.gaps)


STEPS = [0.5, 1.0, 2.0, 4.0]
COMPARISONS = [
    *((ray(s, int(2**10 / s)), ray(t, int(2**10 / t))) for s in STEPS for t in STEPS),
    (ray(1.0, 2**10, mass=2.0), ray(1.0, 2**10)),
    (ray(1.0, 2**10), ray(1.0, 2**10, mass=2.0)),
    (ray(1.0, 2**10, mass=2.0), ray(0.5, 2**11)),
    (integers(2**10), ray(1.0, 2**10)),
]


@pytest.mark.parametrize("nu,mu", COMPARISONS)
def test_interval_and_dyadic_verdicts_agree(nu, mu):
    dyadic = pair_gap_report(nu, mu, n_max=10)
    sampled = interval_gap_report(nu, mu, n_max=10, samples=2000)
    assert dyadic.verdict is not Verdict.INCONCLUSIVE
    assert sampled.verdict is dyadic.verdict


def test_step_ordering_decides_pair_verdicts():
    for s in STEPS:
        for t in STEPS:
            report = pair_gap_report(ray(s, int(2**10 / s)), ray(t, int(2**10 / t)), n_max=10)
            assert report.verdict is (Verdict.UNBOUNDED if s < t else Verdict.BOUNDED)


def test_axis_gap_is_stable_under_a_longer_grid():
    nu, sine = integers(2**14), LogAbsSinPi()
    assert axis_gap(sine, nu, n_max=12) == pytest.approx(axis_gap(sine, nu, n_max=14), rel=0.05)


def test_adding_positive_atoms_never_lowers_pair_gaps():
    mu = ray(1.0, 2**8)
    for seed in range(10):
        generator = torch.Generator().manual_seed(seed)
        points = torch.complex(
            (torch.rand(64, generator=generator, dtype=torch.float64) - 0.5) * 400,
            (torch.rand(64, generator=generator, dtype=torch.float64) - 0.5) * 400,
        )
        extra = ChargeDistribution(points, torch.rand(64, generator=generator, dtype=torch.float64))
        base = pair_gap_report(integers(2**7), mu, n_max=8)
        grown = pair_gap_report(integers(2**7) + extra, mu, n_max=8)
        on_grid = ~torch.isnan(base.gaps)
        assert bool((grown.gaps[on_grid] >= base.gaps[on_grid] - 1e-12).all())
