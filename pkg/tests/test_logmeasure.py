import math

import pytest
import torch

from errors import InvalidParameter, SignedInput
from logmeasure import (
    LindelofKind,
    LogProfile,
    blaschke_report,
    char_log_right,
    cone_lower_bound,
    ell_left,
    ell_right,
    ell_sub,
    line_ell,
    lindelof_report,
)
from measures.charge import ChargeDistribution, LineMass, mirror_iR
from measures.generators import integers, ray
from utils import Verdict


def atoms(*pairs):
    return ChargeDistribution.from_atoms(pairs)


def harmonic(n: int) -> float:
    return sum(1.0 / k for k in range(1, n + 1))


def test_ell_right():
    assert ell_right(atoms((2, 1)), 1, 3) == pytest.approx(0.5)
    assert ell_right(atoms((1j, 1)), 0.5, 2) == 0.0
    nu = ChargeDistribution(torch.arange(2, 1025, dtype=torch.float64), torch.ones(1023, dtype=torch.float64))
    assert ell_right(nu, 1, 1024) == pytest.approx(harmonic(1024) - 1.0)
    assert ell_right(nu, 1, 1024) == pytest.approx(6.509, abs=1e-3)


def test_ell_left():
    assert ell_left(atoms((-2, 1)), 1, 3) == pytest.approx(0.5)
    assert ell_left(atoms((2, 1)), 1, 3) == 0.0
    nu = atoms((1 + 2j, 1.5), (-3 + 0.5j, 2), (4, 0.5))
    assert ell_left(mirror_iR(nu), 0.5, 10) == pytest.approx(ell_right(nu, 0.5, 10))
    assert ell_right(mirror_iR(nu), 0.5, 10) == pytest.approx(ell_left(nu, 0.5, 10))


def test_ell_sub():
    assert ell_sub(atoms((2, 1), (-4, 1)), 1, 5) == pytest.approx(0.5)
    Z = integers(1024)
    assert ell_sub(Z, 1, 1024) == pytest.approx(ell_right(Z, 1, 1024))
    assert ell_sub(Z, 1, 1024) == pytest.approx(harmonic(1024) - 1.0)
    with pytest.raises(SignedInput):
        ell_sub(atoms((2, -1)), 1, 3)


def test_interval_checks():
    with pytest.raises(InvalidParameter):
        ell_right(atoms((2, 1)), 3, 1)
    with pytest.raises(InvalidParameter):
        ell_right(atoms((2, 1)), 0, 1)


def test_half_open_annulus():
    nu = atoms((2, 1))
    assert ell_right(nu, 1, 2) == pytest.approx(0.5)
    assert ell_right(nu, 2, 3) == 0.0


def random_mass(seed: int, count: int = 30) -> ChargeDistribution:
    generator = torch.Generator().manual_seed(seed)
    positions = torch.complex(
        torch.randn(count, generator=generator, dtype=torch.float64) * 6,
        torch.randn(count, generator=generator, dtype=torch.float64) * 6,
    )
    x = float(torch.randn(1, generator=generator, dtype=torch.float64)) * 3
    masses = torch.rand(count, generator=generator, dtype=torch.float64) + 0.1
    return ChargeDistribution(positions, masses, (LineMass(x, 0.3),))


@pytest.mark.parametrize("seed", range(10))
def test_ell_is_additive_in_the_annulus(seed):
    nu = random_mass(seed)
    for r, rho, R in [(0.5, 2.0, 9.0), (1.0, 1.5, 30.0), (3.0, 4.0, 5.0)]:
        assert ell_right(nu, r, rho) + ell_right(nu, rho, R) == pytest.approx(ell_right(nu, r, R))
        assert ell_left(nu, r, rho) + ell_left(nu, rho, R) == pytest.approx(ell_left(nu, r, R))


@pytest.mark.parametrize("seed", range(10))
def test_ell_is_additive_in_the_distribution(seed):
    a, b = random_mass(seed), random_mass(seed + 100)
    for r, R in [(0.5, 9.0), (2.0, 3.0), (1.0, 40.0)]:
        assert ell_right(a + b, r, R) == pytest.approx(ell_right(a, r, R) + ell_right(b, r, R))
        assert ell_left(a + b, r, R) == pytest.approx(ell_left(a, r, R) + ell_left(b, r, R))
        assert ell_sub(a + b, r, R) <= ell_sub(a, r, R) + ell_sub(b, r, R) + 1e-12


def test_line_ell_closed_form():
    right, left = line_ell(LineMass(1.0, 1.0), torch.tensor(1.0), torch.tensor(2.0))
    assert float(right) == pytest.approx(2.0 * math.pi / 3.0)
    assert float(left) == 0.0
    right, left = line_ell(LineMass(0.0, 1.0), torch.tensor(1.0), torch.tensor(2.0))
    assert float(right) == float(left) == 0.0


def test_profile_matches_pointwise_values():
    generator = torch.Generator().manual_seed(3)
    positions = torch.complex(torch.randn(40, generator=generator, dtype=torch.float64) * 5, torch.randn(40, generator=generator, dtype=torch.float64) * 5)
    nu = ChargeDistribution(positions, torch.rand(40, generator=generator, dtype=torch.float64) + 0.1, (LineMass(2.0, 0.25),))
    profile = LogProfile(nu)
    r = torch.tensor([0.5, 1.0, 3.0], dtype=torch.float64)
    R = torch.tensor([2.0, 8.0, 20.0], dtype=torch.float64)
    for k in range(3):
        assert float(profile.right(r, R)[k]) == pytest.approx(ell_right(nu, float(r[k]), float(R[k])))
        assert float(profile.left(r, R)[k]) == pytest.approx(ell_left(nu, float(r[k]), float(R[k])))


def test_char_log_right():
    assert char_log_right(atoms((1, 1)), 2.0) == (pytest.approx(1.0), True)
    assert char_log_right(ChargeDistribution.empty(), 5.0) == (0.0, True)
    k = torch.arange(1, 21, dtype=torch.float64)
    divergent = ChargeDistribution(2.0**-k, 2.0**-k)
    _, convergent = char_log_right(divergent, 1.0, r_floor=1.0, steps=20)
    assert not convergent


def test_lindelof_symmetric_real_atoms():
    report = lindelof_report(integers(1024), LindelofKind.R, 2.0**10)
    assert report.sup_abs == pytest.approx(0.0, abs=1e-12)
    assert report.verdict is Verdict.BOUNDED


def test_lindelof_one_sided_growth():
    report = lindelof_report(ray(1.0, 1024), LindelofKind.R, 2.0**10)
    assert report.verdict is Verdict.UNBOUNDED
    r, value = report.samples[-1]
    assert value == pytest.approx(harmonic(1024) - 1.0)

    n = torch.arange(1, 1025, dtype=torch.float64)
    upper = ChargeDistribution(torch.complex(torch.zeros_like(n), n), torch.ones_like(n))
    report = lindelof_report(upper, LindelofKind.IR, 2.0**10)
    assert report.verdict is Verdict.UNBOUNDED
    assert report.samples[-1][1] == pytest.approx(-(harmonic(1024) - 1.0))


def test_lindelof_samples_end_at_r_max():
    report = lindelof_report(integers(10), LindelofKind.FULL, 100.0)
    assert report.samples[-1][0] == 100.0
    with pytest.raises(InvalidParameter):
        lindelof_report(integers(10), LindelofKind.FULL, 1.0)


def test_blaschke_report():
    assert blaschke_report(integers(2**12), 2.0**12).verdict is Verdict.UNBOUNDED
    squares = ChargeDistribution(torch.arange(1, 65, dtype=torch.float64) ** 2, torch.ones(64, dtype=torch.float64))
    assert blaschke_report(squares, 2.0**12).verdict is Verdict.BOUNDED


def test_cone_lower_bound():
    nu = atoms((2, 1), (2.5 + 0.5j, 1))
    value, bound = cone_lower_bound(nu, 0.5, 1.5)
    assert value >= bound
    assert bound == pytest.approx(0.5 / 3.0 * 2.0)
