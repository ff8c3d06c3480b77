import math

import pytest
import torch

from errors import InvalidParameter, OriginPoint
from growth.canonical import CanonicalProduct, TruncatedValue
from growth.functions import AbsRe, Builtin, HarmonicLinear, LinearAbs, LogAbs, LogAbsSinPi, Zero, build_builtin, evaluate
from growth.means import (
    CircleMeanAtPowerRadius,
    circle_mean,
    disk_mean,
    j_axis,
    j_axis_shells,
    radial_max,
    type_estimate,
)
from growth.profiles import RadiusProfile
from growth.util import Scaled, Sum
from measures.generators import integers


def test_evaluate_builtins():
    sin = LogAbsSinPi()
    assert evaluate(sin, 0.5) == pytest.approx(0.0, abs=1e-15)
    assert evaluate(sin, 0.0) == -math.inf
    assert evaluate(sin, 3.0) == -math.inf
    assert evaluate(sin, 20j) == pytest.approx(math.log(math.sinh(20 * math.pi)))
    assert evaluate(sin, 0.25 + 2j) == pytest.approx(math.log(abs(complex(math.sin(math.pi * 0.25) * math.cosh(2 * math.pi), math.cos(math.pi * 0.25) * math.sinh(2 * math.pi)))))
    assert evaluate(AbsRe(), -3 + 4j) == 3.0
    assert evaluate(LinearAbs(2.0), 3 + 4j) == 10.0
    assert evaluate(HarmonicLinear(2 - 1j, 0.5), 1 + 1j) == pytest.approx(3.5)
    assert evaluate(CanonicalProduct([1.0], genus=0), 0.0) == 0.0
    assert evaluate(Sum(), 1 + 1j) == 0.0
    z = torch.tensor([1 + 1j, 2 - 1j], dtype=torch.complex128)
    assert evaluate(Scaled(AbsRe(), 3.0), z).tolist() == [3.0, 6.0]
    with pytest.raises(InvalidParameter):
        LinearAbs(-1.0)


def test_build_builtin():
    assert isinstance(build_builtin(Builtin.LOG_ABS, 1j), LogAbs)
    assert build_builtin(Builtin.LINEAR_ABS, 0.5).a == 0.5
    assert build_builtin(Builtin.ZERO).variant == "zero"


def test_canonical_product_matches_sine():
    z = 0.5 + 0.5j
    product = CanonicalProduct(integers(1000).positions, genus=1, truncation_radius=100.0)
    assert product.dropped.numel() == 1800
    exact = math.log(abs(math.pi * z)) * -1.0 + evaluate(LogAbsSinPi(), z)
    assert abs(evaluate(product, z) - exact) <= 0.011
    n = torch.arange(101, 1001, dtype=torch.float64)
    assert product.tail_bound(z) == pytest.approx(abs(z) ** 2 * 2.0 * float(n.pow(-2).sum()))


def test_truncated_value_carries_its_tail_bound():
    z = 0.5 + 0.5j
    truncated = CanonicalProduct(integers(1000).positions, genus=1, truncation_radius=100.0).evaluate_truncated(z)
    full = CanonicalProduct(integers(1000).positions, genus=1)
    assert isinstance(truncated, TruncatedValue)
    assert abs(truncated.value - evaluate(full, z)) <= truncated.tail_bound
    exact = evaluate(LogAbsSinPi(), z) - math.log(abs(math.pi * z))
    assert abs(evaluate(full, z) - exact) <= full.tail_bound(z) + 2.0 * abs(z) ** 2 / 1000
    assert full.tail_bound(z) == 0.0


def test_tail_bound_on_tensors():
    product = CanonicalProduct(integers(200).positions, genus=0, truncation_radius=50.0)
    z = torch.tensor([0.0, 3.0 + 4j, 30.0], dtype=torch.complex128)
    bound = product.tail_bound(z)
    n = torch.arange(51, 201, dtype=torch.float64)
    assert bound[0] == 0.0
    assert float(bound[1]) == pytest.approx(2.0 * 5.0 * 2.0 * float(n.pow(-1).sum()))
    assert math.isinf(float(bound[2]))
    assert product.tail_bound(3.0 + 4j) == pytest.approx(float(bound[1]))


def test_canonical_product_rejects_bad_input():
    with pytest.raises(OriginPoint):
        CanonicalProduct([0.0, 1.0])
    with pytest.raises(InvalidParameter):
        CanonicalProduct([1.0], genus=2)


def test_jensen_mean_agrees_with_quadrature():
    product = CanonicalProduct([1.0, -2.0, 3j], genus=1)
    assert circle_mean(product, 0.2, 1.5, tol=1e-11) == pytest.approx(product.jensen_circle_mean(0.2, 1.5), abs=1e-8)
    single = CanonicalProduct([0.5], genus=0)
    assert single.jensen_circle_mean(0.0, 2.0) == pytest.approx(math.log(2.0) - math.log(0.5))


def random_product(seed: int, genus: int) -> CanonicalProduct:
    generator = torch.Generator().manual_seed(seed)
    zeros = torch.complex(
        torch.randn(25, generator=generator, dtype=torch.float64) * 4,
        torch.randn(25, generator=generator, dtype=torch.float64) * 4,
    )
    return CanonicalProduct(zeros, genus=genus)


@pytest.mark.parametrize("genus", [0, 1])
@pytest.mark.parametrize("seed", range(4))
def test_canonical_mean_value_chain(seed, genus):
    product = random_product(seed, genus)
    generator = torch.Generator().manual_seed(1000 + seed)
    centers = torch.complex(
        torch.randn(250, generator=generator, dtype=torch.float64) * 6,
        torch.randn(250, generator=generator, dtype=torch.float64) * 6,
    )
    radii = torch.rand(250, generator=generator, dtype=torch.float64) * 5 + 0.05
    points = evaluate(product, centers)
    for center, r, point in zip(centers.tolist(), radii.tolist(), points.tolist()):
        solid = product.jensen_disk_mean(center, r)
        assert point <= solid + 1e-9
        assert solid <= product.jensen_circle_mean(center, r) + 1e-9


def test_jensen_disk_mean_agrees_with_quadrature():
    product = CanonicalProduct([1.0, -2.0, 3j], genus=1)
    for center, r in [(0.2, 1.5), (2.0 + 1j, 0.5)]:
        assert disk_mean(product, center, r) == pytest.approx(product.jensen_disk_mean(center, r), abs=1e-6)
    single = CanonicalProduct([0.5], genus=0)
    assert single.jensen_disk_mean(0.0, 1.0) == pytest.approx(-0.5 + 0.125 - math.log(0.5))
    assert single.jensen_disk_mean(3.0, 1.0) == pytest.approx(math.log(2.5) - math.log(0.5))


def test_circle_mean_is_below_the_radial_max():
    product = random_product(3, 1)
    for r in [0.5, 2.0, 8.0]:
        assert circle_mean(product, 0.0, r) <= radial_max(product, r).value + 1e-9


def test_circle_mean():
    assert circle_mean(LogAbs(), 0.0, math.e) == pytest.approx(1.0)
    assert circle_mean(HarmonicLinear(2 - 1j, 0.5), 1 + 1j, 2.0) == pytest.approx(3.5)
    assert circle_mean(LogAbs(1.0), 0.0, 0.5) == pytest.approx(0.0, abs=1e-9)
    assert circle_mean(LogAbs(1.0), 0.0, 2.0) == pytest.approx(math.log(2.0), abs=1e-8)
    with pytest.raises(InvalidParameter):
        circle_mean(Zero(), 0.0, 0.0)


def test_disk_mean():
    assert disk_mean(LogAbs(), 0.0, 1.0) == pytest.approx(-0.5, abs=1e-7)
    assert disk_mean(HarmonicLinear(1.0, 0.0), 2 + 1j, 0.5) == pytest.approx(2.0, abs=1e-8)


@pytest.mark.parametrize(
    "u, z, r",
    [(LogAbs(0.3), 1.0, 1.0), (AbsRe(), 0.5 + 1j, 2.0), (LogAbsSinPi(), 0.25 + 0.5j, 1.5), (LinearAbs(1.0), -1j, 3.0)],
)
def test_mean_value_chain(u, z, r):
    point = evaluate(u, z)
    solid = disk_mean(u, z, r)
    circle = circle_mean(u, z, r)
    assert point <= solid + 1e-7
    assert solid <= circle + 1e-7


def test_radial_max():
    assert radial_max(AbsRe(), 5.0).value == pytest.approx(5.0)
    assert radial_max(Zero(), 3.0).value == 0.0
    assert radial_max(LogAbsSinPi(), 10.5).value == pytest.approx(10.5 * math.pi - math.log(2.0), rel=0.01)
    assert radial_max(AbsRe(), 0.0).value == 0.0
    with pytest.raises(InvalidParameter):
        radial_max(AbsRe(), -1.0)


def test_type_estimate():
    assert type_estimate(AbsRe(), 64.0) == pytest.approx(1.0)
    assert type_estimate(LogAbsSinPi(), 64.0) == pytest.approx(math.pi, rel=0.02)
    assert type_estimate(Zero(), 16.0) == 0.0
    with pytest.raises(InvalidParameter):
        type_estimate(AbsRe(), 8.0)


def test_j_axis():
    assert j_axis(LinearAbs(2.0), 1.0, 8.0) == pytest.approx(2.0 / math.pi * math.log(8.0))
    assert j_axis(Zero(), 1.0, 8.0) == 0.0
    assert j_axis(LogAbsSinPi(), 1.0, 2.0**10) == pytest.approx(10 * math.log(2.0), abs=0.25)
    sin = LogAbsSinPi()
    assert j_axis(sin, 1.0, 3.0) + j_axis(sin, 3.0, 8.0) == pytest.approx(j_axis(sin, 1.0, 8.0), abs=1e-9)
    with pytest.raises(InvalidParameter):
        j_axis(sin, 2.0, 1.0)


def test_j_axis_shells():
    shells = j_axis_shells(LinearAbs(1.0), 4)
    assert torch.allclose(shells, torch.full((4,), math.log(2.0) / math.pi, dtype=torch.float64))


def test_zero_distributions():
    assert len(LogAbsSinPi().zero_distribution(3.5)) == 7
    assert AbsRe().zero_distribution(10.0).lines[0].coef == pytest.approx(1.0 / math.pi)
    assert Scaled(LogAbs(1.0), 2.0).zero_distribution(5.0).total_mass() == 2.0
    assert LogAbs(7.0).zero_distribution(5.0).is_empty()
    combined = Sum([LogAbs(1.0), LogAbs(-1.0)]).zero_distribution(5.0)
    assert combined.total_mass() == 2.0
    with pytest.raises(InvalidParameter):
        LinearAbs(1.0).zero_distribution(1.0)


def test_singular_points():
    points = LogAbsSinPi().singular_points(0.2, 2.0)
    assert sorted(points.real.tolist()) == [-1.0, 0.0, 1.0, 2.0]
    assert Sum([LogAbs(1.0), Zero()]).singular_points(0.0, 2.0).tolist() == [1 + 0j]
    assert Scaled(LogAbs(1.0), 0.0).singular_points(0.0, 2.0).numel() == 0


def test_radius_profiles():
    constant = RadiusProfile.constant(0.5)
    assert constant(3 + 4j).tolist() == [0.5]
    power = RadiusProfile.power_floor(1.0, 2.0, 1.0)
    assert power(torch.tensor([1.0, 3.0], dtype=torch.float64)).tolist() == [1.0, 0.25]
    assert power.log_ratio_floor() == -1.0
    assert power.sup_outside(5.0) == pytest.approx(1.0 / 6.0)
    assert power.sup() == 1.0
    assert RadiusProfile.power_floor(0.5, 2.0, 1.0).is_below(RadiusProfile.constant(1.0))
    assert not RadiusProfile.constant(1.0).is_below(power)
    with pytest.raises(InvalidParameter):
        RadiusProfile.constant(0.0)


def test_circle_mean_at_power_radius():
    fn = CircleMeanAtPowerRadius(HarmonicLinear(1.0, 0.0), 0.5)
    z = torch.tensor([1 + 4j, 2 + 0j], dtype=torch.complex128)
    assert torch.allclose(fn(z), torch.tensor([3.0, 2.0], dtype=torch.float64))
    with pytest.raises(InvalidParameter):
        CircleMeanAtPowerRadius(AbsRe(), 1.0)
