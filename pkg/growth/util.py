from typing import Iterable

import torch
from torch import nn

from growth.functions import GrowthFunction
from measures.charge import ChargeDistribution
from utils import COMPLEX, FLOAT


class Scaled(GrowthFunction):
    variant = "scaled"

    def __init__(self, fn: GrowthFunction, factor: float):
        super().__init__()
        self.fn = fn
        self.factor = float(factor)

    def forward(self, z):
        if self.factor == 0.0:
            return torch.zeros(z.shape, dtype=FLOAT)
        return self.factor * self.fn(z)

    def singular_points(self, center, radius):
        if self.factor == 0.0:
            return torch.zeros(0, dtype=COMPLEX)
        return self.fn.singular_points(center, radius)

    def zero_distribution(self, radius):
        return self.fn.zero_distribution(radius).scale(self.factor)


class Sum(GrowthFunction):
    variant = "sum"

    def __init__(self, fns: Iterable[GrowthFunction] = ()):
        super().__init__()
        self.fns = nn.ModuleList(fns)

    def forward(self, z):
        value = torch.zeros(z.shape, dtype=FLOAT)
        for fn in self.fns:
            value = value + fn(z)
        return value

    def singular_points(self, center, radius):
        points = [fn.singular_points(center, radius) for fn in self.fns]
        return torch.cat([torch.zeros(0, dtype=COMPLEX), *points])

    def zero_distribution(self, radius):
        total = ChargeDistribution.empty()
        for fn in self.fns:
            total = total + fn.zero_distribution(radius)
        return total
