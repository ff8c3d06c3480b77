"""JSON shapes of distributions, boundary charges and growth functions.

Floats are written with Python's shortest round-trip repr, so every emitted
distribution parses back to an equal value.
"""

import math
from enum import Enum
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter
import torch

from balayage.sweep import BoundaryCharge
from growth.canonical import CanonicalProduct
from growth.functions import Builtin, GrowthFunction, build_builtin
from growth.util import Scaled, Sum
from measures.charge import ChargeDistribution, LineMass
from utils import as_complex, as_float


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PointModel(Strict):
    re: float
    im: float = 0.0

    @classmethod
    def of(cls, z: complex):
        return cls(re=z.real, im=z.imag)

    def to_complex(self) -> complex:
        return complex(self.re, self.im)


class AtomModel(Strict):
    re: float
    im: float = 0.0
    mass: float


class LineModel(Strict):
    x: float
    coef: float


class DistributionModel(Strict):
    atoms: list[AtomModel] = []
    lines: list[LineModel] = []

    @classmethod
    def from_distribution(cls, nu: ChargeDistribution):
        return cls(
            atoms=[AtomModel(re=a.position.real, im=a.position.imag, mass=a.mass) for a in nu.atoms],
            lines=[LineModel(x=l.x, coef=l.coef) for l in nu.lines],
        )

    def to_distribution(self) -> ChargeDistribution:
        return ChargeDistribution(
            as_complex([complex(a.re, a.im) for a in self.atoms]),
            as_float([a.mass for a in self.atoms]),
            tuple(LineMass(l.x, l.coef) for l in self.lines),
        )


class PoissonTermModel(Strict):
    re: float
    im: float
    mass: float
    line: float


class BoundaryChargeModel(Strict):
    retained: DistributionModel = DistributionModel()
    poisson: list[PoissonTermModel] = []
    uniform: list[LineModel] = []
    axis: DistributionModel = DistributionModel()
    target_lines: list[float] = []
    genus1_only: bool = False

    @classmethod
    def from_boundary(cls, bc: BoundaryCharge):
        return cls(
            retained=DistributionModel.from_distribution(bc.retained),
            poisson=[
                PoissonTermModel(re=t.source.real, im=t.source.imag, mass=t.mass, line=t.line)
                for t in bc.poisson_terms
            ],
            uniform=[LineModel(x=l.x, coef=l.coef) for l in bc.uniform_terms],
            axis=DistributionModel.from_distribution(bc.axis),
            target_lines=list(bc.target_lines),
            genus1_only=bc.genus1_only,
        )

    def to_boundary(self) -> BoundaryCharge:
        return BoundaryCharge(
            retained=self.retained.to_distribution(),
            sources=as_complex([complex(t.re, t.im) for t in self.poisson]),
            masses=as_float([t.mass for t in self.poisson]),
            term_lines=as_float([t.line for t in self.poisson]),
            uniform_terms=tuple(LineMass(l.x, l.coef) for l in self.uniform),
            axis=self.axis.to_distribution(),
            target_lines=tuple(self.target_lines),
            genus1_only=self.genus1_only,
        )


class SimpleFunctionModel(Strict):
    variant: Literal["log_abs_sin_pi", "abs_re", "zero"]


class LinearAbsModel(Strict):
    variant: Literal["linear_abs"]
    a: float = 1.0


class LogAbsModel(Strict):
    variant: Literal["log_abs"]
    center: PointModel = PointModel(re=0.0)


class HarmonicLinearModel(Strict):
    variant: Literal["harmonic_linear"]
    a: PointModel = PointModel(re=1.0)
    c: float = 0.0


class CanonicalProductModel(Strict):
    variant: Literal["canprod"]
    zeros: list[PointModel]
    genus: int = 1
    trunc: float = 1e4


class ScaledModel(Strict):
    variant: Literal["scaled"]
    factor: float
    fn: "GrowthFunctionModel"


class SumModel(Strict):
    variant: Literal["sum"]
    fns: list["GrowthFunctionModel"]


GrowthFunctionModel = Annotated[
    Union[
        SimpleFunctionModel,
        LinearAbsModel,
        LogAbsModel,
        HarmonicLinearModel,
        CanonicalProductModel,
        ScaledModel,
        SumModel,
    ],
    Field(discriminator="variant"),
]

ScaledModel.model_rebuild()
SumModel.model_rebuild()


FunctionAdapter = TypeAdapter(GrowthFunctionModel)


def function_model(fn: GrowthFunction):
    """Inverse of build_function for the serializable function types."""
    match fn:
        case CanonicalProduct():
            zeros = [PointModel.of(z) for z in torch.cat([fn.zeros, fn.dropped]).tolist()]
            return CanonicalProductModel(variant="canprod", zeros=zeros, genus=fn.genus, trunc=fn.truncation_radius)
        case Scaled():
            return ScaledModel(variant="scaled", factor=fn.factor, fn=function_model(fn.fn))
        case Sum():
            return SumModel(variant="sum", fns=[function_model(f) for f in fn.fns])
    match Builtin(fn.variant):
        case Builtin.LOG_ABS_SIN_PI | Builtin.ABS_RE | Builtin.ZERO:
            return SimpleFunctionModel(variant=fn.variant)
        case Builtin.LINEAR_ABS:
            return LinearAbsModel(variant=fn.variant, a=fn.a)
        case Builtin.LOG_ABS:
            return LogAbsModel(variant=fn.variant, center=PointModel.of(fn.center))
        case Builtin.HARMONIC_LINEAR:
            return HarmonicLinearModel(variant=fn.variant, a=PointModel.of(fn.a), c=fn.c)
        case _:
            raise NotImplementedError()


def build_function(model) -> GrowthFunction:
    match model:
        case SimpleFunctionModel(variant=variant):
            return build_builtin(Builtin(variant))
        case LinearAbsModel(a=a):
            return build_builtin(Builtin.LINEAR_ABS, a)
        case LogAbsModel(center=center):
            return build_builtin(Builtin.LOG_ABS, center.to_complex())
        case HarmonicLinearModel(a=a, c=c):
            return build_builtin(Builtin.HARMONIC_LINEAR, a.to_complex(), c)
        case CanonicalProductModel(zeros=zeros, genus=genus, trunc=trunc):
            return CanonicalProduct([z.to_complex() for z in zeros], genus, trunc)
        case ScaledModel(factor=factor, fn=fn):
            return Scaled(build_function(fn), factor)
        case SumModel(fns=fns):
            return Sum(build_function(fn) for fn in fns)
        case _:
            raise NotImplementedError()


def to_jsonable(value: Union[float, int, bool, str, None, dict, list, tuple, torch.Tensor, complex]):
    """Plain JSON data: NaN becomes null, infinities become strings, complex becomes {re, im}."""
    match value:
        case bool() | int() | str() | None:
            return value
        case float():
            if math.isnan(value):
                return None
            if math.isinf(value):
                return "inf" if value > 0 else "-inf"
            return value
        case Enum():
            return value.value
        case complex():
            return {"re": to_jsonable(value.real), "im": to_jsonable(value.imag)}
        case torch.Tensor():
            return to_jsonable(value.tolist())
        case dict():
            return {str(k): to_jsonable(v) for k, v in value.items()}
        case list() | tuple():
            return [to_jsonable(v) for v in value]
        case BaseModel():
            return to_jsonable(value.model_dump())
        case _:
            raise NotImplementedError()
