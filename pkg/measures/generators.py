from enum import Enum

import torch

from errors import InvalidParameter
from measures.charge import ChargeDistribution
from utils import FLOAT


class GeneratorKind(Enum):
    INTEGERS = "integers"
    RAY = "ray"
    LATTICE_I = "lattice-i"


def integers(count: int, mass: float = 1.0) -> ChargeDistribution:
    """Atoms at the nonzero integers n with |n| <= count."""
    n = torch.arange(1, count + 1, dtype=FLOAT)
    points = torch.cat([n, -n])
    return ChargeDistribution(torch.complex(points, torch.zeros_like(points)), torch.full_like(points, mass))


def ray(step: float, count: int, mass: float = 1.0) -> ChargeDistribution:
    """Atoms at step*n, n = 1..count, on the positive ray."""
    points = step * torch.arange(1, count + 1, dtype=FLOAT)
    return ChargeDistribution(torch.complex(points, torch.zeros_like(points)), torch.full_like(points, mass))


def lattice_i(count: int, mass: float = 1.0) -> ChargeDistribution:
    """Atoms at i*n with 0 < |n| <= count."""
    n = torch.arange(1, count + 1, dtype=FLOAT)
    points = torch.cat([n, -n])
    return ChargeDistribution(torch.complex(torch.zeros_like(points), points), torch.full_like(points, mass))


def generate(kind: GeneratorKind, params: list[float]) -> ChargeDistribution:
    match kind:
        case GeneratorKind.INTEGERS:
            count, *rest = params
            return integers(int(count), *rest)
        case GeneratorKind.RAY:
            step, count, *rest = params
            return ray(step, int(count), *rest)
        case GeneratorKind.LATTICE_I:
            count, *rest = params
            return lattice_i(int(count), *rest)
        case _:
            raise NotImplementedError()


def parse_generator(text: str) -> ChargeDistribution:
    """Parse `integers:N[:mass]`, `ray:step:N[:mass]` or `lattice-i:N[:mass]`."""
    name, *fields = text.split(":")
    try:
        kind = GeneratorKind(name)
        params = [float(f) for f in fields]
    except ValueError as error:
        raise InvalidParameter(f"unknown generator {text!r}") from error
    arity = 2 if kind is GeneratorKind.RAY else 1
    if not arity <= len(params) <= arity + 1:
        raise InvalidParameter(f"generator {text!r} takes {arity} or {arity + 1} fields")
    if params[arity - 1] < 0 or (len(params) > arity and params[arity] == 0):
        raise InvalidParameter(f"generator {text!r} needs a nonnegative count and nonzero mass")
    return generate(kind, params)
