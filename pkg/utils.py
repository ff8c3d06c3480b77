from enum import Enum
from inspect import isfunction
import math
from typing import Callable, Sequence, TypeVar, Union

import numpy as np
import torch

T = TypeVar("T")

FLOAT = torch.float64
COMPLEX = torch.complex128
LN2 = math.log(2.0)


class Verdict(Enum):
    BOUNDED = "Bounded"
    UNBOUNDED = "Unbounded"
    INCONCLUSIVE = "Inconclusive"


def exists(x: any) -> bool:
    return x is not None


def default(val: T, d: Union[T, Callable[[], T]]) -> T:
    if exists(val):
        return val
    return d() if isfunction(d) else d


def num_to_groups(num, divisor):
    groups = num // divisor
    remainder = num % divisor
    arr = [divisor] * groups
    if remainder > 0:
        arr.append(remainder)
    return arr


def as_complex(z: Union[complex, Sequence[complex], np.ndarray, torch.Tensor]) -> torch.Tensor:
    if isinstance(z, torch.Tensor):
        return z.to(COMPLEX).reshape(-1)
    return torch.as_tensor(np.asarray(z, dtype=np.complex128).reshape(-1), dtype=COMPLEX)


def as_float(x: Union[float, Sequence[float], np.ndarray, torch.Tensor]) -> torch.Tensor:
    if isinstance(x, torch.Tensor):
        return x.to(FLOAT)
    return torch.as_tensor(np.asarray(x, dtype=np.float64), dtype=FLOAT)


def dyadic_radii(n_max: int, start: int = 0) -> torch.Tensor:
    return torch.pow(torch.tensor(2.0, dtype=FLOAT), torch.arange(start, n_max + 1, dtype=FLOAT))


def regression_slope(x: Sequence[float], y: Sequence[float]) -> float:
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    if np.ptp(x) == 0.0:
        return 0.0
    return float(np.polyfit(x, y, 1)[0])


def slope_verdict(
    x: Sequence[float], y: Sequence[float], slope_tol: float, tail: float = 0.5
) -> tuple[float, Verdict]:
    """Least-squares slope of y against x over the last `tail` share of the samples."""
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    keep = np.isfinite(x) & np.isfinite(y)
    x, y = x[keep], y[keep]
    if x.size < 3:
        return math.nan, Verdict.INCONCLUSIVE
    count = max(3, math.ceil(x.size * tail))
    slope = regression_slope(x[-count:], y[-count:])
    verdict = Verdict.BOUNDED if slope <= slope_tol else Verdict.UNBOUNDED
    return slope, verdict


def running_max(values: torch.Tensor) -> torch.Tensor:
    if values.numel() == 0:
        return values
    return torch.cummax(values, dim=0).values
