import logging
from pathlib import Path

from balayage.sweep import BoundaryCharge
from errors import InvalidParameter
from growth.canonical import CanonicalProduct
from growth.functions import Builtin, GrowthFunction, build_builtin
from growth.profiles import RadiusProfile
from measures.charge import ChargeDistribution
from measures.generators import parse_generator
from schemas import BoundaryChargeModel, DistributionModel, FunctionAdapter, build_function
from smallsets import IntervalSet

logger = logging.getLogger(__name__)

FUNCTION_ALIASES = {
    "sinpi": Builtin.LOG_ABS_SIN_PI,
    "absre": Builtin.ABS_RE,
    "zero": Builtin.ZERO,
}


class SourceError(ValueError):
    """A command-line source string or input file could not be parsed."""


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as error:
        raise SourceError(f"cannot read {path!r}: {error}") from error


def _generated(text: str) -> ChargeDistribution:
    try:
        return parse_generator(text)
    except InvalidParameter as error:
        raise SourceError(str(error)) from error


def load_distribution(source: str) -> ChargeDistribution:
    """`gen:<generator>` or the path of a distribution JSON file."""
    if source.startswith("gen:"):
        nu = _generated(source.removeprefix("gen:"))
    else:
        nu = DistributionModel.model_validate_json(_read(source)).to_distribution()
    logger.debug(f"loaded {source=}: {len(nu)} atoms, {len(nu.lines)} lines")
    return nu


def load_boundary(source: str) -> BoundaryCharge:
    return BoundaryChargeModel.model_validate_json(_read(source)).to_boundary()


def load_function(source: str, trunc: float = 1e4) -> GrowthFunction:
    """A builtin name, `linear:a`, `canprod:<genus>:<generator>` or a function JSON file."""
    name, _, rest = source.partition(":")
    if source in FUNCTION_ALIASES:
        return build_builtin(FUNCTION_ALIASES[source])
    if source in {b.value for b in Builtin} and not rest:
        return build_builtin(Builtin(source))
    match name:
        case "linear":
            return build_builtin(Builtin.LINEAR_ABS, _number(rest))
        case "canprod":
            genus, _, generator = rest.partition(":")
            zeros = _generated(generator)
            return CanonicalProduct(zeros.positions, int(_number(genus)), trunc)
        case _:
            return build_function(FunctionAdapter.validate_json(_read(source)))


def _number(text: str) -> float:
    try:
        return float(text)
    except ValueError as error:
        raise SourceError(f"not a number: {text!r}") from error


def parse_intervals(text: str) -> IntervalSet:
    """`a:b,c:d` as a union of closed intervals; the empty string is the empty set."""
    pairs = []
    for piece in filter(None, text.split(",")):
        a, sep, b = piece.partition(":")
        if not sep:
            raise SourceError(f"interval {piece!r} is not of the form a:b")
        pairs.append((_number(a), _number(b)))
    try:
        return IntervalSet.from_pairs(pairs)
    except InvalidParameter as error:
        raise SourceError(str(error)) from error


def parse_profile(text: str) -> RadiusProfile:
    """`const:r` or `power:c:R:P`."""
    kind, *fields = text.split(":")
    values = [_number(f) for f in fields]
    match kind, len(values):
        case "const", 1:
            return RadiusProfile.constant(*values)
        case "power", 3:
            return RadiusProfile.power_floor(*values)
        case _:
            raise SourceError(f"unknown radius profile {text!r}")


def parse_point(text: str) -> complex:
    """`x` or `x,y` as the point x + iy."""
    parts = [_number(p) for p in text.split(",")]
    if not 1 <= len(parts) <= 2:
        raise SourceError(f"point {text!r} must be x or x,y")
    return complex(parts[0], parts[1] if len(parts) == 2 else 0.0)


def parse_floats(text: str) -> list[float]:
    return [_number(p) for p in filter(None, text.split(","))]

