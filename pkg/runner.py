import argparse
import csv
from dataclasses import dataclass, field, fields, is_dataclass
from enum import Enum
import io
import json
import logging
import math
from typing import Optional

import torch

import construct
import criteria
from balayage.sweep import Genus, sweep, sweep_strip
from errors import InvalidParameter
from growth import means
from growth.canonical import CanonicalProduct
from loaders import (
    SourceError,
    load_distribution,
    load_function,
    parse_floats,
    parse_intervals,
    parse_point,
    parse_profile,
)
from logmeasure import LindelofKind, LogProfile, lindelof_report
from measures.charge import ChargeDistribution
from schemas import BoundaryChargeModel, DistributionModel, function_model, to_jsonable
from smallsets import (
    LineSegments,
    PointSet,
    content_chain_check,
    exceptional_bound_check,
    hausdorff_content,
    q_of_E,
)
from utils import Verdict, dyadic_radii

logger = logging.getLogger(__name__)


class CommandType(Enum):
    ELL = "ell"
    LINDELOF = "lindelof"
    SWEEP = "sweep"
    CRITERION = "criterion"
    CONSTRUCT = "construct"
    CONTENT = "content"
    QE = "qe"
    MEANS = "means"
    SCAN = "scan"


class OutputFormat(Enum):
    JSON = "json"
    CSV = "csv"


@dataclass
class RunConfig:
    command: CommandType
    action: Optional[str] = None
    inputs: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    n_max: int = 14
    slope_tol: float = 0.05
    quad_tol: float = 1e-9
    trunc: float = 1e4
    output_format: OutputFormat = OutputFormat.JSON
    output: Optional[str] = None
    assert_bounded: bool = False

    @classmethod
    def from_args(cls, args: argparse.Namespace):
        known = {"command", "action", "n_max", "slope_tol", "quad_tol", "trunc", "format", "output", "assert_bounded"}
        known |= {"quiet", "verbose"}
        sources = {"nu", "mu", "M", "fn", "lhs", "rhs"}
        values = {k: v for k, v in vars(args).items() if k not in known and v is not None}
        return cls(
            command=CommandType(args.command),
            action=getattr(args, "action", None),
            inputs={k: v for k, v in values.items() if k in sources},
            params={k: v for k, v in values.items() if k not in sources},
            n_max=args.n_max,
            slope_tol=args.slope_tol,
            quad_tol=args.quad_tol,
            trunc=args.trunc,
            output_format=OutputFormat(args.format),
            output=args.output,
            assert_bounded=args.assert_bounded,
        )


@dataclass
class RunResult:
    payload: dict
    rows: Optional[list[dict]] = None
    verdict: Optional[Verdict] = None

    def render(self, output_format: OutputFormat) -> str:
        match output_format:
            case OutputFormat.JSON:
                return json.dumps(to_jsonable(self.payload), indent=2, sort_keys=True, allow_nan=False)
            case OutputFormat.CSV:
                rows = to_jsonable(self.rows if self.rows is not None else [self.payload])
                buffer = io.StringIO()
                writer = csv.DictWriter(buffer, fieldnames=list(rows[0]) if rows else [], lineterminator="\n")
                writer.writeheader()
                writer.writerows(rows)
                return buffer.getvalue()
            case _:
                raise NotImplementedError()


def report_dict(report) -> dict:
    """Dataclass fields as plain data, recursing into nested reports."""
    if not is_dataclass(report):
        return report
    return {f.name: report_dict(getattr(report, f.name)) for f in fields(report)}


def distribution_json(nu: ChargeDistribution) -> dict:
    return DistributionModel.from_distribution(nu).model_dump()


class Runner:
    def __init__(self, config: RunConfig):
        self.config = config

    def _param(self, name: str, fallback=None):
        value = self.config.params.get(name, fallback)
        if value is None:
            raise SourceError(f"{self.config.command.value} needs --{name.replace('_', '-')}")
        return value

    def _distribution(self, name: str) -> ChargeDistribution:
        source = self.config.inputs.get(name)
        if source is None:
            raise SourceError(f"{self.config.command.value} needs --{name}")
        return load_distribution(source)

    def _function(self, name: str):
        source = self.config.inputs.get(name)
        if source is None:
            raise SourceError(f"{self.config.command.value} needs --{name}")
        return load_function(source, self.config.trunc)

    def run(self) -> RunResult:
        logger.info(f"running {self.config.command.value} {self.config.action or ''}")
        match self.config.command:
            case CommandType.ELL:
                return self.ell()
            case CommandType.LINDELOF:
                return self.lindelof()
            case CommandType.SWEEP:
                return self.sweep()
            case CommandType.CRITERION:
                return self.criterion()
            case CommandType.CONSTRUCT:
                return self.construct()
            case CommandType.CONTENT:
                return self.content()
            case CommandType.QE:
                return self.qe()
            case CommandType.MEANS:
                return self.means()
            case CommandType.SCAN:
                return self.scan()
            case _:
                raise NotImplementedError()

    def ell(self) -> RunResult:
        nu = self._distribution("nu")
        profile = LogProfile(nu)
        if "r" in self.config.params or "R" in self.config.params:
            r = torch.tensor([self._param("r")], dtype=torch.float64)
            R = torch.tensor([self._param("R")], dtype=torch.float64)
        else:
            radii = dyadic_radii(self.config.n_max)
            pairs = [(n, N) for N in range(1, radii.numel()) for n in range(N)]
            r = radii[[n for n, _ in pairs]]
            R = radii[[N for _, N in pairs]]
        for lo, hi in zip(r.tolist(), R.tolist()):
            if not 0 < lo < hi < math.inf:
                raise InvalidParameter(f"need 0 < r < R < inf, got ({lo}, {hi})")
        right, left = profile.right(r, R), profile.left(r, R)
        is_mass = nu.is_mass() or nu.is_empty()
        rows = [
            {"r": lo, "R": hi, "ell_rh": a, "ell_lh": b, "value": max(a, b) if is_mass else math.nan}
            for lo, hi, a, b in zip(r.tolist(), R.tolist(), right.tolist(), left.tolist())
        ]
        return RunResult({"rows": rows}, rows)

    def lindelof(self) -> RunResult:
        nu = self._distribution("nu")
        kind = LindelofKind(self.config.params.get("kind", LindelofKind.FULL.value))
        report = lindelof_report(nu, kind, 2.0**self.config.n_max, self.config.slope_tol)
        rows = [{"r": r, "value": v} for r, v in report.samples]
        return RunResult(report_dict(report), rows, report.verdict)

    def sweep(self) -> RunResult:
        nu = self._distribution("nu")
        genus = self.config.params.get("genus")
        r0 = self.config.params.get("r0", 1.0)
        strip = self.config.params.get("strip")
        if strip is None:
            bc = sweep(nu, Genus(genus or Genus.ZERO.value), r0)
        else:
            bc = sweep_strip(nu, strip, r0, None if genus is None else Genus(genus))
        payload = BoundaryChargeModel.from_boundary(bc).model_dump()
        ys = parse_floats(self.config.params.get("y", ""))
        rows = [{"line": x, "y": y, "cdf": bc.cdf(x, y)} for x in bc.target_lines for y in ys]
        if rows:
            payload["cdf"] = rows
        return RunResult(payload, rows or None)

    def criterion(self) -> RunResult:
        c = self.config
        match self.config.action:
            case "dyadic":
                report = criteria.dyadic_gap_report(
                    self._distribution("nu"), self._function("M"), c.n_max, c.slope_tol, c.quad_tol
                )
            case "pair":
                report = criteria.pair_gap_report(self._distribution("nu"), self._distribution("mu"), c.n_max, c.slope_tol)
            case "shift":
                w = parse_point(self._param("w"))
                report = criteria.shift_gap_report(
                    self._distribution("nu"), self._distribution("mu"), w, c.n_max, c.slope_tol
                )
            case "mr":
                report = criteria.mr_positive(self._distribution("nu"), self._distribution("mu"), c.n_max, c.slope_tol)
            case "eps":
                constant, report = criteria.eps_condition(self._distribution("nu"), self._param("eps"), c.n_max, c.slope_tol)
                report.provenance["C"] = constant
            case "mu-rh":
                report = criteria.mu_rh_check(
                    self._distribution("nu"), c.n_max, bool(c.params.get("mirrored")), c.slope_tol
                )
            case "redheffer":
                certificate = criteria.redheffer_bound(self._distribution("nu"), self._param("c"), c.n_max, c.slope_tol)
                rows = [{"r": r, "partial_sum": s} for r, s in certificate.partial_sums]
                return RunResult(report_dict(certificate), rows, certificate.verdict)
            case "interval":
                interval = criteria.interval_gap_report(
                    self._distribution("nu"),
                    self._distribution("mu"),
                    c.n_max,
                    int(c.params.get("samples", 1000)),
                    int(c.params.get("seed", 0)),
                    c.slope_tol,
                )
                rows = [
                    {"r": r, "R": R, "gap": g}
                    for (r, R), g in zip(interval.intervals.tolist(), interval.gaps.tolist())
                ]
                return RunResult(report_dict(interval), rows, interval.verdict)
            case _:
                raise NotImplementedError()
        return RunResult(report_dict(report), report.rows(), report.verdict)

    def construct(self) -> RunResult:
        c = self.config
        match c.action:
            case "alpha":
                eta = self._distribution("nu")
                alpha = construct.alpha_balance(eta)
                bound, twice_S = construct.balance_bound(eta, alpha)
                return RunResult({"alpha": distribution_json(alpha), "sup_abs_ell": bound, "bound": twice_S})
            case "uniformize" | "uniformize-strip":
                nu, mu = self._distribution("nu"), self._distribution("mu")
                if c.action == "uniformize":
                    result = construct.uniformize_rh(nu, mu, self._param("a"), c.params.get("factor", 2.0), c.n_max)
                else:
                    result = construct.uniformize_strip(
                        nu, mu, self._param("a"), self._param("b"), c.params.get("factor", 2.0), c.n_max, c.slope_tol
                    )
                beta_minus = result.beta_minus
                payload = {
                    "alpha": distribution_json(result.alpha),
                    "beta_plus": BoundaryChargeModel.from_boundary(result.beta_plus).model_dump(),
                    "beta_minus": None if beta_minus is None else BoundaryChargeModel.from_boundary(beta_minus).model_dump(),
                    "c": result.c,
                    "residual_sup": result.residual_sup,
                    "beta_min_density": result.beta_min_density,
                    "tail_certified": result.tail_certified,
                }
                return RunResult(payload)
            case "complete-r":
                added = construct.complete_R(self._distribution("nu"), c.n_max, c.slope_tol)
            case "complete-ir":
                added = construct.complete_iR(self._distribution("nu"), c.n_max, c.slope_tol)
            case "complete":
                nu = self._distribution("nu")
                completed = construct.complete_full(nu, c.n_max, c.slope_tol)
                report = lindelof_report(completed, LindelofKind.FULL, 2.0**c.n_max, c.slope_tol)
                payload = {"distribution": distribution_json(completed), "lindelof": report_dict(report)}
                return RunResult(payload, verdict=report.verdict)
            case _:
                raise NotImplementedError()
        return RunResult({"distribution": distribution_json(added)})

    def content(self) -> RunResult:
        params = self.config.params
        d = self._param("d")
        profile = parse_profile(params.get("profile", "const:1"))
        if "E" in params:
            E = parse_intervals(params["E"])
            rows = [report_dict(row) for row in exceptional_bound_check(E, profile, d, int(params.get("k_max", 10)))]
            return RunResult({"exceptional": rows}, rows)
        if "segments" in params:
            origin = parse_point(params.get("origin", "0"))
            direction = parse_point(params.get("direction", "1"))
            S = LineSegments(parse_intervals(params["segments"]), origin, direction)
        else:
            S = PointSet(self._distribution("nu").positions)
        payload = {"estimate": report_dict(hausdorff_content(S, d, profile))}
        if "chain" in params:
            payload["chain"] = report_dict(content_chain_check(S, d, profile, parse_profile(params["chain"])))
        return RunResult(payload)

    def qe(self) -> RunResult:
        E = parse_intervals(self._param("E"))
        rows = [
            {"r": r, "measure": E.measure_within(r), "q": q_of_E(E, r)}
            for r in parse_floats(self._param("r"))
        ]
        payload = {"rows": rows}
        if "gauge_t_max" in self.config.params:
            budget = criteria.gauge_budget(
                criteria.GrowthGauge.zero(),
                criteria.GrowthGauge.zero(),
                E,
                self.config.params["gauge_t_max"],
                self.config.quad_tol,
            )
            payload["budget"] = report_dict(budget)
        return RunResult(payload, rows)

    def means(self) -> RunResult:
        u = self._function("fn")
        tol = self.config.quad_tol
        params = self.config.params
        match self.config.action:
            case "circle":
                value = means.circle_mean(u, parse_point(self._param("z")), self._param("r"), tol)
            case "disk":
                value = means.disk_mean(u, parse_point(self._param("z")), self._param("r"), tol)
            case "radial":
                return RunResult(report_dict(means.radial_max(u, self._param("r"), int(params.get("samples", 4096)))))
            case "type":
                value = means.type_estimate(u, params.get("r_max", 2.0**10), int(params.get("samples", 4096)))
            case "jaxis":
                shells = means.j_axis_shells(u, self.config.n_max, tol)
                rows = [{"r": 2.0**n, "R": 2.0 ** (n + 1), "value": v} for n, v in enumerate(shells.tolist())]
                return RunResult({"rows": rows}, rows)
            case _:
                raise NotImplementedError()
        payload = {"value": value, "function": function_model(u).model_dump()}
        if isinstance(u, CanonicalProduct) and self.config.action in ("circle", "disk"):
            # every point of the circle or disk lies within |z| + r of the origin
            payload["tail_bound"] = u.tail_bound(abs(parse_point(self._param("z"))) + self._param("r"))
        return RunResult(payload)

    def scan(self) -> RunResult:
        params = self.config.params
        kind = criteria.ScanKind(params.get("domain", criteria.ScanKind.AXIS.value))
        domain = criteria.ScanDomain(
            kind, self._param("y_max"), int(params.get("samples", 401)), params.get("b", 0.0), int(params.get("x_samples", 9))
        )
        E = parse_intervals(params.get("E", ""))
        report = criteria.inequality_scan(self._function("lhs"), self._function("rhs"), domain, E)
        verdict = Verdict.BOUNDED if not report.violations else Verdict.UNBOUNDED
        rows = [{"re": z.real, "im": z.imag, "margin": m} for z, m in report.violations]
        return RunResult(report_dict(report), rows, verdict)
