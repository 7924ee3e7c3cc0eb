"""Machine-readable verdicts, reports, and deterministic file writers.

Reports are plain data: a command name, the configuration echo, a list of
claim verdicts, and free-form measurements. Serialization is deterministic
by construction (sorted keys, repr-based floats, no timestamps), so a rerun
with the same configuration and seed produces byte-identical files. Timing
belongs on stdout, never in a report file.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .flow import Trajectory
from .frenet import CurvatureProfile

PASS = "pass"
FAIL = "fail"
INAPPLICABLE = "inapplicable"
INFORMATIONAL = "informational"

CLAIM_DESCRIPTIONS = {
    "connection.koszul": "claimed connection satisfies the Koszul identity of the deformed metric",
    "connection.torsion_free": "claimed connection is torsion-free against the lift brackets",
    "connection.metric_compatible": "metric derivative rules match compatibility with the claimed connection",
    "connection.sasaki_limit": "at delta = 0 the connection reduces to the classical undeformed formulas",
    "conservation.lifted_speed": "lifted speed sqrt(|u|^2 + |w|^2 + delta^2 <w,Jxi>^2) is constant",
    "conservation.unit_fiber": "fiber norm |xi| stays at 1 on the unit bundle",
    "conservation.tangency": "fiber velocity stays orthogonal to the fiber coordinate",
    "conservation.fiber_speed": "fiber speed c = |w| is constant",
    "conservation.twist_momentum": "twist momentum mu = <w, J xi> is constant",
    "conservation.vertical_energy": "vertical speed lambda = sqrt(c^2 + delta^2 mu^2) is constant",
    "integrator.fourth_order": "halving the step shrinks the endpoint error by a fourth-order factor",
    "twisted_rate.unit_tangent": "twisted curvature operator is constant along unit-bundle flows",
    "twisted_rate.tangent_closed_form": "full-bundle operator rate matches its closed-form candidate",
    "chain.oracle_agreement": "finite-difference chains match the power-recursion chains",
    "chain.oracle_refinement": "chain agreement error shrinks at second order in the stencil spacing",
    "chain.norm_constancy": "chain vector norms are constant along one geodesic",
    "chain.speed_identity": "projected speed equals sqrt(1 - c^2 - delta^2 mu^2)",
    "curvature.constancy": "leading generalized curvatures are constant along projections",
    "curvature.high_orders_vanish": "the first curvature past the effective rank is numerically zero",
    "curvature.tail_rank_collapse": "the trailing Gram ratio collapses below rank tolerance",
    "powers.span_even": "even operator powers lie in span{T^2, JT, E}",
    "powers.span_odd": "odd operator powers lie in span{JT^2, T, J}",
    "projection_curvature.divergence": "full-bundle projections show visibly varying first curvature",
}


@dataclass(frozen=True)
class ClaimVerdict:
    """Outcome of one verified claim.

    For comparison "<=" the claim passes when measured <= tolerance; the
    divergence claim uses ">=", passing only when the measurement exceeds
    its threshold. Informational entries carry a measurement but no verdict.
    """

    claim: str
    status: str
    measured: float | None = None
    tolerance: float | None = None
    comparison: str = "<="
    detail: str = ""

    def __post_init__(self) -> None:
        if self.status not in (PASS, FAIL, INAPPLICABLE, INFORMATIONAL):
            raise ValueError(f"unknown verdict status {self.status!r}")
        if self.claim not in CLAIM_DESCRIPTIONS:
            raise ValueError(f"unknown claim id {self.claim!r}")

    def to_dict(self) -> dict:
        return {
            "claim": self.claim,
            "description": CLAIM_DESCRIPTIONS[self.claim],
            "status": self.status,
            "measured": _jsonable(self.measured),
            "tolerance": _jsonable(self.tolerance),
            "comparison": self.comparison,
            "detail": self.detail,
        }


def judge(
    claim: str,
    measured: float,
    tolerance: float,
    comparison: str = "<=",
    detail: str = "",
) -> ClaimVerdict:
    """Build a pass/fail verdict from a measurement and its threshold."""
    measured = float(measured)
    if comparison == "<=":
        ok = measured <= tolerance
    elif comparison == ">=":
        ok = measured >= tolerance
    else:
        raise ValueError(f"unknown comparison {comparison!r}")
    return ClaimVerdict(
        claim=claim,
        status=PASS if ok else FAIL,
        measured=measured,
        tolerance=float(tolerance),
        comparison=comparison,
        detail=detail,
    )


@dataclass(frozen=True)
class Report:
    """Aggregate of one command run; overall passes iff nothing failed."""

    command: str
    config: dict
    verdicts: tuple[ClaimVerdict, ...]
    measurements: dict = field(default_factory=dict)

    @property
    def overall(self) -> str:
        return FAIL if any(v.status == FAIL for v in self.verdicts) else PASS

    @property
    def exit_code(self) -> int:
        return 0 if self.overall == PASS else 1

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": _jsonable(self.config),
            "claims": [v.to_dict() for v in self.verdicts],
            "measurements": _jsonable(self.measurements),
            "overall": self.overall,
        }

    def summary_lines(self) -> list[str]:
        lines = []
        for v in self.verdicts:
            mark = {
                PASS: "PASS",
                FAIL: "FAIL",
                INAPPLICABLE: "SKIP",
                INFORMATIONAL: "INFO",
            }[v.status]
            extra = ""
            if v.measured is not None:
                extra = f" measured={v.measured:.3e}"
                if v.tolerance is not None:
                    extra += f" {v.comparison} {v.tolerance:.1e}"
            lines.append(f"{mark} {v.claim}{extra}")
        lines.append(f"overall: {self.overall}")
        return lines


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def report_json(report: Report) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"


def write_report(report: Report, path: str) -> None:
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report_json(report))


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_trajectory_csv(traj: Trajectory, path: str) -> None:
    """Samples as CSV: sigma, u_*, xi_*, w_*, then the derived invariants."""
    dim = traj.u.shape[-1]
    header = (
        ["sigma"]
        + [f"u_{i}" for i in range(1, dim + 1)]
        + [f"xi_{i}" for i in range(1, dim + 1)]
        + [f"w_{i}" for i in range(1, dim + 1)]
        + ["c", "mu", "lambda", "xi_norm", "lifted_speed"]
    )
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(traj.n_samples):
            row = (
                [_fmt(traj.sigma[i])]
                + [_fmt(x) for x in traj.u[i]]
                + [_fmt(x) for x in traj.xi[i]]
                + [_fmt(x) for x in traj.w[i]]
                + [
                    _fmt(traj.c[i]),
                    _fmt(traj.mu[i]),
                    _fmt(traj.lam[i]),
                    _fmt(traj.xi_norm[i]),
                    _fmt(traj.lifted_speed[i]),
                ]
            )
            writer.writerow(row)


def write_profile_csv(profile: CurvatureProfile, path: str) -> None:
    """Curvature samples as CSV: sigma, k_1..k_{order-1}, effective_rank."""
    if profile.sigmas is None:
        raise ValueError("profile carries no sample parameters; nothing to write")
    order = profile.order
    header = ["sigma"] + [f"k_{i}" for i in range(1, order)] + ["effective_rank"]
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(profile.sigmas.shape[0]):
            row = (
                [_fmt(profile.sigmas[i])]
                + [_fmt(x) for x in profile.curvatures[i]]
                + [str(int(profile.effective_rank[i]))]
            )
            writer.writerow(row)
