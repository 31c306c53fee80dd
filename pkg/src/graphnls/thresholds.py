"""Critical-mass constants, witness constructions, and the mass scan.

Closed forms for the constant-plus-exponential family
    u = c on the loop,  c*exp(-alpha*x) on the half-line,
whose mass and energy are
    mu = c^2 L + c^2/(2 alpha),        E = c^2 alpha / 4 - c^6 L / 6.
Eliminating alpha, negativity of E reduces to the quadratic
    Lam^2 - mu*Lam + 3/4 < 0,   Lam = c^2 L,
which has solutions exactly when mu >= sqrt(3). The scan sweeps the mass,
minimizes at every point, and brackets the onset of strictly negative levels;
the sharp onset is an open quantity, so only the bracket is reported.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .graphs import GridFunction, MetricGraph, build_tadpole, normalized
from .energy import energy_localized, soliton_profile
from .minimize import MinimizeConfig, MinimizeReport, minimize

__all__ = [
    "MU_LINE",
    "MU_HALFLINE",
    "MU_WITNESS",
    "Witness",
    "ScanPoint",
    "ThresholdReport",
    "test_function_energy",
    "optimal_witness",
    "vanishing_family",
    "unbounded_witness",
    "scan_mass",
    "scan_rows",
    "write_scan_csv",
    "write_scan_json",
]

MU_LINE = math.sqrt(3.0) * math.pi / 2.0        # critical mass of the line
MU_HALFLINE = math.sqrt(3.0) * math.pi / 4.0    # critical mass of the half-line
MU_WITNESS = math.sqrt(3.0)                     # onset of the negative-energy witness


def test_function_energy(c: float, alpha: float, L: float):
    """Closed-form (mass, energy) of the constant-plus-exponential profile."""
    if c <= 0 or alpha <= 0 or L <= 0:
        raise ValueError("c, alpha, L must be positive")
    mu = c * c * L + c * c / (2.0 * alpha)
    e = c * c * alpha / 4.0 - c ** 6 * L / 6.0
    return mu, e


@dataclass(frozen=True)
class Witness:
    c: float
    alpha: float
    energy: float


def optimal_witness(mu: float, L: float = 1.0) -> Witness | None:
    """Best constant-plus-exponential profile at mass ``mu``, or None.

    Takes Lam = c^2 L at the vertex mu/2 of the quadratic, where its value is
    3/4 - mu^2/4; a witness exists iff mu^2 >= 3. The tail rate then reduces
    to alpha = 1/(2L) and the construction reproduces the mass exactly.
    """
    if mu <= 0 or L <= 0:
        raise ValueError("mu and L must be positive")
    if mu * mu < 3.0:
        return None
    lam_vertex = mu / 2.0
    c = math.sqrt(lam_vertex / L)
    alpha = c * c / (2.0 * (mu - c * c * L))
    _m, e = test_function_energy(c, alpha, L)
    return Witness(c, alpha, e)


def vanishing_family(mu: float, n: int, graph: MetricGraph) -> GridFunction:
    """Plateau of height ~sqrt(mu/(n - 1/3)) on (1, n) of the half-line with
    unit ramps and zero elsewhere; renormalized to mass ``mu`` on the grid.

    The exact energy of the continuum profile is mu/(n - 1/3), positive and
    tending to zero as the plateau spreads.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if mu <= 0:
        raise ValueError("mu must be positive")
    tails = graph.halfline_edge_ids
    if not tails:
        raise ValueError("graph has no half-line edge")
    tail = tails[0]
    if graph.edges[tail].length <= n + 1:
        raise ValueError(f"half-line truncation {graph.edges[tail].length} too "
                         f"short for plateau n={n}; need R > n + 1")
    alpha = math.sqrt(mu / (n - 1.0 / 3.0))

    def profile(eid, x):
        if eid != tail:
            return np.zeros_like(x)
        return alpha * np.clip(np.minimum(x, n + 1.0 - x), 0.0, 1.0)

    u = GridFunction.from_edge_callable(graph, profile)
    return normalized(u, mu)


def unbounded_witness(mu: float, lam: float, graph: MetricGraph):
    """Concentrated solitary bump at the loop midpoint scaled to mass ``mu``.

    At the critical mass the bump's kinetic and sextic terms balance; scaling
    the amplitude to carry mass above the line's critical value tips the
    sextic term, and the energy decreases without bound as lam grows. Returns
    (profile, localized energy).
    """
    loop, _tail, _junction = graph.tadpole_parts()
    L = graph.edges[loop].length
    if lam * L * L < 16.0:
        raise ValueError(
            f"loop too short for concentration at lam={lam}; use lam >= {16.0 / L**2:g}"
        )
    bump = soliton_profile(lam, (loop, L / 2.0), graph)
    u = normalized(bump, mu)
    return u, energy_localized(u).total


@dataclass
class ScanPoint:
    mu: float
    best_energy: float
    attained: bool
    lam: float
    tail_mass_fraction: float
    preset: str | None = None
    regime: str = ""


@dataclass
class ThresholdReport:
    """Scan outcome plus the analytic constants it is judged against."""

    mu_line: float
    mu_halfline: float
    mu_witness: float
    bracket_lower: float | None
    bracket_upper: float | None
    points: list[ScanPoint]
    monotonicity_violations: list[tuple[float, float]]
    attain_tol: float


def _scan_one(graph: MetricGraph, cfg: MinimizeConfig, mu: float) -> ScanPoint:
    report = minimize(graph, replace(cfg, mu=mu))
    return ScanPoint(
        mu=mu,
        best_energy=report.final_energy,
        attained=report.regime == "ground-state",
        lam=report.lambda_est,
        tail_mass_fraction=report.tail_mass_fraction,
        preset=report.preset,
        regime=report.regime,
    )


def scan_mass(mu_min: float, mu_max: float, steps: int,
              cfg: MinimizeConfig | None = None, *,
              L: float = 1.0, R: float = 50.0, h: float = 0.01,
              graph: MetricGraph | None = None,
              threads: int = 1) -> ThresholdReport:
    """Multistart-minimize along a mass grid and bracket the sign change.

    The bracket spans the largest mass whose best energy stays above
    -attain_tol and the smallest mass strictly below it. Non-monotone pairs of
    neighbouring best energies are recorded rather than silently accepted.
    """
    if not MU_HALFLINE < mu_min < mu_max <= MU_LINE + 1e-12:
        raise ValueError(
            f"scan range must satisfy {MU_HALFLINE:.4f} < mu_min < mu_max <= {MU_LINE:.4f}"
        )
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if cfg is None:
        cfg = MinimizeConfig(mu=mu_min)
    if graph is None:
        graph = build_tadpole(L, R, h)
    mus = np.linspace(mu_min, mu_max, steps)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(lambda m: _scan_one(graph, cfg, float(m)), mus))
    else:
        points = [_scan_one(graph, cfg, float(m)) for m in mus]

    not_attained = [p.mu for p in points if not p.attained]
    attained = [p.mu for p in points if p.attained]
    lower = max(not_attained) if not_attained else None
    upper = min(attained) if attained else None

    violations = []
    for p, q in zip(points, points[1:]):
        if q.best_energy > p.best_energy + 10.0 * cfg.attain_tol:
            violations.append((p.mu, q.mu))

    return ThresholdReport(
        mu_line=MU_LINE,
        mu_halfline=MU_HALFLINE,
        mu_witness=MU_WITNESS,
        bracket_lower=lower,
        bracket_upper=upper,
        points=points,
        monotonicity_violations=violations,
        attain_tol=cfg.attain_tol,
    )


def scan_rows(report: ThresholdReport):
    for p in report.points:
        yield {
            "mu": repr(p.mu),
            "best_energy": repr(p.best_energy),
            "attained": "1" if p.attained else "0",
            "lambda": repr(p.lam),
            "tail_mass_fraction": repr(p.tail_mass_fraction),
        }


def write_scan_csv(report: ThresholdReport, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["mu", "best_energy", "attained", "lambda",
                            "tail_mass_fraction"])
        writer.writeheader()
        for row in scan_rows(report):
            writer.writerow(row)


def scan_json_payload(report: ThresholdReport, config: dict | None = None) -> dict:
    payload = {
        "constants": {
            "mu_line": report.mu_line,
            "mu_halfline": report.mu_halfline,
            "mu_witness": report.mu_witness,
        },
        "bracket": {"lower": report.bracket_lower, "upper": report.bracket_upper},
        "attain_tol": report.attain_tol,
        "monotonicity_violations": report.monotonicity_violations,
        "points": [
            {
                "mu": p.mu,
                "best_energy": p.best_energy,
                "attained": p.attained,
                "lambda": p.lam,
                "tail_mass_fraction": p.tail_mass_fraction,
                "preset": p.preset,
                "regime": p.regime,
            }
            for p in report.points
        ],
    }
    if config is not None:
        payload["config"] = config
    return payload


def write_scan_json(report: ThresholdReport, path, config: dict | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(scan_json_payload(report, config), fh, indent=2, sort_keys=True)
        fh.write("\n")
