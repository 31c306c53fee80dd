"""Ground-state search by normalized gradient flow on the mass sphere.

Each step moves against the energy gradient, renormalizes back to the target
mass, and backtracks on any energy increase. The descent direction is smoothed
through a factorized (sigma*M + S) solve by default: the plain L2 direction
needs step sizes of order h^2 for stability while the smoothed one converges
with grid-independent steps; both reach the same stationary set.

A run ends in one of three regimes:

* ``ground-state``  converged with markedly negative energy,
* ``vanishing``     the energy level approaches zero from above (mass drifts
                    along the half-line; no minimizer at this mass),
* ``unbounded``     the energy trace crossed the configured floor, the
                    discrete signature of an energy unbounded from below.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import energy as _energy
from .graphs import GridFunction, HelmholtzSolver, MetricGraph, kirchhoff_residual, mass

__all__ = [
    "MinimizeConfig",
    "MinimizeReport",
    "minimize",
    "lambda_estimate",
    "preset_inits",
    "tail_mass_fraction",
]


@dataclass(frozen=True)
class MinimizeConfig:
    """Knobs for one normalized-gradient-flow run."""

    mu: float
    step_init: float = 1.0
    step_shrink: float = 0.5
    step_grow: float = 1.25
    step_max: float = 8.0
    max_iter: int = 20000
    tol_energy: float = 1e-11
    tol_grad: float = 2e-7
    tail_window_frac: float = 0.2
    tail_mass_threshold: float = 0.5
    attain_tol: float = 1e-6
    energy_floor: float = -1e3
    precond_sigma: float = 1.0
    preconditioned: bool = True
    check_every: int = 10

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError("mass mu must be positive")
        for name in ("step_init", "tol_energy", "tol_grad", "attain_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.tail_window_frac < 1.0:
            raise ValueError("tail_window_frac must lie in (0, 1)")
        if not 0.0 < self.step_shrink < 1.0:
            raise ValueError("step_shrink must lie in (0, 1)")


@dataclass
class MinimizeReport:
    """Outcome of one flow (or the best of a multistart)."""

    profile: GridFunction
    energy_trace: np.ndarray
    final_energy: float
    lambda_est: float
    converged: bool
    vanishing_detected: bool
    unbounded_detected: bool
    tail_mass_fraction: float
    kirchhoff_res: float
    iterations: int
    max_mass_drift: float
    preset: str | None = None
    attain_tol: float = 1e-6

    @property
    def regime(self) -> str:
        if self.unbounded_detected:
            return "unbounded"
        if self.final_energy < -self.attain_tol and self.converged:
            return "ground-state"
        return "vanishing"


def lambda_estimate(u: GridFunction, localized: bool = True) -> float:
    """Multiplier from pairing the stationary equation with u:
    lambda = (int_K u^6 - int |u'|^2) / mu. Positive for ground states."""
    g = u.graph
    mu = mass(u)
    if mu <= 0.0:
        raise ValueError("lambda estimate undefined for zero mass")
    kh, nl = _energy._energy_parts(g, u.values, localized)
    return (6.0 * nl - 2.0 * kh) / mu


def tail_mass_fraction(u: GridFunction, window_frac: float = 0.2) -> float:
    """Fraction of the mass in the outer window of the half-line edges."""
    g = u.graph
    total = mass(u)
    if total <= 0.0:
        return 0.0
    tail = 0.0
    for eid in g.halfline_edge_ids:
        ids = g.edge_node_ids(eid)
        x = g.edge_x(eid)
        cut = (1.0 - window_frac) * g.edges[eid].length
        sel = x >= cut
        w = np.full(ids.shape, g.h)
        w[0] *= 0.5
        w[-1] *= 0.5
        tail += float((w[sel] * u.values[ids[sel]] ** 2).sum())
    return tail / total


def preset_inits(graph: MetricGraph, mu: float) -> list[tuple[str, GridFunction]]:
    """Standard starting profiles, each renormalized to mass ``mu``.

    * ``const-exp``       constant on the loop, exponential tail, with the
                          tail rate alpha = 1/(2L) that optimizes this family;
    * ``const-exp-wide``  same family with a four times fatter tail;
    * ``soliton-loop``    concentrated solitary bump at the loop midpoint;
    * ``plateau``         flat plateau on the half-line with unit ramps (the
                          family whose energy tends to zero as it spreads).
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    out = []
    core = graph.core_edge_ids
    tails = graph.halfline_edge_ids
    if graph.is_tadpole():
        loop, tail, _junction = graph.tadpole_parts()
        L = graph.edges[loop].length
        R = graph.edges[tail].length
        for name, alpha in (("const-exp", 0.5 / L), ("const-exp-wide", 0.125 / L)):
            c = np.sqrt(mu / (L + 0.5 / alpha))

            def profile(eid, x, c=c, alpha=alpha, loop=loop):
                return np.full_like(x, c) if eid == loop else c * np.exp(-alpha * x)

            u = GridFunction.from_edge_callable(graph, profile)
            out.append((name, _renorm_with_pins(u, mu)))
        bump = _energy.soliton_profile(64.0 / L ** 2, (loop, L / 2.0), graph)
        out.append(("soliton-loop", _renorm_with_pins(bump, mu)))
        n = max(2, min(25, int(0.5 * R)))
        if R > n + 1:
            from .thresholds import vanishing_family

            out.append(("plateau", vanishing_family(mu, n, graph)))
    elif core or tails:
        # oracle graphs: a single smooth bump at the first vertex
        u = _energy.soliton_profile(1.0, 0, graph)
        out.append(("bump", _renorm_with_pins(u, mu)))
    if not out:
        raise ValueError("no preset applies to this graph")
    return out


def _renorm_with_pins(u: GridFunction, mu: float) -> GridFunction:
    vals = np.array(u.values)
    vals[u.graph.dirichlet_dofs] = 0.0
    m = float(u.graph.quad_weights @ (vals * vals))
    if m <= 0.0:
        raise ValueError("initial profile has zero mass")
    return GridFunction(u.graph, vals * np.sqrt(mu / m), _checked=True)


def _flow(graph: MetricGraph, cfg: MinimizeConfig, vals0: np.ndarray,
          solver: HelmholtzSolver | None) -> dict:
    W = graph.quad_weights
    Wc = graph.core_weights
    S = graph.stiffness
    pins = graph.dirichlet_dofs
    mu = cfg.mu

    u = np.array(vals0, dtype=float)
    u[pins] = 0.0
    m = float(W @ (u * u))
    if m <= 0.0:
        raise ValueError("initial profile has zero mass")
    u *= np.sqrt(mu / m)

    def energy_of(v):
        Sv = S @ v
        return 0.5 * float(v @ Sv) - float(Wc @ (v ** 6)) / 6.0, Sv

    E, Su = energy_of(u)
    trace = [E]
    tau = cfg.step_init
    vanishing = False
    unbounded = False
    converged = False
    stalled = False
    max_drift = 0.0
    last_check_E = E
    it = 0

    while it < cfg.max_iter:
        it += 1
        e = Su - Wc * u ** 5
        # Residual of the constrained stationarity condition e = theta*2Wu;
        # preconditioning the raw derivative instead would stall on profiles
        # solving a rescaled equation.
        theta = float(u @ e) / (2.0 * mu)
        r = e - (2.0 * theta) * (W * u)
        if solver is not None:
            d = solver.apply(r)
        else:
            d = r / W
            d[pins] = 0.0

        # accept (almost) only strict decrease; the looser tol_energy slack
        # would let iterates random-walk at displacement ~sqrt(tol_energy)
        slack = min(cfg.tol_energy, 4.0 * np.finfo(float).eps * max(1.0, abs(E)))
        accepted = False
        while tau >= 1e-14:
            cand = u - tau * d
            cand[pins] = 0.0
            mc = float(W @ (cand * cand))
            if mc > 0.0:
                cand *= np.sqrt(mu / mc)
                Ec, Sc = energy_of(cand)
                if Ec <= E + slack:
                    accepted = True
                    break
            tau *= cfg.step_shrink
        if not accepted:
            stalled = True
            break

        u, E, Su = cand, Ec, Sc
        trace.append(E)
        tau = min(tau * cfg.step_grow, cfg.step_max)
        drift = abs(float(W @ (u * u)) / mu - 1.0)
        max_drift = max(max_drift, drift)

        if E < cfg.energy_floor:
            unbounded = True
            break

        if it % cfg.check_every == 0:
            e = Su - Wc * u ** 5
            theta = float(u @ e) / (2.0 * mu)
            proj = (e - (2.0 * theta) * (W * u)) / W
            proj[pins] = 0.0
            pg = np.sqrt(float(W @ (proj * proj)))
            if abs(E) <= 10.0 * cfg.tol_energy:
                uf = GridFunction(graph, u, _checked=True)
                if tail_mass_fraction(uf, cfg.tail_window_frac) > cfg.tail_mass_threshold:
                    vanishing = True
                    break
            if (last_check_E - E) <= cfg.tol_energy * cfg.check_every and pg <= cfg.tol_grad:
                converged = True
                break
            last_check_E = E

    if stalled:
        # could not decrease further: treat as converged at the floor of the
        # achievable resolution
        converged = True

    profile = GridFunction(graph, u, _checked=True)
    return {
        "profile": profile,
        "trace": np.asarray(trace),
        "energy": E,
        "iterations": it,
        "converged": converged,
        "vanishing": vanishing,
        "unbounded": unbounded,
        "max_drift": max_drift,
    }


def minimize(graph: MetricGraph, cfg: MinimizeConfig, init=None) -> MinimizeReport:
    """Run the normalized gradient flow; multistart over presets when no
    initial profile is given.

    ``init`` may be a GridFunction, a preset name from :func:`preset_inits`,
    or None (run every preset and keep the best outcome; a run that crossed
    the energy floor wins outright as the unboundedness indicator).
    """
    if isinstance(init, GridFunction):
        starts = [(None, init)]
    elif isinstance(init, str):
        table = dict(preset_inits(graph, cfg.mu))
        if init not in table:
            raise ValueError(f"unknown preset {init!r}; have {sorted(table)}")
        starts = [(init, table[init])]
    elif init is None:
        starts = preset_inits(graph, cfg.mu)
    else:
        raise TypeError("init must be a GridFunction, a preset name, or None")

    solver = HelmholtzSolver(graph, cfg.precond_sigma) if cfg.preconditioned else None
    best = None
    for name, u0 in starts:
        res = _flow(graph, cfg, u0.values, solver)
        res["preset"] = name
        if res["unbounded"]:
            best = res
            break
        if best is None or res["energy"] < best["energy"]:
            best = res

    profile = best["profile"]
    try:
        kres = kirchhoff_residual(profile)
    except ValueError:
        kres = float("nan")
    report = MinimizeReport(
        profile=profile,
        energy_trace=best["trace"],
        final_energy=best["energy"],
        lambda_est=lambda_estimate(profile),
        converged=best["converged"],
        vanishing_detected=best["vanishing"],
        unbounded_detected=best["unbounded"],
        tail_mass_fraction=tail_mass_fraction(profile, cfg.tail_window_frac),
        kirchhoff_res=kres,
        iterations=best["iterations"],
        max_mass_drift=best["max_drift"],
        preset=best["preset"],
        attain_tol=cfg.attain_tol,
    )
    if report.regime == "vanishing":
        report.vanishing_detected = True
    return report
