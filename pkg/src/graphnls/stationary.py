"""Independent stationary solver: shooting on the loop + analytic tail.

The stationary profile solves v'' = lam*v - v^5 on the loop [0, L] and decays
as w(x) = a*exp(-sqrt(lam) x) on the half-line, with continuity
v(0) = v(L) = a and derivative balance v'(0) - v'(L) + w'(0) = 0. Fixing lam,
the unknowns are the vertex data (a, b) = (v(0), v'(0)); a damped Newton
iteration drives the two residuals

    v(L) - a        and        v'(L) - (b - sqrt(lam)*a)

to zero. The half-line is handled in closed form, so this path carries no
truncation error and cross-validates the gradient-flow minimizer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import GridFunction, MetricGraph
from .minimize import MinimizeReport

__all__ = [
    "ShootingSolution",
    "ShootingError",
    "integrate_loop",
    "shoot",
    "sweep_lambda",
    "shoot_at_mass",
    "verify_against_minimizer",
    "CrossValidation",
]


class ShootingError(RuntimeError):
    """No stationary solution reachable from the given guess."""


class _Blowup(Exception):
    pass


@dataclass
class ShootingSolution:
    lam: float
    a: float           # vertex value v(0) = v(L) = w(0)
    b: float           # loop initial slope v'(0)
    loop_length: float
    profile_x: np.ndarray
    profile_v: np.ndarray
    profile_dv: np.ndarray
    match_value: float
    match_slope: float
    mass: float        # loop quadrature + exact tail a^2/(2 sqrt(lam))
    energy: float


def integrate_loop(lam: float, a: float, b: float, L: float, steps: int,
                   nonlinear: bool = True):
    """Classical fourth-order integration of v'' = lam*v - v^5 from (a, b).

    Returns (v(L), v'(L), profile) with profile of shape (steps+1, 2) holding
    v and v' samples. Raises on blow-up past the overflow guard.
    """
    if steps < 100:
        raise ValueError("steps must be >= 100")
    if L <= 0:
        raise ValueError("L must be positive")
    dx = L / steps
    guard = 1e6
    v = float(a)
    p = float(b)
    prof = np.empty((steps + 1, 2))
    prof[0] = (v, p)

    if nonlinear:
        def acc(x):
            return lam * x - x ** 5
    else:
        def acc(x):
            return lam * x

    for i in range(steps):
        k1v, k1p = p, acc(v)
        k2v, k2p = p + 0.5 * dx * k1p, acc(v + 0.5 * dx * k1v)
        k3v, k3p = p + 0.5 * dx * k2p, acc(v + 0.5 * dx * k2v)
        k4v, k4p = p + dx * k3p, acc(v + dx * k3v)
        v += dx * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0
        p += dx * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0
        if not (abs(v) < guard and abs(p) < guard * guard):
            raise _Blowup(f"orbit blew up at x ~ {(i + 1) * dx:.4f}")
        prof[i + 1] = (v, p)
    return v, p, prof


def _residual(lam, a, b, L, steps):
    vL, pL, _ = integrate_loop(lam, a, b, L, steps)
    return np.array([vL - a, pL - (b - np.sqrt(lam) * a)])


def _default_guess(lam: float, L: float):
    # fold of the solitary bump at the loop midpoint; the symmetric vertex
    # relation b = sqrt(lam)*a/2 follows from the derivative balance
    root = np.sqrt(lam)
    a0 = (3.0 * lam) ** 0.25 / np.sqrt(np.cosh(min(root * L, 700.0)))
    return a0, 0.5 * root * a0


def shoot(lam: float, L: float = 1.0, init_guess=None, *,
          steps: int = 2000, tol: float = 1e-10, max_iter: int = 50,
          fd_step: float = 1e-6) -> ShootingSolution:
    """Damped Newton on the vertex data (a, b) at fixed lam.

    The Jacobian uses central finite differences; steps are halved until the
    residual norm decreases. Raises :class:`ShootingError` on stagnation,
    blow-up, or collapse onto the trivial solution.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    x = np.array(_default_guess(lam, L) if init_guess is None else init_guess,
                 dtype=float)

    def F(z):
        try:
            return _residual(lam, z[0], z[1], L, steps)
        except _Blowup:
            return None

    f = F(x)
    if f is None:
        raise ShootingError("no solution from this guess: initial orbit blows up")
    fn = np.max(np.abs(f))
    for _ in range(max_iter):
        if fn <= tol:
            break
        J = np.empty((2, 2))
        ok = True
        for j in range(2):
            e = np.zeros(2)
            e[j] = fd_step * max(1.0, abs(x[j]))
            fp, fm = F(x + e), F(x - e)
            if fp is None or fm is None:
                ok = False
                break
            J[:, j] = (fp - fm) / (2.0 * e[j])
        if not ok:
            raise ShootingError("no solution from this guess: Jacobian probe blew up")
        try:
            delta = np.linalg.solve(J, f)
        except np.linalg.LinAlgError:
            raise ShootingError("no solution from this guess: singular Jacobian")
        s = 1.0
        while s > 2.0 ** -30:
            cand = x - s * delta
            fc = F(cand)
            if fc is not None and np.max(np.abs(fc)) < fn:
                x, f, fn = cand, fc, np.max(np.abs(fc))
                break
            s *= 0.5
        else:
            raise ShootingError("no solution from this guess: Newton stagnation")
    if fn > tol:
        raise ShootingError(f"no solution from this guess: residual {fn:.3e} > {tol}")

    a, b = float(x[0]), float(x[1])
    if a < 0.0:   # sign symmetry v -> -v; report the positive representative
        a, b = -a, -b
    if abs(a) < 1e-6:
        raise ShootingError("no solution from this guess: collapsed to zero")

    vL, pL, prof = integrate_loop(lam, a, b, L, steps)
    dx = L / steps
    xgrid = np.linspace(0.0, L, steps + 1)
    root = np.sqrt(lam)
    loop_mass = float(np.trapezoid(prof[:, 0] ** 2, dx=dx))
    tail_mass = a * a / (2.0 * root)
    kin_half = 0.5 * (float(np.trapezoid(prof[:, 1] ** 2, dx=dx)) + a * a * root / 2.0)
    nonlin = float(np.trapezoid(prof[:, 0] ** 6, dx=dx)) / 6.0
    return ShootingSolution(
        lam=lam,
        a=a,
        b=b,
        loop_length=L,
        profile_x=xgrid,
        profile_v=prof[:, 0].copy(),
        profile_dv=prof[:, 1].copy(),
        match_value=float(vL - a),
        match_slope=float(pL - (b - root * a)),
        mass=loop_mass + tail_mass,
        energy=kin_half - nonlin,
    )


def sweep_lambda(L: float, lams, *, steps: int = 2000, tol: float = 1e-10):
    """Shoot along a lam grid with warm-started guesses.

    Returns a list aligned with ``lams``; entries are ShootingSolution or None
    where no solution was found.
    """
    out = []
    prev = None
    for lam in lams:
        guesses = []
        if prev is not None:
            guesses.append((prev.a, prev.b))
        guesses.append(None)
        sol = None
        for g in guesses:
            try:
                sol = shoot(lam, L, g, steps=steps, tol=tol)
                break
            except ShootingError:
                continue
        out.append(sol)
        if sol is not None:
            prev = sol
    return out


def shoot_at_mass(mu: float, L: float = 1.0, *, lam_lo: float = 0.25,
                  lam_hi: float = 256.0, grid: int = 14, steps: int = 2000,
                  tol: float = 1e-10) -> ShootingSolution:
    """Find the stationary solution of prescribed mass by bisecting lam.

    Scans a geometric lam grid for a bracket where mass - mu changes sign,
    then bisects. Raises :class:`ShootingError` when no bracket exists in the
    scanned range.
    """
    lams = np.geomspace(lam_lo, lam_hi, grid)
    sols = sweep_lambda(L, lams, steps=steps, tol=tol)
    bracket = None
    for (l1, s1), (l2, s2) in zip(zip(lams, sols), zip(lams[1:], sols[1:])):
        if s1 is None or s2 is None:
            continue
        if (s1.mass - mu) * (s2.mass - mu) <= 0.0:
            bracket = (l1, s1, l2, s2)
            break
    if bracket is None:
        raise ShootingError(f"no lam bracket with mass {mu} in [{lam_lo}, {lam_hi}]")
    l1, s1, l2, s2 = bracket
    f1 = s1.mass - mu
    best = s1 if abs(f1) < abs(s2.mass - mu) else s2
    warm = s1
    for _ in range(80):
        lm = 0.5 * (l1 + l2)
        try:
            sm = shoot(lm, L, (warm.a, warm.b), steps=steps, tol=tol)
        except ShootingError:
            sm = shoot(lm, L, None, steps=steps, tol=tol)
        fm = sm.mass - mu
        warm = sm
        if abs(fm) < abs(best.mass - mu):
            best = sm
        if abs(fm) <= 1e-12 * max(1.0, mu) or (l2 - l1) < 1e-13 * lm:
            break
        if f1 * fm <= 0.0:
            l2 = lm
        else:
            l1, f1 = lm, fm
    return best


@dataclass
class CrossValidation:
    matched: bool
    distance: float
    lam: float
    reason: str = ""
    solution: ShootingSolution | None = None


def verify_against_minimizer(report: MinimizeReport, tol: float = 1e-3, *,
                             steps: int = 4000) -> CrossValidation:
    """Re-solve at the minimizer's multiplier and compare loop profiles.

    Seeds the Newton iteration from the report's vertex value and one-sided
    vertex slope, then returns the sup distance between the two loop profiles
    on the minimizer's grid. Requires a converged, non-vanishing report.
    """
    if not report.converged or report.vanishing_detected or report.unbounded_detected:
        raise ValueError("cross-validation needs a converged, non-vanishing report")
    lam = report.lambda_est
    if lam <= 0.0:
        return CrossValidation(False, np.inf, lam, "multiplier estimate not positive")
    graph = report.profile.graph
    loop, _tail, junction = graph.tadpole_parts()
    vals = report.profile.values[graph.edge_node_ids(loop)]
    sign = 1.0 if vals[0] >= 0.0 else -1.0
    vals = sign * vals
    h = graph.h
    a0 = float(vals[0])
    b0 = float((-3.0 * vals[0] + 4.0 * vals[1] - vals[2]) / (2.0 * h))
    L = graph.edges[loop].length
    try:
        sol = shoot(lam, L, (a0, b0), steps=steps)
    except ShootingError as err:
        return CrossValidation(False, np.inf, lam, str(err))
    x = graph.edge_x(loop)
    v_ref = np.interp(x, sol.profile_x, sol.profile_v)
    dist = float(np.max(np.abs(v_ref - vals)))
    return CrossValidation(dist <= tol, dist, lam, "", sol)
