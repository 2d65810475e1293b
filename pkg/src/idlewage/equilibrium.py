"""Enumeration of market equilibria for a fixed platform policy.

For a policy (price p, idle wage J, commission tau) an equilibrium is a
tuple (e, I, L, Q) that simultaneously satisfies

    Q = demand(p, T(I))            trips match demand
    L = I + (t + T(I)) * Q         labour balance (idle + busy drivers)
    e = (1 - tau) * p * Q / L      average trip earnings (0 when L = 0)
    L = supply(e, J)               drivers' participation

Parameterizing candidate states by the pickup time z > 0 turns the system
into a one-dimensional root problem: the labour-balance residual
``supply(e_z, J) - L1(z)`` is continuous, negative as z -> 0 and positive
as z -> inf whenever J > 0, so every equilibrium is a sign change.  The
solver scans a geometric z-grid for sign changes and refines each bracket
by bisection.

The same machinery is exposed in a vectorized form (a whole price grid and
idle-wage grid at once) which the grid-search optimizer uses; both paths
share the exact same arithmetic, so a single-policy call and the
corresponding optimizer cell agree bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    PeriodScenario,
    demand,
    idle_from_time,
    supply,
)

__all__ = [
    "PolicyPoint",
    "Equilibrium",
    "SolverConfig",
    "DEFAULT_SOLVER",
    "BracketingError",
    "residual",
    "find_equilibria",
    "zero_equilibrium",
    "equilibrium_at",
]


@dataclass(frozen=True)
class PolicyPoint:
    """One platform decision: trip price ($), idle wage ($/h), commission in [0, 1]."""

    price: float
    idle_wage: float
    commission: float

    def __post_init__(self):
        if self.price < 0:
            raise ValueError("price must be >= 0")
        if self.idle_wage < 0:
            raise ValueError("idle_wage must be >= 0")
        if not 0 <= self.commission <= 1:
            raise ValueError("commission must be in [0, 1]")


@dataclass(frozen=True)
class Equilibrium:
    """A feasible (e, I, L, Q) tuple plus the policy that induced it.

    earnings   : average trip earnings e, $/hour
    idle       : idle drivers I
    labour     : total connected drivers L
    throughput : served trips per hour Q
    pickup     : pickup time T in hours (inf for the shutdown equilibrium)
    """

    earnings: float
    idle: float
    labour: float
    throughput: float
    pickup: float
    policy: PolicyPoint


@dataclass(frozen=True)
class SolverConfig:
    """Scan window and tolerances for the bracketing solver.

    z_min, z_max : pickup-time scan window in hours
    scan_points  : size of the geometric scan grid
    bisect_tol   : bracket width at which bisection stops, hours
    tol_eq       : feasibility tolerance on the residuals, drivers
    """

    z_min: float = 1e-4
    z_max: float = 50.0
    scan_points: int = 4096
    bisect_tol: float = 1e-10
    tol_eq: float = 1e-8

    def __post_init__(self):
        if not 0 < self.z_min < self.z_max:
            raise ValueError("need 0 < z_min < z_max")
        if self.scan_points < 2:
            raise ValueError("scan_points must be >= 2")
        if self.bisect_tol <= 0 or self.tol_eq <= 0:
            raise ValueError("tolerances must be > 0")

    def z_grid(self) -> np.ndarray:
        return np.geomspace(self.z_min, self.z_max, self.scan_points)


DEFAULT_SOLVER = SolverConfig()


class BracketingError(RuntimeError):
    """No sign change found although J > 0 guarantees an equilibrium exists."""


def residual(s: PeriodScenario, pol: PolicyPoint, z):
    """Labour-balance residual supply(e_z, J) - L1(z) at pickup time z > 0.

    Accepts a scalar or array of z values; positive residual means more
    drivers are willing to work than the state z requires.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ValueError("pickup time z must be > 0")
    Q = demand(s.demand, pol.price, z)
    I = idle_from_time(s.pickup, z)
    L1 = I + (s.trip_time + z) * Q
    e = (1.0 - pol.commission) * pol.price * Q / L1
    r = supply(s.supply, e, pol.idle_wage) - L1
    return float(r) if np.ndim(r) == 0 else r


# ---------------------------------------------------------------------------
# Vectorized kernel
# ---------------------------------------------------------------------------
#
# Instead of the raw residual, the scan works with the sign-equivalent
# "wage margin"
#
#     W(p, z) = c * (L1/A)**(1/eps) - beta * e_z,    c = 1 + 1/eps
#
# which satisfies  residual > 0  <=>  J > W.  W is independent of J, so one
# (price x z) table of W serves the whole idle-wage grid: the cells where
# the residual changes sign for wage J are exactly the cells whose W-range
# straddles J.

_MAX_BISECT_ITER = 160


@dataclass
class PeriodTables:
    """Scan tables for one period over a fixed price grid (read-only)."""

    scenario: PeriodScenario
    cfg: SolverConfig
    p: np.ndarray        # (n_p,) price grid
    z: np.ndarray        # (n_z,) geometric pickup-time grid
    G: np.ndarray        # (n_p, n_z) untaxed earnings base p*Q/L1
    H: np.ndarray        # (n_p, n_z) supply margin c*(L1/A)**(1/eps)

    @staticmethod
    def build(s: PeriodScenario, p: np.ndarray, cfg: SolverConfig) -> "PeriodTables":
        p = np.asarray(p, dtype=float)
        z = cfg.z_grid()
        d, pk, sp = s.demand, s.pickup, s.supply
        iz = np.power(z / pk.k_T, 1.0 / pk.alpha_T)
        serve = s.trip_time + z
        E = np.exp(d.beta_p * p)[:, None] * np.exp(d.kappa + d.beta_T * z)[None, :]
        Q = d.lambda_max * (E / (1.0 + E))
        L1 = iz[None, :] + serve[None, :] * Q
        G = p[:, None] * Q / L1
        c = 1.0 + 1.0 / sp.elasticity
        H = c * np.power(L1 / sp.pool_size, 1.0 / sp.elasticity)
        return PeriodTables(s, cfg, p, z, G, H)


def _margin_and_residual(s: PeriodScenario, coef: float, J, p, z):
    """Pointwise wage margin W and residual at (p, z) for earnings weight coef.

    coef is risk_beta * (1 - tau); expressions mirror PeriodTables.build
    element for element.
    """
    d, pk, sp = s.demand, s.pickup, s.supply
    iz = np.power(z / pk.k_T, 1.0 / pk.alpha_T)
    E = np.exp(d.beta_p * p) * np.exp(d.kappa + d.beta_T * z)
    Q = d.lambda_max * (E / (1.0 + E))
    L1 = iz + (s.trip_time + z) * Q
    G = p * Q / L1
    c = 1.0 + 1.0 / sp.elasticity
    W = c * np.power(L1 / sp.pool_size, 1.0 / sp.elasticity) - coef * G
    resid = sp.pool_size * np.power((coef * G + J) / c, sp.elasticity) - L1
    return W, resid


@dataclass
class RootSet:
    """All bracketed equilibria of one (tau x price grid x wage grid) slice."""

    p_idx: np.ndarray    # (m,) index into the price grid
    j_idx: np.ndarray    # (m,) index into the wage grid
    z: np.ndarray        # (m,) refined pickup times


def solve_slice(tables: PeriodTables, j_values: np.ndarray, tau: float) -> RootSet:
    """Locate every labour-balance root for one commission value.

    Scans the margin table for cells whose value range straddles a wage
    grid point, then bisects each bracket until the bracket is narrower
    than ``bisect_tol`` and the true residual at the midpoint is within
    half of ``tol_eq``.
    """
    s, cfg = tables.scenario, tables.cfg
    j_values = np.asarray(j_values, dtype=float)
    coef = s.supply.risk_beta * (1.0 - tau)
    W = tables.H - coef * tables.G
    a, b = W[:, :-1], W[:, 1:]
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)

    # Cells bracketing at least one wage grid point: J in [lo, hi).
    cand = (hi > j_values[0]) & (lo < hi) & (lo <= j_values[-1])
    rows, cells = np.nonzero(cand)
    if rows.size:
        ia = np.searchsorted(j_values, lo[rows, cells], side="left")
        ib = np.searchsorted(j_values, hi[rows, cells], side="left")
        counts = ib - ia
        keep = counts > 0
        rows, cells, ia, counts = rows[keep], cells[keep], ia[keep], counts[keep]
    else:
        ia = counts = rows

    if rows.size == 0:
        return RootSet(np.empty(0, int), np.empty(0, int), np.empty(0))

    p_idx = np.repeat(rows, counts)
    cell_idx = np.repeat(cells, counts)
    offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    j_idx = np.repeat(ia, counts) + offsets

    p_arr = tables.p[p_idx]
    J_arr = j_values[j_idx]
    z_lo = tables.z[cell_idx]
    z_hi = tables.z[cell_idx + 1]

    # Confirm each bracket pointwise (insurance against any scan/refine
    # arithmetic mismatch) and keep the low-endpoint sign for bisection.
    w_lo, _ = _margin_and_residual(s, coef, J_arr, p_arr, z_lo)
    w_hi, _ = _margin_and_residual(s, coef, J_arr, p_arr, z_hi)
    s_lo = w_lo > J_arr
    crossing = s_lo != (w_hi > J_arr)
    p_idx, j_idx, p_arr, J_arr = p_idx[crossing], j_idx[crossing], p_arr[crossing], J_arr[crossing]
    z_lo, z_hi, s_lo = z_lo[crossing], z_hi[crossing], s_lo[crossing]
    if p_arr.size == 0:
        return RootSet(np.empty(0, int), np.empty(0, int), np.empty(0))

    # Bisect until the bracket is narrow and the residual at the accepted
    # midpoint is small; the accepted point itself is emitted.
    half_tol = 0.5 * cfg.tol_eq
    z_root = np.full(p_arr.shape, np.nan)
    settled = np.zeros(p_arr.shape, dtype=bool)
    for _ in range(_MAX_BISECT_ITER):
        mid = 0.5 * (z_lo + z_hi)
        stalled = (mid == z_lo) | (mid == z_hi)   # float spacing exhausted
        w_mid, r_mid = _margin_and_residual(s, coef, J_arr, p_arr, mid)
        ok = ((z_hi - z_lo) <= cfg.bisect_tol) & (np.abs(r_mid) <= half_tol)
        newly = (ok | stalled) & ~settled
        z_root[newly] = mid[newly]
        settled |= newly
        if np.all(settled):
            break
        toward_hi = (w_mid > J_arr) == s_lo
        z_lo = np.where(toward_hi & ~settled, mid, z_lo)
        z_hi = np.where(~toward_hi & ~settled, mid, z_hi)

    unsettled = ~settled
    if np.any(unsettled):
        z_root[unsettled] = 0.5 * (z_lo[unsettled] + z_hi[unsettled])
    _, r_final = _margin_and_residual(s, coef, J_arr, p_arr, z_root)
    keep = np.abs(r_final) <= cfg.tol_eq
    p_idx, j_idx, z_root = p_idx[keep], j_idx[keep], z_root[keep]

    # Merge duplicate detections of the same root from adjacent cells.
    if z_root.size > 1:
        order = np.lexsort((z_root, j_idx, p_idx))
        p_idx, j_idx, z_root = p_idx[order], j_idx[order], z_root[order]
        Q = demand(s.demand, tables.p[p_idx], z_root)
        same = (
            (p_idx[1:] == p_idx[:-1])
            & (j_idx[1:] == j_idx[:-1])
            & (np.abs(Q[1:] - Q[:-1]) <= cfg.tol_eq)
        )
        keep = np.concatenate(([True], ~same))
        p_idx, j_idx, z_root = p_idx[keep], j_idx[keep], z_root[keep]

    return RootSet(p_idx, j_idx, z_root)


def equilibrium_components(s: PeriodScenario, tau: float, p, z):
    """(T, I, Q, L, e) arrays for interior equilibria at pickup times z."""
    T = np.asarray(z, dtype=float)
    I = idle_from_time(s.pickup, T)
    Q = demand(s.demand, p, T)
    L = I + (s.trip_time + T) * Q
    e = (1.0 - tau) * p * Q / L
    return T, I, Q, L, e


def zero_equilibrium(pol: PolicyPoint) -> Equilibrium:
    """The shutdown equilibrium (0, 0, 0, 0); feasible exactly when J = 0."""
    return Equilibrium(0.0, 0.0, 0.0, 0.0, np.inf, pol)


def equilibrium_at(s: PeriodScenario, pol: PolicyPoint, z: float) -> Equilibrium:
    """The interior equilibrium whose pickup time is the balance root z."""
    T, I, Q, L, e = equilibrium_components(s, pol.commission, pol.price, float(z))
    return Equilibrium(float(e), float(I), float(L), float(Q), float(T), pol)


def find_equilibria(
    s: PeriodScenario, pol: PolicyPoint, cfg: SolverConfig = DEFAULT_SOLVER
) -> list[Equilibrium]:
    """All equilibria induced by a policy, sorted by ascending throughput.

    When J = 0 the shutdown equilibrium is always included.  When J > 0
    an equilibrium is guaranteed to exist; if the scan window contains no
    sign change a :class:`BracketingError` is raised so a too-narrow
    window never passes silently.
    """
    tables = PeriodTables.build(s, np.array([pol.price]), cfg)
    roots = solve_slice(tables, np.array([pol.idle_wage]), pol.commission)
    eqs = [equilibrium_at(s, pol, z) for z in roots.z]
    if pol.idle_wage == 0:
        eqs.append(zero_equilibrium(pol))
    elif not eqs:
        raise BracketingError(
            "find_equilibria: no labour-balance sign change in "
            f"[{cfg.z_min}, {cfg.z_max}] although J = {pol.idle_wage} > 0 "
            "guarantees an equilibrium; widen the scan window"
        )
    eqs.sort(key=lambda eq: eq.throughput)
    return eqs
