"""Exhaustive grid-search optimization of platform decisions.

Four regimes are covered: a single period; a day with fully flexible
per-hour idle wages (commission fixed at 1, where nothing is lost); a day
with one shared (J, tau); and a day with per-hour idle wages subject to a
minimum-wage constraint on a pair of cyclic hour blocks.

Every grid cell is evaluated through the bracketing equilibrium solver,
the objective-maximizing equilibrium is kept per cell, and ties between
cells break lexicographically on ascending (p, J, tau), so results are
deterministic for any degree of evaluation parallelism (grid cells are
pure and independent; reduction order is fixed).
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .equilibrium import (
    DEFAULT_SOLVER,
    BracketingError,
    Equilibrium,
    PeriodTables,
    PolicyPoint,
    SolverConfig,
    equilibrium_at,
    equilibrium_components,
    solve_slice,
    zero_equilibrium,
)
from .model import DayScenario, PeriodScenario
from .objectives import Objective, evaluate, profit_values, welfare_values

__all__ = [
    "GridSpec",
    "DaySchedule",
    "BlockConstraint",
    "Regime",
    "OptimResult",
    "SweepPoint",
    "InfeasibleError",
    "optimize_single_period",
    "sweep_idle_wage",
    "optimize_day_flexible",
    "value_vs_tau",
    "optimize_day_fixed",
    "admissible_blocks",
    "block_wage_max",
    "optimize_min_wage",
]


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    """Inclusive decimal grid lo, lo+step, ... with canonical float values."""
    n = int(np.floor((hi - lo) / step + 1e-9))
    return np.round(lo + np.arange(n + 1) * step, 10)


@dataclass(frozen=True)
class GridSpec:
    """Search grids for price, idle wage, and commission."""

    p_min: float = 0.0
    p_max: float = 5.0
    p_step: float = 0.01
    j_min: float = 0.0
    j_max: float = 2.8
    j_step: float = 0.05
    tau_step: float = 0.05

    def __post_init__(self):
        for name in ("p_step", "j_step", "tau_step"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.p_max < self.p_min or self.j_max < self.j_min:
            raise ValueError("grid ranges must be nonempty")
        if self.tau_values()[-1] != 1.0:
            raise ValueError("tau grid must cover [0, 1] inclusive of both endpoints")

    def p_values(self) -> np.ndarray:
        return _grid(self.p_min, self.p_max, self.p_step)

    def j_values(self) -> np.ndarray:
        return _grid(self.j_min, self.j_max, self.j_step)

    def tau_values(self) -> np.ndarray:
        return _grid(0.0, 1.0, self.tau_step)


@dataclass(frozen=True)
class DaySchedule:
    """Per-period prices and idle wages sharing a single daily commission."""

    prices: tuple[float, ...]
    idle_wages: tuple[float, ...]
    commission: float

    def __post_init__(self):
        if len(self.prices) != len(self.idle_wages):
            raise ValueError("prices and idle_wages must have equal length")
        if any(p < 0 for p in self.prices) or any(j < 0 for j in self.idle_wages):
            raise ValueError("schedule entries must be >= 0")
        if not 0 <= self.commission <= 1:
            raise ValueError("commission must be in [0, 1]")


@dataclass(frozen=True)
class BlockConstraint:
    """Two disjoint cyclic hour blocks whose idle wages must sum to j_min."""

    b1: int = 4
    b2: int = 4
    j_min: float = 0.0

    def __post_init__(self):
        if self.b1 < 1 or self.b2 < 1:
            raise ValueError("block lengths must be >= 1")
        if self.b1 + self.b2 > 24:
            raise ValueError("blocks cannot cover more than the 24-hour day")
        if self.j_min < 0:
            raise ValueError("j_min must be >= 0")


class Regime(enum.Enum):
    SINGLE_PERIOD = "single"
    FLEXIBLE_J = "flexible"
    FIXED_J_TAU = "fixed"
    MIN_WAGE_BLOCKS = "minwage"


@dataclass(frozen=True)
class OptimResult:
    regime: Regime
    objective: Objective
    best_schedule: DaySchedule | PolicyPoint
    equilibria: tuple[Equilibrium, ...]
    value: float


@dataclass(frozen=True)
class SweepPoint:
    """Best attainable value at one idle wage, optimizing price and commission."""

    idle_wage: float
    value: float
    best_tau: float
    best_price: float
    tau1_optimal: bool


class InfeasibleError(RuntimeError):
    """The min-wage constraint admits no schedule worth operating."""


def _parallel_map(fn, items, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# Cell evaluation
# ---------------------------------------------------------------------------


@dataclass
class SliceBest:
    """Per-idle-wage winners over the price grid, for one commission value.

    z is the winning equilibrium's pickup-time root; NaN marks the
    shutdown equilibrium (only possible at J = 0).
    """

    values: np.ndarray   # (n_j,)
    p_idx: np.ndarray    # (n_j,)
    z: np.ndarray        # (n_j,)


def _best_over_prices(
    tables: PeriodTables, j_values: np.ndarray, tau: float, obj: Objective
) -> SliceBest:
    """Evaluate every (p, J) cell at one tau and keep the best price per J.

    Within a cell the objective-maximizing equilibrium is selected (ties:
    smallest throughput, then smallest labour); across prices ties go to
    the smallest price.
    """
    s = tables.scenario
    roots = solve_slice(tables, j_values, tau)
    n_p, n_j = tables.p.size, j_values.size
    V = np.full((n_j, n_p), -np.inf)
    Z = np.full((n_j, n_p), np.nan)
    if roots.z.size:
        p_arr = tables.p[roots.p_idx]
        T, I, Q, L, e = equilibrium_components(s, tau, p_arr, roots.z)
        if obj is Objective.PROFIT:
            vals = profit_values(tau, p_arr, Q, j_values[roots.j_idx], L)
        else:
            vals = welfare_values(s, p_arr, T, Q, L)
        cell = roots.j_idx * n_p + roots.p_idx
        order = np.lexsort((L, Q, -vals, cell))
        first = np.ones(order.size, dtype=bool)
        first[1:] = cell[order][1:] != cell[order][:-1]
        sel = order[first]
        V.flat[cell[sel]] = vals[sel]
        Z.flat[cell[sel]] = roots.z[sel]

    for j in np.nonzero(j_values == 0.0)[0]:
        # The shutdown equilibrium is feasible at J = 0 and wins value ties
        # (its throughput 0 is minimal).
        zero_wins = V[j] <= 0.0
        V[j, zero_wins] = 0.0
        Z[j, zero_wins] = np.nan

    if np.any(np.isinf(V[j_values > 0.0])):
        raise BracketingError(
            "grid evaluation: a cell with J > 0 produced no equilibrium in the "
            "scan window; widen SolverConfig.z_min/z_max"
        )

    best_p = np.argmax(V, axis=1)
    rows = np.arange(n_j)
    return SliceBest(V[rows, best_p], best_p, Z[rows, best_p])


def _winner_equilibrium(
    s: PeriodScenario, p: float, J: float, tau: float, z: float
) -> Equilibrium:
    pol = PolicyPoint(float(p), float(J), float(tau))
    if np.isnan(z):
        return zero_equilibrium(pol)
    return equilibrium_at(s, pol, z)


# ---------------------------------------------------------------------------
# Regimes
# ---------------------------------------------------------------------------


def optimize_single_period(
    s: PeriodScenario,
    obj: Objective,
    g: GridSpec = GridSpec(),
    cfg: SolverConfig = DEFAULT_SOLVER,
    threads: int = 1,
) -> OptimResult:
    """Maximize the objective over the full (p, J, tau) grid for one period."""
    p_vals, j_vals, tau_vals = g.p_values(), g.j_values(), g.tau_values()
    tables = PeriodTables.build(s, p_vals, cfg)
    slices = _parallel_map(
        lambda tau: _best_over_prices(tables, j_vals, tau, obj), list(tau_vals), threads
    )
    best_key, best = None, None
    for ti, sl in enumerate(slices):
        for ji in range(j_vals.size):
            key = (-sl.values[ji], p_vals[sl.p_idx[ji]], j_vals[ji], tau_vals[ti])
            if best_key is None or key < best_key:
                best_key, best = key, (ti, ji)
    ti, ji = best
    sl = slices[ti]
    eq = _winner_equilibrium(s, p_vals[sl.p_idx[ji]], j_vals[ji], tau_vals[ti], sl.z[ji])
    value = evaluate(obj, s, eq)
    return OptimResult(Regime.SINGLE_PERIOD, obj, eq.policy, (eq,), value)


def sweep_idle_wage(
    s: PeriodScenario,
    obj: Objective,
    J_values,
    g: GridSpec = GridSpec(),
    cfg: SolverConfig = DEFAULT_SOLVER,
    threads: int = 1,
    tie_tol: float = 1e-9,
) -> list[SweepPoint]:
    """Best value per idle wage when price and commission are optimized.

    Each point is flagged when tau = 1 attains the per-J maximum within
    ``tie_tol`` (relative to the value scale).
    """
    j_vals = np.asarray(J_values, dtype=float)
    if np.any(j_vals < g.j_min) or np.any(j_vals > g.j_max):
        raise ValueError("J_values must lie within the grid's idle-wage range")
    p_vals, tau_vals = g.p_values(), g.tau_values()
    tables = PeriodTables.build(s, p_vals, cfg)
    slices = _parallel_map(
        lambda tau: _best_over_prices(tables, j_vals, tau, obj), list(tau_vals), threads
    )
    tau1 = int(np.nonzero(tau_vals == 1.0)[0][0])
    out = []
    for ji, J in enumerate(j_vals):
        best_key = None
        for ti in range(tau_vals.size):
            sl = slices[ti]
            # ties: smallest price, then smallest commission
            key = (-sl.values[ji], p_vals[sl.p_idx[ji]], tau_vals[ti])
            if best_key is None or key < best_key:
                best_key = key
        best_val = -best_key[0]
        tol = tie_tol * max(1.0, abs(best_val))
        out.append(
            SweepPoint(
                idle_wage=float(J),
                value=float(best_val),
                best_tau=float(best_key[2]),
                best_price=float(best_key[1]),
                tau1_optimal=bool(slices[tau1].values[ji] >= best_val - tol),
            )
        )
    return out


def _flexible_period(
    s: PeriodScenario, obj: Objective, g: GridSpec, cfg: SolverConfig
) -> tuple[float, float, float, float]:
    """Best (p, J) at tau = 1 for one period: (price, wage, z, value)."""
    p_vals, j_vals = g.p_values(), g.j_values()
    tables = PeriodTables.build(s, p_vals, cfg)
    sl = _best_over_prices(tables, j_vals, 1.0, obj)
    best_key, best_ji = None, None
    for ji in range(j_vals.size):
        key = (-sl.values[ji], p_vals[sl.p_idx[ji]], j_vals[ji])
        if best_key is None or key < best_key:
            best_key, best_ji = key, ji
    return p_vals[sl.p_idx[best_ji]], j_vals[best_ji], sl.z[best_ji], -best_key[0]


def optimize_day_flexible(
    d: DayScenario,
    obj: Objective,
    g: GridSpec = GridSpec(),
    cfg: SolverConfig = DEFAULT_SOLVER,
    threads: int = 1,
) -> OptimResult:
    """Fully flexible per-period idle wage; commission pinned at 1.

    With a per-period J the day decouples and paying drivers only through
    the idle wage is optimal, so each period is optimized independently
    over (p, J) at tau = 1.
    """
    picks = _parallel_map(
        lambda s: _flexible_period(s, obj, g, cfg), list(d.periods), threads
    )
    eqs = tuple(
        _winner_equilibrium(s, p, J, 1.0, z)
        for s, (p, J, z, _) in zip(d.periods, picks)
    )
    value = float(sum(evaluate(obj, s, eq) for s, eq in zip(d.periods, eqs)))
    schedule = DaySchedule(
        prices=tuple(float(p) for p, _, _, _ in picks),
        idle_wages=tuple(float(J) for _, J, _, _ in picks),
        commission=1.0,
    )
    return OptimResult(Regime.FLEXIBLE_J, obj, schedule, eqs, value)


def value_vs_tau(
    d: DayScenario,
    obj: Objective,
    g: GridSpec = GridSpec(),
    cfg: SolverConfig = DEFAULT_SOLVER,
    threads: int = 1,
) -> list[tuple[float, float]]:
    """Total day value per commission, optimizing (p, J) per period."""
    p_vals, j_vals, tau_vals = g.p_values(), g.j_values(), g.tau_values()

    def period_curve(s: PeriodScenario) -> np.ndarray:
        tables = PeriodTables.build(s, p_vals, cfg)
        return np.array(
            [
                _best_over_prices(tables, j_vals, tau, obj).values.max()
                for tau in tau_vals
            ]
        )

    unique = list(dict.fromkeys(d.periods))
    curves = dict(zip(unique, _parallel_map(period_curve, unique, threads)))
    total = np.sum([curves[s] for s in d.periods], axis=0)
    return [(float(t), float(v)) for t, v in zip(tau_vals, total)]


def _fixed_period_matrices(
    s: PeriodScenario, obj: Objective, g: GridSpec, cfg: SolverConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(value, price-index, z) matrices over (tau, J) cells for one period."""
    p_vals, j_vals, tau_vals = g.p_values(), g.j_values(), g.tau_values()
    tables = PeriodTables.build(s, p_vals, cfg)
    V = np.empty((tau_vals.size, j_vals.size))
    P = np.empty_like(V, dtype=int)
    Z = np.empty_like(V)
    for ti, tau in enumerate(tau_vals):
        sl = _best_over_prices(tables, j_vals, tau, obj)
        V[ti], P[ti], Z[ti] = sl.values, sl.p_idx, sl.z
    return V, P, Z


def optimize_day_fixed(
    d: DayScenario,
    obj: Objective,
    g: GridSpec = GridSpec(),
    cfg: SolverConfig = DEFAULT_SOLVER,
    threads: int = 1,
) -> OptimResult:
    """One (J, tau) shared by the whole day, per-period prices free."""
    p_vals, j_vals, tau_vals = g.p_values(), g.j_values(), g.tau_values()
    per_period = _parallel_map(
        lambda s: _fixed_period_matrices(s, obj, g, cfg), list(d.periods), threads
    )
    total = np.sum([V for V, _, _ in per_period], axis=0)
    best_key, best = None, None
    for ti in range(tau_vals.size):
        for ji in range(j_vals.size):
            key = (-total[ti, ji], j_vals[ji], tau_vals[ti])
            if best_key is None or key < best_key:
                best_key, best = key, (ti, ji)
    ti, ji = best
    eqs = tuple(
        _winner_equilibrium(s, p_vals[P[ti, ji]], j_vals[ji], tau_vals[ti], Z[ti, ji])
        for s, (_, P, Z) in zip(d.periods, per_period)
    )
    value = float(sum(evaluate(obj, s, eq) for s, eq in zip(d.periods, eqs)))
    schedule = DaySchedule(
        prices=tuple(eq.policy.price for eq in eqs),
        idle_wages=tuple(float(j_vals[ji]) for _ in eqs),
        commission=float(tau_vals[ti]),
    )
    return OptimResult(Regime.FIXED_J_TAU, obj, schedule, eqs, value)


# ---------------------------------------------------------------------------
# Cyclic wage blocks and the minimum-wage regime
# ---------------------------------------------------------------------------


def _block_indices(h: int, b: int) -> list[int]:
    """0-based period indices of the b-hour block starting at hour h (1-based)."""
    return [(h - 1 + k) % 24 for k in range(b)]


def admissible_blocks(b1: int, b2: int) -> set[tuple[int, int]]:
    """Start-hour pairs (h1, h2) whose cyclic blocks do not overlap."""
    pairs = set()
    for h1 in range(1, 25):
        block1 = set(_block_indices(h1, b1))
        for h2 in range(1, 25):
            if block1.isdisjoint(_block_indices(h2, b2)):
                pairs.add((h1, h2))
    return pairs


def block_wage_max(J, b1: int = 4, b2: int = 4) -> tuple[float, tuple[int, int]]:
    """Maximum two-block idle-wage sum over admissible start-hour pairs.

    Ties break on the lexicographically smallest (h1, h2).
    """
    J = np.asarray(J, dtype=float)
    if J.shape != (24,):
        raise ValueError("block_wage_max needs a 24-hour wage vector")
    if np.any(J < 0):
        raise ValueError("idle wages must be >= 0")
    best_key = None
    for h1, h2 in sorted(admissible_blocks(b1, b2)):
        total = J[_block_indices(h1, b1)].sum() + J[_block_indices(h2, b2)].sum()
        key = (-total, h1, h2)
        if best_key is None or key < best_key:
            best_key = key
    if best_key is None:
        raise ValueError(f"no admissible block pair for lengths ({b1}, {b2})")
    return -best_key[0], (best_key[1], best_key[2])


def optimize_min_wage(
    d: DayScenario,
    obj: Objective,
    g: GridSpec = GridSpec(),
    c: BlockConstraint = BlockConstraint(),
    cfg: SolverConfig = DEFAULT_SOLVER,
    threads: int = 1,
) -> OptimResult:
    """Flexible per-hour wages subject to a two-block minimum-wage floor.

    Heuristic: solve every period independently (tau = 1); locate the
    admissible block pair maximizing the unconstrained wage sum; if that
    sum falls short of j_min, scale the block wages uniformly up to the
    floor and re-optimize prices in the affected periods.

    Raises :class:`InfeasibleError` when the constrained day is worth less
    than shutting down.
    """
    if len(d.periods) != 24:
        raise ValueError("the block-constrained regime needs a 24-period day")
    flex = optimize_day_flexible(d, obj, g, cfg, threads)
    assert isinstance(flex.best_schedule, DaySchedule)
    J0 = np.asarray(flex.best_schedule.idle_wages)
    m0, pair = block_wage_max(J0, c.b1, c.b2)
    if m0 >= c.j_min:
        if flex.value < 0:
            raise InfeasibleError(
                "optimize_min_wage: best constrained schedule is worth less than shutdown"
            )
        return OptimResult(
            Regime.MIN_WAGE_BLOCKS, obj, flex.best_schedule, flex.equilibria, flex.value
        )

    hours = _block_indices(pair[0], c.b1) + _block_indices(pair[1], c.b2)
    J_new = J0.copy()
    base = J0[hours].sum()
    if base > 0:
        scale = c.j_min / base
        J_new[hours] = J0[hours] * scale
        while J_new[hours].sum() < c.j_min:
            scale = np.nextafter(scale, np.inf)
            J_new[hours] = J0[hours] * scale
    else:
        J_new[hours] = c.j_min / len(hours)

    p_vals = g.p_values()
    prices = list(flex.best_schedule.prices)
    eqs = list(flex.equilibria)
    for h in hours:
        s = d.periods[h]
        tables = PeriodTables.build(s, p_vals, cfg)
        try:
            sl = _best_over_prices(tables, np.array([J_new[h]]), 1.0, obj)
        except BracketingError as exc:
            # The scaled wage floods the market past the scan window's
            # million-drivers-at-instant-pickup end: certainly worth less
            # than shutting down.
            raise InfeasibleError(
                f"optimize_min_wage: scaled block wage {J_new[h]:.3g} pushes the "
                "equilibrium outside the economic range; constraint infeasible"
            ) from exc
        prices[h] = float(p_vals[sl.p_idx[0]])
        eqs[h] = _winner_equilibrium(s, prices[h], J_new[h], 1.0, sl.z[0])

    value = float(sum(evaluate(obj, s, eq) for s, eq in zip(d.periods, eqs)))
    if value < 0:
        raise InfeasibleError(
            "optimize_min_wage: best constrained schedule is worth less than shutdown"
        )
    certified, _ = block_wage_max(J_new, c.b1, c.b2)
    assert certified >= c.j_min
    schedule = DaySchedule(
        prices=tuple(prices),
        idle_wages=tuple(float(j) for j in J_new),
        commission=1.0,
    )
    return OptimResult(Regime.MIN_WAGE_BLOCKS, obj, schedule, tuple(eqs), value)
