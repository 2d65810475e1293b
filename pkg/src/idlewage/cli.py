"""Command-line front end: equilibria, policy optimization, experiment reproduction.

Exit codes: 0 success, 2 usage error, 3 infeasible minimum-wage constraint.
Human-readable tables go to stdout, machine-readable CSV only to --out
files, progress and cell counts to stderr.  Runs are deterministic for any
--threads value.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .equilibrium import BracketingError, PolicyPoint, find_equilibria
from .model import DayScenario, demand, supply
from .objectives import Objective, evaluate
from .optimize import (
    BlockConstraint,
    GridSpec,
    InfeasibleError,
    OptimResult,
    block_wage_max,
    optimize_day_fixed,
    optimize_day_flexible,
    optimize_min_wage,
    optimize_single_period,
    sweep_idle_wage,
    value_vs_tau,
)
from .analytic import (
    TwoPeriodExample,
    case_a_idle_only,
    case_b_no_idle,
    case_c_joint,
    flexible_optimum,
)
from .scenario import (
    ParseError,
    ResultTable,
    ScenarioConfig,
    ValidationError,
    default_config,
    emit_table,
    load_config,
    scenario_hash,
    two_period_day,
)

# De-facto lattice of the published shared-(J, tau) table; its entries are
# all multiples of 0.1 although the surrounding text claims 0.05 steps.
TABLE2_GRID = dict(j_step=0.1, tau_step=0.1)
TABLE2_AB = [(3.5, 44.0), (4.0, 44.5), (4.5, 45.0), (5.0, 45.5), (5.5, 46.0)]
TABLE2_BETAS = [0.2, 0.35, 0.5, 0.65, 0.8, 0.95]

FIG1_BETAS = TABLE2_BETAS
FIG2_BETAS = [0.2, 0.5, 0.95]
FIG4_BETAS = [0.2, 0.95, 1.0]
FIG5_BETA = 0.25
FIG5_JMIN = [0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0]


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _default_threads() -> int:
    env = os.environ.get("IDLEWAGE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _objective(name: str) -> Objective:
    return Objective.PROFIT if name == "profit" else Objective.WELFARE


def _meta(cfg: ScenarioConfig, regime: str, objective: str) -> dict[str, str]:
    return {
        "regime": regime,
        "objective": objective,
        "scenario": scenario_hash(cfg),
        "tool": f"idlewage {__version__}",
    }


def _print_table(header: list[str], rows: list[list]) -> None:
    widths = [
        max(len(str(h)), *(len(str(r[i])) for r in rows)) if rows else len(str(h))
        for i, h in enumerate(header)
    ]
    print("  ".join(str(h).ljust(w) for h, w in zip(header, widths)))
    for r in rows:
        print("  ".join(str(c).ljust(w) for c, w in zip(r, widths)))


def _fmt6(x: float) -> str:
    return format(float(x), ".6g")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_equilibrium(args, cfg: ScenarioConfig) -> int:
    s = cfg.period(args.hour)
    pol = PolicyPoint(args.p, args.J, args.tau)
    eqs = find_equilibria(s, pol, cfg.solver)
    _progress(f"equilibrium: hour {args.hour}, {len(eqs)} equilibria")
    if args.out:
        cols = {
            "e": [eq.earnings for eq in eqs],
            "I": [eq.idle for eq in eqs],
            "L": [eq.labour for eq in eqs],
            "Q": [eq.throughput for eq in eqs],
            "T": [eq.pickup for eq in eqs],
            "profit": [evaluate(Objective.PROFIT, s, eq) for eq in eqs],
            "welfare": [evaluate(Objective.WELFARE, s, eq) for eq in eqs],
        }
        emit_table(ResultTable(cols, _meta(cfg, "equilibrium", "both")), args.out)
        _progress(f"wrote {args.out}")
        return 0
    rows = []
    for eq in eqs:
        r_demand = eq.throughput - demand(s.demand, pol.price, eq.pickup)
        r_balance = eq.labour - (eq.idle + (s.trip_time + eq.pickup) * eq.throughput)
        if not np.isfinite(eq.pickup):
            r_balance = eq.labour - eq.idle  # (t + inf) * 0 = 0 for the shutdown state
        r_earn = eq.earnings - (
            (1 - pol.commission) * pol.price * eq.throughput / eq.labour
            if eq.labour > 0
            else 0.0
        )
        r_supply = eq.labour - supply(s.supply, eq.earnings, pol.idle_wage)
        rows.append(
            [_fmt6(v) for v in (eq.earnings, eq.idle, eq.labour, eq.throughput, eq.pickup)]
            + [format(r, ".3e") for r in (r_demand, r_balance, r_earn, r_supply)]
            + [_fmt6(evaluate(Objective.PROFIT, s, eq)), _fmt6(evaluate(Objective.WELFARE, s, eq))]
        )
    _print_table(
        ["e", "I", "L", "Q", "T", "res_demand", "res_balance", "res_earnings", "res_supply",
         "profit", "welfare"],
        rows,
    )
    return 0


def _cmd_sweep_j(args, cfg: ScenarioConfig) -> int:
    s = cfg.period(args.hour)
    obj = _objective(args.objective)
    g = cfg.grid
    j_vals = g.j_values()
    _progress(
        f"sweep-j: hour {args.hour}, {j_vals.size} wages x {g.tau_values().size} "
        f"commissions x {g.p_values().size} prices"
    )
    curve = sweep_idle_wage(s, obj, j_vals, g, cfg.solver, threads=args.threads)
    cols = {
        "J": [pt.idle_wage for pt in curve],
        "best_value": [pt.value for pt in curve],
        "best_tau": [pt.best_tau for pt in curve],
        "best_price": [pt.best_price for pt in curve],
        "tau1_optimal": [pt.tau1_optimal for pt in curve],
    }
    if args.out:
        emit_table(ResultTable(cols, _meta(cfg, "sweep-j", args.objective)), args.out)
        _progress(f"wrote {args.out}")
    else:
        _print_table(list(cols), [[_fmt6(c) if not isinstance(c, bool) else int(c)
                                   for c in row] for row in zip(*cols.values())])
    return 0


def _schedule_rows(d: DayScenario, res: OptimResult) -> tuple[list[str], list[list]]:
    sch = res.best_schedule
    header = ["hour", "price", "J", "tau", "e", "L", "Q", "T", "value"]
    rows = []
    for h, (s, eq) in enumerate(zip(d.periods, res.equilibria), start=1):
        rows.append(
            [h, _fmt6(sch.prices[h - 1]), _fmt6(sch.idle_wages[h - 1]), _fmt6(sch.commission),
             _fmt6(eq.earnings), _fmt6(eq.labour), _fmt6(eq.throughput), _fmt6(eq.pickup),
             _fmt6(evaluate(res.objective, s, eq))]
        )
    return header, rows


def _emit_schedule(args, cfg, d: DayScenario, res: OptimResult, regime: str) -> None:
    if args.out:
        sch = res.best_schedule
        cols = {
            "hour": list(range(1, len(d.periods) + 1)),
            "price": list(sch.prices),
            "J": list(sch.idle_wages),
            "tau": [sch.commission] * len(d.periods),
            "value": [evaluate(res.objective, s, eq) for s, eq in zip(d.periods, res.equilibria)],
        }
        emit_table(ResultTable(cols, _meta(cfg, regime, res.objective.value)), args.out)
        _progress(f"wrote {args.out}")
    else:
        header, rows = _schedule_rows(d, res)
        _print_table(header, rows)
    print(f"total {res.objective.value}: {res.value:.6f}")


def _cmd_optimize(args, cfg: ScenarioConfig) -> int:
    obj = _objective(args.objective)
    g, solver = cfg.grid, cfg.solver
    n_cells = g.p_values().size * g.j_values().size * g.tau_values().size
    if args.regime == "single":
        _progress(f"optimize single: hour {args.hour}, {n_cells} cells")
        res = optimize_single_period(cfg.period(args.hour), obj, g, solver, args.threads)
        pol = res.best_schedule
        if args.out:
            cols = {"hour": [args.hour], "price": [pol.price], "J": [pol.idle_wage],
                    "tau": [pol.commission], "value": [res.value]}
            emit_table(ResultTable(cols, _meta(cfg, "single", args.objective)), args.out)
            _progress(f"wrote {args.out}")
        print(
            f"hour {args.hour} {args.objective}: p*={pol.price:.6g} J*={pol.idle_wage:.6g} "
            f"tau*={pol.commission:.6g} value={res.value:.6f}"
        )
        return 0
    d = cfg.day()
    if args.regime == "flexible":
        _progress(f"optimize flexible: 24 periods x {g.p_values().size * g.j_values().size} cells")
        res = optimize_day_flexible(d, obj, g, solver, args.threads)
    elif args.regime == "fixed":
        _progress(f"optimize fixed: 24 periods x {n_cells} cells")
        res = optimize_day_fixed(d, obj, g, solver, args.threads)
    else:
        c = BlockConstraint(cfg.blocks.b1, cfg.blocks.b2, args.jmin)
        _progress(f"optimize minwage: blocks ({c.b1}, {c.b2}), floor {c.j_min}")
        res = optimize_min_wage(d, obj, g, c, solver, args.threads)
        m, pair = block_wage_max(res.best_schedule.idle_wages, c.b1, c.b2)
        _progress(f"certified block wage sum {m:.6g} >= {c.j_min} at blocks {pair}")
    _emit_schedule(args, cfg, d, res, args.regime)
    return 0


def _cmd_value_vs_tau(args, cfg: ScenarioConfig) -> int:
    obj = _objective(args.objective)
    d = cfg.day()
    _progress(f"value-vs-tau: 24 periods x {cfg.grid.tau_values().size} commissions")
    curve = value_vs_tau(d, obj, cfg.grid, cfg.solver, args.threads)
    cols = {"tau": [t for t, _ in curve], "total_value": [v for _, v in curve]}
    if args.out:
        emit_table(ResultTable(cols, _meta(cfg, "value-vs-tau", args.objective)), args.out)
        _progress(f"wrote {args.out}")
    else:
        _print_table(["tau", "total_value"], [[_fmt6(t), _fmt6(v)] for t, v in curve])
    return 0


def _table2_grid(cfg: ScenarioConfig) -> GridSpec:
    import dataclasses

    return dataclasses.replace(cfg.grid, **TABLE2_GRID)


def _cmd_table2(args, cfg: ScenarioConfig) -> int:
    obj = _objective(args.objective)
    g = _table2_grid(cfg)
    combos = (
        [(b, a4, a19) for b in TABLE2_BETAS for a4, a19 in TABLE2_AB]
        if args.all
        else [(args.beta, args.A4, args.A19)]
    )
    _progress(f"table2: {len(combos)} rows, {g.j_values().size * g.tau_values().size} cells each")
    rows = []
    for b, a4, a19 in combos:
        res = optimize_day_fixed(two_period_day(b, a4, a19), obj, g, cfg.solver, args.threads)
        sch = res.best_schedule
        rows.append([b, a4, a19, sch.idle_wages[0], sch.commission, res.value])
        _progress(f"  beta={b} A=({a4},{a19}): J={sch.idle_wages[0]} tau={sch.commission} "
                  f"value={res.value:.4f}")
    if args.out:
        cols = {
            "beta": [r[0] for r in rows], "A4": [r[1] for r in rows],
            "A19": [r[2] for r in rows], "J": [r[3] for r in rows],
            "tau": [r[4] for r in rows], "value": [r[5] for r in rows],
        }
        emit_table(ResultTable(cols, _meta(cfg, "table2", args.objective)), args.out)
        _progress(f"wrote {args.out}")
    else:
        _print_table(
            ["beta", "A4", "A19", "J", "tau", "value"],
            [[_fmt6(c) for c in r] for r in rows],
        )
    return 0


def _cmd_analytic(args, cfg: ScenarioConfig) -> int:
    from .analytic import _profit_high, _profit_low

    ex = TwoPeriodExample(args.epsilon)
    flex = flexible_optimum(ex)
    a, b, c = case_a_idle_only(ex), case_b_no_idle(ex), case_c_joint(ex)
    # flexible rows report the per-period pieces; the other cases share (tau, J)
    rows = [
        ("flexible_high", flex["J_high"], 1.0, _profit_high(ex.epsilon, 1.0, flex["J_high"])),
        ("flexible_low", flex["J_low"], 1.0, _profit_low(ex.epsilon, 1.0, flex["J_low"])),
        ("a_idle_only", a["J"], 1.0, a["profit"]),
        ("b_no_idle", 0.0, b["tau"], b["profit"]),
        ("c_joint", c["J"], c["tau"], c["profit"]),
    ]
    if args.out:
        cols = {
            "epsilon": [args.epsilon] * len(rows),
            "case": [r[0] for r in rows],
            "J": [r[1] for r in rows],
            "tau": [r[2] for r in rows],
            "profit": [r[3] for r in rows],
        }
        emit_table(ResultTable(cols, _meta(cfg, "analytic", "profit")), args.out)
        _progress(f"wrote {args.out}")
    else:
        print(f"epsilon = {args.epsilon}")
        _print_table(
            ["case", "J", "tau", "profit"],
            [[r[0], _fmt6(r[1]), _fmt6(r[2]), _fmt6(r[3])] for r in rows],
        )
    return 0


def _cmd_reproduce_all(args, cfg: ScenarioConfig) -> int:
    import dataclasses

    os.makedirs(args.outdir, exist_ok=True)
    threads = args.threads
    g, solver = cfg.grid, cfg.solver

    def path(name):
        return os.path.join(args.outdir, name)

    # fig1: single-period idle-wage sweep at the evening peak
    _progress("fig1: single-period sweep per beta and objective")
    cols = {k: [] for k in ("beta", "objective", "J", "best_value", "best_tau", "tau1_optimal")}
    for b in FIG1_BETAS:
        s = cfg.period(19)
        s = dataclasses.replace(s, supply=dataclasses.replace(s.supply, risk_beta=b))
        for obj in (Objective.WELFARE, Objective.PROFIT):
            curve = sweep_idle_wage(s, obj, g.j_values(), g, solver, threads)
            for pt in curve:
                cols["beta"].append(b)
                cols["objective"].append(obj.value)
                cols["J"].append(pt.idle_wage)
                cols["best_value"].append(pt.value)
                cols["best_tau"].append(pt.best_tau)
                cols["tau1_optimal"].append(pt.tau1_optimal)
    emit_table(ResultTable(cols, _meta(cfg, "fig1", "both")), path("fig1.csv"))

    # fig2: full-day value against the shared commission
    _progress("fig2: full-day value vs commission per beta and objective")
    cols = {k: [] for k in ("beta", "objective", "tau", "total_value")}
    for b in FIG2_BETAS:
        day = dataclasses.replace(cfg, risk_beta=b).day()
        for obj in (Objective.WELFARE, Objective.PROFIT):
            for tau, v in value_vs_tau(day, obj, g, solver, threads):
                cols["beta"].append(b)
                cols["objective"].append(obj.value)
                cols["tau"].append(tau)
                cols["total_value"].append(v)
    emit_table(ResultTable(cols, _meta(cfg, "fig2", "both")), path("fig2.csv"))

    # fig3: flexible per-hour idle wage (beta plays no role at tau = 1)
    _progress("fig3: flexible per-hour wages")
    day = cfg.day()
    flex_w = optimize_day_flexible(day, Objective.WELFARE, g, solver, threads)
    flex_p = optimize_day_flexible(day, Objective.PROFIT, g, solver, threads)
    emit_table(
        ResultTable(
            {
                "hour": list(range(1, 25)),
                "J_welfare": list(flex_w.best_schedule.idle_wages),
                "J_profit": list(flex_p.best_schedule.idle_wages),
            },
            _meta(cfg, "fig3", "both"),
        ),
        path("fig3.csv"),
    )

    # fig4: fixed-day sweep over the shared idle wage
    _progress("fig4: fixed-day sweep per beta and objective")
    cols = {k: [] for k in ("beta", "objective", "J", "best_value", "best_tau", "tau1_optimal")}
    tau_vals, j_vals = g.tau_values(), g.j_values()
    tau1 = int(np.nonzero(tau_vals == 1.0)[0][0])
    from .optimize import _fixed_period_matrices, _parallel_map

    for b in FIG4_BETAS:
        day = dataclasses.replace(cfg, risk_beta=b).day()
        for obj in (Objective.WELFARE, Objective.PROFIT):
            mats = _parallel_map(
                lambda s: _fixed_period_matrices(s, obj, g, solver)[0], list(day.periods), threads
            )
            total = np.sum(mats, axis=0)  # (n_tau, n_j)
            for ji, J in enumerate(j_vals):
                ti = int(np.argmax(total[:, ji]))
                best = total[ti, ji]
                cols["beta"].append(b)
                cols["objective"].append(obj.value)
                cols["J"].append(float(J))
                cols["best_value"].append(float(best))
                cols["best_tau"].append(float(tau_vals[ti]))
                cols["tau1_optimal"].append(bool(total[tau1, ji] >= best - 1e-9 * max(1.0, abs(best))))
    emit_table(ResultTable(cols, _meta(cfg, "fig4", "both")), path("fig4.csv"))

    # fig5: minimum-wage blocks vs the unconstrained flexible day
    _progress("fig5: minimum-wage sweep")
    cols = {k: [] for k in ("objective", "j_min", "value", "value_unconstrained")}
    day5 = dataclasses.replace(cfg, risk_beta=FIG5_BETA).day()
    for obj in (Objective.WELFARE, Objective.PROFIT):
        flex = optimize_day_flexible(day5, obj, g, solver, threads)
        for jm in FIG5_JMIN:
            c = BlockConstraint(cfg.blocks.b1, cfg.blocks.b2, jm)
            res = optimize_min_wage(day5, obj, g, c, solver, threads)
            cols["objective"].append(obj.value)
            cols["j_min"].append(jm)
            cols["value"].append(res.value)
            cols["value_unconstrained"].append(flex.value)
    emit_table(ResultTable(cols, _meta(cfg, "fig5", "both")), path("fig5.csv"))

    # table2: shared (J, tau) on the published two-period lattice
    _progress("table2: all beta x pool rows")
    g2 = _table2_grid(cfg)
    cols = {k: [] for k in ("beta", "A4", "A19", "objective", "J", "tau", "value")}
    for b in TABLE2_BETAS:
        for a4, a19 in TABLE2_AB:
            for obj in (Objective.WELFARE, Objective.PROFIT):
                res = optimize_day_fixed(two_period_day(b, a4, a19), obj, g2, solver, threads)
                sch = res.best_schedule
                cols["beta"].append(b)
                cols["A4"].append(a4)
                cols["A19"].append(a19)
                cols["objective"].append(obj.value)
                cols["J"].append(sch.idle_wages[0])
                cols["tau"].append(sch.commission)
                cols["value"].append(res.value)
    emit_table(ResultTable(cols, _meta(cfg, "table2", "both")), path("table2.csv"))
    _progress(f"wrote 6 files to {args.outdir}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="idlewage",
        description="Ride-hailing equilibria and policy optimization with an idle wage.",
    )
    ap.add_argument("--version", action="version", version=f"idlewage {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, objective=True):
        p.add_argument("--config", help="JSON config file (defaults built in)")
        p.add_argument("--threads", type=int, default=_default_threads(),
                       help="parallel evaluation threads (wall time only; results identical)")
        p.add_argument("--seedless-deterministic", action="store_true",
                       help="document that runs are deterministic without seeds (always on)")
        p.add_argument("--out", help="write machine-readable CSV here")
        if objective:
            p.add_argument("--objective", choices=["profit", "welfare"], required=True)

    p = sub.add_parser("equilibrium", help="enumerate equilibria of one policy")
    common(p, objective=False)
    p.add_argument("--hour", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--J", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)

    p = sub.add_parser("sweep-j", help="best value per idle wage for one period")
    common(p)
    p.add_argument("--hour", type=int, default=19)

    p = sub.add_parser("optimize", help="grid-search one regime")
    p.add_argument("regime", choices=["single", "flexible", "fixed", "minwage"])
    common(p)
    p.add_argument("--hour", type=int, default=19, help="period for the single regime")
    p.add_argument("--jmin", type=float, default=0.0, help="minimum block wage for minwage")

    p = sub.add_parser("value-vs-tau", help="full-day value per fixed commission")
    common(p)

    p = sub.add_parser("table2", help="two-period shared-(J,tau) optimum")
    common(p)
    p.add_argument("--beta", type=float, default=0.2)
    p.add_argument("--A4", type=float, default=3.5)
    p.add_argument("--A19", type=float, default=44.0)
    p.add_argument("--all", action="store_true", help="run every published row")

    p = sub.add_parser("analytic", help="closed-form two-period example")
    common(p, objective=False)
    p.add_argument("--epsilon", type=float, required=True)

    p = sub.add_parser("reproduce-all", help="emit every experiment CSV")
    common(p, objective=False)
    p.add_argument("--outdir", required=True)
    return ap


_COMMANDS = {
    "equilibrium": _cmd_equilibrium,
    "sweep-j": _cmd_sweep_j,
    "optimize": _cmd_optimize,
    "value-vs-tau": _cmd_value_vs_tau,
    "table2": _cmd_table2,
    "analytic": _cmd_analytic,
    "reproduce-all": _cmd_reproduce_all,
}


def main(argv=None) -> int:
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        cfg = load_config(args.config) if args.config else default_config()
        return _COMMANDS[args.command](args, cfg)
    except InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ParseError, ValidationError, BracketingError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
