"""Command-line entry point: simulate, certify, table1, example2, check.

Exit codes are stable API: 0 success, 2 configuration problem, 3 numerical
failure, 4 requested connectivity condition unsatisfied, 5 reference-value
mismatch, 6 property-suite failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import (
    ConditionUnsatisfiedError,
    ConfigurationError,
    DomainError,
    GoldenMismatchError,
    NumericalError,
    PreconditionError,
)
from .serialize import atomic_write_text, format_float, sha256_digest, write_json, write_junit_xml
from .signals import Schedule, as_fraction
from .graphs import check_ISC, check_PE, globally_reachable, persistent_graph
from .dynamics import (
    SystemSpec,
    integrate_linear,
    integrate_nonlinear,
    integrate_second_order,
)
from .certificates import bounds_for_system, rate_ISC, rate_PE, rate_nonlinear
from .experiments import SUITES, example1_schedule, example2_schedule, run_example2, table1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CONDITION = 4
EXIT_GOLDEN = 5
EXIT_PROPERTY = 6

_CONFIG_ERRORS = (ConfigurationError, DomainError, PreconditionError, KeyError, TypeError)


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigurationError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _resolve_schedule(node, base_dir: str = ".") -> Schedule:
    """Accept a path, an inline schedule object, or an example descriptor."""
    if isinstance(node, str):
        path = node if os.path.isabs(node) else os.path.join(base_dir, node)
        return Schedule.from_json_dict(_load_json(path))
    if not isinstance(node, dict):
        raise ConfigurationError("schedule must be a path or a JSON object")
    if "example" in node:
        which = int(node["example"])
        n = int(node["n_agents"])
        T = node.get("T")
        mu = node.get("mu")
        mode = node.get("mode", "sequential")
        if which == 1:
            return example1_schedule(n, T, mu, mode=mode)
        if which == 2:
            return example2_schedule(
                n, T, mu, edge_sense=node.get("edge_sense", "reverse"), mode=mode
            )
        raise ConfigurationError(f"unknown example number {which}")
    return Schedule.from_json_dict(node)


def _load_run_config(path: str) -> dict:
    cfg = _load_json(path)
    if "system" not in cfg:
        raise ConfigurationError(f"{path}: missing required field 'system'")
    if "schedule" not in cfg:
        raise ConfigurationError(f"{path}: missing required field 'schedule'")
    cfg["_base_dir"] = os.path.dirname(os.path.abspath(path))
    return cfg


def _states_from_config(cfg: dict, key: str, n_agents: int, dim: int):
    if key not in cfg:
        raise ConfigurationError(f"config missing field {key!r}")
    arr = np.asarray(cfg[key], dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.shape != (n_agents, dim):
        raise ConfigurationError(
            f"{key} must have shape ({n_agents}, {dim}); got {list(arr.shape)}"
        )
    return arr


def _sibling(path: str, new_ext: str) -> str:
    root, ext = os.path.splitext(path)
    return root + new_ext if ext else path + new_ext


def cmd_simulate(args) -> int:
    cfg = _load_run_config(args.config)
    spec = SystemSpec.from_dict(cfg["system"])
    sched = _resolve_schedule(cfg["schedule"], cfg["_base_dir"])
    if sched.n_agents != spec.n_agents:
        raise ConfigurationError("schedule and system disagree on the number of agents")
    horizon = args.t_end if args.t_end is not None else cfg.get("horizon")
    if horizon is None or float(horizon) <= 0:
        raise ConfigurationError("a positive horizon is required (config or --t-end)")
    horizon = float(horizon)
    step = float(args.step if args.step is not None else cfg.get("step", 1e-3))
    x0 = _states_from_config(cfg, "x0", spec.n_agents, spec.dim)

    if spec.family == "first_order_linear":
        traj = integrate_linear(
            sched, x0, g=spec.gain, t_end=horizon, sample_dt=args.sample_dt
        )
    elif spec.family == "first_order_nonlinear":
        traj = integrate_nonlinear(spec, sched, x0, t_end=horizon, h=step)
    else:
        v0 = _states_from_config(cfg, "v0", spec.n_agents, spec.dim)
        traj = integrate_second_order(spec, sched, x0, v0, t_end=horizon, h=step)

    out_csv = args.out or cfg.get("outputs", {}).get("trajectory_csv", "trajectory.csv")
    atomic_write_text(out_csv, traj.to_csv())
    config_digest = sha256_digest({k: v for k, v in cfg.items() if not k.startswith("_")})
    meta = dict(traj.metadata)
    meta.update(
        {
            "family": spec.family,
            "config_digest": config_digest,
            "seed": cfg.get("seed"),
            "n_times": int(len(traj.times)),
            "trajectory_csv": out_csv,
        }
    )
    write_json(args.json_out or _sibling(out_csv, ".json"), meta)
    if args.plot:
        from .plotting import trajectory_figure

        trajectory_figure(traj, args.plot, title=f"{spec.family}, N={spec.n_agents}")
    print(f"wrote {out_csv} ({len(traj.times)} grid times)")
    return EXIT_OK


def cmd_certify(args) -> int:
    if args.config:
        cfg = _load_run_config(args.config)
        spec = SystemSpec.from_dict(cfg["system"])
        sched = _resolve_schedule(cfg["schedule"], cfg["_base_dir"])
        x0 = cfg.get("x0")
        config_digest = sha256_digest({k: v for k, v in cfg.items() if not k.startswith("_")})
    elif args.schedule:
        sched = _resolve_schedule(args.schedule)
        spec = SystemSpec(family="first_order_linear", n_agents=sched.n_agents)
        x0 = None
        config_digest = sha256_digest({"schedule": args.schedule})
    else:
        raise ConfigurationError("certify needs --config or --schedule")

    mu_exact = as_fraction(args.mu)
    T_exact = as_fraction(args.T)
    if args.edge_sense == "reverse":
        sched = sched.transpose()

    if spec.family == "first_order_linear":
        m_lower = m_upper = 1.0
        sampled = False
    else:
        if x0 is None:
            raise ConfigurationError("nonlinear certification needs x0 in the config")
        bounds = bounds_for_system(spec, np.asarray(x0, dtype=float))
        m_lower, m_upper, sampled = bounds.m_lower, bounds.m_upper, bounds.sampled

    n = sched.n_agents
    T, mu = float(T_exact), float(mu_exact)
    t_samples = [as_fraction(s) for s in args.t_samples.split(",")] if args.t_samples else [0]

    if args.condition == "moreau":
        persistent = persistent_graph(sched, T_exact, mu_exact, args.k_max)
        report = globally_reachable(persistent)
        if report.reachable_node is None:
            raise ConditionUnsatisfiedError(
                "persistent connectivity graph has no globally reachable node",
                witness=persistent.to_adjacency_dict(),
            )
        cert = rate_nonlinear(
            n, T, mu, report.length, m_lower, m_upper, proof_constant=args.proof_constant
        )
        evidence = {
            "persistent_graph": persistent.to_adjacency_dict(),
            "reachable_node": report.reachable_node,
            "distances": {str(k): v for k, v in report.distances.items()},
        }
    elif args.condition == "pe":
        result = check_PE(sched, T_exact, mu_exact, t_samples)
        if not result.satisfied:
            raise ConditionUnsatisfiedError(
                f"persistent excitation fails at (i,j,t) = {result.witness}"
                + ("" if result.exhaustive else " [sampled check]"),
                witness=result.witness,
            )
        cert = rate_PE(n, T, mu, m_lower, m_upper)
        evidence = {"exhaustive": result.exhaustive, "checked_times": len(result.checked_times)}
    elif args.condition == "isc":
        result = check_ISC(sched, T_exact, mu_exact, t_samples)
        if not result.satisfied:
            raise ConditionUnsatisfiedError(
                f"integral scrambling fails at (i,j,t) = {result.first_failure}"
                + ("" if result.exhaustive else " [sampled check]"),
                witness=result.first_failure,
            )
        cert = rate_ISC(n, T, mu, m_lower, m_upper)
        evidence = {"exhaustive": result.exhaustive}
    else:
        raise ConfigurationError(f"unknown condition {args.condition!r}")

    payload = cert.to_json_dict()
    payload.update(
        {
            "condition_evidence": evidence,
            "m_bounds_sampled": sampled,
            "edge_sense": args.edge_sense,
            "config_digest": config_digest,
            "schedule_digest": sched.digest(),
        }
    )
    if args.out:
        write_json(args.out, payload)
        print(f"wrote {args.out}")
    else:
        print(json.dumps(payload, indent=2, sort_keys=True))
    print(
        f"condition={args.condition} d*={cert.d_star} 1-C={format_float(cert.one_minus_C)}"
        f" tau={format_float(cert.tau)}{' [vacuous]' if cert.vacuous else ''}"
    )
    return EXIT_OK


def cmd_table1(args) -> int:
    rows = table1(args.n_min, args.n_max)
    header = (
        "N,one_minus_diameter,one_minus_C,reference_one_minus_diameter,"
        "reference_one_minus_C,recursion_ode_gap,diameter_abs_error,bound_rel_error"
    )
    lines = [header]
    for r in rows:
        lines.append(
            ",".join(
                [
                    str(r.n_agents),
                    format_float(r.one_minus_diameter),
                    format_float(r.one_minus_C),
                    format_float(r.reference_one_minus_diameter),
                    format_float(r.reference_one_minus_C),
                    format_float(r.recursion_ode_gap),
                    format_float(r.diameter_abs_error),
                    format_float(r.bound_rel_error),
                ]
            )
        )
    csv_text = "\n".join(lines) + "\n"
    if args.out:
        atomic_write_text(args.out, csv_text)
    if args.fig:
        from .plotting import table1_figure

        table1_figure(rows, args.fig)
    print(f"{'N':>3} {'1-D(d*T)':>12} {'ref':>8} {'1-C':>12} {'ref':>9} {'ode gap':>9}")
    for r in rows:
        print(
            f"{r.n_agents:>3} {r.one_minus_diameter:>12.6f} {r.reference_one_minus_diameter:>8.4f}"
            f" {r.one_minus_C:>12.4e} {r.reference_one_minus_C:>9.1e} {r.recursion_ode_gap:>9.1e}"
        )
    bad = [
        r.n_agents
        for r in rows
        if not r.diameter_matches_printed
        or r.bound_rel_error > 0.03
        or r.recursion_ode_gap > 1e-10
    ]
    if bad:
        raise GoldenMismatchError(f"rows disagree with the reference table: N={bad}")
    print("all rows match the reference table at printed precision")
    return EXIT_OK


def cmd_example2(args) -> int:
    result = run_example2(
        args.n,
        beta=args.beta,
        T=args.T,
        mu=args.mu,
        t_end=args.t_end,
        h=args.h,
        edge_sense=args.edge_sense,
    )
    prefix = args.out_prefix
    atomic_write_text(prefix + "_trajectory.csv", result.trajectory.to_csv())
    write_json(prefix + "_summary.json", result.summary_dict())
    from .plotting import diameter_figure, trajectory_figure

    trajectory_figure(
        result.trajectory, prefix + "_trajectory.png",
        title=f"second order, N={args.n}, beta={args.beta}",
    )
    diameter_figure(result.trajectory, prefix + "_diameters.png")
    verdict = result.verdict
    if verdict is None:
        label = "no-graph-certificate"
    elif verdict.flocking_guaranteed:
        label = "flocking"
    elif verdict.alignment_guaranteed:
        label = "alignment-only (boundary)" if verdict.boundary_case else "alignment-only"
    else:
        label = "no-guarantee"
    print(
        f"N={args.n} beta={args.beta} d*={result.d_star} verdict={label} "
        f"D_V(end)/D_V(0)={result.dv_ratio:.3e} D_X(end)={result.dx_final:.3f}"
    )
    return EXIT_OK


def cmd_check(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    jobs = args.jobs or int(os.environ.get("CONSENSUS_CERTIFY_JOBS", "1"))

    def run(name: str):
        fn = SUITES[name]
        if name == "graphs":
            return fn(n_random=args.cases if args.cases else 500, seed=args.seed)
        if name == "reduction":
            return fn(seed=args.seed)
        return fn(n_cases=args.cases if args.cases else 200, seed=args.seed)

    if jobs > 1 and len(names) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(run, names))
    else:
        reports = [run(name) for name in names]

    failed = False
    os.makedirs(args.out_dir, exist_ok=True)
    for report in reports:
        write_json(
            os.path.join(args.out_dir, f"{report.name}_detail.json"), report.to_json_dict()
        )
        write_junit_xml(
            os.path.join(args.out_dir, f"{report.name}.xml"),
            f"consensus-certify:{report.name}",
            report.junit_cases(),
        )
        status = "PASS" if report.passed else "FAIL"
        print(
            f"{report.name:<10} {status} ({len(report.cases)} checks, "
            f"{report.elapsed_s:.1f}s)"
        )
        for failure in report.failures()[:5]:
            print(f"  reproduce: --suite {report.name} --seed {report.seed}  "
                  f"[{failure.case_id}] {failure.message}")
        failed = failed or not report.passed
    return EXIT_PROPERTY if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="consensus-certify",
        description="Simulate cooperative multi-agent systems under intermittent "
        "communication and certify their convergence rates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="integrate a configured system")
    p_sim.add_argument("--config", required=True, help="run-config JSON path")
    p_sim.add_argument("--t-end", type=float, default=None, help="override horizon")
    p_sim.add_argument("--step", type=float, default=None, help="override RK4 step")
    p_sim.add_argument("--sample-dt", type=float, default=None,
                       help="extra equally spaced grid times (linear family)")
    p_sim.add_argument("--out", default=None, help="trajectory CSV path")
    p_sim.add_argument("--json-out", default=None, help="metadata JSON path")
    p_sim.add_argument("--plot", default=None, help="optional figure path")
    p_sim.set_defaults(func=cmd_simulate)

    p_cert = sub.add_parser("certify", help="compute a rate certificate")
    p_cert.add_argument("--config", default=None, help="run-config JSON path")
    p_cert.add_argument("--schedule", default=None, help="schedule JSON path")
    p_cert.add_argument("--T", required=True, help="window length (float or p/q)")
    p_cert.add_argument("--mu", required=True, help="threshold (float or p/q)")
    p_cert.add_argument("--condition", choices=("moreau", "pe", "isc"), default="moreau")
    p_cert.add_argument("--proof-constant", action="store_true",
                        help="use the sharper (N-1)/N exponent from the derivation")
    p_cert.add_argument("--edge-sense", choices=("forward", "reverse"), default="forward",
                        help="reverse analyzes the transposed schedule")
    p_cert.add_argument("--k-max", type=int, default=8,
                        help="periods sampled for the persistent graph")
    p_cert.add_argument("--t-samples", default="0",
                        help="comma-separated window start times for pe/isc checks")
    p_cert.add_argument("--out", default=None, help="certificate JSON path")
    p_cert.set_defaults(func=cmd_certify)

    p_tab = sub.add_parser("table1", help="reproduce the reference comparison table")
    p_tab.add_argument("--n-min", type=int, default=3)
    p_tab.add_argument("--n-max", type=int, default=10)
    p_tab.add_argument("--out", default=None, help="CSV output path")
    p_tab.add_argument("--fig", default=None, help="figure output path")
    p_tab.set_defaults(func=cmd_table1)

    p_ex2 = sub.add_parser("example2", help="run the second-order flocking study")
    p_ex2.add_argument("--n", type=int, required=True)
    p_ex2.add_argument("--beta", type=float, default=0.1)
    p_ex2.add_argument("--T", default=None)
    p_ex2.add_argument("--mu", default=None)
    p_ex2.add_argument("--t-end", type=float, default=None)
    p_ex2.add_argument("--h", type=float, default=1e-3)
    p_ex2.add_argument("--edge-sense", choices=("forward", "reverse"), default="reverse")
    p_ex2.add_argument("--out-prefix", default="example2")
    p_ex2.set_defaults(func=cmd_example2)

    p_chk = sub.add_parser("check", help="run the property-validation suites")
    p_chk.add_argument("--suite", choices=tuple(SUITES) + ("all",), default="all")
    p_chk.add_argument("--cases", type=int, default=None)
    p_chk.add_argument("--seed", type=int, default=7)
    p_chk.add_argument("--out-dir", default="check-reports")
    p_chk.add_argument("--jobs", type=int, default=None,
                       help="parallel suite execution (env CONSENSUS_CERTIFY_JOBS)")
    p_chk.set_defaults(func=cmd_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConditionUnsatisfiedError as exc:
        print(f"condition unsatisfied: {exc}", file=sys.stderr)
        if exc.witness is not None:
            print(json.dumps({"witness": exc.witness}, indent=2, default=str), file=sys.stderr)
        return EXIT_CONDITION
    except GoldenMismatchError as exc:
        print(f"reference mismatch: {exc}", file=sys.stderr)
        return EXIT_GOLDEN
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except _CONFIG_ERRORS as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
