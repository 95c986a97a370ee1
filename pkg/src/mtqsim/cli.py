"""Command-line experiment driver.

Subcommands: simulate, attack-plan, detect, sweep, gen-workload. Exit codes:
0 on success, 2 for configuration problems (bad flags, unknown names,
missing referenced files), 3 for malformed data file content.

The CLI is a thin layer: everything it does is importable from the library
modules, and every report it writes embeds the resolved config and seeds
needed to reproduce it.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .adversary import h1_plan, h2_plan, heuristic1_sigma_ranking
from .calibration import (
    CalibrationSeries,
    CalibrationSnapshot,
    fluctuation_percent,
    load_calibration_csv,
    synth_drift,
)
from .defense import (
    DEFAULT_BINS,
    DEFAULT_EPS,
    DEFAULT_PERCENTILE,
    calibrate_threshold,
    detect,
)
from .errors import ConfigError, DataError
from .experiment import (
    DEFAULT_GATE_DENSITY,
    dump_json,
    jobs_csv,
    load_config_file,
    read_referenced_file,
    resolve_config,
    resolve_topology,
    rounds_csv,
    run_simulate,
    run_sweep,
    write_text_atomic,
    write_workload,
)
from .scheduler import gen_workload
from .topology import CouplingGraph

CALIBRATION_SEED_BASE = 1000
DEFAULT_CALIBRATION_RUNS = 60


def parse_attack_spec(spec: str) -> str | dict:
    """Parse --attack strings: 'none', 'H1:n=3,k=0.15', 'H2:k=0.15,0.12,0.10'."""
    spec = spec.strip()
    if spec == "none":
        return "none"
    if ":" not in spec:
        raise ConfigError(f"attack spec {spec!r} must be 'none' or 'H1:...'/'H2:...'")
    kind, _, params = spec.partition(":")
    kind = kind.upper()
    if kind == "H1":
        fields = {}
        for part in params.split(","):
            key, _, val = part.partition("=")
            fields[key.strip()] = val.strip()
        try:
            return {"kind": "H1", "n": int(fields["n"]), "k": float(fields["k"])}
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad H1 spec {spec!r}: need n=<int>,k=<float> ({exc})") from None
    if kind == "H2":
        body = params.strip()
        if body.startswith(("k=", "ks=")):
            body = body.split("=", 1)[1]
        try:
            ks = [float(x) for x in body.split(",") if x.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad H2 spec {spec!r}: {exc}") from None
        if not ks:
            raise ConfigError(f"bad H2 spec {spec!r}: no magnitudes")
        return {"kind": "H2", "ks": ks}
    raise ConfigError(f"unknown attack kind {kind!r} in {spec!r}")


def parse_seed_list(spec: str) -> list[int]:
    """'1,2,5' or an inclusive range '1..20'."""
    spec = spec.strip()
    try:
        if ".." in spec:
            lo, hi = spec.split("..")
            lo_i, hi_i = int(lo), int(hi)
            if hi_i < lo_i:
                raise ValueError(f"empty range {spec!r}")
            return list(range(lo_i, hi_i + 1))
        return [int(s) for s in spec.split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad seed list {spec!r}: {exc}") from None


def parse_windows(spec: str) -> tuple[tuple[int, int], tuple[int, int]]:
    """'0:7,7:14' -> ((0, 7), (7, 14)); ranges are half-open cycle ids."""
    try:
        parts = spec.split(",")
        if len(parts) != 2:
            raise ValueError("need exactly two ranges")
        out = []
        for part in parts:
            lo, hi = part.split(":")
            out.append((int(lo), int(hi)))
        return out[0], out[1]
    except ValueError as exc:
        raise ConfigError(f"bad windows {spec!r} (want 'lo:hi,lo:hi'): {exc}") from None


def _topology_from_flag(spec: str) -> CouplingGraph:
    path = Path(spec)
    if path.suffix or path.exists():
        return resolve_topology({"file": spec}, Path("."))
    return resolve_topology(spec, Path("."))


def cmd_simulate(args: argparse.Namespace) -> int:
    raw = load_config_file(args.config)
    base_dir = Path(args.config).parent
    if args.topology:
        raw["topology"] = args.topology if not Path(args.topology).exists() else {"file": args.topology}
    if args.allocator:
        raw["allocator"] = args.allocator
    if args.attack:
        raw["attack"] = parse_attack_spec(args.attack)
    rc = resolve_config(raw, base_dir)
    out_dir = Path(args.out or raw.get("out", "reports"))
    res = run_simulate(rc, seed_override=args.seed)

    write_text_atomic(out_dir / "baseline.json", dump_json(res.baseline_doc))
    write_text_atomic(out_dir / "attacked.json", dump_json(res.attacked_doc))
    write_text_atomic(out_dir / "summary.json", dump_json(res.summary_doc))
    write_text_atomic(out_dir / "baseline_rounds.csv", rounds_csv(res.baseline))
    write_text_atomic(out_dir / "baseline_jobs.csv", jobs_csv(res.baseline))
    write_text_atomic(out_dir / "attacked_rounds.csv", rounds_csv(res.attacked))
    write_text_atomic(out_dir / "attacked_jobs.csv", jobs_csv(res.attacked))

    d = res.summary_doc["delta"]
    print(
        f"baseline rounds {res.baseline.total_rounds}, attacked rounds "
        f"{res.attacked.total_rounds} (delta {d['rounds']:+d}); "
        f"utilization delta {d['mean_utilization']:+.4f}; "
        f"depth {d['depth_pct']:+.2f}%; pst {d['pst_pct']:+.2f}%"
    )
    print(f"reports written to {out_dir}")
    return 0


def cmd_attack_plan(args: argparse.Namespace) -> int:
    g = _topology_from_flag(args.topology)
    spec = parse_attack_spec(args.attack)
    if spec == "none" or spec["kind"] == "none":
        raise ConfigError("attack-plan needs an H1 or H2 attack spec")
    dist = g.distance_matrix
    if spec["kind"] == "H1":
        plan = h1_plan(g, spec["n"], spec["k"])
        ranking = heuristic1_sigma_ranking(g)
        sigma = dict(ranking)
        doc = {
            "heuristic": plan.heuristic,
            "n": plan.n,
            "targets": [
                {"qubit": q, "delta": d, "sigma": sigma[q]} for q, d in plan.targets
            ],
            "pool_sigma_ranking": [{"qubit": q, "sigma": s} for q, s in ranking],
        }
    else:
        plan = h2_plan(g, spec["ks"])
        targets = []
        chosen: list[int] = []
        for q, d in plan.targets:
            profile = [int(dist[q, s]) for s in chosen]
            targets.append(
                {
                    "qubit": q,
                    "delta": d,
                    "min_distance_to_selected": min(profile) if profile else None,
                    "distance_profile": profile,
                }
            )
            chosen.append(q)
        doc = {"heuristic": plan.heuristic, "n": plan.n, "targets": targets}
    text = dump_json(doc)
    if args.out:
        write_text_atomic(args.out, text)
        print(f"plan written to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _mean_window_base(
    series: CalibrationSeries, window: tuple[int, int]
) -> CalibrationSnapshot:
    snaps = series.cycle_slice(*window)
    edges = series.graph.edge_list
    cnot = {
        e: sum(s.cnot_error[e] for s in snaps) / len(snaps) for e in edges
    }
    return CalibrationSnapshot(0, cnot, dict(snaps[0].readout_error))


def cmd_detect(args: argparse.Namespace) -> int:
    g = _topology_from_flag(args.topology)
    series = load_calibration_csv(read_referenced_file(args.calib), g)
    window1, window2 = parse_windows(args.windows)

    if args.tau is not None:
        tau = args.tau
        tau_source = "explicit"
    else:
        # Calibrate against synthetic honest drift matched to the historical
        # window: same per-edge mean level, same per-qubit fluctuation scale.
        hist = series.cycle_slice(*window1)
        if len(hist) < 2:
            raise ConfigError("window1 too short to calibrate a threshold from")
        base = _mean_window_base(series, window1)
        hist_series = CalibrationSeries(g, hist)
        if args.calibration_cv is not None:
            cv = args.calibration_cv
        else:
            cv = sum(
                fluctuation_percent(hist_series, g, q) for q in range(g.qubit_count)
            ) / (100.0 * g.qubit_count)
        n1 = len(hist)
        n2 = len(series.cycle_slice(*window2))
        runs = [
            synth_drift(base, g, n1 + n2, cv, seed)
            for seed in range(CALIBRATION_SEED_BASE, CALIBRATION_SEED_BASE + args.calibration_runs)
        ]
        tau = calibrate_threshold(
            runs, (0, n1), (n1, n1 + n2), g, bins=args.bins, eps=args.eps,
            percentile=args.percentile,
        )
        tau_source = f"synthetic honest drift (cv={cv:.4f}, {args.calibration_runs} runs)"

    verdict = detect(series, window1, window2, g, bins=args.bins, eps=args.eps, tau=tau)
    doc = {
        "tau": verdict.tau,
        "params": {
            "bins": args.bins,
            "eps": args.eps,
            "window1": list(window1),
            "window2": list(window2),
            "percentile": args.percentile,
            "tau_source": tau_source,
        },
        "qubits": [
            {
                "qubit": q,
                "divergence": verdict.divergence[q],
                "flagged": q in verdict.flagged,
            }
            for q in sorted(verdict.divergence)
        ],
    }
    text = dump_json(doc)
    if args.out:
        write_text_atomic(args.out, text)
        print(f"verdict written to {args.out}")
    flagged = sorted(verdict.flagged)
    print(f"tau {tau:.6f} ({tau_source}); flagged qubits: {flagged if flagged else 'none'}")
    if not args.out:
        sys.stdout.write(text)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    raw = load_config_file(args.config)
    base_dir = Path(args.config).parent
    if args.allocator:
        raw["allocator"] = args.allocator
    if args.attack:
        raw["attack"] = parse_attack_spec(args.attack)
    rc = resolve_config(raw, base_dir)
    seeds = parse_seed_list(args.seeds)
    rows, csv_text = run_sweep(rc, seeds)
    out_dir = Path(args.out or raw.get("out", "reports"))
    write_text_atomic(out_dir / "sweep.csv", csv_text)
    n = len(rows)
    mean_dr = sum(r["delta_rounds"] for r in rows) / n
    mean_du = sum(r["delta_mean_utilization"] for r in rows) / n
    mean_dp = sum(r["depth_pct"] for r in rows) / n
    mean_ps = sum(r["pst_pct"] for r in rows) / n
    print(
        f"{n} seeds: mean delta rounds {mean_dr:+.2f}, mean utilization delta "
        f"{mean_du:+.4f}, mean depth change {mean_dp:+.2f}%, mean pst change {mean_ps:+.2f}%"
    )
    print(f"sweep written to {out_dir / 'sweep.csv'}")
    return 0


def cmd_gen_workload(args: argparse.Namespace) -> int:
    if args.count < 1:
        raise ConfigError("--count must be positive")
    try:
        jobs = gen_workload(args.count, args.size_min, args.size_max, args.density, args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    params = {
        "count": args.count,
        "size_min": args.size_min,
        "size_max": args.size_max,
        "gate_density": args.density,
        "seed": args.seed,
    }
    write_workload(jobs, params, args.out)
    print(f"{len(jobs)} circuits written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtqsim",
        description="Multi-tenant quantum allocation simulator and misreport analysis toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one baseline-vs-attack comparison")
    p.add_argument("--config", required=True, help="experiment config JSON file")
    p.add_argument("--topology", help="override: builtin name or edge-list file")
    p.add_argument("--allocator", help="override: greedy or comdap")
    p.add_argument("--attack", help="override: none, H1:n=3,k=0.15, or H2:k=0.15,0.12,0.10")
    p.add_argument("--seed", type=int, help="override the workload generator seed")
    p.add_argument("--out", help="output directory (default from config, else ./reports)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("attack-plan", help="emit a misreport plan with selection evidence")
    p.add_argument("--topology", default="hanoi27", help="builtin name or edge-list file")
    p.add_argument("--attack", required=True, help="H1:n=3,k=0.15 or H2:k=0.15,0.12,0.10")
    p.add_argument("--out", help="output JSON path (stdout if omitted)")
    p.set_defaults(func=cmd_attack_plan)

    p = sub.add_parser("detect", help="KL-divergence misreport detection on a calibration series")
    p.add_argument("--calib", required=True, help="calibration CSV file")
    p.add_argument("--topology", default="hanoi27", help="builtin name or edge-list file")
    p.add_argument("--windows", required=True, help="two half-open cycle ranges, e.g. 0:7,7:14")
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p.add_argument("--eps", type=float, default=DEFAULT_EPS)
    p.add_argument("--tau", type=float, help="divergence threshold (calibrated synthetically if omitted)")
    p.add_argument("--percentile", type=float, default=DEFAULT_PERCENTILE)
    p.add_argument("--calibration-runs", type=int, default=DEFAULT_CALIBRATION_RUNS)
    p.add_argument("--calibration-cv", type=float, help="override the estimated drift cv")
    p.add_argument("--out", help="verdict JSON path (stdout if omitted)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("sweep", help="multi-seed baseline-vs-attack aggregate")
    p.add_argument("--config", required=True)
    p.add_argument("--seeds", required=True, help="comma list '1,2,3' or inclusive range '1..20'")
    p.add_argument("--allocator", help="override: greedy or comdap")
    p.add_argument("--attack", help="override attack spec")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen-workload", help="emit a seeded synthetic workload as circuit files")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--size-min", type=int, default=2)
    p.add_argument("--size-max", type=int, default=10)
    p.add_argument("--density", type=float, default=DEFAULT_GATE_DENSITY)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_gen_workload)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
