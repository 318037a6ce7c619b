"""Command-line entry point: selection runs, simulations, report formatting.

Exit codes: 0 success, 2 invalid input (unreadable files, bad parameters),
1 computation failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import reports
from .errors import DivselError, InputError
from .pipeline import run_selection
from .scoring import load_candidates_csv, load_profile_csv
from .simulate import (
    SimulationConfig,
    TPIR_DEFAULT_INFO,
    build_world,
    per_symptom_tpir,
    run_monte_carlo,
    similarity_vs_tpir,
)
from .spectral import DEFAULT_INFO, SIMULATION_INFO
from .termspace import load_store
from .utility import DEFAULT_BETA, DEFAULT_MIDPOINT, DEFAULT_STEEPNESS, UtilityParams


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="divsel",
        description="Diverse subset selection over embedded vocabularies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_select = sub.add_parser(
        "select", help="rank candidates against a historical profile"
    )
    p_select.add_argument("--embeddings", required=True, help="embedding file (TSV or JSON)")
    p_select.add_argument("--candidates", required=True, help="candidate CSV: item_id,category,terms")
    p_select.add_argument("--profile", required=True, help="profile CSV: term,weight")
    p_select.add_argument("--info", type=float, default=DEFAULT_INFO,
                          help=f"cumulative variance threshold (default: {DEFAULT_INFO})")
    p_select.add_argument("--k", type=float, default=DEFAULT_STEEPNESS,
                          help=f"logistic steepness (default: {DEFAULT_STEEPNESS:g})")
    p_select.add_argument("--x0", type=float, default=DEFAULT_MIDPOINT,
                          help=f"logistic midpoint (default: {DEFAULT_MIDPOINT})")
    p_select.add_argument("--beta", type=float, default=DEFAULT_BETA,
                          help=f"weight tie-break coefficient (default: {DEFAULT_BETA})")
    p_select.add_argument("--alpha", type=float, default=0.9,
                          help="weight propagation band (default: 0.9)")
    p_select.add_argument("--select-n", type=int, default=None,
                          help="flag this many items instead of k_optimal")
    p_select.add_argument("--out", default=None, help="output path (default: stdout)")
    p_select.add_argument("--format", choices=("csv", "json", "table"), default="csv",
                          help="report format (default: csv)")
    p_select.set_defaults(func=cmd_select)

    p_sim = sub.add_parser("simulate", help="Monte Carlo recovery study")
    p_sim.add_argument("--config", default=None, help="flat key=value config file")
    p_sim.add_argument("--runs", type=int, default=None,
                       help="number of runs (default: 1000)")
    p_sim.add_argument("--seed", type=int, default=None, help="master seed (default: 0)")
    p_sim.add_argument("--info", type=float, required=True,
                       help=f"cumulative variance threshold; explicit in simulate mode "
                            f"(study value: {SIMULATION_INFO})")
    p_sim.add_argument("--workers", type=int, default=None,
                       help="parallel workers (default: 1; results identical)")
    p_sim.add_argument("--out", default=None, help="write the JSON report here")
    p_sim.add_argument("--format", choices=("json", "table"), default="table",
                       help="stdout format (default: table)")
    p_sim.set_defaults(func=cmd_simulate)

    p_tpir = sub.add_parser("tpir", help="per-candidate recovery rate, one item at a time")
    p_tpir.add_argument("--config", default=None, help="flat key=value config file")
    p_tpir.add_argument("--reps", type=int, default=200,
                        help="replicates per candidate (default: 200)")
    p_tpir.add_argument("--seed", type=int, default=None, help="master seed (default: 0)")
    p_tpir.add_argument("--info", type=float, default=TPIR_DEFAULT_INFO,
                        help=f"variance threshold for this mode (default: {TPIR_DEFAULT_INFO})")
    p_tpir.add_argument("--out", default=None, help="output CSV path (default: stdout)")
    p_tpir.set_defaults(func=cmd_tpir)

    p_report = sub.add_parser("report", help="format a saved simulation JSON report")
    p_report.add_argument("--in", dest="input", required=True, help="simulation report JSON")
    p_report.set_defaults(func=cmd_report)
    return parser


def cmd_select(args: argparse.Namespace) -> int:
    store = load_store(args.embeddings)
    items = load_candidates_csv(args.candidates)
    profile = load_profile_csv(args.profile)
    params = UtilityParams(k=args.k, x0=args.x0, beta=args.beta)
    result = run_selection(
        store,
        items,
        profile,
        params=params,
        info=args.info,
        alpha=args.alpha,
        select_n=args.select_n,
    )
    if args.format == "csv":
        text = reports.selection_to_csv(result)
    elif args.format == "json":
        text = json.dumps(reports.selection_to_payload(result), indent=2, sort_keys=True) + "\n"
    else:
        text = reports.selection_to_table(result)
    _emit(text, args.out)
    explained_at_k = result.explained_curve[result.k_optimal - 1]
    print(
        f"k_optimal={result.k_optimal} (info={args.info:g}); "
        f"explained variance at k: {explained_at_k:.4f}; "
        f"{len(result.ranked)} candidates ranked",
        file=sys.stderr,
    )
    return 0


_CONFIG_KEYS = {
    "n_candidates": int,
    "terms_per_cluster": int,
    "dimension": int,
    "intra_cluster_similarity": float,
    "noise_pool_size": int,
    "n_symptoms_min": int,
    "n_symptoms_max": int,
    "aes_per_symptom_min": int,
    "aes_per_symptom_max": int,
    "n_noise_min": int,
    "n_noise_max": int,
    "weight_min": int,
    "weight_max": int,
    "alpha": float,
    "k": float,
    "x0": float,
    "beta": float,
    "runs": int,
    "seed": int,
    "workers": int,
    "allow_wide_ranges": bool,
}


def _parse_config_file(path: str) -> dict:
    values: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InputError(f"{path}:{lineno}: expected key=value")
            key, _, raw = line.partition("=")
            key, raw = key.strip(), raw.strip()
            if key not in _CONFIG_KEYS:
                raise InputError(f"{path}:{lineno}: unknown config key {key!r}")
            caster = _CONFIG_KEYS[key]
            try:
                if caster is bool:
                    if raw.lower() not in ("true", "false", "1", "0"):
                        raise ValueError(raw)
                    values[key] = raw.lower() in ("true", "1")
                else:
                    values[key] = caster(raw)
            except ValueError:
                raise InputError(
                    f"{path}:{lineno}: cannot parse {raw!r} as {caster.__name__}"
                ) from None
    return values


def _sim_config(args: argparse.Namespace, info: float) -> SimulationConfig:
    raw = _parse_config_file(args.config) if args.config else {}
    if args.runs is not None:
        raw["runs"] = args.runs
    if args.seed is not None:
        raw["seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        raw["workers"] = args.workers

    defaults = SimulationConfig()
    params = UtilityParams(
        k=raw.pop("k", DEFAULT_STEEPNESS),
        x0=raw.pop("x0", DEFAULT_MIDPOINT),
        beta=raw.pop("beta", DEFAULT_BETA),
    )
    config = SimulationConfig(
        n_candidates=raw.pop("n_candidates", defaults.n_candidates),
        terms_per_cluster=raw.pop("terms_per_cluster", defaults.terms_per_cluster),
        dimension=raw.pop("dimension", defaults.dimension),
        intra_cluster_similarity=raw.pop(
            "intra_cluster_similarity", defaults.intra_cluster_similarity
        ),
        noise_pool_size=raw.pop("noise_pool_size", defaults.noise_pool_size),
        n_symptoms=(
            raw.pop("n_symptoms_min", defaults.n_symptoms[0]),
            raw.pop("n_symptoms_max", defaults.n_symptoms[1]),
        ),
        aes_per_symptom=(
            raw.pop("aes_per_symptom_min", defaults.aes_per_symptom[0]),
            raw.pop("aes_per_symptom_max", defaults.aes_per_symptom[1]),
        ),
        n_noise=(
            raw.pop("n_noise_min", defaults.n_noise[0]),
            raw.pop("n_noise_max", defaults.n_noise[1]),
        ),
        weight_range=(
            raw.pop("weight_min", defaults.weight_range[0]),
            raw.pop("weight_max", defaults.weight_range[1]),
        ),
        info=info,
        alpha=raw.pop("alpha", defaults.alpha),
        utility_params=params,
        n_runs=raw.pop("runs", defaults.n_runs),
        master_seed=raw.pop("seed", defaults.master_seed),
        n_workers=raw.pop("workers", defaults.n_workers),
        allow_wide_ranges=raw.pop("allow_wide_ranges", False),
    )
    config.validate()
    return config


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _sim_config(args, info=args.info)
    report = run_monte_carlo(config)
    if args.out:
        reports.write_text(args.out, report.to_json())
    if args.format == "json":
        sys.stdout.write(report.to_json())
    else:
        sys.stdout.write(reports.simulation_report_table(report))
    return 0


def cmd_tpir(args: argparse.Namespace) -> int:
    args.workers = None
    args.runs = None
    config = _sim_config(args, info=SIMULATION_INFO)
    world = build_world(config)
    rates = per_symptom_tpir(config, n_reps=args.reps, info=args.info, world=world)
    rows = similarity_vs_tpir(world, rates)
    _emit(reports.tpir_csv(rows), args.out)
    values = sorted(rates.values())
    median = values[len(values) // 2] if len(values) % 2 else (
        0.5 * (values[len(values) // 2 - 1] + values[len(values) // 2])
    )
    print(f"median TPIR over {len(values)} candidates: {median:.3f}", file=sys.stderr)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    try:
        with open(args.input, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.input}: invalid JSON: {exc}") from None
    summary = payload.get("summary")
    if not isinstance(summary, dict):
        raise InputError(f"{args.input}: not a simulation report (missing 'summary')")
    try:
        sys.stdout.write(reports.simulation_table(summary))
    except KeyError as exc:
        raise InputError(f"{args.input}: summary is missing metric {exc}") from None
    return 0


def _emit(text: str, out: str | None) -> None:
    if out:
        reports.write_text(out, text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: cannot read file: {exc.filename or exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DivselError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
