"""Command-line entry point: ``gridconf {train,evaluate,enumerate,compare}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, kernels
from .dqn import EpisodeRecord, TrainConfig, best_configuration, greedy_rollout, load_train_config, train
from .env import ReconfigEnv
from .errors import GridconfError
from .grid_model import Configuration, load_dataset
from .oracle import EnumerationReport, enumerate_optimal
from .reliability import (
    DEFAULT_LAMBDA_MAX,
    DEFAULT_LAMBDA_MIN,
    DEFAULT_REPAIR_HOURS,
    assign_failure_rates,
    average_curtailed_power,
)
from .topology import all_nodes_traversed, is_radial

log = logging.getLogger("gridconf")

EPISODE_FIELDS = ["episode", "reward", "mse_loss", "acp", "epsilon", "open_set"]
CURVE_FIELDS = ["episode", "reward_mean", "mse_loss_mean", "acp_mean", "feasible_rate"]


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def _episode_row(rec: EpisodeRecord) -> list[str]:
    return [str(rec.episode), _fmt(rec.reward), _fmt(rec.mse_loss), _fmt(rec.acp),
            _fmt(rec.epsilon), ";".join(map(str, rec.open_set))]


def running_means(records: list[EpisodeRecord], window: int = 100) -> list[list[str]]:
    """Trailing means over the last ``window`` episodes (fewer at the start)."""
    rows = []
    for i in range(len(records)):
        chunk = records[max(0, i - window + 1): i + 1]
        feasible = [r.acp for r in chunk if r.acp is not None]
        rows.append([
            str(i),
            _fmt(sum(r.reward for r in chunk) / len(chunk)),
            _fmt(sum(r.mse_loss for r in chunk) / len(chunk)),
            _fmt(sum(feasible) / len(feasible)) if feasible else "",
            _fmt(len(feasible) / len(chunk)),
        ])
    return rows


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _reliability_params(args):
    """Flags win over the config file, which wins over the defaults."""
    base = load_train_config(args.config) if getattr(args, "config", None) else None
    lo = args.lambda_min if args.lambda_min is not None else (base.lambda_min if base else DEFAULT_LAMBDA_MIN)
    hi = args.lambda_max if args.lambda_max is not None else (base.lambda_max if base else DEFAULT_LAMBDA_MAX)
    rep = args.repair_hours if args.repair_hours is not None else (base.repair_hours if base else DEFAULT_REPAIR_HOURS)
    return lo, hi, rep


def cmd_train(args) -> int:
    overrides = {"seed": args.seed, "n_ep": args.episodes,
                 "lambda_min": args.lambda_min, "lambda_max": args.lambda_max,
                 "repair_hours": args.repair_hours}
    if args.config:
        cfg = load_train_config(args.config, **overrides)
    else:
        cfg = TrainConfig.from_mapping({k: v for k, v in overrides.items() if v is not None})
    net = load_dataset(args.dataset)
    model = assign_failure_rates(net, cfg.lambda_min, cfg.lambda_max, cfg.repair_hours)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": "train",
        "dataset": net.name,
        "dataset_arg": str(args.dataset),
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "version": __version__,
        "started_at": _now(),
        "finished_at": None,
        "artifacts": {
            "episodes": "episodes.csv",
            "curves": "curves.csv",
            "best": "best.json",
            "model": "q_function.json",
        },
    }
    _write_json(out / "manifest.json", manifest)

    records: list[EpisodeRecord] = []
    with open(out / "episodes.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EPISODE_FIELDS)

        def on_episode(rec: EpisodeRecord) -> None:
            writer.writerow(_episode_row(rec))
            if args.progress and (rec.episode + 1) % args.progress == 0:
                log.info("episode %d reward %.3f eps %.4f", rec.episode + 1, rec.reward, rec.epsilon)

        try:
            q, records = train(net, model, cfg, on_episode)
        finally:
            fh.flush()

    with open(out / "curves.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CURVE_FIELDS)
        writer.writerows(running_means(records, args.window))

    env = ReconfigEnv(net, model, cfg.T, cfg.penalty, cfg.reward_scale)
    greedy_cfg, greedy_out = greedy_rollout(q, env)
    best = {"dataset": net.name, "feasible_found": any(r.acp is not None for r in records),
            "open_edges": None, "acp": None, "episode": None,
            "greedy": {"open_edges": greedy_cfg.sorted(), "feasible": bool(greedy_out.feasible),
                       "acp": greedy_out.acp}}
    if best["feasible_found"]:
        cfg_best, acp = best_configuration(records)
        best.update(open_edges=cfg_best.sorted(), acp=acp,
                    episode=max(r.episode for r in records if r.acp == acp and set(r.open_set) == cfg_best.open_edges))
    _write_json(out / "best.json", best)
    _write_json(out / "q_function.json", q.state_dict())

    manifest["finished_at"] = _now()
    _write_json(out / "manifest.json", manifest)

    if best["feasible_found"]:
        print(f"best open set {{{','.join(map(str, best['open_edges']))}}} "
              f"ACP {best['acp']:.4f} MWh/yr (episode {best['episode']})")
    else:
        print("no feasible configuration found")
    return 0


def _parse_ids(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(";", ",").split(",") if t.strip()]
    except ValueError:
        raise GridconfError(f"bad open-edge list {text!r}") from None


def evaluate_open_set(net, model, ids: list[int]) -> dict:
    cfg = Configuration.of(net, ids)
    traversal = all_nodes_traversed(net, cfg)
    radial = is_radial(net, cfg)
    if not traversal:
        violated = "traversal"
    elif not radial:
        violated = "radiality"
    else:
        violated = "none"
    acp = average_curtailed_power(net, model, cfg) if violated == "none" else None
    return {"dataset": net.name, "open_edges": cfg.sorted(), "feasible": violated == "none",
            "traversal_ok": traversal, "radial_ok": radial, "violated": violated, "acp": acp}


def cmd_evaluate(args) -> int:
    net = load_dataset(args.dataset)
    ids = _parse_ids(args.open)
    T = args.T if args.T is not None else net.n_ties
    if len(ids) != T:
        raise GridconfError(f"expected {T} open edges, got {len(ids)}")
    lo, hi, rep = _reliability_params(args)
    result = evaluate_open_set(net, assign_failure_rates(net, lo, hi, rep), ids)
    if args.json:
        print(json.dumps(result, indent=2, sort_keys=True))
    else:
        print(f"dataset      {result['dataset']}")
        print(f"open edges   {{{','.join(map(str, result['open_edges']))}}}")
        print(f"traversal    {'ok' if result['traversal_ok'] else 'VIOLATED'}")
        print(f"radiality    {'ok' if result['radial_ok'] else 'VIOLATED'}")
        print(f"feasible     {str(result['feasible']).lower()}")
        if result["acp"] is not None:
            print(f"ACP          {result['acp']:.4f} MWh/yr")
    return 0


def format_report(report: EnumerationReport) -> str:
    lines = [
        f"dataset {report.dataset}: {report.total} open sets of size {report.open_count}, "
        f"{report.feasible} feasible ({report.backend}, {report.wall_time_s:.2f} s)",
        f"{'rank':>4}  {'ACP [MWh/yr]':>14}  open edges",
    ]
    for i, row in enumerate(report.top_k, 1):
        lines.append(f"{i:>4}  {row['acp']:>14.6f}  {{{','.join(map(str, row['open_edges']))}}}")
    return "\n".join(lines)


def cmd_enumerate(args) -> int:
    net = load_dataset(args.dataset)
    lo, hi, rep = _reliability_params(args)
    model = assign_failure_rates(net, lo, hi, rep)
    report = enumerate_optimal(net, model, args.T, args.top_k, args.workers, use_python=args.pure_python)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        _write_json(out, report.to_dict())
    print(format_report(report))
    return 0


def compare(best: dict, report: dict) -> dict:
    acp_dqn, acp_oracle = best["acp"], report["best_acp"]
    gap = (acp_dqn - acp_oracle) / acp_oracle
    return {
        "dqn_open_edges": best["open_edges"],
        "dqn_acp": acp_dqn,
        "oracle_open_edges": report["best_open_edges"],
        "oracle_acp": acp_oracle,
        "gap": gap,
        "same_configuration": sorted(best["open_edges"]) == sorted(report["best_open_edges"]),
    }


def cmd_compare(args) -> int:
    best_path = Path(args.run) / "best.json"
    oracle_path = Path(args.oracle)
    for p in (best_path, oracle_path):
        if not p.is_file():
            raise GridconfError(f"missing artifact {p}")
    best = json.loads(best_path.read_text())
    if best.get("acp") is None:
        raise GridconfError("training run found no feasible configuration")
    result = compare(best, json.loads(oracle_path.read_text()))
    if args.json:
        print(json.dumps(result, indent=2, sort_keys=True))
    else:
        print(f"DQN     {{{','.join(map(str, result['dqn_open_edges']))}}}  {result['dqn_acp']:.4f} MWh/yr")
        print(f"oracle  {{{','.join(map(str, result['oracle_open_edges']))}}}  {result['oracle_acp']:.4f} MWh/yr")
        print(f"gap     {100 * result['gap']:.2f} %")
        print(f"same configuration: {str(result['same_configuration']).lower()}")
    return 0


def _reliability_flags(p: argparse.ArgumentParser, config: bool = True) -> None:
    if config:
        p.add_argument("--config", help="JSON or TOML config supplying lambda_min, lambda_max, repair_hours")
    p.add_argument("--lambda-min", type=float, default=None, help="failure rate of the lowest-impedance branch (f/yr)")
    p.add_argument("--lambda-max", type=float, default=None, help="failure rate of the highest-impedance branch (f/yr)")
    p.add_argument("--repair-hours", type=float, default=None, help="outage duration per failure (h)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridconf", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the DQN agent")
    p.add_argument("--dataset", required=True, help="33, 69, a bundled name or a dataset directory")
    p.add_argument("--config", help="JSON or TOML training config")
    p.add_argument("--out", required=True, help="run directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--episodes", type=int, default=None, help="override n_ep")
    p.add_argument("--window", type=int, default=100, help="running-mean window for curves.csv")
    p.add_argument("--progress", type=int, default=0, metavar="N", help="log every N episodes")
    _reliability_flags(p, config=False)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="check and score one open-edge set")
    p.add_argument("--dataset", required=True)
    p.add_argument("--open", required=True, help="comma-separated branch ids")
    p.add_argument("--T", type=int, default=None, help="expected number of open edges (default: tie count)")
    p.add_argument("--json", action="store_true")
    _reliability_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("enumerate", help="exhaustive optimum over all open sets")
    p.add_argument("--dataset", required=True)
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--T", type=int, default=None)
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--pure-python", action="store_true", help="use the fallback kernel")
    _reliability_flags(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("compare", help="optimality gap of a training run against an oracle report")
    p.add_argument("--run", required=True)
    p.add_argument("--oracle", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose or getattr(args, "progress", 0) else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    log.debug("kernel backend: %s", kernels.BACKEND)
    try:
        return args.func(args)
    except (GridconfError, FileNotFoundError, ValueError) as exc:
        print(f"gridconf: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
