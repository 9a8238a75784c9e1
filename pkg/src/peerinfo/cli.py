"""Command-line entry point: ``peerinfo <subcommand> [options]``.

Exit status is 0 on success, 1 on invalid input or configuration, and 2
when ``verify`` finds a failing prediction.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from peerinfo.classifier import classify, type_shares
from peerinfo.clustering import SilhouetteKMeans
from peerinfo.config import ConfigError, RunConfig
from peerinfo.formats import (
    ParseError,
    read_assignments,
    read_embeddings,
    read_schedules,
    read_workers,
    write_assignments,
    write_effects,
    write_policy_report,
    write_schedules,
    write_workers,
)
from peerinfo.simulator import estimate_effects, run_experiment, simulate_population
from peerinfo.verify import verify_predictions
from peerinfo.welfare import Policy, best_targeted_policy, policy_report

__all__ = ["main"]

log = logging.getLogger("peerinfo")

OUT_ENV = "PEERINFO_OUT"
EXIT_OK, EXIT_INVALID, EXIT_HYPOTHESIS = 0, 1, 2


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV) or "peerinfo_out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _input(args, out: Path, default: str) -> Path:
    path = Path(args.input) if args.input else out / default
    if not path.is_file():
        raise FileNotFoundError(f"input file not found: {path}")
    return path


def _ext(fmt: str) -> str:
    return "csv" if fmt == "csv" else "jsonl"


def cmd_simulate(cfg: RunConfig, args, out: Path) -> int:
    records = run_experiment(simulate_population(cfg.population, cfg.classifier), cfg.population)
    write_workers(out / "workers.csv", records)
    write_schedules(out / "schedules.csv", [r.schedule for r in records])
    log.info("simulated %d workers", len(records))
    return EXIT_OK


def cmd_elicit(cfg: RunConfig, args, out: Path) -> int:
    records = simulate_population(cfg.population, cfg.classifier)
    write_schedules(out / "schedules.csv", [r.schedule for r in records])
    log.info("elicited %d schedules", len(records))
    return EXIT_OK


def cmd_classify(cfg: RunConfig, args, out: Path) -> int:
    schedules = read_schedules(_input(args, out, "schedules.csv"))
    types = [(wid, classify(s, cfg.classifier)) for wid, s in schedules.items()]
    write_assignments(out / "classification.csv", "type", types)
    shares = type_shares(t for _, t in types)
    log.info("type shares: %s", ", ".join(f"type{int(t)}={v:.3f}" for t, v in shares.items()))
    return EXIT_OK


def cmd_cluster(cfg: RunConfig, args, out: Path) -> int:
    emb = read_embeddings(_input(args, out, "embeddings.txt"))
    c = cfg.clustering
    model = SilhouetteKMeans(c.k_min, c.k_max, c.restarts, c.max_iter, c.tol, cfg.seed, c.normalize).fit(emb.X)
    write_assignments(out / "clusters.csv", "cluster", zip(emb.ids, model.labels_.tolist()))
    report = {
        "n": len(emb.ids),
        "d": int(emb.X.shape[1]),
        "k": int(model.n_clusters_),
        "inertia": float(model.inertia_),
        "silhouette_by_k": {str(k): float(v) for k, v in sorted(model.silhouette_scores_.items())},
    }
    (out / "cluster_report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    log.info("selected k=%d", model.n_clusters_)
    return EXIT_OK


def _workers_with_labels(args, out: Path):
    records = read_workers(_input(args, out, "workers.csv"))
    if getattr(args, "clusters", None):
        labels = read_assignments(args.clusters, "cluster")
        missing = [r.worker_id for r in records if r.worker_id not in labels]
        if missing:
            raise ValueError(f"{args.clusters}: no cluster label for {len(missing)} worker(s), e.g. {missing[0]!r}")
        records = [replace(r, cluster=labels[r.worker_id]) for r in records]
    return records


def cmd_welfare(cfg: RunConfig, args, out: Path) -> int:
    records = _workers_with_labels(args, out)
    policies = [Policy.uniform_exante(), Policy.uniform_expost(), cfg.targeted, best_targeted_policy(records)]
    write_policy_report(out / f"policy_report.{_ext(args.format)}", policy_report(records, policies), args.format)
    return EXIT_OK


def cmd_report(cfg: RunConfig, args, out: Path) -> int:
    records = _workers_with_labels(args, out)
    groupings = ["all", "type"] + (["cluster"] if any(r.cluster is not None for r in records) else [])
    for g in groupings:
        write_effects(out / f"effects_{g}.{_ext(args.format)}", estimate_effects(records, g), args.format)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args, out: Path) -> int:
    v = cfg.verify
    report = verify_predictions(v.grid, v.tol, v.fd_tol, v.fd_step)
    (out / "theory_report.json").write_text(report.to_json(), encoding="utf-8")
    for c in report.claims.values():
        log.info("%s %s (max violation %.3g, %d/%d)", "PASS" if c.passed else "FAIL", c.identifier, c.max_violation, c.pass_count, c.grid_size)
    return EXIT_OK if report.passed else EXIT_HYPOTHESIS


COMMANDS = {
    "simulate": (cmd_simulate, "simulate a population through both periods"),
    "elicit": (cmd_elicit, "write the contingent WTP schedules of a simulated population"),
    "classify": (cmd_classify, "classify schedules into worker types"),
    "cluster": (cmd_cluster, "k-means with silhouette-chosen k over an embedding file"),
    "welfare": (cmd_welfare, "compare uniform and targeted information policies"),
    "report": (cmd_report, "estimate treatment effects overall, by type and by cluster"),
    "verify": (cmd_verify, "check every model prediction over a parameter grid"),
}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for failed predictions here
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--seed", type=int, help="master seed (unsigned 64-bit), overrides the config")
    common.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or ./peerinfo_out)")
    common.add_argument("--format", choices=("csv", "jsonl"), default="csv", help="format of tabular reports")
    common.add_argument("--input", help="input file (defaults to the matching artifact in the output directory)")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = _Parser(prog="peerinfo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name in ("welfare", "report"):
            p.add_argument("--clusters", help="worker_id,cluster CSV to attach cluster labels")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = RunConfig.load(args.config) if args.config else RunConfig()
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        out = _out_dir(args)
        return COMMANDS[args.command][0](cfg, args, out)
    except (ParseError, ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
