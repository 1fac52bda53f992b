"""Command-line entry point.

    hackernet run --authors a.csv --repos r.jsonl --interactions i.csv --forums f.csv -o out/
    hackernet summarize out/

Exit codes: 0 success, 2 config error, 3 input error, 4 stage failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .ingest import IngestError
from .pipeline import STAGE_PLAN, ConfigError, RunConfig, StageError, default_threads, run_pipeline, summarize

EXIT_OK, EXIT_CONFIG, EXIT_INPUT, EXIT_STAGE = 0, 2, 3, 4


def _add_inputs(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("inputs")
    g.add_argument("--config", help="JSON run config; flags override its values")
    g.add_argument("--authors", help="authors CSV (author_id,username)")
    g.add_argument("--repos", help="repositories JSON-lines")
    g.add_argument("--interactions", help="interactions CSV (kind,actor_id,target_id,timestamp)")
    g.add_argument("--forums", help="forum posts CSV")
    g.add_argument("--keywords", help="keyword config JSON")
    g.add_argument("-o", "--out-dir", dest="out_dir", help="output directory (default: report)")
    g.add_argument("--threads", type=int, help="worker threads (env HACKERNET_THREADS)")


def _add_influence(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("influence")
    g.add_argument("--tolerance", type=float)
    g.add_argument("--max-iter", dest="max_iter", type=int)
    g.add_argument("--phs-knee", dest="phs_knee", type=float)
    g.add_argument("--chs-knee", dest="chs_knee", type=float)
    g.add_argument("--weight-mode", dest="weight_mode", choices=("exact", "paper-rounded"))
    g.add_argument("--degree-basis", dest="degree_basis", choices=("all-nodes", "active-nodes"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hackernet", description=__doc__.splitlines()[0] if __doc__ else None)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_ in (
        ("ingest", "validate inputs and write the rejects report"),
        ("influence", "HackerScores, knees, regions"),
        ("communities", "bipartite communities with MS and SOP"),
        ("stats", "CCDFs, fork stats, cohorts, reciprocity"),
        ("egonet", "cross-platform username matches and egonets"),
        ("run", "the whole pipeline"),
    ):
        p = sub.add_parser(name, help=help_)
        _add_inputs(p)
        if name in ("influence", "communities", "egonet", "run"):
            _add_influence(p)
        if name in ("communities", "run"):
            p.add_argument("--min-leader-size", dest="min_leader_size", type=int)
        if name == "egonet":
            sel = p.add_mutually_exclusive_group()
            sel.add_argument("--username", action="append", dest="usernames")
            sel.add_argument("--all-matched", action="store_true")

    p = sub.add_parser("summarize", help="print a text digest of a report bundle")
    p.add_argument("bundle")

    p = sub.add_parser("synth", help="write the synthetic demo corpus")
    p.add_argument("out_dir")
    p.add_argument("--authors", type=int, default=50, dest="n_authors")
    p.add_argument("--seed", type=int, default=7)
    return parser


_CONFIG_KEYS = (
    "authors", "repos", "interactions", "forums", "keywords", "out_dir", "threads", "tolerance", "max_iter",
    "phs_knee", "chs_knee", "weight_mode", "degree_basis", "min_leader_size", "usernames",
)


def config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
    if overrides.get("usernames"):
        overrides["usernames"] = tuple(overrides["usernames"])
    if args.config:
        cfg = RunConfig.from_file(args.config, **overrides)
    else:
        cfg = RunConfig(**{k: v for k, v in overrides.items() if v is not None})
    if getattr(args, "threads", None) is None:
        cfg.threads = default_threads()
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")

    if args.command == "summarize":
        try:
            sys.stdout.write(summarize(args.bundle))
        except FileNotFoundError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT
        return EXIT_OK

    if args.command == "synth":
        from .synthetic import write_corpus

        paths = write_corpus(Path(args.out_dir), n_authors=args.n_authors, seed=args.seed)
        for p in paths.values():
            print(p)
        return EXIT_OK

    try:
        cfg = config_from_args(args)
        cfg.validate()
    except (ConfigError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        manifest = run_pipeline(cfg, STAGE_PLAN[args.command])
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as exc:
        if isinstance(exc.cause, (IngestError, OSError)):
            print(f"input error [{exc.stage}]: {exc.cause}", file=sys.stderr)
            return EXIT_INPUT
        print(f"stage failure [{exc.stage}]: {exc.cause}", file=sys.stderr)
        return EXIT_STAGE
    print(f"wrote {len(manifest['files'])} files to {cfg.out_dir}")
    return EXIT_OK
