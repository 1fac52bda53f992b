"""End-to-end run: ingest, graphs, influence, communities, stats, cross-platform.

Each stage writes its files with a ``.partial`` suffix and renames them only
when the stage finishes, so a failed stage leaves its partial output behind
and nothing that looks complete. ``manifest.json`` is written last.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from . import __version__
from .community import detect_communities, profile_community, wordcloud_weights
from .crossplatform import cross_egonet, match_usernames, matches_by_forum, scatter_series
from .graphs import (
    DEGREE_BASES,
    WEIGHT_MODES,
    apply_weights,
    build_aa_graph,
    build_ar_graph,
    calibrate_weights,
    export_aa,
    export_ar,
)
from .influence import author_profile, classify_regions, hacker_score, knee_point
from .ingest import ForumCorpus, KeywordConfig, load_dataset, load_forums, write_rejects
from .stats import CCDF_METRICS, ccdf, fork_counts, fork_stats, reciprocity, yearly_cohorts

log = logging.getLogger(__name__)

THREADS_ENV = "HACKERNET_THREADS"
STAGES = ("ingest", "graphs", "influence", "communities", "stats", "egonet")
MANIFEST = "manifest.json"


class ConfigError(Exception):
    pass


class StageError(Exception):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class RunConfig:
    authors: str = ""
    repos: str = ""
    interactions: str = ""
    forums: str | None = None
    keywords: str | None = None
    out_dir: str = "report"
    weight_mode: str = "exact"
    degree_basis: str = "all-nodes"
    tolerance: float = 1e-9
    max_iter: int = 10_000
    phs_knee: float | None = None
    chs_knee: float | None = None
    min_leader_size: int = 20
    usernames: tuple[str, ...] = ()
    threads: int = 1

    def validate(self) -> None:
        for name in ("authors", "repos", "interactions"):
            if not getattr(self, name):
                raise ConfigError(f"missing input path: {name}")
        if self.weight_mode not in WEIGHT_MODES:
            raise ConfigError(f"weight_mode must be one of {WEIGHT_MODES}")
        if self.degree_basis not in DEGREE_BASES:
            raise ConfigError(f"degree_basis must be one of {DEGREE_BASES}")
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be > 0")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be >= 1")
        if self.min_leader_size < 1:
            raise ConfigError("min_leader_size must be >= 1")
        for name in ("phs_knee", "chs_knee"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"{name} must be > 0")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    @classmethod
    def from_file(cls, path: str | Path, **overrides: Any) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        if "usernames" in data:
            data["usernames"] = tuple(data["usernames"])
        return cls(**data)

    def echo(self) -> dict:
        d = asdict(self)
        d["usernames"] = list(self.usernames)
        return d


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", name) or "_"


class Bundle:
    """Output directory with per-stage commit of ``.partial`` files."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._clear_previous()
        self.committed: list[str] = []
        self._pending: list[str] = []

    def _clear_previous(self) -> None:
        manifest = self.root / MANIFEST
        if manifest.exists():
            try:
                old = json.loads(manifest.read_text(encoding="utf-8"))
                for name in old.get("files", {}):
                    (self.root / name).unlink(missing_ok=True)
            except (json.JSONDecodeError, OSError):
                pass
            manifest.unlink()
        for p in self.root.glob("*.partial"):
            p.unlink()

    def path(self, name: str) -> Path:
        self._pending.append(name)
        return self.root / (name + ".partial")

    def write_csv(self, name: str, header, rows) -> None:
        with self.path(name).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)

    def write_json(self, name: str, obj) -> None:
        self.path(name).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    def commit(self) -> None:
        for name in self._pending:
            (self.root / (name + ".partial")).replace(self.root / name)
            self.committed.append(name)
        self._pending = []

    def digests(self) -> dict[str, str]:
        return {name: sha256_file(self.root / name) for name in sorted(self.committed)}


@dataclass
class RunState:
    config: RunConfig
    keywords: KeywordConfig = field(default_factory=KeywordConfig)
    corpus: Any = None
    forums: ForumCorpus = field(default_factory=ForumCorpus)
    aa: Any = None
    ar: Any = None
    calibration: Any = None
    scores: Any = None
    regions: Any = None
    knees: dict = field(default_factory=dict)
    communities: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)


def _stage_ingest(st: RunState, out: Bundle) -> None:
    cfg = st.config
    if cfg.keywords:
        st.keywords = KeywordConfig.from_json(cfg.keywords)
    st.corpus = load_dataset(cfg.authors, cfg.repos, cfg.interactions)
    if cfg.forums:
        st.forums = load_forums(cfg.forums)
    write_rejects(list(st.corpus.rejects) + list(st.forums.rejects), out.path("rejects.csv"))
    out.write_json(
        "corpus.json",
        {
            "counts": st.corpus.counts(),
            "rows": st.corpus.row_counts,
            "forums": st.forums.forum_summary(),
            "forum_totals": st.forums.counts(),
            "keywords": st.keywords.to_json(),
        },
    )
    st.counts["ingest"] = {**st.corpus.counts(), "rejected": len(st.corpus.rejects), "forum_posts": len(st.forums.posts)}


def _stage_graphs(st: RunState, out: Bundle) -> None:
    cfg = st.config
    st.ar = build_ar_graph(st.corpus)
    export_ar(st.ar, out.path("ar_edges.jsonl"), out.path("ar_nodes.csv"))
    raw = build_aa_graph(st.corpus)
    st.calibration = calibrate_weights(raw, cfg.weight_mode, cfg.degree_basis)
    st.aa = apply_weights(raw, st.calibration)
    export_aa(st.aa, out.path("aa_edges.jsonl"), out.path("aa_nodes.csv"))
    c = st.calibration
    out.write_json(
        "calibration.json",
        {"mode": c.mode, "degree_basis": cfg.degree_basis, "avg_degree": c.avg_degree, "d_min": c.d_min,
         "weights": c.weights, "flagged_zero_labels": list(c.flagged)},
    )
    st.counts["graphs"] = {
        "aa_nodes": len(st.aa.nodes),
        "aa_edges": len(st.aa.edges),
        "ar_authors": len(st.ar.author_nodes),
        "ar_repos": len(st.ar.repo_nodes),
        "ar_edges": st.ar.n_edges,
    }


def _knee(values, override: float | None) -> tuple[float, str, bool]:
    if override is not None:
        return override, "override", False
    k = knee_point(values)
    return k.value, "chord", k.weak


def _stage_influence(st: RunState, out: Bundle) -> None:
    cfg = st.config
    st.scores = hacker_score(st.aa, cfg.tolerance, cfg.max_iter)
    t = st.scores
    phs_knee, phs_src, phs_weak = _knee(t.phs.values(), cfg.phs_knee)
    chs_knee, chs_src, chs_weak = _knee(t.chs.values(), cfg.chs_knee)
    st.knees = {"phs": phs_knee, "chs": chs_knee, "phs_source": phs_src, "chs_source": chs_src,
                "phs_weak": phs_weak, "chs_weak": chs_weak}
    st.regions = classify_regions(t, phs_knee, chs_knee)
    reg = st.regions
    names = st.corpus.author_index
    out.write_csv(
        "scores.csv",
        ["author", "username", "phs", "chs", "region"],
        ([a, names[a].username, t.phs[a], t.chs[a], reg.region[a]] for a in st.aa.nodes),
    )
    out.write_csv(
        "hig.csv",
        ["author", "username", "phs", "chs", "region"],
        ([a, names[a].username, t.phs[a], t.chs[a], reg.region[a]] for a in reg.hig),
    )
    top = []
    for a in t.ranking("phs")[:2] + t.ranking("chs")[:2]:
        if a not in top:
            top.append(a)
    out.write_csv(
        "profiles.csv",
        ["author", "name", "phs", "chs", "repos", "followers", "forks_received", "comments_received",
         "contributions_received"],
        ([a, *author_profile(a, st.corpus, st.aa, t).as_row()] for a in top),
    )
    out.write_json(
        "influence.json",
        {"iterations": t.iterations, "converged": t.converged, "tolerance": cfg.tolerance,
         "max_iter": cfg.max_iter, "knees": st.knees, "region_sizes": reg.sizes(),
         "region_shares": reg.shares(), "hig_size": len(reg.hig),
         "note": "forks/comments/contributions in profiles.csv are received on the author's repositories"},
    )
    st.counts["influence"] = {"iterations": t.iterations, "converged": t.converged, "hig": len(reg.hig)}


def _stage_communities(st: RunState, out: Bundle) -> None:
    cfg = st.config
    found = detect_communities(st.ar)
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        st.communities = list(
            pool.map(lambda c: profile_community(c, st.corpus, st.keywords, st.scores, cfg.min_leader_size), found)
        )
    rows = []
    for c in st.communities:
        dp = c.dominant("platform") or ("", "")
        dt = c.dominant("malware") or ("", "")
        rows.append([c.id, len(c.authors), len(c.repos), c.modularity_score, dp[0], dp[1], dt[0], dt[1]])
    out.write_csv(
        "communities.csv",
        ["id", "n_authors", "n_repos", "MS", "dominant_platform", "platform_SOP", "dominant_type", "type_SOP"],
        rows,
    )
    membership = []
    for c in st.communities:
        membership.extend([a, "author", c.id] for a in sorted(c.authors))
        membership.extend([r, "repo", c.id] for r in sorted(c.repos))
    out.write_csv("membership.csv", ["node", "side", "community_id"], membership)
    out.write_csv(
        "leaders.csv",
        ["community_id", "author", "phs", "chs"],
        ([c.id, a, st.scores.phs.get(a, 0.0), st.scores.chs.get(a, 0.0)] for c in st.communities for a in c.leaders),
    )
    for c in st.communities:
        weights = wordcloud_weights(c)
        if weights:
            out.write_json(f"wordcloud_{c.id}.json", weights)
    st.counts["communities"] = {"communities": len(st.communities)}


def _stage_stats(st: RunState, out: Bundle) -> None:
    corpus = st.corpus
    for metric in CCDF_METRICS:
        series = ccdf(metric, corpus)
        out.write_csv(f"ccdf_{metric}.csv", ["value", "ccdf"], series.points)
    mean, frac = fork_stats(corpus) if corpus.repos else (0.0, 0.0)
    out.write_json(
        "fork_stats.json",
        {"mean_forks_per_repo": mean, "fraction_forked_at_least_once": frac,
         "total_forks": sum(fork_counts(corpus).values()), "repos": len(corpus.repos)},
    )
    coh = yearly_cohorts(corpus)
    rows = [[y, na, nr] for y, (na, nr) in coh.by_year.items()]
    rows.append(["undated", coh.undated_authors, coh.undated_repos])
    out.write_csv("cohorts.csv", ["year", "new_authors", "new_repos"], rows)
    rep = reciprocity(corpus)
    out.write_csv(
        "reciprocity.csv",
        ["relationship", "pair_count", "mutual_count", "RI"],
        ([k, r.pair_count, r.mutual_count, "n/a" if r.index is None else r.index] for k, r in rep.items()),
    )
    st.counts["stats"] = {"cohort_years": len(coh.by_year)}


def _stage_egonet(st: RunState, out: Bundle) -> None:
    cfg = st.config
    matched = match_usernames(st.corpus, st.forums)
    per_forum = matches_by_forum(st.corpus, st.forums)
    out.write_csv(
        "matches.csv",
        ["username", "forums"],
        ([u, ";".join(f for f, names in per_forum.items() if u in names)] for u in matched),
    )
    wanted = list(cfg.usernames) if cfg.usernames else matched
    egonets = [cross_egonet(u, st.aa, st.forums, st.corpus) for u in wanted]
    for e in egonets:
        out.write_json(f"egonet_{safe_name(e.username)}.json", e.to_json())
    out.write_csv("scatter.csv", ["username", "github_degree", "forum_degree"], scatter_series(egonets))
    st.counts["egonet"] = {"matched": len(matched), "egonets": len(egonets)}


_STAGE_FUNCS = {
    "ingest": _stage_ingest,
    "graphs": _stage_graphs,
    "influence": _stage_influence,
    "communities": _stage_communities,
    "stats": _stage_stats,
    "egonet": _stage_egonet,
}

# stages each subcommand needs, in order
STAGE_PLAN = {
    "ingest": ("ingest",),
    "influence": ("ingest", "graphs", "influence"),
    "communities": ("ingest", "graphs", "influence", "communities"),
    "stats": ("ingest", "stats"),
    "egonet": ("ingest", "graphs", "egonet"),
    "run": STAGES,
}


def _input_digests(cfg: RunConfig) -> dict[str, str]:
    out = {}
    for name in ("authors", "repos", "interactions", "forums", "keywords"):
        p = getattr(cfg, name)
        if p and Path(p).is_file():
            out[name] = sha256_file(p)
    return out


def run_pipeline(config: RunConfig, stages=STAGES) -> dict:
    """Run ``stages`` in order and write the bundle; returns the manifest."""
    config.validate()
    out = Bundle(config.out_dir)
    st = RunState(config)
    for stage in stages:
        t0 = time.perf_counter()
        try:
            _STAGE_FUNCS[stage](st, out)
        except Exception as exc:
            log.error("stage %s failed: %s", stage, exc)
            raise StageError(stage, exc) from exc
        out.commit()
        st.timings[stage] = round(time.perf_counter() - t0, 6)
        log.info("stage %s done in %.3fs", stage, st.timings[stage])
    manifest = {
        "tool": "hackernet",
        "version": __version__,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "config": config.echo(),
        "inputs": _input_digests(config),
        "stages": list(stages),
        "counts": st.counts,
        "timings": st.timings,
        "decisions": {
            "weight_mode": config.weight_mode,
            "degree_basis": config.degree_basis,
            "weights": st.calibration.weights if st.calibration else None,
            "knees": st.knees or None,
            "null_model": "barber-bipartite" if "communities" in stages else None,
            "github_egonet": "undirected union of in- and out-neighbours over all edge labels",
            "username_matching": "exact after strip + lowercase",
        },
        "files": out.digests(),
    }
    (out.root / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest


def _read_csv(path: Path) -> list[dict]:
    with path.open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _num(x: str, digits: int = 4) -> str:
    try:
        return f"{float(x):.{digits}f}"
    except ValueError:
        return x or "-"


def summarize(bundle_dir: str | Path) -> str:
    root = Path(bundle_dir)
    needed = ["scores.csv", "communities.csv", "reciprocity.csv", "cohorts.csv", "matches.csv"]
    for name in needed:
        if not (root / name).is_file():
            raise FileNotFoundError(f"missing report file: {name}")
    lines = []
    scores = _read_csv(root / "scores.csv")
    for key, title in (("phs", "Top producers (PHS)"), ("chs", "Top connectors (CHS)")):
        lines.append(title)
        ranked = sorted(scores, key=lambda r: (-float(r[key]), r["author"]))[:10]
        for i, r in enumerate(ranked, 1):
            lines.append(f"  {i:2d}. {r['username']} ({r['author']}) {key.upper()}={float(r[key]):.6f} region={r['region']}")
    lines.append("")
    lines.append("Largest communities")
    lines.append("  ID, Authors, Repos, MS, Dominant Platform, SOP, Dominant type, SOP")
    for r in _read_csv(root / "communities.csv")[:5]:
        lines.append(
            "  " + ", ".join([r["id"], r["n_authors"], r["n_repos"], _num(r["MS"], 2), r["dominant_platform"] or "-",
                              _num(r["platform_SOP"], 2), r["dominant_type"] or "-", _num(r["type_SOP"], 2)])
        )
    lines.append("")
    lines.append("Reciprocity Index")
    for r in _read_csv(root / "reciprocity.csv"):
        lines.append(f"  {r['relationship']:<11s} pairs={r['pair_count']:>6s} mutual={r['mutual_count']:>5s} RI={_num(r['RI'])}")
    lines.append("")
    lines.append("New authors / repositories per year")
    for r in _read_csv(root / "cohorts.csv"):
        lines.append(f"  {r['year']:>8s} {r['new_authors']:>6s} {r['new_repos']:>6s}")
    lines.append("")
    lines.append(f"cross-platform matches: {len(_read_csv(root / 'matches.csv'))}")
    return "\n".join(lines) + "\n"
