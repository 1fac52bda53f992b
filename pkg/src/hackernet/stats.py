"""Ecosystem statistics: CCDFs, fork rates, yearly cohorts, reciprocity."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass

from .ingest import Corpus

CCDF_METRICS = ("repos_created", "followers", "total_forks_received")
RECIPROCITY_KINDS = ("follow", "fork", "comment", "contribute", "watch", "star")


@dataclass(frozen=True)
class CcdfSeries:
    metric: str
    points: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class Cohorts:
    by_year: dict[int, tuple[int, int]]
    undated_authors: int
    undated_repos: int


@dataclass(frozen=True)
class Reciprocity:
    pair_count: int
    mutual_count: int

    @property
    def index(self) -> float | None:
        return self.mutual_count / self.pair_count if self.pair_count else None


def per_author_metric(metric: str, corpus: Corpus) -> dict[str, int]:
    values = {a.author_id: 0 for a in corpus.authors}
    if metric == "repos_created":
        for r in corpus.repos:
            values[r.owner_id] += 1
    elif metric == "followers":
        followers = defaultdict(set)
        for rec in corpus.interactions:
            if rec.kind == "follow":
                followers[rec.target].add(rec.actor_id)
        for a, fs in followers.items():
            values[a] = len(fs)
    elif metric == "total_forks_received":
        for rec in corpus.interactions:
            if rec.kind == "fork":
                owner = corpus.owner_of(rec.target)
                if owner != rec.actor_id:
                    values[owner] += 1
    else:
        raise ValueError(f"unknown metric {metric!r}; expected one of {CCDF_METRICS}")
    return values


def ccdf_from_values(values, metric: str = "") -> CcdfSeries:
    """Points (x, P(X >= x)) at every distinct observed value."""
    vals = sorted(values)
    n = len(vals)
    if n == 0:
        return CcdfSeries(metric, ())
    counts = Counter(vals)
    points = []
    remaining = n
    for x in sorted(counts):
        points.append((x, remaining / n))
        remaining -= counts[x]
    return CcdfSeries(metric, tuple(points))


def ccdf(metric: str, corpus: Corpus) -> CcdfSeries:
    return ccdf_from_values(per_author_metric(metric, corpus).values(), metric)


def fraction_below(series: CcdfSeries, threshold: float) -> float:
    """Share of the population with value strictly below ``threshold``."""
    above = [p for x, p in series.points if x >= threshold]
    return 1.0 - (above[0] if above else 0.0)


def fork_counts(corpus: Corpus) -> dict[str, int]:
    counts = {r.repo_id: 0 for r in corpus.repos}
    for rec in corpus.interactions:
        if rec.kind == "fork":
            counts[rec.target] += 1
    return counts


def fork_stats(corpus: Corpus) -> tuple[float, float]:
    """(mean forks per repository, fraction of repositories forked at least once)."""
    counts = fork_counts(corpus)
    if not counts:
        raise ValueError("no repositories")
    n = len(counts)
    return sum(counts.values()) / n, sum(1 for c in counts.values() if c > 0) / n


def yearly_cohorts(corpus: Corpus) -> Cohorts:
    """New authors (by first dated repository) and new repositories per UTC year."""
    first: dict[str, int] = {}
    new_repos: Counter = Counter()
    undated_repos = 0
    for r in corpus.repos:
        if r.created_at is None:
            undated_repos += 1
            continue
        year = r.created_at.year  # created_at is normalised to UTC at ingest
        new_repos[year] += 1
        if r.owner_id not in first or year < first[r.owner_id]:
            first[r.owner_id] = year
    new_authors = Counter(first.values())
    years = sorted(set(new_repos) | set(new_authors))
    return Cohorts(
        {y: (new_authors[y], new_repos[y]) for y in years},
        undated_authors=len(corpus.authors) - len(first),
        undated_repos=undated_repos,
    )


def directed_pairs(corpus: Corpus, kind: str) -> set[tuple[str, str]]:
    """Author-level (actor, recipient) pairs; repo-mediated kinds resolve to the repo owner."""
    pairs = set()
    for rec in corpus.interactions:
        if rec.kind != kind:
            continue
        other = rec.target if kind == "follow" else corpus.owner_of(rec.target)
        if other != rec.actor_id:
            pairs.add((rec.actor_id, other))
    return pairs


def reciprocity(corpus: Corpus) -> dict[str, Reciprocity]:
    report = {}
    for kind in RECIPROCITY_KINDS:
        directed = directed_pairs(corpus, kind)
        unordered = {frozenset(p) for p in directed}
        mutual = sum(1 for u, v in directed if u < v and (v, u) in directed)
        report[kind] = Reciprocity(len(unordered), mutual)
    return report
