"""Producer/Connector HackerScores on the weighted Author-Author graph.

The scores are a weighted HITS variant: producer score is authority-like
(collected from in-edges), connector score is hub-like (collected from
out-edges), and both vectors are L1-normalised after every step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graphs import AuthorAuthorGraph
from .ingest import Corpus

REGIONS = ("A", "B", "C", "D")


class InfluenceError(Exception):
    pass


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    delta: float
    phs_sum: float
    chs_sum: float


@dataclass(frozen=True)
class HackerScoreTable:
    phs: dict[str, float]
    chs: dict[str, float]
    iterations: int
    converged: bool
    trace: tuple[IterationRecord, ...] = field(default=(), repr=False)

    def ranking(self, which: str = "phs") -> list[str]:
        """Authors by descending score, ties by id."""
        scores = self.phs if which == "phs" else self.chs
        return sorted(scores, key=lambda a: (-scores[a], a))


@dataclass(frozen=True)
class Knee:
    value: float
    rank: int
    distance: float
    weak: bool


@dataclass(frozen=True)
class RegionClassification:
    phs_knee: float
    chs_knee: float
    region: dict[str, str]

    @property
    def hig(self) -> list[str]:
        return sorted(a for a, r in self.region.items() if r != "D")

    def shares(self) -> dict[str, float]:
        n = len(self.region)
        counts = dict.fromkeys(REGIONS, 0)
        for r in self.region.values():
            counts[r] += 1
        return {r: (counts[r] / n if n else 0.0) for r in REGIONS}

    def sizes(self) -> dict[str, int]:
        counts = dict.fromkeys(REGIONS, 0)
        for r in self.region.values():
            counts[r] += 1
        return counts


@dataclass(frozen=True)
class ProfileRow:
    name: str
    phs: float
    chs: float
    repos: int
    followers: int
    forks: int
    comments: int
    contributions: int

    HEADER = ("Name", "PHS", "CHS", "Repos", "Followers", "Forks", "Comments", "Contribs")

    def as_row(self) -> tuple:
        return (self.name, self.phs, self.chs, self.repos, self.followers, self.forks, self.comments, self.contributions)


def _edge_arrays(g: AuthorAuthorGraph) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    index = {n: i for i, n in enumerate(g.nodes)}
    # canonical edge order keeps the float reductions identical run to run
    edges = sorted(g.edges)
    src = np.fromiter((index[e.src] for e in edges), dtype=np.int64, count=len(edges))
    dst = np.fromiter((index[e.dst] for e in edges), dtype=np.int64, count=len(edges))
    w = np.fromiter((e.weight for e in edges), dtype=np.float64, count=len(edges))
    return src, dst, w


def _normalized(v: np.ndarray) -> np.ndarray:
    total = v.sum()
    if not total > 0:
        raise InfluenceError("degenerate graph: zero score vector")
    return v / total


def hacker_score(g: AuthorAuthorGraph, tolerance: float = 1e-9, max_iter: int = 10_000) -> HackerScoreTable:
    """Iterate producer/connector scores to a fixed point.

    Parallel edges with different labels all contribute. Stops when no node's
    score moves by ``tolerance`` or more in either vector.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be > 0")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    n = len(g.nodes)
    if n == 0:
        raise InfluenceError("degenerate graph: zero score vector")
    src, dst, w = _edge_arrays(g)
    phs = np.ones(n)
    chs = np.ones(n)
    trace = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        new_phs = np.bincount(dst, weights=w * chs[src], minlength=n)
        new_chs = np.bincount(src, weights=w * new_phs[dst], minlength=n)
        new_phs = _normalized(new_phs)
        new_chs = _normalized(new_chs)
        delta = max(np.abs(new_phs - phs).max(), np.abs(new_chs - chs).max())
        phs, chs = new_phs, new_chs
        trace.append(IterationRecord(it, float(delta), float(phs.sum()), float(chs.sum())))
        if delta < tolerance:
            converged = True
            break
    return HackerScoreTable(
        phs=dict(zip(g.nodes, phs.tolist())),
        chs=dict(zip(g.nodes, chs.tolist())),
        iterations=it,
        converged=converged,
        trace=tuple(trace),
    )


def knee_point(scores) -> Knee:
    """Elbow of a descending rank-score curve by maximum distance to the end-to-end chord.

    Non-positive scores are dropped first. Both axes are rescaled to [0, 1];
    this does not move the argmax, it only keeps the distances comparable.
    """
    ys = sorted((float(s) for s in scores if s > 0), reverse=True)
    if len(set(ys)) < 3:
        raise InfluenceError("no knee: fewer than 3 distinct positive values")
    n = len(ys)
    y = np.asarray(ys)
    x = np.arange(n, dtype=float) / (n - 1)
    y_norm = (y - y[-1]) / (y[0] - y[-1])
    # chord runs from (0, 1) to (1, 0): distance is |x + y - 1| / sqrt(2)
    dist = np.abs(x + y_norm - 1.0) / np.sqrt(2.0)
    best = int(np.argmax(dist))  # first maximum = highest score on ties
    weak = bool(dist[best] <= 1e-12)
    return Knee(value=ys[best], rank=best + 1, distance=float(dist[best]), weak=weak)


def detect_knee(scores) -> float:
    return knee_point(scores).value


def classify_regions(t: HackerScoreTable, phs_knee: float, chs_knee: float) -> RegionClassification:
    """A: connector only, B: both, C: producer only, D: neither (strictly above a knee counts as high)."""
    if phs_knee <= 0 or chs_knee <= 0:
        raise ValueError("knees must be > 0")
    region = {}
    for a in sorted(t.phs):
        hi_p = t.phs[a] > phs_knee
        hi_c = t.chs.get(a, 0.0) > chs_knee
        region[a] = "B" if hi_p and hi_c else "C" if hi_p else "A" if hi_c else "D"
    return RegionClassification(phs_knee, chs_knee, region)


def author_profile(author: str, corpus: Corpus, g: AuthorAuthorGraph, t: HackerScoreTable) -> ProfileRow:
    """Counts behind one author's influence: received forks/comments/contributions
    are interaction records on the author's repositories by other authors."""
    ref = corpus.author_index.get(author)
    if ref is None:
        raise KeyError(f"unknown author {author!r}")
    owned = {r.repo_id for r in corpus.repos if r.owner_id == author}
    followers = set()
    received = {"fork": 0, "comment": 0, "contribute": 0}
    for rec in corpus.interactions:
        if rec.kind == "follow" and rec.target == author:
            followers.add(rec.actor_id)
        elif rec.kind in received and rec.target in owned and rec.actor_id != author:
            received[rec.kind] += 1
    return ProfileRow(
        name=ref.username,
        phs=t.phs.get(author, 0.0),
        chs=t.chs.get(author, 0.0),
        repos=len(owned),
        followers=len(followers),
        forks=received["fork"],
        comments=received["comment"],
        contributions=received["contribute"],
    )
