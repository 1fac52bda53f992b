"""Bipartite communities on the Author-Repository graph and their profiles.

Detection is agglomerative greedy maximisation of Barber's bipartite
modularity

    Q = 1/m * sum_{a in A, r in R} (B_ar - k_a d_r / m) [g_a == g_r]

where k_a, d_r are author and repository degrees and m the edge count. Gains
are tracked as the integer ``m * e_cd - (K_c D_d + K_d D_c)`` (that is,
m^2 times the true gain) so ties are detected exactly. As in
Clauset-Newman-Moore, merging continues while the best gain between two
connected communities is non-negative; zero-gain merges are what join a
complete biclique into a single community.
"""

from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass, field, replace

from .graphs import AuthorRepoGraph
from .influence import HackerScoreTable
from .ingest import Corpus, KeywordConfig, extract_keyword_set

AUTHOR, REPO = "author", "repo"


class CommunityError(Exception):
    pass


@dataclass(frozen=True)
class CommunityProfile:
    id: int
    authors: frozenset[str]
    repos: frozenset[str]
    edge_count: int
    modularity_score: float = 0.0
    ms_undefined: bool = False
    leaders: tuple[str, ...] = ()
    sop_malware: dict[str, float] = field(default_factory=dict)
    sop_platform: dict[str, float] = field(default_factory=dict)
    flags: tuple[str, ...] = ()

    @property
    def size(self) -> int:
        return len(self.authors) + len(self.repos)

    def dominant(self, which: str) -> tuple[str, float] | None:
        sop = self.sop_malware if which == "malware" else self.sop_platform
        if not sop:
            return None
        # sop maps keep keyword-config order, so max() breaks ties by that order
        kw = max(sop, key=lambda k: sop[k])
        return kw, sop[kw]


@dataclass(frozen=True)
class Partition:
    """Raw output of the greedy pass: node -> community label, plus merge gains."""

    labels: dict[tuple[str, str], int]
    gains: tuple[float, ...]
    modularity: float


def _node_list(g: AuthorRepoGraph) -> list[tuple[str, str]]:
    return [(AUTHOR, a) for a in g.author_nodes] + [(REPO, r) for r in g.repo_nodes]


def bipartite_modularity(g: AuthorRepoGraph, labels: dict[tuple[str, str], int]) -> float:
    m = g.n_edges
    if m == 0:
        raise CommunityError("empty graph")
    k: dict[tuple[str, str], int] = defaultdict(int)
    inside = 0
    for a, r in g.edges:
        k[(AUTHOR, a)] += 1
        k[(REPO, r)] += 1
        if labels[(AUTHOR, a)] == labels[(REPO, r)]:
            inside += 1
    ka: dict[int, int] = defaultdict(int)
    dr: dict[int, int] = defaultdict(int)
    for node, c in labels.items():
        (ka if node[0] == AUTHOR else dr)[c] += k[node]
    expected = sum(ka[c] * dr[c] for c in ka)
    return (m * inside - expected) / (m * m)


def greedy_partition(g: AuthorRepoGraph) -> Partition:
    m = g.n_edges
    if m == 0:
        raise CommunityError("empty graph")
    nodes = _node_list(g)
    index = {n: i for i, n in enumerate(nodes)}
    ka = [0] * len(nodes)
    dr = [0] * len(nodes)
    between: list[dict[int, int]] = [defaultdict(int) for _ in nodes]
    for a, r in g.edges:
        i, j = index[(AUTHOR, a)], index[(REPO, r)]
        ka[i] += 1
        dr[j] += 1
        between[i][j] += 1
        between[j][i] += 1

    members = {i: [i] for i in range(len(nodes))}
    version = [0] * len(nodes)

    def gain(c: int, d: int) -> int:
        return m * between[c][d] - (ka[c] * dr[d] + ka[d] * dr[c])

    heap = []
    for c in range(len(nodes)):
        for d in between[c]:
            if c < d:
                gcd = gain(c, d)
                if gcd >= 0:
                    heap.append((-gcd, c, d, 0, 0))
    heapq.heapify(heap)

    gains = []
    while heap:
        neg, c, d, vc, vd = heapq.heappop(heap)
        if c not in members or d not in members or version[c] != vc or version[d] != vd:
            continue
        # merge d into c (c < d, so the surviving label is the smaller id)
        gains.append(-neg / (m * m))
        members[c].extend(members.pop(d))
        ka[c] += ka[d]
        dr[c] += dr[d]
        for x, cnt in between[d].items():
            if x == c:
                continue
            between[c][x] += cnt
            between[x][c] += cnt
            del between[x][d]
        between[c].pop(d, None)
        between[d] = {}
        version[c] += 1
        for x in between[c]:
            gcx = gain(c, x)
            if gcx >= 0:
                lo, hi = (c, x) if c < x else (x, c)
                heapq.heappush(heap, (-gcx, lo, hi, version[lo], version[hi]))

    labels = {}
    for c, mem in members.items():
        for i in mem:
            labels[nodes[i]] = c
    return Partition(labels, tuple(gains), bipartite_modularity(g, labels))


def modularity_score(c: CommunityProfile, g: AuthorRepoGraph | None = None) -> float:
    """Intra-community edge density: edges / (|authors| * |repos|); 0 if a side is empty."""
    possible = len(c.authors) * len(c.repos)
    if possible == 0:
        return 0.0
    if g is None:
        n = c.edge_count
    else:
        n = sum(1 for a, r in g.edges if a in c.authors and r in c.repos)
    return n / possible


def detect_communities(g: AuthorRepoGraph) -> list[CommunityProfile]:
    """Communities largest first (authors + repositories), numbered from 1."""
    part = greedy_partition(g)
    groups: dict[int, tuple[set, set]] = defaultdict(lambda: (set(), set()))
    for (side, node), c in part.labels.items():
        groups[c][0 if side == AUTHOR else 1].add(node)
    edge_count: dict[int, int] = defaultdict(int)
    for a, r in g.edges:
        ca = part.labels[(AUTHOR, a)]
        if ca == part.labels[(REPO, r)]:
            edge_count[ca] += 1

    def order(c: int) -> tuple:
        authors, repos = groups[c]
        return (-(len(authors) + len(repos)), c)

    out = []
    for rank, c in enumerate(sorted(groups, key=order), start=1):
        authors, repos = groups[c]
        prof = CommunityProfile(rank, frozenset(authors), frozenset(repos), edge_count[c])
        ms = modularity_score(prof)
        out.append(replace(prof, modularity_score=ms, ms_undefined=not (authors and repos)))
    return out


def community_leaders(c: CommunityProfile, scores: HackerScoreTable, min_size: int = 20) -> tuple[str, ...]:
    """Top two producers then top two connectors, duplicates removed.

    ``min_size`` counts authors; smaller communities have no leaders.
    """
    if len(c.authors) < min_size:
        return ()
    members = sorted(c.authors)
    top_p = sorted(members, key=lambda a: (-scores.phs.get(a, 0.0), a))[:2]
    top_c = sorted(members, key=lambda a: (-scores.chs.get(a, 0.0), a))[:2]
    leaders = []
    for a in top_p + top_c:
        if a not in leaders:
            leaders.append(a)
    return tuple(leaders)


def sop_from_counts(counts: dict[str, int], keywords) -> dict[str, float]:
    total = sum(counts.get(k, 0) for k in keywords)
    if total == 0:
        return {}
    return {k: counts.get(k, 0) / total for k in keywords}


def keyword_counts(repo_ids, corpus: Corpus, config: KeywordConfig) -> dict[str, int]:
    """Number of repositories in which each keyword appears at least once."""
    counts: dict[str, int] = defaultdict(int)
    for rid in repo_ids:
        for kw in extract_keyword_set(corpus.repo_index[rid], config):
            counts[kw] += 1
    return dict(counts)


def sop_profile(c: CommunityProfile, corpus: Corpus, config: KeywordConfig) -> tuple[dict[str, float], dict[str, float]]:
    """Strength Of Presence per keyword, normalised within each keyword set.

    An empty map means no keyword of that set occurs in the community.
    """
    counts = keyword_counts(sorted(c.repos), corpus, config)
    return sop_from_counts(counts, config.malware_types), sop_from_counts(counts, config.platforms)


def wordcloud_weights(c: CommunityProfile) -> dict[str, float]:
    merged = {**c.sop_malware, **c.sop_platform}
    merged = {k: v for k, v in merged.items() if v > 0}
    if not merged:
        return {}
    top = max(merged.values())
    return {k: v / top for k, v in sorted(merged.items())}


def profile_community(
    c: CommunityProfile,
    corpus: Corpus,
    config: KeywordConfig,
    scores: HackerScoreTable | None = None,
    min_size: int = 20,
) -> CommunityProfile:
    sop_m, sop_p = sop_profile(c, corpus, config)
    flags = []
    if c.ms_undefined:
        flags.append("ms undefined: one side empty")
    if not sop_m:
        flags.append("no malware keywords present")
    if not sop_p:
        flags.append("no platform keywords present")
    leaders = community_leaders(c, scores, min_size) if scores is not None else ()
    return replace(c, leaders=leaders, sop_malware=sop_m, sop_platform=sop_p, flags=tuple(flags))
