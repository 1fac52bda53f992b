"""Author-Author multi-digraph and Author-Repository bipartite graph."""

from __future__ import annotations

import csv
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

from .ingest import REPO_KINDS, Corpus

AA_LABELS = ("follower", "fork", "contribution", "comment")

# interaction kind -> AA edge label; star/watch/create do not produce AA edges
KIND_TO_LABEL = {"follow": "follower", "fork": "fork", "contribute": "contribution", "comment": "comment"}

WEIGHT_MODES = ("exact", "paper-rounded")
DEGREE_BASES = ("all-nodes", "active-nodes")


class GraphError(Exception):
    pass


@dataclass(frozen=True, order=True)
class AAEdge:
    src: str
    dst: str
    label: str
    weight: float = 1.0


@dataclass(frozen=True)
class AuthorAuthorGraph:
    nodes: tuple[str, ...]
    edges: tuple[AAEdge, ...]
    weight_table: dict[str, float] | None = None

    @property
    def weighted(self) -> bool:
        return self.weight_table is not None

    def label_counts(self) -> dict[str, int]:
        counts = dict.fromkeys(AA_LABELS, 0)
        for e in self.edges:
            counts[e.label] += 1
        return counts

    def in_neighbors(self, node: str) -> set[str]:
        return {e.src for e in self.edges if e.dst == node}

    def out_neighbors(self, node: str) -> set[str]:
        return {e.dst for e in self.edges if e.src == node}

    def neighbor_map(self) -> dict[str, set[str]]:
        """Undirected neighbourhood of every node, across all labels."""
        nbrs: dict[str, set[str]] = {n: set() for n in self.nodes}
        for e in self.edges:
            nbrs[e.src].add(e.dst)
            nbrs[e.dst].add(e.src)
        return nbrs


@dataclass(frozen=True)
class AuthorRepoGraph:
    author_nodes: tuple[str, ...]
    repo_nodes: tuple[str, ...]
    edges: dict[tuple[str, str], frozenset[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        # ids are namespaced by side, so an author and a repo may share a string id
        authors, repos = set(self.author_nodes), set(self.repo_nodes)
        for a, r in self.edges:
            if a not in authors or r not in repos:
                raise GraphError(f"edge ({a}, {r}) is not author-repository")

    @property
    def n_edges(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class EdgeWeightCalibration:
    avg_degree: dict[str, float]
    d_min: float
    weights: dict[str, float]
    mode: str = "exact"
    flagged: tuple[str, ...] = ()


def build_aa_graph(corpus: Corpus) -> AuthorAuthorGraph:
    """Directed labelled edges between authors; one edge per (src, dst, label)."""
    owner = {r.repo_id: r.owner_id for r in corpus.repos}
    edges = set()
    for rec in corpus.interactions:
        label = KIND_TO_LABEL.get(rec.kind)
        if label is None:
            continue
        dst = rec.target if rec.kind == "follow" else owner[rec.target]
        if dst != rec.actor_id:
            edges.add(AAEdge(rec.actor_id, dst, label))
    return AuthorAuthorGraph(tuple(a.author_id for a in corpus.authors), tuple(sorted(edges)))


def round_paper_style(w: float) -> float:
    """One significant figure, with values of 0.9 and above saturated to 1."""
    if w >= 0.9:
        return 1.0
    if w <= 0:
        return 0.0
    d = Decimal(repr(w))
    return float(d.quantize(Decimal(1).scaleb(d.adjusted()), rounding=ROUND_HALF_UP))


def calibration_from_degrees(avg_degree: dict[str, float], mode: str = "exact") -> EdgeWeightCalibration:
    if mode not in WEIGHT_MODES:
        raise ValueError(f"unknown weight mode {mode!r}")
    positive = {k: v for k, v in avg_degree.items() if v > 0}
    if not positive:
        raise GraphError("no edges to calibrate")
    d_min = min(positive.values())
    weights = {}
    for label, d in avg_degree.items():
        if d > 0:
            w = d_min / d
            weights[label] = round_paper_style(w) if mode == "paper-rounded" else w
        else:
            weights[label] = 0.0
    flagged = tuple(sorted(k for k, v in avg_degree.items() if v <= 0))
    return EdgeWeightCalibration(dict(avg_degree), d_min, weights, mode, flagged)


def calibrate_weights(g: AuthorAuthorGraph, mode: str = "exact", degree_basis: str = "all-nodes") -> EdgeWeightCalibration:
    """Per-label average degree and inverse-frequency weights.

    ``degree_basis="all-nodes"`` divides each label's edge count by |V|;
    ``"active-nodes"`` divides by the number of nodes touching that label.
    """
    if degree_basis not in DEGREE_BASES:
        raise ValueError(f"unknown degree basis {degree_basis!r}")
    if not g.edges:
        raise GraphError("no edges to calibrate")
    counts = g.label_counts()
    if degree_basis == "all-nodes":
        n = len(g.nodes)
        avg = {label: counts[label] / n for label in AA_LABELS}
    else:
        touched: dict[str, set[str]] = defaultdict(set)
        for e in g.edges:
            touched[e.label].update((e.src, e.dst))
        avg = {label: (counts[label] / len(touched[label]) if touched[label] else 0.0) for label in AA_LABELS}
    return calibration_from_degrees(avg, mode)


def apply_weights(g: AuthorAuthorGraph, calib: EdgeWeightCalibration | dict[str, float]) -> AuthorAuthorGraph:
    table = dict(calib.weights if isinstance(calib, EdgeWeightCalibration) else calib)
    edges = []
    for e in g.edges:
        if e.label not in table:
            raise GraphError(f"no weight for edge label {e.label!r}")
        edges.append(replace(e, weight=table[e.label]))
    return AuthorAuthorGraph(g.nodes, tuple(edges), table)


def build_ar_graph(corpus: Corpus) -> AuthorRepoGraph:
    """Undirected author-repository edges annotated with the interaction kinds behind them.

    Ownership always yields a ``create`` edge, with or without a create record.
    """
    kinds: dict[tuple[str, str], set[str]] = defaultdict(set)
    for r in corpus.repos:
        kinds[(r.owner_id, r.repo_id)].add("create")
    for rec in corpus.interactions:
        if rec.kind in REPO_KINDS:
            kinds[(rec.actor_id, rec.target)].add(rec.kind)
    edges = {k: frozenset(v) for k, v in sorted(kinds.items())}
    return AuthorRepoGraph(
        tuple(a.author_id for a in corpus.authors),
        tuple(r.repo_id for r in corpus.repos),
        edges,
    )


def export_aa(g: AuthorAuthorGraph, edges_path: str | Path, nodes_path: str | Path) -> None:
    with Path(edges_path).open("w", encoding="utf-8") as fh:
        for e in g.edges:
            fh.write(json.dumps({"src": e.src, "dst": e.dst, "label": e.label, "weight": e.weight}) + "\n")
    with Path(nodes_path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node"])
        w.writerows([n] for n in g.nodes)


def export_ar(g: AuthorRepoGraph, edges_path: str | Path, nodes_path: str | Path) -> None:
    with Path(edges_path).open("w", encoding="utf-8") as fh:
        for (a, r), kinds in g.edges.items():
            fh.write(json.dumps({"author": a, "repo": r, "kinds": sorted(kinds)}) + "\n")
    with Path(nodes_path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node", "side"])
        w.writerows([a, "author"] for a in g.author_nodes)
        w.writerows([r, "repo"] for r in g.repo_nodes)


def load_aa_edges(path: str | Path) -> list[AAEdge]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            d = json.loads(line)
            w = d["weight"]
            if not math.isfinite(w) or w < 0:
                raise GraphError(f"bad weight {w!r}")
            out.append(AAEdge(d["src"], d["dst"], d["label"], float(w)))
    return out
