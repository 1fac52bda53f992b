"""Fixture builders and independent oracles shared by the tests."""

from __future__ import annotations

import csv
import json
import math
import random
from fractions import Fraction
from pathlib import Path

import numpy as np

from hackernet.graphs import AAEdge, AuthorAuthorGraph, AuthorRepoGraph
from hackernet.ingest import AuthorRef, Corpus, InteractionRecord, RepositoryRecord, parse_timestamp


def make_corpus(authors, repos=None, interactions=(), usernames=None, created=None) -> Corpus:
    """authors: ids; repos: {repo_id: owner}; interactions: (kind, actor, target[, ts])."""
    usernames = usernames or {}
    created = created or {}
    repos = repos or {}
    a = tuple(sorted(AuthorRef(x, usernames.get(x, x)) for x in authors))
    r = tuple(
        sorted(
            (RepositoryRecord(rid, owner, parse_timestamp(created[rid]) if rid in created else None)
             for rid, owner in repos.items()),
            key=lambda x: x.repo_id,
        )
    )
    recs = []
    for row in interactions:
        ts = parse_timestamp(row[3]) if len(row) > 3 and row[3] else None
        recs.append(InteractionRecord(row[0], row[1], row[2], ts))
    return Corpus(a, r, tuple(sorted(recs, key=lambda i: (i.kind, i.actor_id, i.target))))


def write_inputs(tmp: Path, authors, repos, interactions, forums=None) -> dict[str, Path]:
    """Write rows in the external file formats; returns the paths."""
    tmp.mkdir(parents=True, exist_ok=True)
    paths = {"authors": tmp / "authors.csv", "repos": tmp / "repos.jsonl", "interactions": tmp / "interactions.csv"}
    with paths["authors"].open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["author_id", "username"])
        w.writerows(authors)
    with paths["repos"].open("w") as fh:
        for r in repos:
            fh.write((r if isinstance(r, str) else json.dumps(r)) + "\n")
    with paths["interactions"].open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "actor_id", "target_id", "timestamp"])
        w.writerows(interactions)
    if forums is not None:
        paths["forums"] = tmp / "forums.csv"
        with paths["forums"].open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["forum_id", "thread_id", "post_id", "username", "content"])
            w.writerows(forums)
    return paths


def random_corpus(rng: random.Random):
    n = rng.randint(1, 12)
    authors = [f"u{i}" for i in range(n)]
    repos = {f"r{i}": rng.choice(authors) for i in range(rng.randint(0, 20))}
    created = {r: f"{rng.randint(2008, 2018)}-0{rng.randint(1, 9)}-15T12:00:00Z" for r in repos if rng.random() < 0.8}
    inter = []
    for _ in range(rng.randint(0, 60)):
        kind = rng.choice(["follow", "fork", "comment", "contribute", "watch", "star"])
        actor = rng.choice(authors)
        if kind == "follow":
            target = rng.choice(authors)
            if target == actor:
                continue
        elif repos:
            target = rng.choice(list(repos))
        else:
            continue
        inter.append((kind, actor, target))
    return make_corpus(authors, repos, inter, created=created)


def repo_row(rid, owner, created="2015-03-01T00:00:00Z", title="", description="", readme=""):
    return {"repo_id": rid, "owner_id": owner, "created_at": created, "title": title,
            "description": description, "readme": readme}


def aa_graph(nodes, edges) -> AuthorAuthorGraph:
    """edges: (src, dst, weight) or (src, dst, label, weight)."""
    out = []
    for e in edges:
        if len(e) == 3:
            out.append(AAEdge(e[0], e[1], "follower", float(e[2])))
        else:
            out.append(AAEdge(e[0], e[1], e[2], float(e[3])))
    return AuthorAuthorGraph(tuple(nodes), tuple(sorted(out)), {})


def random_graph(rng: random.Random, max_nodes: int = 8) -> AuthorAuthorGraph:
    n = rng.randint(2, max_nodes)
    nodes = [f"n{i}" for i in range(n)]
    edges = set()
    for _ in range(rng.randint(1, n * n)):
        s, d = rng.sample(nodes, 2)
        edges.add((s, d, rng.choice(["follower", "fork", "comment", "contribution"])))
    return AuthorAuthorGraph(tuple(nodes), tuple(sorted(AAEdge(s, d, lab, rng.uniform(0.05, 1.0)) for s, d, lab in edges)), {})


def ar_graph(authors, repos, pairs) -> AuthorRepoGraph:
    return AuthorRepoGraph(tuple(authors), tuple(repos), {p: frozenset({"star"}) for p in sorted(pairs)})


# --- oracles -----------------------------------------------------------------


def dense_hits_oracle(nodes, edges, tol=1e-14, max_iter=200_000):
    """Power iteration on a dense weight matrix W[i, j] = total weight of i -> j."""
    n = len(nodes)
    idx = {v: i for i, v in enumerate(nodes)}
    W = np.zeros((n, n))
    for e in edges:
        W[idx[e.src], idx[e.dst]] += e.weight
    a = np.ones(n) / n
    h = np.ones(n) / n
    for _ in range(max_iter):
        a_new = W.T @ h
        h_new = W @ a_new
        a_new /= a_new.sum()
        h_new /= h_new.sum()
        done = max(abs(a_new - a).max(), abs(h_new - h).max()) < tol
        a, h = a_new, h_new
        if done:
            break
    return dict(zip(nodes, a)), dict(zip(nodes, h))


def set_partitions(items):
    """All set partitions of ``items`` (Bell-number many)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def barber_q(authors, repos, pairs, assignment) -> Fraction:
    """Bipartite modularity straight from the matrix definition, as an exact fraction."""
    m = len(pairs)
    edge = set(pairs)
    k = {a: sum(1 for p in pairs if p[0] == a) for a in authors}
    d = {r: sum(1 for p in pairs if p[1] == r) for r in repos}
    total = 0  # m^2 * Q
    for a in authors:
        for r in repos:
            if assignment[("author", a)] == assignment[("repo", r)]:
                total += m * ((a, r) in edge) - k[a] * d[r]
    return Fraction(total, m * m)


def exhaustive_best_modularity(authors, repos, pairs):
    nodes = [("author", a) for a in authors] + [("repo", r) for r in repos]
    best, best_part = None, None
    for part in set_partitions(nodes):
        assignment = {n: i for i, block in enumerate(part) for n in block}
        q = barber_q(authors, repos, pairs, assignment)
        if best is None or q > best:
            best, best_part = q, part
    return best, best_part


def chord_knee_bruteforce(points):
    """Max perpendicular distance from the first-to-last chord, raw coordinates.

    points: [(rank, score)]. Returns (score, distances).
    """
    (x1, y1), (x2, y2) = points[0], points[-1]
    norm = math.hypot(x2 - x1, y2 - y1)
    dists = [abs((y2 - y1) * x - (x2 - x1) * y + x2 * y1 - y2 * x1) / norm for x, y in points]
    best = max(range(len(points)), key=lambda i: (dists[i], -i))
    return points[best][1], dists
