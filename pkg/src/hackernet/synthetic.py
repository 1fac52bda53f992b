"""Seeded synthetic corpus in the on-disk input formats.

The shipped demo corpus under ``hackernet/data/synthetic`` was produced by
``write_corpus(path)`` with the defaults below.
"""

from __future__ import annotations

import csv
import json
import random
from datetime import datetime, timedelta, timezone
from importlib import resources
from pathlib import Path

from .ingest import DEFAULT_MALWARE_TYPES, DEFAULT_PLATFORMS

_FILLER = ("tool", "simple", "python", "builder", "for", "with", "c2", "panel", "source", "educational", "demo", "poc")
_FORUMS = ("hackthissite", "offensivecommunity", "ethicalhacker", "darkmoney")


def generate(n_authors: int = 50, seed: int = 7) -> dict[str, list]:
    rng = random.Random(seed)
    authors = [(f"a{i:03d}", f"user{i:03d}x") for i in range(n_authors)]
    ids = [a for a, _ in authors]
    # a few heavy producers, many small ones
    prolific = set(rng.sample(ids, max(1, n_authors // 10)))
    repos = []
    start = datetime(2010, 1, 1, tzinfo=timezone.utc)
    for aid in ids:
        n = rng.randint(4, 9) if aid in prolific else rng.randint(1, 3)
        for _ in range(n):
            rid = f"r{len(repos):04d}"
            kw = rng.choice(DEFAULT_MALWARE_TYPES)
            plat = rng.choice(DEFAULT_PLATFORMS)
            words = [kw, rng.choice(_FILLER), "for", plat] + rng.sample(_FILLER, 2)
            created = start + timedelta(days=rng.randint(0, 365 * 8), seconds=rng.randint(0, 86399))
            undated = rng.random() < 0.03
            repos.append({
                "repo_id": rid,
                "owner_id": aid,
                "created_at": "" if undated else created.strftime("%Y-%m-%dT%H:%M:%SZ"),
                "title": " ".join(words[:3]),
                "description": " ".join(words[3:]),
                "readme": rng.choice(("", f"a {kw} written in c", "use responsibly")),
            })
    owned = {}
    for r in repos:
        owned.setdefault(r["owner_id"], []).append(r["repo_id"])
    popular = [r["repo_id"] for r in repos if r["owner_id"] in prolific]
    interactions = []

    def stamp() -> str:
        if rng.random() < 0.1:
            return ""
        return (start + timedelta(days=rng.randint(0, 365 * 8))).strftime("%Y-%m-%dT%H:%M:%SZ")

    for aid in ids:
        for _ in range(rng.randint(0, 6)):
            other = rng.choice(sorted(prolific) if rng.random() < 0.6 else ids)
            if other != aid:
                interactions.append(("follow", aid, other, stamp()))
        for kind, n_max in (("star", 5), ("watch", 3), ("fork", 4), ("comment", 2), ("contribute", 1)):
            for _ in range(rng.randint(0, n_max)):
                pool = popular if rng.random() < 0.7 else [r["repo_id"] for r in repos]
                interactions.append((kind, aid, rng.choice(pool), stamp()))
        for rid in owned.get(aid, []):
            if rng.random() < 0.5:
                interactions.append(("create", aid, rid, stamp()))

    # forum users: some share names with GitHub authors (varying case), the rest do not
    shared = rng.sample(authors, max(2, n_authors // 8))
    forum_users = [u.upper() if i % 2 else u for i, (_, u) in enumerate(shared)]
    forum_users += [f"lurker{i:02d}" for i in range(n_authors // 2)]
    posts = []
    for forum in _FORUMS:
        for t in range(rng.randint(4, 10)):
            for p in range(rng.randint(1, 6)):
                user = rng.choice(forum_users)
                kw = rng.choice(DEFAULT_MALWARE_TYPES)
                posts.append((forum, f"t{t:03d}", f"p{p:03d}", user, f"anyone have a working {kw}?"))
    return {"authors": authors, "repos": repos, "interactions": interactions, "forums": posts}


def write_corpus(out_dir: str | Path, n_authors: int = 50, seed: int = 7) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data = generate(n_authors, seed)
    paths = {name: out / fname for name, fname in (
        ("authors", "authors.csv"), ("repos", "repos.jsonl"), ("interactions", "interactions.csv"),
        ("forums", "forums.csv"), ("keywords", "keywords.json"),
    )}
    with paths["authors"].open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["author_id", "username"])
        w.writerows(data["authors"])
    with paths["repos"].open("w", encoding="utf-8") as fh:
        for r in data["repos"]:
            fh.write(json.dumps(r) + "\n")
    with paths["interactions"].open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kind", "actor_id", "target_id", "timestamp"])
        w.writerows(data["interactions"])
    with paths["forums"].open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["forum_id", "thread_id", "post_id", "username", "content"])
        w.writerows(data["forums"])
    paths["keywords"].write_text(
        json.dumps({"malware_types": list(DEFAULT_MALWARE_TYPES), "platforms": list(DEFAULT_PLATFORMS)}, indent=2) + "\n",
        encoding="utf-8",
    )
    return paths


def bundled_corpus() -> dict[str, Path]:
    """Paths of the shipped 50-author demo corpus."""
    root = Path(str(resources.files("hackernet") / "data" / "synthetic"))
    return {
        "authors": root / "authors.csv",
        "repos": root / "repos.jsonl",
        "interactions": root / "interactions.csv",
        "forums": root / "forums.csv",
        "keywords": root / "keywords.json",
    }
