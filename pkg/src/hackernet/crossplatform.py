"""Username linking between GitHub authors and forum users, and joint egonets."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

from .graphs import AuthorAuthorGraph
from .ingest import Corpus, ForumCorpus


class CrossPlatformError(Exception):
    pass


def normalize_username(name: str) -> str:
    return name.strip().lower()


@dataclass(frozen=True)
class CrossPlatformEgonet:
    username: str
    author_ids: tuple[str, ...]
    github_neighbors: frozenset[str]
    forum_neighbors: frozenset[tuple[str, str]]
    forums_active: frozenset[str]
    post_count: int

    @property
    def point(self) -> tuple[int, int]:
        return len(self.github_neighbors), len(self.forum_neighbors)

    def to_json(self) -> dict:
        return {
            "username": self.username,
            "author_ids": list(self.author_ids),
            "github_neighbors": sorted(self.github_neighbors),
            "forum_neighbors": [list(p) for p in sorted(self.forum_neighbors)],
            "forums_active": sorted(self.forums_active),
            "post_count": self.post_count,
            "github_degree": len(self.github_neighbors),
            "forum_degree": len(self.forum_neighbors),
        }


def matches_by_forum(corpus: Corpus, forums: ForumCorpus) -> dict[str, list[str]]:
    github = {normalize_username(a.username) for a in corpus.authors}
    per_forum: dict[str, set[str]] = defaultdict(set)
    for p in forums.posts:
        name = normalize_username(p.username)
        if name in github:
            per_forum[p.forum_id].add(name)
    return {f: sorted(names) for f, names in sorted(per_forum.items())}


def match_usernames(corpus: Corpus, forums: ForumCorpus) -> list[str]:
    """Normalised usernames present both as a GitHub author and as a forum poster."""
    return sorted({n for names in matches_by_forum(corpus, forums).values() for n in names})


def forum_egonet(username: str, forums: ForumCorpus) -> frozenset[tuple[str, str]]:
    """(forum, user) pairs for everyone who posted in a thread the ego posted in."""
    ego = normalize_username(username)
    neighbors = set()
    for (forum, _thread), posts in forums.threads.items():
        names = {normalize_username(p.username) for p in posts}
        if ego in names:
            neighbors.update((forum, n) for n in names if n != ego)
    return frozenset(neighbors)


def cross_egonet(username: str, aa_graph: AuthorAuthorGraph, forums: ForumCorpus, corpus: Corpus) -> CrossPlatformEgonet:
    ego = normalize_username(username)
    ids = tuple(sorted(a.author_id for a in corpus.authors if normalize_username(a.username) == ego))
    ego_posts = [p for p in forums.posts if normalize_username(p.username) == ego]
    if not ids or not ego_posts:
        raise CrossPlatformError(f"username {username!r} is not matched on both platforms")
    gh = set()
    for e in aa_graph.edges:
        if e.src in ids:
            gh.add(e.dst)
        if e.dst in ids:
            gh.add(e.src)
    gh.difference_update(ids)
    return CrossPlatformEgonet(
        username=ego,
        author_ids=ids,
        github_neighbors=frozenset(gh),
        forum_neighbors=forum_egonet(ego, forums),
        forums_active=frozenset(p.forum_id for p in ego_posts),
        post_count=len(ego_posts),
    )


def scatter_series(egonets) -> list[tuple[str, int, int]]:
    """(username, GitHub degree, forum degree) rows sorted by username."""
    return sorted((e.username, *e.point) for e in egonets)
