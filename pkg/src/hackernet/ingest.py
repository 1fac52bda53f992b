"""Loading and validation of author, repository, interaction and forum data.

Every loader is tolerant: a bad row is recorded in a rejects list (file, row,
reason) and loading carries on. The only fatal condition is an empty author
set. Records are stored in canonical order (sorted by id) so that loading is
insensitive to the order of rows in the input files.
"""

from __future__ import annotations

import csv
import json
import re
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

INTERACTION_KINDS = ("create", "star", "watch", "fork", "comment", "contribute", "follow")
REPO_KINDS = frozenset(INTERACTION_KINDS) - {"follow"}

DEFAULT_MALWARE_TYPES = ("keylogger", "virus", "ransomware", "spyware", "trojan", "botnet", "backdoor")
DEFAULT_PLATFORMS = ("linux", "windows", "mac", "android")

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class IngestError(Exception):
    """Fatal input problem (unreadable file, wrong header, empty author set)."""


@dataclass(frozen=True, order=True)
class AuthorRef:
    author_id: str
    username: str


@dataclass(frozen=True, order=True)
class RepositoryRecord:
    repo_id: str
    owner_id: str
    created_at: datetime | None
    metadata_text: str = ""


@dataclass(frozen=True, order=True)
class InteractionRecord:
    kind: str
    actor_id: str
    target: str
    timestamp: datetime | None = None


@dataclass(frozen=True, order=True)
class ForumPost:
    forum_id: str
    thread_id: str
    post_id: str
    username: str
    content: str = ""


@dataclass(frozen=True)
class Reject:
    file: str
    row: int
    reason: str


@dataclass(frozen=True)
class KeywordConfig:
    """Malware-type keywords and target-platform keywords, both lowercase."""

    malware_types: tuple[str, ...] = DEFAULT_MALWARE_TYPES
    platforms: tuple[str, ...] = DEFAULT_PLATFORMS

    def __post_init__(self) -> None:
        for name in ("malware_types", "platforms"):
            words = tuple(getattr(self, name))
            if not words:
                raise ValueError(f"keyword set {name!r} is empty")
            for w in words:
                if not w.strip():
                    raise ValueError(f"blank keyword in {name!r}")
                if w != w.lower():
                    raise ValueError(f"keyword {w!r} is not lowercase")
            if len(set(words)) != len(words):
                raise ValueError(f"duplicate keyword in {name!r}")
            object.__setattr__(self, name, words)
        both = set(self.malware_types) & set(self.platforms)
        if both:
            raise ValueError(f"keywords in both sets: {sorted(both)}")

    @property
    def all_keywords(self) -> tuple[str, ...]:
        return self.malware_types + self.platforms

    @classmethod
    def from_json(cls, path: str | Path) -> "KeywordConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise IngestError(f"cannot read keyword config {path}: {exc}") from exc
        try:
            return cls(tuple(data["malware_types"]), tuple(data["platforms"]))
        except (KeyError, TypeError) as exc:
            raise IngestError(f"keyword config {path} needs 'malware_types' and 'platforms' lists") from exc
        except ValueError as exc:
            raise IngestError(f"keyword config {path}: {exc}") from exc

    def to_json(self) -> dict:
        return {"malware_types": list(self.malware_types), "platforms": list(self.platforms)}


@dataclass(frozen=True)
class Corpus:
    """Validated authors, repositories and interactions in canonical order.

    ``rejects`` and ``row_counts`` describe the load, not the data, so they
    are excluded from equality.
    """

    authors: tuple[AuthorRef, ...]
    repos: tuple[RepositoryRecord, ...]
    interactions: tuple[InteractionRecord, ...]
    rejects: tuple[Reject, ...] = field(default=(), compare=False)
    row_counts: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_author_index", {a.author_id: a for a in self.authors})
        object.__setattr__(self, "_repo_index", {r.repo_id: r for r in self.repos})

    @property
    def author_index(self) -> dict[str, AuthorRef]:
        return self._author_index  # type: ignore[attr-defined]

    @property
    def repo_index(self) -> dict[str, RepositoryRecord]:
        return self._repo_index  # type: ignore[attr-defined]

    def owner_of(self, repo_id: str) -> str:
        return self.repo_index[repo_id].owner_id

    def repos_by_owner(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = defaultdict(list)
        for r in self.repos:
            out[r.owner_id].append(r.repo_id)
        return out

    def counts(self) -> dict[str, int]:
        return {"authors": len(self.authors), "repos": len(self.repos), "interactions": len(self.interactions)}

    def to_json(self) -> str:
        """Canonical serialization, used to compare two loads."""
        def ts(d: datetime | None) -> str | None:
            return d.isoformat() if d else None

        return json.dumps(
            {
                "authors": [[a.author_id, a.username] for a in self.authors],
                "repos": [[r.repo_id, r.owner_id, ts(r.created_at), r.metadata_text] for r in self.repos],
                "interactions": [[i.kind, i.actor_id, i.target, ts(i.timestamp)] for i in self.interactions],
            },
            sort_keys=True,
        )


@dataclass(frozen=True)
class ForumCorpus:
    posts: tuple[ForumPost, ...] = ()
    rejects: tuple[Reject, ...] = field(default=(), compare=False)

    @property
    def threads(self) -> dict[tuple[str, str], tuple[ForumPost, ...]]:
        grouped: dict[tuple[str, str], list[ForumPost]] = defaultdict(list)
        for p in self.posts:
            grouped[(p.forum_id, p.thread_id)].append(p)
        return {k: tuple(v) for k, v in sorted(grouped.items())}

    @property
    def forum_ids(self) -> list[str]:
        return sorted({p.forum_id for p in self.posts})

    def forum_summary(self) -> dict[str, dict[str, int]]:
        """Per-forum ``users``/``threads``/``posts`` counts."""
        users: dict[str, set] = defaultdict(set)
        threads: dict[str, set] = defaultdict(set)
        posts: dict[str, int] = defaultdict(int)
        for p in self.posts:
            users[p.forum_id].add(p.username)
            threads[p.forum_id].add(p.thread_id)
            posts[p.forum_id] += 1
        return {
            f: {"users": len(users[f]), "threads": len(threads[f]), "posts": posts[f]}
            for f in sorted(posts)
        }

    def counts(self) -> dict[str, int]:
        # users are (forum, username) pairs: the same name on two forums may be two people
        return {
            "users": len({(p.forum_id, p.username) for p in self.posts}),
            "threads": len({(p.forum_id, p.thread_id) for p in self.posts}),
            "posts": len(self.posts),
        }


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 timestamp into an aware UTC datetime."""
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        return dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def _open_csv(path: str | Path, header: tuple[str, ...]) -> tuple[list[dict], str]:
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            fields = tuple(reader.fieldnames or ())
            rows = list(reader)
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    if rows or fields:
        missing = [h for h in header if h not in fields]
        if missing:
            raise IngestError(f"{path.name}: missing columns {missing}")
    return rows, path.name


def _load_authors(path: str | Path) -> tuple[dict[str, AuthorRef], list[Reject], int]:
    rows, name = _open_csv(path, ("author_id", "username"))
    authors: dict[str, AuthorRef] = {}
    rejects = []
    for n, row in enumerate(rows, start=2):  # row 1 is the header
        aid = (row.get("author_id") or "").strip()
        user = (row.get("username") or "").strip()
        if not aid:
            rejects.append(Reject(name, n, "empty author_id"))
        elif not user:
            rejects.append(Reject(name, n, "empty username"))
        elif aid in authors:
            rejects.append(Reject(name, n, f"duplicate author_id {aid}"))
        else:
            authors[aid] = AuthorRef(aid, user)
    return authors, rejects, len(rows)


def _load_repos(path: str | Path, authors: dict[str, AuthorRef]) -> tuple[dict[str, RepositoryRecord], list[Reject], int]:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    repos: dict[str, RepositoryRecord] = {}
    rejects = []
    total = 0
    for n, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        total += 1
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            rejects.append(Reject(path.name, n, f"malformed json: {exc.msg}"))
            continue
        if not isinstance(obj, dict):
            rejects.append(Reject(path.name, n, "not a json object"))
            continue
        rid = str(obj.get("repo_id") or "").strip()
        owner = str(obj.get("owner_id") or "").strip()
        if not rid:
            rejects.append(Reject(path.name, n, "empty repo_id"))
            continue
        if rid in repos:
            rejects.append(Reject(path.name, n, f"duplicate repo_id {rid}"))
            continue
        if owner not in authors:
            rejects.append(Reject(path.name, n, f"unknown owner {owner}"))
            continue
        created_raw = obj.get("created_at") or ""
        created = None
        if str(created_raw).strip():
            try:
                created = parse_timestamp(str(created_raw))
            except ValueError:
                rejects.append(Reject(path.name, n, f"bad created_at {created_raw!r}"))
                continue
        text = " ".join(str(obj.get(k) or "") for k in ("title", "description", "readme"))
        repos[rid] = RepositoryRecord(rid, owner, created, " ".join(text.split()))
    return repos, rejects, total


def _load_interactions(
    path: str | Path, authors: dict[str, AuthorRef], repos: dict[str, RepositoryRecord]
) -> tuple[list[InteractionRecord], list[Reject], int]:
    rows, name = _open_csv(path, ("kind", "actor_id", "target_id", "timestamp"))
    out = []
    rejects = []
    for n, row in enumerate(rows, start=2):
        kind = (row.get("kind") or "").strip().lower()
        actor = (row.get("actor_id") or "").strip()
        target = (row.get("target_id") or "").strip()
        raw_ts = (row.get("timestamp") or "").strip()
        if kind not in INTERACTION_KINDS:
            rejects.append(Reject(name, n, f"unknown kind {kind!r}"))
            continue
        if actor not in authors:
            rejects.append(Reject(name, n, f"unknown actor {actor}"))
            continue
        if kind == "follow":
            if target not in authors:
                rejects.append(Reject(name, n, f"unknown target author {target}"))
                continue
            if target == actor:
                rejects.append(Reject(name, n, "self-follow"))
                continue
        elif target not in repos:
            rejects.append(Reject(name, n, f"unknown target repo {target}"))
            continue
        ts = None
        if raw_ts:
            try:
                ts = parse_timestamp(raw_ts)
            except ValueError:
                rejects.append(Reject(name, n, f"bad timestamp {raw_ts!r}"))
                continue
        out.append(InteractionRecord(kind, actor, target, ts))
    return out, rejects, len(rows)


def _interaction_key(i: InteractionRecord) -> tuple:
    return (i.kind, i.actor_id, i.target, i.timestamp is None, i.timestamp or datetime.min.replace(tzinfo=timezone.utc))


def load_dataset(authors_path: str | Path, repos_path: str | Path, interactions_path: str | Path) -> Corpus:
    """Load and validate the three GitHub-side files into a :class:`Corpus`."""
    authors, rej_a, n_a = _load_authors(authors_path)
    if not authors:
        raise IngestError(f"{Path(authors_path).name}: empty author set")
    repos, rej_r, n_r = _load_repos(repos_path, authors)
    interactions, rej_i, n_i = _load_interactions(interactions_path, authors, repos)
    rejects = rej_a + rej_r + rej_i
    row_counts = {
        Path(p).name: {"total": total, "accepted": total - len(rej), "rejected": len(rej)}
        for p, total, rej in (
            (authors_path, n_a, rej_a),
            (repos_path, n_r, rej_r),
            (interactions_path, n_i, rej_i),
        )
    }
    return Corpus(
        authors=tuple(sorted(authors.values())),
        repos=tuple(sorted(repos.values(), key=lambda r: r.repo_id)),
        interactions=tuple(sorted(interactions, key=_interaction_key)),
        rejects=tuple(rejects),
        row_counts=row_counts,
    )


def load_forums(forums_path: str | Path) -> ForumCorpus:
    rows, name = _open_csv(forums_path, ("forum_id", "thread_id", "post_id", "username", "content"))
    seen: set[tuple[str, str, str]] = set()
    posts = []
    rejects = []
    for n, row in enumerate(rows, start=2):
        key = tuple((row.get(k) or "").strip() for k in ("forum_id", "thread_id", "post_id"))
        user = (row.get("username") or "").strip()
        if not all(key):
            rejects.append(Reject(name, n, "empty forum_id/thread_id/post_id"))
        elif not user:
            rejects.append(Reject(name, n, "empty username"))
        elif key in seen:
            rejects.append(Reject(name, n, "duplicate (forum_id, thread_id, post_id)"))
        else:
            seen.add(key)
            posts.append(ForumPost(*key, user, row.get("content") or ""))
    return ForumCorpus(tuple(sorted(posts)), tuple(rejects))


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def extract_keyword_set(repo: RepositoryRecord | str, config: KeywordConfig) -> frozenset[str]:
    """Keywords of ``config`` present in the repository metadata.

    A keyword matches a whole token (multi-word keywords a run of consecutive
    tokens), so "rat" does not fire on "generate".
    """
    text = repo if isinstance(repo, str) else repo.metadata_text
    tokens = tokenize(text)
    if not tokens:
        return frozenset()
    single = set(tokens)
    found = set()
    for kw in config.all_keywords:
        parts = tokenize(kw)
        if not parts:
            continue
        if len(parts) == 1:
            if parts[0] in single:
                found.add(kw)
            continue
        k = len(parts)
        if any(tokens[i : i + k] == parts for i in range(len(tokens) - k + 1)):
            found.add(kw)
    return frozenset(found)


def write_rejects(rejects: Iterable[Reject], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["file", "row", "reason"])
        for r in rejects:
            w.writerow([r.file, r.row, r.reason])
