import pytest
from hypothesis import given
from hypothesis import strategies as st

from hackernet.crossplatform import (
    CrossPlatformError,
    cross_egonet,
    forum_egonet,
    match_usernames,
    matches_by_forum,
    normalize_username,
    scatter_series,
)
from hackernet.graphs import build_aa_graph
from hackernet.ingest import ForumCorpus, ForumPost
from helpers import make_corpus


def forums(*rows) -> ForumCorpus:
    return ForumCorpus(tuple(sorted(ForumPost(f, t, p, u) for f, t, p, u in rows)))


def test_exact_name_match():
    c = make_corpus(["g1"], usernames={"g1": "3vilp4wn"})
    f = forums(("hts", "t1", "1", "3vilp4wn"))
    assert match_usernames(c, f) == ["3vilp4wn"]
    assert matches_by_forum(c, f) == {"hts": ["3vilp4wn"]}


def test_case_insensitive_but_exact():
    c = make_corpus(["g1"], usernames={"g1": "Alice"})
    assert match_usernames(c, forums(("hts", "t1", "1", "alice "))) == ["alice"]
    assert match_usernames(c, forums(("hts", "t1", "1", "Alicia"))) == []


def test_disjoint_names():
    c = make_corpus(["g1"], usernames={"g1": "bob"})
    assert match_usernames(c, forums(("hts", "t1", "1", "carol"))) == []


@given(st.text(max_size=20))
def test_normalization_idempotent(name):
    once = normalize_username(name)
    assert normalize_username(once) == once


def test_forum_egonet_single_thread():
    f = forums(("hts", "T", "1", "ego"), ("hts", "T", "2", "X"), ("hts", "T", "3", "Y"))
    assert {u for _, u in forum_egonet("ego", f)} == {"x", "y"}


def test_forum_egonet_no_posts():
    assert forum_egonet("ego", forums(("hts", "T", "1", "X"))) == frozenset()


def test_forum_egonet_dedup_across_threads():
    f = forums(("hts", "T1", "1", "ego"), ("hts", "T1", "2", "X"), ("hts", "T2", "1", "ego"), ("hts", "T2", "2", "X"), ("hts", "T2", "3", "Z"))
    assert forum_egonet("ego", f) == {("hts", "x"), ("hts", "z")}


def test_same_name_on_two_forums_counts_twice():
    f = forums(("hts", "T", "1", "ego"), ("hts", "T", "2", "X"), ("oc", "T", "1", "ego"), ("oc", "T", "2", "X"))
    assert forum_egonet("ego", f) == {("hts", "x"), ("oc", "x")}


def test_co_thread_relation_symmetric():
    f = forums(("hts", "T1", "1", "a"), ("hts", "T1", "2", "b"), ("hts", "T2", "1", "b"), ("hts", "T2", "2", "c"), ("hts", "T3", "1", "d"))
    names = ["a", "b", "c", "d"]
    for x in names:
        assert ("hts", x) not in forum_egonet(x, f)
        for y in names:
            assert (("hts", y) in forum_egonet(x, f)) == (("hts", x) in forum_egonet(y, f))


def test_misterch0c_scatter_point():
    # 898 GitHub collaborators and 224 forum collaborators
    ego = "misterch0c"
    others = [f"gh{i}" for i in range(898)]
    repos = {"ego_repo": "E", "other_repo": "gh0"}
    inter = [("follow", o, "E") for o in others[:500]]
    inter += [("fork", o, "ego_repo") for o in others[400:898]]  # overlaps the followers
    inter += [("star", o, "ego_repo") for o in others]  # stars are not AA edges
    inter += [("follow", "E", "gh0"), ("fork", "E", "other_repo")]
    c = make_corpus(["E"] + others, repos, inter, usernames={"E": "MisterCh0c"})
    posts = []
    for i in range(224):
        thread = f"t{i // 8}"
        posts.append(("hts", thread, f"p{i}", f"f{i}"))
        posts.append(("hts", thread, f"e{i}", ego))
    f = forums(*posts)
    e = cross_egonet(ego, build_aa_graph(c), f, c)
    assert e.point == (898, 224)
    assert e.post_count == 224
    assert e.forums_active == {"hts"}
    assert scatter_series([e]) == [("misterch0c", 898, 224)]


def test_isolated_on_github():
    c = make_corpus(["E", "B"], {"R": "E"}, [], usernames={"E": "3vilp4wn"})
    f = forums(("hts", "T", "1", "3vilp4wn"), ("hts", "T", "2", "a"), ("hts", "T", "3", "b"))
    assert cross_egonet("3vilp4wn", build_aa_graph(c), f, c).point == (0, 2)


def test_self_interaction_leaves_github_egonet_empty():
    c = make_corpus(["E"], {"R": "E"}, [("comment", "E", "R")], usernames={"E": "ego"})
    f = forums(("hts", "T", "1", "ego"))
    assert cross_egonet("ego", build_aa_graph(c), f, c).github_neighbors == frozenset()


def test_github_neighbors_match_adjacency():
    c = make_corpus("ABCD", {"RB": "B", "RD": "D"}, [("follow", "A", "C"), ("fork", "A", "RB"), ("comment", "D", "RB"), ("contribute", "C", "RD")],
                    usernames={"A": "ego"})
    g = build_aa_graph(c)
    e = cross_egonet("ego", g, forums(("x", "t", "1", "ego")), c)
    assert e.github_neighbors == g.in_neighbors("A") | g.out_neighbors("A") == {"B", "C"}


def test_unmatched_username():
    c = make_corpus(["E"], usernames={"E": "ego"})
    with pytest.raises(CrossPlatformError):
        cross_egonet("ego", build_aa_graph(c), forums(("hts", "T", "1", "other")), c)


def test_scatter_series():
    from hackernet.crossplatform import CrossPlatformEgonet

    def eg(name, gh, fo):
        return CrossPlatformEgonet(name, (), frozenset(f"g{i}" for i in range(gh)), frozenset(("f", f"u{i}") for i in range(fo)), frozenset(), 1)

    assert scatter_series([eg("zed", 5, 3), eg("amy", 0, 7)]) == [("amy", 0, 7), ("zed", 5, 3)]
    assert scatter_series([]) == []
