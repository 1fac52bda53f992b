import random

import pytest

from hackernet.graphs import AuthorAuthorGraph, build_aa_graph
from hackernet.influence import (
    InfluenceError,
    ProfileRow,
    author_profile,
    classify_regions,
    detect_knee,
    hacker_score,
    knee_point,
)
from helpers import aa_graph, chord_knee_bruteforce, dense_hits_oracle, make_corpus, random_graph


def test_single_edge_fixed_point():
    t = hacker_score(aa_graph(["A", "B"], [("A", "B", 1.0)]))
    assert t.phs == {"A": 0.0, "B": 1.0}
    assert t.chs == {"A": 1.0, "B": 0.0}
    assert t.converged


def test_two_cycle_symmetric():
    t = hacker_score(aa_graph(["A", "B"], [("A", "B", 1.0), ("B", "A", 1.0)]))
    assert t.phs == pytest.approx({"A": 0.5, "B": 0.5}, abs=1e-12)
    assert t.chs == pytest.approx({"A": 0.5, "B": 0.5}, abs=1e-12)


def test_degenerate_graph():
    with pytest.raises(InfluenceError, match="zero score vector"):
        hacker_score(aa_graph(["A", "B"], []))


@pytest.mark.parametrize("tol, it", [(0, 10), (1e-9, 0)])
def test_bad_parameters(tol, it):
    with pytest.raises(ValueError):
        hacker_score(aa_graph(["A", "B"], [("A", "B", 1.0)]), tol, it)


def test_max_iter_reached_is_recorded():
    g = aa_graph(["A", "B", "C"], [("A", "B", 1.0), ("B", "C", 0.5), ("C", "A", 0.3), ("A", "C", 0.7)])
    t = hacker_score(g, tolerance=1e-300, max_iter=3)
    assert t.iterations == 3 and not t.converged


def test_parallel_edges_add():
    single = hacker_score(aa_graph(["A", "B", "C"], [("A", "B", 1.0), ("C", "B", 1.0), ("A", "C", 2.0)]))
    multi = hacker_score(aa_graph(["A", "B", "C"], [("A", "B", 1.0), ("C", "B", 1.0), ("A", "C", "fork", 1.0), ("A", "C", "comment", 1.0)]))
    for a in "ABC":
        assert single.phs[a] == pytest.approx(multi.phs[a], abs=1e-12)
        assert single.chs[a] == pytest.approx(multi.chs[a], abs=1e-12)


def test_oracle_agreement_small_graphs():
    rng = random.Random(2024)
    for _ in range(20):
        g = random_graph(rng)
        t = hacker_score(g, tolerance=1e-12, max_iter=100_000)
        phs, chs = dense_hits_oracle(g.nodes, g.edges)
        for v in g.nodes:
            assert t.phs[v] == pytest.approx(phs[v], abs=1e-6)
            assert t.chs[v] == pytest.approx(chs[v], abs=1e-6)


def test_delta_settles_monotonically():
    rng = random.Random(77)
    for _ in range(10):
        t = hacker_score(random_graph(rng), tolerance=1e-12, max_iter=100_000)
        tail = [r.delta for r in t.trace[-10:]]
        assert all(b <= a * (1 + 1e-9) for a, b in zip(tail, tail[1:])), tail


def test_deterministic_regardless_of_edge_order():
    g = random_graph(random.Random(9))
    shuffled = list(g.edges)
    random.Random(0).shuffle(shuffled)
    t1 = hacker_score(g)
    t2 = hacker_score(AuthorAuthorGraph(g.nodes, tuple(shuffled), {}))
    assert t1.phs == t2.phs and t1.chs == t2.chs


# --- knees -------------------------------------------------------------------


def test_knee_matches_bruteforce_chord():
    curve = [1.0, 0.9, 0.1, 0.05]
    expected, _ = chord_knee_bruteforce(list(enumerate(curve, start=1)))
    assert expected == 0.1  # frozen from the brute-force chord distances
    k = knee_point(curve)
    assert k.value == expected and k.rank == 3 and not k.weak


def test_knee_random_curves_against_bruteforce():
    rng = random.Random(4)
    for _ in range(100):
        ys = sorted((rng.random() ** 3 for _ in range(rng.randint(3, 40))), reverse=True)
        if len(set(ys)) < 3:
            continue
        assert detect_knee(ys) == chord_knee_bruteforce(list(enumerate(ys, start=1)))[0]


def test_linear_curve_is_weak_knee():
    k = knee_point([5.0, 4.0, 3.0, 2.0, 1.0])
    assert k.weak and k.value == 5.0


def test_knee_ignores_nonpositive_and_needs_three_values():
    assert detect_knee([0.0, 0.0, 1.0, 0.9, 0.1, 0.05]) == 0.1
    with pytest.raises(InfluenceError, match="no knee"):
        detect_knee([1.0, 1.0, 0.5, 0.0])


def test_knee_convex_tail():
    ys = [1 / r for r in range(1, 101)]
    k = knee_point(ys)
    assert 1 < k.rank < 20


# --- regions -----------------------------------------------------------------


def _table(pairs):
    from hackernet.influence import HackerScoreTable

    return HackerScoreTable({a: p for a, (p, _) in pairs.items()}, {a: c for a, (_, c) in pairs.items()}, 1, True)


def test_regions():
    t = _table({"a": (0.5, 0.01), "b": (0.5, 0.5), "c": (0.01, 0.5), "d": (0.01, 0.01), "e": (0.1, 0.1)})
    r = classify_regions(t, 0.1, 0.1)
    assert r.region == {"a": "C", "b": "B", "c": "A", "d": "D", "e": "D"}
    assert r.hig == ["a", "b", "c"]
    assert sum(r.sizes().values()) == 5
    assert r.shares()["D"] == pytest.approx(0.4)


def test_all_below_knees():
    t = _table({"a": (0.01, 0.01), "b": (0.02, 0.0)})
    assert classify_regions(t, 0.5, 0.5).hig == []


def test_knees_must_be_positive():
    with pytest.raises(ValueError):
        classify_regions(_table({"a": (1.0, 1.0)}), 0.0, 0.1)


# --- profiles ----------------------------------------------------------------


def test_profile_counts_received_actions():
    # cyberthrets: 336 repos, 1013 followers, 778 forks, 13 comments, 2 contributions received
    owner = "cyberthrets"
    repos = {f"r{i}": owner for i in range(336)}
    fans = [f"f{i}" for i in range(1013)]
    inter = [("follow", f, owner) for f in fans]
    inter += [("fork", fans[i % 1013], f"r{i % 336}") for i in range(778)]
    inter += [("comment", fans[i], f"r{i}") for i in range(13)]
    inter += [("contribute", fans[i], "r0") for i in range(2)]
    inter += [("fork", owner, "r1"), ("comment", owner, "r2")]  # own activity is not "received"
    c = make_corpus([owner] + fans, repos, inter)
    g = build_aa_graph(c)
    t = hacker_score(g)
    row = author_profile(owner, c, g, t)
    assert ProfileRow.HEADER == ("Name", "PHS", "CHS", "Repos", "Followers", "Forks", "Comments", "Contribs")
    assert row.as_row()[3:] == (336, 1013, 778, 13, 2)
    assert row.name == owner
    assert row.phs == max(t.phs.values())


def test_profile_of_quiet_author():
    c = make_corpus("AB", {"R": "A"}, [("follow", "A", "B")])
    t = hacker_score(build_aa_graph(c))
    row = author_profile("A", c, build_aa_graph(c), t)
    assert row.as_row()[4:] == (0, 0, 0, 0)


def test_profile_three_authors():
    c = make_corpus("ABC", {"RB": "B", "RA": "A"}, [("fork", "A", "RB"), ("fork", "C", "RB"), ("comment", "C", "RB"), ("fork", "B", "RA")])
    g = build_aa_graph(c)
    row = author_profile("B", c, g, hacker_score(g))
    assert (row.forks, row.comments) == (2, 1)


def test_profile_unknown_author():
    c = make_corpus("AB", {}, [("follow", "A", "B")])
    g = build_aa_graph(c)
    with pytest.raises(KeyError):
        author_profile("Z", c, g, hacker_score(g))
