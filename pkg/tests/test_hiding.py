import pytest

from pebres.blob import Sub, sub
from pebres.hiding import (C_K, THEORY_CONSTANTS, HidingError, blocks, blocks_config, hidden_vertices,
                           hides, hiding_graph, is_hiding_connected, is_tight, measure, measure_preorder,
                           measure_profile, necessary_hiding, potential, self_blocking, spreading_check,
                           tight_subset, white_eliminate)
from pebres.pebbling import BwConfig
from conftest import pyramid, tree

P6_X = ["v1", "u2", "u3", "v3", "w3", "s5", "s6", "s7"]


def names(g, vs):
    return sorted(g.label(vs))


def test_constants():
    assert C_K == 13
    assert THEORY_CONSTANTS["blob_factor"] == 2 * C_K + 1


def test_hidden_vertices(p2):
    assert names(p2, hidden_vertices(p2, ["u1", "u2"])) == ["u1", "u2", "z"]
    assert names(p2, hidden_vertices(p2, ["s1", "s2", "s3"])) == ["s1", "s2", "s3", "u1", "u2", "z"]
    assert hides(p2, ["u1", "s2", "s3"], ["z"])
    assert not hides(p2, ["u1", "s3"], ["z"])
    assert not hides(p2, ["u1"], ["z"])


def test_tight_subset(p2):
    assert names(p2, tight_subset(p2, ["s1", "s2", "u1"])) == ["s1", "s2"]
    assert names(p2, tight_subset(p2, ["s2", "u1"])) == ["s2", "u1"]
    assert is_tight(p2, ["s2", "u1"]) and not is_tight(p2, ["s1", "s2", "u1"])


def test_necessary_hiding(p2):
    assert names(p2, necessary_hiding(p2, ["u1", "u2"], "z")) == ["u1", "u2"]
    with pytest.raises(HidingError):
        necessary_hiding(p2, ["u1"], "z")


@pytest.mark.parametrize("U,m", [(["s1", "s2"], 4), (["w1"], 5), (["s1", "s2", "s3"], 6), (["w1", "s3"], 5)])
def test_measure_p6(p6, U, m):
    assert measure(p6, U) == m


def test_measure_profile_multiset(p6):
    # a repeated vertex counts twice when given as an iterable
    assert measure(p6, ["w1", "w1"]) >= measure(p6, ["w1"])
    assert max(measure_profile(p6, ["s1"]).values()) == measure(p6, ["s1"])


def test_measure_preorder(p6):
    assert not measure_preorder(p6, ["s1", "s2"], ["w1"])
    assert measure_preorder(p6, ["w1"], ["w1"])


@pytest.mark.parametrize("h", [1, 2, 3, 4])
def test_bw_potential_of_sink(h):
    g = pyramid(h)
    assert potential(g, BwConfig(frozenset([g.sink]))).potential == h + 2


@pytest.mark.parametrize("h", [1, 2, 3])
def test_blob_potential_of_sink(h):
    g = pyramid(h)
    assert potential(g, [Sub.of(1 << g.sink)]).potential == h + 2


def test_p6_potentials(p6):
    r = potential(p6, BwConfig(p6.vs(["z"]), p6.vs(["y1", "y2"])))
    assert r.potential == 0 and not r.witness
    r = potential(p6, [sub(p6, ["z"], ["y1"]), sub(p6, ["z"], ["y2"])])
    assert (r.potential, names(p6, r.witness)) == (8, ["z"])
    r = potential(p6, [sub(p6, ["z"]), sub(p6, ["y1"], ["x1", "x2"])])
    assert names(p6, r.witness) == ["z"]
    r = potential(p6, BwConfig(p6.vs(["z", "y1"]), p6.vs(["x1", "x2"])))
    assert (r.potential, names(p6, r.witness)) == (6, ["x3"])


def test_blocks(p6):
    s = sub(p6, ["u5", "z"])
    assert blocks(p6, ["v4", "y2"], s)
    assert not blocks(p6, ["v4"], s)
    assert blocks_config(p6, ["v4", "y2"], [s])


def test_self_blocking(p2):
    assert self_blocking(p2, sub(p2, ["z"], ["u1", "u2"]))
    assert not self_blocking(p2, sub(p2, ["z"], ["u1"]))


def test_hiding_graph_p6(p6):
    g = hiding_graph(p6, P6_X)
    assert is_tight(p6, P6_X)
    assert [p6.label(c) for c in g.components] == [
        ["s5", "s6", "s7", "u5", "u6", "v5"],
        ["u2", "u3", "v1", "v2", "v3", "w1", "w2", "w3", "x1", "x2", "y1"]]
    assert not g.connected
    assert hiding_graph(p6, P6_X, shortcut=False).edges == g.edges
    assert names(p6, g.necessary[p6.vertex("w1")]) == ["u2", "u3", "v1"]
    assert names(p6, g.necessary[p6.vertex("x2")]) == ["u2", "u3", "v3", "w3"]


def test_hiding_graph_p2(p2):
    g = hiding_graph(p2, ["s1", "s2"])
    assert sorted(tuple(p2.label(e)) for e in g.edges) == [("s1", "u1"), ("s2", "u1")]
    assert is_hiding_connected(p2, ["s1", "s2"])
    with pytest.raises(HidingError):
        hiding_graph(p2, [])


def test_white_elimination_first_example(p6):
    cfg = [sub(p6, ["s4", "y1", "z"], ["v2"]), sub(p6, ["u3", "w3"], ["s3"]), sub(p6, ["w4", "x3"], ["v5"])]
    e = white_eliminate(p6, cfg, ["v3", "v4"])
    assert e.config == {sub(p6, ["s4", "y1", "z"], ["v2"]), sub(p6, ["u3", "w3"]), sub(p6, ["w4", "x3"], ["v5"])}
    c = e.classification
    assert names(p6, c.bottoms_hidden) == ["w4"]
    assert names(p6, c.bottoms_blocked) == ["s4", "u3"]
    assert names(p6, c.whites_hidden) == ["v5"]
    assert names(p6, c.whites_blocked) == ["s3"]


def test_white_elimination_second_example(p6):
    cfg = [sub(p6, ["s4", "v4", "w3", "x3", "y2"]), sub(p6, ["w2", "y1"], ["s3", "u3", "x1"]), sub(p6, ["w4"], ["v5"])]
    e = white_eliminate(p6, cfg, ["s2", "u4", "u5"])
    assert sub(p6, ["w2", "y1"], ["s3", "u3"]) in e.config
    c = e.classification
    assert names(p6, c.bottoms_hidden) == ["w2", "w4"]
    assert names(p6, c.bottoms_blocked) == ["s4"]
    assert names(p6, c.whites_hidden) == ["s3", "u3", "v5"]
    assert not c.whites_blocked
    assert potential(p6, cfg).potential == 6
    assert measure(p6, ["s4", "v4"]) == 4 and measure(p6, ["v3", "v4"]) == 6


def test_white_elimination_requires_blocker(p2):
    with pytest.raises(HidingError):
        white_eliminate(p2, [sub(p2, ["z"])], ["s1"])


@pytest.mark.parametrize("g,sets,ineqs", [
    (pyramid(2), 12, 14), (pyramid(3), 37, 77), (tree(2), 13, 14), (pyramid(4), 135, 432)],
    ids=["P2", "P3", "T2", "P4"])
def test_spreading(g, sets, ineqs):
    r = spreading_check(g, jobs=2 if g.n > 10 else 1)
    assert r.verdict == "pass"
    assert (r.sets_checked, r.inequalities_checked) == (sets, ineqs)


def test_spreading_parallel_agrees():
    a, b = spreading_check(pyramid(3)), spreading_check(pyramid(3), jobs=3)
    assert a.as_dict() == b.as_dict()
