import pytest

from pebres.dag import (GraphError, converging_paths, graph_from_spec, is_path, make_pyramid, make_tree,
                        parse_graph, paths_via, relations, source_paths, validate_blob_pebblable)
from conftest import pyramid, tree


@pytest.mark.parametrize("h,n,sources", [(1, 3, 2), (2, 6, 3), (6, 28, 7)])
def test_pyramid_sizes(h, n, sources):
    g = make_pyramid(h)
    assert g.n == n
    assert len(g.sources) == sources
    assert g.level[g.sink] == h
    for L in range(h + 1):
        assert bin(g.level_mask[L]).count("1") == h + 1 - L


def test_pyramid_names(p2):
    assert [p2.name(v) for v in range(6)] == ["s1", "s2", "s3", "u1", "u2", "z"]
    assert p2.label(p2.preds[p2.vertex("u2")]) == ["s2", "s3"]


@pytest.mark.parametrize("h,n", [(1, 3), (2, 7), (3, 15)])
def test_tree_sizes(h, n):
    g = make_tree(h)
    assert g.n == n
    assert len(g.sources) == 2 ** h


def test_tree_height_one_is_pyramid_shape():
    t, p = make_tree(1), make_pyramid(1)
    assert t.level_counts == p.level_counts
    assert t.edges == p.edges


@pytest.mark.parametrize("maker", [make_pyramid, make_tree])
def test_height_zero_rejected(maker):
    with pytest.raises(GraphError):
        maker(0)


def test_relations_p2(p2):
    rel = relations(p2)
    u1, z = p2.vertex("u1"), p2.vertex("z")
    assert set(p2.label(rel["below"][u1])) == {"s1", "s2", "u1"}
    assert p2.label(rel["pred"][z]) == ["u1", "u2"]
    for s in p2.sources:
        assert p2.below(s) == {s}


@pytest.mark.parametrize("h", [1, 2, 3, 4])
def test_below_is_subpyramid(h):
    g = pyramid(h)
    for v in range(g.n):
        k = g.level[v] + 1
        assert len(g.below(v)) == k * (k + 1) // 2


def test_lpp_examples(p2):
    _, lpp = paths_via(p2, p2.vs(["z"]))
    assert set(p2.label(lpp)) == {"s1", "s2", "s3", "u1", "u2"}
    _, lpp = paths_via(p2, p2.vs(["s1"]))
    assert lpp == frozenset()
    paths, lpp = paths_via(p2, p2.vs(["u2", "z"]))
    assert sorted(tuple(p2.label(P)) for P in paths) == [("s2", "u2", "z"), ("s3", "u2", "z")]
    # below(bot) contributes nothing outside the paths: u1 and s1 are not legal
    assert set(p2.label(lpp)) == {"s2", "s3"}


def test_lpp_rejects_non_chain(p2):
    with pytest.raises(GraphError, match="not totally ordered"):
        paths_via(p2, p2.vs(["u1", "u2"]))


@pytest.mark.parametrize("h", [1, 2, 3])
def test_lpp_disjoint_from_chain(h):
    from pebres.blob import all_chains
    g = pyramid(h)
    for B in all_chains(g):
        assert g.lpp_mask(B) & B == 0


def test_source_paths_count(p2):
    assert len(list(source_paths(p2, p2.sink))) == 4


def test_converging_small():
    g = pyramid(1)
    out = converging_paths(g, [g.vertex("s1"), g.sink])
    assert [g.label(P) for P in out] == [["s2", "z"]]
    g = pyramid(2)
    out = converging_paths(g, [g.vertex(x) for x in ("s1", "u1", "z")])
    assert sorted(g.label(P) for P in out) == [["s2", "u1", "z"], ["s3", "u2", "z"]]


def test_converging_p6_long_path(p6):
    P = [p6.vertex(x) for x in ["u4", "v3", "w2", "x1", "y1"]]
    assert is_path(p6, P)
    out = converging_paths(p6, P)
    assert len(out) == 4


@pytest.mark.parametrize("h", [1, 2, 3])
def test_converging_paths_law(h):
    g = pyramid(h)
    for w in range(g.n):
        for P in source_paths(g, w):
            for start in range(len(P) - 1):
                seg = list(P[start:])
                out = converging_paths(g, seg)
                assert len(out) == len(seg) - 1
                for i, Pi in enumerate(out, 1):
                    assert g.is_source(Pi[0]) and is_path(g, Pi)
                    assert list(Pi[-(len(seg) - i):]) == seg[i:]
                for i in range(len(out)):
                    for j in range(i + 1, len(out)):
                        inter = set(out[i]) & set(out[j])
                        assert inter <= set(out[j]) & set(seg) <= set(seg) - {seg[0]}


def test_converging_rejects_gap(p2):
    with pytest.raises(GraphError):
        converging_paths(p2, [p2.vertex("s1"), p2.sink])


def test_validate():
    assert validate_blob_pebblable(pyramid(3))[0]
    assert validate_blob_pebblable(tree(2))[0]
    ok, viol = validate_blob_pebblable(([2, 1, 1], [(0, 2), (1, 2), (0, 3), (2, 3)]))
    assert not ok
    assert any(v.kind == "non-consecutive edge" for v in viol)


def test_graph_text_roundtrip():
    g = make_pyramid(3)
    h = parse_graph(g.to_text())
    assert h.edges == g.edges and h.level_counts == g.level_counts


def test_graph_spec_errors(tmp_path):
    with pytest.raises((GraphError, OSError, ValueError)):
        graph_from_spec("hexagon:2")
    path = tmp_path / "g.txt"
    path.write_text(make_pyramid(2).to_text())
    assert graph_from_spec(str(path)).n == 6
