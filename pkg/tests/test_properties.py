"""Randomised checks of structural laws."""

import random

from hypothesis import given, settings, strategies as st

from pebres.blob import BlobError, BlobMove, apply_blob, blob_cost, check_sub, intro, merge
from pebres.dag import bits
from pebres.formula import CnfFormula, from_dimacs, to_dimacs
from pebres.hiding import hidden_mask, hides, is_tight, measure, measure_preorder, tight_subset
from conftest import pyramid, tree

P3 = pyramid(3)
P4 = pyramid(4)
T3 = tree(3)


def masks(g):
    return st.integers(min_value=0, max_value=g.all_mask)


@settings(max_examples=300, deadline=None)
@given(masks(P4), masks(P4), masks(P4))
def test_hiding_transitive(U, V, W):
    if hides(P4, U, V) and hides(P4, V, W):
        assert hides(P4, U, W)


@settings(max_examples=300, deadline=None)
@given(masks(P4), masks(P4))
def test_hidden_set_is_monotone_closure(U, V):
    H = hidden_mask(P4, U)
    assert H & U == U
    assert hidden_mask(P4, H) == H
    assert hidden_mask(P4, U | V) & H == H


@settings(max_examples=300, deadline=None)
@given(st.sampled_from([P3, P4, T3]), st.data())
def test_tight_subset_fixpoint(g, data):
    U = data.draw(masks(g))
    T = g.mask(tight_subset(g, U))
    assert T & ~U == 0
    assert is_tight(g, T)
    assert hidden_mask(g, T) == hidden_mask(g, U)
    assert g.mask(tight_subset(g, T)) == T


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=0, max_value=P3.all_mask))
def test_tight_subset_unique(U):
    H = hidden_mask(P3, U)
    T = P3.mask(tight_subset(P3, U))
    # every other subset of U hiding as much is either not tight or equal to T
    sub = U
    while True:
        if hidden_mask(P3, sub) == H and is_tight(P3, sub):
            assert sub == T
        if not sub:
            break
        sub = (sub - 1) & U


def test_measure_union_law():
    rng = random.Random(2718)
    trials = 0
    while trials < 1000:
        U, V, Y = (rng.getrandbits(P3.n) & rng.getrandbits(P3.n) for _ in range(3))
        Y &= ~V
        if not measure_preorder(P3, U, V):
            continue
        trials += 1
        assert measure(P3, U) <= measure(P3, V)
        assert measure(P3, Y | U) <= measure(P3, Y | V), (bits(U), bits(V), bits(Y))


@settings(max_examples=200, deadline=None)
@given(masks(P3), masks(P3))
def test_preorder_reflexive_and_implies_measure(U, V):
    assert measure_preorder(P3, U, U)
    if measure_preorder(P3, U, V):
        assert measure(P3, U) <= measure(P3, V)


def random_subs(g, rng, k):
    """Reachable-looking subconfigurations: intros merged at random."""
    pool = [intro(g, v) for v in range(g.n)]
    for _ in range(k):
        a, b = rng.choice(pool), rng.choice(pool)
        try:
            pool.append(merge(g, a, b))
        except BlobError:
            pass
    return pool


def test_merger_preserves_invariants():
    rng = random.Random(31)
    pool = random_subs(P3, rng, 3000)
    assert len(set(pool)) > 30
    for s in pool:
        check_sub(P3, s)


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False), st.integers(min_value=1, max_value=6))
def test_cost_monotone_under_erasure(rng, k):
    pool = list(set(random_subs(P3, rng, 200)))
    cfg = frozenset(rng.sample(pool, min(k, len(pool))))
    victim = rng.choice(sorted(cfg))
    after = apply_blob(cfg, BlobMove("erase", a=victim), P3)
    assert blob_cost(after, P3) <= blob_cost(cfg, P3)


clause = st.lists(st.integers(min_value=1, max_value=9).flatmap(lambda v: st.sampled_from([v, -v])),
                  min_size=1, max_size=5, unique_by=abs)


@settings(max_examples=200, deadline=None)
@given(st.lists(clause, max_size=12))
def test_dimacs_roundtrip(cs):
    f = CnfFormula(9, [tuple(c) for c in cs])
    g = from_dimacs(to_dimacs(f))
    assert g.nvars == 9
    assert [tuple(c) for c in g.clauses] == [tuple(c) for c in f.clauses]
