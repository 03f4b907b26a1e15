"""Hiding and blocking sets, measures and potentials, tight sets, hiding
set graphs and the spreading inequality.

Vertex sets are passed around as bitmasks internally; the public functions
also accept iterables of vertex ids or names.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .blob import Sub, blob_cost
from .dag import LayeredDag, bits, to_mask
from .pebbling import BwConfig

# Constants from the lower-bound argument.  Verifiers use them; the engines never do.
THEORY_CONSTANTS = {
    "C_K": 13,              # size factor of the generalized blocker property
    "klawe_factor": 2,      # pot <= 2 * max cost for black-white pebblings
    "blob_factor": 2 * 13 + 1,
    "bridging_extra": 4,    # extra blob cost while bridging one derivation step
}
C_K = THEORY_CONSTANTS["C_K"]


class HidingError(ValueError):
    pass


class SearchBudget(RuntimeError):
    pass


DEFAULT_MAX_CANDIDATES = 2_000_000


def _m(dag: LayeredDag, U) -> int:
    if isinstance(U, int):
        return U
    return dag.mask(U)


# -- hiding and blocking ---------------------------------------------------------

def hidden_mask(dag: LayeredDag, U: int) -> int:
    """Vertices w such that every source path visiting w meets U."""
    h = 0
    for w in range(dag.n):  # ids run bottom-up
        if U >> w & 1:
            h |= 1 << w
        elif dag.preds[w] and all(h >> p & 1 for p in dag.preds[w]):
            h |= 1 << w
    return h


def hidden_vertices(dag: LayeredDag, U: Iterable[int | str] | int) -> frozenset[int]:
    return frozenset(bits(hidden_mask(dag, _m(dag, U))))


def hides(dag: LayeredDag, U, W) -> bool:
    W = _m(dag, W)
    return hidden_mask(dag, _m(dag, U)) & W == W


def _reach_avoiding(dag: LayeredDag, start: int, X: int) -> int:
    """Vertices reachable from ``start`` along paths whose later vertices avoid X."""
    r = 1 << start
    for v in range(start + 1, dag.n):
        if X >> v & 1:
            continue
        if any(r >> p & 1 for p in dag.preds[v]):
            r |= 1 << v
    return r


def blocks_chain(dag: LayeredDag, X: int, B: int) -> bool:
    """X meets every source path agreeing with the chain B."""
    if X & B:
        return True
    bs = bits(B)
    if hidden_mask(dag, X) >> bs[0] & 1:
        return True
    for a, b in zip(bs, bs[1:]):
        if not _reach_avoiding(dag, a, X) >> b & 1:
            return True
    return False


def blocks(dag: LayeredDag, U, sc: Sub) -> bool:
    """U blocks [B]<W> when U together with W meets every source path via B."""
    return blocks_chain(dag, _m(dag, U) | sc.W, sc.B)


def blocks_config(dag: LayeredDag, U, config: Iterable[Sub]) -> bool:
    U = _m(dag, U)
    return all(blocks(dag, U, s) for s in config)


def self_blocking(dag: LayeredDag, sc: Sub) -> bool:
    return blocks_chain(dag, sc.W, sc.B)


def hides_sub(dag: LayeredDag, U, sc: Sub) -> bool:
    return hidden_mask(dag, _m(dag, U) | sc.W) >> sc.bot & 1 == 1


# -- measure ---------------------------------------------------------------------

def measure_profile(dag: LayeredDag, U: Iterable[int | str] | int) -> dict[int, int]:
    """Partial measures m_j for j = 0..h.  An iterable is counted as a
    multiset, so repeated vertices are charged repeatedly."""
    if isinstance(U, int):
        levels = [dag.level[v] for v in bits(U)]
    else:
        levels = [dag.level[dag.vertex(v)] for v in U]
    prof = {}
    for j in range(dag.h + 1):
        k = sum(1 for L in levels if L >= j)
        prof[j] = j + 2 * k if k else 0
    return prof


def measure(dag: LayeredDag, U: Iterable[int | str] | int) -> int:
    return max(measure_profile(dag, U).values())


def _measure_mask(U: int, levels: Sequence[int], h: int) -> int:
    cnt = [0] * (h + 2)
    for v in bits(U):
        cnt[levels[v]] += 1
    best = 0
    k = 0
    for j in range(h, -1, -1):
        k += cnt[j]
        if k:
            best = max(best, j + 2 * k)
    return best


def measure_preorder(dag: LayeredDag, U, V) -> bool:
    """U precedes V: for every j some i <= j has m_j(U) <= m_i(V)."""
    mu, mv = measure_profile(dag, U), measure_profile(dag, V)
    best = 0
    for j in range(dag.h + 1):
        best = max(best, mv[j])
        if mu[j] > best:
            return False
    return True


# -- potentials ------------------------------------------------------------------

@dataclass
class PotentialResult:
    potential: int
    witness: frozenset
    candidates: int

    def as_dict(self, dag: LayeredDag | None = None) -> dict:
        w = sorted(self.witness)
        return {"potential": self.potential, "witness": w,
                "witness_names": dag.label(w) if dag else None}


def _min_measure(dag: LayeredDag, ok, cand: int, seed: int, max_candidates: int) -> PotentialResult:
    levels = dag.level
    best_m = _measure_mask(seed, levels, dag.h)
    best_u = seed
    cands = bits(cand)
    tried = 0
    size = 0
    # a set of size s has m_0 = 2s, so sizes with 2s >= best cannot improve
    while 2 * size <= best_m and size <= len(cands):
        for combo in itertools.combinations(cands, size):
            U = to_mask(combo)
            tried += 1
            if tried > max_candidates:
                raise SearchBudget(f"potential search exceeded {max_candidates} candidate sets")
            m = _measure_mask(U, levels, dag.h)
            if m > best_m:
                continue
            if m == best_m and (len(combo), sorted(combo)) >= (bin(best_u).count("1"), bits(best_u)):
                continue
            if ok(U):
                best_m, best_u = m, U
        size += 1
    return PotentialResult(best_m, frozenset(bits(best_u)), tried)


def potential_bw(dag: LayeredDag, cfg: BwConfig, max_candidates: int = DEFAULT_MAX_CANDIDATES) -> PotentialResult:
    """Minimum measure of a U such that U together with W hides B."""
    B, W = to_mask(cfg.B), to_mask(cfg.W)
    cand = 0
    for b in bits(B):
        cand |= dag.below_mask[b]
    cand &= ~W
    return _min_measure(dag, lambda U: hidden_mask(dag, U | W) & B == B, cand, B & ~W, max_candidates)


def potential_blob(dag: LayeredDag, config: Iterable[Sub], max_candidates: int = DEFAULT_MAX_CANDIDATES) -> PotentialResult:
    """Minimum measure of a set blocking every subconfiguration."""
    config = list(config)
    cand = seed = 0
    for s in config:
        cand |= dag.below_mask[s.B.bit_length() - 1]
        if not self_blocking(dag, s):
            seed |= 1 << s.bot
    return _min_measure(dag, lambda U: all(blocks(dag, U, s) for s in config), cand, seed, max_candidates)


def potential(dag: LayeredDag, target, max_candidates: int = DEFAULT_MAX_CANDIDATES) -> PotentialResult:
    if isinstance(target, BwConfig):
        return potential_bw(dag, target, max_candidates)
    return potential_blob(dag, target, max_candidates)


# -- tight sets and hiding set graphs ----------------------------------------------

def is_tight(dag: LayeredDag, U) -> bool:
    U = _m(dag, U)
    return all(not hidden_mask(dag, U & ~(1 << u)) >> u & 1 for u in bits(U))


def tight_subset(dag: LayeredDag, U) -> frozenset[int]:
    """The tight subset of U hiding the same vertices, built level by level."""
    rest = _m(dag, U)
    tight = 0
    for L in range(dag.h + 1):
        on = rest & dag.level_mask[L]
        if not on:
            continue
        tight |= on
        rest &= ~hidden_mask(dag, tight)
    return frozenset(bits(tight))


def _necessary(dag: LayeredDag, X: int, x: int) -> int:
    out = 0
    for u in bits(X & dag.below_mask[x]):
        others = X & ~(1 << u)
        if hidden_mask(dag, others) >> u & 1:
            continue
        if _reach_avoiding(dag, u, others) >> x & 1:
            out |= 1 << u
    return out


def necessary_hiding(dag: LayeredDag, X, x: int | str) -> frozenset[int]:
    """X<x>: members u of X with a source path to x meeting X only in u."""
    X, x = _m(dag, X), dag.vertex(x)
    if not hidden_mask(dag, X) >> x & 1:
        raise HidingError(f"{dag.name(x)} is not hidden by the given set")
    return frozenset(bits(_necessary(dag, X, x)))


@dataclass
class HidingSetGraph:
    vertices: frozenset
    edges: frozenset            # pairs (x, y) with x < y
    components: list            # sorted lists of vertex ids
    necessary: dict = field(default_factory=dict)

    @property
    def connected(self) -> bool:
        return len(self.components) == 1

    def as_dict(self, dag: LayeredDag) -> dict:
        return {"vertices": dag.label(self.vertices),
                "edges": [dag.label([a, b]) for a, b in sorted(self.edges)],
                "components": [dag.label(c) for c in self.components]}


def _planar_shortcut(dag: LayeredDag) -> bool:
    return dag.kind == "pyramid"


def hiding_graph(dag: LayeredDag, X, shortcut: bool | None = None) -> HidingSetGraph:
    X = _m(dag, X)
    if not X:
        raise HidingError("hiding set graph needs a non-empty set")
    if not is_tight(dag, X):
        raise HidingError("vertex set is not tight")
    H = hidden_mask(dag, X)
    verts = bits(H)
    nec = {x: _necessary(dag, X, x) for x in verts}
    if shortcut is None:
        shortcut = _planar_shortcut(dag)
    if shortcut:
        region = {x: nec[x] for x in verts}
    else:
        region = {x: dag.below_mask[x] & hidden_mask(dag, nec[x]) for x in verts}
    edges = set()
    for a, b in itertools.combinations(verts, 2):
        if region[a] & region[b]:
            edges.add((a, b))
    parent = {v: v for v in verts}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in edges:
        parent[find(a)] = find(b)
    comps: dict[int, list[int]] = {}
    for v in verts:
        comps.setdefault(find(v), []).append(v)
    components = sorted(comps.values())
    for comp in components:
        cm = to_mask(comp)
        if hidden_mask(dag, X & cm) != cm:
            raise HidingError("component is not the hidden set of its own members")
    return HidingSetGraph(frozenset(verts), frozenset(edges), components,
                          {x: frozenset(bits(m)) for x, m in nec.items()})


def is_hiding_connected(dag: LayeredDag, X) -> bool:
    return hiding_graph(dag, X).connected


# -- minimum hiding sets above a level, spreading ------------------------------------

def _mhs(dag: LayeredDag, j: int, target: int, cache: dict, max_candidates: int) -> int:
    key = (j, target)
    hit = cache.get(key)
    if hit is not None:
        return hit
    if not target:
        cache[key] = 0
        return 0
    # only vertices at level >= j below some target vertex can help
    cand = 0
    for t in bits(target):
        cand |= dag.below_mask[t]
    cand &= dag.level_ge_mask[j]
    cands = bits(cand)
    tried = 0
    for size in range(1, bin(target).count("1") + 1):
        for combo in itertools.combinations(cands, size):
            tried += 1
            if tried > max_candidates:
                raise SearchBudget(f"mhs search exceeded {max_candidates} candidate sets")
            if hidden_mask(dag, to_mask(combo)) & target == target:
                cache[key] = size
                return size
    raise HidingError("no hiding set found")  # target itself always works


def mhs(dag: LayeredDag, j: int, X, max_candidates: int = DEFAULT_MAX_CANDIDATES,
        _cache: dict | None = None) -> int:
    """Smallest Y on levels >= j hiding the part of X on levels >= j."""
    X = _m(dag, X)
    if j < 0:
        raise HidingError("level must be non-negative")
    if j > dag.h:
        return 0
    return _mhs(dag, j, X & dag.level_ge_mask[j], {} if _cache is None else _cache, max_candidates)


def min_level(dag: LayeredDag, X: int) -> int:
    return min(dag.level[v] for v in bits(X))


def max_level(dag: LayeredDag, X: int) -> int:
    return max(dag.level[v] for v in bits(X))


@dataclass
class SpreadingResult:
    verdict: str                # pass | fail | partial
    counterexample: dict | None
    sets_checked: int
    inequalities_checked: int
    note: str = ""

    def as_dict(self) -> dict:
        return {"verdict": self.verdict, "counterexample": self.counterexample,
                "sets_checked": self.sets_checked, "inequalities_checked": self.inequalities_checked,
                "note": self.note}


def spreading_inequality(dag: LayeredDag, X: int, j: int, cache: dict | None = None) -> tuple[bool, int, int]:
    """(holds, lhs, rhs) for |X| >= mhs_j(hidden(X)) + j - minlevel(X)."""
    H = hidden_mask(dag, X)
    rhs = mhs(dag, j, H, _cache=cache) + j - min_level(dag, X)
    lhs = bin(X).count("1")
    return lhs >= rhs, lhs, rhs


def _spread_range(dag: LayeredDag, lo: int, hi: int) -> tuple[int, int, dict | None]:
    cache: dict = {}
    sets = ineqs = 0
    for X in range(lo, hi):
        if not is_tight(dag, X):
            continue
        if not hiding_graph(dag, X).connected:
            continue
        sets += 1
        top = max_level(dag, hidden_mask(dag, X))
        for j in range(1, top + 1):
            ineqs += 1
            ok, lhs, rhs = spreading_inequality(dag, X, j, cache)
            if not ok:
                return sets, ineqs, {"X": bits(X), "X_names": dag.label(bits(X)), "j": j,
                                     "size": lhs, "bound": rhs}
    return sets, ineqs, None


def spreading_check(dag: LayeredDag, max_vertices: int = 16, max_sets: int | None = None,
                    jobs: int = 1) -> SpreadingResult:
    """Check the spreading inequality for every tight hiding-connected X and level j.

    With ``jobs > 1`` the candidate sets are split into ranges checked in
    worker processes; results are merged in range order, so the report is
    the same as for a single job.
    """
    limit = 1 << dag.n
    note = ""
    if dag.n > max_vertices:
        limit = 1 << max_vertices
        note = f"only sets within the first {max_vertices} vertex ids were enumerated"
    if max_sets is not None and max_sets < limit - 1:
        limit = max_sets + 1
        note = f"stopped after {max_sets} candidate sets"
    if jobs <= 1 or limit < 256:
        parts = [_spread_range(dag, 1, limit)]
    else:
        from concurrent.futures import ProcessPoolExecutor
        step = -(-(limit - 1) // (4 * jobs))
        bounds = [(lo, min(lo + step, limit)) for lo in range(1, limit, step)]
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_spread_range, [dag] * len(bounds), *zip(*bounds)))
    sets = ineqs = 0
    for s, i, bad in parts:
        sets += s
        ineqs += i
        if bad is not None:
            return SpreadingResult("fail", bad, sets, ineqs, note)
    return SpreadingResult("partial" if note else "pass", None, sets, ineqs, note)


# -- white elimination -------------------------------------------------------------

@dataclass
class Classification:
    hidden: frozenset           # subconfigurations hidden by U
    just_blocked: frozenset
    bottoms_hidden: frozenset   # Bl_H
    bottoms_blocked: frozenset  # Bl_B
    whites_hidden: frozenset    # W_H: whites below the bottom, hidden part
    whites_blocked: frozenset   # W_B

    def as_dict(self, dag: LayeredDag) -> dict:
        return {"hidden": sorted(s.show(dag) for s in self.hidden),
                "just_blocked": sorted(s.show(dag) for s in self.just_blocked),
                "Bl_H": dag.label(self.bottoms_hidden), "Bl_B": dag.label(self.bottoms_blocked),
                "W_H": dag.label(self.whites_hidden), "W_B": dag.label(self.whites_blocked)}


def classify(dag: LayeredDag, config: Iterable[Sub], U) -> Classification:
    U = _m(dag, U)
    hid, blk = [], []
    for s in config:
        (hid if hides_sub(dag, U, s) else blk).append(s)

    def whites(group):
        m = 0
        for s in group:
            m |= s.W & dag.below_mask[s.bot]
        return frozenset(bits(m))

    return Classification(frozenset(hid), frozenset(blk),
                          frozenset(s.bot for s in hid), frozenset(s.bot for s in blk),
                          whites(hid), whites(blk))


@dataclass
class Elimination:
    config: frozenset
    self_blockers: frozenset
    classification: Classification


def white_eliminate_sub(dag: LayeredDag, sc: Sub, U) -> Sub:
    U = _m(dag, U)
    W = sc.W
    for w in bits(sc.W):
        if blocks_chain(dag, U | (W & ~(1 << w)), sc.B):
            W &= ~(1 << w)
    return Sub.of(sc.B, W)


def white_eliminate(dag: LayeredDag, config: Iterable[Sub], U) -> Elimination:
    """Drop self-blockers, then strip every white pebble U can do without.

    The classification describes the configuration as given.
    """
    config = frozenset(config)
    U = _m(dag, U)
    if not blocks_config(dag, U, config):
        raise HidingError("the given set does not block the configuration")
    selfb = frozenset(s for s in config if self_blocking(dag, s))
    out = frozenset(white_eliminate_sub(dag, s, U) for s in config - selfb)
    return Elimination(out, selfb, classify(dag, config, U))


# -- verifiers for the induction inequalities ------------------------------------------

def klawe_inequality(dag: LayeredDag, configs: Sequence[BwConfig]) -> list[dict]:
    """Steps where pot exceeds twice the running maximum cost."""
    bad = []
    worst = 0
    for t, c in enumerate(configs):
        worst = max(worst, c.cost)
        p = potential_bw(dag, c).potential
        if p > THEORY_CONSTANTS["klawe_factor"] * worst:
            bad.append({"step": t, "potential": p, "max_cost": worst})
    return bad


def blob_inequality(dag: LayeredDag, configs: Sequence[Iterable[Sub]]) -> list[dict]:
    bad = []
    worst = 0
    cache: dict = {}
    for t, c in enumerate(configs):
        c = frozenset(c)
        worst = max(worst, blob_cost(c, dag))
        p = cache.get(c)
        if p is None:
            p = cache[c] = potential_blob(dag, c).potential
        if p > THEORY_CONSTANTS["blob_factor"] * worst:
            bad.append({"step": t, "potential": p, "max_cost": worst})
    return bad
