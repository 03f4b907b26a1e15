"""Truth-table entailment, induced blob configurations and the translation
of resolution derivations into blob-pebblings.

A vertex is *true* under an assignment when at least one of its d
variables is true.  For a clause set C, every model of C leaves some set
of vertices false; C together with truth(S) implies All+(B) exactly when no
model of C has all of B false while every vertex of S is true.  All
entailment questions about a configuration are therefore answered from
the set of false-vertex masks of its models.
"""

from __future__ import annotations

import dataclasses
from collections import OrderedDict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .blob import (BlobError, BlobMove, Sub, apply_blob, blob_cost, check_inflation,
                   final_config, intro, merge, merger_vertex, run_blob, all_chains)
from .dag import LayeredDag, bits, to_mask
from .formula import Clause, PebblingFormula, all_pos
from .resolution import DerivationTrace, boundary_configs, replay


class EntailmentBudget(RuntimeError):
    pass


class TranslationError(RuntimeError):
    def __init__(self, msg: str, step: int | None = None):
        self.step = step
        super().__init__(msg if step is None else f"step {step}: {msg}")


MAX_ENTAIL_VARS = 24
MAX_INDUCED_VARS = 16
MAX_INDUCED_CLAUSES = 10


def _lit_masks(c: Iterable[int]) -> tuple[int, int]:
    pos = neg = 0
    for l in c:
        if l > 0:
            pos |= 1 << (l - 1)
        else:
            neg |= 1 << (-l - 1)
    return pos, neg


@lru_cache(maxsize=8)
def _assignments(n: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.uint32)


@lru_cache(maxsize=4096)
def _sat_vector(n: int, clause: frozenset[int]) -> np.ndarray:
    A = _assignments(n)
    pos, neg = _lit_masks(clause)
    return ((A & np.uint32(pos)) != 0) | ((A & np.uint32(neg)) != np.uint32(neg))


def entails(clauses: Iterable[Sequence[int]], goal: Sequence[int], nvars: int) -> bool:
    """Truth-table check that every model of ``clauses`` satisfies ``goal``."""
    clauses = [frozenset(c) for c in clauses]
    if nvars > MAX_ENTAIL_VARS:
        raise EntailmentBudget(f"{nvars} variables exceed the truth-table limit {MAX_ENTAIL_VARS}")
    # only assignments falsifying the goal matter: fix its variables and sweep the rest
    gpos, gneg = _lit_masks(goal)
    if gpos & gneg:
        return True
    free = [x for x in range(nvars) if not (gpos | gneg) >> x & 1]
    A = np.zeros(1 << len(free), dtype=np.uint32)
    idx = np.arange(1 << len(free), dtype=np.uint32)
    for k, x in enumerate(free):
        A |= ((idx >> np.uint32(k)) & np.uint32(1)) << np.uint32(x)
    A |= np.uint32(gneg)
    ok = np.ones(len(A), dtype=bool)
    for c in clauses:
        pos, neg = _lit_masks(c)
        ok &= ((A & np.uint32(pos)) != 0) | ((A & np.uint32(neg)) != np.uint32(neg))
        if not ok.any():
            return True
    return not ok.any()


def truth(S: Iterable[int], d: int) -> list[Clause]:
    return [all_pos(d, v) for v in sorted(S)]


def some_true(B: Iterable[int], d: int) -> Clause:
    return tuple(x for v in sorted(B) for x in all_pos(d, v))


def precise_implication(C_B: Sequence[Sequence[int]], S: Iterable[int], B: Iterable[int],
                        dag: LayeredDag, d: int) -> bool:
    """C_B with truth(S) implies All+(B), and no strict subset of C_B, S or B will do.

    Entailment is monotone in each argument, so it is enough to drop one
    element at a time (and, for a single-vertex B, to try the empty clause).
    """
    C_B = [tuple(c) for c in C_B]
    S, B = sorted(set(S)), sorted(set(B))
    n = d * dag.n
    if not B or set(S) & set(B):
        return False

    def ent(cs, ss, bs):
        return entails(list(cs) + truth(ss, d), some_true(bs, d), n)

    if not ent(C_B, S, B):
        return False
    if any(ent(C_B[:k] + C_B[k + 1:], S, B) for k in range(len(C_B))):
        return False
    if any(ent(C_B, [s for s in S if s != x], B) for x in S):
        return False
    if any(ent(C_B, S, [b for b in B if b != x]) for x in B):
        return False
    return True


# -- induced configurations ------------------------------------------------------

class _Space:
    """Per-(dag, d) tables shared by all induced-configuration computations."""

    def __init__(self, dag: LayeredDag, d: int):
        n = d * dag.n
        if n > MAX_INDUCED_VARS:
            raise EntailmentBudget(f"{n} variables exceed the induced-configuration limit {MAX_INDUCED_VARS}")
        self.dag, self.d, self.n = dag, d, n
        A = _assignments(n)
        fm = np.zeros(len(A), dtype=np.int64)
        block = np.uint32((1 << d) - 1)
        for v in range(dag.n):
            allfalse = ((A >> np.uint32(d * v)) & block) == 0
            fm |= allfalse.astype(np.int64) << v
        self.fm = fm
        self.nv = dag.n
        NV = 1 << dag.n
        f = np.arange(NV)
        # contains[B, f]: B is a subset of f
        self.contains = (f[None, :] & f[:, None]) == f[:, None]
        self.zeta_idx = [(f[(f >> b) & 1 == 1], f[(f >> b) & 1 == 1] ^ (1 << b)) for b in range(dag.n)]
        self.chains = sorted(all_chains(dag), key=lambda m: (bin(m).count("1"), bits(m)))
        self.lpp = {B: dag.lpp_mask(B) for B in self.chains}
        self.cache: OrderedDict = OrderedDict()

    def hit_table(self, present: np.ndarray) -> list[int]:
        """For each B, bitmask over U of "some false-mask f has B <= f <= U"."""
        M = self.contains & present[None, :]
        for hi, lo in self.zeta_idx:
            M[:, hi] |= M[:, lo]
        packed = np.packbits(M, axis=1, bitorder="little")
        return [int.from_bytes(row.tobytes(), "little") for row in packed]


_spaces: dict[tuple[int, int], _Space] = {}


def _space(dag: LayeredDag, d: int) -> _Space:
    key = (id(dag), d)
    sp = _spaces.get(key)
    if sp is None or sp.dag is not dag:
        sp = _Space(dag, d)
        _spaces[key] = sp
    return sp


@dataclass
class Induced:
    subs: frozenset
    # every witness found, as (indices into the clause list, S mask)
    witnesses: dict = field(default_factory=dict)
    clauses: list = field(default_factory=list)


def induced_config(cfg: Iterable[Sequence[int]], dag: LayeredDag, d: int,
                   max_clauses: int = MAX_INDUCED_CLAUSES) -> Induced:
    """All blob subconfigurations induced by the clause set ``cfg``."""
    clauses: list[Clause] = []
    seen = set()
    for c in cfg:
        k = frozenset(c)
        if k not in seen:
            seen.add(k)
            clauses.append(tuple(c))
    if len(clauses) > max_clauses:
        raise EntailmentBudget(f"{len(clauses)} clauses exceed the induced-configuration limit {max_clauses}")
    sp = _space(dag, d)
    key = frozenset(frozenset(c) for c in clauses)
    hit = sp.cache.get(key)
    if hit is not None:
        sp.cache.move_to_end(key)
        return hit
    res = _induced(sp, clauses)
    sp.cache[key] = res
    if len(sp.cache) > 4096:
        sp.cache.popitem(last=False)
    return res


def _induced(sp: _Space, clauses: list[Clause]) -> Induced:
    k = len(clauses)
    NV = 1 << sp.nv
    full = NV - 1
    vecs = [_sat_vector(sp.n, frozenset(c)) for c in clauses]
    models = [None] * (1 << k)
    models[0] = np.ones(1 << sp.n, dtype=bool)
    # hits[mask][B] has bit U set iff some model of the clause subset has B <= falsemask <= U;
    # the subset then implies All+(B) under truth(complement of U) iff that bit is clear
    hits: list[list[int]] = [None] * (1 << k)
    for mask in range(1 << k):
        if mask:
            lowbit = mask & -mask
            models[mask] = models[mask ^ lowbit] & vecs[lowbit.bit_length() - 1]
        present = np.zeros(NV, dtype=bool)
        present[np.unique(sp.fm[models[mask]])] = True
        hits[mask] = sp.hit_table(present)
    order = sorted(range(1, 1 << k), key=lambda m: (bin(m).count("1"), m))
    found: dict[Sub, list] = {}
    for B in sp.chains:
        lpp = sp.lpp[B]
        bs = bits(B)
        for mask in order:
            hb = hits[mask][B]
            cs = bits(mask)
            # candidate U = V minus S, always containing B
            rest = full & ~B
            S = 0
            while True:
                # iterate S over subsets of rest, popcount-agnostic; order fixed below
                U = full & ~S
                if not hb >> U & 1 and _precise(hits, mask, cs, B, bs, S, U):
                    sub = Sub.of(B, S & lpp)
                    found.setdefault(sub, []).append((tuple(cs), S))
                if S == rest:
                    break
                S = (S - rest) & rest
    subs = frozenset(found)
    for s in found:
        found[s].sort(key=lambda w: (len(w[0]), w[0], bin(w[1]).count("1"), w[1]))
    return Induced(subs, found, clauses)


def _precise(hits, mask: int, cs: list[int], B: int, bs: list[int], S: int, U: int) -> bool:
    hb = hits[mask]
    for s in bits(S):
        if hb[B] >> (U | 1 << s) & 1 == 0:
            return False
    if len(bs) == 1:
        if hb[0] >> U & 1 == 0:
            return False
    else:
        for b in bs:
            if hb[B ^ 1 << b] >> U & 1 == 0:
                return False
    for c in cs:
        if hits[mask ^ 1 << c][B] >> U & 1 == 0:
            return False
    return True


# -- translation -------------------------------------------------------------------

@dataclass
class Translation:
    moves: list[BlobMove]
    boundaries: list[frozenset]
    # index into moves after which each boundary configuration is reached
    marks: list[int]
    max_cost: int
    fallback_steps: list[int]


def _closure_derivation(dag: LayeredDag, target: Sub, base: dict, have: frozenset,
                        max_merges: int = 3):
    """Close ``base`` under mergers until ``target`` is in it or inflatable from it.

    ``base`` maps candidate subconfigurations to how they are obtained:
    ("have",), ("intro", v) or ("inflate", src).  Returns the derivation
    map restricted to what the target needs, or None.
    """
    pool = dict(base)

    def done() -> Sub | None:
        if target in pool:
            return target
        for s in sorted(pool):
            try:
                check_inflation(dag, s, target)
            except BlobError:
                continue
            return s
        return None

    hit = done()
    frontier = list(pool)
    for _ in range(max_merges):
        if hit is not None:
            break
        new = {}
        items = sorted(pool)
        for a in items:
            for b in items:
                if a == b or not b.B & a.W:
                    continue
                if a not in frontier and b not in frontier:
                    continue
                try:
                    m = merge(dag, a, b)
                except BlobError:
                    continue
                if m not in pool and m not in new:
                    new[m] = ("merge", a, b)
        if not new:
            break
        pool.update(new)
        frontier = list(new)
        hit = done()
    if hit is None:
        return None
    if hit != target:
        pool[target] = ("inflate", hit)
    need: list[Sub] = []

    def visit(s: Sub) -> None:
        if s in need:
            return
        how = pool[s]
        if how[0] == "inflate":
            visit(how[1]) if how[1] in pool else None
        elif how[0] == "merge":
            visit(how[1])
            visit(how[2])
        need.append(s)

    visit(target)
    return [(s, pool[s]) for s in need]


def _inflatable_from(dag: LayeredDag, cur: Iterable[Sub], t: Sub) -> Sub | None:
    for s in sorted(cur):
        if s == t:
            return s
        try:
            check_inflation(dag, s, t)
        except BlobError:
            continue
        return s
    return None


def _download_pieces(dag: LayeredDag, cur: frozenset, T: Sub, S: int, r: int) -> dict:
    base: dict = {}
    I = intro(dag, r)
    base[I] = ("have",) if I in cur else ("intro", r)
    B, W = T.B, T.W
    lppB = dag.lpp_mask(B)

    def add_inflated(t: Sub) -> None:
        if t in base:
            return
        if t in cur:
            base[t] = ("have",)
            return
        src = _inflatable_from(dag, cur, t)
        if src is not None:
            base[t] = ("inflate", src)

    if not B >> r & 1:
        add_inflated(Sub.of(B, W | (lppB & 1 << r)))
    for x in dag.preds[r]:
        if lppB >> x & 1 and not S >> x & 1 and dag.is_chain_mask(B | 1 << x):
            Bx = B | 1 << x
            add_inflated(Sub.of(Bx, S & dag.lpp_mask(Bx)))
    for x in dag.preds[r]:
        below = dag.below_mask[x] & B
        if not below:
            continue
        v = below.bit_length() - 1
        Bv = 1 << v | 1 << r
        if not dag.is_chain_mask(Bv):
            continue
        t = Sub.of(Bv, I.W & dag.lpp_mask(Bv))
        try:
            check_inflation(dag, I, t)
        except BlobError:
            continue
        base.setdefault(t, ("inflate", I))
    for s in cur:
        base.setdefault(s, ("have",))
    return base


def _wide_pieces(dag: LayeredDag, cur: frozenset, T: Sub, S: int, r: int | None) -> dict:
    """Fallback pool: inflations of current subconfigurations (and of the
    introduced axiom vertex) onto chains built from the target's vertices."""
    base: dict = {}
    srcs = list(cur)
    if r is not None:
        I = intro(dag, r)
        base[I] = ("have",) if I in cur else ("intro", r)
        srcs.append(I)
        extra = 1 << r | to_mask(dag.preds[r])
    else:
        extra = 0
    verts = T.B | extra
    whites = T.W | S | extra
    for s in cur:
        base[s] = ("have",)
    for src in srcs:
        free = verts & ~src.B & ~src.W
        sub_free = free
        while True:
            Bn = src.B | sub_free
            if dag.is_chain_mask(Bn):
                lpp = dag.lpp_mask(Bn)
                wmin = src.W & lpp
                opt = whites & lpp & ~wmin
                o = opt
                while True:
                    t = Sub.of(Bn, wmin | o)
                    if t != src and t not in base:
                        base[t] = ("have",) if t in cur else ("inflate", src)
                    if not o:
                        break
                    o = (o - 1) & opt
            if not sub_free:
                break
            sub_free = (sub_free - 1) & free
    return base


def _emit(dag: LayeredDag, deriv, cur: frozenset, step: int, moves: list[BlobMove]) -> frozenset:
    for s, how in deriv:
        if s in cur:
            continue
        if how[0] == "intro":
            mv = BlobMove("intro", how[1], step=step)
        elif how[0] == "inflate":
            mv = BlobMove("inflate", a=how[1], b=s, step=step)
        elif how[0] == "merge":
            mv = BlobMove("merge", merger_vertex(how[1], how[2]), how[1], how[2], step=step)
        else:
            raise TranslationError(f"subconfiguration {bits(s.B)}<{bits(s.W)}> unexpectedly missing", step)
        cur = apply_blob(cur, mv, dag)
        moves.append(mv)
    return cur


def _axiom_vertex(f: PebblingFormula, clause: Clause) -> int:
    pos = [l for l in clause if l > 0]
    if not pos:
        raise TranslationError("target axioms cannot appear in a derivation of All+(z)")
    return f.vertex_of(pos[0])[0]


def _with_goal(f: PebblingFormula, t: DerivationTrace) -> DerivationTrace:
    if t.goal or f.goal is None:
        return t
    return dataclasses.replace(t, goal=f.goal)


def translate(f: PebblingFormula, t: DerivationTrace, check: bool = True) -> Translation:
    """Blob-pebbling whose configuration after each derivation step is the
    configuration induced by the clauses in memory at that step."""
    if f.goal is None:
        raise TranslationError("translation expects the formula without target axioms")
    t = _with_goal(f, t)
    replay(f, t)
    dag, d = f.dag, f.degree
    configs = boundary_configs(f, t)
    ind = [induced_config(c, dag, d) for c in configs]
    moves: list[BlobMove] = []
    marks = [0]
    boundaries = [ind[0].subs]
    cur: frozenset = ind[0].subs
    fallback_steps: list[int] = []
    if cur:
        raise TranslationError("empty configuration induces subconfigurations", 0)
    for k, step in enumerate(t.steps, 1):
        prev, nxt = ind[k - 1].subs, ind[k].subs
        if step[0] == "e":
            if nxt - prev:
                raise TranslationError("erasure induced new subconfigurations", k)
            for s in sorted(prev - nxt):
                mv = BlobMove("erase", a=s, step=k)
                cur = apply_blob(cur, mv, dag)
                moves.append(mv)
        else:
            if prev - nxt:
                raise TranslationError("adding a clause lost subconfigurations", k)
            r = _axiom_vertex(f, f.clauses[step[1] - 1]) if step[0] == "d" else None
            for T in sorted(nxt - prev):
                if T in cur:
                    continue
                before = cur
                deriv = None
                if r is None:
                    src = _inflatable_from(dag, cur, T)
                    if src is not None:
                        deriv = [(T, ("inflate", src))]
                else:
                    for _, S in ind[k].witnesses[T]:
                        deriv = _closure_derivation(dag, T, _download_pieces(dag, cur, T, S, r), cur)
                        if deriv is not None:
                            break
                if deriv is None:
                    for _, S in ind[k].witnesses[T]:
                        deriv = _closure_derivation(dag, T, _wide_pieces(dag, cur, T, S, r), cur, max_merges=4)
                        if deriv is not None:
                            fallback_steps.append(k)
                            break
                if deriv is None:
                    raise TranslationError(f"cannot derive {T.show(dag)}", k)
                cur = _emit(dag, deriv, cur, k, moves)
                for s in sorted(cur - before - nxt):
                    mv = BlobMove("erase", a=s, step=k)
                    cur = apply_blob(cur, mv, dag)
                    moves.append(mv)
        if cur != nxt:
            raise TranslationError("configuration differs from the induced one", k)
        boundaries.append(cur)
        marks.append(len(moves))
    if check:
        seq = run_blob(dag, moves)
        if seq[-1] != final_config(dag):
            raise TranslationError("blob-pebbling does not end in {[z]<>}")
    cost = max(blob_cost(c, dag) for c in run_blob(dag, moves))
    return Translation(moves, boundaries, marks, cost, sorted(set(fallback_steps)))


# -- bound verification ------------------------------------------------------------

@dataclass
class BoundsReport:
    cost_bound: str                 # "pass" | "fail" | "not applicable"
    space_bound: str
    clause_space: int
    max_translated_cost: int | None
    violations: list[dict]

    @property
    def ok(self) -> bool:
        return self.cost_bound != "fail" and self.space_bound != "fail"

    def as_dict(self) -> dict:
        return {"cost_bound": self.cost_bound, "space_bound": self.space_bound,
                "clause_space": self.clause_space, "max_translated_cost": self.max_translated_cost,
                "violations": self.violations}


def verify_bounds(f: PebblingFormula, t: DerivationTrace, translate_too: bool = True) -> BoundsReport:
    """Check cost(S(C_t)) <= |C_t| at every step and the translated cost
    against clause space + 4."""
    t = _with_goal(f, t)
    metrics = replay(f, t)
    dag, d = f.dag, f.degree
    violations = []
    if d >= 2:
        for k, cfg in enumerate(boundary_configs(f, t)):
            distinct = {frozenset(c) for c in cfg}
            cost = blob_cost(induced_config(cfg, dag, d).subs, dag)
            if cost > len(distinct):
                violations.append({"kind": "cost", "step": k, "cost": cost, "clauses": len(distinct)})
        cost_verdict = "fail" if violations else "pass"
    else:
        cost_verdict = "not applicable"
    space_verdict = "not applicable"
    tcost = None
    if translate_too and f.goal is not None:
        tcost = translate(f, t).max_cost
        if tcost > metrics.clause_space + 4:
            violations.append({"kind": "space", "cost": tcost, "clause_space": metrics.clause_space})
            space_verdict = "fail"
        else:
            space_verdict = "pass"
    return BoundsReport(cost_verdict, space_verdict, metrics.clause_space, tcost, violations)
