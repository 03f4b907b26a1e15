"""Configuration-style resolution: replay, metrics and refutation builders."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .dag import LayeredDag
from .formula import (Clause, CnfFormula, PebblingFormula, pebbling_contradiction, strip_targets)


class ResolutionError(ValueError):
    pass


class ReplayError(ResolutionError):
    def __init__(self, step: int | None, msg: str):
        self.step = step
        super().__init__(msg if step is None else f"step {step}: {msg}")


def resolve(c1: Sequence[int], c2: Sequence[int], x: int) -> Clause:
    """Resolvent of ``c1`` (containing x) and ``c2`` (containing -x)."""
    x = abs(x)
    if x not in c1 or -x not in c2:
        raise ResolutionError(f"pivot {x} must occur positively in the first and negatively in the second premise")
    out = [l for l in c1 if l != x]
    seen = set(out)
    for l in c2:
        if l != -x and l not in seen:
            out.append(l)
            seen.add(l)
    if any(-l in seen for l in out):
        raise ResolutionError("tautological resolvent")
    return tuple(out)


# a step is ("d", axiom_index) | ("i", id1, id2, var) | ("e", id); axiom indices are 1-based
Step = tuple


@dataclass
class DerivationTrace:
    steps: list[Step]
    goal: Clause = ()
    formula: CnfFormula | None = field(default=None, repr=False)
    cnf_name: str = "-"

    def to_text(self) -> str:
        lines = [f"p drv {self.cnf_name}"]
        if self.goal:
            lines.append("c goal " + " ".join(map(str, self.goal)))
        for s in self.steps:
            lines.append(" ".join(map(str, s)))
        return "\n".join(lines) + "\n"


def parse_trace(text: str) -> DerivationTrace:
    steps: list[Step] = []
    name = None
    goal: Clause = ()
    for lineno, raw in enumerate(text.splitlines(), 1):
        tok = raw.split()
        if tok[:2] == ["c", "goal"]:
            try:
                goal = tuple(int(x) for x in tok[2:])
            except ValueError:
                raise ResolutionError(f"line {lineno}: bad goal {raw!r}") from None
            continue
        if not tok or tok[0] == "c":
            continue
        try:
            if tok[0] == "p" and len(tok) == 3 and tok[1] == "drv":
                name = tok[2]
            elif tok[0] == "d" and len(tok) == 2:
                steps.append(("d", int(tok[1])))
            elif tok[0] == "i" and len(tok) == 4:
                steps.append(("i", int(tok[1]), int(tok[2]), int(tok[3])))
            elif tok[0] == "e" and len(tok) == 2:
                steps.append(("e", int(tok[1])))
            else:
                raise ValueError
        except ValueError:
            raise ResolutionError(f"line {lineno}: cannot parse {raw!r}") from None
    if name is None:
        raise ResolutionError("missing 'p drv' header")
    return DerivationTrace(steps, goal, cnf_name=name)


@dataclass
class Metrics:
    length: int
    width: int
    clause_space: int
    variable_space: int
    profile: list[int]

    def as_dict(self) -> dict:
        return {"length": self.length, "width": self.width, "clause_space": self.clause_space,
                "variable_space": self.variable_space, "profile": list(self.profile)}


def configurations(f: CnfFormula, t: DerivationTrace) -> Iterator[tuple[int, dict[int, Clause]]]:
    """Yield (step index, live configuration) after every step, checking legality.

    The configuration maps clause ids to clauses; ids are handed out 1, 2, ...
    in order of entry and are never reused.
    """
    live: dict[int, Clause] = {}
    next_id = 1
    yield 0, dict(live)
    for k, s in enumerate(t.steps, 1):
        op = s[0]
        if op == "d":
            a = s[1]
            if not 1 <= a <= len(f.clauses):
                raise ReplayError(k, f"no axiom {a}")
            live[next_id] = f.clauses[a - 1]
            next_id += 1
        elif op == "i":
            _, a, b, x = s
            if a not in live or b not in live:
                raise ReplayError(k, f"premise {a if a not in live else b} not in memory")
            try:
                live[next_id] = resolve(live[a], live[b], x)
            except ResolutionError as exc:
                raise ReplayError(k, str(exc)) from None
            next_id += 1
        elif op == "e":
            if s[1] not in live:
                raise ReplayError(k, f"clause {s[1]} not in memory")
            del live[s[1]]
        else:
            raise ReplayError(k, f"unknown step {op!r}")
        yield k, dict(live)


def replay(f: CnfFormula, t: DerivationTrace) -> Metrics:
    length = width = space = vspace = 0
    profile: list[int] = []
    final: dict[int, Clause] = {}
    for k, live in configurations(f, t):
        if k == 0:
            continue
        if t.steps[k - 1][0] != "e":
            length += 1
            width = max(width, len(live[max(live)]))
        profile.append(len(live))
        space = max(space, len(live))
        vspace = max(vspace, sum(len(c) for c in live.values()))
        final = live
    goal = frozenset(t.goal)
    if not any(frozenset(c) == goal for c in final.values()):
        raise ReplayError(None, "goal not reached")
    return Metrics(length, width, space, vspace, profile)


def boundary_configs(f: CnfFormula, t: DerivationTrace) -> list[list[Clause]]:
    """Clause configurations before the first and after every step."""
    return [[live[i] for i in sorted(live)] for _, live in configurations(f, t)]


# -- builders -------------------------------------------------------------------

class _Writer:
    """Keeps the live configuration while a builder emits steps."""

    def __init__(self, f: PebblingFormula):
        self.f = f
        self.index = {}
        for k, c in enumerate(f.clauses, 1):
            self.index.setdefault(c, k)
        self.steps: list[Step] = []
        self.live: dict[int, Clause] = {}
        self.next_id = 1

    def download(self, c: Clause) -> int:
        self.steps.append(("d", self.index[c]))
        self.live[self.next_id] = c
        self.next_id += 1
        return self.next_id - 1

    def infer(self, a: int, b: int, x: int) -> int:
        """Resolve on variable x; the premise order is fixed up automatically."""
        ca, cb = self.live[a], self.live[b]
        if x not in ca:
            a, b, ca, cb = b, a, cb, ca
        self.live[self.next_id] = resolve(ca, cb, x)
        self.steps.append(("i", a, b, x))
        self.next_id += 1
        return self.next_id - 1

    def erase(self, *ids: int) -> None:
        for a in ids:
            self.steps.append(("e", a))
            del self.live[a]

    def trace(self, goal: Clause) -> DerivationTrace:
        return DerivationTrace(self.steps, goal, self.f)


def _axiom(f: PebblingFormula, w: int, i: int, j: int) -> Clause:
    u, v = f.dag.preds[w]
    return (-f.var(u, i), -f.var(v, j)) + f.all_pos(w)


def _formula(dag: LayeredDag, d: int, targets: bool) -> PebblingFormula:
    f = pebbling_contradiction(dag, d)
    return f if targets else strip_targets(f)


def _refute_sink(wr: _Writer, zid: int) -> None:
    """Resolve All+(z) against the d target units down to the empty clause."""
    f = wr.f
    cur = zid
    for i in range(1, f.degree + 1):
        unit = wr.download((-f.var(f.dag.sink, i),))
        nxt = wr.infer(cur, unit, f.var(f.dag.sink, i))
        wr.erase(unit, cur)
        cur = nxt


def _derive_all_pos(wr: _Writer, w: int, fetch, release=None) -> int:
    """Derive All+(w) from All+(u), All+(v) for the predecessors u, v of w.

    For each j the clause -v_j v All+(w) is built by resolving All+(u)
    against the axioms for (i, j), i = 1..d, and is then resolved into the
    running clause that started as All+(v).  At most four clauses beyond
    the inputs are live at any moment.  ``fetch`` makes sure All+(p) is
    present in memory for a predecessor p and returns its id; ``release``
    is told when this derivation no longer needs All+(p).
    """
    f = wr.f
    d = f.degree
    u, v = f.dag.preds[w]
    acc = None
    for j in range(1, d + 1):
        x = None
        for i in range(1, d + 1):
            ax = wr.download(_axiom(f, w, i, j))
            src = fetch(u) if x is None else x
            nx = wr.infer(src, ax, f.var(u, i))
            wr.erase(ax)
            if x is None and j == d and release:
                release(u)
            if x is not None:
                wr.erase(x)
            x = nx
        src = fetch(v) if acc is None else acc
        nacc = wr.infer(src, x, f.var(v, j))
        wr.erase(x)
        if acc is None and release:
            release(v)
        if acc is not None:
            wr.erase(acc)
        acc = nacc
    return acc


def build_linear(dag: LayeredDag, d: int, targets: bool = True) -> DerivationTrace:
    """Derive All+(v) for every vertex in id order, then refute the sink.

    Source axioms are downloaded only when a successor first needs them and
    every All+(v) is erased as soon as its last successor is done.
    """
    f = _formula(dag, d, targets)
    wr = _Writer(f)
    ids: dict[int, int] = {}
    pending = [len(dag.succs[v]) for v in range(dag.n)]

    def fetch(p: int) -> int:
        if p not in ids:
            ids[p] = wr.download(f.all_pos(p))
        return ids[p]

    def release(p: int) -> None:
        pending[p] -= 1
        if pending[p] == 0:
            wr.erase(ids.pop(p))

    for w in range(dag.n):
        if not dag.is_source(w):
            ids[w] = _derive_all_pos(wr, w, fetch, release)
    zid = fetch(dag.sink)
    if targets:
        _refute_sink(wr, zid)
        return wr.trace(())
    return wr.trace(f.all_pos(dag.sink))


def build_from_pebbling(dag: LayeredDag, d: int, pebbling, targets: bool = True) -> DerivationTrace:
    """Follow a complete black pebbling, keeping All+(v) for each black v.

    ``pebbling`` is a sequence of moves ("+b", v) / ("-b", v).
    """
    from .pebbling import Pebbling, check_black_complete

    moves = pebbling.moves if isinstance(pebbling, Pebbling) else list(pebbling)
    check_black_complete(dag, moves)
    f = _formula(dag, d, targets)
    wr = _Writer(f)
    ids: dict[int, int] = {}

    def fetch(p: int) -> int:
        return ids[p]

    for op, v in moves:
        if op == "+b":
            if dag.is_source(v):
                ids[v] = wr.download(f.all_pos(v))
            else:
                ids[v] = _derive_all_pos(wr, v, fetch)
        else:
            wr.erase(ids.pop(v))
    zid = ids[dag.sink]
    if targets:
        _refute_sink(wr, zid)
        return wr.trace(())
    return wr.trace(f.all_pos(dag.sink))


def build_degree1(dag: LayeredDag, targets: bool = True) -> DerivationTrace:
    """Tree-like degree-1 refutation that pushes negative literals to the sources."""
    f = _formula(dag, 1, targets)
    wr = _Writer(f)
    z = dag.sink
    cur = wr.download(_axiom(f, z, 1, 1))
    for w in reversed(range(z)):
        if dag.is_source(w) or -f.var(w, 1) not in wr.live[cur]:
            continue
        ax = wr.download(_axiom(f, w, 1, 1))
        nxt = wr.infer(ax, cur, f.var(w, 1))
        wr.erase(ax, cur)
        cur = nxt
    for s in dag.sources:
        if -f.var(s, 1) not in wr.live[cur]:
            continue
        ax = wr.download(f.all_pos(s))
        nxt = wr.infer(ax, cur, f.var(s, 1))
        wr.erase(ax, cur)
        cur = nxt
    if targets:
        unit = wr.download((-f.var(z, 1),))
        wr.infer(cur, unit, f.var(z, 1))
        return wr.trace(())
    return wr.trace(f.all_pos(z))


def refutable_in_width(f: CnfFormula, w: int, max_clauses: int = 2_000_000) -> bool:
    """Whether f has a resolution refutation in which every clause has width <= w.

    Saturates under width-bounded resolution with forward subsumption; a
    clause subsumed by one already kept can never help within the bound.
    """
    from itertools import combinations

    kept: set[frozenset[int]] = set()
    by_lit: dict[int, list[frozenset[int]]] = {}
    queue: list[frozenset[int]] = []

    def subsumed(c: frozenset[int]) -> bool:
        lits = sorted(c)
        return any(frozenset(s) in kept for r in range(1, len(lits) + 1) for s in combinations(lits, r))

    def add(c: frozenset[int]) -> None:
        kept.add(c)
        queue.append(c)
        for l in c:
            by_lit.setdefault(l, []).append(c)

    for c in f.clauses:
        c = frozenset(c)
        if not c:
            return True
        if len(c) <= w and not subsumed(c):
            add(c)
    # input clauses wider than w may still be used as premises
    wide = [frozenset(c) for c in f.clauses if len(c) > w]
    for c in wide:
        for l in c:
            by_lit.setdefault(l, []).append(c)
    queue.extend(wide)
    k = 0
    while k < len(queue):
        c = queue[k]
        k += 1
        for l in c:
            for e in list(by_lit.get(-l, ())):
                r = (c - {l}) | (e - {-l})
                if len(r) > w or any(-x in r for x in r):
                    continue
                if not r:
                    return True
                if not subsumed(r):
                    add(r)
                    if len(kept) > max_clauses:
                        raise ResolutionError("width saturation exceeded its clause budget")
    return False
